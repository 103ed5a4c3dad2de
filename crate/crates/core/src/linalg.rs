//! Dense vector helpers and orthonormalization.

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b) / (norm(a) * norm(b))
}

/// Orthonormalizes `rows` with modified Gram-Schmidt followed by a second
/// re-orthogonalization pass. Fails when a row is (numerically) in the span
/// of the previous ones.
pub fn orthonormalize_rows(mut rows: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>> {
    for i in 0..rows.len() {
        let (done, rest) = rows.split_at_mut(i);
        let row = &mut rest[0];
        let original = norm(row);
        if original == 0.0 {
            return Err(Error::InvalidArgument(format!("row {i} is zero")));
        }
        for _pass in 0..2 {
            for q in done.iter() {
                let c = dot(row, q);
                axpy(-c, q, row);
            }
        }
        let n = norm(row);
        if n <= 1e-10 * original {
            return Err(Error::InvalidArgument(format!(
                "row {i} is linearly dependent on the previous rows"
            )));
        }
        row.iter_mut().for_each(|x| *x /= n);
    }
    Ok(rows)
}

/// Largest entry of `|Q Qᵀ - I|` for a set of rows.
pub fn orthonormality_defect(rows: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in rows.iter().enumerate() {
        for (j, b) in rows.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(a, b) - target).abs());
        }
    }
    worst
}

/// Removes the components of a vector lying in a fixed subspace.
#[derive(Debug, Clone)]
pub struct Projector {
    basis: Vec<Vec<f64>>,
}

impl Projector {
    /// Builds the projector onto the orthogonal complement of `span(directions)`.
    pub fn complement_of(directions: Vec<Vec<f64>>) -> Result<Self> {
        Ok(Projector {
            basis: orthonormalize_rows(directions)?,
        })
    }

    pub fn removed_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn apply(&self, v: &mut [f64]) {
        for q in &self.basis {
            let c = dot(v, q);
            axpy(-c, q, v);
        }
    }

    /// Norm of the component of `v` inside the removed subspace.
    pub fn removed_norm(&self, v: &[f64]) -> f64 {
        self.basis
            .iter()
            .map(|q| dot(v, q).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}
