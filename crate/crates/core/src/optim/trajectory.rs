use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io::{csv_error, fmt_num};
use crate::param::ParamVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub loss: f64,
    /// Euclidean norm of the configuration.
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub final_point: ParamVector,
    pub converged: bool,
}

impl Trajectory {
    pub fn final_loss(&self) -> f64 {
        self.points.last().map_or(f64::NAN, |p| p.loss)
    }

    pub fn initial_loss(&self) -> f64 {
        self.points.first().map_or(f64::NAN, |p| p.loss)
    }

    /// Writes `step,loss,radius` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "loss", "radius"]).map_err(csv_error)?;
        for p in &self.points {
            w.write_record([p.step.to_string(), fmt_num(p.loss), fmt_num(p.radius)])
                .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}
