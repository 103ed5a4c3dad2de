"""Smoke test for the Python bindings. Run after `maturin develop`."""

import json
import math
import os
import tempfile

import wedgelab


def test_landscape():
    land = wedgelab.WedgeLandscape(4, 2)
    assert land.dim == 4 and land.wedge_dim == 2
    assert math.isclose(land.loss([3.0, 1.0, -2.0, 0.5]), math.sqrt(1.25), rel_tol=1e-12)
    assert land.nearest_wedge([3.0, 1.0, -2.0, 0.5]) == [0, 2]
    assert land.loss(land.project_to_wedge([3.0, 1.0, -2.0, 0.5])) == 0.0
    g = land.grad([3.0, 1.0, -2.0, 0.5])
    assert math.isclose(sum(x * x for x in g), 1.0, rel_tol=1e-12)


def test_optimize_and_tunnel():
    land = wedgelab.WedgeLandscape(10, 7)
    cfg = wedgelab.OptimizerConfig("adam", learning_rate=0.01, lr_decay=1e-3)
    a, la, _ = wedgelab.minimize(land, [1.0, -0.5, 0.3, 2.0, -1.2, 0.7, 0.1, -0.9, 1.5, 0.4], cfg)
    b, lb, _ = wedgelab.minimize(land, [-0.8, 1.1, -0.2, 0.6, 1.9, -1.4, 0.5, 0.3, -0.7, 1.0], cfg)
    assert la < 1e-3 and lb < 1e-3
    tunnel = wedgelab.build_tunnel(land, a, b, 11, cfg)
    assert len(tunnel) == 11
    assert tunnel.max_loss() < 1e-2 < tunnel.max_start_loss()
    cos = tunnel.deviation_cosines()
    assert cos[0][0] is None and len(cos) == 11
    assert wedgelab.short_direction_count(land, a, method="exact_toy", tol=1e-4) >= 3
    json.loads(tunnel.to_json())


def test_errors_and_cli():
    try:
        wedgelab.WedgeLandscape(3, 3)
    except ValueError:
        pass
    else:
        raise AssertionError("n = D must be rejected")
    assert wedgelab.derive_seed(1, "x", 0) == wedgelab.derive_seed(1, "x", 0)
    with tempfile.TemporaryDirectory() as tmp:
        cfg = os.path.join(tmp, "cfg.json")
        with open(cfg, "w") as f:
            json.dump({"landscape": {"kind": "toy", "D": 6, "n": 4}, "points": 5}, f)
        out = os.path.join(tmp, "out")
        assert wedgelab.run_cli(["barrier", "--config", cfg, "--output", out, "--quiet"]) == 0
        assert os.path.exists(os.path.join(out, "barrier.csv"))
        assert wedgelab.run_cli(["frobnicate"]) == 1


if __name__ == "__main__":
    test_landscape()
    test_optimize_and_tunnel()
    test_errors_and_cli()
    print("smoke test ok")
