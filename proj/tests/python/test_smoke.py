import math
import os
import shutil

import numpy as np
import pytest

import fracspec


def laplacian(n=64, half_length=4.0):
    grid = fracspec.Grid(1, n, half_length, "dirichlet")
    return grid, fracspec.operator(grid)


def test_closed_form_spectrum():
    grid, op = laplacian(130, 1.0)
    dec = fracspec.Decomposition(op)
    m = grid.dof_count
    k = np.arange(1, m + 1)
    exact = 4.0 / grid.spacing**2 * np.sin(k * np.pi / (2 * (m + 1))) ** 2
    assert np.max(np.abs(dec.eigenvalues - exact) / exact) < 1e-8


def test_power_composes_to_the_operator():
    grid, _ = laplacian()
    op = fracspec.operator(grid, "radial_bump", scale=0.5, width=2.0)
    dec = fracspec.Decomposition(op)
    f = np.exp(-grid.positions()[:, 0] ** 2)
    half = dec.power(0.5, dec.power(0.5, f))
    assert np.linalg.norm(half - op.apply(f)) <= 1e-9 * np.linalg.norm(op.apply(f))
    assert np.allclose(op.dense(), op.dense().T)


def test_propagators():
    grid, op = laplacian()
    dec = fracspec.Decomposition(op)
    f = np.exp(-grid.positions()[:, 0] ** 2).astype(complex)
    u = dec.propagate(0.5, 1.0, f)
    assert abs(np.linalg.norm(u) / np.linalg.norm(f) - 1.0) < 1e-12
    back = dec.propagate(0.5, -1.0, u)
    assert np.allclose(back, f, atol=1e-12)
    assert np.linalg.norm(dec.viscous_propagate(0.5, 0.1, 1.0, f)) < np.linalg.norm(f)


def test_extension_recovers_the_power():
    assert fracspec.conormal_constant(0.5) == pytest.approx(-1.0, abs=1e-12)
    grid, op = laplacian(64, 8.0)
    dec = fracspec.Decomposition(op)
    u = np.exp(-grid.positions()[:, 0] ** 2)
    ext = fracspec.extend(dec, 0.5, u)
    assert ext.converged
    assert ext.values.shape == (grid.dof_count, len(ext.y))
    rec = fracspec.conormal_recover(ext)
    assert np.linalg.norm(rec - ext.power) <= 1e-3 * np.linalg.norm(ext.power)


def test_dichotomy():
    grid, op = laplacian(128)
    rows = fracspec.dichotomy_sweep(fracspec.Decomposition(op), [(-3.0, -1.0)], [(0.5, 2.5)], [0.5, 1.0])
    assert rows[0]["ratio"] > 1e-6
    assert rows[1]["ratio"] == 0.0


def test_T_star():
    assert fracspec.estimate_T_star(1.0 / 8.0, 3, 3, 1.0) == pytest.approx(1.0 / 16.0)
    assert math.isinf(fracspec.estimate_T_star(0.0, 3, 3, 1.0))


def test_errors_map_to_python():
    grid, op = laplacian(16)
    dec = fracspec.Decomposition(op)
    with pytest.raises(ValueError):
        fracspec.extend(dec, 1.5, np.ones(grid.dof_count))
    with pytest.raises(fracspec.InvalidArgument):
        fracspec.Grid(3, 8, 1.0)
    assert issubclass(fracspec.NumericalError, fracspec.Error)


def test_run_config(tmp_path):
    src = os.path.join(os.environ.get("FRACSPEC_TEST_CONFIGS", ""), "c01_spectrum.yaml")
    if not os.path.exists(src):
        pytest.skip("configs directory not available")
    cfg = tmp_path / "spectrum.yaml"
    shutil.copy(src, cfg)
    manifest = fracspec.run_config(cfg)
    assert manifest["status"] == "success"
    assert manifest["invariants_passed"]
    assert "grid:" in fracspec.validate_config(cfg)
    bad = tmp_path / "bad.yaml"
    bad.write_text(open(src).read().replace("alpha: 0.5", "alpha: -0.5"))
    with pytest.raises(fracspec.ConfigError):
        fracspec.validate_config(bad)
