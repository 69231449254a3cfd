import math

import numpy as np
import pytest

from activefoil import cst
from activefoil.errors import ContractViolation, DatasetError, EvaluationError
from activefoil.geometry import naca_thickness_pair, nose_resolving_grid
from activefoil.qoi import (
    PANEL_DRAG_GAIN,
    PANEL_DRAG_OFFSET,
    DatasetQoi,
    PanelSurrogate,
    Ridge,
    SyntheticQuadratic,
    camber_lift,
    evaluate_batch,
    export_designs,
    load_dataset,
    panel_surrogate,
    read_design_manifest,
    ridge,
    seeded_quadratic,
    synthetic_quadratic,
    thickness_drag,
)
from activefoil.sampling import sample, unit_box, write_matrix_csv


def test_synthetic_quadratic_literal():
    qoi = synthetic_quadratic([[2.0, 0.0], [0.0, 0.0]], [0.0, 1.0], 3.0)
    assert qoi.evaluate([2.0, 5.0]) == 4.0 + 5.0 + 3.0
    assert qoi.dim == 2
    assert qoi([[2.0, 5.0], [0.0, 0.0]]).tolist() == [12.0, 3.0]
    with pytest.raises(ContractViolation):
        qoi.evaluate([1.0, 2.0, 3.0])
    with pytest.raises(ContractViolation):
        SyntheticQuadratic([[0.0, 1.0], [0.0, 0.0]], [0.0, 0.0], 0.0)
    with pytest.raises(ContractViolation):
        SyntheticQuadratic(np.eye(2), [1.0], 0.0)


def test_seeded_quadratic_reconstruction():
    qoi = seeded_quadratic(4, seed=20)
    again = seeded_quadratic(4, seed=20)
    np.testing.assert_array_equal(qoi.hessian, again.hessian)
    np.testing.assert_array_equal(qoi.linear, again.linear)
    np.testing.assert_array_equal(qoi.hessian, qoi.hessian.T)
    assert qoi.constant == 0.0

    rng = np.random.Generator(np.random.PCG64(20))
    square = rng.standard_normal((4, 4))
    np.testing.assert_array_equal(qoi.hessian, 0.5 * (square + square.T))
    np.testing.assert_array_equal(qoi.linear, rng.standard_normal(4))

    assert not np.array_equal(qoi.hessian, seeded_quadratic(4, seed=21).hessian)
    with pytest.raises(ContractViolation):
        seeded_quadratic(0, seed=1)


def test_ridge_profile_literals():
    lin = ridge([3.0, 4.0], profile="linear")
    np.testing.assert_allclose(lin.direction, [0.6, 0.8], rtol=1e-15)
    assert lin.evaluate([1.0, 1.0]) == pytest.approx(1.4, rel=1e-15)
    assert ridge([3.0, 4.0], "quadratic").evaluate([1.0, 1.0]) == pytest.approx(1.96, rel=1e-15)
    assert ridge([3.0, 4.0], "exp").evaluate([1.0, 1.0]) == pytest.approx(math.exp(1.4), rel=1e-15)


def test_ridge_constant_on_orthogonal_slices():
    qoi = ridge([1.0, 0.0, 0.0])
    base = qoi.evaluate([0.3, 0.0, 0.0])
    for a, b in ((1.0, -1.0), (0.25, 0.75), (-0.9, 0.1)):
        assert qoi.evaluate([0.3, a, b]) == base


def test_ridge_validation():
    with pytest.raises(ContractViolation):
        Ridge([0.0, 0.0])
    with pytest.raises(ContractViolation):
        Ridge([1.0], profile="cubic")
    with pytest.raises(ContractViolation):
        Ridge([1.0], noise_std=-0.1)
    with pytest.raises(ContractViolation):
        Ridge([[1.0, 2.0]])


def test_ridge_noise_is_reproducible():
    noisy = Ridge([1.0, 2.0], noise_std=0.5, noise_seed=3)
    x = np.array([0.2, -0.4])
    assert noisy.evaluate(x) == noisy.evaluate(x)  # bitwise
    assert noisy.evaluate(x) != Ridge([1.0, 2.0], noise_std=0.5, noise_seed=4).evaluate(x)
    assert noisy.evaluate(x) != noisy.evaluate(x + 1e-12)
    clean = Ridge([1.0, 2.0])
    assert abs(noisy.evaluate(x) - clean.evaluate(x)) < 5 * 0.5
    assert noisy.metadata["noise_std"] == 0.5 and noisy.metadata["noise_seed"] == 3


def test_evaluate_batch_error_modes():
    data = DatasetQoi([[0.0, 0.0], [1.0, 1.0]], [5.0, 6.0], tolerance=1e-6)
    X = np.array([[0.0, 0.0], [0.5, 0.5], [1.0, 1.0]])
    with pytest.raises(EvaluationError) as info:
        evaluate_batch(data, X, on_error="raise")
    assert info.value.index == 1

    values, failed = evaluate_batch(data, X, on_error="skip")
    assert failed == [1]
    assert values[0] == 5.0 and values[2] == 6.0
    assert np.isnan(values[1])

    with pytest.raises(ContractViolation):
        evaluate_batch(data, X, on_error="ignore")


class _ParabolicCamber:
    """height 4h*ell*(1-ell); thin-airfoil lift of this camber line is 4*pi*h."""

    def __init__(self, h):
        self.h = h

    def height(self, ell):
        return 4.0 * self.h * ell * (1.0 - ell)

    def slope(self, ell):
        return 4.0 * self.h * (1.0 - 2.0 * ell)


def test_camber_lift_parabolic_oracle():
    h = 0.03
    camber = _ParabolicCamber(h)
    pair = type("Pair", (), {"upper": camber, "lower": camber})()
    assert camber_lift(pair) == pytest.approx(4.0 * math.pi * h, rel=1e-12)
    with pytest.raises(ContractViolation):
        camber_lift(pair, quad_points=0)


def test_camber_lift_is_odd_under_mirror_swap():
    params = cst.CstParams(upper=[0.16, 1.1, 0.9, 1.0, 1.05], lower=[-0.13, 0.85, 1.2, 0.95, 1.0])
    swapped = cst.CstParams(upper=-params.lower, lower=-params.upper)
    assert camber_lift(cst.surface_pair(swapped)) == -camber_lift(cst.surface_pair(params))


def test_camber_lift_zero_for_mirror_pairs():
    assert camber_lift(naca_thickness_pair(0.12)) == 0.0


def test_thickness_drag_literal_and_even():
    pair = naca_thickness_pair(0.12)
    _, ell = nose_resolving_grid(201)
    tmax = float(np.max(pair.upper.height(ell) - pair.lower.height(ell)))
    assert thickness_drag(pair) == PANEL_DRAG_OFFSET + PANEL_DRAG_GAIN * tmax * tmax

    params = cst.CstParams(upper=[0.16, 1.1, 0.9, 1.0, 1.05], lower=[-0.13, 0.85, 1.2, 0.95, 1.0])
    swapped = cst.CstParams(upper=-params.lower, lower=-params.upper)
    assert thickness_drag(cst.surface_pair(params)) == thickness_drag(cst.surface_pair(swapped))

    assert thickness_drag(naca_thickness_pair(0.144)) > thickness_drag(pair)
    with pytest.raises(ContractViolation):
        thickness_drag(pair, grid_size=1)


def test_panel_surrogate_binds_its_box():
    lift = PanelSurrogate("parsec", "lift")
    from activefoil import parsec

    assert lift.dim == 11
    np.testing.assert_array_equal(lift.box.lower, parsec.baseline_box().lower)
    cst_lift, cst_drag = panel_surrogate("cst")
    assert cst_lift.objective == "lift" and cst_drag.objective == "drag"
    assert cst_lift.dim == 10
    with pytest.raises(ContractViolation):
        PanelSurrogate("bezier", "lift")
    with pytest.raises(ContractViolation):
        PanelSurrogate("cst", "moment")


def test_panel_surrogate_frozen_center_values():
    lift, drag = panel_surrogate("cst")
    center = np.zeros(10)
    assert lift.evaluate(center) == pytest.approx(8.253968254092284, rel=1e-12)
    assert drag.evaluate(center) == pytest.approx(0.006666434986206055, rel=1e-12)


def test_panel_surrogate_rejects_infeasible_decode():
    drag = PanelSurrogate("cst", "drag")
    # upper coefficients at their lower bounds, lower at their upper
    # bounds: the surfaces cross near mid-chord
    x = np.array([-1.0] * 5 + [1.0] * 5)
    with pytest.raises(EvaluationError) as info:
        drag.evaluate(x)
    assert info.value.report is not None and not info.value.report.feasible


def test_panel_surrogate_deterministic():
    lift = PanelSurrogate("parsec", "lift")
    x = sample(unit_box(11), 1, seed=40).matrix[0]
    assert lift.evaluate(x) == lift.evaluate(x)


def test_dataset_qoi_lookup():
    X = [[0.0, 0.0], [0.5, 0.5], [1.0, -1.0]]
    data = DatasetQoi(X, [1.0, 2.0, 3.0], tolerance=1e-6)
    assert data.evaluate([0.5, 0.5]) == 2.0
    assert data.evaluate([0.5 + 1e-8, 0.5]) == 2.0  # within tolerance
    with pytest.raises(EvaluationError):
        data.evaluate([0.25, 0.25])
    assert data.has_outputs
    assert data.metadata["rows"] == 3
    with pytest.raises(ContractViolation):
        DatasetQoi(X, [1.0, 2.0])
    with pytest.raises(ContractViolation):
        DatasetQoi(X, [1.0, 2.0, 3.0], tolerance=0.0)


def test_dataset_qoi_duplicate_rules():
    with pytest.raises(DatasetError):
        DatasetQoi([[0.0, 0.0], [0.0, 0.0]], [1.0, 2.0], tolerance=1e-6)
    agreeing = DatasetQoi([[0.0, 0.0], [0.0, 0.0]], [1.0, 1.0], tolerance=1e-6)
    assert agreeing.evaluate([0.0, 0.0]) == 1.0


def test_dataset_without_outputs():
    designs = DatasetQoi([[0.0, 1.0]], tolerance=1e-6)
    assert not designs.has_outputs
    with pytest.raises(EvaluationError):
        designs.evaluate([0.0, 1.0])


def test_load_dataset_csv(tmp_path):
    path = tmp_path / "runs.csv"
    write_matrix_csv(
        path, [[0.1, 0.2], [0.3, 0.4]], f=[7.0, 8.0], meta={"provenance": "solver-v2"}
    )
    data = load_dataset(path)
    assert data.evaluate([0.3, 0.4]) == 8.0
    assert data.provenance == "solver-v2"
    assert load_dataset(path, provenance="override").provenance == "override"


def test_export_designs_roundtrip(tmp_path):
    rows = np.vstack([np.zeros(10), 0.25 * np.ones(10), -0.25 * np.ones(10)])
    manifest = export_designs(rows, "cst", tmp_path, prefix="foil", meta={"seed": 5})
    matrix, files, feasible = read_design_manifest(manifest)
    np.testing.assert_array_equal(matrix, rows)
    assert files == ["foil_0000.dat", "foil_0001.dat", "foil_0002.dat"]
    assert feasible.dtype == bool and feasible.shape == (3,)
    for fname in files:
        lines = (tmp_path / fname).read_text().splitlines()
        assert lines[0].startswith("foil_")
        assert len(lines) == 1 + 2 * 201 - 1
    with pytest.raises(ContractViolation):
        export_designs(rows, "unknown", tmp_path)
    with pytest.raises(ContractViolation):
        export_designs(rows[:, :4], "cst", tmp_path)


def test_read_design_manifest_validation(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("row,feasible,file\n")
    with pytest.raises(DatasetError):
        read_design_manifest(path)
    path.write_text("row,file,feasible,x1\n0,a.dat,1\n")
    with pytest.raises(DatasetError) as info:
        read_design_manifest(path)
    assert info.value.line == 2
