import numpy as np
import pytest

from activefoil.activesubspace import (
    CONVENTIONS,
    EIGENVALUE_FLOOR,
    Eigenpairs,
    QuadraticModel,
    bootstrap,
    choose_dimension,
    coefficient_count,
    convergence_study,
    eigendecompose,
    fit_quadratic,
    gradient_outer_matrix,
    partition,
    quadratic_features,
    subspace_distance,
)
from activefoil.errors import (
    ContractViolation,
    EvaluationError,
    IllPosedFitError,
    NoStructureError,
    SampleSizeWarning,
)
from activefoil.qoi import Ridge, seeded_quadratic
from activefoil.sampling import sample, unit_box


def _random_quadratic(m, seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    square = rng.standard_normal((m, m))
    return 0.5 * (square + square.T), rng.standard_normal(m), float(rng.standard_normal())


def test_coefficient_count_literals():
    assert coefficient_count(1) == 3
    assert coefficient_count(2) == 6
    assert coefficient_count(5) == 21
    assert coefficient_count(10) == 66
    assert coefficient_count(11) == 78


def test_feature_ordering_literal():
    row = quadratic_features([[2.0, 3.0]])
    np.testing.assert_array_equal(row, [[1.0, 2.0, 3.0, 4.0, 6.0, 9.0]])
    three = quadratic_features([[1.0, 2.0, 3.0]])
    np.testing.assert_array_equal(
        three, [[1, 1, 2, 3, 1, 2, 3, 4, 6, 9]]  # 1, x, x1*(x1..x3), x2*(x2..x3), x3*x3
    )


def test_fit_recovers_exact_quadratic():
    m = 4
    hess, lin, const = _random_quadratic(m, 1)
    X = sample(unit_box(m), 2 * coefficient_count(m), seed=2).matrix
    f = 0.5 * np.einsum("ij,jk,ik->i", X, hess, X) + X @ lin + const
    model = fit_quadratic(X, f)
    np.testing.assert_allclose(model.hessian, hess, atol=1e-9)
    np.testing.assert_allclose(model.linear, lin, atol=1e-9)
    assert model.constant == pytest.approx(const, abs=1e-9)
    assert model.residual_rms < 1e-10
    np.testing.assert_allclose(model.predict(X), f, atol=1e-9)
    np.testing.assert_allclose(model.gradient(X[0]), X[0] @ hess + lin, atol=1e-9)


def test_fit_sample_size_rules():
    m = 3
    p = coefficient_count(m)
    X = sample(unit_box(m), 2 * p, seed=3).matrix
    f = X[:, 0] ** 2
    with pytest.raises(ContractViolation):
        fit_quadratic(X[: p - 1], f[: p - 1])
    with pytest.warns(SampleSizeWarning):
        fit_quadratic(X[: 2 * p - 1], f[: 2 * p - 1])
    with pytest.raises(ContractViolation):
        fit_quadratic(X, f[:-1])


def test_fit_rank_deficiency():
    X = np.tile([[0.1, 0.2]], (20, 1))  # one repeated point
    with pytest.raises(IllPosedFitError) as info:
        fit_quadratic(X, np.ones(20))
    assert info.value.rank < info.value.required == coefficient_count(2)


def test_model_validation_and_symmetrization():
    with pytest.raises(ContractViolation):
        QuadraticModel(np.array([[1.0, 0.5], [0.0, 1.0]]), np.zeros(2), 0.0)
    with pytest.raises(ContractViolation):
        QuadraticModel(np.eye(2), np.zeros(3), 0.0)
    tiny_skew = np.array([[1.0, 0.5 + 1e-14], [0.5, 1.0]])
    model = QuadraticModel(tiny_skew, np.zeros(2), 0.0)
    np.testing.assert_array_equal(model.hessian, model.hessian.T)
    assert model.dim == 2


def test_gradient_outer_matrix_conventions():
    hess, lin, _ = _random_quadratic(5, 4)
    model = QuadraticModel(hess, lin, 0.0)
    identity = gradient_outer_matrix(model, "identity")
    third = gradient_outer_matrix(model, "third")
    np.testing.assert_allclose(identity, hess @ hess + np.outer(lin, lin), atol=1e-12)
    np.testing.assert_allclose(third, hess @ hess / 3.0 + np.outer(lin, lin), atol=1e-12)
    # the two conventions differ exactly by the sigma scale on the H^2 part
    np.testing.assert_allclose(
        identity - np.outer(lin, lin), 3.0 * (third - np.outer(lin, lin)), atol=1e-12
    )
    assert CONVENTIONS == ("identity", "third")
    with pytest.raises(ContractViolation):
        gradient_outer_matrix(model, "half")


def test_third_convention_matches_monte_carlo():
    # oracle: with x ~ U[-1,1]^m the exact average of grad grad' is
    # H Sigma H + vv' with Sigma = I/3; checked against 4e5 raw draws
    m = 4
    hess, lin, _ = _random_quadratic(m, 5)
    model = QuadraticModel(hess, lin, 0.0)
    rng = np.random.Generator(np.random.PCG64(42))
    X = rng.uniform(-1.0, 1.0, (400_000, m))
    G = X @ hess + lin
    mc = G.T @ G / X.shape[0]
    analytic = gradient_outer_matrix(model, "third")
    rel = np.linalg.norm(mc - analytic, 2) / np.linalg.norm(analytic, 2)
    assert rel < 1e-2  # measured ~1.4e-3 for this seed


def test_eigendecompose_known_matrix():
    v1 = np.array([3.0, 4.0]) / 5.0
    v2 = np.array([-4.0, 3.0]) / 5.0
    matrix = 9.0 * np.outer(v1, v1) + 1.0 * np.outer(v2, v2)
    eig = eigendecompose(matrix)
    np.testing.assert_allclose(eig.values, [9.0, 1.0], rtol=1e-12)
    np.testing.assert_allclose(eig.vectors[:, 0], v1, atol=1e-12)
    # sign rule flips v2 so its largest-magnitude entry is positive
    np.testing.assert_allclose(eig.vectors[:, 1], -v2, atol=1e-12)


def test_eigendecompose_sign_tie_rule():
    u = np.array([1.0, -1.0]) / np.sqrt(2.0)
    w = np.array([1.0, 1.0]) / np.sqrt(2.0)
    eig = eigendecompose(4.0 * np.outer(u, u) + 1.0 * np.outer(w, w))
    # components tie in magnitude; the first one is made positive
    assert eig.vectors[0, 0] > 0.0
    np.testing.assert_allclose(eig.vectors[:, 0], u, atol=1e-12)


def test_eigendecompose_validation():
    with pytest.raises(ContractViolation):
        eigendecompose(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ContractViolation):
        eigendecompose(np.ones((2, 3)))


def test_eigenpairs_validation():
    with pytest.raises(ContractViolation):
        Eigenpairs(vectors=np.eye(2) * 2.0, values=np.array([2.0, 1.0]))
    with pytest.raises(ContractViolation):
        Eigenpairs(vectors=np.eye(2), values=np.array([1.0, 2.0]))
    with pytest.raises(ContractViolation):
        Eigenpairs(vectors=np.eye(2), values=np.array([1.0, -1.0]))
    good = Eigenpairs(vectors=np.eye(3), values=np.array([3.0, 2.0, 1.0]))
    assert good.dim == 3


def test_choose_dimension_literals():
    assert choose_dimension([10.0, 9.0, 1e-3, 1e-4]) == 2
    assert choose_dimension([100.0, 1.0, 0.01]) == 1  # equal gaps: first wins
    assert choose_dimension([10.0, 9.0, 1e-3, 1e-4], max_n=1) == 1
    with pytest.raises(ContractViolation):
        choose_dimension([1.0])
    with pytest.raises(ContractViolation):
        choose_dimension([1.0, 2.0])
    with pytest.raises(ContractViolation):
        choose_dimension([10.0, 1.0], max_n=0)
    with pytest.raises(NoStructureError):
        choose_dimension([0.0, 0.0, 0.0])


def test_choose_dimension_floor():
    # below the relative floor the trailing ratio is flattened away
    assert EIGENVALUE_FLOOR == 1e-14
    assert choose_dimension([1.0, 1e-300, 1e-301]) == 1


def test_partition_shapes():
    eig = eigendecompose(np.diag([4.0, 3.0, 2.0, 1.0]))
    part = partition(eig, 3)
    assert part.active.shape == (4, 3) and part.inactive.shape == (4, 1)
    assert part.n == 3 and part.dim == 4
    np.testing.assert_allclose(part.active.T @ part.inactive, np.zeros((3, 1)), atol=1e-12)
    for bad in (0, 4):
        with pytest.raises(ContractViolation):
            partition(eig, bad)


def test_subspace_distance_literals():
    e1 = np.array([1.0, 0.0])
    e2 = np.array([0.0, 1.0])
    assert subspace_distance(e1, e2) == pytest.approx(1.0, abs=1e-12)
    assert subspace_distance(e1, e1) == 0.0
    assert subspace_distance(e1, -e1) == pytest.approx(0.0, abs=1e-12)
    theta = 0.3
    rotated = np.array([np.cos(theta), np.sin(theta)])
    assert subspace_distance(e1, rotated) == pytest.approx(np.sin(theta), rel=1e-12)
    with pytest.raises(ContractViolation):
        subspace_distance(np.eye(3)[:, :1], np.eye(3)[:, :2])
    with pytest.raises(ContractViolation):
        subspace_distance(np.array([1.0, 1.0]), e1)


def test_bootstrap_is_deterministic():
    m = 3
    qoi = seeded_quadratic(m, 12)
    X = sample(unit_box(m), 80, seed=6).matrix
    f = qoi(X)
    one = bootstrap(X, f, n_boot=25, seed=9)
    two = bootstrap(X, f, n_boot=25, seed=9)
    np.testing.assert_array_equal(one.eigenvalues_mean, two.eigenvalues_mean)
    np.testing.assert_array_equal(one.error_mean, two.error_mean)
    assert not np.array_equal(
        one.error_mean, bootstrap(X, f, n_boot=25, seed=10).error_mean
    )


def test_bootstrap_summary_structure():
    m = 4
    qoi = seeded_quadratic(m, 13)
    X = sample(unit_box(m), 120, seed=7).matrix
    f = qoi(X)
    summary = bootstrap(X, f, n_boot=30, seed=11, convention="third")
    np.testing.assert_array_equal(summary.dimensions, [1, 2, 3])
    assert summary.eigenvalues.shape == (m,)
    assert np.all(summary.eigenvalues_min <= summary.eigenvalues_mean + 1e-15)
    assert np.all(summary.eigenvalues_mean <= summary.eigenvalues_max + 1e-15)
    assert np.all(summary.error_min <= summary.error_mean + 1e-15)
    assert np.all(summary.error_mean <= summary.error_max + 1e-15)
    assert np.all(summary.error_min >= 0.0)
    assert summary.n_boot == 30 and summary.seed == 11
    assert summary.n_skipped == 0
    assert summary.convention == "third"
    assert 1 <= summary.n < m

    mean, lo, hi = summary.error_row(2)
    assert (mean, lo, hi) == (
        summary.error_mean[1],
        summary.error_min[1],
        summary.error_max[1],
    )
    with pytest.raises(ContractViolation):
        summary.error_row(m)

    # exact quadratic data: every replicate refits the same surface
    assert float(summary.error_max.max()) < 1e-6

    with pytest.raises(ContractViolation):
        bootstrap(X, f, n_boot=0, seed=1)
    with pytest.raises(ContractViolation):
        bootstrap(X, f, n_boot=5, seed=1, n=m)


def test_convergence_study_runs_and_validates():
    box = unit_box(3)
    qoi = Ridge(direction=[1.0, 2.0, -1.0], profile="quadratic")
    cells = convergence_study(box, qoi, schedule=[30, 60], seed=21, dim=1, n_boot=10)
    assert [c.n_samples for c in cells] == [30, 60]
    for cell in cells:
        assert 0.0 <= cell.error_min <= cell.error_mean <= cell.error_max
        assert cell.error_max < 1e-6  # noiseless quadratic ridge is fit exactly
    with pytest.raises(ContractViolation):
        convergence_study(box, qoi, schedule=[60, 30], seed=1)
    with pytest.raises(ContractViolation):
        convergence_study(box, qoi, schedule=[], seed=1)


def test_convergence_study_wraps_evaluator_failures():
    class Flaky:
        dim = 3

        def __init__(self):
            self.calls = 0

        def evaluate(self, x):
            self.calls += 1
            if self.calls == 3:
                raise RuntimeError("boom")
            return float(x[0])

    with pytest.raises(EvaluationError) as info:
        convergence_study(unit_box(3), Flaky(), schedule=[30], seed=2, n_boot=5)
    assert info.value.index == 2


def test_ridge_direction_recovery_invariant():
    # a noiseless linear ridge profile is inside the model class, so the
    # fitted leading eigenvector recovers w essentially exactly
    m = 6
    w = np.array([1.0, -2.0, 0.5, 0.0, 3.0, -1.0])
    qoi = Ridge(direction=w, profile="linear")
    p = coefficient_count(m)
    X = sample(unit_box(m), 10 * p, seed=31).matrix
    f = qoi(X)
    model = fit_quadratic(X, f)
    eig = eigendecompose(gradient_outer_matrix(model, "identity"))
    dist = subspace_distance(eig.vectors[:, 0], w / np.linalg.norm(w))
    assert dist < 1e-3

    # an exponential profile is outside the quadratic model class; the
    # truncation bias leaves an irreducible but small angle
    qoi_exp = Ridge(direction=w, profile="exp")
    f_exp = qoi_exp(X)
    model_exp = fit_quadratic(X, f_exp)
    eig_exp = eigendecompose(gradient_outer_matrix(model_exp, "identity"))
    dist_exp = subspace_distance(eig_exp.vectors[:, 0], w / np.linalg.norm(w))
    assert dist_exp < 5e-2
