"""Active-subspace estimation through a single global quadratic model.

Fit f(x) ~ 0.5 * x'Hx + v'x + c over normalized inputs on [-1, 1]^m,
then eigendecompose the average outer product of the model gradient,

    C = H * Sigma * H + v v',

where Sigma is a covariance convention: the identity by default, or
I/3 (the exact second moment of the uniform density on [-1, 1]^m).
Directions with large eigenvalues are the ones along which the model
says f moves; trailing directions are near-inactive.  Subspace
uncertainty is estimated by a pairs bootstrap: resample the (x, f)
rows, refit, re-decompose, and compare each replicate's leading
subspace against the point estimate with the projector distance
``|| W1 W1' - V1 V1' ||_2`` (the sine of the largest principal angle).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    ContractViolation,
    EvaluationError,
    IllPosedFitError,
    NoStructureError,
    SampleSizeWarning,
)
from .sampling import ParameterBox, derive_seed, sample

RANK_RCOND = 1e-10
EIGENVALUE_FLOOR = 1e-14
CONVENTIONS = ("identity", "third")

_MAX_RESAMPLE_RETRIES = 10


def coefficient_count(m: int) -> int:
    """Quadratic monomial count: 1 + m + m(m+1)/2."""
    return 1 + m + m * (m + 1) // 2


def quadratic_features(X) -> np.ndarray:
    """Design matrix over the monomial basis, one row per sample.

    Column order: constant, x_1..x_m, then squares and cross terms as
    the lexicographic upper triangle (x1*x1, x1*x2, ..., x1*xm, x2*x2,
    x2*x3, ...).  This ordering is the contract for packing and
    unpacking (H, v, c).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, m = X.shape
    blocks = [np.ones((n, 1)), X]
    for i in range(m):
        blocks.append(X[:, i:] * X[:, i : i + 1])
    return np.hstack(blocks)


def _unpack_coefficients(beta: np.ndarray, m: int):
    constant = float(beta[0])
    linear = beta[1 : m + 1].copy()
    hess = np.zeros((m, m))
    k = m + 1
    for i in range(m):
        hess[i, i] = 2.0 * beta[k]
        run = m - i - 1
        hess[i, i + 1 :] = beta[k + 1 : k + 1 + run]
        hess[i + 1 :, i] = hess[i, i + 1 :]
        k += m - i
    return hess, linear, constant


@dataclass(frozen=True, eq=False)
class QuadraticModel:
    """f(x) ~ 0.5 * x'Hx + v'x + c with the in-sample residual RMS."""

    hessian: np.ndarray
    linear: np.ndarray
    constant: float
    residual_rms: float = 0.0

    def __post_init__(self):
        hess = np.array(self.hessian, dtype=float)
        lin = np.array(self.linear, dtype=float)
        if hess.ndim != 2 or hess.shape[0] != hess.shape[1]:
            raise ContractViolation("hessian must be square")
        if lin.shape != (hess.shape[0],):
            raise ContractViolation("linear term must match hessian dimension")
        scale = max(1.0, float(np.max(np.abs(hess))) if hess.size else 1.0)
        if np.max(np.abs(hess - hess.T)) > 1e-12 * scale:
            raise ContractViolation("hessian must be symmetric to 1e-12")
        hess = 0.5 * (hess + hess.T)
        hess.flags.writeable = False
        lin.flags.writeable = False
        object.__setattr__(self, "hessian", hess)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "constant", float(self.constant))
        object.__setattr__(self, "residual_rms", float(self.residual_rms))

    @property
    def dim(self) -> int:
        return self.linear.size

    def predict(self, X):
        arr = np.asarray(X, dtype=float)
        single = arr.ndim == 1
        rows = np.atleast_2d(arr)
        out = (
            0.5 * np.einsum("ij,jk,ik->i", rows, self.hessian, rows)
            + rows @ self.linear
            + self.constant
        )
        return float(out[0]) if single else out

    def gradient(self, X):
        arr = np.asarray(X, dtype=float)
        single = arr.ndim == 1
        rows = np.atleast_2d(arr)
        out = rows @ self.hessian + self.linear
        return out[0] if single else out


def _solve_quadratic(design: np.ndarray, f: np.ndarray, m: int):
    beta, _, rank, _ = np.linalg.lstsq(design, f, rcond=RANK_RCOND)
    p = design.shape[1]
    if rank < p:
        raise IllPosedFitError(
            f"quadratic design matrix rank {rank} < {p}",
            rank=int(rank),
            required=p,
        )
    residual = float(np.linalg.norm(design @ beta - f) / np.sqrt(design.shape[0]))
    hess, lin, const = _unpack_coefficients(beta, m)
    return QuadraticModel(hess, lin, const, residual)


def fit_quadratic(X, f) -> QuadraticModel:
    """Least-squares quadratic surface over normalized samples.

    Requires N >= (m+2 choose 2) rows; warns (non-fatally) below twice
    that.  Solved by orthogonal factorization with relative rank
    tolerance 1e-10.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    f = np.asarray(f, dtype=float)
    n, m = X.shape
    if f.shape != (n,):
        raise ContractViolation("f must have one value per sample row")
    p = coefficient_count(m)
    if n < p:
        raise ContractViolation(f"need at least {p} samples for m={m}, got {n}")
    if n < 2 * p:
        warnings.warn(
            f"only {n} samples for {p} coefficients; recommend at least {2 * p}",
            SampleSizeWarning,
            stacklevel=2,
        )
    return _solve_quadratic(quadratic_features(X), f, m)


def _sigma_scale(convention: str) -> float:
    if convention == "identity":
        return 1.0
    if convention == "third":
        return 1.0 / 3.0
    raise ContractViolation(f"unknown covariance convention {convention!r}")


def gradient_outer_matrix(model: QuadraticModel, convention: str = "identity") -> np.ndarray:
    """Average gradient outer product C = H*Sigma*H + vv' (symmetrized)."""
    scale = _sigma_scale(convention)
    h = model.hessian
    c = scale * (h @ h) + np.outer(model.linear, model.linear)
    return 0.5 * (c + c.T)


@dataclass(frozen=True, eq=False)
class Eigenpairs:
    """Descending eigenvalues with sign-canonical orthonormal eigenvectors."""

    vectors: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        vec = np.array(self.vectors, dtype=float)
        val = np.array(self.values, dtype=float)
        if vec.ndim != 2 or vec.shape[0] != vec.shape[1] or val.shape != (vec.shape[0],):
            raise ContractViolation("vectors must be m x m with m eigenvalues")
        m = vec.shape[0]
        if np.max(np.abs(vec.T @ vec - np.eye(m))) > 1e-10:
            raise ContractViolation("eigenvectors must be orthonormal to 1e-10")
        if np.any(np.diff(val) > 0.0):
            raise ContractViolation("eigenvalues must be non-increasing")
        scale = max(1.0, float(val[0]) if val.size else 1.0)
        if val[-1] < -1e-12 * scale:
            raise ContractViolation("eigenvalues must be non-negative to 1e-12")
        vec.flags.writeable = False
        val.flags.writeable = False
        object.__setattr__(self, "vectors", vec)
        object.__setattr__(self, "values", val)

    @property
    def dim(self) -> int:
        return self.values.size


def _canonical_signs(vectors: np.ndarray) -> np.ndarray:
    out = vectors.copy()
    for j in range(out.shape[1]):
        lead = int(np.argmax(np.abs(out[:, j])))  # first index on ties
        if out[lead, j] < 0.0:
            out[:, j] = -out[:, j]
    return out


def eigendecompose(matrix) -> Eigenpairs:
    """Symmetric eigendecomposition, descending, with a deterministic sign rule.

    Each eigenvector is flipped so its largest-magnitude component is
    positive (ties resolved toward the lowest index), making repeated
    decompositions directly comparable.
    """
    c = np.asarray(matrix, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ContractViolation("matrix must be square")
    scale = max(1.0, float(np.max(np.abs(c))) if c.size else 1.0)
    if np.max(np.abs(c - c.T)) > 1e-10 * scale:
        raise ContractViolation("matrix must be symmetric to 1e-10")
    values, vectors = np.linalg.eigh(0.5 * (c + c.T))
    order = np.argsort(values)[::-1]
    return Eigenpairs(vectors=_canonical_signs(vectors[:, order]), values=values[order])


def choose_dimension(values, max_n: int | None = None) -> int:
    """Largest log-gap rule with an eigenvalue floor.

    Eigenvalues are floored at 1e-14 * lambda_1 before the ratios are
    taken; the dimension is argmax_i log(lambda_i / lambda_{i+1}) with
    ties resolved toward the smaller i.
    """
    lam = np.asarray(values, dtype=float)
    if lam.ndim != 1 or lam.size < 2:
        raise ContractViolation("need at least two eigenvalues")
    if np.any(np.diff(lam) > 0.0):
        raise ContractViolation("eigenvalues must be non-increasing")
    if lam[0] <= 0.0:
        raise NoStructureError("all eigenvalues at the floor; no gap to select")
    floor = EIGENVALUE_FLOOR * lam[0]
    lam = np.maximum(lam, floor)
    top = lam.size - 1 if max_n is None else min(int(max_n), lam.size - 1)
    if top < 1:
        raise ContractViolation("max_n must allow at least dimension 1")
    gaps = np.log(lam[:top] / lam[1 : top + 1])
    return int(np.argmax(gaps)) + 1  # argmax takes the first maximum


@dataclass(frozen=True, eq=False)
class SubspacePartition:
    """Active columns W1 and their orthonormal complement W2."""

    active: np.ndarray
    inactive: np.ndarray
    n: int

    def __post_init__(self):
        act = np.array(self.active, dtype=float)
        inact = np.array(self.inactive, dtype=float)
        if act.ndim != 2 or inact.ndim != 2 or act.shape[0] != inact.shape[0]:
            raise ContractViolation("active and inactive must share the row dimension")
        if act.shape[1] != self.n or act.shape[1] + inact.shape[1] != act.shape[0]:
            raise ContractViolation("columns must split the full dimension as n + (m - n)")
        full = np.hstack([act, inact])
        if np.max(np.abs(full.T @ full - np.eye(full.shape[1]))) > 1e-10:
            raise ContractViolation("[W1 W2] must be orthonormal to 1e-10")
        act.flags.writeable = False
        inact.flags.writeable = False
        object.__setattr__(self, "active", act)
        object.__setattr__(self, "inactive", inact)
        object.__setattr__(self, "n", int(self.n))

    @property
    def dim(self) -> int:
        return self.active.shape[0]


def partition(eig: Eigenpairs, n: int) -> SubspacePartition:
    if not 1 <= n < eig.dim:
        raise ContractViolation(f"n must lie in [1, {eig.dim - 1}], got {n}")
    return SubspacePartition(
        active=eig.vectors[:, :n], inactive=eig.vectors[:, n:], n=n
    )


def subspace_distance(A, B) -> float:
    """Projector distance || A A' - B B' ||_2 between equal-shape orthonormal bases."""
    a = np.asarray(A, dtype=float)
    b = np.asarray(B, dtype=float)
    if a.ndim == 1:
        a = a[:, np.newaxis]
    if b.ndim == 1:
        b = b[:, np.newaxis]
    if a.shape != b.shape:
        raise ContractViolation(f"shape mismatch: {a.shape} vs {b.shape}")
    k = a.shape[1]
    if np.max(np.abs(a.T @ a - np.eye(k))) > 1e-8 or np.max(np.abs(b.T @ b - np.eye(k))) > 1e-8:
        raise ContractViolation("inputs must have orthonormal columns")
    return float(np.linalg.norm(a @ a.T - b @ b.T, 2))


@dataclass(frozen=True, eq=False)
class BootstrapSummary:
    """Replicate spread of the eigenvalues and of the subspace error.

    ``eigenvalues`` is the point estimate; the *_min/mean/max arrays are
    per eigen-index over replicates.  ``error_*`` rows cover every
    candidate dimension 1..m-1 against the point-estimate basis;
    ``n`` marks the selected active dimension.
    """

    eigenvalues: np.ndarray
    eigenvalues_min: np.ndarray
    eigenvalues_mean: np.ndarray
    eigenvalues_max: np.ndarray
    dimensions: np.ndarray
    error_mean: np.ndarray
    error_min: np.ndarray
    error_max: np.ndarray
    n: int
    n_boot: int
    seed: int
    n_skipped: int
    convention: str

    def error_row(self, dim: int):
        i = int(dim) - 1
        if not 0 <= i < self.dimensions.size:
            raise ContractViolation(f"no bootstrap row for dimension {dim}")
        return (
            float(self.error_mean[i]),
            float(self.error_min[i]),
            float(self.error_max[i]),
        )


def bootstrap(
    X,
    f,
    n_boot: int,
    seed: int,
    n: int | None = None,
    convention: str = "identity",
) -> BootstrapSummary:
    """Pairs bootstrap of the quadratic-model subspace estimate.

    Each replicate resamples the N rows with replacement (stream
    ``SeedSequence(seed, spawn_key=(k,))``), refits, rebuilds C under
    the same convention, and re-decomposes.  A rank-deficient resample
    is redrawn up to 10 times, then counted as skipped.  Note the
    replicate ranges describe sampling variability of the fit only;
    they are not calibrated confidence intervals.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    f = np.asarray(f, dtype=float)
    if not 1 <= n_boot:
        raise ContractViolation("n_boot must be positive")
    n_rows, m = X.shape

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SampleSizeWarning)
        point = fit_quadratic(X, f)
    eig = eigendecompose(gradient_outer_matrix(point, convention))
    if n is None:
        n = choose_dimension(eig.values)
    if not 1 <= n < m:
        raise ContractViolation(f"dimension must lie in [1, {m - 1}], got {n}")

    design = quadratic_features(X)
    dims = np.arange(1, m)
    lam_rows = np.empty((n_boot, m))
    err_rows = np.full((n_boot, dims.size), np.nan)
    skipped = 0
    kept = 0
    for k in range(n_boot):
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(k,)))
        )
        replicate = None
        for _ in range(_MAX_RESAMPLE_RETRIES + 1):
            idx = rng.integers(0, n_rows, size=n_rows)
            try:
                replicate = _solve_quadratic(design[idx], f[idx], m)
                break
            except IllPosedFitError:
                continue
        if replicate is None:
            skipped += 1
            continue
        rep_eig = eigendecompose(gradient_outer_matrix(replicate, convention))
        lam_rows[kept] = rep_eig.values
        for j, d in enumerate(dims):
            err_rows[kept, j] = subspace_distance(
                rep_eig.vectors[:, :d], eig.vectors[:, :d]
            )
        kept += 1
    if kept == 0:
        raise IllPosedFitError("every bootstrap replicate was rank deficient")
    lam_rows = lam_rows[:kept]
    err_rows = err_rows[:kept]

    return BootstrapSummary(
        eigenvalues=eig.values,
        eigenvalues_min=lam_rows.min(axis=0),
        eigenvalues_mean=lam_rows.mean(axis=0),
        eigenvalues_max=lam_rows.max(axis=0),
        dimensions=dims,
        error_mean=err_rows.mean(axis=0),
        error_min=err_rows.min(axis=0),
        error_max=err_rows.max(axis=0),
        n=int(n),
        n_boot=int(n_boot),
        seed=int(seed),
        n_skipped=skipped,
        convention=convention,
    )


@dataclass(frozen=True)
class ConvergenceCell:
    n_samples: int
    error_mean: float
    error_min: float
    error_max: float


def convergence_study(
    box: ParameterBox,
    evaluator,
    schedule,
    seed: int,
    dim: int = 1,
    n_boot: int = 100,
    convention: str = "identity",
) -> list[ConvergenceCell]:
    """Bootstrap subspace error as the sample budget grows.

    For each N in the ascending schedule: draw a fresh sample, evaluate
    the quantity of interest, fit, bootstrap, and record the replicate
    error spread for the requested dimension.  Cell seeds derive from
    the root seed by labeled hashing, so cells are independent and the
    whole table is reproducible.
    """
    sizes = [int(v) for v in schedule]
    if not sizes:
        raise ContractViolation("schedule must be non-empty")
    if any(b <= a for a, b in zip(sizes, sizes[1:])) or sizes[0] < 1:
        raise ContractViolation("schedule must be strictly ascending and positive")

    cells = []
    for i, n_samples in enumerate(sizes):
        draws = sample(box, n_samples, derive_seed(seed, f"cell{i}:sample"))
        values = np.empty(n_samples)
        for row in range(n_samples):
            try:
                values[row] = evaluator.evaluate(draws.matrix[row])
            except Exception as exc:
                raise EvaluationError(
                    f"evaluator failed at sample {row} of cell N={n_samples}: {exc}",
                    index=row,
                ) from exc
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SampleSizeWarning)
            summary = bootstrap(
                draws.matrix,
                values,
                n_boot=n_boot,
                seed=derive_seed(seed, f"cell{i}:boot"),
                n=dim,
                convention=convention,
            )
        mean, lo, hi = summary.error_row(dim)
        cells.append(ConvergenceCell(n_samples, mean, lo, hi))
    return cells
