"""Space-time Gaussian process and mutual-information utilities.

The process lives on (x, y, t) inputs with a separable squared-exponential
kernel: a spatial SE factor on the 2D Euclidean distance times a temporal
SE factor on |t_i - t_j|, plus an ambient nugget on Gram diagonals.
Conditioning on an initial training set gives the joint covariance of the
whole candidate pool; the per-element sensing-noise variances sit on its
diagonal, which also keeps the matrix well-conditioned when several robots
share a cell and a time.

Selection quality is the mutual information between a chosen subset A and
the remaining pool.  With S the pool covariance and P = S^-1 its precision,

    value(A)  = 0.5 * (logdet S[A,A] + logdet P[A,A])
    gain(e|A) = 0.5 * (log var(e|A) - log var(e | pool minus A and e))

which follow from logdet Schur-complement identities and never require a
factorization larger than |A|+1 once P is cached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

__all__ = [
    "NumericalError",
    "KernelParams",
    "TrainingSet",
    "GpModel",
    "PosteriorCov",
    "kernel_se",
    "composite_kernel",
    "kernel_matrix",
    "chol_with_jitter",
    "fit_gp",
    "posterior",
    "ground_covariance",
    "entropy",
    "log_marginal_likelihood",
    "fit_hyperparameters",
    "MutualInfoEvaluator",
    "IncrementalMI",
    "mutual_information",
    "marginal_gain",
]

LOG_2PI_E = math.log(2.0 * math.pi * math.e)

# Progressive nugget ladder tried before declaring a factorization failure.
JITTER_LADDER = (0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)


class NumericalError(RuntimeError):
    """Covariance work failed beyond the jitter ladder."""


@dataclass(frozen=True)
class KernelParams:
    """Hyperparameters of the separable space-time SE kernel."""

    spatial_var: float
    spatial_scale: float
    temporal_var: float
    temporal_scale: float
    noise_var: float

    def __post_init__(self):
        for name in ("spatial_var", "spatial_scale", "temporal_var",
                     "temporal_scale", "noise_var"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class TrainingSet:
    """Observed (x, y, t) inputs, outputs, and per-sample noise variances."""

    x: np.ndarray
    z: np.ndarray
    noise: np.ndarray | None = None

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        if x.size == 0:
            x = x.reshape(0, 3)
        if x.shape[1] != 3:
            raise ValueError(f"inputs must be (n, 3) rows of (x, y, t), got {x.shape}")
        z = np.asarray(self.z, dtype=float).ravel()
        if len(z) != len(x):
            raise ValueError(f"{len(x)} inputs but {len(z)} outputs")
        noise = self.noise
        if noise is None:
            noise = np.zeros(len(x))
        else:
            noise = np.asarray(noise, dtype=float).ravel()
            if len(noise) != len(x):
                raise ValueError("per-sample noise vector misaligned with inputs")
            if np.any(noise < 0):
                raise ValueError("per-sample noise variances must be >= 0")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "noise", noise)

    @classmethod
    def empty(cls) -> "TrainingSet":
        return cls(np.zeros((0, 3)), np.zeros(0))

    def __len__(self) -> int:
        return len(self.z)


def kernel_se(dist, var: float, scale: float):
    """Squared-exponential kernel var * exp(-d^2 / (2 scale^2))."""
    if var <= 0 or scale <= 0:
        raise ValueError("kernel variance and length-scale must be positive")
    d = np.asarray(dist, dtype=float)
    out = var * np.exp(-np.square(d) / (2.0 * scale * scale))
    return float(out) if np.isscalar(dist) else out


def composite_kernel(a, b, params: KernelParams) -> float:
    """Separable space-time covariance of two (x, y, t) points.

    The ambient nugget is added only when ``a`` and ``b`` are the identical
    input point, mirroring the Gram-diagonal placement below.
    """
    ax, ay, at = (float(v) for v in a)
    bx, by, bt = (float(v) for v in b)
    ds = math.hypot(ax - bx, ay - by)
    dt = abs(at - bt)
    k = kernel_se(ds, params.spatial_var, params.spatial_scale) \
        * kernel_se(dt, params.temporal_var, params.temporal_scale)
    if (ax, ay, at) == (bx, by, bt):
        k += params.noise_var
    return float(k)


def kernel_matrix(params: KernelParams, a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """Cross-covariance of two point lists; symmetric call adds the nugget on the diagonal."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    symmetric = b is None
    b = a if symmetric else np.atleast_2d(np.asarray(b, dtype=float))
    dx = a[:, 0:1] - b[:, 0].reshape(1, -1)
    dy = a[:, 1:2] - b[:, 1].reshape(1, -1)
    dsq = dx * dx + dy * dy
    dtt = np.abs(a[:, 2:3] - b[:, 2].reshape(1, -1))
    k = (params.spatial_var * np.exp(-dsq / (2.0 * params.spatial_scale ** 2))
         * params.temporal_var * np.exp(-np.square(dtt) / (2.0 * params.temporal_scale ** 2)))
    if symmetric:
        k[np.diag_indices_from(k)] += params.noise_var
        k = 0.5 * (k + k.T)
    return k


def chol_with_jitter(a: np.ndarray, max_jitter: float = 1e-6) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor, escalating the diagonal jitter until it works."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n == 0:
        return np.zeros((0, 0)), 0.0
    for jitter in JITTER_LADDER:
        if jitter > max_jitter:
            break
        try:
            if jitter == 0.0:
                return np.linalg.cholesky(a), 0.0
            return np.linalg.cholesky(a + jitter * np.eye(n)), jitter
        except np.linalg.LinAlgError:
            continue
    raise NumericalError(
        f"matrix of order {n} not positive definite after jitter up to {max_jitter:g} "
        f"(diag range [{a.diagonal().min():.3g}, {a.diagonal().max():.3g}])")


@dataclass(frozen=True)
class PosteriorCov:
    """Symmetric covariance over a list of points or pool elements."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"covariance must be square, got {m.shape}")
        if m.size and not np.allclose(m, m.T, atol=1e-8):
            raise ValueError("covariance not symmetric")
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class GpModel:
    """Trained process: hyperparameters, data, cached Gram factorization, prior mean."""

    params: KernelParams
    train: TrainingSet
    mean: float
    chol: np.ndarray | None
    jitter: float = 0.0


def fit_gp(params: KernelParams, train: TrainingSet, mean: float | None = None,
           max_jitter: float = 1e-6) -> GpModel:
    """Condition a model on ``train``; the prior mean defaults to the output average."""
    if len(train) == 0:
        return GpModel(params, train, 0.0 if mean is None else float(mean), None)
    gram = kernel_matrix(params, train.x) + np.diag(train.noise)
    chol, jitter = chol_with_jitter(gram, max_jitter)
    if mean is None:
        mean = float(np.mean(train.z))
    return GpModel(params, train, float(mean), chol, jitter)


def posterior(model: GpModel, test: np.ndarray) -> tuple[np.ndarray, PosteriorCov]:
    """Predictive mean and covariance at the given (x, y, t) rows."""
    test = np.atleast_2d(np.asarray(test, dtype=float))
    prior = kernel_matrix(model.params, test)
    if len(model.train) == 0:
        return np.full(len(test), model.mean), PosteriorCov(prior)
    k_star = kernel_matrix(model.params, test, model.train.x)
    alpha = cho_solve((model.chol, True), model.train.z - model.mean)
    mu = model.mean + k_star @ alpha
    w = solve_triangular(model.chol, k_star.T, lower=True)
    cov = prior - w.T @ w
    cov = 0.5 * (cov + cov.T)
    return mu, PosteriorCov(cov)


def ground_covariance(model: GpModel, ground) -> PosteriorCov:
    """Joint covariance of every pool element, sensing noise on the diagonal."""
    _, cov = posterior(model, ground.inputs())
    m = cov.matrix.copy()
    m[np.diag_indices_from(m)] += ground.noise_var
    return PosteriorCov(m)


def entropy(cov, max_jitter: float = 1e-6) -> float:
    """Differential entropy 0.5 * logdet(2*pi*e * cov); the empty covariance gives 0."""
    m = cov.matrix if isinstance(cov, PosteriorCov) else np.atleast_2d(np.asarray(cov, dtype=float))
    n = m.shape[0]
    if n == 0:
        return 0.0
    chol, _ = chol_with_jitter(m, max_jitter)
    return 0.5 * n * LOG_2PI_E + float(np.sum(np.log(np.diag(chol))))


def log_marginal_likelihood(params: KernelParams, train: TrainingSet) -> float:
    """Gaussian evidence of the data under ``params`` with a constant mean."""
    n = len(train)
    if n == 0:
        return 0.0
    gram = kernel_matrix(params, train.x) + np.diag(train.noise)
    chol, _ = chol_with_jitter(gram)
    resid = train.z - float(np.mean(train.z))
    alpha = cho_solve((chol, True), resid)
    return float(-0.5 * resid @ alpha - np.sum(np.log(np.diag(chol))) - 0.5 * n * math.log(2.0 * math.pi))


def fit_hyperparameters(train: TrainingSet, grid: Sequence[KernelParams]) -> KernelParams:
    """Pick the candidate with the highest evidence; ties keep the earliest candidate."""
    if len(train) == 0:
        raise ValueError("cannot fit hyperparameters on an empty training set")
    grid = list(grid)
    if not grid:
        raise ValueError("empty hyperparameter grid")
    best = None
    best_ll = -math.inf
    for cand in grid:
        try:
            ll = log_marginal_likelihood(cand, train)
        except NumericalError:
            continue
        if ll > best_ll:
            best, best_ll = cand, ll
    if best is None:
        raise NumericalError("every hyperparameter candidate failed to factorize")
    return best


def _as_indices(selection, n: int) -> np.ndarray:
    idx = np.asarray(sorted(int(i) for i in selection), dtype=np.int64)
    if len(np.unique(idx)) != len(idx):
        raise ValueError("selection contains duplicate elements")
    if len(idx) and (idx[0] < 0 or idx[-1] >= n):
        raise ValueError(f"selection index outside 0..{n - 1}")
    return idx


class MutualInfoEvaluator:
    """Read-only mutual-information queries over one candidate pool.

    Factorizes the pool covariance once; afterwards every value/gain query
    only touches matrices of the selection's size.
    """

    def __init__(self, cov, max_jitter: float = 1e-6):
        m = cov.matrix if isinstance(cov, PosteriorCov) else np.asarray(cov, dtype=float)
        self.sigma = np.array(m, dtype=float)
        self.max_jitter = max_jitter
        chol, self.jitter = chol_with_jitter(self.sigma, max_jitter)
        if self.jitter:
            self.sigma = self.sigma + self.jitter * np.eye(len(self.sigma))
        prec = cho_solve((chol, True), np.eye(len(self.sigma)))
        self.precision = 0.5 * (prec + prec.T)
        self._sig_diag = np.diag(self.sigma).copy()
        self._prec_diag = np.diag(self.precision).copy()

    @property
    def n(self) -> int:
        return len(self.sigma)

    def _logdet(self, matrix: np.ndarray, idx: np.ndarray) -> float:
        sub = matrix[np.ix_(idx, idx)]
        chol, _ = chol_with_jitter(sub, self.max_jitter)
        return 2.0 * float(np.sum(np.log(np.diag(chol))))

    def value(self, selection) -> float:
        """Mutual information between the selection and the rest of the pool."""
        idx = _as_indices(selection, self.n)
        if len(idx) == 0 or len(idx) == self.n:
            return 0.0
        return 0.5 * (self._logdet(self.sigma, idx) + self._logdet(self.precision, idx))

    def singleton_values(self) -> np.ndarray:
        """value({e}) for every element at once."""
        return 0.5 * (np.log(self._sig_diag) + np.log(self._prec_diag))

    def _residuals(self, matrix: np.ndarray, diag: np.ndarray, idx: np.ndarray) -> np.ndarray:
        if len(idx) == 0:
            return diag.copy()
        chol, _ = chol_with_jitter(matrix[np.ix_(idx, idx)], self.max_jitter)
        w = solve_triangular(chol, matrix[idx, :], lower=True, check_finite=False)
        return diag - np.einsum("ij,ij->j", w, w)

    def gains(self, selection) -> np.ndarray:
        """Marginal value of adding each element to ``selection``; NaN at selected slots."""
        idx = _as_indices(selection, self.n)
        vs = self._residuals(self.sigma, self._sig_diag, idx)
        vp = self._residuals(self.precision, self._prec_diag, idx)
        out = np.full(self.n, np.nan)
        free = np.ones(self.n, dtype=bool)
        free[idx] = False
        if np.any(vs[free] <= 0) or np.any(vp[free] <= 0):
            raise NumericalError("non-positive conditional variance; pool covariance too ill-conditioned")
        out[free] = 0.5 * (np.log(vs[free]) + np.log(vp[free]))
        return out

    def gain(self, element: int, selection) -> float:
        """Marginal value of one element, via the two conditional-variance ratio."""
        idx = _as_indices(selection, self.n)
        e = int(element)
        if e in idx:
            raise ValueError(f"element {e} is already selected")
        if not 0 <= e < self.n:
            raise ValueError(f"element index {e} outside the pool")
        var_given_sel = self._conditional_var(self.sigma, idx, e)
        inv_var_given_rest = self._conditional_var(self.precision, idx, e)
        if var_given_sel <= 0 or inv_var_given_rest <= 0:
            raise NumericalError("non-positive conditional variance in gain")
        # inv_var_given_rest equals 1 / var(e | pool minus selection minus e).
        return 0.5 * (math.log(var_given_sel) + math.log(inv_var_given_rest))

    def _conditional_var(self, matrix: np.ndarray, idx: np.ndarray, e: int) -> float:
        if len(idx) == 0:
            return float(matrix[e, e])
        chol, _ = chol_with_jitter(matrix[np.ix_(idx, idx)], self.max_jitter)
        w = solve_triangular(chol, matrix[idx, e], lower=True, check_finite=False)
        return float(matrix[e, e] - w @ w)


class IncrementalMI:
    """Push/pop mutual-information state for greedy scans and depth-first search.

    Maintains, for the growing selection A, the solved rows W = L^-1 S[A,:]
    (and likewise for the precision), plus per-depth residual-variance
    vectors, so that a push costs O(|A| * n) and the gains of every
    unselected element are always available in O(n).
    """

    def __init__(self, evaluator: MutualInfoEvaluator, max_depth: int | None = None):
        self._sigma = evaluator.sigma
        self._prec = evaluator.precision
        n = evaluator.n
        d = n if max_depth is None else min(int(max_depth), n)
        self._ws = np.zeros((d, n))
        self._wp = np.zeros((d, n))
        # residual conditional variances per depth: qs[k] = diag(S) - colsumsq(W[:k])
        self._qs = np.zeros((d + 1, n))
        self._qp = np.zeros((d + 1, n))
        self._qs[0] = np.diag(self._sigma)
        self._qp[0] = np.diag(self._prec)
        self._values = [0.0]
        self._idx: list[int] = []

    @property
    def depth(self) -> int:
        return len(self._idx)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(self._idx)

    @property
    def value(self) -> float:
        return self._values[-1]

    def reset(self) -> None:
        self._idx.clear()
        del self._values[1:]

    def push(self, element: int) -> float:
        """Add one element; returns the updated selection value."""
        e = int(element)
        d = self.depth
        if d >= self._ws.shape[0]:
            raise ValueError("push exceeds the configured maximum depth")
        ss = self._qs[d, e]
        sp = self._qp[d, e]
        if ss <= 0 or sp <= 0:
            raise NumericalError(f"non-positive conditional variance pushing element {e}")
        rs = (self._sigma[e] - self._ws[:d].T @ self._ws[:d, e]) / math.sqrt(ss)
        rp = (self._prec[e] - self._wp[:d].T @ self._wp[:d, e]) / math.sqrt(sp)
        self._ws[d] = rs
        self._wp[d] = rp
        self._qs[d + 1] = self._qs[d] - rs * rs
        self._qp[d + 1] = self._qp[d] - rp * rp
        self._idx.append(e)
        self._values.append(self._values[-1] + 0.5 * (math.log(ss) + math.log(sp)))
        return self._values[-1]

    def pop(self) -> None:
        if not self._idx:
            raise ValueError("pop from an empty selection")
        self._idx.pop()
        self._values.pop()

    def gains(self) -> np.ndarray:
        """Gain of every unselected element against the current selection; NaN where selected."""
        d = self.depth
        vs = self._qs[d]
        vp = self._qp[d]
        out = np.full(len(vs), np.nan)
        free = np.ones(len(vs), dtype=bool)
        for e in self._idx:
            free[e] = False
        if np.any(vs[free] <= 0) or np.any(vp[free] <= 0):
            raise NumericalError("non-positive conditional variance in incremental gains")
        out[free] = 0.5 * (np.log(vs[free]) + np.log(vp[free]))
        return out

    def extension_values(self, begin: int, mask: np.ndarray) -> np.ndarray:
        """Values of the one-element extensions by the masked tail elements.

        Every tail index (>= begin) must be unselected; used by the
        enumerator to evaluate whole leaf levels without pushing.
        """
        d = self.depth
        vs = self._qs[d, begin:][mask]
        vp = self._qp[d, begin:][mask]
        if np.any(vs <= 0) or np.any(vp <= 0):
            raise NumericalError("non-positive conditional variance in extension values")
        return self._values[-1] + 0.5 * (np.log(vs) + np.log(vp))


def mutual_information(ground, selection, model: GpModel) -> float:
    """Mutual information of a selection against the rest of the pool.

    Convenience wrapper that rebuilds the pool covariance; hold a
    MutualInfoEvaluator when querying repeatedly.
    """
    ev = MutualInfoEvaluator(ground_covariance(model, ground))
    idx = selection.indices if hasattr(selection, "indices") else selection
    return ev.value(idx)


def marginal_gain(element, selection, ground, model: GpModel) -> float:
    """Value increment of one element given the current selection."""
    ev = MutualInfoEvaluator(ground_covariance(model, ground))
    idx = selection.indices if hasattr(selection, "indices") else selection
    e = element.index if hasattr(element, "index") else int(element)
    return ev.gain(e, idx)
