"""The concrete synaptic algebra: real symmetric matrices under the Loewner order.

Elements are plain ``float64`` numpy arrays that have passed through
:func:`sym`, which validates, symmetrizes and freezes them.  Every operation
here accepts array-likes and runs them through :func:`sym` itself, so callers
may pass nested lists.

Tolerances follow one rule: an absolute threshold is the configured relative
tolerance times ``max(1, norm)`` of the relevant matrix.  Order verdicts
always carry the raw margin so a caller can re-judge with its own threshold.
"""

from dataclasses import dataclass, field
import json

import numpy as np

from .errors import (
    DimensionError,
    InputError,
    NotAProjectionError,
    NotInvertibleError,
    NotPositiveError,
)

MAX_DIM = 64


@dataclass(frozen=True)
class ToleranceConfig:
    sym_tol: float = 1e-9
    psd_tol: float = 1e-9
    commute_tol: float = 1e-9
    proj_tol: float = 1e-9
    # relative eigenvalue gap below which two joint eigenvalues share a cell
    cluster_tol: float = 1e-8

    def __post_init__(self):
        for name, value in self.as_dict().items():
            if not np.isfinite(value) or value < 0:
                raise InputError(f"tolerance {name} must be a nonnegative real, got {value}")

    def as_dict(self):
        return {
            "sym_tol": self.sym_tol,
            "psd_tol": self.psd_tol,
            "commute_tol": self.commute_tol,
            "proj_tol": self.proj_tol,
            "cluster_tol": self.cluster_tol,
        }


DEFAULT_TOL = ToleranceConfig()


@dataclass(frozen=True)
class OrderCheckReport:
    """Verdict of ``lower <= upper`` in the Loewner order.

    ``margin`` is the minimum eigenvalue of ``upper - lower``; ``threshold``
    is the (negative) value it was compared against.
    """

    verdict: bool
    margin: float
    threshold: float
    tolerances: dict = field(default_factory=dict)

    def __bool__(self):
        return self.verdict


@dataclass(frozen=True)
class EigDecomposition:
    """Ascending eigenvalues ``lam`` and orthonormal eigenvector columns ``Q``.

    Each column is normalized so that its first nonzero component is
    positive, which makes reports reproducible across LAPACK builds.
    """

    Q: np.ndarray
    lam: np.ndarray

    def reconstruct(self):
        return (self.Q * self.lam) @ self.Q.T

    def apply(self, func):
        """Spectral calculus: ``Q f(Lambda) Q^T``."""
        return _freeze(_symmetrize((self.Q * func(self.lam)) @ self.Q.T))


def _freeze(m):
    m.setflags(write=False)
    return m


def _symmetrize(m):
    return 0.5 * (m + m.T)


def sym(m, cfg=DEFAULT_TOL):
    """Validate ``m`` as an element of Sym(n) and return a frozen copy.

    Inputs with max asymmetry up to ``sym_tol * max(1, max|entry|)`` are
    replaced by ``(m + m^T) / 2``; larger asymmetry is rejected.
    """
    if isinstance(m, np.ndarray) and not m.flags.writeable and m.dtype == np.float64:
        # already validated by a previous call
        if m.ndim == 2 and m.shape[0] == m.shape[1] and np.array_equal(m, m.T):
            return m
    arr = np.array(m, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise InputError(f"expected a nonempty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(arr))))
    asym = float(np.max(np.abs(arr - arr.T)))
    if asym > cfg.sym_tol * scale:
        raise InputError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    return _freeze(_symmetrize(arr))


def gen(m):
    """An element of the enveloping algebra: any finite square matrix."""
    arr = np.array(m, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InputError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("matrix has non-finite entries")
    return arr


def identity(n):
    return _freeze(np.eye(n))


def _same_dim(a, b):
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")


def eig(a):
    a = sym(a)
    lam, Q = np.linalg.eigh(a)
    Q = np.array(Q)
    for j in range(Q.shape[1]):
        col = Q[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size and col[nz[0]] < 0:
            Q[:, j] = -col
    return EigDecomposition(Q=_freeze(Q), lam=_freeze(lam))


def eigvals(a):
    return np.linalg.eigvalsh(sym(a))


def min_eig(a):
    return float(eigvals(a)[0])


def order_unit_norm(a):
    """``inf{t > 0 : -t <= a <= t}``, i.e. the largest absolute eigenvalue."""
    lam = eigvals(a)
    return float(max(abs(lam[0]), abs(lam[-1])))


def loewner_leq(a, b, cfg=DEFAULT_TOL):
    a, b = sym(a, cfg), sym(b, cfg)
    _same_dim(a, b)
    diff = b - a
    lam = eigvals(diff)
    margin = float(lam[0])
    scale = max(1.0, abs(lam[0]), abs(lam[-1]))
    threshold = -cfg.psd_tol * scale
    return OrderCheckReport(margin >= threshold, margin, threshold, {"psd_tol": cfg.psd_tol})


def is_psd(a, cfg=DEFAULT_TOL):
    lam = eigvals(a)
    return bool(lam[0] >= -cfg.psd_tol * max(1.0, abs(lam[0]), abs(lam[-1])))


def noise_floor(lam):
    """Eigenvalues within ``n * eps * max|lam|`` of zero are indistinguishable
    from zero for a backward-stable eigensolver."""
    return len(lam) * np.finfo(np.float64).eps * float(np.max(np.abs(lam)))


def _require_psd(a, cfg, what="argument"):
    """Eigendecomposition of ``a`` after checking positivity.

    Small negative eigenvalues are clamped to zero, and so is everything below
    the noise floor: ``sqrt`` would otherwise amplify 1e-16 noise to 1e-8.
    """
    d = eig(a)
    scale = max(1.0, abs(d.lam[0]), abs(d.lam[-1]))
    if d.lam[0] < -cfg.psd_tol * scale:
        raise NotPositiveError(
            f"{what} is not positive semidefinite (min eigenvalue {d.lam[0]:.3e})",
            float(d.lam[0]),
        )
    lam = np.where(d.lam <= noise_floor(d.lam), 0.0, d.lam)
    return EigDecomposition(d.Q, _freeze(lam))


def sqrt_spectral(a, cfg=DEFAULT_TOL):
    """Unique positive square root ``Q diag(sqrt(lam)) Q^T``."""
    return _require_psd(a, cfg).apply(np.sqrt)


def absolute(a):
    """``|a| = (a^2)^{1/2}``, evaluated as ``Q |Lambda| Q^T`` to avoid squaring
    the condition number."""
    return eig(a).apply(np.abs)


def quadratic_map(a, b):
    """``b -> a b a``; linear and order preserving in ``b``."""
    a, b = sym(a), sym(b)
    _same_dim(a, b)
    return _freeze(_symmetrize(a @ b @ a))


def invertibility_margin(a):
    """Largest ``eps`` with ``eps <= |a|``: the smallest absolute eigenvalue."""
    return float(np.min(np.abs(eigvals(a))))


def inverse(a, cfg=DEFAULT_TOL):
    a = sym(a, cfg)
    margin = invertibility_margin(a)
    if margin <= cfg.psd_tol * max(1.0, order_unit_norm(a)):
        raise NotInvertibleError(f"matrix is singular (margin {margin:.3e})", margin)
    inv = np.linalg.solve(a, np.eye(a.shape[0]))
    return _freeze(_symmetrize(inv))


def func_spectral(a, func, cfg=DEFAULT_TOL, psd=False):
    """Apply a scalar function through the spectral calculus."""
    d = _require_psd(a, cfg) if psd else eig(a)
    return d.apply(func)


@dataclass(frozen=True)
class Projection:
    """A validated symmetric idempotent."""

    p: np.ndarray
    residual: float

    @property
    def complement(self):
        return _freeze(np.eye(self.p.shape[0]) - self.p)

    def _commuting(self, other, cfg):
        q = other.p if isinstance(other, Projection) else sym(other, cfg)
        _same_dim(self.p, q)
        res = float(np.max(np.abs(self.p @ q - q @ self.p)))
        if res > cfg.commute_tol:
            raise InputError(
                f"meet/join are only defined here for commuting projections (residual {res:.3e})"
            )
        return q

    def meet(self, other, cfg=DEFAULT_TOL):
        q = self._commuting(other, cfg)
        return projection_check(_symmetrize(self.p @ q), cfg)

    def join(self, other, cfg=DEFAULT_TOL):
        q = self._commuting(other, cfg)
        return projection_check(self.p + q - _symmetrize(self.p @ q), cfg)


def projection_check(p, cfg=DEFAULT_TOL):
    p = sym(p, cfg)
    residual = float(np.max(np.abs(p @ p - p)))
    if residual > cfg.proj_tol:
        raise NotAProjectionError(f"not idempotent (residual {residual:.3e})", residual)
    return Projection(p, residual)


def load_matrix(path, cfg=DEFAULT_TOL):
    """Read the ``{"n": int, "data": [n*n reals]}`` container."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc})") from None
    return matrix_from_json(doc, cfg)


def matrix_from_json(doc, cfg=DEFAULT_TOL):
    if not isinstance(doc, dict) or "n" not in doc or "data" not in doc:
        raise InputError('matrix document must be an object with keys "n" and "data"')
    n = doc["n"]
    data = doc["data"]
    if not isinstance(n, int) or isinstance(n, bool) or not 1 <= n <= MAX_DIM:
        raise InputError(f"n must be an integer in [1, {MAX_DIM}], got {n!r}")
    if not isinstance(data, list) or len(data) != n * n:
        raise InputError(f"data must be a list of n*n = {n * n} numbers")
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in data):
        raise InputError("data entries must be numbers")
    return sym(np.array(data, dtype=np.float64).reshape(n, n), cfg)


def matrix_to_json(a):
    a = np.asarray(a)
    return {"n": int(a.shape[0]), "data": [float(x) for x in a.ravel()]}
