"""States as trace forms and the measures they induce on a block.

In finite dimension every linear functional on Sym(n) is ``a -> trace(G a)``
for a unique symmetric ``G``, so a state is just a density matrix ``rho``.
The extension and representation steps needed for an abstract algebra are
therefore trivial here: restricting a state to a block and reading off
``trace(rho P_x)`` already gives the representing measure on the finite
Stone space, as a weight vector.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InputError, OracleMismatchError
from .rng import SplitMix64
from .symcore import DEFAULT_TOL, eig, eigvals, load_matrix, order_unit_norm, sym

STATE_SAMPLES = 256
STATE_SEED = 0x57A7E


@dataclass(frozen=True)
class State:
    """Density matrix ``rho``: PSD with unit trace."""

    rho: np.ndarray

    def __post_init__(self):
        rho = sym(self.rho)
        object.__setattr__(self, "rho", rho)
        lam = eigvals(rho)
        if lam[0] < -DEFAULT_TOL.psd_tol * max(1.0, abs(lam[-1])):
            raise InputError(f"state is not positive (min eigenvalue {lam[0]:.3e})")
        tr = float(np.trace(rho))
        if abs(tr - 1.0) > 1e-10:
            raise InputError(f"state must have unit trace, got {tr!r}")

    @property
    def n(self):
        return self.rho.shape[0]

    def __call__(self, a):
        return eval_state(self, a)

    @classmethod
    def vector(cls, v):
        """Extremal state ``v v^T`` for a (normalized) vector ``v``."""
        v = np.asarray(v, dtype=float)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v))

    @classmethod
    def maximally_mixed(cls, n):
        return cls(np.eye(n) / n)

    @classmethod
    def random(cls, n, rng):
        """``m^T m / trace(m^T m)`` with ``m`` uniform in ``[-1, 1)``."""
        m = rng.uniform(-1.0, 1.0, size=(n, n))
        g = m.T @ m
        return cls(g / np.trace(g))

    @classmethod
    def load(cls, path):
        return cls(load_matrix(path))


@dataclass(frozen=True)
class LinearFunctional:
    """``phi(a) = trace(G a)``; the dual of the order-unit norm is the trace norm of ``G``."""

    G: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "G", sym(self.G))

    def __call__(self, a):
        return float(np.sum(self.G * sym(a)))

    @property
    def norm(self):
        return float(np.sum(np.abs(eigvals(self.G))))

    @property
    def unit_value(self):
        return float(np.trace(self.G))


@dataclass(frozen=True)
class StateCertificate:
    is_state: bool
    is_positive: bool
    norm: float
    unit_value: float

    def __bool__(self):
        return self.is_state


@dataclass(frozen=True)
class InducedMeasure:
    weights: np.ndarray

    @property
    def total(self):
        return float(np.sum(self.weights))

    def integrate(self, f):
        return float(np.dot(self.weights, np.asarray(f, dtype=float)))


def eval_state(omega, a):
    a = sym(a)
    if a.shape != omega.rho.shape:
        raise DimensionError(f"dimension mismatch: state {omega.n} vs matrix {a.shape[0]}")
    return float(np.sum(omega.rho * a))


def functional_is_state(phi, tol=1e-9):
    """A functional is positive iff ``||phi|| = phi(1)``, and a state iff both are 1."""
    norm, unit = phi.norm, phi.unit_value
    positive = abs(norm - unit) <= tol * max(1.0, norm)
    return StateCertificate(
        is_state=positive and abs(unit - 1.0) <= tol and abs(norm - 1.0) <= tol,
        is_positive=positive,
        norm=norm,
        unit_value=unit,
    )


def _extremal_values(a):
    """``v^T a v`` over the eigenvectors ``v``, i.e. over the vector states
    attaining the extremes of ``omega(a)``."""
    d = eig(a)
    return np.einsum("ij,ik,kj->j", d.Q, a, d.Q)


def positivity_via_states(a, cfg=DEFAULT_TOL, samples=STATE_SAMPLES, seed=STATE_SEED):
    """``a >= 0`` iff ``omega(a) >= 0`` for every state.

    The minimum over states is attained at a vector state and equals the
    least eigenvalue.  As a consistency check, ``samples`` random mixed states
    are evaluated too; none may go below that minimum.
    """
    a = sym(a, cfg)
    values = _extremal_values(a)
    exact = float(np.min(values))
    scale = max(1.0, float(np.max(np.abs(values))))
    if samples:
        n = a.shape[0]
        # same construction as State.random, batched
        m = SplitMix64(seed).uniform(-1.0, 1.0, size=(samples, n, n))
        g = np.einsum("sji,sjk->sik", m, m)
        sampled = np.einsum("sij,ij->s", g, a) / np.einsum("sii->s", g)
        if sampled.min() < exact - 1e-12 * scale:
            raise OracleMismatchError(
                f"sampled state value {sampled.min()!r} is below the exact minimum {exact!r}"
            )
    return exact >= -cfg.psd_tol * scale


def norm_via_states(a):
    """``||a|| = sup |omega(a)|`` over states, attained at vector states."""
    return float(np.max(np.abs(_extremal_values(sym(a)))))


def induced_measure(omega, block):
    """Weights ``trace(rho P_x)`` on the cells of ``block``."""
    if omega.n != block.n:
        raise DimensionError(f"dimension mismatch: state {omega.n} vs block {block.n}")
    w = np.array([eval_state(omega, p.p) for p in block.block_projections])
    w[(w < 0) & (w >= -1e-12)] = 0.0
    if np.any(w < 0):
        raise OracleMismatchError(f"negative induced weight {w.min()!r}")
    return InducedMeasure(w)


def state_determines_norm(a):
    """Gap between the state-space norm and the order-unit norm (should be ~0)."""
    return abs(norm_via_states(a) - order_unit_norm(a))
