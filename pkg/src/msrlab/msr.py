"""Monotone square roots: integral representation, regularization and checks.

The scalar identity behind everything here is

    sqrt(t) = (1/pi) * int_0^inf  t / (lam + t) * lam^(-1/2) dlam,   t > 0.

Applied eigenvalue-wise it gives the matrix identity

    a^(1/2) = int_0^inf a (lam + a)^(-1) dmu(lam),   dmu = lam^(-1/2) dlam / pi,

for invertible ``a >= 0``.  Evaluating any state on both sides gives the
state-wise form, and conversely the state-wise form for all states implies the
matrix form because states separate points.  Each integrand ``a (lam + a)^-1``
equals ``1 - lam (lam + a)^-1`` and is monotone in ``a`` because inversion is
antitone, so integrating yields monotonicity of the square root.

The improper integral is discretized with the substitution ``lam = tan^2 th``,
``th in (0, pi/2)``, under which the measure becomes ``(2/pi) sec^2 th dth``
and the integrand is smooth and bounded; Gauss-Legendre nodes on
``(0, pi/2)`` then converge geometrically.  Unlike ``lam = t z^2`` this
substitution does not depend on ``t``, so one rule serves every eigenvalue of
a matrix at once.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import HypothesisError, InputError, NotInBlockError, NotPositiveError
from .rng import SplitMix64
from .symcore import (
    DEFAULT_TOL,
    _freeze,
    _require_psd,
    _symmetrize,
    eigvals,
    invertibility_margin,
    inverse,
    loewner_leq,
    order_unit_norm,
    sqrt_spectral,
    sym,
)
from .blocks import function_rep
from .states import eval_state, induced_measure

DEFAULT_NODES = 128
CALIBRATION_GRID = np.logspace(-2, 2, 101)
SINGULAR_MARGIN = 1e-12
REGULARIZATION_SHIFT = 1e-12
LADDER = tuple(10**k for k in range(7))
RESOLVENT_LAMBDAS = (0.01, 0.1, 1.0, 10.0, 100.0)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights with ``sum_k w_k t / (lam_k + t) ~= sqrt(t)``.

    ``certified_tol`` is the worst scalar error on the calibration grid
    ``t in [1e-2, 1e2]``, measured when the rule is built.
    """

    nodes: np.ndarray
    weights: np.ndarray
    scheme: str
    certified_tol: float

    @property
    def node_count(self):
        return len(self.nodes)

    def scalar_sqrt(self, t):
        t = np.asarray(t, dtype=float)
        return np.sum(self.weights * t[..., None] / (self.nodes + t[..., None]), axis=-1)

    def scalar_error(self, t):
        t = np.asarray(t, dtype=float)
        return np.abs(self.scalar_sqrt(t) - np.sqrt(t))


def make_rule(N=DEFAULT_NODES):
    if not isinstance(N, (int, np.integer)) or N < 2:
        raise InputError(f"node count must be an integer >= 2, got {N!r}")
    x, g = np.polynomial.legendre.leggauss(int(N))
    theta = (x + 1.0) * (np.pi / 4)
    nodes = np.tan(theta) ** 2
    # (2/pi) * Gauss weight on (0, pi/2) * sec^2 theta
    weights = (2.0 / np.pi) * g * (np.pi / 4) * (1.0 + nodes)
    order = np.argsort(nodes)
    nodes, weights = nodes[order], weights[order]
    if not (np.all(np.diff(nodes) > 0) and np.all(weights > 0) and nodes[0] > 0):
        raise InputError(f"degenerate quadrature rule for N={N}")
    probe = QuadratureRule(nodes, weights, "gauss-legendre/tan2", 0.0)
    cert = float(np.max(probe.scalar_error(CALIBRATION_GRID)))
    if not np.isfinite(cert):
        raise InputError(f"quadrature calibration failed for N={N}")
    return QuadratureRule(_freeze(nodes), _freeze(weights), probe.scheme, cert)


def _check_lambda(lam):
    if not np.isfinite(lam) or lam <= 0:
        raise InputError(f"lambda must be a positive real, got {lam!r}")


def resolvent_term(a, lam, cfg=DEFAULT_TOL):
    """``a (lam + a)^-1`` for ``a >= 0`` and ``lam > 0``.

    Computed as a linear solve; ``a`` commutes with ``(lam + a)^-1`` so the
    order of the factors does not matter.
    """
    _check_lambda(lam)
    a = sym(a, cfg)
    _require_psd(a, cfg)
    n = a.shape[0]
    return _freeze(_symmetrize(np.linalg.solve(lam * np.eye(n) + a, a)))


def resolvent_complement(a, lam, cfg=DEFAULT_TOL):
    """``1 - lam (lam + a)^-1``, the other side of the resolvent identity."""
    _check_lambda(lam)
    a = sym(a, cfg)
    _require_psd(a, cfg)
    n = a.shape[0]
    return _freeze(np.eye(n) - lam * inverse(lam * np.eye(n) + a, cfg))


def _resolvent_stack(a, nodes):
    n = a.shape[0]
    shifted = nodes[:, None, None] * np.eye(n) + a
    terms = np.linalg.solve(shifted, np.broadcast_to(a, shifted.shape))
    return 0.5 * (terms + np.swapaxes(terms, -1, -2))


@dataclass(frozen=True)
class IntegralInfo:
    regularized: bool
    shift: float
    node_count: int
    oracle_gap: float
    error_estimate: float


def sqrt_integral(a, rule=None, cfg=DEFAULT_TOL, full_output=False):
    """Square root by quadrature: ``sum_k w_k a (lam_k + a)^-1``.

    Singular ``a`` (invertibility margin below 1e-12) is shifted by 1e-12
    first and the result is flagged.  With ``full_output`` an
    :class:`IntegralInfo` is returned too, holding the gap to the spectral
    root and the scalar quadrature error at the spectrum.
    """
    rule = rule or make_rule()
    a = sym(a, cfg)
    d = _require_psd(a, cfg)
    margin = float(np.min(d.lam))
    regularized = margin < SINGULAR_MARGIN
    shift = REGULARIZATION_SHIFT if regularized else 0.0
    work = a + shift * np.eye(a.shape[0]) if regularized else a
    terms = _resolvent_stack(work, rule.nodes)
    root = _freeze(_symmetrize(np.tensordot(rule.weights, terms, axes=1)))
    if not full_output:
        return root
    spectrum = d.lam + shift
    info = IntegralInfo(
        regularized=regularized,
        shift=shift,
        node_count=rule.node_count,
        oracle_gap=order_unit_norm(root - sqrt_spectral(a, cfg)),
        error_estimate=float(np.max(rule.scalar_error(spectrum))) + (math.sqrt(shift) if regularized else 0.0),
    )
    return root, info


def regularized_sqrt(a, n, cfg=DEFAULT_TOL):
    """``(a + 1/n)^(1/2)``, strictly positive definite for ``a >= 0``."""
    if n < 1:
        raise InputError(f"n must be a positive integer, got {n!r}")
    a = sym(a, cfg)
    _require_psd(a, cfg)
    return sqrt_spectral(a + np.eye(a.shape[0]) / n, cfg)


def regularization_bound(a, n, cfg=DEFAULT_TOL):
    """Both sides of ``||(a+1/n)^(1/2) - a^(1/2)|| <= n^(-1/2) ||(a+1)^(-1/2)||``."""
    a = sym(a, cfg)
    lhs = order_unit_norm(regularized_sqrt(a, n, cfg) - sqrt_spectral(a, cfg))
    inv_root = _require_psd(a, cfg).apply(lambda lam: 1.0 / np.sqrt(lam + 1.0))
    rhs = order_unit_norm(inv_root) / math.sqrt(n)
    return lhs, rhs


def _validate_order_pair(a, b, cfg):
    a, b = sym(a, cfg), sym(b, cfg)
    for name, m in (("a", a), ("b", b)):
        try:
            _require_psd(m, cfg, name)
        except NotPositiveError as exc:
            raise HypothesisError(str(exc)) from None
    order = loewner_leq(a, b, cfg)
    if not order.verdict:
        raise HypothesisError(f"a <= b fails (margin {order.margin:.3e})")
    return a, b


def resolvent_monotone_check(a, b, lam, cfg=DEFAULT_TOL):
    """``a (lam+a)^-1 <= b (lam+b)^-1`` for ``0 <= a <= b``."""
    _check_lambda(lam)
    a, b = _validate_order_pair(a, b, cfg)
    return loewner_leq(resolvent_term(a, lam, cfg), resolvent_term(b, lam, cfg), cfg)


def resolvent_chain_margins(a, b, lams=RESOLVENT_LAMBDAS, cfg=DEFAULT_TOL):
    """Min eigenvalue of ``b (lam+b)^-1 - a (lam+a)^-1`` for each ``lam``.

    Batched form of :func:`resolvent_monotone_check`; the pair is validated once.
    """
    lams = np.asarray(lams, dtype=float)
    for lam in lams:
        _check_lambda(lam)
    a, b = _validate_order_pair(a, b, cfg)
    diff = _resolvent_stack(b, lams) - _resolvent_stack(a, lams)
    return np.linalg.eigvalsh(diff)[:, 0]


def antitone_inverse_check(a, b, cfg=DEFAULT_TOL):
    """``b^-1 <= a^-1`` for ``0 <= a <= b`` with ``a`` invertible."""
    a, b = _validate_order_pair(a, b, cfg)
    margin = invertibility_margin(a)
    if margin <= cfg.psd_tol * max(1.0, order_unit_norm(a)):
        raise HypothesisError(f"a is not invertible (margin {margin:.3e})")
    return loewner_leq(inverse(b, cfg), inverse(a, cfg), cfg)


@dataclass(frozen=True)
class MsrReport:
    hypothesis_ok: bool
    verdict: bool
    sqrt_margin: float
    threshold: float
    method: str
    tolerances: dict
    resolvent_margins: dict = field(default_factory=dict)
    regularized: bool = False
    ladder: tuple = ()

    def __bool__(self):
        return self.verdict


METHODS = ("spectral", "integral", "regularized")


def msr_check(a, b, method="spectral", cfg=DEFAULT_TOL, rule=None, resolvent_lambdas=()):
    """Check ``a^(1/2) <= b^(1/2)`` for ``0 <= a <= b``.

    ``method`` selects how the roots are computed.  ``"regularized"`` walks
    the ladder ``n = 1, 10, ..., 10^6`` of invertible approximants
    ``a + 1/n <= b + 1/n`` and reports the margin at the point where it has
    settled to 1e-10 (or at the last rung); the limit is a valid verdict
    because the positive cone is closed.
    """
    if method not in METHODS:
        raise InputError(f"unknown method {method!r}; expected one of {METHODS}")
    a, b = _validate_order_pair(a, b, cfg)
    regularized = False
    ladder = ()
    if method == "spectral":
        margin = float(eigvals(sqrt_spectral(b, cfg) - sqrt_spectral(a, cfg))[0])
    elif method == "integral":
        rule = rule or make_rule()
        ra, ia = sqrt_integral(a, rule, cfg, full_output=True)
        rb, ib = sqrt_integral(b, rule, cfg, full_output=True)
        regularized = ia.regularized or ib.regularized
        margin = float(eigvals(rb - ra)[0])
    else:
        margins = []
        for n in LADDER:
            m = float(eigvals(regularized_sqrt(b, n, cfg) - regularized_sqrt(a, n, cfg))[0])
            margins.append((n, m))
            if len(margins) > 1 and abs(margins[-1][1] - margins[-2][1]) < 1e-10:
                break
        ladder = tuple(margins)
        margin = margins[-1][1]
    threshold = -cfg.psd_tol * max(1.0, math.sqrt(order_unit_norm(b)))
    resolvent_margins = {
        float(lam): resolvent_monotone_check(a, b, lam, cfg).margin for lam in resolvent_lambdas
    }
    return MsrReport(
        hypothesis_ok=True,
        verdict=margin >= threshold,
        sqrt_margin=margin,
        threshold=threshold,
        method=method,
        tolerances=cfg.as_dict(),
        resolvent_margins=resolvent_margins,
        regularized=regularized,
        ladder=ladder,
    )


def state_integral_identity(omega, a, rule=None, cfg=DEFAULT_TOL):
    """``omega(a^(1/2))`` against ``sum_k w_k omega(a (lam_k + a)^-1)``.

    Returns ``(lhs, rhs, gap)``.  ``a`` must be invertible; regularize first
    otherwise.
    """
    rule = rule or make_rule()
    a = sym(a, cfg)
    _require_psd(a, cfg)
    margin = invertibility_margin(a)
    if margin < SINGULAR_MARGIN:
        raise HypothesisError(f"a must be invertible (margin {margin:.3e})")
    lhs = eval_state(omega, sqrt_spectral(a, cfg))
    values = [eval_state(omega, t) for t in _resolvent_stack(a, rule.nodes)]
    rhs = math.fsum(w * v for w, v in zip(rule.weights, values))
    return lhs, rhs, abs(lhs - rhs)


def fubini_check(omega, a, block, rule=None):
    """Swap the sums over cells and over quadrature nodes; returns the gap.

    Both orders use compensated summation, so the gap measures only
    floating-point discipline.
    """
    rule = rule or make_rule()
    f = function_rep(block, a)
    if np.min(f) <= 0:
        raise NotInBlockError("a must be positive definite on every cell", float(np.min(f)))
    m = induced_measure(omega, block).weights
    cells_outer = math.fsum(
        math.fsum(m[x] * w * f[x] / (lam + f[x]) for lam, w in zip(rule.nodes, rule.weights))
        for x in range(len(f))
    )
    nodes_outer = math.fsum(
        math.fsum(m[x] * w * f[x] / (lam + f[x]) for x in range(len(f)))
        for lam, w in zip(rule.nodes, rule.weights)
    )
    return abs(cells_outer - nodes_outer)


def state_resolvent_gap(omega, a, block, lam):
    """``omega(a (lam+a)^-1)`` against ``sum_x m[x] f[x] / (lam + f[x])``."""
    f = function_rep(block, a)
    m = induced_measure(omega, block).weights
    lhs = eval_state(omega, resolvent_term(a, lam))
    return abs(lhs - math.fsum(m * f / (lam + f)))


# negative controls ----------------------------------------------------------

FUNCTIONS = {
    "square": np.square,
    "cube": lambda t: t**3,
    "exp": np.exp,
    "sqrt": np.sqrt,
}


@dataclass(frozen=True)
class Violation:
    trial: int
    a: np.ndarray
    b: np.ndarray
    margin: float


def monotonicity_margin(func, a, b, cfg=DEFAULT_TOL):
    """Min eigenvalue of ``f(b) - f(a)``, with its verdict threshold."""
    fa = _require_psd(a, cfg).apply(func)
    fb = _require_psd(b, cfg).apply(func)
    diff = fb - fa
    threshold = -cfg.psd_tol * max(1.0, order_unit_norm(fb))
    return float(eigvals(diff)[0]), threshold


def random_psd_pair(rng, n, commuting=False):
    """``a = m^T m`` and ``b = a + c^T c`` with ranks drawn in ``1..n``.

    With ``commuting`` both are diagonal.
    """
    if commuting:
        a = np.diag(rng.uniform(0.0, 1.0, size=(n,)))
        return a, a + np.diag(rng.uniform(0.0, 1.0, size=(n,)))
    ra = 1 + rng.integers(n)
    rc = 1 + rng.integers(n)
    m = rng.uniform(-1.0, 1.0, size=(ra, n))
    c = rng.uniform(-1.0, 1.0, size=(rc, n))
    a = m.T @ m
    return a, a + c.T @ c


def counterexample_search(function_tag, dim, trials, seed, commuting=False, cfg=DEFAULT_TOL):
    """Random pairs ``0 <= a <= b`` for which ``f(a) <= f(b)`` fails.

    ``square``, ``cube`` and ``exp`` are not operator monotone, so violations
    are expected; ``sqrt`` is the control and must produce none.
    """
    if function_tag not in FUNCTIONS:
        raise InputError(f"unknown function tag {function_tag!r}; expected one of {sorted(FUNCTIONS)}")
    func = FUNCTIONS[function_tag]
    found = []
    for trial in range(trials):
        rng = SplitMix64.for_trial(seed, trial)
        a, b = random_psd_pair(rng, dim, commuting)
        margin, threshold = monotonicity_margin(func, a, b, cfg)
        if margin < threshold:
            found.append(Violation(trial, _freeze(sym(a)), _freeze(sym(b)), margin))
    return found


# third method for benchmarking ----------------------------------------------

def denman_beavers(a, tol=1e-12, max_iter=50):
    """Coupled iteration ``X <- (X + Y^-1)/2``, ``Y <- (Y + X^-1)/2`` from
    ``X = a``, ``Y = 1``; ``X -> a^(1/2)``.  Requires ``a`` positive definite.

    Returns ``(X, iterations)``.
    """
    a = sym(a)
    n = a.shape[0]
    X, Y = np.array(a), np.eye(n)
    scale = max(1.0, order_unit_norm(a))
    for k in range(1, max_iter + 1):
        X, Y = 0.5 * (X + np.linalg.inv(Y)), 0.5 * (Y + np.linalg.inv(X))
        X = _symmetrize(X)
        Y = _symmetrize(Y)
        if np.max(np.abs(X @ X - a)) <= tol * scale:
            return _freeze(X), k
    return _freeze(X), max_iter
