"""Commutants, commutative blocks and their function representation.

A commuting family ``S`` of symmetric matrices is simultaneously
diagonalizable.  Grouping the joint eigenvectors into joint eigenspaces gives
a finite set ``X`` (one point per eigenspace) and the projections ``P_x`` onto
those eigenspaces.  Every member of the block, i.e. every matrix in the span
of the ``P_x`` (which is the bicommutant of ``S``), is then represented by the
vector of its eigenvalues on the cells, and this map is linear,
multiplicative, isometric for the sup norm and order preserving in both
directions.

Because ``X`` is finite and discrete, no topology is represented: a "compact
open subset" of ``X`` is just a subset, and its characteristic function is
the 0/1 indicator of a union of cells.  For degenerate families the
refinement order may influence the basis chosen inside a cell, but not the
projections ``P_x``; the result is *a* block for ``S``, not a canonical
maximal one.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.linalg import null_space

from .errors import (
    BlockRefinementError,
    DimensionError,
    NotCommutingError,
    NotInBlockError,
)
from .rng import SplitMix64
from .symcore import DEFAULT_TOL, Projection, _freeze, _symmetrize, order_unit_norm, sym

BLOCK_SEED = 0x5EED_B10C
MAX_RESAMPLES = 8


@dataclass(frozen=True)
class Commutation:
    verdict: bool
    residual: float

    def __bool__(self):
        return self.verdict


def commutes(a, b, cfg=DEFAULT_TOL):
    a, b = sym(a, cfg), sym(b, cfg)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    residual = float(np.max(np.abs(a @ b - b @ a)))
    scale = max(1.0, order_unit_norm(a) * order_unit_norm(b))
    return Commutation(residual <= cfg.commute_tol * scale, residual)


def sym_basis(n):
    """Trace-orthonormal basis of Sym(n): ``E_ii`` then ``(E_ij + E_ji)/sqrt 2``."""
    basis = []
    for i in range(n):
        e = np.zeros((n, n))
        e[i, i] = 1.0
        basis.append(e)
    for i, j in combinations(range(n), 2):
        e = np.zeros((n, n))
        e[i, j] = e[j, i] = 2**-0.5
        basis.append(e)
    return basis


def commutant_basis(S, n=None):
    """Trace-orthonormal basis of ``{x in Sym(n) : xs = sx for all s in S}``.

    With ``S`` empty the commutant is all of Sym(n), so ``n`` must be given.
    """
    S = [sym(s) for s in S]
    if S:
        dims = {s.shape[0] for s in S}
        if len(dims) != 1 or (n is not None and n not in dims):
            raise DimensionError(f"generators have inconsistent dimensions {sorted(dims)}")
        n = dims.pop()
    elif n is None:
        raise DimensionError("dimension is required when S is empty")
    basis = sym_basis(n)
    if not S:
        return [_freeze(e) for e in basis]
    # column k: stacked commutators [E_k, s] for all s
    op = np.column_stack([np.concatenate([(e @ s - s @ e).ravel() for s in S]) for e in basis])
    smax = np.linalg.norm(op, 2)
    coeffs = null_space(op, rcond=1e-10 if smax > 0 else None)
    return [_freeze(_symmetrize(sum(c * e for c, e in zip(col, basis)))) for col in coeffs.T]


def bicommutant(S, n=None):
    S = [sym(s) for s in S]
    if S:
        n = S[0].shape[0]
    return commutant_basis(commutant_basis(S, n), n)


def span_contains(basis, x, tol=1e-9):
    """Whether ``x`` lies in the span of a trace-orthonormal basis."""
    x = np.asarray(x, dtype=float)
    resid = x - sum((np.sum(b * x) * b for b in basis), np.zeros_like(x))
    return float(np.max(np.abs(resid))) <= tol * max(1.0, float(np.max(np.abs(x))))


@dataclass(frozen=True)
class CommutativeBlock:
    """Joint eigenbasis ``Q`` of a commuting family, with the cells of joint
    eigenspaces (``partition`` indexes columns of ``Q``) and their projections.

    Cells are contiguous runs of columns, ordered by descending lexicographic
    order of their projection matrices, which does not depend on the random
    combination used to find ``Q``.
    """

    generators: tuple
    Q: np.ndarray
    partition: tuple
    block_projections: tuple
    cfg: object = DEFAULT_TOL

    @property
    def n(self):
        return self.Q.shape[0]

    @property
    def X_size(self):
        return len(self.partition)

    def diagonal_residual(self, a):
        d = self.Q.T @ sym(a) @ self.Q
        return float(np.max(np.abs(d - np.diag(np.diag(d))))) if d.size > 1 else 0.0

    def contains(self, a):
        try:
            function_rep(self, a)
        except NotInBlockError:
            return False
        return True

    def member(self, values):
        """Inverse of the function representation: ``sum_x values[x] P_x``."""
        values = np.asarray(values, dtype=float)
        if values.shape != (self.X_size,):
            raise DimensionError(f"expected {self.X_size} values, got shape {values.shape}")
        out = sum((v * p.p for v, p in zip(values, self.block_projections)), np.zeros((self.n, self.n)))
        return _freeze(_symmetrize(out))

    def dump(self):
        """``{"X": |X|, "cells": [[indices]], "psi": {generator index: values}}``."""
        return {
            "X": self.X_size,
            "cells": [list(cell) for cell in self.partition],
            "psi": {str(i): [float(v) for v in function_rep(self, g)] for i, g in enumerate(self.generators)},
        }


@dataclass(frozen=True)
class FunctionRep:
    X_size: int
    psi: np.ndarray


def _cluster(values, tol):
    """Split ascending ``values`` into runs whose consecutive gaps are <= tol."""
    groups, start = [], 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > tol:
            groups.append(list(range(start, i)))
            start = i
    return groups


def _refine(Q, generators, cfg, depth=0):
    """Rotate columns of ``Q`` (an orthonormal basis of a joint invariant
    subspace) until every generator is diagonal on it."""
    if Q.shape[1] == 1 or depth >= len(generators):
        return Q
    g = generators[depth]
    sub = _symmetrize(Q.T @ g @ Q)
    lam, V = np.linalg.eigh(sub)
    Q = Q @ V
    tol = cfg.cluster_tol * max(1.0, float(np.max(np.abs(lam))))
    cols = [_refine(Q[:, idx], generators, cfg, depth + 1) for idx in _cluster(lam, tol)]
    return np.column_stack(cols)


def _check_commuting(generators, cfg):
    failures = []
    for (i, a), (j, b) in combinations(enumerate(generators), 2):
        c = commutes(a, b, cfg)
        if not c.verdict:
            failures.append((c.residual, (i, j)))
    if failures:
        residual, pair = max(failures)
        raise NotCommutingError(
            f"generators {pair[0]} and {pair[1]} do not commute (residual {residual:.3e})", pair, residual
        )


def build_block(S, cfg=DEFAULT_TOL, n=None, seed=BLOCK_SEED):
    """Jointly diagonalize a commuting family and group the joint eigenspaces.

    A random combination of the (norm-scaled) generators is diagonalized,
    then each cluster of near-equal eigenvalues is refined by the generators
    in turn.  If some generator is still not diagonal in the result, a fresh
    combination is drawn, up to ``MAX_RESAMPLES`` times.
    """
    generators = tuple(sym(s, cfg) for s in S)
    if generators:
        dims = {g.shape[0] for g in generators}
        if len(dims) != 1:
            raise DimensionError(f"generators have inconsistent dimensions {sorted(dims)}")
        n = dims.pop()
    elif n is None:
        raise DimensionError("dimension is required when S is empty")

    _check_commuting(generators, cfg)

    scaled = [g / max(1.0, order_unit_norm(g)) for g in generators]
    rng = SplitMix64(seed)
    for _ in range(MAX_RESAMPLES):
        coeffs = rng.uniform(0.5, 1.5, size=(len(scaled),)) * np.where(
            rng.uniform(size=(len(scaled),)) < 0.5, -1.0, 1.0
        )
        combo = sum((c * g for c, g in zip(coeffs, scaled)), np.zeros((n, n)))
        lam, Q = np.linalg.eigh(combo)
        tol = cfg.cluster_tol * max(1.0, float(np.max(np.abs(lam))))
        Q = np.column_stack([_refine(Q[:, idx], scaled, cfg) for idx in _cluster(lam, tol)])
        if all(_offdiag(Q, g) <= 1e-8 * max(1.0, order_unit_norm(g)) for g in generators):
            break
    else:
        raise BlockRefinementError(f"joint diagonalization failed after {MAX_RESAMPLES} resamples")

    # group columns on which every generator takes the same value
    diags = np.array([np.diag(Q.T @ g @ Q) for g in generators]).reshape(len(generators), n)
    scales = np.array([max(1.0, order_unit_norm(g)) for g in generators])
    cells = []
    for i in range(n):
        for cell in cells:
            if np.all(np.abs(diags[:, i] - diags[:, cell[0]]) <= cfg.cluster_tol * scales):
                cell.append(i)
                break
        else:
            cells.append([i])

    projs = [_symmetrize(Q[:, c] @ Q[:, c].T) for c in cells]
    order = sorted(range(len(cells)), key=lambda k: tuple(-np.round(projs[k].ravel(), 8)))
    cols, partition, start = [], [], 0
    for k in order:
        cols.extend(cells[k])
        partition.append(tuple(range(start, start + len(cells[k]))))
        start += len(cells[k])
    Q = Q[:, cols]
    for j in range(n):
        nz = np.flatnonzero(np.abs(Q[:, j]) > 1e-12)
        if nz.size and Q[nz[0], j] < 0:
            Q[:, j] = -Q[:, j]
    block_projections = tuple(
        Projection(_freeze(projs[k]), float(np.max(np.abs(projs[k] @ projs[k] - projs[k])))) for k in order
    )
    return CommutativeBlock(generators, _freeze(Q), tuple(partition), block_projections, cfg)


def _offdiag(Q, g):
    d = Q.T @ g @ Q
    return float(np.max(np.abs(d - np.diag(np.diag(d)))))


def function_rep(block, a):
    """Value of ``a`` on each joint eigenspace of the block.

    Raises :class:`NotInBlockError` if ``a`` is not diagonal in the block's
    basis or not constant on some cell.
    """
    a = sym(a, block.cfg)
    if a.shape[0] != block.n:
        raise DimensionError(f"dimension mismatch: {a.shape[0]} vs {block.n}")
    d = block.Q.T @ a @ block.Q
    scale = max(1.0, order_unit_norm(a))
    off = float(np.max(np.abs(d - np.diag(np.diag(d))))) if block.n > 1 else 0.0
    diag = np.diag(d)
    spread = max(float(np.ptp(diag[list(cell)])) for cell in block.partition)
    residual = max(off, spread)
    if residual > 1e-8 * scale:
        raise NotInBlockError(f"matrix is not a member of the block (residual {residual:.3e})", residual)
    return _freeze(np.array([float(np.mean(diag[list(cell)])) for cell in block.partition]))


def function_rep_of(block, a):
    return FunctionRep(block.X_size, function_rep(block, a))
