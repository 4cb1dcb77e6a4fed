"""
Exact discrete potential theory on killed weighted graphs.

Everything reduces to solves with the symmetric positive definite operator
``M = D - W`` (``D = diag(a)``, ``W`` the conductances including self-loops)
or its principal submatrices. In particular the Green function is
``g(x, y) = (M^{-1})[x, y] * a(y)`` and, for ``U = V \\ K``,

    P_x[tau_K < inf]        solves  M_UU h = W_UK 1
    P_x[absorbed before K]  solves  M_UU q = kappa_U.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .coupling import DiscreteDistribution
from .graph import GraphError, KilledWeightedGraph, vertex_set

__all__ = [
    "SOLVER_CONFIG",
    "EquilibriumProfile",
    "HingeMeasure",
    "FlowError",
    "GHOST",
    "escape_probability",
    "avoid_probability",
    "equilibrium",
    "capacity",
    "hitting",
    "greens",
    "green_columns",
    "last_exit_matrix",
    "last_exit_distribution",
    "hinge",
    "consistency_pushforward",
    "conditional_hit_given_last_exit",
    "end_probability",
    "restricted_equilibrium",
    "flow_energy",
    "harmonic_flow",
    "write_measure_csv",
    "write_matrix_csv",
]

SOLVER_CONFIG = {
    "dense_limit": 4000,
    "boundary_threshold": 1e-14,
}

GHOST = "ghost"


def _as_set(graph, K) -> np.ndarray:
    K = vertex_set(graph, K)
    if K.size == 0:
        raise GraphError("vertex set must be nonempty")
    return K


def _complement(graph, K) -> np.ndarray:
    mask = np.ones(graph.n, dtype=bool)
    mask[K] = False
    return np.flatnonzero(mask)


def _solve(M: sp.spmatrix, rhs: np.ndarray) -> np.ndarray:
    """Solve ``M x = rhs`` for SPD ``M``: dense Cholesky or sparse LU by size."""
    if M.shape[0] == 0:
        return np.zeros_like(rhs, dtype=float)
    if M.shape[0] <= SOLVER_CONFIG["dense_limit"]:
        c = sla.cho_factor(M.toarray(), lower=True, check_finite=False)
        return sla.cho_solve(c, rhs, check_finite=False)
    lu = spla.splu(sp.csc_matrix(M))
    rhs = np.asarray(rhs, dtype=float)
    return lu.solve(rhs)


def _sub(M: sp.csr_matrix, rows, cols) -> sp.csr_matrix:
    return M[rows][:, cols]


def avoid_probability(graph: KilledWeightedGraph, K: Iterable[int]) -> np.ndarray:
    """``q(z) = P_z[absorbed by the ghost before tau_K]``; zero on ``K``."""
    K = _as_set(graph, K)
    U = _complement(graph, K)
    q = np.zeros(graph.n)
    if U.size:
        q[U] = _solve(_sub(graph.operator, U, U), graph.kills[U])
    return q


def _escape_from_q(graph, K, q) -> np.ndarray:
    U = _complement(graph, K)
    W = graph.conductance
    out = graph.kills[K] + np.asarray(_sub(W, K, U) @ q[U]).ravel()
    return out / graph.total_weight[K]


def escape_probability(graph: KilledWeightedGraph, K: Iterable[int]) -> np.ndarray:
    """``P_x[tau_K^+ = inf]`` for each ``x`` of the sorted vertex set ``K``.

    The chain may leave ``K`` by killing at the first step or by stepping
    outside and then being absorbed before coming back.
    """
    K = _as_set(graph, K)
    return _escape_from_q(graph, K, avoid_probability(graph, K))


@dataclass(frozen=True)
class EquilibriumProfile:
    """Equilibrium measure, capacity and harmonic measure of ``K``.

    ``e`` and ``harm`` are indexed by all vertices of the graph; ``escape`` is
    aligned with ``K``.
    """

    K: np.ndarray
    escape: np.ndarray
    e: np.ndarray
    cap: float
    harm: np.ndarray
    boundary: np.ndarray

    def harm_distribution(self) -> DiscreteDistribution:
        b = self.boundary
        return DiscreteDistribution.from_weights(b.tolist(), self.e[b])


def equilibrium(graph: KilledWeightedGraph, K: Iterable[int]) -> EquilibriumProfile:
    K = _as_set(graph, K)
    esc = escape_probability(graph, K)
    esc = np.where(esc > SOLVER_CONFIG["boundary_threshold"], esc, 0.0)
    e = np.zeros(graph.n)
    e[K] = graph.total_weight[K] * esc
    cap = math.fsum(e[K])
    harm = e / cap if cap > 0 else np.zeros(graph.n)
    return EquilibriumProfile(K, esc, e, cap, harm, K[esc > 0])


def capacity(graph: KilledWeightedGraph, K: Iterable[int]) -> float:
    return equilibrium(graph, K).cap


def hitting(graph: KilledWeightedGraph, K: Iterable[int]) -> tuple[np.ndarray, np.ndarray]:
    """Hitting probabilities and entry laws for ``K``.

    Returns
    -------
    prob : ndarray, shape (n,)
        ``P_x[tau_K < inf]``.
    entry : ndarray, shape (n, |K|)
        ``entry[x, j] = P_x[X_{tau_K} = K[j], tau_K < inf]``; rows sum to ``prob``.
    """
    K = _as_set(graph, K)
    U = _complement(graph, K)
    entry = np.zeros((graph.n, K.size))
    entry[K, np.arange(K.size)] = 1.0
    if U.size:
        rhs = _sub(graph.conductance, U, K).toarray()
        entry[U] = _solve(_sub(graph.operator, U, U), rhs)
    return entry.sum(axis=1), entry


def green_columns(graph: KilledWeightedGraph, cols: Iterable[int]) -> np.ndarray:
    """Columns ``g(., y)`` of the Green function for ``y`` in ``cols`` (shape (n, len(cols)))."""
    cols = np.asarray(list(cols), dtype=np.int64)
    rhs = np.zeros((graph.n, cols.size))
    rhs[cols, np.arange(cols.size)] = 1.0
    Minv = _solve(graph.operator, rhs)
    return Minv * graph.total_weight[cols][None, :]


def greens(graph: KilledWeightedGraph) -> np.ndarray:
    """Full Green matrix, expected visits to ``y`` from ``x`` before absorption."""
    return green_columns(graph, range(graph.n))


def last_exit_matrix(graph: KilledWeightedGraph, L: Iterable[int]) -> np.ndarray:
    """``P_x[X_{lambda_L} = L[j]]`` for every vertex ``x`` (shape (n, |L|)).

    Uses the last-exit decomposition ``g(x, y) * P_y[tau_L^+ = inf]``.
    """
    L = _as_set(graph, L)
    prof = equilibrium(graph, L)
    return green_columns(graph, L) * prof.escape[None, :]


def last_exit_distribution(graph: KilledWeightedGraph, L: Iterable[int], x: int,
                           normalize: bool = False) -> DiscreteDistribution:
    """Law of the last position in ``L`` for the chain started at ``x``.

    The total mass is ``P_x[tau_L < inf]``; pass ``normalize=True`` to condition
    on hitting ``L``.
    """
    L = _as_set(graph, L)
    row = last_exit_matrix(graph, L)[int(x)]
    if not row.sum() > 0:
        raise GraphError(f"vertex {x} cannot reach L")
    if normalize:
        return DiscreteDistribution.from_weights(L.tolist(), row)
    return DiscreteDistribution(L.tolist(), row, kind="measure")


@dataclass(frozen=True)
class HingeMeasure:
    """``h[i, j] = e_K(K[i]) * P_{K[i]}[X_{lambda_K} = K[j]]`` on ``K x K``."""

    K: np.ndarray
    h: np.ndarray
    e: np.ndarray
    cap: float

    def asymmetry(self) -> float:
        return float(np.max(np.abs(self.h - self.h.T))) if self.h.size else 0.0

    def couples(self) -> DiscreteDistribution:
        """Normalized law ``h / cap`` over ordered couples of vertex ids."""
        i, j = np.nonzero(self.h)
        keys = [(int(self.K[a]), int(self.K[b])) for a, b in zip(i, j)]
        return DiscreteDistribution.from_weights(keys, self.h[i, j])


def hinge(graph: KilledWeightedGraph, K: Iterable[int]) -> HingeMeasure:
    """Hinge measure of ``K``; symmetry is left to the caller to verify."""
    K = _as_set(graph, K)
    prof = equilibrium(graph, K)
    le = last_exit_matrix(graph, K)[K]
    h = prof.e[K][:, None] * le
    return HingeMeasure(K, h, prof.e[K], prof.cap)


def consistency_pushforward(graph: KilledWeightedGraph, K: Iterable[int], L: Iterable[int]) -> np.ndarray:
    """``sum_{x in L} e_L(x) P_x[X_{tau_K} = ., tau_K < inf]`` as a length-n measure."""
    K = _as_set(graph, K)
    L = _as_set(graph, L)
    if not np.all(np.isin(K, L)):
        raise GraphError("K must be a subset of L")
    eL = equilibrium(graph, L).e
    _, entry = hitting(graph, K)
    out = np.zeros(graph.n)
    out[K] = eL[L] @ entry[L]
    return out


def conditional_hit_given_last_exit(graph: KilledWeightedGraph, L: Iterable[int],
                                    x: int, x_start: int, y_last: int) -> float:
    """``P_{x_start}[tau_x < inf | X_{lambda_L} = y_last]`` for ``x`` in ``L``.

    Hitting ``x`` forces the last visit to ``L`` to come later, so the joint
    probability factors as ``P_{x_start}[tau_x < inf] P_x[X_{lambda_L} = y_last]``.
    """
    L = _as_set(graph, L)
    if x not in set(L.tolist()):
        raise GraphError("x must belong to L")
    j = int(np.searchsorted(L, y_last))
    if j >= L.size or L[j] != y_last:
        raise GraphError("y_last must belong to L")
    le = last_exit_matrix(graph, L)
    denom = le[x_start, j]
    if not denom > 0:
        raise ZeroDivisionError(f"P_{x_start}[X_lambda_L = {y_last}] is zero")
    gx = green_columns(graph, [x])[:, 0]
    hit = gx[x_start] / gx[x]
    return float(hit * le[x, j] / denom)


# --------------------------------------------------------------------------
# direction atoms


def _require_ends(graph, names):
    if not graph.ends:
        raise GraphError("graph has no labeled ends")
    for nm in names:
        if nm not in graph.ends:
            raise GraphError(f"unknown end {nm!r}; have {graph.end_names()}")


def end_probability(graph: KilledWeightedGraph, end: str) -> np.ndarray:
    """``P_x[absorbed through end]`` for all ``x``."""
    _require_ends(graph, [end])
    return _solve(graph.operator, graph.ends[end])


def restricted_equilibrium(graph: KilledWeightedGraph, K: Iterable[int],
                           A: str, B: str) -> tuple[np.ndarray, float]:
    """``e_{K,A->B}(x) = a_x P_x[A, tau_K^+ = inf] P_x[B]`` and its total mass.

    ``A`` and ``B`` name escape ends of the graph; ``P_x[A, tau_K^+ = inf]``
    comes from the solve for absorption through ``A`` before returning to ``K``.
    """
    K = _as_set(graph, K)
    _require_ends(graph, [A, B])
    U = _complement(graph, K)
    qA = np.zeros(graph.n)
    if U.size:
        qA[U] = _solve(_sub(graph.operator, U, U), graph.ends[A][U])
    W = graph.conductance
    escA = (graph.ends[A][K] + np.asarray(_sub(W, K, U) @ qA[U]).ravel())
    pB = end_probability(graph, B)
    e = np.zeros(graph.n)
    e[K] = escA * pB[K]
    return e, math.fsum(e[K])


# --------------------------------------------------------------------------
# flows


class FlowError(ValueError):
    """A flow violates one of the unit-flow constraints."""


def _flow_edges(graph, flow):
    """Normalize a flow dict into {(u, v): theta} over ordered pairs, ghost included."""
    full: dict = {}
    for (u, v), t in flow.items():
        if u == v:
            raise FlowError(f"self-loop ({u},{v}) cannot carry flow")
        for a, b in ((u, v), (v, u)):
            if a != GHOST and b != GHOST and not graph.has_edge(a, b):
                raise FlowError(f"({u},{v}) is not an edge")
            if GHOST in (a, b):
                z = b if a == GHOST else a
                if graph.kills[z] <= 0:
                    raise FlowError(f"vertex {z} has no ghost edge")
        t = float(t)
        if (v, u) in full and abs(full[(v, u)] + t) > 1e-12:
            raise FlowError(f"flow not antisymmetric on ({u},{v})")
        full[(u, v)] = t
        full[(v, u)] = -t
    return full


def _edge_conductance(graph, u, v) -> float:
    if u == GHOST:
        return float(graph.kills[v])
    if v == GHOST:
        return float(graph.kills[u])
    return graph.weight(u, v)


def flow_energy(graph: KilledWeightedGraph, K: Iterable[int], flow: dict, tol: float = 1e-10) -> float:
    """Energy ``sum over ordered pairs theta(x, y)^2 / a(x, y)`` of a unit flow.

    ``flow`` maps directed edges ``(u, v)`` to values; ``GHOST`` denotes the
    absorbing state and reverse entries are implied by antisymmetry. The flow
    must vanish on edges inside ``K``, be divergence free off ``K`` and carry a
    total of one unit out of ``K``.
    """
    K = _as_set(graph, K)
    inK = np.zeros(graph.n, dtype=bool)
    inK[K] = True
    full = _flow_edges(graph, flow)
    div = np.zeros(graph.n)
    for (u, v), t in full.items():
        if u != GHOST:
            div[u] += t
        if u != GHOST and v != GHOST and inK[u] and inK[v] and abs(t) > tol:
            raise FlowError(f"flow {t} on internal edge ({u},{v}) of K")
    bad = np.flatnonzero(~inK & (np.abs(div) > tol))
    if bad.size:
        raise FlowError(f"flow not divergence free at {bad.tolist()} (divergence {div[bad].tolist()})")
    out = math.fsum(div[K])
    if abs(out - 1.0) > tol:
        raise FlowError(f"flow out of K is {out}, expected 1")
    return math.fsum(t * t / _edge_conductance(graph, u, v) for (u, v), t in full.items())


def harmonic_flow(graph: KilledWeightedGraph, K: Iterable[int]) -> dict:
    """Unit current flow from ``K`` to the ghost, built from the voltage ``P_x[tau_K < inf]``."""
    K = _as_set(graph, K)
    volt, _ = hitting(graph, K)
    cap = equilibrium(graph, K).cap
    flow = {}
    for (u, v), w in zip(graph.edges.tolist(), graph.weights.tolist()):
        t = w * (volt[u] - volt[v]) / cap
        if t != 0.0:
            flow[(u, v)] = t
    for z in np.flatnonzero(graph.kills):
        flow[(int(z), GHOST)] = graph.kills[z] * volt[z] / cap
    return flow


# --------------------------------------------------------------------------
# export


def write_measure_csv(path, values, keys=None) -> None:
    keys = range(len(values)) if keys is None else keys
    with open(path, "w") as fh:
        fh.write("x,value\n")
        for k, v in zip(keys, values):
            fh.write(f"{k},{float(v):.17g}\n")


def write_matrix_csv(path, matrix, row_keys, col_keys=None) -> None:
    col_keys = row_keys if col_keys is None else col_keys
    with open(path, "w") as fh:
        fh.write("x,y,value\n")
        for i, rk in enumerate(row_keys):
            for j, ck in enumerate(col_keys):
                fh.write(f"{rk},{ck},{float(matrix[i, j]):.17g}\n")
