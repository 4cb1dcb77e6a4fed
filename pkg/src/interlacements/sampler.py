"""
Sampling the interlacement process restricted to a finite window.

Trajectories are stored as two killed legs hanging off the entry point: the
backward leg (read in reverse time, conditioned never to return to the window)
and the forward leg (an unconditioned walk). Conditioned walks are exact Doob
transforms of the chain built from the potential module.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import stats

from . import potential as pot
from .graph import GraphError, KilledWeightedGraph

__all__ = [
    "SAMPLER_CONFIG",
    "RunawayError",
    "BudgetError",
    "RngStream",
    "FinitePath",
    "LabeledTrajectory",
    "WindowSample",
    "sample_forward",
    "sample_no_return",
    "no_return_first_step",
    "sample_window",
    "sample_hinge_process",
    "sample_bridge",
    "bridge_acceptance",
    "sample_last_exit_piece",
    "extend_window",
    "restrict_window",
    "sample_levels",
    "occupation_fields",
    "dumps_trajectories",
]

SAMPLER_CONFIG = {
    "step_budget": 10 ** 7,
    "bridge_budget": 10 ** 6,
    "extend_budget": 10 ** 6,
}


class RunawayError(RuntimeError):
    """A walk exceeded the step budget (the graph barely kills)."""


class BudgetError(RuntimeError):
    """A rejection sampler exceeded its attempt budget."""


class RngStream:
    """Splittable counter-based stream (Philox keyed by ``seed`` and ``stream``).

    Uniforms are drawn in blocks; identical ``(seed, stream)`` and call
    sequence give identical output.
    """

    BLOCK = 1 << 14

    def __init__(self, seed: int = 0, stream: int | tuple = 0):
        self.seed = int(seed)
        self.stream = tuple(stream) if isinstance(stream, tuple) else (int(stream),)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        self.generator = np.random.Generator(np.random.Philox(ss))
        self._buf: list[float] = []
        self._i = 0

    def split(self, index: int) -> "RngStream":
        return RngStream(self.seed, self.stream + (int(index),))

    def uniform(self) -> float:
        if self._i >= len(self._buf):
            self._buf = self.generator.random(self.BLOCK).tolist()
            self._i = 0
        u = self._buf[self._i]
        self._i += 1
        return u

    def pick(self, cdf: list[float]) -> int:
        """Index drawn from a cumulative table ending at 1.0."""
        return bisect_right(cdf, self.uniform())

    def poisson(self, lam: float) -> int:
        if lam <= 0:
            return 0
        cdf = _poisson_cdf(float(lam))
        k = bisect_right(cdf, self.uniform())
        if k >= len(cdf):
            # tail beyond 1e-16: fall back to the generator
            return int(self.generator.poisson(lam))
        return k

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream={self.stream})"


@lru_cache(maxsize=256)
def _poisson_cdf(lam: float) -> list[float]:
    k_max = int(stats.poisson.isf(1e-16, lam)) + 2
    return np.cumsum(stats.poisson.pmf(np.arange(k_max + 1), lam)).tolist()


def _cdf(weights) -> list[float]:
    w = np.asarray(weights, dtype=float)
    c = np.cumsum(w / w.sum())
    c[-1] = 1.0
    return c.tolist()


# --------------------------------------------------------------------------
# step tables

_GHOST = -1


@dataclass
class _Table:
    cum: list
    tgt: list
    ok: np.ndarray
    row_mass: np.ndarray


def _ghost_code(graph, y):
    """Ghost targets: -1 - (end index), or a single -1 without ends."""
    if not graph.ends:
        return [(_GHOST, graph.kills[y])]
    out = []
    for i, nm in enumerate(graph.end_names()):
        w = graph.ends[nm][y]
        if w > 0:
            out.append((-1 - i, w))
    return out


def _build_table(graph: KilledWeightedGraph, h: np.ndarray | None) -> _Table:
    """Transition table for weights ``a(y, z) h(z)`` plus the kill weight.

    ``h = None`` gives the plain chain.
    """
    W = graph.conductance
    cum, tgt = [], []
    ok = np.zeros(graph.n, dtype=bool)
    mass = np.zeros(graph.n)
    for y in range(graph.n):
        lo, hi = W.indptr[y], W.indptr[y + 1]
        zs = W.indices[lo:hi]
        ws = W.data[lo:hi].copy()
        if h is not None:
            ws = ws * h[zs]
        pairs = [(int(z), float(w)) for z, w in zip(zs, ws) if w > 0]
        pairs += [(c, float(w)) for c, w in _ghost_code(graph, y) if w > 0]
        total = math.fsum(w for _, w in pairs)
        mass[y] = total
        if total > 0:
            ok[y] = True
            cum.append(_cdf([w for _, w in pairs]))
            tgt.append([z for z, _ in pairs])
        else:
            cum.append([])
            tgt.append([])
    return _Table(cum, tgt, ok, mass)


@lru_cache(maxsize=64)
def _forward_table(graph: KilledWeightedGraph) -> _Table:
    return _build_table(graph, None)


@lru_cache(maxsize=128)
def _no_return_table(graph: KilledWeightedGraph, K: tuple) -> _Table:
    q = pot.avoid_probability(graph, K)
    return _build_table(graph, q)


class _Window:
    """Per-(graph, K) data reused across draws."""

    def __init__(self, graph: KilledWeightedGraph, K: tuple):
        self.graph = graph
        self.Kt = K
        self.K = np.asarray(K, dtype=np.int64)
        self.pos = [-1] * graph.n
        for i, v in enumerate(K):
            self.pos[v] = i
        self.inK = np.zeros(graph.n, dtype=bool)
        self.inK[self.K] = True
        self.prof = pot.equilibrium(graph, K)
        self.cap = self.prof.cap
        b = self.prof.boundary
        self.boundary = b.tolist()
        self.cdf = _cdf(self.prof.e[b]) if b.size else []
        self.forward = _forward_table(graph)
        self.no_return = _no_return_table(graph, K)


@lru_cache(maxsize=128)
def _window_cached(graph: KilledWeightedGraph, K: tuple) -> _Window:
    return _Window(graph, K)


def _window(graph: KilledWeightedGraph, K) -> _Window:
    if isinstance(K, _Window):
        return K
    if isinstance(K, np.ndarray):
        Kt = tuple(np.unique(K).tolist())
    else:
        Kt = tuple(sorted(set(int(k) for k in K)))
    if not Kt:
        raise GraphError("vertex set must be nonempty")
    if Kt[0] < 0 or Kt[-1] >= graph.n:
        raise GraphError("vertex id out of range")
    return _window_cached(graph, Kt)


# --------------------------------------------------------------------------
# paths


@dataclass(frozen=True)
class FinitePath:
    """Vertices visited in order; ``terminal`` is ``"killed"`` or ``"truncated"``.

    ``end`` names the escape direction of a killed path when the graph has
    labeled ends.
    """

    vertices: tuple
    terminal: str = "killed"
    end: str | None = None

    def __len__(self):
        return len(self.vertices)


def _walk(graph, table: _Table, x: int, rng: RngStream, budget: int):
    if not table.ok[x]:
        raise GraphError(f"conditioned walk undefined at vertex {x}")
    cum, tgt = table.cum, table.tgt
    uniform = rng.uniform
    path = [x]
    y = x
    while True:
        row = cum[y]
        z = tgt[y][bisect_right(row, uniform())]
        if z < 0:
            end = graph.end_names()[-1 - z] if graph.ends else None
            return path, end
        path.append(z)
        y = z
        if len(path) > budget:
            raise RunawayError(f"walk from {x} exceeded {budget} steps")


def sample_forward(graph: KilledWeightedGraph, x: int, rng: RngStream) -> FinitePath:
    """Walk from ``x`` until killed; the ghost itself is not recorded."""
    path, end = _walk(graph, _forward_table(graph), int(x), rng, SAMPLER_CONFIG["step_budget"])
    return FinitePath(tuple(path), "killed", end)


def sample_no_return(graph: KilledWeightedGraph, K, x: int, rng: RngStream) -> FinitePath:
    """Walk from ``x`` in ``K`` conditioned never to come back to ``K``.

    Step weights are ``a(y, z) q(z)`` and ``kappa(y)`` with
    ``q(z) = P_z[absorbed before tau_K]`` (zero on ``K``).
    """
    table = _window(graph, K).no_return
    path, end = _walk(graph, table, int(x), rng, SAMPLER_CONFIG["step_budget"])
    return FinitePath(tuple(path), "killed", end)


def no_return_first_step(graph: KilledWeightedGraph, K, x: int) -> dict:
    """Exact one-step law of the conditioned walk from ``x``; ghost keyed as ``"ghost"``."""
    table = _window(graph, K).no_return
    if not table.ok[x]:
        raise GraphError(f"vertex {x} has zero escape probability")
    cum = [0.0] + table.cum[x]
    out = {}
    for z, lo, hi in zip(table.tgt[x], cum, cum[1:]):
        key = pot.GHOST if z < 0 else z
        out[key] = out.get(key, 0.0) + (hi - lo)
    return out


# --------------------------------------------------------------------------
# trajectories and windows


@dataclass(frozen=True)
class LabeledTrajectory:
    """A trajectory anchored at its entry point into the window.

    ``backward`` starts at the entry point and runs backward in time;
    ``forward`` starts at the entry point and runs forward.
    """

    backward: tuple
    forward: tuple
    backward_end: str | None = None
    forward_end: str | None = None
    mark: float | None = None

    @property
    def entry(self) -> int:
        return self.forward[0]

    def timeline(self) -> list:
        """Vertices in time order, entry at index ``len(backward) - 1``."""
        return list(self.backward[::-1]) + list(self.forward[1:])

    def reanchor(self, inS: np.ndarray) -> "LabeledTrajectory | None":
        """Re-index at the first visit to the set flagged by ``inS``; None if it never visits."""
        seq = self.timeline()
        for i, v in enumerate(seq):
            if inS[v]:
                return LabeledTrajectory(tuple(seq[i::-1]), tuple(seq[i:]),
                                         self.backward_end, self.forward_end, self.mark)
        return None

    def hinge_couple(self, inS: np.ndarray) -> tuple | None:
        seq = self.timeline()
        hits = [v for v in seq if inS[v]]
        return (hits[0], hits[-1]) if hits else None


@dataclass(frozen=True)
class WindowSample:
    """Trajectories of one draw hitting ``K`` plus occupation fields on ``K``.

    Fields are aligned with the sorted array ``K``: ``indicator`` (visited at
    all), ``traj_count`` (distinct trajectories visiting) and ``visit_count``
    (total visits, the entry counted once).
    """

    K: np.ndarray
    trajectories: tuple
    indicator: np.ndarray = field(repr=False)
    traj_count: np.ndarray = field(repr=False)
    visit_count: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.trajectories)

    @property
    def empty(self) -> bool:
        return not self.trajectories


def occupation_fields(K: np.ndarray, trajectories, n: int):
    """``(indicator, traj_count, visit_count)`` on ``K`` for the given trajectories."""
    pos = [-1] * n
    for i, v in enumerate(np.asarray(K).tolist()):
        pos[v] = i
    return _fields(pos, len(K), trajectories)


def _fields(pos, k, trajectories):
    traj = [0] * k
    visits = [0] * k
    for t in trajectories:
        seen = set()
        for seq in (t.backward[1:], t.forward):
            for v in seq:
                p = pos[v]
                if p >= 0:
                    visits[p] += 1
                    seen.add(p)
        for p in seen:
            traj[p] += 1
    tc = np.array(traj, dtype=np.int64)
    return (tc > 0).astype(np.int8), tc, np.array(visits, dtype=np.int64)


def _make_window(win: _Window, trajectories) -> WindowSample:
    ind, tc, vc = _fields(win.pos, len(win.Kt), trajectories)
    return WindowSample(win.K, tuple(trajectories), ind, tc, vc)


def _draw_trajectory(win: _Window, rng, mark=None) -> LabeledTrajectory:
    g = win.graph
    x = win.boundary[rng.pick(win.cdf)]
    budget = SAMPLER_CONFIG["step_budget"]
    back, bend = _walk(g, win.no_return, x, rng, budget)
    fwd, fend = _walk(g, win.forward, x, rng, budget)
    return LabeledTrajectory(tuple(back), tuple(fwd), bend, fend, mark)


def sample_window(graph: KilledWeightedGraph, K, rng: RngStream, u: float = 1.0) -> WindowSample:
    """Poisson(``u cap K``) trajectories, entry points i.i.d. from ``harm_K``."""
    win = _window(graph, K)
    if not win.cap > 0:
        raise GraphError("window has zero capacity")
    count = rng.poisson(u * win.cap)
    return _make_window(win, [_draw_trajectory(win, rng) for _ in range(count)])


@lru_cache(maxsize=64)
def _hinge_data(graph, K: tuple):
    H = pot.hinge(graph, K)
    d = H.couples()
    return H, list(d.keys), _cdf(d.mass)


def sample_hinge_process(graph: KilledWeightedGraph, K, rng: RngStream) -> list[tuple]:
    """Poisson process of couples with intensity ``h_K``."""
    H, keys, cdf = _hinge_data(graph, _window(graph, K).Kt)
    count = rng.poisson(H.cap)
    return [keys[rng.pick(cdf)] for _ in range(count)]


def sample_last_exit_piece(graph: KilledWeightedGraph, K, x: int, rng: RngStream) -> FinitePath | None:
    """Forward walk from ``x`` cut at its last visit to ``K`` (None if it misses ``K``)."""
    inK = _window(graph, K).inK
    path = sample_forward(graph, x, rng).vertices
    last = -1
    for i, v in enumerate(path):
        if inK[v]:
            last = i
    if last < 0:
        return None
    return FinitePath(path[:last + 1], "truncated")


def bridge_acceptance(graph: KilledWeightedGraph, K, x: int, y: int) -> float:
    """Acceptance probability ``P_x[X_{lambda_K} = y]`` of :func:`sample_bridge`."""
    win = _window(graph, K)
    if win.pos[y] < 0:
        raise GraphError("y must belong to K")
    return float(_last_exit_cached(graph, win.Kt)[x, win.pos[y]])


@lru_cache(maxsize=64)
def _last_exit_cached(graph, K: tuple) -> np.ndarray:
    return pot.last_exit_matrix(graph, K)


def sample_bridge(graph: KilledWeightedGraph, K, x: int, y: int, rng: RngStream,
                  budget: int | None = None) -> FinitePath:
    """Path from ``x`` to its last ``K``-visit, conditioned to end at ``y`` (rejection)."""
    budget = SAMPLER_CONFIG["bridge_budget"] if budget is None else budget
    if not bridge_acceptance(graph, K, x, y) > 0:
        raise GraphError(f"no path from {x} ends its last visit at {y}")
    for _ in range(budget):
        piece = sample_last_exit_piece(graph, K, x, rng)
        if piece is not None and piece.vertices[-1] == y:
            return piece
    raise BudgetError(f"bridge {x}->{y}: no acceptance in {budget} attempts")


def restrict_window(graph: KilledWeightedGraph, sample: WindowSample, K) -> WindowSample:
    """Keep trajectories of ``sample`` hitting ``K``, re-anchored at their first ``K``-visit."""
    win = _window(graph, K)
    trajs = [t2 for t in sample.trajectories if (t2 := t.reanchor(win.inK)) is not None]
    return _make_window(win, trajs)


def extend_window(graph: KilledWeightedGraph, K, L, sample: WindowSample, rng: RngStream,
                  budget: int | None = None) -> WindowSample:
    """Grow a window sample on ``K`` into one on ``L`` (``K`` inside ``L``).

    Legs are stored in full, so each existing trajectory is simply re-anchored
    at its first visit to ``L``. Trajectories hitting ``L`` but not ``K`` are
    added: Poisson(``cap L - cap K``) of them, each drawn from ``harm_L`` with
    its forward leg, accepted when the entry lies outside ``K`` and the forward
    leg avoids ``K`` (probability ``P_x[tau_K = inf]``).
    """
    budget = SAMPLER_CONFIG["extend_budget"] if budget is None else budget
    wK = _window(graph, K)
    wL = _window(graph, L)
    if not all(wL.inK[v] for v in wK.Kt):
        raise GraphError("K must be a subset of L")
    if not np.array_equal(sample.K, wK.K):
        raise GraphError("sample was not drawn on K")
    inK = wK.inK
    trajs = [t.reanchor(wL.inK) for t in sample.trajectories]
    extra = rng.poisson(max(wL.cap - wK.cap, 0.0))
    steps = SAMPLER_CONFIG["step_budget"]
    for _ in range(extra):
        for _attempt in range(budget):
            x = wL.boundary[rng.pick(wL.cdf)]
            if inK[x]:
                continue
            fwd, fend = _walk(graph, wL.forward, x, rng, steps)
            if any(inK[v] for v in fwd):
                continue
            back, bend = _walk(graph, wL.no_return, x, rng, steps)
            trajs.append(LabeledTrajectory(tuple(back), tuple(fwd), bend, fend))
            break
        else:
            raise BudgetError(f"no trajectory avoiding K accepted in {budget} attempts")
    return _make_window(wL, trajs)


def sample_levels(graph: KilledWeightedGraph, K, levels, rng: RngStream) -> dict:
    """Monotone coupling of windows at several intensity levels.

    One marked process is drawn at the top level; the sample at level ``u``
    keeps the trajectories with mark at most ``u``.
    """
    levels = [float(u) for u in levels]
    if any(u < 0 for u in levels) or levels != sorted(levels):
        raise ValueError("levels must be sorted and nonnegative")
    win = _window(graph, K)
    top = levels[-1] if levels else 0.0
    count = rng.poisson(top * win.cap)
    trajs = []
    for _ in range(count):
        mark = top * rng.uniform()
        trajs.append(_draw_trajectory(win, rng, mark))
    return {u: _make_window(win, [t for t in trajs if t.mark <= u]) for u in levels}


def dumps_trajectories(sample: WindowSample) -> str:
    """One line per trajectory: ``mark entry | backward | forward``."""
    lines = []
    for t in sample.trajectories:
        mark = "-" if t.mark is None else f"{t.mark:.17g}"
        lines.append(f"{mark} {t.entry} | {' '.join(map(str, t.backward))} | {' '.join(map(str, t.forward))}")
    return "\n".join(lines) + ("\n" if lines else "")
