"""
Finite weighted graphs with killing.

A transient reversible chain on an infinite graph is represented by a finite
graph whose vertices may leak mass to an implicit absorbing *ghost* state.
Transition probabilities are ``p(x, y) = a(x, y) / a(x)`` and the kill
probability is ``kappa(x) / a(x)`` with

    a(x) = sum_z a(x, z) + a(x, x) + kappa(x).

Generators for the biased line and for regular trees collapse the exterior of
the truncation exactly: the outward conductance at a boundary vertex is split
into a kill part and a self-loop part using the closed-form return probability
of an excursion into the discarded region. Every hitting probability and Green
function value inside the truncation then coincides with the infinite model.
The lattice box uses an absorbing halo and is only an approximation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

__all__ = [
    "GraphError",
    "KilledWeightedGraph",
    "ExhaustionLevel",
    "ExhaustionFamily",
    "build_graph",
    "make_biased_z",
    "make_regular_tree",
    "make_lattice_box",
    "make_exhaustion",
    "vertex_set",
    "read_graph",
    "write_graph",
    "dumps_graph",
    "loads_graph",
]


class GraphError(ValueError):
    """Raised for invalid graph data or generator parameters."""


@dataclass(frozen=True, eq=False)
class KilledWeightedGraph:
    """Immutable finite weighted graph with per-vertex killing.

    Attributes
    ----------
    n : int
        Number of vertices, ids ``0 .. n-1``.
    edges : ndarray, shape (m, 2)
        Undirected edges, each stored once with ``u < v``.
    weights : ndarray, shape (m,)
        Positive conductances of ``edges``.
    kills : ndarray, shape (n,)
        Conductance from each vertex to the ghost.
    loops : ndarray, shape (n,)
        Self-loop conductances (only emitted by exterior collapse).
    labels : tuple, optional
        Coordinates of each vertex in the underlying infinite model.
    ends : dict, optional
        Split of ``kills`` into named escape directions, e.g. ``{"-": ..., "+": ...}``
        for the biased line. Values are arrays summing to ``kills``.
    """

    n: int
    edges: np.ndarray
    weights: np.ndarray
    kills: np.ndarray
    loops: np.ndarray
    labels: tuple | None = None
    ends: dict | None = None
    name: str = "graph"
    meta: dict = field(default_factory=dict)

    @cached_property
    def conductance(self) -> sp.csr_matrix:
        """Symmetric conductance matrix, self-loops on the diagonal."""
        u, v = self.edges[:, 0], self.edges[:, 1]
        rows = np.concatenate([u, v, np.arange(self.n)])
        cols = np.concatenate([v, u, np.arange(self.n)])
        vals = np.concatenate([self.weights, self.weights, self.loops])
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.n, self.n))

    @cached_property
    def total_weight(self) -> np.ndarray:
        """``a(x)`` for every vertex, ghost and self-loop included."""
        return np.asarray(self.conductance.sum(axis=1)).ravel() + self.kills

    @cached_property
    def transition(self) -> sp.csr_matrix:
        """Substochastic transition matrix on the vertices (ghost omitted)."""
        inv = sp.diags(1.0 / self.total_weight)
        return (inv @ self.conductance).tocsr()

    @cached_property
    def kill_probability(self) -> np.ndarray:
        return self.kills / self.total_weight

    @cached_property
    def operator(self) -> sp.csr_matrix:
        """``M = D - W``, symmetric positive definite; ``G = M^{-1} D``."""
        return (sp.diags(self.total_weight) - self.conductance).tocsr()

    @cached_property
    def neighbors(self) -> list[np.ndarray]:
        c = self.conductance
        return [c.indices[c.indptr[i]:c.indptr[i + 1]] for i in range(self.n)]

    @cached_property
    def _label_index(self) -> dict:
        if self.labels is None:
            return {i: i for i in range(self.n)}
        return {lab: i for i, lab in enumerate(self.labels)}

    def index(self, label: Hashable) -> int:
        """Vertex id of a model coordinate (identity when unlabeled)."""
        try:
            return self._label_index[label]
        except KeyError:
            raise GraphError(f"no vertex labeled {label!r}") from None

    def label(self, x: int) -> Hashable:
        return x if self.labels is None else self.labels[x]

    def weight(self, x: int, y: int) -> float:
        return float(self.conductance[x, y])

    def has_edge(self, x: int, y: int) -> bool:
        return x != y and self.conductance[x, y] > 0

    def end_names(self) -> list[str]:
        return sorted(self.ends) if self.ends else []

    def __repr__(self) -> str:
        return f"KilledWeightedGraph(name={self.name!r}, n={self.n}, m={len(self.weights)})"


def _validate(g: KilledWeightedGraph) -> None:
    if g.n < 1:
        raise GraphError("graph needs at least one vertex")
    if np.any(g.weights <= 0) or not np.all(np.isfinite(g.weights)):
        raise GraphError("edge weights must be positive and finite")
    if np.any(g.kills < 0) or np.any(g.loops < 0):
        raise GraphError("kill and self-loop weights must be nonnegative")
    if not np.any(g.kills > 0):
        raise GraphError("at least one kill weight must be positive (transience)")
    if len(g.edges):
        if g.edges.min() < 0 or g.edges.max() >= g.n:
            raise GraphError("edge endpoint out of range")
    ncomp, _ = connected_components(g.conductance, directed=False)
    if ncomp != 1:
        raise GraphError(f"graph is disconnected ({ncomp} components)")
    if not np.all(g.total_weight > 0) or not np.all(np.isfinite(g.total_weight)):
        raise GraphError("total vertex weights must be finite and positive")
    if g.ends is not None:
        tot = sum(np.asarray(v, dtype=float) for v in g.ends.values())
        if not np.allclose(tot, g.kills, rtol=1e-12, atol=0):
            raise GraphError("end weights must sum to the kill weights")


def build_graph(
    edges: Iterable[tuple[int, int, float]],
    kills: dict[int, float] | Sequence[float],
    loops: dict[int, float] | None = None,
    n: int | None = None,
    labels: Sequence[Hashable] | None = None,
    ends: dict[str, dict[int, float]] | None = None,
    name: str = "graph",
) -> KilledWeightedGraph:
    """Validate raw data and build a :class:`KilledWeightedGraph`.

    ``kills`` may be a mapping (missing vertices get 0) or a dense sequence.
    The vertex count defaults to one plus the largest id mentioned anywhere.
    """
    seen: dict[tuple[int, int], float] = {}
    for u, v, w in edges:
        u, v, w = int(u), int(v), float(w)
        if u == v:
            raise GraphError(f"self-loop ({u},{u}) in edge list; use loops=")
        if w <= 0:
            raise GraphError(f"nonpositive weight {w} on edge ({u},{v})")
        key = (min(u, v), max(u, v))
        if key in seen:
            if seen[key] != w:
                raise GraphError(f"asymmetric duplicate weights on edge {key}: {seen[key]} vs {w}")
            raise GraphError(f"duplicate edge {key}")
        seen[key] = w

    kill_map = dict(kills) if isinstance(kills, dict) else dict(enumerate(kills))
    loop_map = dict(loops or {})
    ids = [i for e in seen for i in e] + list(kill_map) + list(loop_map)
    if n is None:
        n = (max(ids) + 1) if ids else 0
    if ids and (min(ids) < 0 or max(ids) >= n):
        raise GraphError("vertex id out of range")

    kill_arr = np.zeros(n)
    for x, k in kill_map.items():
        kill_arr[x] = float(k)
    loop_arr = np.zeros(n)
    for x, w in loop_map.items():
        loop_arr[x] = float(w)
    keys = sorted(seen)
    edge_arr = np.array(keys, dtype=np.int64).reshape(-1, 2)
    w_arr = np.array([seen[k] for k in keys], dtype=float)

    end_arrs = None
    if ends:
        end_arrs = {}
        for nm, mp in ends.items():
            arr = np.zeros(n)
            for x, k in mp.items():
                arr[x] = float(k)
            end_arrs[nm] = arr

    g = KilledWeightedGraph(
        n=n, edges=edge_arr, weights=w_arr, kills=kill_arr, loops=loop_arr,
        labels=tuple(labels) if labels is not None else None, ends=end_arrs, name=name,
    )
    _validate(g)
    return g


def vertex_set(graph: KilledWeightedGraph, K: Iterable[int]) -> np.ndarray:
    """Sorted unique vertex ids, validated against ``graph``."""
    arr = np.unique(np.fromiter((int(k) for k in K), dtype=np.int64))
    if arr.size and (arr[0] < 0 or arr[-1] >= graph.n):
        raise GraphError("vertex id out of range")
    return arr


# --------------------------------------------------------------------------
# generators

BIASED_Z_RETURN = 0.5


def make_biased_z(radius: int) -> tuple[KilledWeightedGraph, float]:
    """Biased line with ``a(n, n+1) = a(-n-1, -n) = 2**n``, truncated at ``radius``.

    Away from the origin the chain drifts outward with probability 2/3. At
    ``+-radius`` the outward conductance ``2**radius`` is replaced by a kill of
    weight ``2**radius * (1 - r)`` and a self-loop of weight ``2**radius * r``,
    where ``r = (1/3)/(2/3) = 1/2`` is the probability that the drift-2/3 walk
    started one step outside ever comes back. Kills are tagged with the end
    they escape through (``"-"`` or ``"+"``).

    Returns
    -------
    graph : KilledWeightedGraph
        Vertices labeled ``-radius .. radius``.
    r : float
        The exterior return probability (always 1/2).
    """
    if int(radius) != radius or radius < 1:
        raise GraphError("radius must be an integer >= 1")
    N = int(radius)
    r = BIASED_Z_RETURN
    off = N
    edges = []
    for k in range(N):
        w = 2.0 ** k
        edges.append((k + off, k + 1 + off, w))
        edges.append((-k - 1 + off, -k + off, w))
    out = 2.0 ** N
    kills = {0: out * (1 - r), 2 * N: out * (1 - r)}
    loops = {0: out * r, 2 * N: out * r}
    ends = {"-": {0: out * (1 - r)}, "+": {2 * N: out * (1 - r)}}
    g = build_graph(edges, kills, loops=loops, n=2 * N + 1,
                    labels=range(-N, N + 1), ends=ends, name=f"biased_z(radius={N})")
    g.meta.update(family="biased_z", radius=N, exterior_return=r)
    return g, r


def make_regular_tree(branching: int, depth: int) -> KilledWeightedGraph:
    """Rooted ``branching``-ary tree with unit conductances, leaves collapsed.

    Each leaf has ``b`` discarded children. The depth process below a leaf is a
    walk moving away with probability ``b/(b+1)``, so an excursion returns with
    probability ``r = 1/b``; the leaf gets kill weight ``b (1 - r)`` and
    self-loop weight ``b r``. Vertices are labeled by their child-index path
    from the root, the root being ``()``.
    """
    if int(branching) != branching or branching < 2:
        raise GraphError("branching must be an integer >= 2")
    if int(depth) != depth or depth < 1:
        raise GraphError("depth must be an integer >= 1")
    b, D = int(branching), int(depth)
    labels: list[tuple] = [()]
    edges = []
    frontier = [0]
    for _ in range(D):
        nxt = []
        for p in frontier:
            for c in range(b):
                labels.append(labels[p] + (c,))
                idx = len(labels) - 1
                edges.append((p, idx, 1.0))
                nxt.append(idx)
        frontier = nxt
    r = 1.0 / b
    kills = {leaf: b * (1 - r) for leaf in frontier}
    loops = {leaf: b * r for leaf in frontier}
    g = build_graph(edges, kills, loops=loops, n=len(labels), labels=labels,
                    name=f"tree(b={b},depth={D})")
    g.meta.update(family="tree", branching=b, depth=D, exterior_return=r)
    return g


def make_lattice_box(dimension: int, radius: int) -> KilledWeightedGraph:
    """Box ``{-R..R}^d`` of the unit-conductance lattice with an absorbing halo.

    Every lattice edge leaving the box becomes one unit of kill weight. This is
    an approximation of the infinite lattice; capacities decrease toward their
    infinite-volume values as the radius grows.
    """
    if int(dimension) != dimension or dimension < 3:
        raise GraphError("dimension must be >= 3 (the lattice is recurrent below)")
    if int(radius) != radius or radius < 0:
        raise GraphError("radius must be a nonnegative integer")
    d, R = int(dimension), int(radius)
    side = 2 * R + 1
    n = side ** d
    coords = np.array(list(itertools.product(range(-R, R + 1), repeat=d)), dtype=np.int64)
    ids = np.arange(n).reshape((side,) * d)
    us, vs = [], []
    for ax in range(d):
        lo = [slice(None)] * d
        hi = [slice(None)] * d
        lo[ax] = slice(0, side - 1)
        hi[ax] = slice(1, side)
        us.append(ids[tuple(lo)].ravel())
        vs.append(ids[tuple(hi)].ravel())
    u = np.concatenate(us) if us else np.zeros(0, np.int64)
    v = np.concatenate(vs) if vs else np.zeros(0, np.int64)
    deg = np.bincount(np.concatenate([u, v]), minlength=n)
    kills = (2 * d - deg).astype(float)
    edges = np.stack([u, v], axis=1)
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    edges = edges[order]
    g = KilledWeightedGraph(
        n=n, edges=edges, weights=np.ones(len(edges)), kills=kills, loops=np.zeros(n),
        labels=tuple(map(tuple, coords.tolist())), name=f"lattice(d={d},R={R})",
    )
    _validate(g)
    g.meta.update(family="lattice", dimension=d, radius=R)
    return g


# --------------------------------------------------------------------------
# exhaustions


@dataclass(frozen=True)
class ExhaustionLevel:
    param: int
    graph: KilledWeightedGraph
    K: np.ndarray

    @property
    def labels(self) -> frozenset:
        return frozenset(self.graph.label(int(x)) for x in self.K)


@dataclass(frozen=True)
class ExhaustionFamily:
    """Increasing vertex sets ``K_n``, each realized inside its own truncation.

    Vertex sets at different levels are compared through model coordinates
    (``graph.labels``), never through raw ids.
    """

    family: str
    levels: tuple[ExhaustionLevel, ...]
    params: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(self.levels)

    def __len__(self) -> int:
        return len(self.levels)


def make_exhaustion(family: str, levels: Sequence[int], buffer: int = 2, **params) -> ExhaustionFamily:
    """Exhaustion of a generator family by balls of increasing size.

    ``biased_z``: ``K_n = {-n..n}`` in the radius ``n + buffer`` line.
    ``tree``: ``K_n`` = ball of depth ``n`` in the depth ``n + buffer`` tree
    (``branching`` defaults to 2).
    ``lattice``: ``K_n = {-n..n}^d`` in the radius ``n + buffer`` box
    (``dimension`` defaults to 3).
    """
    levels = [int(v) for v in levels]
    if not levels:
        raise GraphError("need at least one level")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise GraphError(f"levels must be strictly increasing, got {levels}")
    if buffer < 1:
        raise GraphError("buffer must be >= 1 so K_n avoids the boundary wrapper")
    out = []
    for lev in levels:
        if family == "biased_z":
            if lev < 0:
                raise GraphError("biased_z levels must be >= 0")
            g, _ = make_biased_z(lev + buffer)
            K = vertex_set(g, (g.index(i) for i in range(-lev, lev + 1)))
        elif family == "tree":
            if lev < 0:
                raise GraphError("tree levels must be >= 0")
            g = make_regular_tree(params.get("branching", 2), lev + buffer)
            K = vertex_set(g, (i for i, lab in enumerate(g.labels) if len(lab) <= lev))
        elif family == "lattice":
            g = make_lattice_box(params.get("dimension", 3), lev + buffer)
            K = vertex_set(g, (i for i, lab in enumerate(g.labels) if max(map(abs, lab)) <= lev))
        else:
            raise GraphError(f"unknown family {family!r}")
        out.append(ExhaustionLevel(lev, g, K))
    return ExhaustionFamily(family, tuple(out), dict(params, buffer=buffer))


# --------------------------------------------------------------------------
# text format


def dumps_graph(g: KilledWeightedGraph) -> str:
    """Serialize to the line format (``vertices``/``edge``/``kill``/``loop``/``end``)."""
    lines = [f"# {g.name}", f"vertices {g.n}"]
    for (u, v), w in zip(g.edges.tolist(), g.weights.tolist()):
        lines.append(f"edge {u} {v} {w:.17g}")
    for x in np.flatnonzero(g.kills):
        lines.append(f"kill {x} {g.kills[x]:.17g}")
    for x in np.flatnonzero(g.loops):
        lines.append(f"loop {x} {g.loops[x]:.17g}")
    for nm in g.end_names():
        arr = g.ends[nm]
        for x in np.flatnonzero(arr):
            lines.append(f"end {x} {nm} {arr[x]:.17g}")
    return "\n".join(lines) + "\n"


def loads_graph(text: str, name: str = "graph") -> KilledWeightedGraph:
    n = None
    edges, kills, loops, ends = [], {}, {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "vertices" and len(tok) == 2:
                n = int(tok[1])
            elif tok[0] == "edge" and len(tok) == 4:
                edges.append((int(tok[1]), int(tok[2]), float(tok[3])))
            elif tok[0] == "kill" and len(tok) == 3:
                kills[int(tok[1])] = float(tok[2])
            elif tok[0] == "loop" and len(tok) == 3:
                loops[int(tok[1])] = float(tok[2])
            elif tok[0] == "end" and len(tok) == 4:
                ends.setdefault(tok[2], {})[int(tok[1])] = float(tok[3])
            else:
                raise GraphError(f"line {lineno}: cannot parse {raw!r}")
        except ValueError as exc:
            if isinstance(exc, GraphError):
                raise
            raise GraphError(f"line {lineno}: {exc}") from None
    if n is None:
        raise GraphError("missing 'vertices N' header")
    return build_graph(edges, kills, loops=loops, n=n, ends=ends or None, name=name)


def write_graph(g: KilledWeightedGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_graph(g))


def read_graph(path) -> KilledWeightedGraph:
    with open(path) as fh:
        return loads_graph(fh.read(), name=str(path))
