"""
0-1 law diagnostics evaluated along exhaustions.

Each level of an exhaustion is a finite vertex set ``L_n`` inside its own
truncated graph; sites are addressed by model coordinates so that the same
site ``x`` can be followed across levels.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Hashable

import numpy as np

from . import potential as pot
from .graph import ExhaustionFamily, GraphError, KilledWeightedGraph, vertex_set

__all__ = [
    "CRITERIA_CONFIG",
    "CriterionError",
    "LevelRecord",
    "CriterionTrace",
    "AtomFlowTrace",
    "trend_verdict",
    "strong_level",
    "strong_criterion",
    "weak_criterion",
    "cap_identity",
    "atom_flow",
    "hinge_identity_check",
    "crossing_floor",
]

CRITERIA_CONFIG = {
    "vanish_threshold": 1e-2,
    "floor_threshold": 1e-1,
    "floor_rel_variation": 0.1,
    "finite_increment": 1e-6,
}


class CriterionError(AssertionError):
    """A criterion that must hold in full generality did not."""


@dataclass(frozen=True)
class LevelRecord:
    level: int
    size: int
    eps: float
    value: float
    cap: float
    aux_residual: float


@dataclass
class CriterionTrace:
    name: str
    family: str
    site: Hashable
    records: list
    verdict: str
    thresholds: dict = field(default_factory=dict)

    @property
    def values(self) -> list[float]:
        return [r.value for r in self.records]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("level,eps,value,cap,aux_residual\n")
        for r in self.records:
            buf.write(f"{r.level},{r.eps:.17g},{r.value:.17g},{r.cap:.17g},{r.aux_residual:.17g}\n")
        return buf.getvalue()

    def report(self) -> str:
        lines = [f"criterion = {self.name}", f"family = {self.family}",
                 f"site = {self.site!r}", f"verdict = {self.verdict}"]
        lines += [f"threshold.{k} = {v!r}" for k, v in sorted(self.thresholds.items())]
        lines += [f"level.{r.level}.value = {r.value:.17g}" for r in self.records]
        return "\n".join(lines) + "\n"


def trend_verdict(values, vanish_threshold=None, floor_threshold=None, rel_variation=None) -> str:
    """Classify a sequence of nonnegative level values.

    ``vanishing-trend``: the last value is below ``vanish_threshold`` and the
    last three values are nonincreasing. ``bounded-below``: the last three
    values all exceed ``floor_threshold`` and lie within ``rel_variation`` of
    each other (relative to their maximum). Otherwise ``inconclusive``.
    """
    cfg = CRITERIA_CONFIG
    vanish = cfg["vanish_threshold"] if vanish_threshold is None else vanish_threshold
    floor = cfg["floor_threshold"] if floor_threshold is None else floor_threshold
    rel = cfg["floor_rel_variation"] if rel_variation is None else rel_variation
    tail = list(values)[-3:]
    if len(tail) < 3:
        return "inconclusive"
    if tail[-1] < vanish and all(b <= a for a, b in zip(tail, tail[1:])):
        return "vanishing-trend"
    if min(tail) > floor and (max(tail) - min(tail)) < rel * max(tail):
        return "bounded-below"
    return "inconclusive"


def _thresholds():
    cfg = CRITERIA_CONFIG
    return {"vanish_threshold": cfg["vanish_threshold"], "floor_threshold": cfg["floor_threshold"],
            "floor_rel_variation": cfg["floor_rel_variation"]}


def _site(level, label) -> int:
    g = level.graph
    x = g.index(label)
    if x not in set(level.K.tolist()):
        raise GraphError(f"site {label!r} lies outside level {level.param}")
    return x


@dataclass
class _LevelData:
    graph: KilledWeightedGraph
    L: np.ndarray
    x: int
    e: np.ndarray          # e_L on L
    cap: float
    hit: np.ndarray        # P_{L_i}[tau_x < inf]
    last_exit: np.ndarray  # P_{L_i}[X_lambda = L_j]
    last_exit_x: np.ndarray
    cap_x: float

    @property
    def hinge(self) -> np.ndarray:
        return self.e[:, None] * self.last_exit


def _level_data(graph, L, x) -> _LevelData:
    L = vertex_set(graph, L)
    prof = pot.equilibrium(graph, L)
    cols = pot.green_columns(graph, L)
    j = int(np.searchsorted(L, x))
    gx = cols[:, j]
    le = cols * prof.escape[None, :]
    return _LevelData(
        graph=graph, L=L, x=x, e=prof.e[L], cap=prof.cap,
        hit=gx[L] / gx[x], last_exit=le[L], last_exit_x=le[x],
        cap_x=graph.total_weight[x] / gx[x],
    )


def _conditional_hit(d: _LevelData) -> np.ndarray:
    """``P_{x'}[tau_x < inf | X_{lambda_L} = y']`` on ``L x L`` (nan where undefined)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        c = d.hit[:, None] * d.last_exit_x[None, :] / d.last_exit
    return np.where(d.last_exit > 0, c, np.nan)


def strong_level(graph: KilledWeightedGraph, L, x: int, eps: float) -> float:
    """``sum_{x', y'} h_L(x', y') (P_{x'}[tau_x < inf | X_{lambda_L} = y'] - eps)_+``."""
    d = _level_data(graph, L, x)
    return _strong_value(d, eps)


def _strong_value(d, eps) -> float:
    h = d.hinge
    c = _conditional_hit(d)
    mask = h > 0
    return math.fsum((h[mask] * np.maximum(c[mask] - eps, 0.0)).tolist())


def _check_eps(eps):
    if not eps > 0:
        raise ValueError("eps must be positive")


def strong_criterion(exhaustion: ExhaustionFamily, x: Hashable, eps: float) -> CriterionTrace:
    """Hinge-weighted criterion at site ``x`` along ``exhaustion``."""
    _check_eps(eps)
    recs = []
    for lev in exhaustion:
        xi = _site(lev, x)
        d = _level_data(lev.graph, lev.K, xi)
        resid = abs(math.fsum((d.e * d.hit).tolist()) - d.cap_x)
        recs.append(LevelRecord(lev.param, int(d.L.size), eps, _strong_value(d, eps), d.cap, resid))
    vals = [r.value for r in recs]
    return CriterionTrace("strong", exhaustion.family, x, recs, trend_verdict(vals), _thresholds())


def weak_criterion(exhaustion: ExhaustionFamily, x: Hashable, eps: float,
                   assert_vanishing: bool = True) -> CriterionTrace:
    """``sum_{x'} e_L(x') (P_{x'}[tau_x < inf] - eps)_+`` along ``exhaustion``.

    This sum tends to zero for every transient chain, so a verdict other than
    ``vanishing-trend`` raises :class:`CriterionError` unless
    ``assert_vanishing`` is off.
    """
    _check_eps(eps)
    recs = []
    for lev in exhaustion:
        xi = _site(lev, x)
        d = _level_data(lev.graph, lev.K, xi)
        val = math.fsum((d.e * np.maximum(d.hit - eps, 0.0)).tolist())
        resid = abs(math.fsum((d.e * d.hit).tolist()) - d.cap_x)
        recs.append(LevelRecord(lev.param, int(d.L.size), eps, val, d.cap, resid))
    vals = [r.value for r in recs]
    trace = CriterionTrace("weak", exhaustion.family, x, recs, trend_verdict(vals), _thresholds())
    if assert_vanishing and trace.verdict != "vanishing-trend":
        raise CriterionError(f"weak criterion not vanishing on {exhaustion.family}: {vals}")
    return trace


def cap_identity(exhaustion: ExhaustionFamily, x: Hashable) -> list[float]:
    """Residuals ``|sum_{x'} e_L(x') P_{x'}[tau_x < inf] - cap({x})|`` per level.

    ``cap({x})`` is taken from an independent escape-probability solve.
    """
    out = []
    for lev in exhaustion:
        xi = _site(lev, x)
        d = _level_data(lev.graph, lev.K, xi)
        cap_x = pot.capacity(lev.graph, [xi])
        out.append(abs(math.fsum((d.e * d.hit).tolist()) - cap_x))
    return out


@dataclass
class AtomFlowTrace:
    A: str
    B: str
    levels: list
    values: list
    verdict: str
    thresholds: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        rows = ["level,value"] + [f"{lv},{v:.17g}" for lv, v in zip(self.levels, self.values)]
        return "\n".join(rows) + "\n"


def atom_flow(exhaustion: ExhaustionFamily, A: str, B: str) -> AtomFlowTrace:
    """``cap_{A->B}(K_n)`` along an exhaustion of a graph family with labeled ends.

    Verdict ``finite-limit`` when the last three increments fall below
    ``finite_increment``; ``diverging`` when the last three increments are
    positive and nondecreasing; otherwise ``inconclusive``.
    """
    vals = []
    for lev in exhaustion:
        if not lev.graph.ends:
            raise GraphError(f"family {exhaustion.family!r} has no labeled ends")
        vals.append(pot.restricted_equilibrium(lev.graph, lev.K, A, B)[1])
    tol = CRITERIA_CONFIG["finite_increment"]
    inc = np.diff(vals)[-3:]
    if len(inc) == 3 and np.all(np.abs(inc) < tol):
        verdict = "finite-limit"
    elif len(inc) == 3 and np.all(inc > tol) and np.all(np.diff(inc) >= 0):
        verdict = "diverging"
    else:
        verdict = "inconclusive"
    return AtomFlowTrace(A, B, [lv.param for lv in exhaustion], vals, verdict,
                         {"finite_increment": tol})


def _joint_last_exit_no_return(graph, L, x) -> np.ndarray:
    """``P_x[X_{lambda_L} = z, tau_x^+ = inf]`` for ``z`` in ``L``.

    Computed by a first-step decomposition with the Green function of the chain
    killed on hitting ``x``, independently of the unrestricted Green function.
    """
    L = vertex_set(graph, L)
    escL = pot.escape_probability(graph, L)
    U = np.setdiff1d(np.arange(graph.n), [x])
    targets = np.setdiff1d(L, [x])
    pos = {int(v): i for i, v in enumerate(U)}
    rhs = np.zeros((U.size, targets.size))
    for j, z in enumerate(targets):
        rhs[pos[int(z)], j] = 1.0
    M = graph.operator[U][:, U]
    gk = pot._solve(M, rhs) * graph.total_weight[targets][None, :]
    step = np.asarray(graph.conductance[[x]][:, U].todense()).ravel() / graph.total_weight[x]
    out = np.zeros(L.size)
    tpos = np.searchsorted(L, targets)
    out[tpos] = (step @ gk) * escL[tpos]
    out[np.searchsorted(L, x)] = escL[np.searchsorted(L, x)]
    return out


def hinge_identity_check(graph: KilledWeightedGraph, L, x: int) -> float:
    """Max residual of the reversibility identity for the singleton hinge law.

    Left side: ``p(x', y') = P_x[X_lambda = x' | tau_x^+ = inf] P_x[X_lambda = y' | tau_x^+ = inf]``.
    Right side: ``h_L(x', y') / (a_x P_x[tau_x^+ = inf]) * P_{x'}[tau_x < inf | X_lambda = y']``.
    """
    L = vertex_set(graph, L)
    if x not in set(L.tolist()):
        raise GraphError("x must belong to L")
    esc_x = float(pot.escape_probability(graph, [x])[0])
    if not esc_x > 0:
        raise GraphError("cap({x}) is zero")
    cond = _joint_last_exit_no_return(graph, L, x) / esc_x
    lhs = np.outer(cond, cond)
    d = _level_data(graph, L, x)
    h = d.hinge
    c = _conditional_hit(d)
    undefined = (h > 0) & ~np.isfinite(c)
    if undefined.any():
        bad = [(int(L[i]), int(L[j])) for i, j in zip(*np.nonzero(undefined))]
        raise ZeroDivisionError(f"zero last-exit probability at {bad}")
    rhs = np.where(h > 0, h * np.nan_to_num(c), 0.0) / (graph.total_weight[x] * esc_x)
    return float(np.max(np.abs(lhs - rhs)))


def crossing_floor(eps: float) -> float:
    """Closed-form floor of the strong criterion on the biased line at the origin.

    From ``+n`` the walk reaches the origin with probability ``2**-n`` and then
    escapes left with probability 1/2, while ``e_L(+-n) = 2**(n-1)``; the two
    crossing couples therefore carry ``h_L(n, -n) = h_L(-n, n) = 1/4``, and a
    crossing path hits the origin with certainty.
    """
    return 0.5 * max(1.0 - eps, 0.0)
