"""
Total variation distance, optimal couplings and Poisson point process bounds.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np
from scipy import stats

__all__ = [
    "DiscreteDistribution",
    "tv",
    "poisson_pmf_table",
    "poisson_shift_tv",
    "optimal_coupling",
    "ppp_gap",
    "ppp_tv_upper",
    "ppp_tv_exact",
    "poisson_bernoulli_tv",
    "ppp_tv_lower_constant",
]

NORM_TOL = 1e-12
POISSON_TAIL = 1e-15


@dataclass(frozen=True)
class DiscreteDistribution:
    """A finite measure over opaque keys.

    ``kind`` is ``"probability"`` (total mass within 1e-12 of one) or
    ``"measure"`` (any finite nonnegative mass).
    """

    keys: tuple
    mass: np.ndarray
    kind: str = "probability"

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=float)
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "keys", tuple(self.keys))
        if mass.shape != (len(self.keys),):
            raise ValueError("keys and mass must have the same length")
        if len(set(self.keys)) != len(self.keys):
            raise ValueError("duplicate keys")
        if np.any(mass < 0) or not np.all(np.isfinite(mass)):
            raise ValueError("masses must be finite and nonnegative")
        if self.kind not in ("probability", "measure"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "probability" and abs(math.fsum(mass) - 1.0) > NORM_TOL:
            raise ValueError(f"probability masses sum to {math.fsum(mass)!r}")

    @classmethod
    def from_dict(cls, d: Mapping[Hashable, float], kind: str = "probability"):
        return cls(tuple(d), np.fromiter(d.values(), dtype=float, count=len(d)), kind)

    @classmethod
    def from_weights(cls, keys: Sequence, weights) -> "DiscreteDistribution":
        """Normalize nonnegative weights into a probability distribution."""
        w = np.asarray(weights, dtype=float)
        return cls(tuple(keys), w / math.fsum(w), "probability")

    @property
    def total(self) -> float:
        return math.fsum(self.mass)

    def normalized(self) -> "DiscreteDistribution":
        return DiscreteDistribution.from_weights(self.keys, self.mass)

    def __getitem__(self, key) -> float:
        try:
            return float(self.mass[self.keys.index(key)])
        except ValueError:
            return 0.0

    def as_dict(self) -> dict:
        return dict(zip(self.keys, self.mass.tolist()))

    def support(self) -> tuple:
        return tuple(k for k, m in zip(self.keys, self.mass) if m > 0)

    def sample(self, rng: np.random.Generator, size=None):
        idx = rng.choice(len(self.keys), size=size, p=self.mass / self.mass.sum())
        if size is None:
            return self.keys[idx]
        return [self.keys[i] for i in np.atleast_1d(idx)]


def _aligned(p: DiscreteDistribution, q: DiscreteDistribution):
    keys = list(p.keys) + [k for k in q.keys if k not in set(p.keys)]
    pos = {k: i for i, k in enumerate(keys)}
    a = np.zeros(len(keys))
    b = np.zeros(len(keys))
    a[[pos[k] for k in p.keys]] = p.mass
    b[[pos[k] for k in q.keys]] = q.mass
    return keys, a, b


def _require_probability(*ds):
    for d in ds:
        if d.kind != "probability":
            raise ValueError("total variation needs probability distributions")


def tv(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """Total variation distance, computed as half the l1 distance.

    The positive-part form ``sum_{p > q} (p - q)`` is evaluated as well and must
    agree to 1e-12.
    """
    _require_probability(p, q)
    _, a, b = _aligned(p, q)
    diff = a - b
    half_l1 = 0.5 * math.fsum(np.abs(diff))
    positive = math.fsum(diff[diff > 0])
    if abs(half_l1 - positive) > NORM_TOL:
        raise ArithmeticError(f"tv forms disagree: {half_l1!r} vs {positive!r}")
    return half_l1


def poisson_pmf_table(lam: float, tail: float = POISSON_TAIL) -> np.ndarray:
    """Poisson(lam) pmf on ``0..k_max``, where the dropped tail is below ``tail``."""
    k_max = int(stats.poisson.isf(tail, lam)) + 1
    k_max = max(k_max, int(lam + 12 * math.sqrt(lam) + 20))
    return stats.poisson.pmf(np.arange(k_max + 1), lam)


def poisson_shift_tv(lam: float) -> tuple[float, float]:
    """Exact ``d_TV(Poi(lam), Poi(lam) + 1)`` and the bound ``1 / (2 sqrt(lam))``.

    The distance is the sum of the positive parts of ``pmf(k) - pmf(k-1)``,
    which are the indices ``k < lam``.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    pmf = poisson_pmf_table(lam)
    shifted = np.concatenate([[0.0], pmf[:-1]])
    diff = pmf - shifted
    exact = math.fsum(diff[diff > 0])
    half_l1 = 0.5 * (math.fsum(np.abs(diff)) + pmf[-1])
    if abs(exact - half_l1) > 1e-12:
        raise ArithmeticError("Poisson truncation too coarse")
    bound = 0.5 / math.sqrt(lam)
    return exact, bound


def optimal_coupling(p: DiscreteDistribution, q: DiscreteDistribution,
                     rng: np.random.Generator) -> tuple:
    """Draw ``(X, Y)`` with ``X ~ p``, ``Y ~ q`` and ``P(X != Y) = tv(p, q)``."""
    _require_probability(p, q)
    keys, a, b = _aligned(p, q)
    overlap = np.minimum(a, b)
    d = tv(p, q)
    if d <= 0 or rng.random() < 1.0 - d:
        i = rng.choice(len(keys), p=overlap / overlap.sum())
        return keys[i], keys[i]
    pa = a - overlap
    pb = b - overlap
    i = rng.choice(len(keys), p=pa / pa.sum())
    j = rng.choice(len(keys), p=pb / pb.sum())
    return keys[i], keys[j]


def ppp_gap(nu: DiscreteDistribution, pi: DiscreteDistribution, eps: float) -> float:
    """``sum_x (pi(x) - eps * nu(x))_+``: the mass of ``pi`` not covered by ``eps * nu``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if pi.kind != "probability":
        raise ValueError("pi must be a probability distribution")
    _, n, p = _aligned(nu, pi)
    return math.fsum(np.maximum(p - eps * n, 0.0))


def ppp_tv_upper(nu: DiscreteDistribution, pi: DiscreteDistribution, eps: float, a: float) -> float:
    """Upper bound ``sqrt(eps / (1 - a)) / 2 + a`` on ``d_TV(PPP(nu) + pi, PPP(nu))``.

    Valid whenever ``ppp_gap(nu, pi, eps) <= a < 1``.
    """
    if not 0 <= a < 1:
        raise ValueError("a must lie in [0, 1)")
    gap = ppp_gap(nu, pi, eps)
    if gap > a + 1e-15:
        raise ValueError(f"gap {gap} exceeds a = {a}")
    return 0.5 * math.sqrt(eps / (1 - a)) + a


def ppp_tv_exact(nu: DiscreteDistribution, pi: DiscreteDistribution, tail: float = 1e-9) -> float:
    """``d_TV(PPP(nu) + pi, PPP(nu))`` by enumerating count vectors.

    Counts at each site are independent Poisson; the extra point lands at site
    ``x`` with probability ``pi(x)``. Each coordinate is truncated where its
    Poisson tail drops below ``tail / len(support)``. Intended for supports of
    a handful of points.
    """
    _require_probability(pi)
    keys, n, p = _aligned(nu, pi)
    m = len(keys)
    tables = []
    for lam in n:
        if lam > 0:
            k_max = int(stats.poisson.isf(tail / m, lam)) + 2
            tables.append(stats.poisson.pmf(np.arange(k_max + 1), lam))
        else:
            tables.append(np.array([1.0, 0.0]))
    total = 0.0
    for counts in itertools.product(*(range(len(t)) for t in tables)):
        base = math.prod(t[c] for t, c in zip(tables, counts))
        shifted = 0.0
        for i, c in enumerate(counts):
            if c > 0 and p[i] > 0:
                shifted += p[i] * math.prod(
                    (t[cc - 1] if j == i else t[cc]) for j, (t, cc) in enumerate(zip(tables, counts))
                )
        total += abs(shifted - base)
    return 0.5 * total


def poisson_bernoulli_tv(lam: float, p: float) -> float:
    """``d_TV(Poi(lam) + Ber(p), Poi(lam))``; equals ``p * d_TV(Poi(lam) + 1, Poi(lam))``."""
    if lam == 0:
        return p
    return p * poisson_shift_tv(lam)[0]


def ppp_tv_lower_constant(eps: float, a: float, lam_step: float = 1e-3, p_step: float = 1e-3) -> float:
    """Grid minimum of ``d_TV(Poi(lam) + Ber(p), Poi(lam))`` over ``eps*lam + a <= p <= 1``.

    The objective is linear in ``p``, so for each ``lam`` the minimum sits at the
    smallest admissible grid value of ``p``. The result is only a grid
    optimum over ``lam in [0, (1 - a) / eps]``; no claim is made beyond that.
    """
    if not (eps > 0 and 0 < a <= 1):
        raise ValueError("need eps > 0 and 0 < a <= 1")
    lam_max = (1 - a) / eps
    lams = np.arange(0.0, lam_max + lam_step / 2, lam_step)
    best = math.inf
    for lam in lams:
        p = math.ceil(round((eps * lam + a) / p_step, 9)) * p_step
        p = min(p, 1.0)
        if lam == 0:
            val = p
        else:
            # Poi(lam)+1 vs Poi(lam): pmf at ceil(lam)-1 by telescoping
            k = math.ceil(lam) - 1
            val = p * float(stats.poisson.pmf(k, lam))
        best = min(best, val)
    return best
