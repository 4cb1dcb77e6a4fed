"""Total variation facts used when comparing Poisson configurations.

Run: python3 demos/04_coupling_bounds.py
"""
import math

import numpy as np

from interlacements import DiscreteDistribution, optimal_coupling, poisson_shift_tv, ppp_gap, ppp_tv_upper, tv
from interlacements import coupling as cp

for lam in (0.5, 1, 5, 50):
    exact, bound = poisson_shift_tv(lam)
    print(f"lambda={lam:5}: d_TV(Poi, Poi+1) = {exact:.6f} <= 1/(2 sqrt(lambda)) = {bound:.6f}")
print("at lambda=1 the distance is exactly 1/e:", poisson_shift_tv(1.0)[0], math.exp(-1))

p = DiscreteDistribution.from_weights("abc", [5, 3, 2])
q = DiscreteDistribution.from_weights("abc", [2, 3, 5])
rng = np.random.Generator(np.random.Philox(0))
pairs = [optimal_coupling(p, q, rng) for _ in range(10000)]
print(f"tv = {tv(p, q):.3f}, optimal coupling disagrees {sum(a != b for a, b in pairs) / len(pairs):.3f}")

# Adding one point drawn from pi to a Poisson process of intensity nu.
nu = DiscreteDistribution((0, 1), np.array([4.0, 6.0]), kind="measure")
pi = DiscreteDistribution.from_weights((0, 1), [0.5, 0.5])
eps = 0.2
gap = ppp_gap(nu, pi, eps)
print(f"gap at eps={eps}: {gap}, upper bound {ppp_tv_upper(nu, pi, eps, max(gap, 0.01)):.4f}, "
      f"exact {cp.ppp_tv_exact(nu, pi):.4f}")
