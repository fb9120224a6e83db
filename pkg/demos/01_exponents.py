"""Exponent bookkeeping and the explicit barriers.

Prints q*, a and the two barrier constants for a few (N, q), then checks that
the power law gamma_q s^{-a} balances the profile equation by evaluating the
stationary residual at a handful of radii.

    python3 demos/01_exponents.py
"""
import numpy as np

from vhj import ProblemParams, derive_exponents
from vhj.params import gamma_barrier, gamma_stationary, stationary_residual

for N, q in [(1, 1.3), (1, 1.5), (2, 1.2), (3, 1.25), (1, 2.5)]:
    b = derive_exponents(ProblemParams(N, q))
    print(f"N={N} q={q}: q*={b.q_star:.4f} a={b.a:.4f} "
          f"gamma_q={b.gamma_q} gamma_Nq={b.gamma_Nq} subcritical={b.subcritical}")

# residual of the stationary barrier c s^{-a}: -f'' - (N-1) f'/s + |f'|^q
N, q = 2, 1.5
p = ProblemParams(N, q)
b = derive_exponents(p)
s = np.array([0.5, 1.0, 2.0, 4.0])
c, a = b.gamma_Nq, b.a
f = gamma_stationary(s, p, b)
df = -a * c * s ** (-a - 1)
d2f = a * (a + 1) * c * s ** (-a - 2)
print("stationary residual / f:", stationary_residual(f, df, d2f, s, N, q) / f)
print("Gamma at s=1:", gamma_barrier(1.0, derive_exponents(ProblemParams(1, 1.3))))
