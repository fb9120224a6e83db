"""The q = 2 solver against the closed-form Cole-Hopf solution.

With z = 1 - exp(-u) the equation becomes the heat equation, so a Gaussian
z0 gives an exact u(r, t).  The error should halve with each grid doubling.

    python3 demos/02_cole_hopf.py
"""
from vhj.experiments import exp_cole_hopf

rep = exp_cole_hopf(ns=(100, 200, 400, 800), t_check=0.5, workers=2)
for row in rep.tables["errors"]:
    print(f"n={row['n']:4d}  h={row['h']:.4f}  error={row['error']:.3e}  "
          f"order={row.get('order', float('nan')):.3f}")
print("verdict:", rep.verdict.value)
