"""Shooting for the fast-decaying self-similar profile.

For q < q* a unique height f0* separates profiles that hit zero from those
with a slow algebraic tail; at f0* the tail decays like a Gaussian.  Above
q* no such height exists.  Writes profile CSV/JSON to ./demo-out/.

    python3 demos/03_profile_shooting.py
"""
from pathlib import Path

from vhj import ProblemParams, derive_exponents, shoot_vss
from vhj.profile import profile_mass

out = Path("demo-out")
out.mkdir(exist_ok=True)
for N, q in [(1, 1.3), (1, 1.45), (1, 1.6), (2, 1.2), (2, 1.4), (3, 1.2)]:
    prof = shoot_vss(derive_exponents(ProblemParams(N, q)))
    if prof:
        d = prof.diagnostics
        print(f"N={N} q={q}: f0*={prof.f0_star:.8g} eta_cut={d['eta_cut']:.2f} "
              f"orientation={d['orientation']}")
    else:
        print(f"N={N} q={q}: no fast-decay profile ({len(prof.scan)} shots scanned)")

prof = shoot_vss(derive_exponents(ProblemParams(1, 1.3)))
prof.write(out / "profile_N1_q1.3.csv", out / "profile_N1_q1.3.json")
print("mass at t=1, 0.1, 0.01:", [round(profile_mass(prof, t), 4) for t in (1.0, 0.1, 0.01)])
