"""Two-sided approximation of the very singular solution on a ball.

Below: concentrated Dirac data.  Above: large solutions of plateau data.
The demo uses a coarse grid and short ladders so it runs quickly.  At this
size the relative gap is about 20%, above the 5% threshold, so it reports
Fail.  The gap falls under 5% with n = 8000 and the longer ladders in
demos/configs/dirichlet-vss.cfg.

    python3 demos/05_dirichlet_sandwich.py
"""
from vhj.experiments import exp_dirichlet_vss

rep = exp_dirichlet_vss(R=1.0, n=800, k_ladder=(1e3, 1e4, 1e5), eta_ladder=(0.04, 0.02),
                        cap_schedule=(1e6, 1e7, 1e8), t_probe=0.25, workers=2)
print("\n".join(rep.summary))
for row in rep.tables["caps"]:
    diff = row.get("diff")
    print(f"eta={row['eta']} M={row['M']:g} sup={row['sup']:.5g} "
          f"change from previous cap={'-' if diff is None else f'{diff:.3g}'}")
