"""One evolution from plateau data, with the trajectory written to CSV.

Shows the stepper API directly: initial data, the adaptive step, mass
balance and the sup decay.

    python3 demos/07_single_evolution.py
"""
from pathlib import Path

from vhj import Plateau, RadialGrid, StepperConfig, evolve
from vhj.evolution import make_initial_data

grid = RadialGrid(8.0, 800)
f0 = make_initial_data(Plateau(1e4, 0.2), grid, 1)
traj = evolve(f0, StepperConfig(1.0, snapshot_times=(0.01, 0.1)), 1.3, 1)
for t in (0.01, 0.1):
    print(f"t={t}: sup={traj.snapshot(t).values.max():.5g}")
print(f"t=1.0: sup={traj.final.values.max():.5g}")
print(f"steps={traj.steps}  mass {traj.mass[0]:.5g} -> {traj.mass[-1]:.5g}  "
      f"balance defect {traj.balance_residual():.2e}")
out = Path("demo-out")
out.mkdir(exist_ok=True)
traj.to_csv(out / "trajectory.csv")
print("wrote", out / "trajectory.csv")
