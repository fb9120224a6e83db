import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vhj.evolution import (DirichletValue, Explicit, GaussianCH, MaxStepsExceeded,
                           MollifiedDirac, Plateau, ResolutionError, ScheduleExhausted,
                           StepperConfig, dt_limit, evolve, evolve_lockstep, large_solution,
                           make_initial_data, run_manifest, step, write_manifest)
from vhj.grid import Field, RadialGrid, mass
from vhj.params import GaussianInitialData, exact_q2_solution


@pytest.mark.parametrize("N", [1, 2, 3])
def test_dirac_mass_normalized(N):
    g = RadialGrid(2.0, 400)
    f = make_initial_data(MollifiedDirac(1.0, 0.1), g, N)
    assert mass(f, N) == pytest.approx(1.0, abs=1e-10)
    assert np.all(f.values[g.r >= 0.1] == 0)


def test_dirac_zero_and_resolution():
    g = RadialGrid(1.0, 100)
    assert not make_initial_data(MollifiedDirac(0.0, 0.05), g, 1).values.any()
    with pytest.raises(ResolutionError):
        make_initial_data(MollifiedDirac(1.0, 0.03), g, 1)
    with pytest.raises(ResolutionError):
        make_initial_data(Plateau(1.0, 0.03), g, 1)


def test_plateau_and_gaussian():
    g = RadialGrid(1.0, 100)
    f = make_initial_data(Plateau(5.0, 0.2), g, 1)
    assert f.values.max() == 5.0
    assert np.all(f.values[g.r >= 0.2 - 1e-12] == 0)
    assert np.all(np.diff(f.values) <= 0)
    with pytest.raises(ValueError):
        make_initial_data(Plateau(math.inf, 0.2), g, 1)
    u = make_initial_data(GaussianCH(GaussianInitialData(0.5, 1.0)), g, 1)
    assert u.values[0] == pytest.approx(math.log(2.0))
    ex = make_initial_data(Explicit(u), g, 1)
    assert np.array_equal(ex.values, u.values) and ex.values is not u.values


def test_config_validation():
    with pytest.raises(ValueError):
        StepperConfig(1.0, safety=0.0)
    with pytest.raises(ValueError):
        StepperConfig(1.0, snapshot_times=(0.5, 0.2))


def test_dt_limit():
    g = RadialGrid(1.0, 100)
    assert dt_limit(Field(g, np.zeros(101)), 2.0) == g.h
    assert dt_limit(Field(g, g.r.copy()), 2.0, safety=0.5) == pytest.approx(0.25 * g.h)
    dts = [dt_limit(Field(g, s * g.r), 1.5) for s in (10.0, 40.0)]
    assert dts[0] / dts[1] == pytest.approx(4.0 ** 0.5)
    assert dt_limit(Field(g, 1e6 * g.r), 1.5, dt_min=1e-3) == 1e-3


def test_step_equilibria():
    g = RadialGrid(1.0, 50)
    z = step(Field(g, np.zeros(51)), 0.01, 1.5, 2)
    assert not z.values.any()
    c = np.full(51, 3.0)
    c[-1] = 0.0
    out = step(Field(g, c), dt_limit(Field(g, c), 1.5), 1.5, 2).values
    assert np.all(out >= 0) and np.all(out <= 3.0)
    assert out[0] == pytest.approx(3.0, abs=1e-6)


def test_dirichlet_value():
    g = RadialGrid(1.0, 50)
    f = step(Field(g, np.zeros(51)), 0.01, 2.0, 1, DirichletValue(lambda t: 2 * t), t_new=0.5)
    assert f.values[-1] == 1.0
    assert np.all(f.values >= 0)


def test_q2_short_run_against_exact():
    data = GaussianInitialData(0.5, 1.0)
    g = RadialGrid(10.0, 400)
    traj = evolve(make_initial_data(GaussianCH(data), g, 1), StepperConfig(0.1), 2.0, 1)
    err = np.max(np.abs(traj.final.values - exact_q2_solution(data, g.r, 0.1, 1)))
    assert err < 2 * g.h


def test_evolve_t0_and_snapshots():
    g = RadialGrid(4.0, 80)
    f0 = make_initial_data(MollifiedDirac(5.0, 0.2), g, 1)
    tr = evolve(f0, StepperConfig(0.0), 1.3, 1)
    assert tr.times == [0.0] and tr.steps == 0
    tr = evolve(f0, StepperConfig(0.3, snapshot_times=(0.0, 0.1, 0.3)), 1.3, 1)
    assert sorted(tr.snapshots) == [0.0, 0.1, 0.3]
    assert 0.1 in tr.times and tr.times[-1] == 0.3
    assert all(b > a for a, b in zip(tr.times, tr.times[1:]))
    assert all(b >= a for a, b in zip(tr.dissipation, tr.dissipation[1:]))
    with pytest.raises(KeyError):
        tr.snapshot(0.2)
    with pytest.raises(MaxStepsExceeded):
        evolve(f0, StepperConfig(1.0, max_steps=3), 1.3, 1)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_mass_balance_and_positivity(N):
    g = RadialGrid(3.0, 150)
    f0 = make_initial_data(MollifiedDirac(50.0, 0.1), g, N)
    tr = evolve(f0, StepperConfig(0.5), 1.3, N,
                observers={"min": lambda t, f: float(f.values.min())})
    assert tr.balance_residual() <= 1e-8
    assert min(tr.extra["min"]) >= -1e-12


def test_outflux_is_boundary_flux_in_one_dimension():
    g = RadialGrid(1.0, 50)
    u0 = np.cos(0.5 * np.pi * g.r) + 0.5
    u0[-1] = 0.0
    dt = 5e-4
    tr = evolve(Field(g, u0), StepperConfig(dt, dt_max=dt), 1.5, 1)
    assert tr.steps == 1
    u_new = tr.final.values
    assert tr.outflux[-1] == pytest.approx(2 * dt * (u_new[-2] - u_new[-1]) / g.h, rel=1e-10)


def test_sup_nonincreasing_after_smoothing():
    g = RadialGrid(2.0, 100)
    f0 = make_initial_data(Plateau(2.0, 0.5), g, 2)
    tr = evolve(f0, StepperConfig(1.0), 1.5, 2)
    sups = tr.sup
    assert all(b <= a + 1e-12 for a, b in zip(sups, sups[1:]))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.floats(1.05, 3.0), st.integers(0, 2**31 - 1))
def test_comparison_property(N, q, seed):
    rng = np.random.default_rng(seed)
    g = RadialGrid(1.0, 24)
    u = rng.uniform(0, 5, 25)
    v = u + rng.uniform(0, 5, 25)
    u[-1] = v[-1] = 0.0
    lo, hi = evolve_lockstep([Field(g, u), Field(g, v)], StepperConfig(0.2), q, N)
    assert np.all(hi.final.values - lo.final.values >= -1e-12)


def test_lockstep_matches_single_run_for_one_field():
    g = RadialGrid(2.0, 100)
    f0 = make_initial_data(MollifiedDirac(10.0, 0.1), g, 1)
    a = evolve(f0, StepperConfig(0.2), 1.3, 1)
    (b,) = evolve_lockstep([f0], StepperConfig(0.2), 1.3, 1)
    assert np.array_equal(a.final.values, b.final.values)


def test_determinism():
    g = RadialGrid(2.0, 100)
    f0 = make_initial_data(MollifiedDirac(10.0, 0.1), g, 1)
    a = evolve(f0, StepperConfig(0.2), 1.3, 1)
    b = evolve(f0, StepperConfig(0.2), 1.3, 1)
    assert np.array_equal(a.final.values, b.final.values) and a.times == b.times


def test_trajectory_csv_and_manifest(tmp_path):
    g = RadialGrid(2.0, 40)
    spec = MollifiedDirac(1.0, 0.2)
    cfg = StepperConfig(0.1)
    tr = evolve(make_initial_data(spec, g, 1), cfg, 1.3, 1)
    tr.to_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "t,sup,mass,grad_sup,dissipation"
    assert len(lines) == len(tr.times) + 1
    m = run_manifest(g, 1.3, 1, cfg, spec)
    write_manifest(m, tmp_path / "m.json")
    back = json.loads((tmp_path / "m.json").read_text())
    assert back["data"] == {"kind": "mollifieddirac", "k": 1.0, "eps": 0.2}
    assert back["dt_policy"]["dt_max"] == g.h


def test_large_solution_monotone_in_cap():
    g = RadialGrid(2.0, 200)
    with pytest.raises(ScheduleExhausted) as info:
        large_solution(0.2, g, 1.3, 1, cap_schedule=(10.0, 100.0, 1000.0), t_probe=0.1, tol=1e-12)
    sups = [row["sup"] for row in info.value.table]
    assert all(b >= a for a, b in zip(sups, sups[1:]))
    ls = large_solution(0.2, g, 1.3, 1, cap_schedule=(10.0, 100.0, 1000.0), t_probe=0.1, tol=11.0)
    assert ls.M == 100.0
    with pytest.raises(ValueError):
        large_solution(0.2, g, 1.3, 1, cap_schedule=(100.0, 10.0))


def test_large_solution_critical_decreases_with_eta():
    g = RadialGrid(2.0, 400)
    sups = []
    for eta in (0.4, 0.2, 0.1):
        try:
            ls = large_solution(eta, g, 1.5, 1, cap_schedule=(1e2, 1e3, 1e4), t_probe=0.1, tol=1e-2)
            sups.append(float(ls.field.values.max()))
        except ScheduleExhausted as exc:
            sups.append(exc.table[-1]["sup"])
    assert sups[0] > sups[1] > sups[2]
