import json
import math

import pytest

from vhj import experiments as ex
from vhj.experiments import ExperimentReport, SingularRun, Verdict


def small_cole_hopf(**kw):
    args = dict(ns=(50, 100), R=8.0, t_check=0.1)
    args.update(kw)
    return ex.exp_cole_hopf(**args)


def test_report_roundtrip_and_rejudge(tmp_path):
    rep = small_cole_hopf()
    path = rep.write(tmp_path)
    assert path.name == f"cole-hopf-{rep.content_hash}"
    assert (path / "report.json").exists() and (path / "errors.csv").exists()
    header = (path / "errors.csv").read_text().splitlines()[0]
    assert header.split(",")[:3] == ["n", "h", "error"]
    back = ExperimentReport.load(path)
    assert back.verdict == rep.verdict
    assert ex.rejudge(back) == rep.verdict
    assert back.content_hash == rep.content_hash


def test_rejudge_follows_tables():
    rep = small_cole_hopf()
    doctored = ExperimentReport(rep.scenario, rep.manifest,
                                {"errors": [dict(r, error=1.0) for r in rep.tables["errors"]]},
                                rep.verdict)
    assert ex.rejudge(doctored) == Verdict.FAIL


def test_hash_independent_of_workers():
    a = small_cole_hopf(workers=1)
    b = small_cole_hopf(workers=2)
    assert a.content_hash == b.content_hash
    assert json.dumps(a.tables, sort_keys=True) == json.dumps(b.tables, sort_keys=True)


def test_manifest_hash_key_order():
    assert ex.manifest_hash({"a": 1, "b": [1, 2]}) == ex.manifest_hash({"b": [1, 2], "a": 1})
    assert ex.manifest_hash({"a": 1}) != ex.manifest_hash({"a": 2})


def test_cole_hopf_t0_zero_error():
    rep = small_cole_hopf(t_check=0.0)
    assert all(r["error"] == 0.0 for r in rep.tables["errors"])
    assert rep.verdict == Verdict.PASS


def test_cole_hopf_error_ratio_about_two():
    rep = ex.exp_cole_hopf(ns=(100, 200, 400))
    e = [r["error"] for r in rep.tables["errors"]]
    for a, b in zip(e, e[1:]):
        assert 1.6 <= a / b <= 2.5


def test_removability_k0_is_zero():
    rep = ex.exp_removability(k=0.0, eps_ladder=(0.2, 0.1))
    assert all(r["window_sup"] == 0.0 for r in rep.tables["window"])
    assert rep.verdict == Verdict.INDETERMINATE


def test_removability_at_critical_q_allowed():
    rep = ex.exp_removability(q=1.5, eps_ladder=(0.2, 0.1), R=6.0)
    m = [r["window_sup"] for r in rep.tables["window"]]
    assert m[1] < m[0]


def test_removability_rejects_subcritical():
    with pytest.raises(ValueError):
        ex.exp_removability(q=1.3)
    with pytest.raises(ValueError):
        ex.exp_removability(cells_per_eps=2)


def test_vss_convergence_short_ladder_indeterminate():
    rep = ex.exp_vss_convergence(k_ladder=(1.0, 10.0), t_probes=(0.5,), eps=0.1, R=6.0)
    assert rep.verdict == Verdict.INDETERMINATE
    assert all(r["min_diff"] >= 0 for r in rep.tables["monotonicity"])
    with pytest.raises(ValueError):
        ex.exp_vss_convergence(q=1.6)


def test_vss_small_k_near_zero():
    rep = ex.exp_vss_convergence(k_ladder=(1e-6, 1e-3, 1.0), t_probes=(0.5,), eps=0.1, R=6.0)
    assert rep.tables["cauchy"][0]["sup_diff"] < 1e-3


def test_dichotomy_single_point_indeterminate():
    rep = ex.exp_dichotomy_scan(q_grid=(1.3,), k=10.0, R=4.0, t_probe=0.1)
    assert rep.verdict == Verdict.INDETERMINATE


def test_dichotomy_n2_brackets_critical():
    rep = ex.exp_dichotomy_scan(N=2, q_grid=(1.25, 1.32, 1.35, 1.4), k=10.0, eps=0.1, R=4.0,
                                t_probe=0.1)
    assert rep.verdict == Verdict.PASS
    flips = [(a["q"], b["q"]) for a, b in zip(rep.tables["scan"], rep.tables["scan"][1:])
             if a["vss_exists"] != b["vss_exists"]]
    assert flips == [(1.32, 1.35)]


def test_dirichlet_rejects_degenerate():
    with pytest.raises(ValueError):
        ex.exp_dirichlet_vss(R=1.0, n=100, eta_ladder=(0.99,))
    with pytest.raises(ValueError):
        ex.exp_dirichlet_vss(q=1.6)
    with pytest.raises(ValueError):
        ex.exp_dirichlet_vss(n=100, eps=0.2, eta_ladder=(0.1,))


def test_dirichlet_small_run_ordered():
    rep = ex.exp_dirichlet_vss(R=1.0, n=200, k_ladder=(1e2, 1e3), eta_ladder=(0.1, 0.05),
                               cap_schedule=(1e6, 1e7), t_probe=0.05)
    p = rep.tables["pair"][0]
    assert p["data_ordered"]
    assert p["min_upper_minus_lower"] >= -1e-12 * p["upper_sup"]
    assert {"k", "sup", "rel_diff"} <= set(rep.tables["lower"][0])


def test_c_hat():
    assert ex.c_hat([0.0, 1.0], [5.0, 2.0], 2.0) == pytest.approx(1.0)
    assert ex.c_hat([0.0, 0.5], [0.0, 0.0], 1.3) == 0.0


def test_universal_bounds_zero_data():
    run = SingularRun("zero", q=1.3, k=0.0, eps=0.2, R=4.0, n=80, t_end=0.1)
    rep = ex.exp_universal_bounds((run,))
    assert all(r["c_hat"] == 0.0 for r in rep.tables["bounds"])
    assert rep.verdict == Verdict.PASS


def test_universal_bounds_ball_columns():
    run = SingularRun("ball", q=1.3, k=100.0, eps=0.1, R=1.0, n=40, t_end=0.1, ball=True)
    rep = ex.exp_universal_bounds((run,))
    rows = rep.tables["bounds"]
    assert [r["n"] for r in rows] == [40, 80]
    assert all(math.isfinite(r["c_hat_dist"]) for r in rows)


def test_singular_run_kind_validated():
    with pytest.raises(ValueError):
        SingularRun("x", q=1.3, kind="gaussian").data()


def test_subsolution_zero_data():
    rep = ex.exp_subsolution_transform(zero_data=True, n=100, t_end=0.1)
    assert rep.tables["stats"][0]["positive_nodes"] == 0
    assert rep.verdict == Verdict.PASS


def test_subsolution_eta_stress_recorded():
    rep = ex.exp_subsolution_transform(eta=0.95, n=100, t_end=0.2)
    s = rep.tables["stats"][0]
    assert s["tol"] == pytest.approx(1e-4 * s["scale"])
    assert rep.verdict in (Verdict.PASS, Verdict.FAIL)


def test_subsolution_validation():
    with pytest.raises(ValueError):
        ex.exp_subsolution_transform(q=1.5)
    with pytest.raises(ValueError):
        ex.exp_subsolution_transform(N=2, k_exp=2.5)
    with pytest.raises(ValueError):
        ex.exp_subsolution_transform(eta=1.0)


def test_every_scenario_has_judge():
    assert set(ex.SCENARIOS) == set(ex.JUDGES)
