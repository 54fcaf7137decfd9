import csv
import io
from dataclasses import replace

import pytest

from adapters.output.json_sink import load_reports
from config.config_loader import RunConfig
from core.errors import ContourTail
from core.orchestrator import EXIT_ENGINE_ERROR, EXIT_FAILED, EXIT_OK, RecipOrchestrator, compute, exit_code_for, run_suites
from core.reports import create_report
from core.suites import SUITES, Suite, SuiteContext, schedule
from main import build_parser


def _run_config(**overrides):
    fields = dict(suites=("gamma", "crt"), primes=((2, 3),), s_values=(1.5 + 0j,), n_max=2000, mn_cap=1000,
                  suite_options={"crt": {"samples": 50, "c_max": 30}})
    fields.update(overrides)
    return RunConfig(**fields)


def test_schedule_puts_primitives_first():
    names = [entry.name for entry in schedule(["reciprocity", "gamma", "sieve", "gamma"])]
    assert names[0] == "gamma"
    assert set(names) == {"gamma", "sieve", "reciprocity"}
    assert len(schedule(["all"])) == len(SUITES)
    with pytest.raises(ValueError):
        schedule(["nope"])


def test_run_suites_passing():
    code, reports = run_suites(_run_config())
    assert code == EXIT_OK
    assert {r.identity for r in reports} >= {"gamma/reflection", "gamma/recurrence", "crt"}
    gamma = [r for r in reports if r.identity.startswith("gamma")]
    assert all(r.params["height"] == 30.0 for r in gamma)


def test_engine_error_becomes_an_error_report(monkeypatch):
    def boom(ctx):
        raise ContourTail("amplitude not decayed", xi=1.0)

    monkeypatch.setitem(SUITES, "boom", Suite(name="boom", rank=0, runner=boom))
    code, reports = run_suites(_run_config(suites=("boom", "gamma")))
    assert code == EXIT_ENGINE_ERROR
    errors = [r for r in reports if r.error is not None]
    assert [r.identity for r in errors] == ["boom"]
    assert errors[0].error["kind"] == "ContourTail"
    assert all(r.passed for r in reports if r.identity.startswith("gamma"))


def test_exit_code_for():
    failing = create_report("x", 1.0, 2.0, 0.0, 1e-3)
    passing = create_report("y", 1.0, 1.0, 0.0, 1e-3)
    assert exit_code_for([passing, failing]) == EXIT_FAILED
    assert exit_code_for([passing]) == EXIT_OK


def test_orchestrator_writes_json(tmp_path, table_cache):
    config = {"output": {"sinks": []}, "recip_home": str(tmp_path)}
    orchestrator = RecipOrchestrator(config, _run_config(suites=("gamma",), json_path="out.json"))
    assert orchestrator.run() == EXIT_OK
    reports = load_reports(str(tmp_path / "out.json"))
    assert all(r.passed for r in reports)


def test_tabulate_tau(tmp_path, table_cache):
    config = {"output": {"sinks": []}, "recip_home": str(tmp_path)}
    assert RecipOrchestrator(config, _run_config(csv_path="tau.csv")).tabulate_tau(30) == EXIT_OK
    with open(tmp_path / "tau.csv", newline="") as f:
        rows = list(csv.reader(f))
    assert len(rows) == 31
    assert rows[1][:2] == ["1", "1"]
    assert RecipOrchestrator(config, _run_config()).tabulate_tau(0) == EXIT_FAILED


def test_tabulate_tau_defaults_to_stdout(tmp_path, table_cache, capsys):
    config = {"output": {"sinks": []}, "recip_home": str(tmp_path)}
    assert RecipOrchestrator(config, _run_config()).tabulate_tau(100) == EXIT_OK
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["n", "tau", "lambda"]
    assert len(rows) == 101
    assert rows[100][0] == "100"
    assert not list(tmp_path.iterdir())


def test_compute_kinds():
    run = _run_config()
    assert compute("kloosterman", run, a=1, b=1, c=3)["value"] == pytest.approx(-1.0)
    mellin = compute("mellin", run, u=1 + 0j)
    assert mellin["value"]["re"] == pytest.approx(360.0)
    assert mellin["mellin_quadrature"]["re"] == pytest.approx(360.0, rel=1e-8)
    assert mellin["gap"] < 1e-8 * 360.0
    assert compute("phi-h", run, ell=12)["value"] != 0
    with pytest.raises(ValueError):
        compute("zeta", run)


def test_phi_cap_honours_the_requested_contour():
    run = _run_config()
    chosen = compute("phi-cap", run, x=3.2, s=1.5 + 0j)
    forced = compute("phi-cap", run, x=3.2, s=1.5 + 0j, xi=2.0)
    assert forced["contour"]["xi"] == 2.0
    assert "tail_estimate" in forced["contour"]
    # Phi non dipende dall'ascissa dentro la finestra senza poli
    assert forced["value"]["re"] == pytest.approx(chosen["value"]["re"], rel=1e-6, abs=1e-9)


def test_verify_flags_reach_the_run_config(monkeypatch):
    monkeypatch.delenv("RECIP_THREADS", raising=False)
    args = build_parser().parse_args([
        "verify", "reciprocity", "--p", "2", "--q", "3", "--s", "1.5", "--function", "gauss13",
        "--cmax", "600", "--rel-tol", "1e-3", "--json", "out.json",
    ])
    assert (args.c_max, args.rel_tol, args.json, args.test_function) == (600, 1e-3, "out.json", "gauss13")
    assert build_parser().parse_args(["verify", "gamma", "--c-max", "40"]).c_max == 40
    assert build_parser().parse_args(["tabulate", "tau", "--nmax", "100"]).csv is None
    assert build_parser().parse_args(["compute", "phi-cap", "--x", "3.2", "--xi", "2"]).xi == 2.0


def test_lfe_and_dgfe_run_on_the_requested_twist(hecke_table):
    from config.config_loader import parse_config

    config = {"coeffs": {"weight": 12, "n_max": hecke_table.n_max}, "engine": {"mn_cap": 1000}}
    run = parse_config(config, {"suites": ["lfe", "dgfe"], "c": 5, "d": 2, "a": 2, "b": 3, "s": ["0.5+1i"]})
    code, reports = run_suites(run, SuiteContext(config=run, _table=hecke_table))
    assert code == EXIT_OK, reports
    lfe = [r for r in reports if r.identity.startswith("lfe")]
    dgfe = [r for r in reports if r.identity.startswith("dgfe")]
    assert {(r.params["c"], r.params["d"]) for r in lfe} == {(5, 2)}
    assert [r.params["s"] for r in lfe if r.identity == "lfe"] == ["(0.5+1j)"]
    assert {(r.params["a"], r.params["b"], r.params["c"]) for r in dgfe} == {(2, 3, 5)}


@pytest.mark.slow
def test_sabotaged_reciprocity_exits_with_failure(full_hecke_table, table_cache):
    run = _run_config(suites=("reciprocity",), n_max=full_hecke_table.n_max, mn_cap=100_000, c_max=300,
                      rel_tol=1e-3)
    honest, _ = run_suites(run, SuiteContext(config=run, _table=full_hecke_table))
    sabotaged_run = replace(run, sabotage=True)
    code, reports = run_suites(sabotaged_run, SuiteContext(config=sabotaged_run, _table=full_hecke_table))
    assert honest == EXIT_OK
    assert code == EXIT_FAILED
    assert [r.identity for r in reports] == ["reciprocity"]
    assert reports[0].params["sabotage"] is True
