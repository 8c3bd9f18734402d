import json
import subprocess
import sys
from pathlib import Path

import pytest

from weakcut import fixtures as fx
from weakcut.agreement import AgreementConfig
from weakcut.cli import main
from weakcut.faults import FaultModel
from weakcut.harness import EXIT_DEMO, EXIT_INPUT, EXIT_OK, EXIT_VIOLATION, sweep
from weakcut.jsonio import canonical_dumps, digest, pretty_dumps
from weakcut.sim import Scenario

SCEN = Path(__file__).resolve().parent.parent / "scenarios"


def exit_code_of(report: dict) -> int:
    """Recomputes the exit code from nothing but the report."""
    runs = report["runs"]
    failures = sum(1 for r in runs if not (r["agreement_holds"] and r["validity_holds"]))
    if report["kind"] == "demo-impossibility":
        c = report["chain"]
        return EXIT_DEMO if c["u_views_equal"] and c["v_views_equal"] and failures else EXIT_VIOLATION
    return EXIT_OK if failures == 0 else EXIT_VIOLATION


def assert_consistent(report: dict):
    runs = report["runs"]
    assert report["aggregates"] == {
        "runs": len(runs),
        "agreement_failures": sum(1 for r in runs if not r["agreement_holds"]),
        "validity_failures": sum(1 for r in runs if not r["validity_holds"]),
    }


def run_cli(tmp_path, *argv):
    out = tmp_path / "report.json"
    code = main([*map(str, argv), "--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


def test_check_pass_and_violation(tmp_path):
    code, rep = run_cli(tmp_path, "check", SCEN / "k43.graph.json", SCEN / "k43_per_side.model.json")
    assert code == EXIT_OK and rep["verdict"]["status"] == "pass"
    assert rep["conditions"]["majority_condition"] and not rep["conditions"]["classical_condition"]
    code, rep = run_cli(tmp_path, "check", SCEN / "k43.graph.json", SCEN / "threshold2.model.json")
    assert code == EXIT_VIOLATION
    w = rep["verdict"]["witness"]
    assert w["cut"] == {"members": list(fx.THREE_SIDE), "separated_witness": ["q0", "q1"]}
    assert w["part_a"] == ["p0", "p1"] and w["part_b"] == ["p2"]


def test_check_reports_bad_json_with_location(tmp_path, capsys):
    bad = tmp_path / "g.json"
    bad.write_text('{"nodes": ["a",\n "a"]}')
    assert main(["check", str(bad), str(SCEN / "threshold2.model.json")]) == EXIT_INPUT
    err = capsys.readouterr().err
    assert str(bad) in err and "line 2" in err
    bad.write_text("{nope")
    assert main(["check", str(bad), str(SCEN / "threshold2.model.json")]) == EXIT_INPUT
    assert main(["check", str(tmp_path / "missing.json"), str(SCEN / "threshold2.model.json")]) == EXIT_INPUT


def test_simulate_feasible_scenario(tmp_path):
    tdir = tmp_path / "t.json"
    code, rep = run_cli(tmp_path, "simulate", SCEN / "k43_per_side.scenario.json", "--transcripts", tdir)
    assert code == EXIT_OK and code == exit_code_of(rep)
    assert_consistent(rep)
    (run,) = rep["runs"]
    t = json.loads(tdir.read_text())
    assert run["transcript_digest"] == digest(t)


def test_simulate_chain_scenario_is_the_demo(tmp_path):
    tdir = tmp_path / "chain"
    code, rep = run_cli(tmp_path, "simulate", SCEN / "k43_threshold2.chain.json", "--transcripts", tdir)
    assert code == EXIT_DEMO == exit_code_of(rep)
    assert sorted(p.name for p in tdir.iterdir()) == ["alpha00.json", "alpha11.json", "beta01.json"]
    for r in rep["runs"]:
        assert r["transcript_digest"] == digest(json.loads((tdir / f"{r['phase']}.json").read_text()))


def test_simulate_rejects_invalid_byzantine_set(tmp_path, capsys):
    sc = json.loads((SCEN / "k43_per_side.scenario.json").read_text())
    sc["byzantine"] = ["q0", "q1"]
    code, rep = run_cli(tmp_path, "simulate", write(tmp_path, "s.json", sc))
    assert code == EXIT_INPUT and rep is None
    assert "not a valid fault set" in capsys.readouterr().err


def test_simulate_trusted_leader_and_unknown(tmp_path):
    code, rep = run_cli(tmp_path, "simulate", SCEN / "star_trusted.scenario.json", SCEN / "trusted_leader.config.json")
    assert code == EXIT_OK and rep["config"]["mode"] == "trusted_leader"
    code, rep = run_cli(tmp_path, "simulate", SCEN / "unknown_topology.scenario.json",
                        SCEN / "eig_f1_unknown.config.json")
    assert code == EXIT_OK and rep["config"]["graph_knowledge"] == "unknown"


def test_sweep_with_fixed_inputs_is_one_honest_run(tmp_path):
    code, rep = run_cli(tmp_path, "sweep", SCEN / "p3_honest.template.json")
    assert code == EXIT_OK
    assert rep["aggregates"]["runs"] == 1 and rep["runs"][0]["adversary"] == "none"


def test_sweep_counts_and_order(tmp_path):
    tpl = {"graph": fx.complete(4).to_dict(), "fault_model": {"kind": "threshold", "f": 1}}
    code, rep = run_cli(tmp_path, "sweep", write(tmp_path, "t.json", tpl), "--adversaries", "silent,equivocate")
    assert code == EXIT_OK
    assert rep["aggregates"]["runs"] == 4 * 2 * 16
    first = rep["runs"][:3]
    assert [(r["byzantine"], r["adversary"], r["inputs"]) for r in first] == [
        (["v0"], "silent", "0000"), (["v0"], "silent", "1000"), (["v0"], "silent", "0100")]
    code, rep = run_cli(tmp_path, "sweep", write(tmp_path, "t.json", tpl), "--adversaries", "silent", "--symmetry")
    assert rep["aggregates"]["runs"] == 4 * 8
    assert all(r["inputs"][int(r["byzantine"][0][1])] == "0" for r in rep["runs"])


def test_sweep_reports_failures_on_a_violation(tmp_path):
    g = fx.path(3)
    tpl = {"graph": g.to_dict(), "fault_model": {"kind": "threshold", "f": 1}}
    cfg = write(tmp_path, "c.json", {"mode": "eig_over_flood", "f": 0})
    code, rep = run_cli(tmp_path, "sweep", write(tmp_path, "t.json", tpl), cfg, "--adversaries", "silent")
    assert code == EXIT_VIOLATION == exit_code_of(rep)
    assert rep["aggregates"]["validity_failures"] > 0
    assert_consistent(rep)


def test_sweep_guard_names_the_bound(tmp_path, capsys):
    code, _ = run_cli(tmp_path, "sweep", SCEN / "k43_per_side.template.json", "--max-subsets", "5")
    assert code == EXIT_INPUT
    assert "5" in capsys.readouterr().err


def test_sweep_rejects_unknown_adversary(tmp_path):
    code, _ = run_cli(tmp_path, "sweep", SCEN / "p3_honest.template.json", "--adversaries", "theorem1-alpha00")
    assert code == EXIT_INPUT


def test_demo_on_a_pass_fixture_is_an_input_error(tmp_path):
    code, _ = run_cli(tmp_path, "demo-impossibility", SCEN / "k43.graph.json", SCEN / "k43_per_side.model.json")
    assert code == EXIT_INPUT


def test_demo_impossibility(tmp_path):
    code, rep = run_cli(tmp_path, "demo-impossibility", SCEN / "k43.graph.json", SCEN / "threshold2.model.json",
                        SCEN / "eig_f2.config.json")
    assert code == EXIT_DEMO
    assert rep["chain"]["u_side"] == ["q0"] and rep["chain"]["v_side"] == ["q1", "q2", "q3"]
    assert_consistent(rep)


def test_report_round_trips_canonically():
    g, m = fx.complete(4), FaultModel.threshold(1)
    rep = sweep(g, m, AgreementConfig(f=1), ("silent",), {v: 1 for v in g.nodes}).to_dict()
    text = canonical_dumps(rep)
    assert canonical_dumps(json.loads(text)) == text
    assert pretty_dumps(json.loads(pretty_dumps(rep))) == pretty_dumps(rep)
    assert rep["scenario_digest"] == digest({"graph": g.to_dict(), "fault_model": m.to_dict(), "seed": 0,
                                             "inputs": {v: 1 for v in g.nodes}})


def test_domain_types_round_trip_through_canonical_json():
    g = fx.unknown_topology()
    sc = Scenario(g, FaultModel.threshold(1, trusted=["top"]), frozenset({"red"}), {v: 1 for v in g.nodes},
                  "adjacency-lie", {"omit": ["blue"]}, 4)
    text = canonical_dumps(sc.to_dict())
    assert canonical_dumps(Scenario.from_dict(json.loads(text)).to_dict()) == text
    cfg = AgreementConfig("trusted_leader", 0, frozenset({"top"}))
    assert AgreementConfig.from_dict(json.loads(canonical_dumps(cfg.to_dict()))) == cfg


def test_summary_goes_to_stderr(tmp_path, capsys):
    run_cli(tmp_path, "check", SCEN / "k43.graph.json", SCEN / "threshold2.model.json", "--summary")
    assert "verdict violation" in capsys.readouterr().err
    run_cli(tmp_path, "sweep", SCEN / "p3_honest.template.json", "--summary")
    assert "runs 1" in capsys.readouterr().err


def test_module_entry_point_exit_codes():
    def code(*argv):
        return subprocess.run([sys.executable, "-m", "weakcut", *map(str, argv)], capture_output=True).returncode

    assert code("check", SCEN / "k43.graph.json", SCEN / "k43_per_side.model.json") == 0
    assert code("check", SCEN / "k43.graph.json", SCEN / "threshold2.model.json") == 2
    assert code("check", SCEN / "nope.json", SCEN / "threshold2.model.json") == 1


def test_usage_errors_exit_nonzero():
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 2
