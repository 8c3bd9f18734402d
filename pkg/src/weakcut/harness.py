"""Batch experiments: single runs, placement sweeps and the impossibility demo.

Every function here returns a plain-JSON report whose aggregates can be
recomputed from its per-run records, and the CLI maps each report to an
exit code without looking at anything else.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .adversary import SWEEPABLE
from .agreement import AgreementConfig, run_configured
from .chain import run_theorem1_chain
from .checker import check_weak_cut_property, condition_flags
from .errors import ConfigurationError, ResourceLimitError
from .faults import DEFAULT_MAX_SUBSETS, FaultModel, enumerate_maximal_fault_sets, enumerate_valid_fault_sets
from .graph import Graph
from .jsonio import digest
from .sim import Scenario

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VIOLATION = 2
EXIT_DEMO = 3


@dataclass
class RunReport:
    kind: str
    scenario_digest: str
    config: dict
    verdict: dict
    conditions: dict
    runs: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def aggregates(self) -> dict:
        return {
            "runs": len(self.runs),
            "agreement_failures": sum(1 for r in self.runs if not r["agreement_holds"]),
            "validity_failures": sum(1 for r in self.runs if not r["validity_holds"]),
        }

    @property
    def failures(self) -> int:
        return sum(1 for r in self.runs if not (r["agreement_holds"] and r["validity_holds"]))

    def exit_code(self) -> int:
        if self.kind == "demo-impossibility":
            chain = self.extra["chain"]
            shown = chain["u_views_equal"] and chain["v_views_equal"] and self.failures > 0
            return EXIT_DEMO if shown else EXIT_VIOLATION
        return EXIT_OK if self.failures == 0 else EXIT_VIOLATION

    def summary(self) -> str:
        agg = self.aggregates()
        lines = [f"{self.kind}: verdict {self.verdict['status']}",
                 f"runs {agg['runs']}, agreement failures {agg['agreement_failures']}, "
                 f"validity failures {agg['validity_failures']}"]
        if "chain" in self.extra:
            chain = self.extra["chain"]
            lines.append(f"U-side views equal: {chain['u_views_equal']}, "
                         f"V-side views equal: {chain['v_views_equal']}")
        lines.append(f"exit code {self.exit_code()}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "scenario_digest": self.scenario_digest,
            "config": self.config,
            "verdict": self.verdict,
            "conditions": self.conditions,
            "aggregates": self.aggregates(),
            "runs": self.runs,
        }
        out.update(self.extra)
        return out


def default_config(g: Graph, m: FaultModel) -> AgreementConfig:
    return AgreementConfig("eig_over_flood", m.max_fault_count(g.nodes))


def _run_record(sc: Scenario, outcome, with_digest: bool) -> dict:
    rec = {
        "byzantine": sorted(sc.byzantine),
        "adversary": sc.adversary if sc.byzantine else "none",
        "inputs": "".join(str(sc.inputs[v]) for v in sc.graph.nodes),
        "decisions": {k: outcome.decisions[k] for k in sorted(outcome.decisions)},
        "agreement_holds": outcome.agreement_holds,
        "validity_holds": outcome.validity_holds,
    }
    if with_digest and outcome.transcript is not None:
        rec["transcript_digest"] = outcome.transcript.digest()
    return rec


def _header(kind: str, g: Graph, m: FaultModel, cfg: AgreementConfig, scenario_obj: dict,
            max_subsets: int) -> RunReport:
    verdict = check_weak_cut_property(g, m, max_subsets)
    return RunReport(kind, digest(scenario_obj), cfg.to_dict(), verdict.to_dict(),
                     condition_flags(g, m, max_subsets))


def simulate(sc: Scenario, cfg: AgreementConfig, max_subsets: int = DEFAULT_MAX_SUBSETS):
    """One run. Returns (report, transcript)."""
    sc.validate()
    report = _header("simulate", sc.graph, sc.fault_model, cfg, sc.to_dict(), max_subsets)
    outcome = run_configured(sc, cfg, record=True)
    report.runs.append(_run_record(sc, outcome, True))
    return report, outcome.transcript


def placements(g: Graph, m: FaultModel, all_placements: bool = False,
               max_subsets: int = DEFAULT_MAX_SUBSETS) -> list:
    """Byzantine sets to sweep: the maximal valid sets, or every valid set."""
    if all_placements:
        return list(enumerate_valid_fault_sets(m, g.nodes, max_subsets))
    return list(enumerate_maximal_fault_sets(m, g.nodes, max_subsets))


def input_assignments(g: Graph, byzantine: frozenset, fixed: Optional[dict], symmetry: bool,
                      max_subsets: int) -> Iterable[dict]:
    """Input maps in counting order (bit i of the counter goes to the i-th node)."""
    if fixed:
        yield dict(fixed)
        return
    free = [v for v in g.nodes if not (symmetry and v in byzantine)]
    if (1 << len(free)) > max_subsets:
        raise ResourceLimitError(f"input sweep over {len(free)} nodes", max_subsets)
    for x in range(1 << len(free)):
        inputs = {v: 0 for v in g.nodes}
        for i, v in enumerate(free):
            inputs[v] = (x >> i) & 1
        yield inputs


def sweep(g: Graph, m: FaultModel, cfg: AgreementConfig, adversaries=SWEEPABLE,
          fixed_inputs: Optional[dict] = None, symmetry: bool = False, all_placements: bool = False,
          seed: int = 0, adversary_params: Optional[dict] = None,
          max_subsets: int = DEFAULT_MAX_SUBSETS) -> RunReport:
    """Placements x adversaries x inputs, in that nesting order."""
    for name in adversaries:
        if name not in SWEEPABLE:
            raise ConfigurationError(f"adversary {name!r} cannot be swept")
    template = {"graph": g.to_dict(), "fault_model": m.to_dict(), "seed": seed}
    if fixed_inputs:
        template["inputs"] = {k: fixed_inputs[k] for k in sorted(fixed_inputs)}
    report = _header("sweep", g, m, cfg, template, max_subsets)
    report.extra["sweep"] = {
        "adversaries": list(adversaries),
        "symmetry": symmetry,
        "all_placements": all_placements,
    }
    params = dict(adversary_params or {})
    for byz in placements(g, m, all_placements, max_subsets):
        names = list(adversaries) if byz else ["silent"]
        for name in names:
            for inputs in input_assignments(g, byz, fixed_inputs, symmetry, max_subsets):
                sc = Scenario(g, m, byz, inputs, name, params, seed)
                outcome = run_configured(sc, cfg, record=False)
                report.runs.append(_run_record(sc, outcome, False))
    return report


def demo_impossibility(g: Graph, m: FaultModel, cfg: Optional[AgreementConfig] = None,
                       max_subsets: int = DEFAULT_MAX_SUBSETS):
    """The three-execution chain on the checker's witness. Returns (report, chain result)."""
    verdict = check_weak_cut_property(g, m, max_subsets)
    if verdict.passed:
        raise ConfigurationError("the weak cut property holds; there is no witness to build the chain on")
    cfg = cfg or default_config(g, m)
    report = _header("demo-impossibility", g, m, cfg, {"graph": g.to_dict(), "fault_model": m.to_dict()},
                     max_subsets)
    result = run_theorem1_chain(g, m, verdict, cfg)
    for phase in ("alpha00", "beta01", "alpha11"):
        outcome = result.outcomes[phase]
        t = outcome.transcript
        rec = {
            "phase": phase,
            "byzantine": sorted(t.byzantine),
            "adversary": f"theorem1-{phase}",
            "decisions": {k: outcome.decisions[k] for k in sorted(outcome.decisions)},
            "agreement_holds": outcome.agreement_holds,
            "validity_holds": outcome.validity_holds,
            "transcript_digest": result.digests[phase],
        }
        report.runs.append(rec)
    report.extra["chain"] = {
        "u_side": sorted(result.u_side),
        "v_side": sorted(result.v_side),
        "u_views_equal": result.u_views_equal,
        "v_views_equal": result.v_views_equal,
    }
    return report, result

