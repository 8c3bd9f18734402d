"""Check the weak cut property and run agreement simulations from the command line.

Exit codes: 0 success, 1 input or resource error, 2 a checked property
failed (cut violation, or agreement/validity failures in a run or sweep),
3 the impossibility demo showed the expected failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .agreement import AgreementConfig
from .checker import check_weak_cut_property, condition_flags
from .errors import ConfigurationError, DomainError, ParseError, ResourceLimitError, SimulationError
from .faults import DEFAULT_MAX_SUBSETS, FaultModel
from .graph import load_graph
from .harness import EXIT_INPUT, EXIT_OK, EXIT_VIOLATION, default_config, demo_impossibility, simulate, sweep
from .jsonio import pretty_dumps, read_json
from .adversary import SWEEPABLE
from .sim import Scenario

log = logging.getLogger("weakcut")


def _load_model(path) -> FaultModel:
    data, _ = read_json(path)
    if isinstance(data, dict) and "fault_model" in data and "kind" not in data:
        data = data["fault_model"]
    return FaultModel.from_dict(data, str(path))


def _load_scenario(path, require_inputs=True) -> Scenario:
    data, _ = read_json(path)
    return Scenario.from_dict(data, str(path), require_all=require_inputs)


def _load_config(path, g, m) -> AgreementConfig:
    if path is None:
        return default_config(g, m)
    data, _ = read_json(path)
    return AgreementConfig.from_dict(data, str(path))


def _emit_report(report, args):
    if getattr(args, "summary", False):
        sys.stderr.write(report.summary())
    _emit(report.to_dict(), args.out)


def _emit(obj, out):
    text = pretty_dumps(obj)
    if out:
        Path(out).write_text(text, encoding="ascii")
    else:
        sys.stdout.write(text)


def cmd_check(args) -> int:
    g = load_graph(args.graph)
    m = _load_model(args.fault_model)
    verdict = check_weak_cut_property(g, m, args.max_subsets)
    report = {"verdict": verdict.to_dict(), "conditions": condition_flags(g, m, args.max_subsets)}
    if args.summary:
        sys.stderr.write(f"check: verdict {verdict.status}\n")
    _emit(report, args.out)
    return EXIT_OK if verdict.passed else EXIT_VIOLATION


def cmd_simulate(args) -> int:
    sc = _load_scenario(args.scenario)
    if sc.adversary.startswith("theorem1"):
        cfg = _load_config(args.config, sc.graph, sc.fault_model)
        report, result = demo_impossibility(sc.graph, sc.fault_model, cfg, args.max_subsets)
        _write_chain_transcripts(result, args.transcripts)
        _emit_report(report, args)
        return report.exit_code()
    sc.validate()
    cfg = _load_config(args.config, sc.graph, sc.fault_model)
    report, transcript = simulate(sc, cfg, args.max_subsets)
    if args.transcripts:
        _write_transcript(transcript, Path(args.transcripts))
    _emit_report(report, args)
    return report.exit_code()


def cmd_sweep(args) -> int:
    data, _ = read_json(args.template)
    sc = Scenario.from_dict(dict(data, inputs=data.get("inputs", {})), str(args.template), require_all=False)
    fixed = sc.inputs or None
    cfg = _load_config(args.config, sc.graph, sc.fault_model)
    adversaries = tuple(a for a in args.adversaries.split(",") if a) if args.adversaries else SWEEPABLE
    report = sweep(sc.graph, sc.fault_model, cfg, adversaries, fixed, args.symmetry,
                   args.all_placements, sc.seed, sc.adversary_params, args.max_subsets)
    agg = report.aggregates()
    log.info("%d runs, %d agreement failures, %d validity failures",
             agg["runs"], agg["agreement_failures"], agg["validity_failures"])
    _emit_report(report, args)
    return report.exit_code()


def cmd_demo(args) -> int:
    g = load_graph(args.graph)
    m = _load_model(args.fault_model)
    cfg = _load_config(args.config, g, m)
    report, result = demo_impossibility(g, m, cfg, args.max_subsets)
    _write_chain_transcripts(result, args.transcripts)
    _emit_report(report, args)
    return report.exit_code()


def _write_transcript(transcript, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(pretty_dumps(transcript.to_dict()), encoding="ascii")


def _write_chain_transcripts(result, directory):
    if not directory:
        return
    for phase, outcome in result.outcomes.items():
        _write_transcript(outcome.transcript, Path(directory) / f"{phase}.json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weakcut", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--max-subsets", type=int, default=DEFAULT_MAX_SUBSETS,
                       help="bound on any exhaustive subset enumeration (default %(default)s)")
        p.add_argument("--summary", action="store_true", help="also print a short plain-text summary to stderr")

    p = sub.add_parser("check", help="decide the weak cut property for a graph and fault model")
    p.add_argument("graph")
    p.add_argument("fault_model")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate", help="run one scenario")
    p.add_argument("scenario")
    p.add_argument("config", nargs="?", help="agreement config JSON (default: EIG with the model's fault bound)")
    p.add_argument("--transcripts", help="where to write the transcript JSON (a directory for the chain demo)")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="sweep placements, adversaries and inputs")
    p.add_argument("template", help="scenario JSON; byzantine is ignored, inputs are swept unless given")
    p.add_argument("config", nargs="?")
    p.add_argument("--adversaries", help=f"comma separated subset of {','.join(SWEEPABLE)}")
    p.add_argument("--symmetry", action="store_true",
                   help="sweep honest inputs only; Byzantine shadow inputs are fixed to 0")
    p.add_argument("--all-placements", action="store_true",
                   help="sweep every valid Byzantine set, not only the maximal ones")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("demo-impossibility", help="run the three-execution chain on a violated cut")
    p.add_argument("graph")
    p.add_argument("fault_model")
    p.add_argument("config", nargs="?")
    p.add_argument("--transcripts", help="directory for the three transcripts")
    common(p)
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ParseError, ConfigurationError, DomainError, ResourceLimitError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except SimulationError as exc:
        sys.stderr.write(f"simulation error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
