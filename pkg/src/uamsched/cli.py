"""Command-line interface.

Subcommands: gen-scenarios, run, compare, export-demos, replay. All
configuration is explicit (no environment variables). Exit codes: 0 success,
1 error, 2 usage, 3 constraint violation detected during a run.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .ga import GAParams
from .harness import (
    ExperimentResult,
    ReplayError,
    compare,
    export_demonstrations,
    replay,
    run_experiment,
)
from .scenario import GenTemplate, ScenarioFormatError, gen_scenarios, paper_template, toy_template
from .model import ScenarioConfig

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATION = 3


def _template_from_args(args: argparse.Namespace) -> GenTemplate:
    tpl = toy_template() if args.preset == "toy" else paper_template()
    if args.template:
        overrides = json.loads(Path(args.template).read_text())
        cfg_fields = {f for f in ScenarioConfig.__dataclass_fields__}
        cfg_over = {k: v for k, v in overrides.items() if k in cfg_fields}
        tpl_over = {k: v for k, v in overrides.items()
                    if k in GenTemplate.__dataclass_fields__ and k != "config"}
        unknown = set(overrides) - cfg_over.keys() - tpl_over.keys()
        if unknown:
            raise ScenarioFormatError(f"unknown template fields: {sorted(unknown)}")
        tpl = replace(tpl, config=replace(tpl.config, **cfg_over), **tpl_over)
    return tpl


def _ga_params_from_args(args: argparse.Namespace) -> GAParams:
    return GAParams(
        population=args.pop,
        max_iterations=args.iters,
        mutation_prob=args.mut,
        elite_ratio=args.elite,
        crossover_prob=args.cx,
        batch_size=args.batch,
    )


def _add_ga_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--pop", type=int, default=100, help="GA population size")
    parser.add_argument("--iters", type=int, default=100, help="GA max iterations")
    parser.add_argument("--mut", type=float, default=0.1, help="mutation probability")
    parser.add_argument("--elite", type=float, default=0.01, help="elite ratio")
    parser.add_argument("--cx", type=float, default=0.5, help="crossover probability")
    parser.add_argument("--batch", type=int, default=60, help="decisions per batch")


def _scenario_files(spec: str) -> list[Path]:
    path = Path(spec)
    if path.is_dir():
        files = sorted(path.glob("scenario_*.json"))
    else:
        files = sorted(path.parent.glob(path.name))
    if not files:
        raise FileNotFoundError(f"no scenario files match {spec}")
    return files


def cmd_gen_scenarios(args: argparse.Namespace) -> int:
    paths = gen_scenarios(args.n, args.seed, _template_from_args(args),
                          args.out, split=args.split)
    print(f"wrote {len(paths)} scenario files to {args.out}")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    files = _scenario_files(args.scenarios)
    result = run_experiment(
        args.policy,
        files,
        ga_params=_ga_params_from_args(args),
        input_dir=args.input_dir,
        workers=args.workers,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result.save(out / f"results_{args.policy}.json")
    result.write_csv(out / f"records_{args.policy}.csv")

    agg = result.aggregate()
    print(f"policy={args.policy} episodes={agg['episodes']} "
          f"failures={agg['failures']} mean_profit=${agg['mean_profit']:.2f} "
          f"std=${agg['std_profit']:.2f} idle={agg['mean_idle_decisions']:.1f} "
          f"flight={agg['mean_flight_decisions']:.1f} "
          f"wall={agg['total_wall_seconds']:.2f}s")
    for r in result.records:
        if r.error:
            print(f"  {r.scenario_id}: {r.error}", file=sys.stderr)
    violations = [r for r in result.records
                  if r.error and "ConstraintViolation" in r.error]
    if violations:
        return EXIT_VIOLATION
    return EXIT_OK if agg["failures"] == 0 else EXIT_ERROR


def cmd_compare(args: argparse.Namespace) -> int:
    res_a = ExperimentResult.load(args.a)
    res_b = ExperimentResult.load(args.b)
    cmp = compare(res_a, res_b)
    print(f"{cmp.policy_a} vs {cmp.policy_b} over {len(cmp.deltas)} scenarios")
    print(f"{'scenario':<24} {'delta ($)':>12}")
    for sid, d in zip(cmp.scenario_ids, cmp.deltas):
        print(f"{sid:<24} {d:>12.2f}")
    print(f"wins: {cmp.policy_a}={cmp.a_wins} {cmp.policy_b}={cmp.b_wins}")
    if cmp.ttest.degenerate:
        print("paired t-test: degenerate (zero-variance deltas)")
    else:
        print(f"paired t-test: t={cmp.ttest.t:.4f} p={cmp.ttest.p:.6g} "
              f"dof={cmp.ttest.dof}")
    if args.out:
        Path(args.out).write_text(json.dumps(cmp.to_dict(), indent=2) + "\n")
    return EXIT_OK


def cmd_export_demos(args: argparse.Namespace) -> int:
    files = _scenario_files(args.scenarios)
    manifest = export_demonstrations(args.policy, files, args.out,
                                     ga_params=_ga_params_from_args(args))
    total = sum(m["decisions"] for m in manifest)
    print(f"wrote {len(manifest)} demonstration files ({total} decisions) to {args.out}")
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    log = replay(args.file, scenario_path=args.scenario)
    from .simulator import profit

    rev, op, elec, z = profit(log)
    print(f"replayed {args.file}: decisions={len(log.decisions)} "
          f"revenue=${rev:.2f} op_cost=${op:.2f} elec=${elec:.2f} profit=${z:.2f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uamsched",
        description="UAM fleet scheduling simulator, GA scheduler, and experiment harness",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen-scenarios", help="generate seeded scenario files")
    p.add_argument("--n", type=int, required=True, help="number of scenarios")
    p.add_argument("--seed", type=int, required=True, help="master seed (fixes the world)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--split", choices=["seen", "unseen"], default="seen")
    p.add_argument("--preset", choices=["paper", "toy"], default="paper")
    p.add_argument("--template", help="JSON file of template/config overrides")
    p.set_defaults(func=cmd_gen_scenarios)

    p = sub.add_parser("run", help="run one policy over a scenario set")
    p.add_argument("--policy", required=True,
                   choices=["ga", "greedy", "random", "replay", "external"])
    p.add_argument("--scenarios", required=True,
                   help="scenario directory or glob pattern")
    p.add_argument("--out", required=True, help="output directory for results")
    p.add_argument("--input-dir", default=None,
                   help="replay/demo files for the replay and external policies")
    p.add_argument("--workers", type=int, default=1)
    _add_ga_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="per-scenario profit deltas and paired t-test")
    p.add_argument("--a", required=True, help="results JSON of policy A")
    p.add_argument("--b", required=True, help="results JSON of policy B")
    p.add_argument("--out", default=None, help="optional comparison JSON output")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("export-demos", help="export expert demonstration files")
    p.add_argument("--policy", default="ga",
                   choices=["ga", "greedy", "random"])
    p.add_argument("--scenarios", required=True)
    p.add_argument("--out", required=True)
    _add_ga_flags(p)
    p.set_defaults(func=cmd_export_demos)

    p = sub.add_parser("replay", help="re-execute and verify a replay file")
    p.add_argument("--file", required=True)
    p.add_argument("--scenario", default=None,
                   help="optional scenario file to check against the recording")
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args))
    except (ReplayError, ScenarioFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
