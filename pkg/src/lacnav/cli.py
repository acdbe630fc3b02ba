"""Command-line harness: run experiments, compare policies, verify and plot
traces.

Exit codes: 0 success, 1 configuration or I/O error, 2 run hit the step cap,
3 trace verification found a violation.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from pathlib import Path

from . import config as cfgmod
from . import engine, metrics, scenarios, traceio
from .config import ConfigError, ExperimentConfig
from .plotting import render_trace

ENV_OUTPUT = "LACNAV_OUT"

RESULTS_FILE = "results.json"
TRACE_FILE = "trace.txt"
PLOT_FILE = "trajectories.svg"
COMPARE_FILE = "compare.csv"


def _fmt_opt(x: float | None) -> str:
    return "-" if x is None else f"{x:.4g}"


def _add_override_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--policy", choices=engine.POLICIES, help="override sim.policy")
    p.add_argument("--seed", type=int, help="override scenario and sim seeds")
    p.add_argument("--out", help="output directory (overrides config and env)")
    p.add_argument("--workers", type=int, default=1,
                   help="decision-phase threads (default 1)")
    p.add_argument("--zeta", type=float, help="penalty base")
    p.add_argument("--lam", type=float, help="relax factor")
    p.add_argument("--tau", type=float, help="risk look-ahead horizon")
    p.add_argument("--gamma", type=float, help="learner exploit mix")
    p.add_argument("--eta", type=float, help="learner win threshold")
    p.add_argument("--beta", type=float, help="learner exploration increment")
    p.add_argument("--window-t", type=int, help="learner window length")
    p.add_argument("--n-actions", type=int, help="actions per cell")
    p.add_argument("--penalty-angle-mode", choices=("symmetric", "literal"))
    p.add_argument("--max-steps", type=int)
    p.add_argument("--arrival-tol", type=float)
    p.add_argument("--emit-trace", action=argparse.BooleanOptionalAction,
                   default=None)
    p.add_argument("--emit-plot", action=argparse.BooleanOptionalAction,
                   default=None)


def _set(data: dict, path: str, value) -> None:
    parts = path.split(".")
    cur = data
    for part in parts[:-1]:
        cur = cur.setdefault(part, {})
    cur[parts[-1]] = value


def _apply_overrides(data: dict, args: argparse.Namespace) -> None:
    pairs = (
        ("policy", "sim.policy"),
        ("zeta", "sim.penalty.zeta"),
        ("lam", "sim.lac.lam"),
        ("tau", "sim.lac.tau"),
        ("gamma", "sim.learn.gamma"),
        ("eta", "sim.learn.eta"),
        ("beta", "sim.learn.beta"),
        ("window_t", "sim.learn.window_t"),
        ("n_actions", "sim.lac.n_actions"),
        ("penalty_angle_mode", "sim.penalty.angle_mode"),
        ("max_steps", "sim.max_steps"),
        ("arrival_tol", "sim.arrival_tol"),
        ("emit_trace", "emit.trace"),
        ("emit_plot", "emit.plot"),
    )
    for attr, path in pairs:
        v = getattr(args, attr, None)
        if v is not None:
            _set(data, path, v)
    if args.seed is not None:
        _set(data, "scenario.seed", args.seed)
        _set(data, "sim.seed", args.seed)
    if args.out is not None:
        _set(data, "output", args.out)
    elif "output" not in data and ENV_OUTPUT in os.environ:
        _set(data, "output", os.environ[ENV_OUTPUT])


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    path = Path(args.config)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError("top level: expected an object")
    _apply_overrides(data, args)
    return cfgmod.from_dict(data)


def _summary_line(cfg: ExperimentConfig, spec, trace, result) -> str:
    return (
        f"policy={cfg.sim.policy} scenario={spec.kind} n={spec.agent_count} "
        f"seed={cfg.sim.seed} termination={trace.termination} "
        f"ctime={_fmt_opt(result.completion_time_s)} "
        f"addr={_fmt_opt(result.addr)} adtr={_fmt_opt(result.adtr)} "
        f"ctime_p90={_fmt_opt(result.ctime_p90_s)}"
    )


def cmd_run(args: argparse.Namespace) -> int:
    try:
        cfg = _load_config(args)
        spec = cfg.build_scenario()
    except (ConfigError, scenarios.ScenarioError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1

    trace = engine.run(cfg.sim, spec, workers=max(1, args.workers))
    result = metrics.run_result(trace)

    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "schema_version": cfgmod.SCHEMA_VERSION,
        "policy": cfg.sim.policy,
        "scenario": {"kind": spec.kind, "agent_count": spec.agent_count,
                     "seed": spec.seed},
        "sim_seed": cfg.sim.seed,
        "termination": trace.termination,
        "n_steps": trace.n_steps,
        **result.to_dict(),
    }
    (out / RESULTS_FILE).write_text(
        json.dumps(payload, indent=2) + "\n", encoding="utf-8"
    )
    if cfg.emit.trace:
        traceio.write_trace(trace, out / TRACE_FILE)
    if cfg.emit.plot:
        traceio.write_trace(trace, out / TRACE_FILE)
        render_trace(traceio.read_trace(out / TRACE_FILE), out / PLOT_FILE)

    print(_summary_line(cfg, spec, trace, result))
    return 0 if trace.termination == "completed" else 2


def cmd_compare(args: argparse.Namespace) -> int:
    policies = [p for p in args.policies.split(",") if p]
    if not policies:
        print("config error: empty policy list", file=sys.stderr)
        return 1
    for p in policies:
        if p not in engine.POLICIES:
            print(f"config error: unknown policy {p!r}", file=sys.stderr)
            return 1
    seeds = [int(s) for s in args.seeds.split(",") if s]
    if not seeds:
        print("config error: empty seed list", file=sys.stderr)
        return 1

    try:
        cfg = _load_config(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1

    rows = []
    for policy in policies:
        for seed in seeds:
            sim = dataclasses.replace(cfg.sim, policy=policy, seed=seed)
            req = dataclasses.replace(cfg.scenario, seed=seed)
            run_cfg = dataclasses.replace(cfg, sim=sim, scenario=req)
            try:
                spec = run_cfg.build_scenario()
                trace = engine.run(sim, spec, workers=max(1, args.workers))
                result = metrics.run_result(trace)
                rows.append({
                    "policy": policy,
                    "seed": seed,
                    "status": trace.termination,
                    "ctime": result.completion_time_s,
                    "addr": result.addr,
                    "adtr": result.adtr,
                    "ctime_p90": result.ctime_p90_s,
                })
            except Exception as e:  # flag the run, keep going
                rows.append({
                    "policy": policy, "seed": seed,
                    "status": f"failed: {e}",
                    "ctime": None, "addr": None, "adtr": None,
                    "ctime_p90": None,
                })

    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    with (out / COMPARE_FILE).open("w", newline="", encoding="utf-8") as f:
        w = csv.DictWriter(
            f, fieldnames=["policy", "seed", "status", "ctime", "addr",
                           "adtr", "ctime_p90"]
        )
        w.writeheader()
        w.writerows(rows)

    header = f"{'policy':<10} {'runs':>5} {'ctime':>9} {'addr':>7} {'adtr':>7} {'ctime_p90':>10}"
    print(header)
    print("-" * len(header))
    for policy in policies:
        mine = [r for r in rows if r["policy"] == policy]
        ok = [r for r in mine if not str(r["status"]).startswith("failed")]

        def mean(key: str):
            vals = [r[key] for r in ok if r[key] is not None]
            return sum(vals) / len(vals) if vals else None

        print(
            f"{policy:<10} {len(ok)}/{len(mine):>3} "
            f"{_fmt_opt(mean('ctime')):>9} {_fmt_opt(mean('addr')):>7} "
            f"{_fmt_opt(mean('adtr')):>7} {_fmt_opt(mean('ctime_p90')):>10}"
        )
    print(f"wrote {out / COMPARE_FILE}")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        parsed = traceio.read_trace(args.trace)
    except traceio.TraceParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 1
    violation = traceio.verify_trace(parsed)
    if violation is None:
        print(f"ok: {args.trace} ({len(parsed.steps)} steps, "
              f"{parsed.n_agents} agents)")
        return 0
    ids = ",".join(str(i) for i in violation.agent_ids)
    print(
        f"violation: step {violation.step} agents [{ids}] "
        f"{violation.kind}: {violation.detail}",
        file=sys.stderr,
    )
    return 3


def cmd_plot(args: argparse.Namespace) -> int:
    try:
        parsed = traceio.read_trace(args.trace)
    except traceio.TraceParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 1
    try:
        render_trace(parsed, args.out)
    except OSError as e:
        print(f"cannot write {args.out}: {e}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lacnav",
        description="Multi-agent navigation benchmark harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a config file")
    p_run.add_argument("--config", required=True)
    _add_override_args(p_run)
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="run a policies x seeds grid")
    p_cmp.add_argument("--config", required=True)
    p_cmp.add_argument("--policies", default=",".join(engine.POLICIES),
                       help="comma-separated policy list")
    p_cmp.add_argument("--seeds", default="1", help="comma-separated seeds")
    _add_override_args(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_ver = sub.add_parser("verify", help="re-check invariants of a trace file")
    p_ver.add_argument("trace")
    p_ver.set_defaults(func=cmd_verify)

    p_plot = sub.add_parser("plot", help="render trajectories from a trace file")
    p_plot.add_argument("trace")
    p_plot.add_argument("--out", required=True, help="output SVG path")
    p_plot.set_defaults(func=cmd_plot)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
