"""Command-line entry point.

Subcommands: ``gen`` (synthetic dataset), ``solve`` (multiplier search on a
log), ``sweep`` (multiplier grid -> fig3 CSV), ``allocate`` (assignment of
a log at a multiplier or budget, with optional exact-oracle comparison),
``simulate`` (closed-loop run -> fig6/fig4 CSVs), and ``report`` (summarize
a results directory). Identical flags, config, and seed produce
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .core import (
    NO_ACTION,
    ActionSpace,
    AllocationProblem,
    select_actions,
    summarize,
)
from .experiments import per_action_totals
from .gains import SyntheticGainParams
from .logio import (
    emit_figure_data,
    generate_dataset,
    read_logs,
    read_report_csv,
    records_gain_matrix,
    write_report_csv,
)
from .oracle import brute_force_mckp
from .simulator import compare_policies, run_simulation
from .solver import (
    SolverConfig,
    adjust_budget,
    lambda_sweep,
    sample_pool,
    solve_lambda,
)

log = logging.getLogger("dynalloc")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_problem_rows(args, cfg):
    if args.logs:
        records = read_logs(args.logs)
        if not records:
            raise ValueError(f"log file {args.logs} holds no records")
        return records_gain_matrix(records)
    n = getattr(args, "synthetic", 0) or 0
    if n <= 0:
        raise ValueError("provide --logs or --synthetic N")
    from .gains import synthetic_rows

    params = cfgmod.parse_gain_params(cfg, seed=args.seed)
    actions = cfgmod.parse_actions(cfg)
    return synthetic_rows(params, actions.costs, n, np.random.default_rng(args.seed))


def cmd_gen(args, cfg) -> int:
    out = _out_dir(args) / args.name
    params = SyntheticGainParams(
        mu=float(cfg["gains"]["mu"]),
        sigma=float(cfg["gains"]["sigma"]),
        alpha=float(cfg["gains"]["alpha"]),
        seed=args.seed,
    )
    actions = cfgmod.parse_actions(cfg)
    mode = args.mode or cfg["gains"]["mode"]
    summary = generate_dataset(
        params,
        args.n,
        actions,
        seed=args.seed,
        path=out,
        mode=mode,
        top_k=int(cfg["gains"]["top_k"]),
    )
    print(f"wrote {summary.n_records} records ({summary.mode} gains) to {summary.path}")
    return 0


def cmd_solve(args, cfg) -> int:
    rows = _load_problem_rows(args, cfg)
    actions = cfgmod.parse_actions(cfg)
    if args.pool_size and args.pool_size > 0:
        rows = sample_pool(rows, args.pool_size, args.seed)
    budget = args.budget
    if args.qps_current is not None:
        budget = adjust_budget(budget, args.qps_regular, args.qps_current)
    problem = AllocationProblem(actions, rows, budget)
    solver_cfg = SolverConfig(epsilon=args.epsilon, max_iterations=args.max_iterations)
    result = solve_lambda(problem, solver_cfg)
    choices = select_actions(rows, actions.costs, result.lambda_star)
    s = summarize(choices, problem.gains, actions.costs)
    print(
        f"lambda={result.lambda_star!r} cost={result.achieved_cost!r} "
        f"gap={result.gap!r} gain={s.total_gain!r} served={s.served_count} "
        f"iterations={result.iterations} converged={result.converged}"
    )
    if result.note:
        print(f"note: {result.note}")
    if args.out:
        trace_path = _out_dir(args) / "solve_trace.csv"
        write_report_csv(
            trace_path,
            "solve-trace",
            ("iteration", "lambda", "total_cost"),
            [(i + 1, lam, cost) for i, (lam, cost) in enumerate(result.trace)],
        )
        print(f"trace: {trace_path}")
    return 0


def _parse_grid(expr: str) -> np.ndarray:
    if ":" in expr:
        lo, hi, count = expr.split(":")
        return np.linspace(float(lo), float(hi), int(count))
    return np.asarray([float(tok) for tok in expr.split(",") if tok.strip()])


def cmd_sweep(args, cfg) -> int:
    rows = _load_problem_rows(args, cfg)
    actions = cfgmod.parse_actions(cfg)
    problem = AllocationProblem(actions, rows, budget=0.0)
    points = lambda_sweep(problem, _parse_grid(args.grid))
    path = _out_dir(args) / "fig3.csv"
    count = emit_figure_data(points, "fig3", path)
    print(f"wrote {count} sweep rows to {path}")
    return 0


def cmd_allocate(args, cfg) -> int:
    rows = _load_problem_rows(args, cfg)
    actions = cfgmod.parse_actions(cfg)
    if args.lam is None and args.budget is None:
        raise ValueError("provide --lam or --budget")
    if args.lam is not None:
        lam = args.lam
    else:
        problem = AllocationProblem(actions, rows, args.budget)
        lam = solve_lambda(problem, SolverConfig(epsilon=args.epsilon)).lambda_star
    choices = select_actions(rows, actions.costs, lam, max_power=args.max_power)
    s = summarize(choices, rows, actions.costs)
    print(
        f"lambda={lam!r} gain={s.total_gain!r} cost={s.total_cost!r} "
        f"served={s.served_count}/{rows.shape[0]}"
    )
    out = _out_dir(args)
    write_report_csv(
        out / "assignment.csv",
        "assignment",
        ("request", "action", "gain", "cost"),
        [
            (
                i,
                int(c),
                float(rows[i, c]) if c != NO_ACTION else 0.0,
                float(actions.costs[c]) if c != NO_ACTION else 0.0,
            )
            for i, c in enumerate(choices)
        ],
    )
    emit_figure_data(per_action_totals(rows, actions.costs, choices), "fig5", out / "fig5.csv")
    print(f"assignment: {out / 'assignment.csv'}; per-action totals: {out / 'fig5.csv'}")
    if args.oracle:
        problem = AllocationProblem(actions, rows, args.budget if args.budget else s.total_cost)
        picks, opt = brute_force_mckp(problem, cost_scale=args.cost_scale)
        gap = opt.total_gain - s.total_gain
        rel = gap / opt.total_gain if opt.total_gain > 0 else 0.0
        print(
            f"oracle: gain={opt.total_gain!r} cost={opt.total_cost!r} "
            f"gap={gap!r} ({100 * rel:.3f}%)"
        )
    return 0


def cmd_simulate(args, cfg) -> int:
    flag_overrides = {
        "kp": args.kp,
        "ki": args.ki,
        "kd": args.kd,
        "theta": args.theta,
        "setpoint": args.setpoint,
        "gain_to_power": args.gain_to_power,
        "mp_min": args.mp_min,
        "mp_max": args.mp_max,
    }
    for key, value in flag_overrides.items():
        if value is not None:
            cfg["controller"][key] = repr(float(value))
    gain_source = None
    if args.gain_model:
        from .gains import load_gain_model
        from .simulator import EstimatorGainSource

        gain_source = EstimatorGainSource(load_gain_model(args.gain_model))
    sim_cfg = cfgmod.build_sim_config(
        cfg, seed=args.seed, ticks=args.ticks, policy=args.policy,
        gain_source=gain_source,
    )
    out = _out_dir(args)
    if args.compare:
        comparison = compare_policies(sim_cfg)
        emit_figure_data(comparison.dynamic, "fig6", out / "fig6.csv")
        emit_figure_data(comparison.baseline, "fig6", out / "fig6_baseline.csv")
        s = comparison.summary
        fig4_rows = [
            ("dynamic_at_equal_cost", s.gain_at_equal_cost, s.pool_baseline_cost),
            ("dynamic_at_equal_gain", s.pool_baseline_gain, s.cost_at_equal_gain),
            ("baseline", s.pool_baseline_gain, s.pool_baseline_cost),
        ]
        emit_figure_data(fig4_rows, "fig4", out / "fig4.csv")
        print(
            f"dynamic: gain={s.dynamic_gain!r} cost={s.dynamic_cost!r} "
            f"fail_rate={s.dynamic_fail_rate:.4f}"
        )
        print(
            f"baseline: gain={s.baseline_gain!r} cost={s.baseline_cost!r} "
            f"fail_rate={s.baseline_fail_rate:.4f}"
        )
        print(
            f"matched: gain_at_equal_cost={s.gain_at_equal_cost!r} "
            f"cost_at_equal_gain={s.cost_at_equal_gain!r} "
            f"(baseline pool gain={s.pool_baseline_gain!r} cost={s.pool_baseline_cost!r})"
        )
        print(f"csv: {out / 'fig6.csv'}, {out / 'fig6_baseline.csv'}, {out / 'fig4.csv'}")
    else:
        metrics = run_simulation(sim_cfg)
        emit_figure_data(metrics, "fig6", out / "fig6.csv")
        arrivals = sum(m.arrivals for m in metrics)
        failed = sum(m.failed for m in metrics)
        gain = sum(m.total_gain for m in metrics)
        cost = sum(m.total_cost for m in metrics)
        fr = failed / arrivals if arrivals else 0.0
        print(
            f"{sim_cfg.policy.kind}: ticks={len(metrics)} arrivals={arrivals} "
            f"gain={gain!r} cost={cost!r} fail_rate={fr:.4f}"
        )
        print(f"csv: {out / 'fig6.csv'}")
    return 0


def cmd_report(args, cfg) -> int:
    directory = Path(args.dir or args.out)
    paths = sorted(directory.glob("*.csv"))
    if not paths:
        print(f"no report CSVs under {directory}")
        return 0
    for path in paths:
        try:
            schema, header, rows = read_report_csv(path)
        except ValueError as exc:
            print(f"{path.name}: skipped ({exc})")
            continue
        print(f"{path.name}: schema={schema} rows={len(rows)}")
        if not rows:
            continue
        cols = list(zip(*rows))
        for name, col in zip(header, cols):
            try:
                vals = np.asarray([float(v) for v in col])
            except ValueError:
                continue
            print(
                f"  {name}: min={float(vals.min())!r} max={float(vals.max())!r} "
                f"mean={float(vals.mean())!r}"
            )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynalloc",
        description="Per-request dynamic computation allocation toolkit",
    )
    parser.add_argument("--config", default=None, help="INI config file")
    parser.add_argument("--seed", type=int, default=0, help="seed for every stochastic step")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic request log")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=("power", "topk"), default=None)
    p.add_argument("--name", default="dataset.jsonl")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="solve the multiplier on a request pool")
    p.add_argument("--logs", default=None)
    p.add_argument("--synthetic", type=int, default=0, help="draw N synthetic rows instead")
    p.add_argument("--budget", type=float, required=True)
    p.add_argument("--pool-size", type=int, default=0, help="sample this many rows (0 = all)")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--max-iterations", type=int, default=64)
    p.add_argument("--qps-regular", type=float, default=1.0)
    p.add_argument("--qps-current", type=float, default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="evaluate a multiplier grid (fig3 CSV)")
    p.add_argument("--logs", default=None)
    p.add_argument("--synthetic", type=int, default=0)
    p.add_argument("--grid", required=True, help="'lo:hi:count' or comma list")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("allocate", help="assign actions to a request pool")
    p.add_argument("--logs", default=None)
    p.add_argument("--synthetic", type=int, default=0)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--budget", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--max-power", type=float, default=None)
    p.add_argument("--oracle", action="store_true", help="compare with the exact DP")
    p.add_argument("--cost-scale", type=int, default=1)
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("simulate", help="closed-loop serving simulation (fig6/fig4 CSVs)")
    p.add_argument("--ticks", type=int, default=None)
    p.add_argument("--policy", choices=("dynamic", "baseline"), default=None)
    p.add_argument("--compare", action="store_true", help="run both policies on one seed")
    p.add_argument("--gain-model", default=None, help="saved linear gain model to score requests")
    for flag in ("kp", "ki", "kd", "theta", "setpoint", "gain-to-power", "mp-min", "mp-max"):
        p.add_argument(f"--{flag}", type=float, default=None, help="controller override")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="summarize a results directory")
    p.add_argument("--dir", default=None)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = cfgmod.read_config(args.config)
        return args.func(args, cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
