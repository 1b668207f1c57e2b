"""Command-line entry point: solve an instance, check a schedule, export a QUBO.

Exit codes: 0 = solved and feasible (or check passed), 2 = ran but the
schedule violates a rule, 1 = bad input or runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import anneal, nsp, oracle

BLOCK_WIDTH = 15
GROUP_TITLES = ("U1 graveyard", "U2 night", "U3 day")


def render_ascii(sched: nsp.Schedule) -> str:
    """Paper-style table: one block per group, X on duty, . on leave,
    date header split every 15 days."""
    d = sched.num_days
    groups = [
        range(1, sched.m1 + 1),
        range(sched.m1 + 1, sched.m1 + sched.m2 + 1),
        range(sched.m1 + sched.m2 + 1, sched.num_nurses + 1),
    ]
    name_w = len(f"P{sched.num_nurses}")
    lines = []
    for title, nurses in zip(GROUP_TITLES, groups):
        if not nurses:
            continue
        lines.append(title)
        for start in range(1, d + 1, BLOCK_WIDTH):
            days = range(start, min(start + BLOCK_WIDTH, d + 1))
            lines.append(
                "Date".ljust(name_w) + "".join(f"{j:>3d}" for j in days)
            )
            for i in nurses:
                row = sched.row(i)
                cells = "".join(
                    f"{'X' if row[j - 1] else '.':>3}" for j in days
                )
                lines.append(f"P{i}".ljust(name_w) + cells)
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"


def render_csv(sched: nsp.Schedule) -> str:
    return "\n".join(",".join(str(int(v)) for v in row) for row in sched.bits) + "\n"


def parse_csv(text: str) -> np.ndarray:
    rows = [
        [int(cell) for cell in line.split(",")]
        for line in text.strip().splitlines()
        if line.strip()
    ]
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError("ragged CSV schedule")
    return np.array(rows, dtype=np.uint8)


def _load_config(path: str) -> nsp.NspInstance:
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    return nsp.instance_from_config(cfg)


def _params_from_args(args, model) -> anneal.AnnealParams:
    beta_range = None
    if args.beta_hot is not None or args.beta_cold is not None:
        hot, cold = anneal.default_beta_range(model)
        if args.beta_hot is not None:
            hot = args.beta_hot
        if args.beta_cold is not None:
            cold = args.beta_cold
        beta_range = (hot, cold)
    return anneal.AnnealParams(
        num_reads=args.reads,
        num_sweeps=args.sweeps,
        seed=args.seed,
        beta_range=beta_range,
    )


def _cmd_solve(args) -> int:
    inst = _load_config(args.config)
    built = nsp.assemble(inst)
    params = _params_from_args(args, built.model)
    t0 = time.perf_counter()
    sampleset = anneal.sample(built.model, params)
    elapsed = time.perf_counter() - t0
    top = sampleset.best()
    sched = nsp.decode(top, built)
    residuals = built.model.constraint_residuals(top.assignment)
    report = nsp.check_rules(sched, inst)
    hot, cold = params.beta_range or anneal.default_beta_range(built.model)
    params_echo = {
        "reads": params.num_reads,
        "sweeps": params.num_sweeps,
        "seed": params.seed,
        "beta_hot": hot,
        "beta_cold": cold,
    }
    if args.format == "json":
        print(json.dumps({
            "schedule": sched.bits.astype(int).tolist(),
            "energy": top.energy,
            "residuals": residuals,
            "rules": report.as_dict(),
            "params": params_echo,
        }, indent=2))
    elif args.format == "csv":
        sys.stdout.write(render_csv(sched))
    else:
        sys.stdout.write(render_ascii(sched))
        print(f"best energy: {top.energy:g}")
        print("residuals: " + ", ".join(
            f"{k}={v:g}" for k, v in sorted(residuals.items())
        ))
        print(f"feasible: {report.feasible}")
        print(
            f"params: reads={params.num_reads} sweeps={params.num_sweeps} "
            f"seed={params.seed} beta=({hot:.4g}, {cold:.4g})"
        )
        print(f"elapsed: {elapsed:.2f}s")
    return 0 if report.feasible else 2


def _cmd_check(args) -> int:
    inst = _load_config(args.config)
    with open(args.schedule, "r", encoding="utf-8") as fh:
        bits = parse_csv(fh.read())
    if bits.shape != (inst.N, inst.d):
        print(
            f"error: schedule is {bits.shape[0]}x{bits.shape[1]}, "
            f"config expects {inst.N}x{inst.d}",
            file=sys.stderr,
        )
        return 1
    sched = nsp.Schedule(bits=bits, m1=inst.m1, m2=inst.m2)
    report = nsp.check_rules(sched, inst)
    for rule, bad in (
        (1, report.rule1), (2, report.rule2), (3, report.rule3),
        (4, report.rule4), (5, report.rule5),
    ):
        verdict = "ok" if not bad else f"violated at {list(bad)}"
        print(f"rule {rule}: {verdict}")
    print(f"feasible: {report.feasible}")
    if args.oracle:
        # cross-check the verdict against exhaustive enumeration (tiny only)
        feasible_set = {
            s.bits.tobytes() for s in oracle.enumerate_feasible(inst)
        }
        confirmed = (sched.bits.tobytes() in feasible_set) == report.feasible
        print(f"oracle: {'confirmed' if confirmed else 'MISMATCH'}")
        if not confirmed:
            return 1
    return 0 if report.feasible else 2


def _cmd_export(args) -> int:
    inst = _load_config(args.config)
    built = nsp.assemble(inst)
    text = built.model.to_qubo_text()
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qubosched",
        description="Penalty-QUBO nurse scheduling with simulated annealing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="assemble, anneal, and print a schedule")
    solve.add_argument("--config", required=True)
    solve.add_argument("--reads", type=int, default=10)
    solve.add_argument("--sweeps", type=int, default=10000)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--beta-hot", type=float, default=None)
    solve.add_argument("--beta-cold", type=float, default=None)
    solve.add_argument("--format", choices=("ascii", "csv", "json"), default="ascii")
    solve.set_defaults(func=_cmd_solve)

    check = sub.add_parser("check", help="verify a CSV schedule against the rules")
    check.add_argument("schedule", help="CSV file, N rows x d columns of 0/1")
    check.add_argument("--config", required=True)
    check.add_argument(
        "--oracle", action="store_true",
        help="cross-check the verdict by exhaustive enumeration (tiny instances)",
    )
    check.set_defaults(func=_cmd_check)

    export = sub.add_parser("export-qubo", help="write the compiled QUBO as text")
    export.add_argument("--config", required=True)
    export.add_argument("--out", required=True)
    export.set_defaults(func=_cmd_export)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
