"""Command line: solve, bench, train and export-lp."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .instance import format_solution, read_cvrplib, validate

log = logging.getLogger("cvrpsuite")


def _cmd_solve(args) -> int:
    inst = read_cvrplib(args.file)
    status = "ok"
    t0 = time.perf_counter()
    if args.solver == "exact":
        from .exact import build_mtz_model, solve_branch_and_bound
        res = solve_branch_and_bound(build_mtz_model(inst), args.time_limit,
                                     trace=lambda line: print(line, file=sys.stderr))
        sol, status = res.solution, res.status
        if sol is None:
            print(f"status {status}; best bound {res.bound:.6f}")
            return 2
    elif args.solver == "savings":
        from .heuristics import clarke_wright
        sol = clarke_wright(inst)
    elif args.solver == "gls":
        from .heuristics import guided_local_search
        sol = guided_local_search(inst, args.time_limit, seed=args.seed)
    else:
        if not args.weights:
            print("the rl solver needs --weights", file=sys.stderr)
            return 2
        from .policy.decode import BEAM, GREEDY, rollout
        from .policy.weights import load_params
        params = load_params(args.weights)
        if args.beam:
            sol = rollout(params, inst, mode=BEAM, width=args.beam)
        else:
            sol = rollout(params, inst, mode=GREEDY, seed=args.seed)
    elapsed = time.perf_counter() - t0
    report = validate(inst, sol)
    sys.stdout.write(format_solution(sol))
    print(f"status {status}; feasible {report.feasible}; seconds {elapsed:.2f}", file=sys.stderr)
    return 0 if report.feasible else 1


def _cmd_bench(args) -> int:
    from .bench.config import run_config

    cfg = json.loads(Path(args.config).read_text())
    rows = run_config(cfg)
    failed = [r for r in rows if r.failed]
    for r in failed:
        log.warning("%s on %s failed: %s", r.solver, r.instance, r.error)
    out = Path(cfg.get("output_dir", "bench-out"))
    print((out / "results.md").read_text(), end="")
    return 1 if failed else 0


def _cmd_train(args) -> int:
    from .policy.train import TrainConfig, train_overfit, train_reinforce, write_curve
    from .policy.weights import load_params, save_params, transfer_init

    raw = json.loads(Path(args.config).read_text())
    out = Path(raw.pop("output_dir", "train-out"))
    out.mkdir(parents=True, exist_ok=True)
    cfg = TrainConfig(**raw)
    params = None
    if args.reuse:
        params = transfer_init(load_params(args.reuse), cfg.net_config(), seed=cfg.seed)

    def progress(epoch, res):
        log.info("epoch %d mean cost %.4f", epoch, res.epoch_means()[-1])

    if args.overfit:
        result = train_overfit(cfg, read_cvrplib(args.overfit), params, on_epoch=progress)
    else:
        result = train_reinforce(cfg, params, on_epoch=progress)
    save_params(result.params, out / "weights.bin", cfg.to_dict())
    (out / "curves").mkdir(exist_ok=True)
    write_curve(result.curve, out / "curves" / "train.csv")
    print(out / "weights.bin")
    return 0


def _cmd_export_lp(args) -> int:
    from .exact import build_mtz_model, export_lp
    text = export_lp(build_mtz_model(read_cvrplib(args.file)))
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cvrpsuite", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one CVRPLib instance")
    s.add_argument("file")
    s.add_argument("--solver", choices=("exact", "savings", "gls", "rl"), default="gls")
    s.add_argument("--time-limit", type=float, default=60.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--weights")
    s.add_argument("--beam", type=int, default=0, help="beam width for the rl solver (0: greedy)")
    s.set_defaults(func=_cmd_solve)

    b = sub.add_parser("bench", help="run a benchmark matrix from a JSON config")
    b.add_argument("--config", required=True)
    b.set_defaults(func=_cmd_bench)

    t = sub.add_parser("train", help="train a policy from a JSON config")
    t.add_argument("--config", required=True)
    t.add_argument("--overfit", help="train on this single instance")
    t.add_argument("--reuse", help="start from these TSP policy weights")
    t.set_defaults(func=_cmd_train)

    e = sub.add_parser("export-lp", help="write the MTZ model in CPLEX LP format")
    e.add_argument("file")
    e.add_argument("-o", "--output")
    e.set_defaults(func=_cmd_export_lp)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
