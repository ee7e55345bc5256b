"""Command-line front end: ``pregwa run|sweep|verify``."""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .allocators import STRATEGIES, PlanFileError, dump_plan, load_plan
from .config import ConfigError, experiment_from_dict, load_sweep, read_json
from .experiments import compare, execute_sweep, write_results
from .radio import build_rate_matrix, build_rate_matrix_forced, dump_rate_matrix
from .sim import verify_plan

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_INTERNAL = 0, 1, 2, 3, 4

log = logging.getLogger("pregwa")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _bs_list(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated BS indices, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pregwa", description="Predictive air-time minimisation for stored video over a multi-cell road.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--config", required=True, help="scenario (run/verify) or sweep (sweep) JSON document")
    common.add_argument("--out-dir", default=None, help="output directory (default: $PREGWA_OUT or ./out)")
    common.add_argument("--seed", type=int, default=None, help="override the document's RNG seed")
    common.add_argument("--soft-lambda", type=float, default=None, help="solve the LP in soft mode with this stall penalty")
    common.add_argument("--bs-off", type=_bs_list, default=None, help="comma-separated BS indices switched off")

    p_run = sub.add_parser("run", parents=[common], help="plan one scenario")
    p_run.add_argument("--strategy", choices=STRATEGIES, default=None)
    p_run.add_argument("--dump-plan", action="store_true", help="also write plan.csv")
    p_run.add_argument("--dump-buffers", action="store_true", help="also write buffers.csv")
    p_run.add_argument("--dump-rates", action="store_true", help="also write rates.csv")

    p_sweep = sub.add_parser("sweep", parents=[common], help="sweep streaming rate or user count")
    p_sweep.add_argument("--workers", type=int, default=1)

    p_ver = sub.add_parser("verify", parents=[common], help="re-check a dumped plan")
    p_ver.add_argument("--plan", required=True, help="plan CSV written by `run --dump-plan`")
    p_ver.add_argument("--allow-stalls", action="store_true", help="do not fail on missed playback deadlines")
    return parser


def _out_dir(args) -> Path:
    out = Path(args.out_dir or os.environ.get("PREGWA_OUT") or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _apply_overrides(doc: dict, args) -> dict:
    doc = dict(doc)
    if args.seed is not None:
        doc["seed"] = args.seed
    strat = dict(doc.get("strategy", {}))
    if getattr(args, "strategy", None):
        strat["name"] = args.strategy
    if args.soft_lambda is not None:
        strat["mode"] = "soft"
        strat["soft_lambda"] = args.soft_lambda
    if args.bs_off is not None:
        strat["bs_off"] = list(args.bs_off)
    doc["strategy"] = strat
    return doc


def _load(args):
    path = Path(args.config)
    if not path.exists():
        raise ConfigError(f"{path}: no such file")
    return experiment_from_dict(_apply_overrides(read_json(path), args), path.parent)


def cmd_run(args) -> int:
    exp = _load(args)
    out = _out_dir(args)
    results, rows = compare(exp.scenario, [exp.strategy], exp.options, exp.scenario_id)
    res = results[0]
    write_results(rows, out / "results.csv")
    if args.dump_rates:
        dump_rate_matrix(res.rates, out / "rates.csv")
    if args.dump_plan:
        dump_plan(res.plan, res.rates, out / "plan.csv")
    if args.dump_buffers and res.buffers is not None:
        with open(out / "buffers.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["user_id", "slot", "delivered_bits", "buffer_bits"])
            delivered = np.cumsum(res.plan.x * res.rates.rates, axis=1)
            for u, uid in enumerate(res.rates.user_ids):
                for t in np.flatnonzero(res.rates.present[u]):
                    w.writerow([uid, int(t), repr(float(delivered[u, t])), repr(float(res.buffers[u, t]))])
    log.info("%s on %s: status=%s air-time=%s (%.2fs)", res.strategy, exp.scenario_id, res.status,
             res.network_airtime, res.wall_clock)
    if not res.ok:
        print(f"{exp.scenario_id}: {res.strategy} is {res.status}", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(f"{exp.scenario_id}: {res.strategy} mean air-time {res.network_airtime:.6g} -> {out / 'results.csv'}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    path = Path(args.config)
    if not path.exists():
        raise ConfigError(f"{path}: no such file")
    spec = load_sweep(path)
    base = _apply_overrides(spec.base, args)
    spec = type(spec)(**{**spec.__dict__, "base": base})
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    rows, results_path, chart_path = execute_sweep(spec, _out_dir(args), args.workers)
    failed = [r for r in rows if r[-1] != "ok"]
    print(f"{len(rows)} rows -> {results_path}; chart -> {chart_path}")
    if failed:
        print(f"{len(failed)} rows not ok", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    exp = _load(args)
    with open(args.plan, newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        first_row = next(reader, None)
    strategy = first_row[0] if first_row else exp.strategy
    if strategy == "optimal_bs_off":
        off = exp.options.off_bs or (exp.scenario.layout.n_bs - 1,)
        active = [j for j in range(exp.scenario.layout.n_bs) if j not in set(off)]
        rates = build_rate_matrix_forced(exp.scenario, active)
    else:
        rates = build_rate_matrix(exp.scenario)
    plan = load_plan(args.plan, rates)
    strict = strategy.startswith("optimal") and exp.options.mode == "hard" and not args.allow_stalls
    report = verify_plan(plan, rates, exp.scenario.sessions, require_stall_free=strict)
    if report.passed:
        note = "" if report.stall_free else " (with playback stalls)"
        print(f"pass{note}")
        return EXIT_OK
    print(report.describe())
    return EXIT_INFEASIBLE


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"pregwa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, PlanFileError) as exc:
        print(f"pregwa: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"pregwa: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"pregwa: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
