"""Multi-strategy comparisons and parameter sweeps."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .config import SweepSpec, experiment_from_dict
from .scenario import ScenarioConfig
from .sim import RESULTS_HEADER, RunOptions, RunResult, results_row, run
from .svgchart import line_chart

log = logging.getLogger(__name__)

LABELS = {
    "equal_share": "Equal share",
    "rate_proportional": "Rate proportional",
    "heuristic": "Air-time min heuristic",
    "optimal": "Air-time min optimal",
    "optimal_bs_off": "Optimal, BS off",
}


def compare(scenario: ScenarioConfig, strategies, options: RunOptions | None = None,
            scenario_id: str = "scenario") -> tuple[list[RunResult], list[list[str]]]:
    """Run each strategy plus an equal-share baseline; returns results and CSV rows."""
    options = options or RunOptions()
    baseline = run(scenario, "equal_share", options)
    es_air = baseline.network_airtime
    results, rows = [], []
    for strat in strategies:
        res = baseline if strat == "equal_share" else run(scenario, strat, options)
        results.append(res)
        rows.append(results_row(scenario_id, scenario, res, es_air))
    return results, rows


def _sweep_point(args):
    doc, base_dir, strategies = args
    exp = experiment_from_dict(doc, base_dir)
    rows = []
    try:
        baseline = run(exp.scenario, "equal_share", exp.options)
        es_air = baseline.network_airtime
    except Exception as exc:  # noqa: BLE001 - recorded per row, sweep continues
        log.exception("baseline failed for %s", exp.scenario_id)
        es_air, baseline = None, None
        base_error = f"error: {exc}"
    for strat in strategies:
        try:
            if strat == "equal_share" and baseline is not None:
                res = baseline
            else:
                res = run(exp.scenario, strat, exp.options)
            rows.append(results_row(exp.scenario_id, exp.scenario, res, es_air))
        except Exception as exc:  # noqa: BLE001
            log.exception("%s failed for %s", strat, exp.scenario_id)
            msg = base_error if strat == "equal_share" and baseline is None else f"error: {exc}"
            rows.append([exp.scenario_id, strat, "", str(exp.scenario.n_users), "", "", "", "", "",
                         msg.replace("\n", " ")])
    return rows


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[list[str]]:
    """Rows in (value, strategy) order regardless of completion order."""
    tasks = [(spec.document_for(v), spec.base_dir, spec.strategies) for v in spec.values]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_sweep_point, tasks))
    else:
        chunks = [_sweep_point(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


def write_results(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULTS_HEADER)
        w.writerows(rows)


def sweep_chart(spec: SweepSpec, rows) -> str:
    col = RESULTS_HEADER.index
    series = {}
    for strat in spec.strategies:
        pts = []
        for v in spec.values:
            match = [r for r in rows if r[col("strategy")] == strat and r[col("scenario_id")].endswith(f"={v:g}")]
            y = match[0][col("mean_airtime")] if match else ""
            x = v / 1e6 if spec.parameter == "streaming_rate" else v
            pts.append((x, float(y) if y else None))
        series[LABELS.get(strat, strat)] = pts
    xlabel = "Streaming rate (Mbps)" if spec.parameter == "streaming_rate" else "Number of users"
    return line_chart(series, xlabel, "Average air-time per slot (network)", spec.title or spec.sweep_id)


def execute_sweep(spec: SweepSpec, out_dir, workers: int = 1) -> tuple[list[list[str]], Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = run_sweep(spec, workers)
    results_path = out / spec.results
    chart_path = out / spec.chart
    write_results(rows, results_path)
    chart_path.write_text(sweep_chart(spec, rows))
    return rows, results_path, chart_path


def with_overrides(options: RunOptions, **kw) -> RunOptions:
    return replace(options, **{k: v for k, v in kw.items() if v is not None})
