"""Run (arm, seed) pairs, write per-run files, and rebuild the aggregate CSV.

Layout under the output directory::

    runs/<arm>/seed-<n>.jsonl   one log record per generation
    runs/<arm>/seed-<n>.json    run summary; its presence marks the run done
    aggregate.csv               one row per summary, sorted by (arm, seed)

Runs whose summary already says ``ok`` are skipped, so an interrupted
matrix can be resumed. A run that raises is recorded with status
``failed`` and retried on the next invocation.
"""

from __future__ import annotations

import csv
import io
import json
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from ..engine import run_evolution
from ..problems import generate_dataset, read_dataset
from ..vm import ConfigurationError
from .config import ExperimentConfig

WORKERS_ENV = "ICDGP_WORKERS"

AGGREGATE_COLUMNS = (
    "problem", "arm", "variant", "seed", "status", "outcome", "generations", "executions",
    "final_active_size", "evaluation_executions", "verification_executions",
    "simplification_executions", "executions_at_solution", "error",
)


class HarnessIOError(OSError):
    """A result file could not be read or written; the message names the path."""


@dataclass
class MatrixReport:
    completed: list[tuple[str, int]] = field(default_factory=list)
    skipped: list[tuple[str, int]] = field(default_factory=list)
    failed: list[tuple[str, int, str]] = field(default_factory=list)
    aggregate: Path | None = None

    @property
    def ok(self) -> bool:
        return not self.failed


def workers_from_env(default: int = 1) -> int:
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if not raw:
        return default
    try:
        n = int(raw)
    except ValueError:
        raise ConfigurationError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigurationError(f"{WORKERS_ENV} must be >= 1")
    return n


def run_paths(out_dir: Path, arm: str, seed: int) -> tuple[Path, Path]:
    d = Path(out_dir) / "runs" / arm
    return d / f"seed-{seed}.jsonl", d / f"seed-{seed}.json"


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise HarnessIOError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _load_dataset(config: ExperimentConfig):
    if config.dataset is not None:
        try:
            ds = read_dataset(config.dataset)
        except OSError as exc:
            raise HarnessIOError(f"cannot read dataset {config.dataset}: {exc.strerror or exc}") from exc
        if ds.problem != config.problem.name:
            raise ConfigurationError(f"{config.dataset} holds {ds.problem!r} data, not {config.problem.name!r}")
        return ds
    return generate_dataset(config.problem, config.data_seed, config.train_size, config.test_size)


def execute_run(config: ExperimentConfig, seed: int) -> tuple[dict, str]:
    """One run, returned as (summary record, JSONL log text). Never raises."""
    base = {"problem": config.problem.name, "arm": config.arm, "variant": config.variant_name, "seed": seed}
    try:
        dataset = _load_dataset(config)
        result = run_evolution(config.engine, config.problem, dataset, seed)
    except Exception as exc:  # recorded, not dropped
        summary = dict(base, status="failed", error=f"{type(exc).__name__}: {exc}",
                       traceback=traceback.format_exc())
        return summary, ""
    summary = dict(result.summary(), **base, status="ok", error="",
                   ledger=result.ledger.to_dict(),
                   unsimplified_generalizes=result.unsimplified_generalizes)
    logs = "".join(_dump(rec) + "\n" for rec in result.logs)
    return summary, logs


def _execute_star(args):
    return execute_run(*args)


def _read_summary(path: Path) -> dict | None:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        return None
    except json.JSONDecodeError:
        return None  # torn write from an interrupted run; redo it
    except OSError as exc:
        raise HarnessIOError(f"cannot read {path}: {exc.strerror or exc}") from exc


def run_matrix(configs: Sequence[ExperimentConfig], out_dir, workers: int | None = None,
               progress=None) -> MatrixReport:
    """Run every (config, seed) pair not already completed under ``out_dir``."""
    out_dir = Path(out_dir)
    arms = [c.arm for c in configs]
    if len(set(arms)) != len(arms):
        raise ConfigurationError("arm names must be unique within one matrix")
    for c in configs:
        if not c.seeds:
            raise ConfigurationError(f"arm {c.arm!r} has no seeds")
    workers = workers or workers_from_env()

    report = MatrixReport()
    todo = []
    for c in configs:
        for seed in c.seeds:
            _, summary_path = run_paths(out_dir, c.arm, seed)
            prev = _read_summary(summary_path)
            if prev is not None and prev.get("status") == "ok":
                report.skipped.append((c.arm, seed))
            else:
                todo.append((c, seed))

    def finish(config, seed, summary, logs):
        log_path, summary_path = run_paths(out_dir, config.arm, seed)
        _write_atomic(log_path, logs)
        _write_atomic(summary_path, json.dumps(summary, sort_keys=True, indent=1) + "\n")
        if summary["status"] == "ok":
            report.completed.append((config.arm, seed))
        else:
            report.failed.append((config.arm, seed, summary["error"]))
        if progress is not None:
            progress(summary)

    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for (c, seed), (summary, logs) in zip(todo, pool.map(_execute_star, todo)):
                finish(c, seed, summary, logs)
    else:
        for c, seed in todo:
            finish(c, seed, *execute_run(c, seed))

    report.aggregate = write_aggregate(out_dir)
    return report


def collect_summaries(out_dir) -> list[dict]:
    root = Path(out_dir) / "runs"
    if not root.is_dir():
        return []
    rows = []
    for path in sorted(root.glob("*/seed-*.json")):
        summary = _read_summary(path)
        if summary is not None:
            rows.append(summary)
    rows.sort(key=lambda r: (r["arm"], int(r["seed"])))
    return rows


def aggregate_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, AGGREGATE_COLUMNS, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in AGGREGATE_COLUMNS})
    return buf.getvalue()


def write_aggregate(out_dir) -> Path:
    """Rebuild ``aggregate.csv`` from every summary on disk."""
    path = Path(out_dir) / "aggregate.csv"
    _write_atomic(path, aggregate_csv(collect_summaries(out_dir)))
    return path
