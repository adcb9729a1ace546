"""Request-log and report file formats.

Logs are newline-delimited JSON records behind a versioned header comment
line; figure reports are CSV behind the same kind of header. Floats pass
through Python's shortest round-trip repr, so write-then-read is exact and
identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import ActionSpace
from .gains import (
    SyntheticGainParams,
    pool_gain_row,
    sample_score_pool,
    synthetic_rows,
)

LOG_FORMAT = "dynalloc-log v1"
REPORT_FORMAT = "dynalloc-report v1"

FIGURE_COLUMNS = {
    "fig3": ("lambda", "total_gain", "total_cost", "served_count"),
    "fig4": ("series", "total_gain", "total_cost"),
    "fig5": ("action", "served_count", "sum_gain", "sum_cost"),
    "fig6": (
        "tick",
        "arrivals",
        "qps",
        "runtime",
        "fail_rate",
        "total_cost",
        "total_gain",
        "max_power",
        "lambda",
        "served",
        "failed",
        "skipped",
        "utilization",
        "control_error",
        "control_action",
    ),
}


class LogFormatError(ValueError):
    """A log or report file failed validation; the message carries the line."""


@dataclass(frozen=True)
class FeatureVector:
    """Request features in four groups; no per-ad features by design."""

    user_profile: tuple[float, ...] = ()
    user_behavior: tuple[float, ...] = ()
    context: tuple[float, ...] = ()
    system_status: tuple[float, ...] = ()

    def concat(self) -> np.ndarray:
        return np.asarray(
            self.user_profile + self.user_behavior + self.context + self.system_status,
            dtype=float,
        )


_FEATURE_GROUPS = ("user_profile", "user_behavior", "context", "system_status")


@dataclass(frozen=True)
class LogRecord:
    """One logged request.

    Carries either the full per-action gain vector (synthetic datasets) or
    the logged action with its realized gain (replay logs) - or both.
    """

    request_id: str
    timestamp: int
    features: FeatureVector
    logged_action: int | None = None
    realized_gain: float | None = None
    per_action_gains: tuple[float, ...] | None = None

    def __post_init__(self):
        has_replay = self.logged_action is not None and self.realized_gain is not None
        if not has_replay and self.per_action_gains is None:
            raise ValueError(
                "record needs per_action_gains or a logged_action/realized_gain pair"
            )


def write_logs(records, path) -> int:
    """Write records as header + one JSON object per line; returns count."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {LOG_FORMAT}\n")
        for rec in records:
            obj = {
                "request_id": rec.request_id,
                "timestamp": rec.timestamp,
                "features": {g: list(getattr(rec.features, g)) for g in _FEATURE_GROUPS},
            }
            if rec.logged_action is not None:
                obj["logged_action"] = rec.logged_action
            if rec.realized_gain is not None:
                obj["realized_gain"] = rec.realized_gain
            if rec.per_action_gains is not None:
                obj["per_action_gains"] = list(rec.per_action_gains)
            fh.write(json.dumps(obj) + "\n")
    return len(records)


def _parse_record(obj: dict, lineno: int) -> LogRecord:
    for name in ("request_id", "timestamp", "features"):
        if name not in obj:
            raise LogFormatError(f"line {lineno}: missing required field '{name}'")
    feats = obj["features"]
    if not isinstance(feats, dict):
        raise LogFormatError(f"line {lineno}: 'features' must be an object")
    groups = {}
    for g in _FEATURE_GROUPS:
        vals = feats.get(g, [])
        try:
            groups[g] = tuple(float(v) for v in vals)
        except (TypeError, ValueError):
            raise LogFormatError(f"line {lineno}: feature group '{g}' is not numeric")
    pag = obj.get("per_action_gains")
    try:
        return LogRecord(
            request_id=str(obj["request_id"]),
            timestamp=int(obj["timestamp"]),
            features=FeatureVector(**groups),
            logged_action=(None if obj.get("logged_action") is None else int(obj["logged_action"])),
            realized_gain=(None if obj.get("realized_gain") is None else float(obj["realized_gain"])),
            per_action_gains=(None if pag is None else tuple(float(v) for v in pag)),
        )
    except ValueError as exc:
        raise LogFormatError(f"line {lineno}: {exc}") from exc


def read_logs(path) -> list[LogRecord]:
    """Read a log file, rejecting unknown versions and malformed lines."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        return []
    if lines[0] != f"# {LOG_FORMAT}":
        raise LogFormatError(f"line 1: expected header '# {LOG_FORMAT}'")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LogFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
        records.append(_parse_record(obj, lineno))
    return records


def records_gain_matrix(records) -> np.ndarray:
    """Stack per-action gain vectors of all records into an (N, M) matrix."""
    rows = []
    for idx, rec in enumerate(records):
        if rec.per_action_gains is None:
            raise ValueError(f"record {idx} ({rec.request_id}) has no per_action_gains")
        rows.append(rec.per_action_gains)
    if not rows:
        return np.zeros((0, 0))
    return np.asarray(rows, dtype=float)


def training_arrays(records) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(features, realized gain, logged action) arrays for estimator fitting."""
    X, y, actions = [], [], []
    for idx, rec in enumerate(records):
        if rec.logged_action is None or rec.realized_gain is None:
            raise ValueError(f"record {idx} ({rec.request_id}) lacks replay fields")
        X.append(rec.features.concat())
        y.append(rec.realized_gain)
        actions.append(rec.logged_action)
    return (
        np.asarray(X, dtype=float),
        np.asarray(y, dtype=float),
        np.asarray(actions, dtype=np.int64),
    )


@dataclass(frozen=True)
class DatasetSummary:
    n_records: int
    mode: str
    path: str


def generate_dataset(
    params: SyntheticGainParams,
    n: int,
    actions: ActionSpace,
    seed,
    path,
    mode: str = "power",
    top_k: int = 3,
    feature_dims: tuple[int, int, int, int] = (3, 3, 2, 2),
) -> DatasetSummary:
    """Write a synthetic request log with per-action gains.

    ``mode="power"`` draws the power-law family, whose rows satisfy the
    structural assumptions exactly; ``mode="topk"`` scores candidate pools
    (the action costs become integer evaluation quotas), which satisfies
    them in expectation. Each record also gets random features, a
    uniformly logged action, and that action's gain as the realized gain,
    so the same file can train the linear estimator.
    """
    if mode not in ("power", "topk"):
        raise ValueError(f"mode must be 'power' or 'topk', got {mode!r}")
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.default_rng(seed)
    costs = actions.costs
    if mode == "power":
        gains = synthetic_rows(params, costs, n, rng)
    else:
        quotas = np.rint(costs).astype(int)
        if np.any(quotas < 1):
            raise ValueError("topk mode needs integer action costs >= 1")
        pool_size = int(quotas[-1])
        gains = np.empty((n, actions.n_actions))
        for i in range(n):
            pool = sample_score_pool(rng, pool_size, top_k)
            gains[i] = pool_gain_row(pool, quotas)

    records = []
    for i in range(n):
        blocks = [tuple(rng.normal(0.0, 1.0, d)) for d in feature_dims]
        logged = int(rng.integers(0, actions.n_actions))
        records.append(
            LogRecord(
                request_id=f"req-{i:08d}",
                timestamp=i,
                features=FeatureVector(*blocks),
                logged_action=logged,
                realized_gain=float(gains[i, logged]),
                per_action_gains=tuple(float(g) for g in gains[i]),
            )
        )
    write_logs(records, path)
    return DatasetSummary(n_records=n, mode=mode, path=str(path))


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_report_csv(path, schema: str, header, rows) -> int:
    """Generic versioned CSV writer; deterministic for identical inputs."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# {REPORT_FORMAT} {schema}\n")
        fh.write(",".join(header) + "\n")
        count = 0
        for row in rows:
            fh.write(",".join(_format_cell(v) for v in row) + "\n")
            count += 1
    return count


def read_report_csv(path) -> tuple[str, list[str], list[list[str]]]:
    """Read a versioned report CSV: (schema, header, string rows)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith(f"# {REPORT_FORMAT} "):
        raise LogFormatError(f"line 1: expected header '# {REPORT_FORMAT} <schema>'")
    schema = lines[0][len(f"# {REPORT_FORMAT} ") :].strip()
    if len(lines) < 2:
        raise LogFormatError("line 2: missing column header")
    header = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:] if line]
    return schema, header, rows


def emit_figure_data(source, figure_id: str, path) -> int:
    """Write one figure's data rows as a versioned CSV; returns row count.

    ``fig3`` takes sweep points, ``fig4`` (series, gain, cost) tuples,
    ``fig5`` per-action aggregates, ``fig6`` tick metrics.
    """
    if figure_id not in FIGURE_COLUMNS:
        raise ValueError(f"unknown figure id {figure_id!r}")
    header = FIGURE_COLUMNS[figure_id]
    rows = []
    try:
        if figure_id == "fig3":
            for p in source:
                rows.append((p.lam, p.total_gain, p.total_cost, p.served_count))
        elif figure_id == "fig4":
            for series, gain, cost in source:
                rows.append((str(series), float(gain), float(cost)))
        elif figure_id == "fig5":
            for action, count, sum_gain, sum_cost in source:
                rows.append((int(action), int(count), float(sum_gain), float(sum_cost)))
        else:
            for m in source:
                rows.append(
                    (
                        m.tick,
                        m.arrivals,
                        m.qps,
                        m.runtime,
                        m.fail_rate,
                        m.total_cost,
                        m.total_gain,
                        m.max_power,
                        m.lam,
                        m.served,
                        m.failed,
                        m.skipped,
                        m.utilization,
                        m.control_error,
                        m.control_action,
                    )
                )
    except (AttributeError, TypeError, ValueError) as exc:
        raise ValueError(f"source does not match figure {figure_id}: {exc}") from exc
    return write_report_csv(path, figure_id, header, rows)
