"""Recording parsers and task segmentation.

Two on-disk formats are accepted:

* canonical session CSV -- header ``subject,session,task,t`` plus the 20
  feature columns (``TP9_delta`` ... ``TP10_gamma``); one snapshot per row,
  task given explicitly per row.
* Mind Monitor-style CSV -- ``TimeStamp`` plus absolute band columns named
  ``Delta_TP9`` ... ``Gamma_TP10``; task boundaries come either from a
  non-empty ``Elements`` marker cell or from a sidecar JSON file with six
  boundary timestamps.

Rows with blank or non-finite cells are dropped (never imputed) and counted
in the returned ParseReport. Row numbers in errors are 1-based file line
numbers (the header is line 1).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

import numpy as np

from .errors import (
    BadTaskLabel,
    BoundaryCountMismatch,
    ClockSkew,
    EmptyTask,
    MissingColumn,
    NonMonotonicTimestamp,
    NoTaskMarkers,
)
from .types import (
    BANDS,
    ELECTRODES,
    FEATURE_NAMES,
    N_FEATURES,
    TASK_NAMES,
    TASK_ORDER,
    Session,
    Task,
    TaskRecord,
    task_from_name,
)

CANONICAL_COLUMNS: tuple[str, ...] = ("subject", "session", "task", "t") + FEATURE_NAMES

# Mind Monitor names its absolute band-power columns Band_Electrode.
MIND_MONITOR_COLUMNS: tuple[str, ...] = tuple(
    f"{b.capitalize()}_{e}" for b in BANDS for e in ELECTRODES
)


@dataclass
class ParseReport:
    """Per-file accounting of rows rejected while parsing."""

    rows_total: int = 0
    dropped_nonfinite: int = 0
    dropped_nonmonotonic: int = 0
    discarded_out_of_range: int = 0

    @property
    def rows_rejected(self) -> int:
        return self.dropped_nonfinite + self.dropped_nonmonotonic + self.discarded_out_of_range


def _parse_cells(cells: list[str]) -> np.ndarray:
    """Parse feature cells; blank or malformed cells become NaN."""
    out = np.empty(len(cells))
    for i, c in enumerate(cells):
        try:
            out[i] = float(c)
        except ValueError:
            out[i] = math.nan
    return out


def parse_canonical_csv(path: str | Path, sample_rate: float = 10.0) -> tuple[Session, ParseReport]:
    """Parse a canonical session CSV into a validated Session.

    Rows containing any non-finite value (including blank cells and a
    non-finite ``t``) are dropped and counted. Raises MissingColumn,
    BadTaskLabel, NonMonotonicTimestamp or EmptyTask on contract violations.
    """
    path = Path(path)
    report = ParseReport()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumn("subject") from None
        col = {name: i for i, name in enumerate(header)}
        for name in CANONICAL_COLUMNS:
            if name not in col:
                raise MissingColumn(name)
        idx_subject = col["subject"]
        idx_session = col["session"]
        idx_task = col["task"]
        idx_t = col["t"]
        idx_features = [col[name] for name in FEATURE_NAMES]

        subject_id: int | None = None
        session_index: int | None = None
        per_task_ts: dict[Task, list[float]] = {t: [] for t in TASK_ORDER}
        per_task_rows: dict[Task, list[np.ndarray]] = {t: [] for t in TASK_ORDER}

        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            report.rows_total += 1
            try:
                task = task_from_name(row[idx_task])
            except KeyError:
                raise BadTaskLabel(row[idx_task], line_no) from None
            subj = int(row[idx_subject])
            sess = int(row[idx_session])
            if subject_id is None:
                subject_id, session_index = subj, sess
            elif (subj, sess) != (subject_id, session_index):
                raise BadTaskLabel(
                    f"subject/session changed to {subj}/{sess} mid-file", line_no
                )
            vals = _parse_cells([row[i] for i in idx_features])
            t = _parse_cells([row[idx_t]])[0]
            if not (math.isfinite(t) and np.all(np.isfinite(vals))):
                report.dropped_nonfinite += 1
                continue
            ts_list = per_task_ts[task]
            if ts_list and t <= ts_list[-1]:
                raise NonMonotonicTimestamp(line_no, t, ts_list[-1])
            ts_list.append(t)
            per_task_rows[task].append(vals)

    for task in TASK_ORDER:
        if not per_task_ts[task]:
            raise EmptyTask(task.value)
    if subject_id is None or session_index is None:
        raise EmptyTask(TASK_ORDER[0].value)

    tasks = [
        TaskRecord(
            task,
            np.array(per_task_ts[task]),
            np.array(per_task_rows[task]),
        )
        for task in TASK_ORDER
    ]
    session = Session(subject_id, session_index, tasks, sample_rate)
    session.validate()
    return session, report


def write_canonical_csv(session: Session, path: str | Path) -> None:
    """Write a session in canonical form (shortest round-trip float format)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(CANONICAL_COLUMNS) + "\n")
        for record in session.tasks:
            name = record.task.value
            for i in range(len(record)):
                cells = [
                    str(session.subject_id),
                    str(session.session_index),
                    name,
                    repr(float(record.timestamps[i])),
                ]
                cells.extend(repr(float(v)) for v in record.values[i])
                fh.write(",".join(cells) + "\n")


def segment_tasks(
    timestamps: np.ndarray,
    values: np.ndarray,
    boundaries,
    nominal_duration: float = 60.0,
) -> tuple[list[TaskRecord], int]:
    """Assign rows to the five tasks by half-open intervals [b_i, b_{i+1}).

    ``boundaries`` must be six strictly increasing timestamps. Rows outside
    all intervals are discarded; the count of discarded rows is returned
    alongside the five TaskRecords (which may be empty).
    """
    b = np.asarray(boundaries, dtype=np.float64)
    if b.shape != (6,):
        raise BoundaryCountMismatch(f"expected 6 boundaries, got {b.shape}")
    if not np.all(np.diff(b) > 0):
        raise BoundaryCountMismatch("boundaries must be strictly increasing")
    timestamps = np.asarray(timestamps, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)

    idx = np.searchsorted(b, timestamps, side="right") - 1
    keep = (idx >= 0) & (idx <= 4)
    discarded = int(np.sum(~keep))
    records = []
    for k, task in enumerate(TASK_ORDER):
        mask = keep & (idx == k)
        records.append(TaskRecord(task, timestamps[mask], values[mask], nominal_duration))
    return records, discarded


def _parse_timestamp_cell(cell: str) -> float:
    """Mind Monitor timestamps: numeric seconds or an ISO-like datetime."""
    try:
        return float(cell)
    except ValueError:
        return datetime.fromisoformat(cell).timestamp()


def parse_mind_monitor_csv(
    path: str | Path,
    subject_id: int = 1,
    session_index: int = 1,
    sample_rate: float = 10.0,
    boundaries_path: str | Path | None = None,
) -> tuple[Session, ParseReport]:
    """Parse a Mind Monitor-style CSV into a canonical Session.

    Timestamps are rebased to seconds from the first retained row. Rows whose
    timestamp does not advance are dropped (counted); a decrease larger than
    0.5 s raises ClockSkew. Task boundaries come from the sidecar JSON when
    given, otherwise from non-empty ``Elements`` marker cells: six markers are
    used directly, five markers are treated as task starts with the end of the
    file (plus one sample period) closing the last task.
    """
    path = Path(path)
    report = ParseReport()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumn("TimeStamp") from None
        col = {name.strip(): i for i, name in enumerate(header)}
        if "TimeStamp" not in col:
            raise MissingColumn("TimeStamp")
        for name in MIND_MONITOR_COLUMNS:
            if name not in col:
                raise MissingColumn(name)
        idx_t = col["TimeStamp"]
        idx_elements = col.get("Elements")
        # source order is band-major; reorder to canonical electrode-major
        source = {name: col[name] for name in MIND_MONITOR_COLUMNS}
        idx_features = [
            source[f"{band.capitalize()}_{electrode}"]
            for electrode in ELECTRODES
            for band in BANDS
        ]

        raw_t: list[float] = []
        rows: list[np.ndarray] = []
        marker_times: list[float] = []
        t0: float | None = None
        last_raw: float | None = None
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            report.rows_total += 1
            try:
                t_abs = _parse_timestamp_cell(row[idx_t])
            except ValueError:
                report.dropped_nonfinite += 1
                continue
            if last_raw is not None and t_abs < last_raw - 0.5:
                raise ClockSkew(line_no, last_raw - t_abs)
            if t0 is None:
                t0 = t_abs
            t = t_abs - t0
            marker = (
                idx_elements is not None
                and idx_elements < len(row)
                and row[idx_elements].strip() != ""
            )
            if marker:
                marker_times.append(t)
            if last_raw is not None and t_abs <= last_raw:
                report.dropped_nonmonotonic += 1
                continue
            vals = _parse_cells([row[i] for i in idx_features])
            if not np.all(np.isfinite(vals)):
                report.dropped_nonfinite += 1
                continue
            last_raw = t_abs
            raw_t.append(t)
            rows.append(vals)

    if not raw_t:
        raise EmptyTask(TASK_ORDER[0].value)

    if boundaries_path is not None:
        boundaries = json.loads(Path(boundaries_path).read_text(encoding="utf-8"))
        if not isinstance(boundaries, list) or len(boundaries) != 6:
            raise BoundaryCountMismatch(
                f"sidecar file must hold a JSON array of 6 numbers, got {boundaries!r}"
            )
    elif len(marker_times) == 6:
        boundaries = marker_times
    elif len(marker_times) == 5:
        boundaries = marker_times + [raw_t[-1] + 1.0 / sample_rate]
    else:
        raise NoTaskMarkers(len(marker_times))

    records, discarded = segment_tasks(np.array(raw_t), np.array(rows), boundaries)
    report.discarded_out_of_range = discarded
    for record in records:
        if len(record) == 0:
            raise EmptyTask(record.task.value)
    session = Session(subject_id, session_index, records, sample_rate)
    session.validate()
    return session, report
