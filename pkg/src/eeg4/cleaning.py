"""Cleaning pipeline: transition trim, flat-line removal, exclusion accounting.

Order is fixed: trim first, then detect flat lines on the trimmed task.
A flat line is a maximal run of consecutive snapshots whose value on one
channel is exactly equal (bitwise equality of the parsed float); runs at
least ``flatline_seconds`` long are removed whole-row. Loss fractions are
always computed against post-trim counts, and every exclusion comparison
is strict (a session at exactly the threshold is retained).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .types import N_BANDS, N_ELECTRODES, Session, Task, TaskRecord


@dataclass(frozen=True)
class CleanConfig:
    trim_fraction: float = 0.30
    flatline_seconds: float = 1.4
    session_loss_threshold: float = 0.65
    subject_loss_threshold: float = 0.65
    fold_loss_threshold: float = 0.65
    flatline_scope: str = "channel"  # "channel" (20 series) or "electrode" (4)

    def __post_init__(self):
        for name in (
            "trim_fraction",
            "session_loss_threshold",
            "subject_loss_threshold",
            "fold_loss_threshold",
        ):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must be in (0,1), got {v}")
        if self.flatline_seconds <= 0:
            raise ValueError("flatline_seconds must be positive")
        if self.flatline_scope not in ("channel", "electrode"):
            raise ValueError(f"flatline_scope must be channel|electrode, got {self.flatline_scope}")


def flatline_run_threshold(flatline_seconds: float, sample_rate: float) -> int:
    """Minimum run length in samples; must come out at least 2."""
    w = math.ceil(flatline_seconds * sample_rate)
    if w < 2:
        raise ValueError(
            f"flatline_seconds x sample_rate gives a {w}-sample run; need >= 2"
        )
    return w


def trim_transition(task: TaskRecord, trim_fraction: float) -> TaskRecord:
    """Drop the first ceil(trim_fraction * n) snapshots of the task."""
    n = len(task)
    k = math.ceil(trim_fraction * n)
    return replace(task, timestamps=task.timestamps[k:], values=task.values[k:])


def _flag_runs(equal_prev: np.ndarray, min_run: int) -> np.ndarray:
    """Boolean mask of snapshots inside equal-value runs of >= min_run samples.

    ``equal_prev[i]`` says sample i+1 equals sample i on the channel under
    test; a run of r consecutive True covers r+1 snapshots.
    """
    n = equal_prev.shape[0] + 1
    flagged = np.zeros(n, dtype=bool)
    if n < 2:
        return flagged
    padded = np.concatenate(([False], equal_prev, [False]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    # edges pair up as (run start, run end) in equal_prev coordinates
    for s, e in zip(edges[::2], edges[1::2]):
        run_len = (e - s) + 1  # snapshots covered
        if run_len >= min_run:
            flagged[s : e + 1] = True
    return flagged


def detect_flatlines(
    task: TaskRecord,
    flatline_seconds: float,
    sample_rate: float,
    scope: str = "channel",
) -> np.ndarray:
    """Indices of snapshots belonging to any flat-line run (union over channels)."""
    min_run = flatline_run_threshold(flatline_seconds, sample_rate)
    n = len(task)
    if n < min_run:
        return np.empty(0, dtype=np.int64)
    v = task.values
    flagged = np.zeros(n, dtype=bool)
    if scope == "channel":
        for c in range(v.shape[1]):
            eq = v[1:, c] == v[:-1, c]
            if eq.any():
                flagged |= _flag_runs(eq, min_run)
    elif scope == "electrode":
        # stuck electrode: all five bands repeat together
        for e in range(N_ELECTRODES):
            block = v[:, e * N_BANDS : (e + 1) * N_BANDS]
            eq = np.all(block[1:] == block[:-1], axis=1)
            if eq.any():
                flagged |= _flag_runs(eq, min_run)
    else:
        raise ValueError(f"unknown flatline scope {scope!r}")
    return np.flatnonzero(flagged).astype(np.int64)


def remove_flatlines(task: TaskRecord, flagged: np.ndarray) -> tuple[TaskRecord, int]:
    """Delete the flagged snapshots, preserving the order of survivors."""
    flagged = np.asarray(flagged, dtype=np.int64)
    if flagged.size == 0:
        return task, 0
    if flagged.min() < 0 or flagged.max() >= len(task):
        raise IndexError("flagged indices outside the task")
    keep = np.ones(len(task), dtype=bool)
    keep[flagged] = False
    cleaned = replace(task, timestamps=task.timestamps[keep], values=task.values[keep])
    return cleaned, int(flagged.size)


@dataclass(frozen=True)
class TaskCleanStats:
    subject_id: int
    session_index: int
    task: Task
    nominal_count: int  # snapshots before trim
    post_trim_count: int
    removed_flatline_count: int
    retained_count: int

    @property
    def loss_fraction(self) -> float:
        if self.post_trim_count == 0:
            return 0.0
        return self.removed_flatline_count / self.post_trim_count


def clean_task(
    task: TaskRecord,
    config: CleanConfig,
    sample_rate: float,
    subject_id: int,
    session_index: int,
) -> tuple[TaskRecord, TaskCleanStats]:
    """Trim then remove flat lines; returns the cleaned task and its accounting."""
    trimmed = trim_transition(task, config.trim_fraction)
    flagged = detect_flatlines(
        trimmed, config.flatline_seconds, sample_rate, config.flatline_scope
    )
    cleaned, removed = remove_flatlines(trimmed, flagged)
    stats = TaskCleanStats(
        subject_id=subject_id,
        session_index=session_index,
        task=task.task,
        nominal_count=len(task),
        post_trim_count=len(trimmed),
        removed_flatline_count=removed,
        retained_count=len(cleaned),
    )
    return cleaned, stats


def clean_session(session: Session, config: CleanConfig) -> tuple[Session, list[TaskCleanStats]]:
    cleaned_tasks = []
    stats = []
    for task in session.tasks:
        cleaned, st = clean_task(
            task, config, session.sample_rate, session.subject_id, session.session_index
        )
        cleaned_tasks.append(cleaned)
        stats.append(st)
    out = Session(session.subject_id, session.session_index, cleaned_tasks, session.sample_rate)
    return out, stats


@dataclass
class CleanReport:
    """Loss accounting at task, session and subject level plus exclusions."""

    config: CleanConfig
    task_stats: list[TaskCleanStats] = field(default_factory=list)

    def _sums(self, key) -> dict:
        acc: dict = {}
        for st in self.task_stats:
            k = key(st)
            a = acc.setdefault(k, [0, 0, 0, 0])
            a[0] += st.nominal_count
            a[1] += st.post_trim_count
            a[2] += st.removed_flatline_count
            a[3] += st.retained_count
        return acc

    @staticmethod
    def _loss(post_trim: int, removed: int) -> float:
        return removed / post_trim if post_trim else 0.0

    def session_stats(self) -> dict[tuple[int, int], dict]:
        out = {}
        for k, (nom, post, rem, ret) in sorted(self._sums(
            lambda s: (s.subject_id, s.session_index)
        ).items()):
            out[k] = {
                "nominal_count": nom,
                "post_trim_count": post,
                "removed_flatline_count": rem,
                "retained_count": ret,
                "loss_fraction": self._loss(post, rem),
            }
        return out

    def subject_stats(self) -> dict[int, dict]:
        out = {}
        for k, (nom, post, rem, ret) in sorted(self._sums(lambda s: s.subject_id).items()):
            out[k] = {
                "nominal_count": nom,
                "post_trim_count": post,
                "removed_flatline_count": rem,
                "retained_count": ret,
                "loss_fraction": self._loss(post, rem),
            }
        return out

    @property
    def excluded_sessions(self) -> list[tuple[int, int]]:
        thr = self.config.session_loss_threshold
        return [k for k, s in self.session_stats().items() if s["loss_fraction"] > thr]

    @property
    def excluded_subjects(self) -> list[int]:
        thr = self.config.subject_loss_threshold
        return [k for k, s in self.subject_stats().items() if s["loss_fraction"] > thr]

    def to_json_dict(self) -> dict:
        return {
            "config": {
                "trim_fraction": self.config.trim_fraction,
                "flatline_seconds": self.config.flatline_seconds,
                "session_loss_threshold": self.config.session_loss_threshold,
                "subject_loss_threshold": self.config.subject_loss_threshold,
                "fold_loss_threshold": self.config.fold_loss_threshold,
                "flatline_scope": self.config.flatline_scope,
            },
            "tasks": [
                {
                    "subject": st.subject_id,
                    "session": st.session_index,
                    "task": st.task.value,
                    "nominal_count": st.nominal_count,
                    "post_trim_count": st.post_trim_count,
                    "removed_flatline_count": st.removed_flatline_count,
                    "retained_count": st.retained_count,
                    "loss_fraction": st.loss_fraction,
                }
                for st in self.task_stats
            ],
            "sessions": [
                {"subject": s, "session": i, **stats}
                for (s, i), stats in self.session_stats().items()
            ],
            "subjects": [
                {"subject": s, **stats} for s, stats in self.subject_stats().items()
            ],
            "excluded_sessions": [list(k) for k in self.excluded_sessions],
            "excluded_subjects": self.excluded_subjects,
        }

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )

    def write_csv(self, path: str | Path) -> None:
        lines = [
            "subject,session,task,nominal_count,post_trim_count,"
            "removed_flatline_count,retained_count,loss_fraction"
        ]
        for st in self.task_stats:
            lines.append(
                f"{st.subject_id},{st.session_index},{st.task.value},"
                f"{st.nominal_count},{st.post_trim_count},"
                f"{st.removed_flatline_count},{st.retained_count},"
                f"{st.loss_fraction:.6f}"
            )
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def apply_exclusions(
    sessions: list[Session], report: CleanReport
) -> tuple[list[Session], list[tuple[int, int]], list[int]]:
    """Drop sessions and subjects whose loss exceeds the strict thresholds.

    Returns (retained sessions, excluded (subject, session) pairs,
    excluded subject ids). A session belonging to an excluded subject is
    dropped even if the session itself stayed under the session threshold.
    """
    excluded_sessions = set(report.excluded_sessions)
    excluded_subjects = set(report.excluded_subjects)
    retained = [
        s
        for s in sessions
        if s.subject_id not in excluded_subjects
        and (s.subject_id, s.session_index) not in excluded_sessions
    ]
    return retained, sorted(excluded_sessions), sorted(excluded_subjects)
