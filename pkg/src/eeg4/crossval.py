"""Time-wise cross-validation: contiguous part splitting and fold assembly.

Each task's post-trim nominal time range (42 s at defaults) is cut into k
equal contiguous intervals; parts are time-based so removed snapshots never
shift later boundaries. Fold i tests part i of every task of every retained
session of a subject and trains on the remaining parts. A fold is discarded
(strictly) when its test parts retain less than ``1 - fold_loss_threshold``
of their nominal snapshot count.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import NoUsableFolds
from .types import N_FEATURES, TASK_ORDER, Session, TaskRecord


@dataclass(frozen=True)
class CvConfig:
    folds: int = 7
    fold_loss_threshold: float = 0.65
    trim_fraction: float = 0.30  # must match the cleaning config
    invert_folds: bool = False  # train on one part, test on the rest

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if not 0.0 < self.fold_loss_threshold < 1.0:
            raise ValueError("fold_loss_threshold must be in (0,1)")
        if not 0.0 < self.trim_fraction < 1.0:
            raise ValueError("trim_fraction must be in (0,1)")


@dataclass
class PartAssignment:
    """Per-task part boundaries and the part index of each surviving snapshot."""

    boundaries: np.ndarray  # (k+1,) seconds, session-relative
    part_of: np.ndarray  # (n,) int, 0..k-1


def make_parts(task: TaskRecord, task_start: float, trim_fraction: float, k: int = 7) -> PartAssignment:
    """Split the post-trim nominal range of one task into k equal intervals.

    Snapshots falling outside the nominal range (possible when early rows
    were missing, so the count-based trim removed less than the nominal
    transition window) are clamped into the nearest end part, keeping the
    partition property over all surviving snapshots.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    start = task_start + trim_fraction * task.nominal_duration
    end = task_start + task.nominal_duration
    boundaries = np.linspace(start, end, k + 1)
    part_of = np.searchsorted(boundaries[1:-1], task.timestamps, side="right")
    return PartAssignment(boundaries=boundaries, part_of=part_of.astype(np.int64))


def nominal_part_count(sample_rate: float, trim_fraction: float, k: int, nominal_duration: float = 60.0) -> float:
    """Snapshots one part would hold on a complete task with zero cleaning loss."""
    nominal_total = round(nominal_duration * sample_rate)
    post_trim = nominal_total - math.ceil(trim_fraction * nominal_total)
    return post_trim / k


@dataclass
class Fold:
    fold_index: int
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray


@dataclass
class FoldPlan:
    """Audit record of the fold construction for one subject."""

    subject_id: int
    folds: int
    part_boundaries: dict[tuple[int, str], list[float]] = field(default_factory=dict)
    test_counts: list[int] = field(default_factory=list)
    nominal_test_counts: list[float] = field(default_factory=list)
    retained_folds: list[int] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "subject": self.subject_id,
            "folds": self.folds,
            "part_boundaries": [
                {"session": s, "task": t, "boundaries": b}
                for (s, t), b in sorted(self.part_boundaries.items())
            ],
            "test_counts": self.test_counts,
            "nominal_test_counts": self.nominal_test_counts,
            "retained_folds": self.retained_folds,
        }


@dataclass
class FoldedDataset:
    subject_id: int
    folds: list[Fold]


def assemble_folds(sessions: list[Session], config: CvConfig) -> tuple[FoldPlan, FoldedDataset]:
    """Build the fold plan and train/test matrices for one subject.

    ``sessions`` must be the cleaned, retained sessions of a single subject.
    Raises NoUsableFolds when the loss rule discards all folds.
    """
    if not sessions:
        raise ValueError("assemble_folds needs at least one session")
    subject_id = sessions[0].subject_id
    if any(s.subject_id != subject_id for s in sessions):
        raise ValueError("assemble_folds mixes subjects")
    sessions = sorted(sessions, key=lambda s: s.session_index)
    k = config.folds

    plan = FoldPlan(subject_id=subject_id, folds=k)
    # per (session, task): values and the part index of every snapshot
    pieces: list[tuple[np.ndarray, np.ndarray, int]] = []
    nominal_per_part = 0.0
    for session in sessions:
        per_part = nominal_part_count(session.sample_rate, config.trim_fraction, k)
        for task in session.tasks:
            task_start = task.task.label * task.nominal_duration
            assignment = make_parts(task, task_start, config.trim_fraction, k)
            plan.part_boundaries[(session.session_index, task.task.value)] = [
                float(b) for b in assignment.boundaries
            ]
            pieces.append((task.values, assignment.part_of, task.task.label))
            nominal_per_part += per_part

    folds: list[Fold] = []
    for i in range(k):
        train_X, train_y, test_X, test_y = [], [], [], []
        for values, part_of, label in pieces:
            mask = part_of == i
            test_X.append(values[mask])
            test_y.append(np.full(int(mask.sum()), label, dtype=np.int64))
            train_X.append(values[~mask])
            train_y.append(np.full(int((~mask).sum()), label, dtype=np.int64))
        X_te = np.concatenate(test_X) if test_X else np.empty((0, N_FEATURES))
        y_te = np.concatenate(test_y) if test_y else np.empty(0, dtype=np.int64)
        X_tr = np.concatenate(train_X) if train_X else np.empty((0, N_FEATURES))
        y_tr = np.concatenate(train_y) if train_y else np.empty(0, dtype=np.int64)
        plan.test_counts.append(int(len(y_te)))
        plan.nominal_test_counts.append(nominal_per_part)
        # strict ">" in loss space, matching the session/subject rule rounding
        loss = 1.0 - len(y_te) / nominal_per_part if nominal_per_part > 0 else 0.0
        if loss > config.fold_loss_threshold:
            continue
        plan.retained_folds.append(i)
        if config.invert_folds:
            folds.append(Fold(i, X_te, y_te, X_tr, y_tr))
        else:
            folds.append(Fold(i, X_tr, y_tr, X_te, y_te))

    if not folds:
        raise NoUsableFolds(subject_id)
    return plan, FoldedDataset(subject_id=subject_id, folds=folds)


def write_fold_plans(plans: list[FoldPlan], path: str | Path) -> None:
    doc = [p.to_json_dict() for p in sorted(plans, key=lambda p: p.subject_id)]
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
