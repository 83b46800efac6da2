"""Core domain types: tasks, channel layout, task records and sessions.

A recording session is five one-minute tasks in a fixed protocol order.
Each snapshot is one timestamped vector of 20 absolute band-power values
(4 electrodes x 5 bands) in a fixed canonical order, so feature index
``electrode_index * 5 + band_index`` is stable across the whole package.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class Task(enum.Enum):
    THINK = "Think"
    COUNT = "Count"
    RECALL = "Recall"
    BREATHE = "Breathe"
    DRAW = "Draw"

    @property
    def label(self) -> int:
        """Class label: protocol position 0..4."""
        return TASK_ORDER.index(self)


TASK_ORDER: tuple[Task, ...] = (
    Task.THINK,
    Task.COUNT,
    Task.RECALL,
    Task.BREATHE,
    Task.DRAW,
)

TASK_NAMES: tuple[str, ...] = tuple(t.value for t in TASK_ORDER)

ELECTRODES: tuple[str, ...] = ("TP9", "AF7", "AF8", "TP10")
BANDS: tuple[str, ...] = ("delta", "theta", "alpha", "beta", "gamma")

N_ELECTRODES = len(ELECTRODES)
N_BANDS = len(BANDS)
N_FEATURES = N_ELECTRODES * N_BANDS

# canonical feature column names: TP9_delta ... TP10_gamma
FEATURE_NAMES: tuple[str, ...] = tuple(
    f"{e}_{b}" for e in ELECTRODES for b in BANDS
)


def task_from_name(name: str) -> Task:
    for t in TASK_ORDER:
        if t.value == name:
            return t
    raise KeyError(name)


@dataclass(frozen=True)
class ChannelLayout:
    """Canonical electrode/band ordering used everywhere in the package."""

    electrodes: tuple[str, ...] = ELECTRODES
    bands: tuple[str, ...] = BANDS

    def feature_index(self, electrode: str, band: str) -> int:
        return self.electrodes.index(electrode) * len(self.bands) + self.bands.index(band)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(f"{e}_{b}" for e in self.electrodes for b in self.bands)

    @property
    def n_features(self) -> int:
        return len(self.electrodes) * len(self.bands)


CANONICAL_LAYOUT = ChannelLayout()


@dataclass(frozen=True)
class SpectralSnapshot:
    """One timestamped 20-vector of absolute band power."""

    timestamp: float
    values: np.ndarray  # shape (20,)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (N_FEATURES,):
            raise ValueError(f"snapshot needs {N_FEATURES} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("snapshot contains non-finite values")
        if self.timestamp < 0:
            raise ValueError("timestamp must be non-negative")
        object.__setattr__(self, "values", v)


@dataclass
class TaskRecord:
    """All snapshots of one task, stored as parallel arrays.

    ``timestamps`` are seconds since session start and strictly increasing;
    ``values`` is (n, 20) float64 with all entries finite.
    """

    task: Task
    timestamps: np.ndarray
    values: np.ndarray
    nominal_duration: float = 60.0

    def __post_init__(self):
        self.timestamps = np.ascontiguousarray(self.timestamps, dtype=np.float64)
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.timestamps.ndim != 1:
            raise ValueError("timestamps must be 1-D")
        if self.values.shape != (len(self.timestamps), N_FEATURES):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"{len(self.timestamps)} timestamps x {N_FEATURES} features"
            )
        self.timestamps.setflags(write=False)
        self.values.setflags(write=False)

    def __len__(self) -> int:
        return len(self.timestamps)

    def snapshot(self, i: int) -> SpectralSnapshot:
        return SpectralSnapshot(float(self.timestamps[i]), self.values[i])

    def validate(self, sample_rate: float) -> None:
        """Check the type invariants; raises ValueError on violation."""
        if len(self) and not np.all(np.diff(self.timestamps) > 0):
            raise ValueError(f"{self.task.value}: timestamps not strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"{self.task.value}: non-finite values")
        cap = self.nominal_duration * sample_rate * 1.05
        if len(self) > cap:
            raise ValueError(
                f"{self.task.value}: {len(self)} snapshots exceeds cap {cap:.0f}"
            )


@dataclass
class Session:
    """One five-minute recording: five tasks in protocol order."""

    subject_id: int
    session_index: int
    tasks: list[TaskRecord] = field(default_factory=list)
    sample_rate: float = 10.0

    def validate(self) -> None:
        if self.subject_id < 1:
            raise ValueError("subject_id must be a positive integer")
        if not 1 <= self.session_index <= 6:
            raise ValueError(f"session_index {self.session_index} outside 1..6")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        got = tuple(t.task for t in self.tasks)
        if got != TASK_ORDER:
            raise ValueError(f"tasks must be exactly {TASK_NAMES} in order, got {got}")
        for t in self.tasks:
            t.validate(self.sample_rate)

    def task(self, task: Task) -> TaskRecord:
        return self.tasks[task.label]
