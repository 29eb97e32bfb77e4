"""Dataset container and the on-disk trial format (one CSV per trial)."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import DimensionMismatch, NonFiniteInput

TRIAL_PATTERN = "trial_{:03d}.csv"


@dataclass
class MtsDataset:
    """A collection of real-valued series, each T_i x p, with optional truth.

    ``labels`` are ground-truth group labels and ``contaminated`` flags the
    trials altered by an artifact injector; both stay None for real data.
    """

    series: list = field(default_factory=list)
    labels: np.ndarray | None = None
    contaminated: np.ndarray | None = None

    def __post_init__(self):
        self.series = [np.asarray(x, dtype=float) for x in self.series]
        if not self.series:
            raise ValueError("dataset needs at least one series")
        p = self.series[0].shape[1]
        for i, x in enumerate(self.series):
            if x.ndim != 2 or x.shape[1] != p:
                raise DimensionMismatch(f"series {i} has shape {x.shape}, expected (T, {p})")
            if not np.isfinite(x).all():
                raise NonFiniteInput(f"series {i} contains non-finite entries")
        if self.labels is not None:
            self.labels = np.asarray(self.labels)
            if len(self.labels) != len(self.series):
                raise DimensionMismatch("one label per series required")
        if self.contaminated is not None:
            self.contaminated = np.asarray(self.contaminated, dtype=bool)
            if len(self.contaminated) != len(self.series):
                raise DimensionMismatch("one contamination flag per series required")

    @property
    def n_series(self) -> int:
        return len(self.series)

    @property
    def n_channels(self) -> int:
        return self.series[0].shape[1]

    @property
    def lengths(self) -> list[int]:
        return [x.shape[0] for x in self.series]

    def copy(self) -> "MtsDataset":
        return MtsDataset(
            series=[x.copy() for x in self.series],
            labels=None if self.labels is None else self.labels.copy(),
            contaminated=None if self.contaminated is None else self.contaminated.copy(),
        )

    def contaminated_indices(self) -> np.ndarray:
        if self.contaminated is None:
            return np.array([], dtype=int)
        return np.flatnonzero(self.contaminated)


def channel_names(p: int) -> list[str]:
    return [f"ch{j + 1:02d}" for j in range(p)]


def write_csv_dir(dataset: MtsDataset, out_dir) -> list[Path]:
    """Write one CSV per trial (rows = time, columns = channels, header row)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    header = ",".join(channel_names(dataset.n_channels))
    paths = []
    for i, x in enumerate(dataset.series):
        path = out_dir / TRIAL_PATTERN.format(i)
        np.savetxt(path, x, delimiter=",", header=header, comments="", fmt="%.17g")
        paths.append(path)
    return paths


def read_csv_dir(data_dir) -> MtsDataset:
    """Load every trial_*.csv in a directory, in sorted filename order."""
    data_dir = Path(data_dir)
    paths = sorted(data_dir.glob("trial_*.csv"))
    if not paths:
        raise FileNotFoundError(f"no trial_*.csv files under {data_dir}")
    series = [np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2) for path in paths]
    return MtsDataset(series=series)


def dataset_digest(data_dir) -> str:
    """SHA-256 over the bytes of all trial files in sorted filename order.

    Binds fitted models to the exact data they were computed from.
    """
    data_dir = Path(data_dir)
    digest = hashlib.sha256()
    for path in sorted(data_dir.glob("trial_*.csv")):
        digest.update(path.name.encode())
        digest.update(path.read_bytes())
    return digest.hexdigest()
