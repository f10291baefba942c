"""Dataset container, CSV ingestion, unit-cube scaling, seeded RNG streams."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEFAULT_SEED = 0


class DataError(ValueError):
    """Raised for malformed input data (bad CSV cells, bad shapes)."""


@dataclass(frozen=True)
class SeededRng:
    """Addressable deterministic RNG: equal (seed, stream) -> equal draws.

    Each logical task (replication, method, jitter pass) gets its own stream
    so parallel work stays reproducible without sharing generator state.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.Philox(ss))

    def substream(self, offset: int) -> "SeededRng":
        return SeededRng(self.seed, self.stream * 1000003 + 1 + offset)


def default_seed() -> int:
    """Seed 0 unless the IES_SEED environment variable overrides it."""
    env = os.environ.get("IES_SEED")
    if env is None:
        return DEFAULT_SEED
    return int(env)


@dataclass(frozen=True)
class Dataset:
    predictors: np.ndarray  # (N, p), finite floats
    response: np.ndarray  # (N,)
    column_names: tuple[str, ...]
    response_name: str = "y"

    def __post_init__(self):
        X = np.asarray(self.predictors, dtype=float)
        y = np.asarray(self.response, dtype=float)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DataError(f"predictor matrix must be N>=1 by p>=1, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise DataError(
                f"response length {y.shape} does not match {X.shape[0]} predictor rows"
            )
        if not np.all(np.isfinite(X)):
            i, j = np.argwhere(~np.isfinite(X))[0]
            raise DataError(f"non-finite predictor value at row {i}, column {self.column_names[j]!r}")
        if not np.all(np.isfinite(y)):
            i = int(np.argwhere(~np.isfinite(y))[0])
            raise DataError(f"non-finite response value at row {i}")
        if len(self.column_names) != X.shape[1]:
            raise DataError("column_names length does not match predictor columns")
        object.__setattr__(self, "predictors", X)
        object.__setattr__(self, "response", y)
        object.__setattr__(self, "column_names", tuple(self.column_names))
        X.setflags(write=False)
        y.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.predictors.shape[0]

    @property
    def n_cols(self) -> int:
        return self.predictors.shape[1]


@dataclass(frozen=True)
class ScaledView:
    """Per-column affine map of a Dataset's predictors onto [0,1].

    Columns with max == min are mapped to the constant 0 and listed in
    `constant_columns` instead of raising.
    """

    source: Dataset
    col_min: np.ndarray
    col_max: np.ndarray
    scaled: np.ndarray  # (N, p) in [0,1]
    constant_columns: tuple[str, ...] = ()

    @property
    def n_rows(self) -> int:
        return self.scaled.shape[0]

    @property
    def n_cols(self) -> int:
        return self.scaled.shape[1]

    def scale_points(self, x: np.ndarray) -> np.ndarray:
        """Map raw-coordinate points through the same affine transform (unclipped)."""
        x = np.asarray(x, dtype=float)
        span = self.col_max - self.col_min
        safe = np.where(span > 0, span, 1.0)
        out = (x - self.col_min) / safe
        return np.where(span > 0, out, 0.0)

    def unscale_points(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        span = self.col_max - self.col_min
        return u * span + self.col_min


def scale_to_unit(d: Dataset) -> ScaledView:
    lo = d.predictors.min(axis=0)
    hi = d.predictors.max(axis=0)
    span = hi - lo
    constant = span == 0
    safe = np.where(constant, 1.0, span)
    scaled = (d.predictors - lo) / safe
    scaled[:, constant] = 0.0
    scaled.setflags(write=False)
    names = tuple(d.column_names[j] for j in np.flatnonzero(constant))
    return ScaledView(source=d, col_min=lo, col_max=hi, scaled=scaled, constant_columns=names)


def load_csv(path: str | Path, response_column: str) -> Dataset:
    """Read an RFC-4180 CSV with a header row into a Dataset.

    The named response column is extracted; every remaining column must be
    numeric and becomes a predictor, in header order.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, header row required") from None
        if header.count(response_column) == 0:
            raise DataError(
                f"{path}: response column {response_column!r} not found in header {header}"
            )
        if header.count(response_column) > 1:
            raise DataError(f"{path}: duplicate response column {response_column!r}")
        resp_idx = header.index(response_column)
        pred_names = [c for i, c in enumerate(header) if i != resp_idx]
        rows: list[list[float]] = []
        ys: list[float] = []
        for rownum, rec in enumerate(reader, start=2):
            if len(rec) != len(header):
                raise DataError(f"{path}: row {rownum} has {len(rec)} cells, expected {len(header)}")
            vals = []
            for i, cell in enumerate(rec):
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: non-numeric cell at row {rownum}, column {header[i]!r}: {cell!r}"
                    ) from None
                if not math.isfinite(v):
                    raise DataError(
                        f"{path}: non-finite cell at row {rownum}, column {header[i]!r}: {cell!r}"
                    )
                vals.append(v)
            ys.append(vals.pop(resp_idx))
            rows.append(vals)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return Dataset(
        predictors=np.array(rows, dtype=float),
        response=np.array(ys, dtype=float),
        column_names=tuple(pred_names),
        response_name=response_column,
    )


def save_csv(d: Dataset, path: str | Path) -> None:
    """Write a Dataset back out; values use shortest round-trip decimal form."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(d.column_names) + [d.response_name])
        for i in range(d.n_rows):
            writer.writerow([repr(float(v)) for v in d.predictors[i]] + [repr(float(d.response[i]))])
