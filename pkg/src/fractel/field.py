"""Sampled fields on rectangular (x, y) grids and their CSV/JSON forms."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, GridMismatch

SCHEMA = 1


@dataclass(frozen=True)
class GridSpec:
    """Strictly increasing x and y coordinate vectors."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        for name in ("x", "y"):
            v = np.array(getattr(self, name), dtype=float).ravel()
            if v.size == 0 or not np.all(np.isfinite(v)):
                raise ConfigError(f"grid {name} must be a non-empty finite vector")
            if v.size > 1 and not np.all(np.diff(v) > 0):
                raise ConfigError(f"grid {name} must be strictly increasing")
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @classmethod
    def uniform(cls, x0: float, x1: float, nx: int, y0: float, y1: float, ny: int) -> GridSpec:
        xs = np.array([x0]) if nx == 1 else np.linspace(x0, x1, nx)
        ys = np.array([y0]) if ny == 1 else np.linspace(y0, y1, ny)
        return cls(xs, ys)

    @property
    def nx(self) -> int:
        return self.x.size

    @property
    def ny(self) -> int:
        return self.y.size

    def same_as(self, other: GridSpec) -> bool:
        return (
            self.nx == other.nx
            and self.ny == other.ny
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
        )

    def to_dict(self) -> dict:
        return {"x": [float(v) for v in self.x], "y": [float(v) for v in self.y]}


@dataclass
class ScalarField:
    """Values ``values[ix, iy]`` on a :class:`GridSpec` plus free-form metadata."""

    grid: GridSpec
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.nx, self.grid.ny):
            raise GridMismatch(
                f"values have shape {self.values.shape}, grid needs {(self.grid.nx, self.grid.ny)}"
            )

    def require_same_grid(self, other: ScalarField) -> None:
        if not self.grid.same_as(other.grid):
            raise GridMismatch("fields live on different grids")

    def to_csv(self) -> str:
        """CSV text: header ``x,y,u``, y in the outer loop, 17 significant digits."""
        buf = io.StringIO()
        buf.write("x,y,u\n")
        for iy, yv in enumerate(self.grid.y):
            for ix, xv in enumerate(self.grid.x):
                buf.write(f"{xv:.17g},{yv:.17g},{self.values[ix, iy]:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> ScalarField:
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["x", "y", "u"]:
            raise ConfigError("field CSV must start with the header x,y,u")
        data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
        xs = np.unique(data[:, 0])
        ys = np.unique(data[:, 1])
        if data.shape[0] != xs.size * ys.size:
            raise ConfigError("field CSV does not describe a full rectangular grid")
        values = data[:, 2].reshape(ys.size, xs.size).T
        return cls(GridSpec(xs, ys), values)

    def to_json(self, extra: dict | None = None) -> str:
        """JSON envelope with grid, values and metadata (floats round-trip exactly)."""
        doc = {
            "schema": SCHEMA,
            "grid": self.grid.to_dict(),
            "values": [[float(v) for v in col] for col in self.values],
            "meta": self.meta,
        }
        if extra:
            doc.update(extra)
        return json.dumps(doc, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> ScalarField:
        doc = json.loads(text)
        if doc.get("schema") != SCHEMA:
            raise ConfigError(f"unsupported field schema {doc.get('schema')!r}")
        grid = GridSpec(doc["grid"]["x"], doc["grid"]["y"])
        return cls(grid, np.array(doc["values"], dtype=float), doc.get("meta", {}))

    def write(self, stem: str | Path, extra: dict | None = None) -> tuple[Path, Path]:
        """Write ``<stem>.csv`` and ``<stem>.json``; returns both paths."""
        stem = Path(stem)
        csv_path = stem.with_suffix(".csv")
        json_path = stem.with_suffix(".json")
        with open(csv_path, "w", newline="\n") as fh:
            fh.write(self.to_csv())
        with open(json_path, "w", newline="\n") as fh:
            fh.write(self.to_json(extra))
        return csv_path, json_path
