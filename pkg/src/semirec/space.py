"""Compact phase spaces and their uniform grids."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .interval import Interval

ESCAPE = -1
"""Absorbing pseudo-cell for points that leave the analysed window."""


class OutOfDomain(ValueError):
    pass


@dataclass(frozen=True)
class PhaseSpace:
    """A box in R^n (n <= 2) or the circle R/Z represented by [0, 1)."""

    kind: str
    bounds: tuple

    def __post_init__(self):
        if self.kind not in ("box", "circle"):
            raise ValueError(f"unknown space kind {self.kind!r}")
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "bounds", b)
        if self.kind == "circle" and b != ((0.0, 1.0),):
            raise ValueError("the circle is represented by bounds [[0, 1]]")
        if not 1 <= len(b) <= 2:
            raise ValueError("only dimensions 1 and 2 are supported")
        for lo, hi in b:
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"bounds must be finite with lo < hi, got {(lo, hi)}")

    @classmethod
    def box(cls, *bounds) -> "PhaseSpace":
        return cls("box", tuple(bounds))

    @classmethod
    def circle(cls) -> "PhaseSpace":
        return cls("circle", ((0.0, 1.0),))

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def is_circle(self) -> bool:
        return self.kind == "circle"

    def as_box(self) -> tuple:
        return tuple(Interval(lo, hi) for lo, hi in self.bounds)

    def normalize(self, pts: np.ndarray) -> np.ndarray:
        if self.is_circle:
            return np.mod(pts, 1.0)
        return pts

    def normalize_point(self, x):
        if self.is_circle:
            return float(x) % 1.0
        return x

    def contains_batch(self, pts: np.ndarray) -> np.ndarray:
        """pts has shape (dim, N); non-finite coordinates never count as inside."""
        ok = np.all(np.isfinite(pts), axis=0)
        if self.is_circle:
            return ok
        for i, (lo, hi) in enumerate(self.bounds):
            ok &= (pts[i] >= lo) & (pts[i] <= hi)
        return ok

    def contains(self, x) -> bool:
        return bool(self.contains_batch(as_coords(x, self.dim))[0])

    def dist(self, x, y) -> float:
        if self.dim == 1:
            d = abs(float(x) - float(y))
            if self.is_circle:
                d %= 1.0
                d = min(d, 1.0 - d)
            return d
        return math.hypot(*(float(a) - float(b) for a, b in zip(x, y)))

    def dist_batch(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Pairwise (broadcast) distances between coordinate arrays of shape (dim, ...)."""
        diff = np.abs(a - b)
        if self.is_circle:
            diff = np.mod(diff, 1.0)
            diff = np.minimum(diff, 1.0 - diff)
            return diff[0]
        if diff.shape[0] == 1:
            return diff[0]
        return np.sqrt(np.sum(diff * diff, axis=0))

    def to_json(self) -> dict:
        return {"kind": self.kind, "bounds": [list(b) for b in self.bounds]}


def dist(space: PhaseSpace, x, y) -> float:
    return space.dist(x, y)


def as_coords(x, dim: int) -> np.ndarray:
    """A single point as a (dim, 1) array."""
    if np.ndim(x) == 0:
        arr = np.array([[float(x)]])
    else:
        arr = np.asarray(x, dtype=float).reshape(-1, 1)
    if arr.shape[0] != dim:
        raise ValueError(f"point {x!r} does not have dimension {dim}")
    return arr


def unpack_point(col: np.ndarray):
    """Inverse of ``as_coords`` for one column: float in 1-D, tuple otherwise."""
    col = np.asarray(col, dtype=float).ravel()
    return float(col[0]) if col.size == 1 else tuple(float(v) for v in col)


@dataclass(frozen=True)
class Grid:
    """Uniform grid of half-open cells; the last cell along each axis is closed."""

    space: PhaseSpace
    counts: tuple
    _centers: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        counts = tuple(int(c) for c in np.atleast_1d(self.counts))
        object.__setattr__(self, "counts", counts)
        if len(counts) != self.space.dim:
            raise ValueError("one cell count per coordinate is required")
        if any(c < 2 for c in counts):
            raise ValueError("cell count must be at least 2 per coordinate")
        axes = [
            lo + (np.arange(n) + 0.5) * ((hi - lo) / n) for (lo, hi), n in zip(self.space.bounds, counts)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        object.__setattr__(self, "_centers", np.array([m.ravel() for m in mesh]))

    @classmethod
    def uniform(cls, space: PhaseSpace, cells: int | Sequence[int]) -> "Grid":
        if isinstance(cells, int):
            cells = (cells,) * space.dim
        return cls(space, tuple(cells))

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def widths(self) -> tuple:
        return tuple((hi - lo) / n for (lo, hi), n in zip(self.space.bounds, self.counts))

    @property
    def delta(self) -> float:
        """Largest cell side length."""
        return max(self.widths)

    @property
    def center_error(self) -> float:
        """Bound on the distance from a point of a cell to the cell center."""
        return math.sqrt(sum(w * w for w in self.widths)) / 2

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.counts))

    @property
    def centers(self) -> np.ndarray:
        """Cell centers in flat order, shape (dim, n_cells)."""
        return self._centers

    def flat(self, cell: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(cell), self.counts))

    def unravel(self, index: int) -> tuple:
        return tuple(int(i) for i in np.unravel_index(index, self.counts))

    def cell_of(self, x) -> tuple:
        idx = self.flat_cells(as_coords(x, self.dim))[0]
        if idx == ESCAPE:
            raise OutOfDomain(f"point {x!r} lies outside {self.space.bounds}")
        return self.unravel(idx)

    def center_of(self, cell: Sequence[int] | int):
        if isinstance(cell, (int, np.integer)):
            idx = int(cell)
        else:
            idx = self.flat(cell)
        return unpack_point(self._centers[:, idx])

    def flat_cells(self, pts: np.ndarray) -> np.ndarray:
        """Flat cell index per column of ``pts``; ESCAPE for points outside."""
        pts = self.space.normalize(np.asarray(pts, dtype=float))
        inside = self.space.contains_batch(pts)
        multi = []
        for i, ((lo, hi), n) in enumerate(zip(self.space.bounds, self.counts)):
            with np.errstate(invalid="ignore"):
                k = np.floor((np.where(inside, pts[i], lo) - lo) * n / (hi - lo))
            multi.append(np.clip(k, 0, n - 1).astype(np.int64))
        flat = np.ravel_multi_index(tuple(multi), self.counts)
        return np.where(inside, flat, ESCAPE)

    def cell_box(self, index: int) -> tuple:
        """Closed box of a cell."""
        cell = self.unravel(index)
        out = []
        for (lo, hi), n, k in zip(self.space.bounds, self.counts, cell):
            w = (hi - lo) / n
            out.append(Interval(lo + k * w, lo + (k + 1) * w))
        return tuple(out)

    def cells_near(self, point: np.ndarray, radius: float) -> np.ndarray:
        """Flat indices of cells whose center lies strictly within ``radius`` of ``point``.

        ``point`` is a (dim,) array.  Candidates are narrowed by index range
        before distances are computed.
        """
        ranges = []
        for i, ((lo, hi), n) in enumerate(zip(self.space.bounds, self.counts)):
            w = (hi - lo) / n
            if self.space.is_circle:
                span = int(math.ceil(radius / w)) + 1
                if 2 * span + 1 >= n:
                    ranges.append(np.arange(n))
                else:
                    base = int(math.floor((point[i] % 1.0 - lo) / w))
                    ranges.append(np.mod(np.arange(base - span, base + span + 1), n))
            else:
                a = max(0, int(math.floor((point[i] - radius - lo) / w - 0.5)) - 1)
                b = min(n - 1, int(math.ceil((point[i] + radius - lo) / w - 0.5)) + 1)
                if a > b:
                    return np.empty(0, dtype=np.int64)
                ranges.append(np.arange(a, b + 1))
        mesh = np.meshgrid(*ranges, indexing="ij")
        cand = np.unique(np.ravel_multi_index(tuple(m.ravel() for m in mesh), self.counts))
        d = self.space.dist_batch(self._centers[:, cand], np.asarray(point, dtype=float).reshape(-1, 1))
        return cand[d < radius]

    def neighbors(self, index: int, k: int = 1) -> list:
        """Cells within k steps along every axis (wrapping on the circle)."""
        cell = self.unravel(index)
        out = []
        for offs in itertools.product(range(-k, k + 1), repeat=self.dim):
            c = []
            for i, (ci, o) in enumerate(zip(cell, offs)):
                j = ci + o
                if self.space.is_circle:
                    j %= self.counts[i]
                elif not 0 <= j < self.counts[i]:
                    break
                c.append(j)
            else:
                out.append(self.flat(c))
        return out

    def to_json(self) -> dict:
        return {"space": self.space.to_json(), "cells": list(self.counts)}
