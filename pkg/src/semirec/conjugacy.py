"""Sampled checks of a conjugacy rho between two generator systems, and transport of cell sets."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .expr import eval_batch, eval_interval, parse_map, pretty
from .semigroup import GeneratorSystem, word_eval_batch
from .space import ESCAPE, Grid, as_coords
from .verdict import DomainError, Verdict, inconclusive, no

TOL_CONJ = 1e-8
UNIFORM_SAMPLES = 1000
BOUNDARY_SAMPLES = 100
UNIFORM_CONTINUITY = "on a compact window every continuous rho is uniformly continuous"


@dataclass
class ConjugacyMap:
    """rho: source space -> target space with rho∘g_i = g~_j∘rho for each pair (i, j)."""

    source: GeneratorSystem
    target: GeneratorSystem
    rho: tuple
    rho_inv: tuple
    pairing: list = field(default_factory=list)

    def __post_init__(self):
        if self.source.dim != self.target.dim:
            raise ValueError("source and target must have the same dimension")
        if not self.pairing:
            if self.source.k != self.target.k:
                raise ValueError("a pairing is required when generator counts differ")
            self.pairing = [(i, i) for i in range(self.source.k)]
        src = [i for i, _ in self.pairing]
        dst = [j for _, j in self.pairing]
        if sorted(src) != list(range(self.source.k)) or sorted(dst) != list(range(self.target.k)):
            raise ValueError("the pairing must be a bijection between the generators")

    @classmethod
    def from_strings(
        cls,
        source: GeneratorSystem,
        target: GeneratorSystem,
        rho: str | Sequence[str],
        rho_inv: str | Sequence[str],
        pairing: dict | None = None,
    ) -> "ConjugacyMap":
        """``pairing`` maps source generator names to target generator names."""
        pairs = []
        if pairing is not None:
            pairs = [(source.index(a), target.index(b)) for a, b in pairing.items()]
        return cls(source, target, parse_map(rho, source.dim), parse_map(rho_inv, source.dim), pairs)

    @property
    def dim(self) -> int:
        return self.source.dim

    def forward(self, pts: np.ndarray) -> np.ndarray:
        with np.errstate(all="ignore"):
            return self.target.space.normalize(eval_batch(self.rho, pts))

    def inverse(self, pts: np.ndarray) -> np.ndarray:
        with np.errstate(all="ignore"):
            return self.source.space.normalize(eval_batch(self.rho_inv, pts))

    def target_word(self, w) -> tuple:
        m = dict(self.pairing)
        return tuple(m[i] for i in w)

    def to_json(self) -> dict:
        return {
            "rho": [pretty(c, self.dim) for c in self.rho],
            "rho_inv": [pretty(c, self.dim) for c in self.rho_inv],
            "pairing": [[self.source.names[i], self.target.names[j]] for i, j in self.pairing],
        }


def sample_points(space, n_uniform: int, n_boundary: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples plus samples pushed towards the faces of the window."""
    cols = []
    for lo, hi in space.bounds:
        u = rng.uniform(lo, hi, n_uniform)
        # beta(0.3, 0.3) piles mass near both ends
        b = lo + (hi - lo) * rng.beta(0.3, 0.3, n_boundary)
        cols.append(np.concatenate([u, b]))
    pts = np.array(cols)
    if space.is_circle:
        pts = np.mod(pts, 1.0)
    return pts


def _residual(space, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        d = space.dist_batch(a, b)
    return np.where(np.isfinite(d), d, np.inf)


def check_conjugacy(
    c: ConjugacyMap,
    n_uniform: int = UNIFORM_SAMPLES,
    n_boundary: int = BOUNDARY_SAMPLES,
    tol: float = TOL_CONJ,
    seed: int = 0,
    word_max_len: int = 4,
    n_words: int = 32,
) -> Verdict:
    """NO with the worst sample when some identity fails by more than the tolerance.

    Checked identities: rho_inv(rho(x)) = x, rho(g_i(x)) = g~_j(rho(x)) for
    every pair, and the word version for random words of length L against
    L * tol.  Passing all of them is only evidence, so the positive answer
    is INCONCLUSIVE ("conjugate up to sampling").
    """
    if n_uniform + n_boundary < 1:
        raise ValueError("at least one sample is required")
    rng = np.random.default_rng(seed)
    pts = sample_points(c.source.space, n_uniform, n_boundary, rng)
    budgets = {"samples": pts.shape[1], "uniform": n_uniform, "boundary": n_boundary, "tol": tol, "seed": seed,
               "word_max_len": word_max_len, "words": n_words}
    rp = c.forward(pts)
    back = c.inverse(rp)
    inv_err = _residual(c.source.space, back, pts)
    if inv_err.max() > tol:
        k = int(np.argmax(inv_err))
        return no({"kind": "inverse", "x": _pt(pts[:, k]), "rho_inv_rho_x": _pt(back[:, k]), "residual": float(inv_err[k])}, budgets)
    worst = 0.0
    for i, j in c.pairing:
        with np.errstate(all="ignore"):
            lhs = c.forward(c.source.apply_batch(i, pts))
            rhs = c.target.apply_batch(j, rp)
        res = _residual(c.target.space, lhs, rhs)
        if res.max() > tol:
            k = int(np.argmax(res))
            return no(
                {
                    "kind": "generator",
                    "pair": [c.source.names[i], c.target.names[j]],
                    "x": _pt(pts[:, k]),
                    "rho_g_x": _pt(lhs[:, k]),
                    "gt_rho_x": _pt(rhs[:, k]),
                    "residual": float(res[k]),
                },
                budgets,
            )
        worst = max(worst, float(res.max()))
    worst_word = 0.0
    for _ in range(n_words):
        length = int(rng.integers(1, word_max_len + 1))
        w = tuple(int(v) for v in rng.integers(0, c.source.k, length))
        with np.errstate(all="ignore"):
            lhs = c.forward(word_eval_batch(c.source, w, pts)[0])
            rhs = word_eval_batch(c.target, c.target_word(w), rp)[0]
        res = _residual(c.target.space, lhs, rhs)
        if res.max() > length * tol:
            k = int(np.argmax(res))
            return no(
                {"kind": "word", "word": c.source.format_word(w), "x": _pt(pts[:, k]), "residual": float(res[k]), "bound": length * tol},
                budgets,
            )
        worst_word = max(worst_word, float(res.max()))
    return inconclusive(
        "conjugate up to sampling",
        budgets,
        witness={
            "max_residual": worst,
            "max_inverse_error": float(inv_err.max()),
            "max_word_residual": worst_word,
            "uniform_continuity": UNIFORM_CONTINUITY,
        },
    )


def _pt(col):
    col = np.asarray(col, dtype=float).ravel()
    return float(col[0]) if col.size == 1 else [float(v) for v in col]


# ---------------------------------------------------------------- transport


@dataclass
class Transported:
    cells: set
    outside: list

    def to_json(self) -> dict:
        return {"cells": sorted(self.cells), "outside": self.outside}


def transport_points(c: ConjugacyMap, points: Iterable, target_grid: Grid) -> Transported:
    """rho of each point, binned on the target grid; images outside the window are flagged."""
    pts = [p for p in points]
    if not pts:
        return Transported(set(), [])
    arr = np.hstack([as_coords(p, c.dim) for p in pts])
    img = c.forward(arr)
    idx = target_grid.flat_cells(img)
    out = [_pt(arr[:, k]) for k in np.flatnonzero(idx == ESCAPE)]
    return Transported({int(i) for i in idx if i != ESCAPE}, out)


def transport_cells(c: ConjugacyMap, cells: Iterable[int], source_grid: Grid, target_grid: Grid, mode: str = "box") -> Transported:
    """Image of a cell set.

    ``box`` encloses rho(cell) with interval arithmetic and keeps every
    target cell it meets; ``center`` only moves the cell centers.
    """
    cells = sorted(int(u) for u in cells)
    if mode == "center":
        t = transport_points(c, [source_grid.center_of(u) for u in cells], target_grid)
        return t
    if mode != "box":
        raise ValueError(f"unknown transport mode {mode!r}")
    if c.target.space.is_circle:
        # wrap-around makes the enclosure ambiguous; fall back to centers
        return transport_cells(c, cells, source_grid, target_grid, "center")
    found: set = set()
    outside = []
    for u in cells:
        try:
            img = eval_interval(tuple(c.rho), source_grid.cell_box(u))
        except DomainError:
            outside.append(u)
            continue
        found |= _cells_meeting(target_grid, img)
        if any(iv.lo < lo or iv.hi > hi for iv, (lo, hi) in zip(img, target_grid.space.bounds)):
            outside.append(u)
    return Transported(found, outside)


def _cells_meeting(grid: Grid, box: tuple) -> set:
    ranges = []
    for iv, (lo, hi), n in zip(box, grid.space.bounds, grid.counts):
        w = (hi - lo) / n
        a = max(0, int(np.floor((max(iv.lo, lo) - lo) / w)))
        b = min(n - 1, int(np.floor((min(iv.hi, hi) - lo) / w)))
        if a > b or iv.hi < lo or iv.lo > hi:
            return set()
        ranges.append(range(a, b + 1))
    out = set()
    for multi in np.ndindex(*[len(r) for r in ranges]):
        out.add(grid.flat([r[m] for r, m in zip(ranges, multi)]))
    return out


def dilate(cells: Iterable[int], grid: Grid, k: int) -> set:
    out: set = set()
    for u in cells:
        out.update(grid.neighbors(int(u), k))
    return out


@dataclass
class MatchReport:
    match: bool
    k: int
    only_a: list
    only_b: list
    size_a: int
    size_b: int

    @property
    def symmetric_difference(self) -> int:
        return len(self.only_a) + len(self.only_b)

    def to_json(self) -> dict:
        return {
            "match": self.match,
            "dilation": self.k,
            "only_a": self.only_a,
            "only_b": self.only_b,
            "size_a": self.size_a,
            "size_b": self.size_b,
            "symmetric_difference": self.symmetric_difference,
        }


def compare_sets(a: Iterable[int], b: Iterable[int], grid: Grid, k: int = 1) -> MatchReport:
    """Cells of each set that are farther than k cells from the other set."""
    a, b = set(int(u) for u in a), set(int(u) for u in b)
    da, db = dilate(a, grid, k), dilate(b, grid, k)
    only_a = sorted(a - db)
    only_b = sorted(b - da)
    return MatchReport(not only_a and not only_b, k, only_a, only_b, len(a), len(b))
