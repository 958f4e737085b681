"""Fixed points, orbit points, omega-limit clusters and recurrence."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .semigroup import (
    DEFAULT_WORD_CAP,
    GeneratorSystem,
    PointIndex,
    Word,
    WordClass,
    enumerate_words,
    word_eval,
    word_eval_batch,
)
from .verdict import BudgetExceeded, DomainError, Verdict, inconclusive, yes

TOL_FIX = 1e-9
TOL_CLUSTER = 1e-4
TOL_MERGE = 1e-7
COUNT_FLOOR = 3
DEFAULT_SCHEDULE = (3, 5, 8)
DEFAULT_RESOLUTION = 10_000
BLOCK_CAP = 2


@dataclass(frozen=True)
class OrbitPointRecord:
    point: float
    word: Word
    residual: float


@dataclass
class FixedPointSearch:
    word: Word
    records: list = field(default_factory=list)
    skipped: list = field(default_factory=list)  # (lo, hi) ranges with escaped evaluations
    rejected: list = field(default_factory=list)  # sign changes that were not roots


def _require_1d(sys: GeneratorSystem):
    if sys.dim != 1:
        raise ValueError("fixed-point search is implemented for one-dimensional spaces only")


def _displacement(sys: GeneratorSystem, fx, x):
    d = np.asarray(fx) - np.asarray(x)
    if sys.space.is_circle:
        d = np.mod(d + 0.5, 1.0) - 0.5
    return d


def fixed_points_of_word(
    sys: GeneratorSystem,
    w: Word,
    resolution: int = DEFAULT_RESOLUTION,
    tol_fix: float = TOL_FIX,
    window: tuple | None = None,
) -> FixedPointSearch:
    """Roots of ``w(x) - x`` located by sign changes on a uniform grid and bisection.

    Roots closer together than one grid step may be missed or merged, and
    tangential roots without a sign change are not found.
    """
    _require_1d(sys)
    if not w:
        raise ValueError("the empty word fixes every point")
    lo, hi = window or sys.space.bounds[0]
    xs = np.linspace(lo, hi, resolution + 1)
    if sys.space.is_circle:
        xs = xs[:-1]
    img, escaped = word_eval_batch(sys, w, xs.reshape(1, -1))
    bad = escaped | ~np.isfinite(img[0])
    phi = _displacement(sys, img[0], xs)
    result = FixedPointSearch(tuple(w))
    index = PointIndex(sys.space, TOL_MERGE)

    def accept(p):
        try:
            r = sys.space.dist(word_eval(sys, w, p), p)
        except DomainError:
            return
        if r <= tol_fix:
            if index.add(p)[1]:
                result.records.append(OrbitPointRecord(float(p), tuple(w), float(r)))
        else:
            result.rejected.append((float(p), float(r)))

    n = len(xs)
    skip_start = None
    for i in range(n):
        if bad[i]:
            if skip_start is None:
                skip_start = xs[max(i - 1, 0)]
            continue
        if skip_start is not None:
            result.skipped.append((float(skip_start), float(xs[i])))
            skip_start = None
        if phi[i] == 0:
            accept(xs[i])
            continue
        j = i + 1
        if j < n and not bad[j] and phi[j] != 0 and (phi[i] < 0) != (phi[j] < 0):
            p = _bisect(sys, w, xs[i], xs[j], phi[i] < 0)
            if p is not None:
                accept(p)
    if skip_start is not None:
        result.skipped.append((float(skip_start), float(xs[-1])))
    return result


def _bisect(sys: GeneratorSystem, w: Word, a: float, b: float, a_negative: bool):
    def phi(x):
        return float(_displacement(sys, word_eval(sys, w, x), x))

    try:
        fa, fb = phi(a), phi(b)
        for _ in range(200):
            m = a + (b - a) / 2
            if m <= a or m >= b:
                break
            fm = phi(m)
            if fm == 0:
                return m
            if (fm < 0) == a_negative:
                a, fa = m, fm
            else:
                b, fb = m, fm
    except DomainError:
        return None
    return a if abs(fa) <= abs(fb) else b


def orbit_points(
    sys: GeneratorSystem,
    max_len: int,
    resolution: int = DEFAULT_RESOLUTION,
    tol_fix: float = TOL_FIX,
    cap: int = DEFAULT_WORD_CAP,
) -> list:
    """Points fixed by some word of length <= ``max_len``, each with its shortest witness."""
    _require_1d(sys)
    index = PointIndex(sys.space, TOL_MERGE)
    records = []
    for w in enumerate_words(sys, WordClass.FULL, max_len, cap):
        for rec in fixed_points_of_word(sys, w, resolution, tol_fix).records:
            if index.add(rec.point)[1]:
                records.append(rec)
    return sorted(records, key=lambda r: r.point)


def fix_set(sys: GeneratorSystem, resolution: int = DEFAULT_RESOLUTION, tol_fix: float = TOL_FIX) -> list:
    """Common fixed points of all generators; these are fixed by every word."""
    _require_1d(sys)
    per_gen = [fixed_points_of_word(sys, (i,), resolution, tol_fix).records for i in range(sys.k)]
    common = []
    for rec in per_gen[0]:
        if all(any(abs(rec.point - other.point) <= TOL_MERGE for other in recs) for recs in per_gen[1:]):
            common.append(rec.point)
    return sorted(common)


# ---------------------------------------------------------------- pivot words


@dataclass(frozen=True)
class PivotHit:
    count: int
    point: object
    node: int


class _WordTree:
    """Parent-pointer storage so long words are materialised only on demand."""

    def __init__(self):
        self.parent = [-1]
        self.gen = [-1]

    def add(self, parent: int, gen: int) -> int:
        self.parent.append(parent)
        self.gen.append(gen)
        return len(self.parent) - 1

    def word(self, node: int) -> Word:
        out = []
        while node > 0:
            out.append(self.gen[node])
            node = self.parent[node]
        return tuple(reversed(out))


def iter_pivot_words(
    sys: GeneratorSystem,
    x,
    pivot: int,
    max_count: int,
    max_len: int | None = None,
    block_cap: int = BLOCK_CAP,
    cap: int = DEFAULT_WORD_CAP,
    tree: _WordTree | None = None,
) -> Iterator[PivotHit]:
    """Depth-first walk over words with a controlled number of pivot applications.

    The words have the shape ``h_1 ∘ p ∘ h_2 ∘ p ∘ ... ∘ p ∘ h_{n+1}`` with
    every block ``h_i`` a word over the non-pivot generators of length at
    most ``block_cap``.  Every visited word is yielded with its pivot count.
    """
    if not 0 <= pivot < sys.k:
        raise ValueError(f"pivot index {pivot} out of range")
    tree = tree or _WordTree()
    others = [i for i in range(sys.k) if i != pivot]
    # state: (node, point, count, block_len, length)
    stack = [(0, x, 0, 0, 0)]
    visited = 0
    while stack:
        node, pt, count, block, length = stack.pop()
        visited += 1
        if visited > cap:
            raise BudgetExceeded(f"pivot-word enumeration exceeded the cap {cap}")
        if node:
            yield PivotHit(count, pt, node)
        if max_len is not None and length >= max_len:
            continue
        moves = []
        if count < max_count:
            moves.append((pivot, count + 1, 0))
        if block < block_cap:
            moves.extend((g, count, block + 1) for g in others)
        for g, c, b in reversed(moves):
            try:
                nxt = sys.apply(g, pt)
            except DomainError:
                continue
            stack.append((tree.add(node, g), nxt, c, b, length + 1))


@dataclass(frozen=True)
class OmegaCluster:
    center: object
    hits: int
    counts: tuple
    max_count: int
    witness: Word


@dataclass(frozen=True)
class OmegaApprox:
    base: object
    pivot: int
    clusters: tuple
    schedule: tuple
    budgets: dict


def omega_limit(
    sys: GeneratorSystem,
    x,
    pivot: int,
    max_len: int | None = None,
    schedule: Sequence[int] = DEFAULT_SCHEDULE,
    tol_cluster: float = TOL_CLUSTER,
    block_cap: int = BLOCK_CAP,
    min_hits: int | None = None,
    cap: int = DEFAULT_WORD_CAP,
) -> OmegaApprox:
    """Cluster the images of ``x`` under words with exactly n pivots, n in ``schedule``.

    A cluster is reported when at least ``min_hits`` distinct scheduled
    counts hit it; the default demands every count, a finite stand-in for
    a subsequence with pivot counts tending to infinity.
    """
    schedule = tuple(sorted(set(int(n) for n in schedule)))
    if not schedule or schedule[0] < 1:
        raise ValueError("schedule must contain positive pivot counts")
    wanted = set(schedule)
    min_hits = len(schedule) if min_hits is None else min_hits
    tree = _WordTree()
    index = PointIndex(sys.space, tol_cluster)
    stats: list = []
    for hit in iter_pivot_words(sys, x, pivot, schedule[-1], max_len, block_cap, cap, tree):
        if hit.count not in wanted:
            continue
        j, inserted = index.add(hit.point)
        if inserted:
            stats.append({"hits": 0, "counts": set(), "node": hit.node, "max": 0})
        s = stats[j]
        s["hits"] += 1
        s["counts"].add(hit.count)
        s["max"] = max(s["max"], hit.count)
    clusters = tuple(
        OmegaCluster(index.points[j], s["hits"], tuple(sorted(s["counts"])), s["max"], tree.word(s["node"]))
        for j, s in enumerate(stats)
        if len(s["counts"]) >= min_hits
    )
    budgets = {
        "schedule": list(schedule),
        "max_len": max_len,
        "block_cap": block_cap,
        "tol_cluster": tol_cluster,
        "min_hits": min_hits,
        "words": len(tree.parent) - 1,
    }
    return OmegaApprox(x, pivot, clusters, schedule, budgets)


def is_recurrent(
    sys: GeneratorSystem,
    x,
    pivot: int,
    max_len: int = 40,
    schedule: Sequence[int] = DEFAULT_SCHEDULE,
    tol_cluster: float = TOL_CLUSTER,
    count_floor: int = COUNT_FLOOR,
    block_cap: int = BLOCK_CAP,
    search_count: int | None = None,
    cap: int = DEFAULT_WORD_CAP,
) -> Verdict:
    """Look for returns of ``x`` at strictly increasing pivot counts.

    YES needs return words with counts n_1 < n_2 < ... where n_j is at least
    the j-th schedule entry and at least ``count_floor``.  Candidates are
    the enumerated pivot words (counts up to ``search_count``) together with
    powers of every returning word found there, which are again of the
    admissible shape.  No finite search can refute recurrence, so the
    alternative outcome is INCONCLUSIVE.
    """
    schedule = tuple(sorted(int(n) for n in schedule))
    search_count = schedule[-1] if search_count is None else search_count
    budgets = {
        "schedule": list(schedule),
        "count_floor": count_floor,
        "max_len": max_len,
        "block_cap": block_cap,
        "search_count": search_count,
        "tol_cluster": tol_cluster,
        "pivot": sys.names[pivot],
    }
    tree = _WordTree()
    returns: dict = {}  # count -> (word, residual)
    seeds = []
    for hit in iter_pivot_words(sys, x, pivot, search_count, max_len, block_cap, cap, tree):
        if hit.count == 0:
            continue
        r = sys.space.dist(hit.point, x)
        if r < tol_cluster:
            w = tree.word(hit.node)
            returns.setdefault(hit.count, (w, r))
            seeds.append((w, hit.count))
    needed_max = max(max(schedule), count_floor) + len(schedule)
    for w, c in seeds:
        m = 2
        while m * len(w) <= max_len and m * c <= needed_max * 4:
            if m * c not in returns:
                try:
                    pt = word_eval(sys, w * m, x)
                except DomainError:
                    break
                r = sys.space.dist(pt, x)
                if r < tol_cluster:
                    returns[m * c] = (w * m, r)
            m += 1
    chosen = []
    prev = 0
    for s in schedule:
        lower = max(s, count_floor, prev + 1)
        options = sorted(c for c in returns if c >= lower)
        if not options:
            return inconclusive(
                f"no return with pivot count >= {lower} within the budget",
                budgets,
                witness=[{"count": c, "word": sys.word_names(returns[c][0])} for c in sorted(returns)],
            )
        prev = options[0]
        w, r = returns[prev]
        chosen.append({"count": prev, "word": sys.word_names(w), "residual": r})
    return yes(chosen, budgets, note="returns at increasing pivot counts")


def is_recurrent_any_pivot(sys: GeneratorSystem, x, **kwargs) -> Verdict:
    """First YES over all pivots, otherwise the last verdict."""
    verdict = None
    for pivot in range(sys.k):
        verdict = is_recurrent(sys, x, pivot, **kwargs)
        if verdict.yes:
            return verdict
    return verdict
