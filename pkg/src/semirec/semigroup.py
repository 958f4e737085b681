"""Finitely generated semigroups of self-maps, their words and orbits.

A word is a tuple of generator indices in *application order*: ``(0, 1)``
applies ``g1`` first and then ``g2``, i.e. it is the element ``g2∘g1``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .expr import Var, compile_expr, eval_batch, parse_map, pretty
from .space import PhaseSpace, as_coords, unpack_point
from .verdict import BudgetExceeded, DomainError, Verdict, inconclusive, no

Word = tuple

DEFAULT_WORD_CAP = 100_000
TOL_DEDUP = 1e-9
_TINY = 1e-150


class WordClass(enum.Enum):
    FULL = "G"  # all nonempty words
    GSTAR = "G*"  # length >= 2
    GHAT = "G^"  # including the empty word (identity)

    def min_len(self) -> int:
        return {WordClass.FULL: 1, WordClass.GSTAR: 2, WordClass.GHAT: 0}[self]


@dataclass(frozen=True)
class Generator:
    name: str
    components: tuple

    def pretty(self, dim: int) -> str:
        return ", ".join(pretty(c, dim) for c in self.components)


@dataclass(frozen=True)
class GeneratorSystem:
    space: PhaseSpace
    generators: tuple
    claimed_abelian: bool = False
    _fns: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        if not gens:
            raise ValueError("a semigroup needs at least one generator")
        names = [g.name for g in gens]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate generator names in {names}")
        identity = tuple(Var(i) for i in range(self.space.dim))
        for g in gens:
            if len(g.components) != self.space.dim:
                raise ValueError(f"generator {g.name} has the wrong number of components")
            if tuple(g.components) == identity:
                raise ValueError(f"generator {g.name} is the identity map")
        object.__setattr__(self, "_fns", tuple(tuple(compile_expr(c) for c in g.components) for g in gens))

    @classmethod
    def from_strings(cls, space: PhaseSpace, maps: dict | Sequence, claimed_abelian: bool = False) -> "GeneratorSystem":
        """``maps`` is {name: expression} or a sequence of (name, expression) pairs."""
        items = maps.items() if isinstance(maps, dict) else maps
        gens = tuple(Generator(name, parse_map(m, space.dim)) for name, m in items)
        return cls(space, gens, claimed_abelian)

    @property
    def k(self) -> int:
        return len(self.generators)

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def names(self) -> list:
        return [g.name for g in self.generators]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown generator {name!r}") from None

    def format_word(self, w: Word) -> str:
        """Composition notation: the word (0, 1) prints as ``g2∘g1``."""
        if not w:
            return "id"
        return "∘".join(self.generators[i].name for i in reversed(w))

    def word_names(self, w: Word) -> list:
        """Generator names in application order."""
        return [self.generators[i].name for i in w]

    def parse_word(self, names: Sequence[str] | str) -> Word:
        """Inverse of ``word_names``; also accepts the ``format_word`` string."""
        if isinstance(names, str):
            if names in ("", "id"):
                return ()
            return tuple(self.index(n.strip()) for n in reversed(names.split("∘")))
        return tuple(self.index(n) for n in names)

    # -------------------------------------------------------- evaluation

    def apply(self, i: int, x):
        """One generator on one point (scalar path)."""
        fns = self._fns[i]
        c = (float(x),) if self.dim == 1 else tuple(float(v) for v in x)
        try:
            out = [float(f(c)) for f in fns]
        except (ZeroDivisionError, OverflowError) as exc:
            raise DomainError(str(exc)) from None
        if not all(math.isfinite(v) for v in out):
            raise DomainError(f"{self.generators[i].name} produced a non-finite value at {x!r}")
        if self.space.is_circle:
            out = [v % 1.0 for v in out]
        return out[0] if self.dim == 1 else tuple(out)

    def apply_batch(self, i: int, pts: np.ndarray) -> np.ndarray:
        return self.space.normalize(eval_batch(self.generators[i].components, pts))


def enumerate_words(sys: GeneratorSystem, cls: WordClass, max_len: int, cap: int = DEFAULT_WORD_CAP) -> list:
    """All words of the class up to ``max_len`` in shortlex order."""
    return list(iter_words(sys.k, cls.min_len(), max_len, cap))


def count_words(k: int, min_len: int, max_len: int) -> int:
    return sum(k**n for n in range(min_len, max_len + 1))


def iter_words(k: int, min_len: int, max_len: int, cap: int = DEFAULT_WORD_CAP) -> Iterator[Word]:
    if max_len < 0:
        raise ValueError("max_len must be nonnegative")
    total = count_words(k, min_len, max_len)
    if total > cap:
        raise BudgetExceeded(f"{total} words of length {min_len}..{max_len} over {k} generators exceed the cap {cap}")
    for n in range(min_len, max_len + 1):
        yield from _product(k, n)


def _product(k: int, n: int) -> Iterator[Word]:
    if n == 0:
        yield ()
        return
    idx = [0] * n
    while True:
        yield tuple(idx)
        j = n - 1
        while j >= 0 and idx[j] == k - 1:
            idx[j] = 0
            j -= 1
        if j < 0:
            return
        idx[j] += 1


def word_eval(sys: GeneratorSystem, w: Word, x):
    """Apply the generators of ``w`` in order; the empty word is the identity."""
    for i in w:
        x = sys.apply(i, x)
    return x


def word_eval_checked(sys: GeneratorSystem, w: Word, x) -> tuple:
    """Like ``word_eval`` but also reports whether any intermediate point left the window."""
    escaped = False
    for i in w:
        x = sys.apply(i, x)
        escaped = escaped or not sys.space.contains(x)
    return x, escaped


def word_eval_batch(sys: GeneratorSystem, w: Word, pts: np.ndarray) -> tuple:
    """Returns (images, escaped) for an array of points of shape (dim, N)."""
    escaped = np.zeros(pts.shape[1], dtype=bool)
    for i in w:
        pts = sys.apply_batch(i, pts)
        escaped |= ~sys.space.contains_batch(pts)
    return pts, escaped


class PointIndex:
    """Spatial hash for deduplicating points up to a tolerance."""

    def __init__(self, space: PhaseSpace, tol: float):
        self.space = space
        self.tol = tol
        self._buckets: dict = {}
        self.points: list = []

    def _key(self, coords):
        if self.space.is_circle:
            coords = [c % 1.0 for c in coords]
        return tuple(int(math.floor(c / self.tol)) for c in coords)

    def find(self, x) -> int | None:
        coords = [x] if np.ndim(x) == 0 else list(x)
        key = self._key(coords)
        offsets = [(-1, 0, 1)] * len(key)
        n_wrap = int(round(1.0 / self.tol)) if self.space.is_circle else None
        for off in itertools.product(*offsets):
            k = tuple(a + b for a, b in zip(key, off))
            if n_wrap:
                k = tuple(v % n_wrap for v in k)
            for j in self._buckets.get(k, ()):
                if self.space.dist(self.points[j], x) <= self.tol:
                    return j
        return None

    def add(self, x) -> tuple:
        """Insert unless a point within tolerance exists; returns (index, inserted)."""
        j = self.find(x)
        if j is not None:
            return j, False
        coords = [x] if np.ndim(x) == 0 else list(x)
        key = self._key(coords)
        if self.space.is_circle:
            n_wrap = int(round(1.0 / self.tol))
            key = tuple(v % n_wrap for v in key)
        self.points.append(x)
        self._buckets.setdefault(key, []).append(len(self.points) - 1)
        return len(self.points) - 1, True


@dataclass(frozen=True)
class OrbitEntry:
    point: object
    word: Word
    escaped: bool


@dataclass(frozen=True)
class Orbit:
    base: object
    entries: tuple
    max_len: int
    underflowed: int = 0
    nonfinite: int = 0

    @property
    def points(self) -> list:
        return [e.point for e in self.entries]

    def witness(self, x, tol: float = 1e-12):
        for e in self.entries:
            if np.max(np.abs(np.subtract(e.point, x))) <= tol:
                return e.word
        return None


def orbit(sys: GeneratorSystem, x, max_len: int, tol_dedup: float = TOL_DEDUP, cap: int = DEFAULT_WORD_CAP) -> Orbit:
    """``{x}`` together with the images of ``x`` under every word up to ``max_len``.

    Words are expanded level by level so each entry keeps the first
    (shortest, then lexicographically least) word that reached it.  Images
    that underflow to exactly zero from a nonzero predecessor are dropped
    and counted: a float artefact, not a point of the orbit.
    """
    count = count_words(sys.k, 1, max_len)
    if count > cap:
        raise BudgetExceeded(f"orbit needs {count} words, cap is {cap}")
    base = as_coords(x, sys.dim)
    index = PointIndex(sys.space, tol_dedup)
    entries = [OrbitEntry(unpack_point(base[:, 0]), (), not sys.space.contains_batch(base)[0])]
    index.add(entries[0].point)
    level_pts = base
    level_words: list = [()]
    level_escaped = np.array([entries[0].escaped])
    underflowed = nonfinite = 0
    for _ in range(max_len):
        new_pts, new_words, new_esc = [], [], []
        for i in range(sys.k):
            img = sys.apply_batch(i, level_pts)
            finite = np.all(np.isfinite(img), axis=0)
            under = np.any((img == 0.0) & (np.abs(level_pts) > 0) & (np.abs(level_pts) < _TINY), axis=0)
            keep = finite & ~under
            nonfinite += int(np.sum(~finite))
            underflowed += int(np.sum(finite & under))
            esc = level_escaped | ~sys.space.contains_batch(img)
            for j in np.nonzero(keep)[0]:
                new_pts.append(img[:, j])
                new_words.append(level_words[j] + (i,))
                new_esc.append(bool(esc[j]))
        if not new_pts:
            break
        order = sorted(range(len(new_words)), key=lambda j: new_words[j])
        level_pts = np.array([new_pts[j] for j in order]).T
        level_words = [new_words[j] for j in order]
        level_escaped = np.array([new_esc[j] for j in order])
        for j in range(len(level_words)):
            p = unpack_point(level_pts[:, j])
            _, inserted = index.add(p)
            if inserted:
                entries.append(OrbitEntry(p, level_words[j], bool(level_escaped[j])))
    return Orbit(unpack_point(base[:, 0]), tuple(entries), max_len, underflowed, nonfinite)


def is_abelian_sampled(
    sys: GeneratorSystem,
    samples: int,
    tol: float = 1e-9,
    seed: int = 0,
    points: Sequence | None = None,
) -> Verdict:
    """Search for a non-commuting pair; sampling can only ever refute commutativity."""
    if samples < 1:
        raise ValueError("samples must be positive")
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in sys.space.bounds])
    hi = np.array([b[1] for b in sys.space.bounds])
    pts = list(points or [])
    pts += [unpack_point(lo + (hi - lo) * rng.random(sys.dim)) for _ in range(samples)]
    budgets = {"samples": len(pts), "tol": tol}
    for x in pts:
        for i in range(sys.k):
            for j in range(i + 1, sys.k):
                try:
                    lhs = word_eval(sys, (j, i), x)  # g_i∘g_j
                    rhs = word_eval(sys, (i, j), x)  # g_j∘g_i
                except DomainError:
                    continue
                gap = sys.space.dist(lhs, rhs)
                if gap > tol:
                    names = sys.names
                    return no(
                        {"i": names[i], "j": names[j], "x": x, "gi_gj": lhs, "gj_gi": rhs, "gap": gap},
                        budgets,
                        note=f"{names[i]}∘{names[j]} != {names[j]}∘{names[i]} at x={x!r}",
                    )
    return inconclusive("abelian up to sampling", budgets)


def maps_into(sys: GeneratorSystem, union: Sequence, target: Sequence | None = None) -> bool:
    """Whether every generator maps each box of ``union`` into ``target`` (default: ``union``).

    Checked with interval enclosures, so a True answer is a proof.
    """
    from .expr import eval_interval
    from .interval import box_in_union

    target = union if target is None else target
    for g in sys.generators:
        for box in union:
            try:
                img = eval_interval(tuple(g.components), box)
            except DomainError:
                return False
            if not box_in_union(img, target):
                return False
    return True
