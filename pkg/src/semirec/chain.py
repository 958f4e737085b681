"""(eps, g)-chains and their finite model on a grid.

A chain from a to b is a = x_1, ..., x_{n+1} = b (n >= 1) with helpers
h_i in G^ such that dist(h_i(g(x_i)), x_{i+1}) < eps.  The chain graph has
the cell centers as nodes and an edge u -> v when some helper of length
<= H takes g(center u) to within eps of center v.  A query a -> b takes its
first hop from a itself and its last hop onto b itself, so every chain it
reports is an honest eps-chain whose interior points are cell centers.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import graph as G
from .certificate import InvariantSetCertificate, normalize_sets, search_certificate, sign_candidates, whole_line
from .expr import is_polynomial
from .semigroup import GeneratorSystem, Word, WordClass, enumerate_words, word_eval, word_eval_checked, word_eval_batch
from .space import ESCAPE, Grid, as_coords
from .verdict import DomainError, Verdict, inconclusive, no, yes

DEFAULT_HELPER_LEN = 3
DEFAULT_LEAD_LEN = 2

SOUNDNESS = (
    "after the first application of the lead every image lies in S, S is closed under every "
    "helper word, so each later chain point is within eps of S; dist(a, S) >= eps keeps a out of reach"
)


@dataclass
class EpsilonChain:
    """Points x_1..x_{n+1} and helpers h_1..h_n for a fixed lead word."""

    points: list
    helpers: list
    lead: Word
    eps: float
    eps_prime: float | None = None

    def __post_init__(self):
        if len(self.helpers) < 1 or len(self.points) != len(self.helpers) + 1:
            raise ValueError("a chain needs n >= 1 helpers and n + 1 points")

    def __len__(self) -> int:
        return len(self.helpers)

    def step_distances(self, sys: GeneratorSystem) -> list:
        out = []
        for x, h, y in zip(self.points, self.helpers, self.points[1:]):
            out.append(sys.space.dist(word_eval(sys, self.lead + tuple(h), x), y))
        return out

    def validate(self, sys: GeneratorSystem, eps: float | None = None) -> bool:
        """Every step lands strictly within ``eps`` (default: ``eps_prime`` if set, else ``eps``)."""
        bound = eps if eps is not None else (self.eps_prime if self.eps_prime is not None else self.eps)
        try:
            return all(d < bound for d in self.step_distances(sys))
        except DomainError:
            return False

    def concat(self, other: "EpsilonChain") -> "EpsilonChain":
        if other.lead != self.lead or other.points[0] != self.points[-1]:
            raise ValueError("chains must share the lead word and meet at a common point")
        prime = None
        if self.eps_prime is not None or other.eps_prime is not None:
            prime = max(self.eps_prime or self.eps, other.eps_prime or other.eps)
        return EpsilonChain(self.points + other.points[1:], self.helpers + other.helpers, self.lead, max(self.eps, other.eps), prime)

    def to_json(self, sys: GeneratorSystem) -> dict:
        steps = []
        for i, x in enumerate(self.points):
            h = self.helpers[i] if i < len(self.helpers) else None
            steps.append({"point": x, "word": None if h is None else sys.format_word(tuple(h))})
        return {
            "lead": sys.format_word(self.lead),
            "eps": self.eps,
            "eps_prime": self.eps_prime,
            "steps": steps,
        }

    @classmethod
    def from_json(cls, sys: GeneratorSystem, data: dict) -> "EpsilonChain":
        steps = data["steps"]
        points = [s["point"] if np.ndim(s["point"]) == 0 else tuple(s["point"]) for s in steps]
        helpers = [sys.parse_word(s["word"]) for s in steps[:-1]]
        return cls(points, helpers, sys.parse_word(data["lead"]), float(data["eps"]), data.get("eps_prime"))

    def rows(self, sys: GeneratorSystem) -> list:
        return [{"step": i, "x": s["point"], "word": s["word"] or ""} for i, s in enumerate(self.to_json(sys)["steps"])]


@dataclass
class ChainGraph:
    sys: GeneratorSystem
    grid: Grid
    lead: Word
    eps: float
    helper_max_len: int
    helpers: list
    succ: list
    images: np.ndarray = field(repr=False)
    escaped: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.grid.n_cells

    @property
    def eps_prime(self) -> float:
        return self.eps + self.grid.delta * math.sqrt(self.grid.dim)

    @property
    def n_edges(self) -> int:
        return sum(len(s) for s in self.succ)

    def edge_set(self) -> set:
        return {(u, v) for u, s in enumerate(self.succ) for v in s}

    def point_hops(self, x) -> dict:
        """Cells whose center is within eps of h(g(x)) for some helper; maps cell -> helper."""
        col = as_coords(x, self.grid.dim)
        out: dict = {}
        with np.errstate(all="ignore"):
            gx, esc0 = word_eval_batch(self.sys, self.lead, col)
        for h in self.helpers:
            with np.errstate(all="ignore"):
                y, esc = word_eval_batch(self.sys, h, gx)
            if esc0[0] or esc[0] or not np.all(np.isfinite(y)):
                out.setdefault(ESCAPE, h)
                continue
            for v in _near(self.grid, y[:, 0], self.eps):
                out.setdefault(int(v), h)
        return out

    def cells_reaching(self, b) -> dict:
        """Cells u with dist(h(g(center u)), b) < eps for some helper; maps cell -> helper."""
        col = as_coords(b, self.grid.dim)
        out: dict = {}
        for k, h in enumerate(self.helpers):
            with np.errstate(invalid="ignore"):
                d = self.sys.space.dist_batch(self.images[k], col)
            ok = (d < self.eps) & ~self.escaped[k]
            for u in np.flatnonzero(ok):
                out.setdefault(int(u), h)
        return out

    def edge_rows(self) -> list:
        rows = []
        for u, s in enumerate(self.succ):
            for v, h in sorted(s.items()):
                rows.append({"src": u, "dst": "ESCAPE" if v == ESCAPE else v, "witness": self.sys.format_word(h)})
        return rows

    def to_csv(self) -> str:
        return _csv(self.edge_rows(), ["src", "dst", "witness"])


def _csv(rows: list, columns: list) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _near(grid: Grid, y: np.ndarray, eps: float) -> np.ndarray:
    if grid.dim == 1 and not grid.space.is_circle:
        c = grid.centers[0]
        lo = max(0, int(np.searchsorted(c, y[0] - eps, side="left")) - 1)
        hi = min(grid.n_cells, int(np.searchsorted(c, y[0] + eps, side="right")) + 1)
        cand = np.arange(lo, hi)
        return cand[np.abs(c[lo:hi] - y[0]) < eps]
    return grid.cells_near(y, eps)


def build_chain_graph(
    sys: GeneratorSystem,
    grid: Grid,
    g: Word,
    eps: float,
    helper_max_len: int = DEFAULT_HELPER_LEN,
    cap: int | None = None,
) -> ChainGraph:
    """Edges u -> v with the shortlex-first helper as witness; escaping images go to ESCAPE."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    g = tuple(g)
    if not g:
        raise ValueError("the lead word must be nonempty")
    kw = {} if cap is None else {"cap": cap}
    helpers = enumerate_words(sys, WordClass.GHAT, helper_max_len, **kw)
    n = grid.n_cells
    with np.errstate(all="ignore"):
        gx, esc_g = word_eval_batch(sys, g, grid.centers)
    images = np.empty((len(helpers), grid.dim, n))
    escaped = np.empty((len(helpers), n), dtype=bool)
    succ: list = [dict() for _ in range(n)]
    for k, h in enumerate(helpers):
        with np.errstate(all="ignore"):
            y, esc = word_eval_batch(sys, h, gx)
        bad = esc_g | esc | ~np.all(np.isfinite(y), axis=0)
        images[k] = y
        escaped[k] = bad
        for u in range(n):
            if bad[u]:
                succ[u].setdefault(ESCAPE, h)
                continue
            for v in _near(grid, y[:, u], eps):
                succ[u].setdefault(int(v), h)
    return ChainGraph(sys, grid, g, float(eps), helper_max_len, helpers, succ, images, escaped)


# ---------------------------------------------------------------- classification


@dataclass
class ChainClassification:
    graph: ChainGraph
    scc: list
    on_cycle: list
    reach_count: list
    reaches_escape: list

    def rows(self) -> list:
        grid = self.graph.grid
        return [
            {
                "cell": u,
                "center": grid.center_of(u),
                "scc": self.scc[u],
                "on_cycle": self.on_cycle[u],
                "reachable": self.reach_count[u],
                "escapes": self.reaches_escape[u],
            }
            for u in range(grid.n_cells)
        ]

    def to_csv(self) -> str:
        return _csv(self.rows(), ["cell", "center", "scc", "on_cycle", "reachable", "escapes"])


def classify(graph: ChainGraph) -> ChainClassification:
    succ = [list(s) for s in graph.succ]
    comp = G.strongly_connected_components(graph.n, succ)
    flags = G.cycle_flags(graph.n, succ, comp)
    counts, esc = G.reachable_counts(graph.n, succ, comp, sink=ESCAPE)
    return ChainClassification(graph, comp, flags, counts, esc)


# ---------------------------------------------------------------- queries


def find_chain(graph: ChainGraph, a, b, max_steps: int | None = None) -> EpsilonChain | None:
    """Shortest chain a -> b whose interior points are cell centers, or None."""
    first = graph.point_hops(a)
    first.pop(ESCAPE, None)
    last = graph.cells_reaching(b)
    # direct one-step chain
    for h in graph.helpers:
        try:
            gx, e1 = word_eval_checked(graph.sys, graph.lead, a)
            y, e2 = word_eval_checked(graph.sys, h, gx)
        except DomainError:
            break
        if not (e1 or e2) and graph.sys.space.dist(y, b) < graph.eps:
            return EpsilonChain([a, b], [h], graph.lead, graph.eps, graph.eps_prime)
    if max_steps is not None and max_steps < 2:
        return None
    depth = None if max_steps is None else max_steps - 1
    path = G.bfs_path(graph.succ, sorted(first), lambda u: u in last, depth)
    if path is None:
        return None
    points = [a] + [graph.grid.center_of(u) for u in path] + [b]
    helpers = [first[path[0]]] + [graph.succ[u][v] for u, v in zip(path, path[1:])] + [last[path[-1]]]
    return EpsilonChain(points, helpers, graph.lead, graph.eps, graph.eps_prime)


def chain_exists(
    graph: ChainGraph,
    a,
    b,
    certificate: InvariantSetCertificate | None = None,
    max_steps: int | None = None,
) -> Verdict:
    """Search for an (eps, g)-chain from a to b.

    YES carries the chain, validated at eps' = eps + delta*sqrt(dim) (it
    normally holds at eps itself; the record says which).  NO requires a
    no-chain certificate for target b with the same lead and eps at least
    as large; without one the answer is INCONCLUSIVE.
    """
    sys = graph.sys
    for p in (a, b):
        if not sys.space.contains(p):
            raise ValueError(f"point {p!r} lies outside the space")
    budgets = {"helper_max_len": graph.helper_max_len, "cells": graph.n, "max_steps": max_steps}
    chain = find_chain(graph, a, b, max_steps)
    if chain is not None:
        if not chain.validate(sys):
            return inconclusive("chain found on the grid failed pointwise replay", budgets, witness=chain.to_json(sys))
        w = chain.to_json(sys)
        w["valid_at_eps"] = chain.validate(sys, graph.eps)
        w["length"] = len(chain)
        return yes(w, budgets)
    if certificate is not None and _certificate_applies(certificate, graph, b):
        if certificate.validate(sys):
            return no(certificate.to_json(sys), budgets, note=SOUNDNESS)
    escapes = bool(graph.point_hops(a).get(ESCAPE) is not None) or any(ESCAPE in s for s in graph.succ)
    note = "no chain within helper budget"
    if escapes:
        note += "; some images leave the window"
    return inconclusive(note, budgets)


def _certificate_applies(cert: InvariantSetCertificate, graph: ChainGraph, b) -> bool:
    target = tuple(float(v) for v in np.atleast_1d(b))
    return (
        cert.epsilon is not None
        and cert.epsilon >= graph.eps
        and [tuple(w) for w in cert.lead_words] == [graph.lead]
        and tuple(cert.target) == target
    )


def _lead_domain(sys: GeneratorSystem) -> tuple:
    if all(is_polynomial(c) for gen in sys.generators for c in gen.components):
        return whole_line(sys.dim), "whole line"
    return sys.space.as_box(), "window"


def _no_chain_search(sys: GeneratorSystem, a, g: Word, eps: float, S=None):
    if eps <= 0:
        raise ValueError("eps must be positive")
    g = tuple(g)
    dom, where = _lead_domain(sys)
    target = tuple(float(v) for v in np.atleast_1d(a))
    cands = [S] if S is not None else sign_candidates(sys)
    cert = search_certificate(sys, [g], dom, target, cands, epsilon=eps, note=f"lead {sys.format_word(g)}")
    return cert, (g, dom, target, cands, where)


def certify_no_chain(sys: GeneratorSystem, a, g: Word, eps: float, S=None) -> Verdict:
    """YES (no (eps, g)-chain ends at a) when an invariant set S certifies it.

    Fact (i) is checked on the whole line for polynomial systems and on
    the window otherwise; chain points live in the window, so both suffice.
    Without ``S`` the sign half-lines are tried.
    """
    cert, (g, dom, target, cands, where) = _no_chain_search(sys, a, g, eps, S)
    budgets = {"candidates": len(cands), "lead_domain": where}
    if cert is not None:
        return yes(cert.to_json(sys), budgets, note=SOUNDNESS)
    failed = []
    for cand in cands:
        trial = InvariantSetCertificate(normalize_sets(cand), [g], dom, target, epsilon=eps)
        trial.validate(sys)
        failed.append({k: v for k, v in trial.facts.items() if k != "lead_images"})
    return inconclusive("no candidate set passes all three facts", budgets, witness=failed)


def no_chain_certificate(sys: GeneratorSystem, a, g: Word, eps: float, S=None) -> InvariantSetCertificate | None:
    """The certificate object itself, for passing to ``chain_exists``."""
    return _no_chain_search(sys, a, g, eps, S)[0]


# ---------------------------------------------------------------- sweeps


@dataclass
class ChainRecurrenceSweep:
    grid: Grid
    leads: list
    schedule: tuple
    helper_max_len: int
    cr: list
    failure: dict
    graphs: dict = field(repr=False, default_factory=dict)

    def cells(self) -> set:
        return {u for u, f in enumerate(self.cr) if f}

    def budgets(self, sys: GeneratorSystem) -> dict:
        return {
            "leads": [sys.format_word(g) for g in self.leads],
            "eps_schedule": list(self.schedule),
            "helper_max_len": self.helper_max_len,
            "cells": self.grid.n_cells,
        }

    def rows(self, sys: GeneratorSystem) -> list:
        out = []
        for u, f in enumerate(self.cr):
            fail = self.failure.get(u)
            out.append(
                {
                    "cell": u,
                    "x_center": self.grid.center_of(u),
                    "status": "CR-up-to-budget" if f else "not-CR",
                    "failed_lead": "" if fail is None else sys.format_word(fail[0]),
                    "failed_eps": "" if fail is None else fail[1],
                }
            )
        return out


def _check_schedule(schedule: Sequence[float]) -> tuple:
    sched = tuple(float(e) for e in schedule)
    if not sched:
        raise ValueError("the eps schedule needs at least one entry")
    if any(e <= 0 for e in sched) or any(b >= a for a, b in zip(sched, sched[1:])):
        raise ValueError("the eps schedule must be positive and strictly decreasing")
    return sched


def chain_recurrent_cells(
    sys: GeneratorSystem,
    grid: Grid,
    lead_max_len: int = DEFAULT_LEAD_LEN,
    eps_schedule: Sequence[float] = (0.1, 0.05),
    helper_max_len: int = DEFAULT_HELPER_LEN,
    keep_graphs: bool = False,
) -> ChainRecurrenceSweep:
    """A cell is CR up to budget when it lies on a cycle of every tested (eps, g) graph."""
    sched = _check_schedule(eps_schedule)
    leads = enumerate_words(sys, WordClass.FULL, lead_max_len)
    cr = [True] * grid.n_cells
    failure: dict = {}
    graphs: dict = {}
    for g in leads:
        for eps in sched:
            gr = build_chain_graph(sys, grid, g, eps, helper_max_len)
            cls = classify(gr)
            if keep_graphs:
                graphs[(g, eps)] = (gr, cls)
            for u, f in enumerate(cls.on_cycle):
                if cr[u] and not f:
                    cr[u] = False
                    failure[u] = (g, eps)
    return ChainRecurrenceSweep(grid, leads, sched, helper_max_len, cr, failure, graphs)


def chain_equivalent(
    sys: GeneratorSystem,
    grid: Grid,
    a,
    b,
    lead_max_len: int = DEFAULT_LEAD_LEN,
    eps_schedule: Sequence[float] = (0.1, 0.05),
    helper_max_len: int = DEFAULT_HELPER_LEN,
    certificate_sets=None,
) -> Verdict:
    """Chains both ways for every tested lead and eps.

    NO comes with a no-chain certificate for one direction; otherwise the
    best available answer is INCONCLUSIVE, noted "yes up to budget" when
    every tested pair of chains was found.
    """
    sched = _check_schedule(eps_schedule)
    leads = enumerate_words(sys, WordClass.FULL, lead_max_len)
    budgets = {"leads": len(leads), "eps_schedule": list(sched), "helper_max_len": helper_max_len, "cells": grid.n_cells}
    missing = []
    lengths = {}
    for g in leads:
        for eps in sched:
            gr = build_chain_graph(sys, grid, g, eps, helper_max_len)
            key = f"{sys.format_word(g)} @ {eps}"
            pair = []
            for src, dst in ((a, b), (b, a)):
                chain = find_chain(gr, src, dst)
                if chain is not None and chain.validate(sys):
                    pair.append(len(chain))
                    continue
                pair.append(None)
                v = certify_no_chain(sys, dst, g, eps, certificate_sets)
                if v.yes:
                    cert = dict(v.witness)
                    cert["direction"] = [_jsonable(src), _jsonable(dst)]
                    return no(cert, budgets, note=f"no chain for lead {sys.format_word(g)} at eps {eps}: " + SOUNDNESS)
                missing.append({"lead": sys.format_word(g), "eps": eps, "from": _jsonable(src), "to": _jsonable(dst)})
            lengths[key] = pair
    if missing:
        return inconclusive("no chain found within budget", budgets, witness={"missing": missing, "chain_lengths": lengths})
    return inconclusive("yes up to budget", budgets, witness={"chain_lengths": lengths})


def _jsonable(x):
    if np.ndim(x) == 0:
        return float(x)
    return [float(v) for v in np.asarray(x).ravel()]


# ---------------------------------------------------------------- brute force


def enumerate_chains(
    sys: GeneratorSystem,
    grid: Grid,
    g: Word,
    eps: float,
    helper_max_len: int,
    a,
    b,
    max_len: int = 6,
) -> EpsilonChain | None:
    """Exhaustive search over chains a, c_1, ..., c_{n-1}, b with interior cell centers, n <= max_len.

    Independent of the graph code: every step is a scalar evaluation of
    h∘g with the same escape rule, and every candidate successor is tried.
    """
    g = tuple(g)
    helpers = enumerate_words(sys, WordClass.GHAT, helper_max_len)
    centers = [grid.center_of(u) for u in range(grid.n_cells)]
    space = sys.space

    @lru_cache(maxsize=None)
    def images(key):
        x = a if key == -1 else centers[key]
        out = []
        try:
            gx, e1 = word_eval_checked(sys, g, x)
        except DomainError:
            return ()
        for h in helpers:
            try:
                y, e2 = word_eval_checked(sys, h, gx)
            except DomainError:
                continue
            if not (e1 or e2):
                out.append((h, y))
        return tuple(out)

    def step(key, y_target):
        for h, y in images(key):
            if space.dist(y, y_target) < eps:
                return h
        return None

    @lru_cache(maxsize=None)
    def search(key, remaining):
        h = step(key, b)
        if h is not None:
            return ((h, None),)
        if remaining <= 1:
            return None
        for v in range(grid.n_cells):
            h = step(key, centers[v])
            if h is None:
                continue
            rest = search(v, remaining - 1)
            if rest is not None:
                return ((h, v),) + rest
        return None

    found = search(-1, max_len)
    if found is None:
        return None
    points = [a] + [centers[v] for _, v in found[:-1]] + [b]
    return EpsilonChain(points, [h for h, _ in found], g, float(eps))
