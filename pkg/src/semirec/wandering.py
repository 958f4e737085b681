"""Nonwandering and strongly nonwandering membership, pointwise and over grids.

Neighbourhoods are open metric balls for the point tests and open grid
cells for the sweeps (the two coincide in one dimension).  A YES always
carries a replayable point witness ``u`` with ``word(u)`` back inside the
neighbourhood; a NO always carries an invariant-set certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .certificate import InvariantSetCertificate, search_certificate, sign_candidates, word_enclosure
from .interval import Interval, box_meets_open_ball_box
from .recurrence import fixed_points_of_word, fix_set
from .semigroup import GeneratorSystem, Word, WordClass, enumerate_words, word_eval
from .space import Grid, as_coords, unpack_point
from .verdict import DomainError, Verdict, inconclusive, no, yes

REFINE_1D = 33
SAMPLES_PER_AXIS = 3
IDENTITY_TOL = 1e-12


def _inside(sys: GeneratorSystem, pts: np.ndarray, center: np.ndarray, radius: float, shape: str) -> np.ndarray:
    if shape == "ball" or sys.dim == 1:
        return sys.space.dist_batch(pts, center) < radius
    diff = np.abs(pts - center)
    return np.all(diff < radius, axis=0)


def _sample_offsets(dim: int, radius: float, per_axis: int) -> np.ndarray:
    """Offsets strictly inside the open cube of half-width ``radius``; shape (dim, m)."""
    t = radius * ((2 * (np.arange(per_axis) + 0.5) / per_axis) - 1)
    mesh = np.meshgrid(*([t] * dim), indexing="ij")
    return np.array([m.ravel() for m in mesh])


def _scalar_inside(sys, y, center, radius, shape) -> bool:
    if shape == "ball" or sys.dim == 1:
        return sys.space.dist(y, center) < radius
    return all(abs(a - b) < radius for a, b in zip(y, center))


def _bisect_onto(sys: GeneratorSystem, w: Word, a: float, b: float, center: float, radius: float):
    """1-D: find u in [a, b] with w(u) inside the ball, given a sign change of w(u) - center."""

    def phi(u):
        d = word_eval(sys, w, u) - center
        if sys.space.is_circle:
            d = (d + 0.5) % 1.0 - 0.5
        return d

    try:
        fa = phi(a)
        for _ in range(200):
            if abs(fa) < radius and sys.space.dist(word_eval(sys, w, a), center) < radius:
                return a
            m = a + (b - a) / 2
            if m <= a or m >= b:
                break
            fm = phi(m)
            if (fm < 0) == (fa < 0):
                a, fa = m, fm
            else:
                b = m
        if sys.space.dist(word_eval(sys, w, b), center) < radius:
            return b
    except DomainError:
        return None
    return None


def search_returns(
    sys: GeneratorSystem,
    w: Word,
    centers: np.ndarray,
    radius: float,
    shape: str = "ball",
    per_axis: int | None = None,
) -> tuple:
    """For every center, look for u in U(center) with w(u) in U(center).

    Returns (witnesses, identity_like): witnesses maps column index to
    (u, w(u)) verified on the scalar path; identity_like flags centers
    where ``w`` moves no sample point (such words are skipped).
    """
    dim, n = centers.shape
    per_axis = per_axis or (REFINE_1D if dim == 1 else SAMPLES_PER_AXIS)
    offs = _sample_offsets(dim, radius, per_axis)
    m = offs.shape[1]
    pts = (centers[:, :, None] + offs[:, None, :]).reshape(dim, n * m)
    pts = sys.space.normalize(pts)
    img = pts
    with np.errstate(all="ignore"):
        for i in w:
            img = sys.apply_batch(i, img)
    finite = np.all(np.isfinite(img), axis=0)
    moved = sys.space.dist_batch(img, pts)
    identity_like = np.all(np.where(finite, moved, np.inf).reshape(n, m) < IDENTITY_TOL, axis=1)
    rep_centers = np.repeat(centers, m, axis=1)
    hit = finite & _inside(sys, img, rep_centers, radius, shape)
    hit = hit.reshape(n, m)
    witnesses = {}
    for j in range(n):
        if identity_like[j]:
            continue
        c = unpack_point(centers[:, j])
        cols = np.nonzero(hit[j])[0]
        for col in cols:
            u = unpack_point(pts[:, j * m + col])
            if not _scalar_inside(sys, u, c, radius, shape):
                continue
            try:
                y = word_eval(sys, w, u)
            except DomainError:
                continue
            if _scalar_inside(sys, y, c, radius, shape):
                witnesses[j] = (u, y)
                break
        if j in witnesses or dim != 1:
            continue
        d = img[0, j * m : (j + 1) * m] - centers[0, j]
        if sys.space.is_circle:
            d = np.mod(d + 0.5, 1.0) - 0.5
        ok = finite[j * m : (j + 1) * m]
        for col in range(m - 1):
            if ok[col] and ok[col + 1] and (d[col] < 0) != (d[col + 1] < 0):
                a, b = pts[0, j * m + col], pts[0, j * m + col + 1]
                u = _bisect_onto(sys, w, a, b, c, radius)
                if u is not None and _scalar_inside(sys, u, c, radius, shape):
                    witnesses[j] = (float(u), word_eval(sys, w, u))
                    break
    return witnesses, identity_like


def _closed_box(center: Sequence[float], radius: float) -> tuple:
    return tuple(Interval(float(c) - radius, float(c) + radius) for c in center)


def _candidates(sys: GeneratorSystem, certificate_sets) -> list:
    return sign_candidates(sys) if certificate_sets is None else list(certificate_sets)


def _witness_json(sys, u, w, y, radius):
    return {"point": u, "word": sys.word_names(w), "composition": sys.format_word(w), "image": y, "radius": radius}


def replay_return(sys: GeneratorSystem, witness: dict, center, shape: str = "ball") -> bool:
    """Re-evaluate a nonwandering witness: u and word(u) both inside the neighbourhood."""
    w = sys.parse_word(witness["word"])
    u = witness["point"]
    r = witness["radius"]
    try:
        y = word_eval(sys, w, u)
    except DomainError:
        return False
    return _scalar_inside(sys, u, center, r, shape) and _scalar_inside(sys, y, center, r, shape)


def _nonwandering_certificate(sys, center, radius, max_len, candidates) -> InvariantSetCertificate | None:
    """Certificate that every word of length >= 2 maps U away from U."""
    dom = _closed_box(center, radius)
    for m in (1, 2):
        probes = [w for w in enumerate_words(sys, WordClass.FULL, m) if len(w) == m]
        cert = search_certificate(sys, probes, dom, center, candidates, radius=radius, note=f"probe words of length {m}")
        if cert is not None:
            return cert
    return None


def _short_words_miss(sys, words, center, radius) -> bool:
    dom = _closed_box(center, radius)
    for w in words:
        try:
            img = word_enclosure(sys, w, dom)
        except DomainError:
            return False
        if box_meets_open_ball_box(img, center, radius):
            return False
    return True


def is_nonwandering(
    sys: GeneratorSystem,
    x,
    radius: float,
    max_len: int = 4,
    certificate_sets=None,
    radius_schedule: bool = False,
    per_axis: int | None = None,
) -> Verdict:
    """Does some word of length >= 2 bring a point of B(x, r) back into B(x, r)?"""
    if radius <= 0:
        raise ValueError("radius must be positive")
    if max_len < 2:
        raise ValueError("G* needs words of length >= 2")
    words = enumerate_words(sys, WordClass.GSTAR, max_len)
    center = as_coords(x, sys.dim)
    radii = [radius, radius / 2, radius / 4] if radius_schedule else [radius]
    budgets = {"max_len": max_len, "words": len(words), "radii": radii}
    found = []
    skipped_identity = []
    for r in radii:
        witness = None
        for w in words:
            wit, ident = search_returns(sys, w, center, r, "ball", per_axis)
            if ident[0]:
                skipped_identity.append(sys.format_word(w))
                continue
            if 0 in wit:
                u, y = wit[0]
                witness = _witness_json(sys, u, w, y, r)
                break
        if witness is None:
            c = tuple(float(v) for v in center[:, 0])
            cert = _nonwandering_certificate(sys, c, r, max_len, _candidates(sys, certificate_sets))
            if cert is not None and _short_words_miss(sys, words, c, r):
                return no(cert.to_json(sys), budgets, note=f"wandering neighbourhood of radius {r}")
            return inconclusive(
                f"no return found at radius {r} for words of length 2..{max_len} and no certificate",
                budgets | {"identity_like_words": sorted(set(skipped_identity))},
            )
        found.append(witness)
    budgets["identity_like_words"] = sorted(set(skipped_identity))
    return yes(found if radius_schedule else found[0], budgets)


def _contains_common_fixed_point(sys: GeneratorSystem, center, radius: float):
    """A common fixed point of all generators in the closed ball, or None."""
    if sys.dim == 1:
        c = float(center)
        lo, hi = c - radius, c + radius
        if not sys.space.is_circle:
            lo, hi = max(lo, sys.space.bounds[0][0]), min(hi, sys.space.bounds[0][1])
        for p in _fix_points_in(sys, lo, hi):
            if sys.space.dist(p, c) < radius:
                return p
        return None
    try:
        if all(sys.space.dist(sys.apply(i, center), center) <= 1e-9 for i in range(sys.k)):
            return center
    except DomainError:
        return None
    return None


def _fix_points_in(sys, lo, hi, resolution=64):
    per_gen = [fixed_points_of_word(sys, (i,), resolution, window=(lo, hi)).records for i in range(sys.k)]
    out = []
    for rec in per_gen[0]:
        if all(any(abs(rec.point - o.point) <= 1e-7 for o in recs) for recs in per_gen[1:]):
            out.append(rec.point)
    return out


def is_strongly_nonwandering(
    sys: GeneratorSystem,
    x,
    radius: float,
    lead_max_len: int = 2,
    helper_max_len: int = 2,
    certificate_sets=None,
    per_axis: int | None = None,
) -> Verdict:
    """For every lead word g: does some helper h in G^ bring h∘g(U) back into U?

    The quantifier over all of G cannot be discharged by search, so YES is
    only issued when U contains a common fixed point (then h = identity
    works for every g).  NO needs a lead with an invariant-set certificate.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    leads = enumerate_words(sys, WordClass.FULL, lead_max_len)
    helpers = enumerate_words(sys, WordClass.GHAT, helper_max_len)
    budgets = {"lead_max_len": lead_max_len, "helper_max_len": helper_max_len, "leads": len(leads), "helpers": len(helpers)}
    center = as_coords(x, sys.dim)
    c = tuple(float(v) for v in center[:, 0])
    dom = _closed_box(c, radius)
    cands = _candidates(sys, certificate_sets)
    for g in leads:
        cert = search_certificate(sys, [g], dom, c, cands, radius=radius, note=f"lead {sys.format_word(g)}")
        if cert is not None:
            return no(cert.to_json(sys), budgets, note=f"h∘{sys.format_word(g)}(U) misses U for every h")
    p = _contains_common_fixed_point(sys, unpack_point(center[:, 0]), radius)
    if p is not None:
        return yes({"fixed_point": p, "helper": "id", "note": "g(p) = p for every g"}, budgets)
    per_lead = {}
    unresolved = []
    for g in leads:
        hit = None
        for h in helpers:
            wit, _ = search_returns(sys, g + h, center, radius, "ball", per_axis)
            if 0 in wit:
                u, y = wit[0]
                hit = {"point": u, "helper": sys.word_names(h), "image": y}
                break
        if hit is None:
            unresolved.append(sys.format_word(g))
        per_lead[sys.format_word(g)] = hit
    if unresolved:
        return inconclusive(f"no helper found for leads {unresolved}", budgets, witness=per_lead)
    return inconclusive("yes up to lead budget", budgets, witness=per_lead)


# ---------------------------------------------------------------- sweeps


@dataclass
class CellSweep:
    grid: Grid
    kind: str
    verdicts: list
    budgets: dict

    def cells(self, status) -> set:
        return {i for i, v in enumerate(self.verdicts) if v.status == status}

    def rows(self, sys: GeneratorSystem) -> list:
        out = []
        for i, v in enumerate(self.verdicts):
            center = self.grid.center_of(i)
            word = ""
            if v.yes and isinstance(v.witness, dict):
                word = v.witness.get("composition", v.witness.get("helper", ""))
            out.append({"cell": i, "center": center, "status": v.status.value, "witness_word": word, "radius": self.budgets["radius"]})
        return out


def nonwandering_cells(
    sys: GeneratorSystem,
    grid: Grid,
    max_len: int,
    certificate_sets=None,
    per_axis: int | None = None,
) -> CellSweep:
    """Nonwandering test for every open cell of the grid."""
    words = enumerate_words(sys, WordClass.GSTAR, max_len)
    radius = min(grid.widths) / 2
    n = grid.n_cells
    verdicts: list = [None] * n
    open_cells = np.arange(n)
    budgets = {"max_len": max_len, "words": len(words), "radius": radius}
    for w in words:
        if open_cells.size == 0:
            break
        wit, _ = search_returns(sys, w, grid.centers[:, open_cells], radius, "box", per_axis)
        for j, (u, y) in wit.items():
            cell = int(open_cells[j])
            verdicts[cell] = yes(_witness_json(sys, u, w, y, radius), budgets)
        open_cells = np.array([c for j, c in enumerate(open_cells) if j not in wit], dtype=int)
    cands = _candidates(sys, certificate_sets)
    for cell in open_cells:
        c = tuple(float(v) for v in grid.centers[:, cell])
        cert = _nonwandering_certificate(sys, c, radius, max_len, cands)
        if cert is not None and _short_words_miss(sys, words, c, radius):
            verdicts[cell] = no(cert.to_json(sys), budgets)
        else:
            verdicts[cell] = inconclusive(f"no return for words of length 2..{max_len}", budgets)
    return CellSweep(grid, "nonwandering", verdicts, budgets)


def strongly_nonwandering_cells(
    sys: GeneratorSystem,
    grid: Grid,
    lead_max_len: int = 2,
    helper_max_len: int = 2,
    certificate_sets=None,
    per_axis: int | None = None,
) -> CellSweep:
    """Strongly nonwandering test for every open cell.

    Cells holding a common fixed point (assigned by the grid's tie rule)
    are YES; cells with a certified lead are NO; for the rest, helpers are
    searched per lead and the outcome is INCONCLUSIVE either way.
    """
    leads = enumerate_words(sys, WordClass.FULL, lead_max_len)
    helpers = enumerate_words(sys, WordClass.GHAT, helper_max_len)
    radius = min(grid.widths) / 2
    n = grid.n_cells
    budgets = {"lead_max_len": lead_max_len, "helper_max_len": helper_max_len, "radius": radius}
    verdicts: list = [None] * n
    if sys.dim == 1:
        for p in fix_set(sys):
            try:
                cell = grid.flat(grid.cell_of(p))
            except ValueError:
                continue
            verdicts[cell] = yes({"fixed_point": p, "helper": "id", "composition": "id"}, budgets)
    cands = _candidates(sys, certificate_sets)
    for cell in range(n):
        if verdicts[cell] is not None:
            continue
        c = tuple(float(v) for v in grid.centers[:, cell])
        dom = _closed_box(c, radius)
        for g in leads:
            cert = search_certificate(sys, [g], dom, c, cands, radius=radius, note=f"lead {sys.format_word(g)}")
            if cert is not None:
                verdicts[cell] = no(cert.to_json(sys), budgets)
                break
        if verdicts[cell] is None and sys.dim > 1:
            p = _contains_common_fixed_point(sys, unpack_point(grid.centers[:, cell]), radius)
            if p is not None:
                verdicts[cell] = yes({"fixed_point": p, "helper": "id", "composition": "id"}, budgets)
    pending = [c for c in range(n) if verdicts[c] is None]
    resolved_all = {c: True for c in pending}
    for g in leads:
        open_cells = np.array(pending, dtype=int)
        for h in helpers:
            if open_cells.size == 0:
                break
            wit, _ = search_returns(sys, g + h, grid.centers[:, open_cells], radius, "box", per_axis)
            open_cells = np.array([c for j, c in enumerate(open_cells) if j not in wit], dtype=int)
        for c in open_cells:
            resolved_all[int(c)] = False
    for c in pending:
        note = "yes up to lead budget" if resolved_all[c] else "some lead has no helper within budget"
        verdicts[c] = inconclusive(note, budgets)
    return CellSweep(grid, "strongly-nonwandering", verdicts, budgets)
