"""Invariant-set certificates: interval-checked proofs that orbits stay away from a target.

A certificate names a finite union S of closed boxes together with three
facts, each re-checkable with interval arithmetic:

(a) the images of a probe domain under the lead words lie in S,
(b) every generator maps S into S, hence so does every word,
(c) S is separated from the target: disjoint from an open neighbourhood,
    or at distance at least epsilon from a point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .expr import eval_interval
from .interval import INF, Interval, as_box, box_in_union, point_box_distance
from .semigroup import GeneratorSystem, Word, maps_into
from .verdict import DomainError


def word_enclosure(sys: GeneratorSystem, w: Word, box: tuple) -> tuple:
    """Enclosure of the image of a box under a word, generator by generator."""
    for i in w:
        box = eval_interval(tuple(sys.generators[i].components), box)
    return box


def whole_line(dim: int) -> tuple:
    return tuple(Interval(-INF, INF) for _ in range(dim))


def sign_candidates(sys: GeneratorSystem) -> list:
    """Half-spaces bounded by a coordinate hyperplane; cheap guesses for S."""
    if sys.space.is_circle:
        return []
    out = []
    for i in range(sys.dim):
        for half in (Interval(0.0, INF), Interval(-INF, 0.0)):
            out.append([tuple(half if j == i else Interval(-INF, INF) for j in range(sys.dim))])
    return out


def normalize_sets(sets) -> list:
    """Accept [[lo, hi], ...] (1-D) or a list of boxes; returns a list of boxes."""
    out = []
    for s in sets:
        if isinstance(s, tuple) and s and isinstance(s[0], Interval):
            out.append(s)
        elif isinstance(s, Interval):
            out.append((s,))
        elif len(s) == 2 and all(isinstance(v, (int, float, str)) for v in s):
            out.append((Interval(_num(s[0]), _num(s[1])),))
        else:
            out.append(as_box([(_num(a), _num(b)) for a, b in s]))
    return out


def _num(v) -> float:
    return float(v) if not isinstance(v, str) else float(v.replace("∞", "inf"))


def _exact_distance_at_least(point: Sequence[float], box: tuple, eps: float) -> bool:
    if len(box) == 1:
        x, iv = point[0], box[0]
        if iv.lo <= x <= iv.hi:
            return False
        gap = Fraction(iv.lo) - Fraction(x) if x < iv.lo else Fraction(x) - Fraction(iv.hi)
        return gap >= Fraction(eps)
    # a relative margin covers rounding in the float distance
    return point_box_distance(point, box) >= eps * (1 + 1e-12) + 1e-15


def _misses_open(box: tuple, center: Sequence[float], radius: float) -> bool:
    """The closed box misses the open coordinate box (center ± radius)."""
    for iv, c in zip(box, center):
        lo, hi = Fraction(c) - Fraction(radius), Fraction(c) + Fraction(radius)
        if (not math.isinf(iv.hi) and Fraction(iv.hi) <= lo) or (not math.isinf(iv.lo) and Fraction(iv.lo) >= hi):
            return True
    return False


@dataclass
class InvariantSetCertificate:
    sets: list
    lead_words: list
    domain: tuple
    target: tuple
    radius: float | None = None
    epsilon: float | None = None
    facts: dict = field(default_factory=dict)
    note: str = ""

    def validate(self, sys: GeneratorSystem) -> bool:
        """Recompute all three facts; stores the findings in ``facts``."""
        facts: dict = {}
        try:
            images = [word_enclosure(sys, w, self.domain) for w in self.lead_words]
            facts["a_lead_images_in_S"] = all(box_in_union(img, self.sets) for img in images)
            facts["lead_images"] = [box_to_json(img) for img in images]
        except DomainError as exc:
            facts["a_lead_images_in_S"] = False
            facts["a_error"] = str(exc)
        facts["b_S_invariant"] = maps_into(sys, self.sets)
        if self.epsilon is not None:
            facts["c_separated"] = all(_exact_distance_at_least(self.target, s, self.epsilon) for s in self.sets)
            dists = [point_box_distance(self.target, s) for s in self.sets]
            facts["distance_to_S"] = min(dists)
            facts["margin"] = min(dists) - self.epsilon
        else:
            facts["c_separated"] = all(_misses_open(s, self.target, self.radius) for s in self.sets)
        self.facts = facts
        return facts["a_lead_images_in_S"] and facts["b_S_invariant"] and facts["c_separated"]

    @classmethod
    def from_json(cls, sys: GeneratorSystem, data: dict) -> "InvariantSetCertificate":
        """Rebuild a certificate from ``to_json`` output so that it can be re-validated."""
        return cls(
            normalize_sets(data["S"]),
            [sys.parse_word(w) for w in data["lead_words"]],
            as_box([(_num(a), _num(b)) for a, b in data["domain"]]),
            tuple(float(t) for t in data["target"]),
            data.get("radius"),
            data.get("epsilon"),
            note=data.get("note", ""),
        )

    def to_json(self, sys: GeneratorSystem) -> dict:
        return {
            "S": [box_to_json(s) for s in self.sets],
            "lead_words": [sys.format_word(w) for w in self.lead_words],
            "domain": box_to_json(self.domain),
            "target": list(self.target),
            "radius": self.radius,
            "epsilon": self.epsilon,
            "facts": self.facts,
            "note": self.note,
        }


def box_to_json(box: tuple) -> list:
    return [[_endpoint(iv.lo), _endpoint(iv.hi)] for iv in box]


def _endpoint(v: float):
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def search_certificate(
    sys: GeneratorSystem,
    lead_words: Sequence[Word],
    domain: tuple,
    target: Sequence[float],
    candidates: Sequence,
    radius: float | None = None,
    epsilon: float | None = None,
    note: str = "",
) -> InvariantSetCertificate | None:
    """First candidate set that validates, or None."""
    for cand in candidates:
        cert = InvariantSetCertificate(
            normalize_sets(cand), list(lead_words), tuple(domain), tuple(float(t) for t in target), radius, epsilon, note=note
        )
        if cert.validate(sys):
            return cert
    return None
