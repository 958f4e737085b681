import math

import numpy as np
import pytest

from semirec.recurrence import (
    TOL_FIX,
    fix_set,
    fixed_points_of_word,
    is_recurrent,
    is_recurrent_any_pivot,
    omega_limit,
    orbit_points,
)
from semirec.semigroup import word_eval

from conftest import CIRCLE, make


def _points(search):
    return [r.point for r in search.records]


def test_fixed_points_of_single_words(square_half, square_cube):
    assert _points(fixed_points_of_word(square_half, (0,))) == pytest.approx([0.0, 1.0], abs=1e-9)
    roots = [(1 - math.sqrt(3)) / 2, (1 + math.sqrt(3)) / 2]
    assert _points(fixed_points_of_word(square_half, (1,))) == pytest.approx(roots, abs=1e-9)
    assert _points(fixed_points_of_word(square_cube, (1,))) == pytest.approx([-1.0, 0.0, 1.0], abs=1e-9)


def test_records_respect_tolerance(chebyshev):
    for rec in orbit_points(chebyshev, 3):
        assert rec.residual <= TOL_FIX
        assert abs(word_eval(chebyshev, rec.word, rec.point) - rec.point) <= TOL_FIX


def test_escaping_ranges_are_reported(square):
    s = fixed_points_of_word(square, (0, 0))
    assert s.skipped
    lo, hi = s.skipped[0]
    assert lo < -math.sqrt(2) + 1e-3 or hi > math.sqrt(2) - 1e-3


def test_orbit_points_examples(square_half, square_cube):
    recs = orbit_points(square_half, 1)
    one = [r for r in recs if abs(r.point - 1.0) < 1e-9]
    assert one and one[0].word == (0,)
    pts = [r.point for r in orbit_points(square_cube, 2)]
    for p in (-1.0, 0.0, 1.0):
        assert min(abs(q - p) for q in pts) < 1e-9
    minus_one = [r for r in orbit_points(square_cube, 2) if abs(r.point + 1) < 1e-9][0]
    assert minus_one.word == (1,)


def test_fix_set_examples(square_half, square_cube, square):
    assert fix_set(square_cube) == pytest.approx([0.0, 1.0], abs=1e-9)
    assert fix_set(square_half) == []
    assert fix_set(square) == pytest.approx([0.0, 1.0], abs=1e-9)


@pytest.mark.parametrize("name", ["square_cube", "chebyshev", "square_half"])
def test_fix_inside_orbit_points(name, request):
    sys = request.getfixturevalue(name)
    orb = [r.point for r in orbit_points(sys, 2)]
    for p in fix_set(sys):
        assert min(abs(q - p) for q in orb) < 1e-7


def test_omega_of_one_clusters_at_zero(square_half):
    om = omega_limit(square_half, 1.0, 0)
    assert min(abs(c.center) for c in om.clusters) <= 1e-4
    for c in om.clusters:
        assert set(c.counts) == {3, 5, 8}


def test_omega_of_common_fixed_point(square_cube):
    om = omega_limit(square_cube, 0.0, 1)
    assert [c.center for c in om.clusters] == [0.0]


def test_omega_of_irrational_rotation_fills_the_circle():
    gamma = (math.sqrt(5) - 1) / 2
    rot = make(CIRCLE, g=f"x + {gamma!r}")
    sched = range(100, 10_001, 10)
    om = omega_limit(rot, 0.0, 0, max_len=10_000, schedule=sched, min_hits=1)
    cells = {int(c.center // 0.05) for c in om.clusters}
    assert cells == set(range(20))
    # oracle: direct iteration
    direct = {int(((k * gamma) % 1.0) // 0.05) for k in sched}
    assert direct <= cells


def test_recurrence_examples(square_cube, square):
    v = is_recurrent(square_cube, -1.0, 1)
    assert v.yes
    counts = [s["count"] for s in v.witness]
    assert counts == sorted(set(counts)) and counts[0] >= 3
    for s in v.witness:
        w = square_cube.parse_word(s["word"])
        assert w.count(1) == s["count"]
        assert abs(word_eval(square_cube, w, -1.0) + 1.0) < 1e-4
    assert is_recurrent(square_cube, 0.0, 0).yes
    for L in (10, 20, 40):
        assert is_recurrent(square, 0.3, 0, max_len=L).inconclusive


def test_orbit_points_are_recurrent(chebyshev):
    for rec in orbit_points(chebyshev, 2):
        assert is_recurrent_any_pivot(chebyshev, rec.point).yes, rec


def test_abelian_invariance_of_orbit_points(chebyshev):
    for rec in orbit_points(chebyshev, 2):
        for i in range(chebyshev.k):
            gp = chebyshev.apply(i, rec.point)
            assert abs(word_eval(chebyshev, rec.word, gp) - gp) <= 10 * TOL_FIX


def test_decay_oracle_for_squares():
    xs = [0.3]
    for _ in range(8):
        xs.append(xs[-1] ** 2)
    assert all(b < a for a, b in zip(xs, xs[1:]))
    assert np.all(np.abs(np.array(xs[3:]) - 0.3) > 1e-4)
