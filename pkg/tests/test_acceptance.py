"""Acceptance criteria 1-8.

Each test prints one ``C<n> PASS|FAIL`` line (also collected into the
pytest summary).  Run alone with ``pytest tests/test_acceptance.py -s``.
"""

import functools
import json
import math
import time
from pathlib import Path

import mpmath
import numpy as np
import pytest

from semirec.certificate import InvariantSetCertificate
from semirec.chain import EpsilonChain, build_chain_graph, certify_no_chain, chain_exists, chain_recurrent_cells, classify
from semirec.config import load
from semirec.conjugacy import ConjugacyMap, check_conjugacy, compare_sets, dilate, transport_cells, transport_points
from semirec.expr import eval_interval, parse_map
from semirec.recurrence import fix_set, is_recurrent_any_pivot, omega_limit, orbit_points
from semirec.replay import replay_report
from semirec.report import run, strip_timing
from semirec.semigroup import WordClass, enumerate_words, orbit, word_eval
from semirec.space import Grid
from semirec.verdict import Status
from semirec.wandering import is_nonwandering, is_strongly_nonwandering, nonwandering_cells, replay_return, strongly_nonwandering_cells

from conftest import BOX2, CHEB, CIRCLE, UNIT
from test_chain import oracle_agreement

CONFIGS = Path(__file__).resolve().parent.parent / "scripts" / "configs"
TIME_LIMIT = 60.0
RESULTS: dict = {}


def criterion(n, title):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            t0 = time.perf_counter()
            detail, ok = "", False
            try:
                detail = fn(*args, **kwargs)
                ok = True
            except AssertionError as exc:
                detail = f"assertion failed: {exc}"
                raise
            finally:
                dt = time.perf_counter() - t0
                ok = ok and dt < TIME_LIMIT
                line = f"C{n} {'PASS' if ok else 'FAIL'} {title} ({dt:.1f}s) {detail or ''}".rstrip()
                RESULTS[n] = line
                print(line)
            assert dt < TIME_LIMIT, f"took {dt:.1f}s"

        return wrapper

    return deco


# ---------------------------------------------------------------- C1


@criterion(1, "x^2, x^2-1/2: orbit point 1, orbit of 1, omega at 0")
def test_c1_squares_half_example(square_half):
    sys = square_half
    ones = [r for r in orbit_points(sys, 1) if abs(r.point - 1.0) <= 1e-9]
    assert ones and ones[0].word == (sys.index("g1"),), "p = 1 with witness g1"
    o = orbit(sys, 1.0, 12)
    pts = [e.point for e in o.entries]
    for v in (1.0, 0.5, 0.25):
        assert min(abs(p - v) for p in pts) <= 1e-12, v
    assert min(abs(p) for p in pts) < 1e-3
    nonfixed = [p for p in pts if abs(p - 1.0) > 1e-12]
    assert min(abs(p) for p in nonfixed) > 0, "0 must not be an orbit point"
    om = omega_limit(sys, 1.0, sys.index("g1"))
    near = min(abs(c.center) for c in om.clusters)
    assert near <= 1e-4
    return f"|orbit|={len(pts)} min|p|={min(abs(p) for p in pts):.2e} omega cluster {near:.1e}"


# ---------------------------------------------------------------- C2


@criterion(2, "x^2, x^3: -1 orbit point, NW yes, SNW no")
def test_c2_square_cube_example(square_cube):
    sys = square_cube
    rec = [r for r in orbit_points(sys, 2) if abs(r.point + 1.0) <= 1e-9]
    assert rec and rec[0].word == (sys.index("g2"),) and rec[0].residual <= 1e-9
    nw = is_nonwandering(sys, -1.0, 0.1)
    assert nw.yes and len(nw.witness["word"]) >= 2 and replay_return(sys, nw.witness, -1.0)
    snw = is_strongly_nonwandering(sys, -1.0, 0.1)
    assert snw.no
    cert = InvariantSetCertificate.from_json(sys, snw.certificate)
    assert cert.sets[0][0].lo == 0.0 and math.isinf(cert.sets[0][0].hi)
    assert cert.validate(sys)
    return f"witness {nw.witness['composition']}, S={snw.certificate['S']}"


# ---------------------------------------------------------------- C3


@criterion(3, "no (0.9, g1)-chain from -1; no cycle through cell(-1); 1 -> 1")
def test_c3_no_chain_remark(square_cube):
    sys = square_cube
    v = certify_no_chain(sys, -1.0, (sys.index("g1"),), 0.9, [[0, "inf"]])
    assert v.yes and InvariantSetCertificate.from_json(sys, v.witness).validate(sys)
    grid = Grid.uniform(BOX2, 200)
    assert grid.delta == pytest.approx(0.02)
    gr = build_chain_graph(sys, grid, (sys.index("g1"),), 0.5, 3)
    c = grid.flat(grid.cell_of(-1.0))
    assert not classify(gr).on_cycle[c]
    one = chain_exists(gr, 1.0, 1.0)
    assert one.yes and one.witness["length"] == 1
    steps = one.witness["steps"]
    assert [s["word"] for s in steps] == ["id", None]
    assert EpsilonChain.from_json(sys, one.witness).validate(sys, 0.5)
    return f"margin {v.witness['facts']['margin']:.2f}, {gr.n_edges} edges"


# ---------------------------------------------------------------- C4

C4_SYSTEMS = {
    # fixture, grid, cells, CR schedule, orbit-point word budget
    "square_cube": (BOX2, 400, (0.2, 0.1), 3),
    "chebyshev": (CHEB, 200, (0.1, 0.05), 2),
    "rotations": (CIRCLE, 100, (0.05,), 3),
    "square_half": (BOX2, 200, (0.2, 0.1), 3),
}


def _containment_violations(sys, space, cells, schedule, L):
    bad = []
    orb = orbit_points(sys, L)
    pts = [r.point for r in orb]
    for p in fix_set(sys):
        if not any(sys.space.dist(p, q) <= 1e-7 for q in pts):
            bad.append(("fix not orbit point", p))
    for r in orb:
        v = is_recurrent_any_pivot(sys, r.point)
        if not v.yes:
            bad.append(("orbit point not recurrent", r.point))
    grid = Grid.uniform(space, cells)
    lead_len = 2
    sw = chain_recurrent_cells(sys, grid, lead_len, schedule, 3)
    cr = sw.cells()
    snw = strongly_nonwandering_cells(sys, grid)
    nw = nonwandering_cells(sys, grid, 3)
    snw_yes = snw.cells(Status.YES)
    for u in snw_yes - cr:
        bad.append(("SNW yes outside CR", u))
    for u in snw_yes & nw.cells(Status.NO):
        bad.append(("SNW yes but NW no", u))
    # the SNW witness p is a common fixed point, so (p, p, p) with identity
    # helpers is an (eps, g)-chain for every lead and every eps
    for u in snw_yes:
        p = snw.verdicts[u].witness["fixed_point"]
        for g in enumerate_words(sys, WordClass.FULL, lead_len):
            for eps in schedule:
                if not EpsilonChain([p, p, p], [(), ()], g, eps).validate(sys, eps):
                    bad.append(("fixed point chain", u, g))
    return bad, (len(orb), len(snw_yes), len(cr))


@criterion(4, "containment suites on 4 systems")
def test_c4_containment(request):
    total = []
    sizes = {}
    for name, (space, cells, schedule, L) in C4_SYSTEMS.items():
        bad, sz = _containment_violations(request.getfixturevalue(name), space, cells, schedule, L)
        total += [(name,) + b for b in bad]
        sizes[name] = sz
    assert not total, total[:5]
    return "0 violations; (orbit points, SNW yes, CR) " + " ".join(f"{k}={v}" for k, v in sizes.items())


# ---------------------------------------------------------------- C5


@criterion(5, "abelian invariance on Chebyshev T2, T3")
def test_c5_abelian_invariance(chebyshev):
    sys = chebyshev
    orb = orbit_points(sys, 2)
    pts = [r.point for r in orb]
    bad = []
    for r in orb:
        for i in range(sys.k):
            gp = sys.apply(i, r.point)
            res = abs(word_eval(sys, r.word, gp) - gp)
            if res > 1e-8:
                bad.append(("residual", r.point, i, res))
            if not any(abs(gp - q) <= 1e-8 for q in pts):
                bad.append(("not detected", r.point, i, gp))
    grid = Grid.uniform(CHEB, 200)
    cr = chain_recurrent_cells(sys, grid, 2, (0.1, 0.05), 3).cells()
    near = dilate(cr, grid, 1)
    for i in range(sys.k):
        img = transport_cells(_generator_as_map(sys, i), cr, grid, grid, "center").cells
        if not img <= near:
            bad.append(("CR image", i, sorted(img - near)[:5]))
    assert not bad, bad[:5]
    return f"{len(orb)} orbit points x {sys.k} generators, {len(cr)} CR cells, 0 violations"


def _generator_as_map(sys, i):
    g = sys.generators[i].components
    return ConjugacyMap(sys, sys, g, g)


# ---------------------------------------------------------------- C6


@criterion(6, "graph BFS vs exhaustive enumeration, 500 queries")
def test_c6_oracle_equivalence():
    agree = oracle_agreement(500, 2026)
    assert agree == 500, f"{agree}/500"
    return f"{agree}/500 agree"


# ---------------------------------------------------------------- C7


@criterion(7, "tent <-> logistic conjugacy and transport")
def test_c7_conjugacy_transport(tent, logistic):
    c = ConjugacyMap.from_strings(tent, logistic, "sin(pi*x/2)^2", "2/pi*asin(sqrt(x))")
    v = check_conjugacy(c, n_uniform=1000, n_boundary=100)
    assert not v.no
    res = v.witness["max_residual"]
    assert res < 1e-9, res
    gs = gt = Grid.uniform(UNIT, 100)
    a = transport_points(c, [r.point for r in orbit_points(tent, 4)], gt).cells
    b = {gt.flat(gt.cell_of(r.point)) for r in orbit_points(logistic, 4)}
    m_op = compare_sets(a, b, gt, 1)
    nw_a = transport_cells(c, nonwandering_cells(tent, gs, 6).cells(Status.YES), gs, gt).cells
    m_nw = compare_sets(nw_a, nonwandering_cells(logistic, gt, 6).cells(Status.YES), gt, 1)
    cr_a = transport_cells(c, chain_recurrent_cells(tent, gs, 2, (0.1, 0.05), 3).cells(), gs, gt).cells
    m_cr = compare_sets(cr_a, chain_recurrent_cells(logistic, gt, 2, (0.1, 0.05), 3).cells(), gt, 1)
    assert m_op.match and m_nw.match and m_cr.match, (m_op, m_nw, m_cr)
    return f"residual {res:.1e}; orbit points {m_op.size_a}/{m_op.size_b}, NW {m_nw.size_a}/{m_nw.size_b}, CR {m_cr.size_a}/{m_cr.size_b} cells"


# ---------------------------------------------------------------- C8

ENCLOSURE_MAPS = [
    ("x^2", (-2, 2)),
    ("x^3", (-2, 2)),
    ("x^2 - 1/2", (-2, 2)),
    ("2*x^2 - 1", (-1, 1)),
    ("4*x^3 - 3*x", (-1, 1)),
    ("1 - abs(2*x - 1)", (0, 1)),
    ("4*x*(1 - x)", (0, 1)),
    ("sin(pi*x/2)^2", (0, 1)),
    ("2/pi*asin(sqrt(x))", (0, 1)),
    ("cos(3*x)*sin(x) + x/(x^2 + 1)", (-3, 3)),
    ("acos(x/3) - sqrt(abs(x))^3", (-3, 3)),
]


def _mp_map(text):
    ns = {n: getattr(mpmath, n) for n in ("sin", "cos", "sqrt", "asin", "acos", "pi")}
    ns["abs"] = mpmath.fabs
    code = compile(text.replace("^", "**"), text, "eval")
    return lambda x: eval(code, dict(ns, x=x))


def _enclosure_failures(n, seed):
    """Containment of the exact image value, computed at 200 bits with mpmath.

    A float reference is not good enough: x*x*x carries two roundings and
    can sit one ulp outside a correct enclosure of the true cube.
    """
    rng = np.random.default_rng(seed)
    maps = [(parse_map(s, 1), _mp_map(s), lo, hi) for s, (lo, hi) in ENCLOSURE_MAPS]
    bad = 0
    with mpmath.workprec(200):
        for k in range(n):
            f, exact, lo, hi = maps[k % len(maps)]
            a, b = np.sort(rng.uniform(lo, hi, 2))
            if rng.random() < 0.2:
                b = a  # degenerate boxes
            iv = eval_interval(f, ((float(a), float(b)),))[0]
            for x in np.concatenate([[a, b], rng.uniform(a, b, 8)]):
                y = exact(mpmath.mpf(float(x)))
                bad += not (mpmath.mpf(iv.lo) <= y <= mpmath.mpf(iv.hi))
    return bad


def _sweep_replays(sys, grid):
    bad, n = 0, 0
    nw = nonwandering_cells(sys, grid, 3)
    for u, v in enumerate(nw.verdicts):
        if v.yes:
            n += 1
            bad += not replay_return(sys, v.witness, grid.center_of(u), "box")
        elif v.no:
            n += 1
            bad += not InvariantSetCertificate.from_json(sys, v.certificate).validate(sys)
    snw = strongly_nonwandering_cells(sys, grid)
    for u, v in enumerate(snw.verdicts):
        if v.no:
            n += 1
            bad += not InvariantSetCertificate.from_json(sys, v.certificate).validate(sys)
        elif v.yes:
            n += 1
            p = v.witness["fixed_point"]
            bad += not (grid.flat(grid.cell_of(p)) == u and all(abs(sys.apply(i, p) - p) <= 1e-9 for i in range(sys.k)))
    return n, bad


@criterion(8, "enclosures, witness/certificate replay, determinism")
def test_c8_soundness(square_cube, chebyshev):
    enc_bad = _enclosure_failures(10_000, 8)
    assert enc_bad == 0, f"{enc_bad} enclosure failures"
    checked, failures = 0, []
    for name in ("square_cube", "squares_half", "chebyshev", "rotations", "tent_logistic", "soundness"):
        cfg = load(CONFIGS / f"{name}.json")
        report = json.loads(json.dumps(run(cfg)))
        log = replay_report(cfg, report)
        checked += log.checked
        failures += [f"{name}:{w}" for w in log.failures]
    n1, b1 = _sweep_replays(square_cube, Grid.uniform(BOX2, 80))
    n2, b2 = _sweep_replays(chebyshev, Grid.uniform(CHEB, 80))
    assert not failures and b1 + b2 == 0, (failures[:5], b1, b2)
    cfg = load(CONFIGS / "soundness.json")
    r1, r2 = strip_timing(run(cfg)), strip_timing(run(cfg))
    assert json.dumps(r1, sort_keys=True) == json.dumps(r2, sort_keys=True), "reports differ"
    return f"10000 enclosures ok; {checked + n1 + n2} witnesses/certificates replayed; reports identical modulo timing"


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
