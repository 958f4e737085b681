"""Print the worked examples: x^2 with x^2 - 1/2, x^2 with x^3, and the no-chain remark."""

from semirec.chain import build_chain_graph, certify_no_chain, chain_exists, classify
from semirec.recurrence import omega_limit, orbit_points
from semirec.semigroup import GeneratorSystem, orbit
from semirec.space import Grid, PhaseSpace
from semirec.wandering import is_nonwandering, is_strongly_nonwandering

BOX = PhaseSpace.box((-2, 2))


def squares_half():
    sys = GeneratorSystem.from_strings(BOX, {"g1": "x^2", "g2": "x^2 - 1/2"})
    print("== x^2, x^2 - 1/2 on [-2, 2]")
    for r in orbit_points(sys, 1):
        print(f"  orbit point {r.point:+.12f} fixed by {sys.format_word(r.word)} (residual {r.residual:.1e})")
    o = orbit(sys, 1.0, 12)
    pts = [e.point for e in o.entries]
    print(f"  orbit of 1 up to length 12: {len(pts)} points, min |p| = {min(abs(p) for p in pts):.3e}, 0 in orbit: {0.0 in pts}")
    om = omega_limit(sys, 1.0, sys.index("g1"))
    c = min(om.clusters, key=lambda c: abs(c.center))
    print(f"  omega-limit (pivot g1): {len(om.clusters)} clusters, closest to 0 at {c.center:.2e} via {sys.format_word(c.witness)}")


def square_cube():
    sys = GeneratorSystem.from_strings(BOX, {"g1": "x^2", "g2": "x^3"})
    print("== x^2, x^3 on [-2, 2]")
    r = [r for r in orbit_points(sys, 2) if abs(r.point + 1) < 1e-9][0]
    print(f"  -1 is an orbit point, witness {sys.format_word(r.word)}")
    nw = is_nonwandering(sys, -1.0, 0.1)
    print(f"  nonwandering(-1, r=0.1): {nw.status.value} via {nw.witness['composition']} at u={nw.witness['point']:.4f}")
    snw = is_strongly_nonwandering(sys, -1.0, 0.1)
    print(f"  strongly nonwandering(-1): {snw.status.value}; S = {snw.certificate['S']}, lead {snw.certificate['lead_words']}")
    v = certify_no_chain(sys, -1.0, (0,), 0.9, [[0, "inf"]])
    print(f"  no (0.9, g1)-chain from -1: {v.status.value}, margin {v.witness['facts']['margin']:.2f}")
    grid = Grid.uniform(BOX, 200)
    gr = build_chain_graph(sys, grid, (0,), 0.5, 3)
    on_cycle = classify(gr).on_cycle[grid.flat(grid.cell_of(-1.0))]
    print(f"  (0.5, g1) chain graph, 200 cells: cell(-1) on a cycle: {on_cycle}")
    one = chain_exists(gr, 1.0, 1.0)
    print(f"  chain 1 -> 1: {one.status.value}, helpers {[s['word'] for s in one.witness['steps'][:-1]]}")


if __name__ == "__main__":
    squares_half()
    square_cube()
