import networkx as nx
from hypothesis import given, strategies as st

from semirec.graph import bfs_path, cycle_flags, reachable_counts, strongly_connected_components


@st.composite
def digraphs(draw):
    n = draw(st.integers(1, 25))
    edges = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(-1, n - 1)), max_size=3 * n))
    succ = [[] for _ in range(n)]
    for u, v in edges:
        if v not in succ[u]:
            succ[u].append(v)
    return n, succ


def _nx(n, succ):
    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    g.add_edges_from((u, v) for u in range(n) for v in succ[u] if v >= 0)
    return g


@given(digraphs())
def test_scc_matches_networkx(graph):
    n, succ = graph
    comp = strongly_connected_components(n, succ)
    expected = {frozenset(c) for c in nx.strongly_connected_components(_nx(n, succ))}
    got = {}
    for u, c in enumerate(comp):
        got.setdefault(c, set()).add(u)
    assert {frozenset(s) for s in got.values()} == expected


@given(digraphs())
def test_component_ids_are_reverse_topological(graph):
    n, succ = graph
    comp = strongly_connected_components(n, succ)
    for u in range(n):
        for v in succ[u]:
            if v >= 0:
                assert comp[v] <= comp[u]


@given(digraphs())
def test_cycle_flags_and_reach(graph):
    n, succ = graph
    g = _nx(n, succ)
    comp = strongly_connected_components(n, succ)
    flags = cycle_flags(n, succ, comp)
    counts, sink = reachable_counts(n, succ, comp, sink=-1)
    for u in range(n):
        on_cycle = any(u in c and (len(c) > 1 or g.has_edge(u, u)) for c in nx.strongly_connected_components(g))
        assert flags[u] == on_cycle
        reach = set()
        for v in g.successors(u):
            reach |= {v} | nx.descendants(g, v)
        assert counts[u] == len(reach)
        hits = any(-1 in succ[w] for w in reach | {u})
        assert sink[u] == hits


@given(digraphs(), st.data())
def test_bfs_finds_shortest_paths(graph, data):
    n, succ = graph
    s = data.draw(st.integers(0, n - 1))
    t = data.draw(st.integers(0, n - 1))
    path = bfs_path(succ, [s], lambda u: u == t)
    g = _nx(n, succ)
    if nx.has_path(g, s, t):
        assert path is not None and path[0] == s and path[-1] == t
        assert len(path) - 1 == nx.shortest_path_length(g, s, t)
        assert all(g.has_edge(a, b) for a, b in zip(path, path[1:]))
    else:
        assert path is None
