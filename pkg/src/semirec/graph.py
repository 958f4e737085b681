"""Small directed-graph routines on adjacency lists over nodes 0..n-1."""

from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence


def strongly_connected_components(n: int, succ: Sequence[Iterable[int]]) -> list:
    """Tarjan's algorithm without recursion.

    Returns a component id per node.  Ids are assigned in the order the
    components are completed, which is a reverse topological order of the
    condensation: every edge goes from a higher or equal id to a lower or
    equal one.  Successors outside 0..n-1 are ignored.
    """
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    comp = [-1] * n
    stack: list = []
    counter = 0
    n_comp = 0
    adj = [[v for v in s if 0 <= v < n] for s in succ]
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            u, i = work[-1]
            if i < len(adj[u]):
                work[-1] = (u, i + 1)
                v = adj[u][i]
                if index[v] == -1:
                    index[v] = low[v] = counter
                    counter += 1
                    stack.append(v)
                    on_stack[v] = True
                    work.append((v, 0))
                elif on_stack[v]:
                    low[u] = min(low[u], index[v])
                continue
            work.pop()
            if work:
                p = work[-1][0]
                low[p] = min(low[p], low[u])
            if low[u] == index[u]:
                while True:
                    v = stack.pop()
                    on_stack[v] = False
                    comp[v] = n_comp
                    if v == u:
                        break
                n_comp += 1
    return comp


def cycle_flags(n: int, succ: Sequence[Iterable[int]], comp: Sequence[int]) -> list:
    """Whether each node lies on a directed cycle (self-loops count)."""
    size = [0] * (max(comp, default=-1) + 1)
    for c in comp:
        size[c] += 1
    flags = [size[comp[u]] > 1 for u in range(n)]
    for u in range(n):
        if not flags[u] and u in succ[u]:
            flags[u] = True
    return flags


def reachable_counts(n: int, succ: Sequence[Iterable[int]], comp: Sequence[int], sink: int | None = None) -> tuple:
    """Per node: number of nodes reachable by a path of >= 1 edge, and whether ``sink`` is reachable.

    Works on the condensation with Python integers as bitsets.
    """
    n_comp = max(comp, default=-1) + 1
    members = [0] * n_comp
    for u in range(n):
        members[comp[u]] |= 1 << u
    comp_succ: list = [set() for _ in range(n_comp)]
    hits_sink = [False] * n_comp
    for u in range(n):
        for v in succ[u]:
            if 0 <= v < n:
                comp_succ[comp[u]].add(comp[v])
            elif v == sink:
                hits_sink[comp[u]] = True
    # reach[c]: nodes reachable from any node of c in >= 1 step
    reach = [0] * n_comp
    sink_reach = [False] * n_comp
    for c in range(n_comp):  # successors always have smaller ids
        bits = 0
        s = hits_sink[c]
        for d in comp_succ[c]:
            if d == c:
                bits |= members[c]
            else:
                bits |= members[d] | reach[d]
                s = s or sink_reach[d]
        if bin(members[c]).count("1") > 1:
            bits |= members[c]
        reach[c] = bits
        sink_reach[c] = s
    counts = [bin(reach[comp[u]]).count("1") for u in range(n)]
    return counts, [sink_reach[comp[u]] for u in range(n)]


def bfs_path(succ: Sequence[Iterable[int]], sources: Iterable[int], is_target, max_depth: int | None = None):
    """Shortest path (as a node list) from any source to a node accepted by ``is_target``.

    Sources count as depth 1.  Returns None when no target is reached
    within ``max_depth`` nodes.
    """
    parent: dict = {}
    queue: deque = deque()
    for s in sources:
        if s not in parent:
            parent[s] = None
            queue.append((s, 1))
    while queue:
        u, d = queue.popleft()
        if is_target(u):
            path = [u]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return path[::-1]
        if max_depth is not None and d >= max_depth:
            continue
        for v in succ[u]:
            if v >= 0 and v not in parent:
                parent[v] = u
                queue.append((v, d + 1))
    return None
