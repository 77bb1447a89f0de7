"""Undirected graphs, traversals, and the standard topologies used by the simulator."""

from __future__ import annotations

import math
from collections import deque

INF = math.inf


class Graph:
    """Mutable undirected graph over integer node ids, backed by adjacency sets."""

    def __init__(self, nodes=(), edges=()):
        self.adj: dict[int, set[int]] = {}
        for v in nodes:
            self.add_node(v)
        for u, v in edges:
            self.add_edge(u, v)

    def add_node(self, v):
        if v not in self.adj:
            self.adj[v] = set()

    def add_edge(self, u, v):
        if u == v:
            raise ValueError(f"self-loop at {u}")
        self.add_node(u)
        self.add_node(v)
        self.adj[u].add(v)
        self.adj[v].add(u)

    def remove_edge(self, u, v):
        self.adj[u].discard(v)
        self.adj[v].discard(u)

    def remove_node(self, v):
        """Delete v and its incident edges; returns the set of former neighbors."""
        nbrs = self.adj.pop(v)
        for u in nbrs:
            self.adj[u].discard(v)
        return nbrs

    def __contains__(self, v):
        return v in self.adj

    def __len__(self):
        return len(self.adj)

    def nodes(self):
        return sorted(self.adj)

    def edges(self):
        """Edge list as sorted (u, v) pairs with u < v."""
        return sorted((u, v) if u < v else (v, u)
                      for u in self.adj for v in self.adj[u] if u < v)

    def neighbors(self, v):
        return self.adj[v]

    def degree(self, v):
        return len(self.adj[v])

    def has_edge(self, u, v):
        return u in self.adj and v in self.adj[u]

    def num_edges(self):
        return sum(len(s) for s in self.adj.values()) // 2

    def copy(self):
        g = Graph()
        g.adj = {v: set(s) for v, s in self.adj.items()}
        return g

    def to_obj(self):
        """JSON-ready snapshot: {"nodes": [...], "edges": [[u, v], ...]} sorted."""
        return {"nodes": self.nodes(), "edges": [list(e) for e in self.edges()]}

    @classmethod
    def from_obj(cls, obj):
        return cls(nodes=obj["nodes"], edges=obj["edges"])

    def __repr__(self):
        return f"Graph(n={len(self)}, m={self.num_edges()})"


def bfs_distances(g: Graph, source, restrict=None):
    """Hop distances from source; optionally restricted to a node subset."""
    dist = {source: 0}
    q = deque([source])
    while q:
        u = q.popleft()
        for w in g.adj[u]:
            if w not in dist and (restrict is None or w in restrict):
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


def eccentricity(g: Graph, source):
    d = bfs_distances(g, source)
    if len(d) < len(g):
        return INF
    return max(d.values(), default=0)


def diameter(g: Graph):
    """Max pairwise hop distance; INF when disconnected, 0 for empty/singleton."""
    if len(g) <= 1:
        return 0
    best = 0
    for v in g.adj:
        e = eccentricity(g, v)
        if e is INF:
            return INF
        best = max(best, e)
    return best


def connected_components(g: Graph):
    seen = set()
    comps = []
    for v in sorted(g.adj):
        if v in seen:
            continue
        comp = set(bfs_distances(g, v))
        seen |= comp
        comps.append(comp)
    return comps


def is_connected(g: Graph):
    if len(g) <= 1:
        return True
    v = next(iter(g.adj))
    return len(bfs_distances(g, v)) == len(g)


def all_pairs_distances(g: Graph):
    """BFS from every node: {u: {v: dist}} over reachable pairs."""
    return {v: bfs_distances(g, v) for v in g.adj}


# ---------------------------------------------------------------------------
# topology builders (node ids 0..n-1; insertions later take the next integer)

def complete_graph(n):
    g = Graph(nodes=range(n))
    for u in range(n):
        for v in range(u + 1, n):
            g.add_edge(u, v)
    return g


def path_graph(n):
    g = Graph(nodes=range(n))
    for v in range(1, n):
        g.add_edge(v - 1, v)
    return g


def star_graph(n):
    """Star on n nodes with hub 0."""
    g = Graph(nodes=range(n))
    for v in range(1, n):
        g.add_edge(0, v)
    return g


def complete_kary_tree(k, depth):
    """Complete k-ary tree with `depth` edge-levels below the root.

    Ids in breadth-first order: the root is 0 and the parent of i>0 is (i-1)//k.
    """
    if k < 1 or depth < 0:
        raise ValueError("need k >= 1 and depth >= 0")
    n = sum(k ** d for d in range(depth + 1))
    g = Graph(nodes=range(n))
    for v in range(1, n):
        g.add_edge(v, (v - 1) // k)
    return g


def pref_attach(n, m, rng):
    """Preferential-attachment graph: complete seed on m+1 nodes, then each new
    node attaches to m distinct existing nodes chosen proportionally to degree."""
    if not (n > m >= 1):
        raise ValueError("need n > m >= 1")
    g = complete_graph(m + 1)
    # each node id appears once per unit of degree
    stubs = [v for v in range(m + 1) for _ in range(m)]
    for v in range(m + 1, n):
        targets = set()
        while len(targets) < m:
            targets.add(rng.choice(stubs))
        for t in sorted(targets):
            g.add_edge(v, t)
            stubs.append(t)
        stubs.extend([v] * m)
    return g


def bfs_spanning_tree(g: Graph, root=None):
    """BFS tree of a connected graph, rooted at the lowest id by default."""
    if len(g) == 0:
        return Graph()
    if root is None:
        root = min(g.adj)
    tree = Graph(nodes=[root])
    seen = {root}
    q = deque([root])
    while q:
        u = q.popleft()
        for w in sorted(g.adj[u]):
            if w not in seen:
                seen.add(w)
                tree.add_edge(u, w)
                q.append(w)
    if len(tree) != len(g):
        raise ValueError("graph is not connected; spanning tree undefined")
    return tree
