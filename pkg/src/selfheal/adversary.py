"""Attack policies: who the adversary deletes (or inserts) each round.

Simple policies (max-degree, neighbor-of-max, uniform, scripted) are stateless
picks over the live graph. The lower-bound constructions (level_attack and the
log-log strategy built from Strategy-1 / DegreeUp with the Prune and Graft
macros) are stateful schedules that watch the healer's visible degree increase
and force it upward. The adversary is omniscient: it reads the live graph and
the healer's bookkeeping, but never the healer's future coin flips.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field

from .graphs import Graph, bfs_distances, complete_kary_tree


class WrongTopology(ValueError):
    """The attack's precondition on the starting graph does not hold."""


@dataclass(frozen=True)
class Event:
    action: str                      # "delete" | "insert"
    node: int
    neighbors: tuple = field(default_factory=tuple)   # insert only

    def to_obj(self):
        obj = {"action": self.action, "node": self.node}
        if self.action == "insert":
            obj["neighbors"] = list(self.neighbors)
        return obj

    @classmethod
    def from_obj(cls, obj):
        return cls(obj["action"], obj["node"], tuple(obj.get("neighbors", ())))


class Attack:
    """Base policy. Subclasses either override `pick` (memoryless policies) or
    `schedule` (generator yielding Events while reading live state)."""

    name = "base"

    def start(self, g: Graph, healer, rng):
        self.g = g
        self.healer = healer
        self.rng = rng
        self._gen = self.schedule()
        return self

    def next_event(self):
        if self._gen is not None:
            return next(self._gen, None)
        if len(self.g) == 0:
            return None
        return self.pick()

    def schedule(self):
        return None          # default: memoryless `pick`

    def pick(self):
        raise NotImplementedError

    def observe(self, event, report):
        """Called by the harness after each round with the heal's outcome."""

    # -- shared helpers ------------------------------------------------------

    def _delta(self, v):
        return self.healer.degree_increase(v)

    def _max_degree_node(self):
        return min(self.g.nodes(), key=lambda v: (-self.g.degree(v), v))

    def _component(self, start, banned):
        """Nodes reachable from `start` without stepping on `banned`."""
        return set(bfs_distances(self.g, start, restrict=set(self.g.adj) - {banned}))

    def _prune(self, banned, c):
        """Delete the whole piece hanging at c (relative to banned), leaves first."""
        while c in self.g:
            comp = self._component(c, banned)
            leaves = [u for u in comp if self.g.degree(u) <= 1]
            # healing can close cycles, leaving no leaf; fall back to min degree
            leaf = min(leaves) if leaves else min(comp, key=lambda u: (self.g.degree(u), u))
            yield Event("delete", leaf)

    def _graft(self, r, s):
        """Make r and s adjacent without changing either one's degree increase:
        walk the r-s path, prune every side branch of the next intermediate
        node, then delete it so the healer splices the path ends together."""
        while not self.g.has_edge(r, s):
            path = self._shortest_path(r, s)
            x = path[1]
            if x == s:
                break
            for u in sorted(self.g.neighbors(x)):
                if u not in self.g:
                    continue             # swallowed by an earlier branch prune
                comp = self._component(u, x)
                if r in comp or s in comp:
                    continue
                yield from self._prune(x, u)
            yield Event("delete", x)

    def _shortest_path(self, a, b):
        prev = {a: None}
        q = deque([a])
        while q:
            u = q.popleft()
            if u == b:
                break
            for w in sorted(self.g.neighbors(u)):
                if w not in prev:
                    prev[w] = u
                    q.append(w)
        path = [b]
        while path[-1] != a:
            path.append(prev[path[-1]])
        return path[::-1]


class MaxNode(Attack):
    """Delete the highest-degree node (ties: lowest id)."""

    name = "max"

    def pick(self):
        return Event("delete", self._max_degree_node())


class NeighborOfMax(Attack):
    """Delete a uniformly random neighbor of the highest-degree node; if the
    graph has no edges left, take the isolated max node itself."""

    name = "nmax"

    def pick(self):
        hub = self._max_degree_node()
        nbrs = sorted(self.g.neighbors(hub))
        if not nbrs:
            return Event("delete", hub)
        return Event("delete", self.rng.choice(nbrs))


class UniformRandom(Attack):
    """Delete a uniformly random alive node."""

    name = "random"

    def pick(self):
        return Event("delete", self.rng.choice(self.g.nodes()))


class Scripted(Attack):
    """Replay a fixed event list (e.g. a recorded trace)."""

    name = "script"

    def __init__(self, events):
        self.events = [e if isinstance(e, Event) else Event.from_obj(e) for e in events]

    @classmethod
    def from_json_file(cls, path):
        with open(path) as fh:
            obj = json.load(fh)
        return cls(obj["events"] if isinstance(obj, dict) else obj)

    def schedule(self):
        for e in self.events:
            if e.action == "delete" and e.node not in self.g:
                raise ValueError(f"scripted delete of absent node {e.node}")
            if e.action == "insert" and e.node in self.g:
                raise ValueError(f"scripted insert of existing node {e.node}")
            yield e


class LevelAttack(Attack):
    """Level-by-level sweep of a complete (M+2)-ary tree, bottom level of
    internal nodes first. Before deleting a node, prune its surplus children
    (the healer keeps reattaching ex-descendants) down to M+2, dropping those
    with the least degree increase so the loaded ones stay to absorb more."""

    name = "level"

    def __init__(self, m=2):
        self.m = m

    def start(self, g, healer, rng):
        k = self.m + 2
        n = len(g)
        depth, total = 0, 1
        while total < n:
            depth += 1
            total += k ** depth
        if total != n or g.edges() != complete_kary_tree(k, depth).edges():
            raise WrongTopology(f"level attack needs a complete {k}-ary tree")
        self.k, self.depth = k, depth
        return super().start(g, healer, rng)

    def schedule(self):
        k = self.k
        for lvl in range(self.depth - 1, -1, -1):
            lo = (k ** lvl - 1) // (k - 1)
            for v in range(lo, lo + k ** lvl):
                if v not in self.g:
                    continue
                parent = {(v - 1) // k} if v else set()
                children = sorted(set(self.g.neighbors(v)) - parent)
                excess = len(children) - (self.m + 2)
                if excess > 0:
                    victims = sorted(children, key=lambda c: (self._delta(c), c))[:excess]
                    for c in victims:
                        yield from self._prune(v, c)
                yield Event("delete", v)


class Strategy1(Attack):
    """Force a degree increase of 2 out of a 3-level ternary tree: delete the
    middle level, then the root's fresh neighbors, then the root."""

    name = "strategy1"

    def start(self, g, healer, rng):
        if g.edges() != complete_kary_tree(3, 2).edges():
            raise WrongTopology("strategy-1 needs a complete ternary tree of depth 2")
        return super().start(g, healer, rng)

    def schedule(self):
        children = {v: [3 * v + 1, 3 * v + 2, 3 * v + 3] for v in self.g.nodes()}
        yield from strategy1_rounds(self, 0, children)


def strategy1_rounds(attack, root, children_of, allowed=None):
    """The three-phase schedule, reusable on any virgin 3-level ternary top.
    Stops as soon as any node in scope reaches a degree increase of 2; returns
    the highest-increase ex-neighbor of the last deletion (confined to
    `allowed` when given, so a nested run can't hand back an outside node)."""
    g, delta = attack.g, attack._delta
    scope = {root} | {c for c in children_of[root]} \
        | {gc for c in children_of[root] for gc in children_of.get(c, [])}

    def winner(cands):
        alive = [u for u in cands if u in g and (allowed is None or u in allowed)]
        return max(alive, key=lambda u: (delta(u), -u)) if alive else None

    def done():
        return any(v in g and delta(v) >= 2 for v in scope)

    for c in sorted(children_of[root]):           # phase 1: drop the middle level
        if done():
            return winner(scope)
        yield Event("delete", c)
    while not done():                             # phase 2: drop fresh neighbors
        fresh = sorted(u for u in g.neighbors(root) if delta(u) == 0)
        if not fresh:
            break
        yield Event("delete", fresh[0])
    if done():
        return winner(scope)
    nbrs = sorted(g.neighbors(root))              # phase 3: drop the root itself
    yield Event("delete", root)
    return winner(nbrs)


class LogLogAttack(Attack):
    """Recursive lower-bound schedule on a complete ternary tree with 3·2^a
    levels: bootstrap a degree increase of 2 with Strategy-1, then repeatedly
    raise three virgin subtrees to the current level, graft them onto the
    target, strip everything else, and delete the target."""

    name = "loglog"

    def start(self, g, healer, rng):
        n = len(g)
        levels, total = 0, 0
        while total < n:
            total += 3 ** levels
            levels += 1
        ok = total == n and g.edges() == complete_kary_tree(3, levels - 1).edges()
        a = levels / 3
        while a > 1:
            a /= 2
        if not ok or a != 1:
            raise WrongTopology("loglog attack needs a complete ternary tree with 3·2^a levels")
        self.levels = levels
        self.touched = set()
        return super().start(g, healer, rng)

    # -- virginity bookkeeping: a subtree qualifies only if none of its original
    # nodes was ever deleted, rewired, or relabelled

    def observe(self, event, report):
        self.touched.add(event.node)
        for a, b in report.wire_edges:
            self.touched.add(a)
            self.touched.add(b)
        self.touched.update(report.id_changed)

    def _subtree_nodes(self, root):
        out, q = [root], deque([root])
        while q:
            v = q.popleft()
            for c in (3 * v + 1, 3 * v + 2, 3 * v + 3):
                if c < self.total_nodes:
                    out.append(c)
                    q.append(c)
        return out

    def _is_virgin(self, root):
        return all(v in self.g and v not in self.touched for v in self._subtree_nodes(root))

    def _node_level(self, v):
        lvl = 0
        while v:
            v = (v - 1) // 3
            lvl += 1
        return lvl

    def schedule(self):
        self.total_nodes = len(self.g)
        n0 = len(self.g)
        target = math.log2(math.log(n0, 3))
        children = {}
        for v in range(self.total_nodes):
            kids = [c for c in (3 * v + 1, 3 * v + 2, 3 * v + 3) if c < self.total_nodes]
            children[v] = kids
        self.children = children
        v = yield from self._strategy1_at(0)
        while v is not None and v in self.g and self._delta(v) < target:
            nxt = yield from self._degree_up(v)
            if nxt is None:
                break
            v = nxt

    def _strategy1_at(self, root):
        inside = set(self._subtree_nodes(root))
        return (yield from strategy1_rounds(self, root, self.children, allowed=inside))

    def _degree_up(self, v):
        """Raise some node next to v to degree increase δ(v)+1, consuming three
        virgin subtrees of v. Returns None when the tree has run out."""
        i = self._delta(v)
        virgin = [c for c in sorted(self.children.get(v, [])) if self._is_virgin(c)]
        if len(virgin) < 3:
            return None
        grafted = []
        for c in virgin[:3]:
            w = yield from self._raise_in(c, i)
            if w is None:
                return None
            yield from self._graft(v, w)
            grafted.append(w)
        # strip every other branch so the deletion sees exactly the three
        for u in sorted(self.g.neighbors(v)):
            if u in grafted or u not in self.g:
                continue
            comp = self._component(u, v)
            if any(w in comp for w in grafted):
                continue
            yield from self._prune(v, u)
        nbrs = sorted(self.g.neighbors(v))
        yield Event("delete", v)
        alive = [u for u in nbrs if u in self.g]
        return max(alive, key=lambda u: (self._delta(u), -u)) if alive else None

    def _raise_in(self, root, target_i):
        """Produce a node of degree increase target_i inside the virgin subtree
        at `root` (Strategy-1 bootstraps 2, each recursion adds 1)."""
        if self._node_level(root) + 3 > self.levels:
            return None                      # not enough levels below
        w = yield from self._strategy1_at(root)
        while w is not None and w in self.g and self._delta(w) < target_i:
            w = yield from self._degree_up(w)
        return w


class StarAttack(Attack):
    """Delete the hub of a star; the interesting part is the theorem bound the
    harness checks afterwards (a healer that caps degree growth at alpha must
    pay a matching stretch)."""

    name = "star"

    def __init__(self, alpha=3):
        self.alpha = alpha

    def start(self, g, healer, rng):
        hubs = [v for v in g.nodes() if g.degree(v) == len(g) - 1]
        leaves_ok = all(g.degree(v) == 1 for v in g.nodes() if v not in hubs[:1])
        if len(g) < 3 or not hubs or not leaves_ok:
            raise WrongTopology("star attack needs a star graph")
        self.hub = hubs[0]
        return super().start(g, healer, rng)

    def schedule(self):
        yield Event("delete", self.hub)


def star_stretch_floor_tree(max_degree, alpha):
    """Minimum stretch any healer must concede on a star of max degree Δ when
    it caps per-node degree growth at alpha (spanning-tree healing form)."""
    return 0.5 * (math.log(max_degree, alpha + 1) - 1)


def star_stretch_floor_graph(n, alpha):
    """Same floor in the n-node general-graph form."""
    return 0.5 * (math.log(n - 1, alpha) - 1)


ATTACKS = {
    "max": MaxNode,
    "nmax": NeighborOfMax,
    "random": UniformRandom,
    "level": LevelAttack,
    "loglog": LogLogAttack,
    "star": StarAttack,
}
