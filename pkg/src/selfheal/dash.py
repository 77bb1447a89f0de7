"""Degree-aware self-healing and its naive baselines.

All healers here share one bookkeeping scheme. Every node carries a permanent
id, a component label (the smallest id its healing-forest component has seen so
far), and a weight that feeds the potential-function analysis. When the
adversary deletes a node, the healer picks a set of survivors to reconnect and
wires them into some shape; the component labels then merge by broadcasting the
smallest label through the union. The healers differ only in which survivors
they pick and in the wiring shape:

* dash      -- one representative per foreign component plus the healing-forest
               neighbors, wired as a complete binary tree ordered by degree
               increase so that the most-burdened nodes become leaves.
* sdash     -- like dash but, when some member can absorb every edge without
               exceeding the current worst degree increase, stars onto it
               (replacing the deleted node outright keeps paths short).
* binheal   -- dash's reconnection set wired by permanent id, ignoring load.
* line      -- dash's reconnection set wired into a path by permanent id.
* graphheal -- every surviving neighbor wired by permanent id; no component
               filtering, so its healing graph may contain cycles.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field

from .graphs import Graph


@dataclass
class RoundReport:
    """What one heal did: new edges, relabelled nodes, message accounting."""

    wire_edges: list = field(default_factory=list)
    id_changed: list = field(default_factory=list)
    unwire_edges: list = field(default_factory=list)
    messages_total: int = 0
    messages_by_node: Counter = field(default_factory=Counter)
    latency: int = 0
    fields_changed: int = 0

    @property
    def messages_max_node(self):
        return max(self.messages_by_node.values(), default=0)


class Healer:
    """Base class: id/weight/reference bookkeeping shared by every strategy."""

    name = "base"

    def __init__(self, random_real_ids=False, rng=None):
        if random_real_ids and rng is None:
            raise ValueError("random_real_ids needs an rng")
        self.random_real_ids = random_real_ids
        self.rng = rng
        self.g = None
        self.heal = Graph()     # edges added by healing; subset of g's edges
        self.orig_id = {}       # permanent id value per node
        self.comp_id = {}       # current component label
        self.weight = {}
        self.ref_degree = {}    # degree in the insertions-only reference graph
        self.id_changes = Counter()

    def _fresh_id(self, v):
        return self.rng.random() if self.random_real_ids else v

    def attach(self, g: Graph):
        self.g = g
        self.heal = Graph(nodes=g.nodes())
        for v in g.nodes():
            self.orig_id[v] = self._fresh_id(v)
            self.comp_id[v] = self.orig_id[v]
            self.weight[v] = 1
            self.ref_degree[v] = g.degree(v)
        return self

    def degree_increase(self, v):
        """Degree in the live graph minus degree in the reference graph.

        The reference keeps edges to dead endpoints, so this can be negative
        for a node that lost neighbors without being rewired."""
        return self.g.degree(v) - self.ref_degree[v]

    def note_insertion(self, v, nbrs):
        """Bookkeeping for a node the adversary inserted (already in the graph)."""
        self.orig_id[v] = self._fresh_id(v)
        self.comp_id[v] = self.orig_id[v]
        self.weight[v] = 1
        self.ref_degree[v] = len(nbrs)
        for u in nbrs:
            self.ref_degree[u] += 1
        self.heal.add_node(v)
        return RoundReport()

    # -- deletion handling ---------------------------------------------------

    def heal_deletion(self, v, survivors):
        """React to the deletion of v; survivors are its former neighbors
        (already detached from the live graph)."""
        vid = self.comp_id.pop(v)
        self.orig_id.pop(v)
        w_v = self.weight.pop(v)
        heal_nbrs = set(self.heal.remove_node(v))

        chosen = self._reconnect_set(survivors, vid, heal_nbrs)

        # the deleted node's weight moves to its lowest-id healing-forest
        # neighbor, falling back to the lowest-id reconnected survivor
        pool = heal_nbrs or set(chosen)
        if pool:
            recipient = min(pool, key=lambda u: self.orig_id[u])
            self.weight[recipient] += w_v

        wire = self._wire(chosen)
        for a, b in wire:
            self.g.add_edge(a, b)
            self.heal.add_edge(a, b)

        changed, depth = self._merge_labels(chosen)

        report = RoundReport(wire_edges=wire, id_changed=changed)
        report.messages_total = 2 * len(wire)
        for a, b in wire:
            report.messages_by_node[a] += 1
            report.messages_by_node[b] += 1
        for u in changed:
            d = self.g.degree(u)
            report.messages_total += d
            report.messages_by_node[u] += d
        if chosen:
            # one unit to detect the loss, one for the wiring handshake, then
            # one per hop of the label broadcast
            report.latency = 1 + (1 if wire else 0) + depth
        return report

    def _reconnect_set(self, survivors, vid, heal_nbrs):
        """One lowest-id representative per foreign component label, plus all
        healing-forest neighbors; sorted by permanent id."""
        reps = {}
        for u in survivors:
            cu = self.comp_id[u]
            if cu == vid:
                continue
            if cu not in reps or self.orig_id[u] < self.orig_id[reps[cu]]:
                reps[cu] = u
        return sorted(set(reps.values()) | heal_nbrs, key=lambda u: self.orig_id[u])

    def _wire(self, chosen):
        raise NotImplementedError

    @staticmethod
    def _tree_edges(order):
        """Complete-binary-tree wiring: slot i (1-based, breadth-first) links
        to slot i//2."""
        return [(order[i // 2 - 1], order[i - 1]) for i in range(2, len(order) + 1)]

    def _merge_labels(self, chosen):
        """Broadcast the smallest component label through the merged healing
        component; returns (relabelled nodes, broadcast depth)."""
        if not chosen:
            return [], 0
        target = min(self.comp_id[u] for u in chosen)
        # breadth-first sweep of the merged component, seeded at the nodes that
        # already hold the winning label (distance = hops the broadcast needs)
        comp = set(chosen)
        q = deque(chosen)
        while q:
            u = q.popleft()
            for w in self.heal.neighbors(u):
                if w not in comp:
                    comp.add(w)
                    q.append(w)
        sources = sorted(u for u in comp if self.comp_id[u] == target)
        dist = {u: 0 for u in sources}
        q = deque(sources)
        while q:
            u = q.popleft()
            for w in self.heal.neighbors(u):
                if w not in dist:
                    dist[w] = dist[u] + 1
                    q.append(w)
        changed = sorted(u for u in comp if self.comp_id[u] != target)
        depth = max((dist[u] for u in changed), default=0)
        for u in changed:
            self.comp_id[u] = target
            self.id_changes[u] += 1
        return changed, depth


class DashHealer(Healer):
    """Complete binary tree ordered by degree increase: heavy nodes sink to
    the leaves and gain nothing."""

    name = "dash"

    def _wire(self, chosen):
        order = sorted(chosen, key=lambda u: (self.degree_increase(u), self.orig_id[u]))
        return self._tree_edges(order)


class SdashHealer(DashHealer):
    """Star onto a lightly-loaded member when that stays within the current
    worst degree increase; otherwise fall back to the dash tree."""

    name = "sdash"

    def _wire(self, chosen):
        if len(chosen) >= 2:
            key = lambda u: (self.degree_increase(u), self.orig_id[u])
            m = max(chosen, key=lambda u: (self.degree_increase(u), -self.orig_id[u]))
            w = min(chosen, key=key)
            if self.degree_increase(w) + len(chosen) - 1 <= self.degree_increase(m):
                return [(w, u) for u in chosen if u != w]
        return super()._wire(chosen)


class BinaryTreeHealer(Healer):
    """Complete binary tree in permanent-id order (load-blind)."""

    name = "binheal"

    def _wire(self, chosen):
        return self._tree_edges(chosen)      # already sorted by permanent id


class LineHealer(Healer):
    """Path in permanent-id order."""

    name = "line"

    def _wire(self, chosen):
        return [(chosen[i - 1], chosen[i]) for i in range(1, len(chosen))]


class GraphHealer(Healer):
    """Complete binary tree over every surviving neighbor, ignoring components
    entirely; cheap to state, expensive in edges."""

    name = "graphheal"

    def _reconnect_set(self, survivors, vid, heal_nbrs):
        return sorted(survivors, key=lambda u: self.orig_id[u])

    def _wire(self, chosen):
        return self._tree_edges(chosen)


HEALERS = {
    cls.name: cls
    for cls in (DashHealer, SdashHealer, BinaryTreeHealer, LineHealer, GraphHealer)
}


# -- potential function ------------------------------------------------------

def branch_weight(healer, root, banned):
    """Total weight of the healing-forest piece containing `root` once `banned`
    is taken out (graph walk, so it also tolerates cyclic healing graphs)."""
    seen = {banned, root}
    stack = [root]
    total = 0
    while stack:
        u = stack.pop()
        total += healer.weight[u]
        for w in healer.heal.neighbors(u):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return total


def retained_weight(healer, v):
    """Potential of v: the weight v keeps around itself in the healing forest
    after discarding its heaviest branch, plus its own weight. Grows with v's
    degree increase and never exceeds the total weight in play."""
    ws = [branch_weight(healer, u, v) for u in sorted(healer.heal.neighbors(v))]
    return sum(ws) - max(ws, default=0) + healer.weight[v]
