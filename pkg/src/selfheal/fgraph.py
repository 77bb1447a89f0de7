"""General-graph healing that survives both deletions and insertions.

Every deleted processor is replaced by a *reconstruction tree*: a half-full
tree (see `haft`) whose leaves stand for the edges the dead processor left
behind — one leaf per reference-graph edge, owned by its surviving endpoint —
and whose internal nodes are *helper* duties simulated by those same
survivors, at most one helper per reference edge. Later deletions break
reconstruction trees into complete pieces which re-merge, binary-addition
style, coordinated by a temporary binary tree of anchor nodes. The network
actually maintained is the image of this virtual forest with every helper
collapsed onto its simulating processor.

The *representative* bookkeeping makes merging cheap: every tree node knows
the one leaf below it whose edge is not yet simulating a helper, so a merge
can mint the new parent without searching. A representative is assigned when
a helper is created and never changes for the life of that helper.

Slots are tuples: ("leaf", v, x) is the record processor v keeps for its
reference edge to a dead neighbor x, and ("h", v, x) is the helper duty that
edge may carry. Both vanish when v dies.

Guarantees maintained every round (validated by `check` and the test suite):
degree of any processor stays within 3x its reference degree, distances
stretch by at most a logarithmic factor, every reconstruction tree is a valid
half-full tree, and a repair costs O(degree * log n) messages.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field

from .dash import RoundReport
from .graphs import Graph
from .haft import Node, is_haft


class RepresentativeUnavailable(RuntimeError):
    """A merge asked an edge to host a second simultaneous helper."""


def _sim(slot):
    """The processor simulating a slot."""
    return slot[1]


def _edge(slot):
    """The (owner, other-end) reference edge a slot belongs to."""
    return (slot[1], slot[2])


def _key(slot):
    """Deterministic total order on slots: (processor, other end, kind)."""
    return (slot[1], slot[2], slot[0])


@dataclass
class FgEdgeState:
    """Everything a processor keeps for one of its reference-graph edges."""

    endpoint: object            # the other processor, or the leaf's tree parent
    hashelper: bool
    rt_parent: object           # parent slot of the leaf record, if any
    representative: object      # the owning processor itself
    hparent: object = None
    hleftchild: object = None
    hrightchild: object = None
    height: int = 0
    desccount: int = 0
    helper_representative: object = None


@dataclass
class RepairTrace:
    """Message accounting and structural events for one repair round."""

    deleted: object = None
    nset_size: int = 0
    merge_levels: int = 0
    messages: Counter = field(default_factory=Counter)   # units by payload class
    by_node: Counter = field(default_factory=Counter)
    probes_by_fragment: list = field(default_factory=list)
    helpers_created: int = 0
    helpers_destroyed: int = 0
    handoffs: list = field(default_factory=list)         # (old anchor, new anchor)

    @property
    def total(self):
        return sum(self.messages.values())


@dataclass
class _Frag:
    """One fragment taking part in a repair: its anchor slot, the roots of its
    maximal complete subtrees, and the spine slots pending dissolution."""

    anchor: object
    roots: list
    reds: list
    settled: bool = False      # True once produced by a merge (re-probe on reuse)
    anchor_dead: bool = False  # anchor's incarnation was dissolved; hand off


class ForgivingGraph:
    """The virtual forest of reconstruction trees over a live node set.

    `gp` is the reference adjacency: original edges plus insertions, never
    shrunk by deletions. The forest dicts (`par`, `kids`, `height`, `desc`,
    `rep`) hold every live slot; leaves have height 0, count 1, and are their
    own representative.
    """

    def __init__(self, g: Graph):
        self.alive = set(g.nodes())
        self.gp = {v: set(g.neighbors(v)) for v in g.nodes()}
        self.par = {}
        self.kids = {}
        self.height = {}
        self.desc = {}
        self.rep = {}
        self._serial = 0
        # helper lifecycle audit: ("new", serial, slot, rep) / ("del", serial, slot, None)
        self.events = []

    # -- queries --------------------------------------------------------------

    def edge_state(self, v, x):
        if v not in self.alive:
            raise KeyError(f"node {v} is not alive")
        if x not in self.gp[v]:
            raise KeyError(f"no reference edge ({v},{x})")
        leaf = ("leaf", v, x)
        h = ("h", v, x)
        st = FgEdgeState(
            endpoint=x if x in self.alive else self.par.get(leaf),
            hashelper=h in self.height,
            rt_parent=self.par.get(leaf),
            representative=v,
        )
        if st.hashelper:
            st.hparent = self.par[h]
            st.hleftchild, st.hrightchild = self.kids[h]
            st.height = self.height[h]
            st.desccount = self.desc[h]
            st.helper_representative = self.rep[h]
        return st

    def tree_roots(self):
        """Roots of the reconstruction trees, smallest key first."""
        return sorted((s for s, p in self.par.items() if p is None), key=_key)

    def helpers(self):
        return sorted(self.kids, key=_key)

    def is_primary_root(self, slot):
        """True when the slot heads a complete subtree whose parent does not."""
        if self.desc[slot] != 1 << self.height[slot]:
            return False
        p = self.par[slot]
        return p is None or self.desc[p] != 1 << self.height[p]

    def find_primary_roots(self, start, foreign=()):
        """Probe the tree containing `start` for the roots of its maximal
        complete subtrees.

        Foreign anchors bounce the probe back, so each of several anchors
        walking the same tree claims its own territory (nearer slots first,
        key order breaking ties) and no root is reported twice. Returns
        (roots, spine, probes) for start's territory only: the complete-subtree
        roots it discovered, the slots under no complete root, and the number
        of probe messages the walk cost (two per hop, request and reply).
        """
        comp = self._component(start)
        local = sorted({start} | {a for a in foreign if a in comp}, key=_key)
        owner = self._claim(comp, local)
        return self._territory(comp, owner, start)

    def project(self):
        """The real network: helpers collapsed onto their simulators.

        A leaf record whose own edge carries a live helper leans on that
        helper's edges instead of its tree-parent link (the helper sits on the
        leaf's ancestor path, so connectivity survives); this keeps each
        reference edge's contribution to its owner's degree at 3.
        """
        g = Graph(nodes=sorted(self.alive))
        for v in sorted(self.alive):
            for x in self.gp[v]:
                if v < x and x in self.alive:
                    g.add_edge(v, x)
        for s, p in self.par.items():
            if p is None:
                continue
            if s[0] == "leaf" and ("h", s[1], s[2]) in self.height:
                continue
            a, b = _sim(s), _sim(p)
            if a != b:
                g.add_edge(a, b)
        return g

    # -- updates ----------------------------------------------------------------

    def insert(self, v, neighbors):
        """A new processor joins, wired to alive neighbors; trees untouched."""
        if v in self.gp:
            raise ValueError(f"node {v} already exists")
        nbrs = set(neighbors)
        for x in nbrs:
            if x not in self.alive:
                raise ValueError(f"neighbor {x} is not alive")
        self.alive.add(v)
        self.gp[v] = nbrs
        for x in nbrs:
            self.gp[x].add(v)

    def delete(self, v, order_rng=None):
        """Remove processor v and rebuild around the hole.

        Every slot v simulated disappears; the slots next door become anchors,
        link up in a balanced binary tree, and merge their tree fragments
        level by level until a single half-full tree stands where v was.
        `order_rng`, if given, shuffles the processing order within each merge
        level — the outcome must not depend on it.
        """
        if v not in self.alive:
            raise ValueError(f"node {v} is not alive")
        trace = RepairTrace(deleted=v)
        self.alive.discard(v)

        dying = sorted((s for s in self.height if _sim(s) == v), key=_key)
        alive_nbrs = sorted(x for x in self.gp[v] if x in self.alive)
        if not dying and not alive_nbrs:
            return trace

        dying_set = set(dying)
        anchors = []
        named = set()

        def name(s):
            if s is not None and s not in dying_set and s not in named:
                named.add(s)
                anchors.append(s)

        # anchors announced by each of v's edge records
        for x in sorted(self.gp[v]):
            if x in self.alive:
                continue
            leaf = ("leaf", v, x)
            name(self.par[leaf])
            h = ("h", v, x)
            if h in self.height:
                name(self.par[h])
                name(self.kids[h][1])

        # descendant counts walked up from every vanishing slot
        for s in dying:
            lost = self.desc[s]
            p = self.par[s]
            while p is not None and p not in dying_set:
                self.desc[p] -= lost
                p = self.par[p]

        # cut the dying slots out of the forest
        seeds = set()
        for s in dying:
            p = self.par.pop(s)
            if p is not None and p not in dying_set:
                self.kids[p].remove(s)
                seeds.add(p)
            if s[0] == "h":
                for c in self.kids.pop(s):
                    if c in dying_set:
                        continue
                    self.par[c] = None
                    seeds.add(c)
                self._serial += 1
                self.events.append(("del", self._serial, s, None))
                trace.helpers_destroyed += 1
            del self.height[s], self.desc[s], self.rep[s]

        # the dead node's live neighbors enter its tree as fresh leaf records
        for x in alive_nbrs:
            s = ("leaf", x, v)
            assert s not in self.height
            self.height[s] = 0
            self.desc[s] = 1
            self.rep[s] = s
            self.par[s] = None
            seeds.add(s)
            name(s)

        frags = self._probe_fragments(seeds, anchors, trace)
        trace.nset_size = len(frags)
        if not frags:
            return trace

        # dissolve every broken spine up front: merges need the complete
        # pieces free-standing and their representatives' edges vacant
        for f in frags:
            self._dissolve(f.reds, trace)
            f.reds = []
        # judged before any merge can re-mint the same slot name on the edge:
        # a dissolved coordinator stays dead even if its name comes back
        for f in frags:
            f.anchor_dead = f.anchor not in self.height

        self._merge_fragments(frags, trace, order_rng)
        trace.probes_by_fragment.sort()
        trace.handoffs.sort()
        return trace

    # -- probing ----------------------------------------------------------------

    def _component(self, start):
        comp = {start}
        q = deque([start])
        while q:
            s = q.popleft()
            for t in self._nbrs(s):
                if t not in comp:
                    comp.add(t)
                    q.append(t)
        return comp

    def _nbrs(self, s):
        out = [] if self.par[s] is None else [self.par[s]]
        out.extend(self.kids.get(s, ()))
        return out

    def _claim(self, comp, sources):
        """Multi-source walk: each slot goes to the nearest source, earlier
        source winning ties. Models simultaneous probes bouncing off foreign
        anchors."""
        owner = {}
        q = deque()
        for a in sources:
            owner[a] = a
            q.append(a)
        while q:
            s = q.popleft()
            for t in sorted(self._nbrs(s), key=_key):
                if t in comp and t not in owner:
                    owner[t] = owner[s]
                    q.append(t)
        return owner

    def _territory(self, comp, owner, anchor):
        mine = [s for s in comp if owner[s] == anchor]
        complete = {s for s in mine
                    if self.desc[s] == 1 << self.height[s]}
        roots = sorted((s for s in complete
                        if self.par[s] is None or self.par[s] not in complete),
                       key=lambda s: (self.desc[s], _key(s)))
        under = set()
        for r in roots:
            stack = [r]
            while stack:
                t = stack.pop()
                under.add(t)
                stack.extend(self.kids.get(t, ()))
        spine = sorted((s for s in mine if s not in under), key=_key)
        if len(mine) == 1 and roots:
            probes = 0          # a lone slot is its own answer
        else:
            # the walk covers broken slots and tests each complete top, but
            # never descends into a complete subtree; two messages per visit
            probes = 2 * (len(spine) + len(roots))
        return roots, spine, probes

    def _probe_fragments(self, seeds, anchors, trace):
        """Group the surviving slots around the hole into fragments, one per
        anchor, discovering complete-subtree roots and spine slots."""
        frags = []
        visited = set()
        claimed = set()
        for seed in sorted(seeds, key=_key):
            if seed in visited:
                continue
            comp = self._component(seed)
            visited |= comp
            local = [a for a in anchors if a in comp]
            assert local, f"fragment around {seed} has no anchor"
            owner = self._claim(comp, sorted(local, key=_key))
            for a in sorted(local, key=_key):
                roots, spine, probes = self._territory(comp, owner, a)
                assert not claimed & set(roots)
                claimed |= set(roots)
                self._msg(trace, "probe", _sim(a), _sim(a), probes)
                trace.probes_by_fragment.append(probes)
                frags.append(_Frag(anchor=a, roots=roots, reds=spine))
        assert len(frags) == len(anchors)
        return frags

    # -- merging ----------------------------------------------------------------

    def _merge_fragments(self, frags, trace, order_rng):
        """Anchors link into a balanced binary tree and merge level by level:
        a node whose surviving children are all current leaves absorbs them."""
        order = sorted(frags, key=lambda f: _key(f.anchor))
        for i in range(1, len(order)):
            self._msg(trace, "edge",
                      _sim(order[(i - 1) // 2].anchor), _sim(order[i].anchor), 2)
        active = dict(enumerate(order))
        while len(active) > 1:
            trace.merge_levels += 1
            def is_leaf(i):
                return 2 * i + 1 not in active and 2 * i + 2 not in active
            ready = [i for i in sorted(active)
                     if not is_leaf(i)
                     and all(is_leaf(j) for j in (2 * i + 1, 2 * i + 2)
                             if j in active)]
            assert ready, "merge schedule stalled"
            if order_rng is not None:
                order_rng.shuffle(ready)
            for i in ready:
                kids = [j for j in (2 * i + 1, 2 * i + 2) if j in active]
                parts = [active[i]] + [active.pop(j) for j in kids]
                active[i] = self._merge_step(parts, trace)
        (last,) = active.values()
        if not last.settled and (last.reds or len(last.roots) != 1):
            # a lone anchor still normalizes its broken fragment
            trace.merge_levels += 1
            self._merge_step([last], trace)

    def _merge_step(self, parts, trace):
        """One merge: participants strip down to their complete subtrees, then
        the roots combine into a single half-full tree."""
        if len(parts) > 1:
            self._msg(trace, "rtlist", _sim(parts[0].anchor),
                      _sim(parts[1].anchor), 4)
        for p in parts:
            if p.settled:
                # the re-probe along the fresh spine of an already-merged haft
                probes = 2 * (len(p.reds) + len(p.roots))
                self._msg(trace, "probe", _sim(p.anchor), _sim(p.anchor), probes)
                trace.probes_by_fragment.append(probes)
            self._dissolve(p.reds, trace)
            for r in p.roots:
                assert self.par[r] is None
            self._msg(trace, "root_inform", _sim(p.anchor),
                      _sim(parts[0].anchor), len(p.roots))
        roots = sorted((r for p in parts for r in p.roots),
                       key=lambda s: (self.desc[s], _key(s)))
        anchor = parts[0].anchor
        if not roots:
            # every slot here was broken and dissolved; nothing to rebuild
            return _Frag(anchor=anchor, roots=[], reds=[], settled=True,
                         anchor_dead=parts[0].anchor_dead)
        top, strip, spine = self.combine_roots(roots, trace)
        if parts[0].anchor_dead:
            new_anchor = min(strip, key=lambda s: (-self.desc[s], _key(s)))
            self._msg(trace, "handoff", _sim(anchor), _sim(new_anchor), 4)
            trace.handoffs.append((anchor, new_anchor))
            anchor = new_anchor
        return _Frag(anchor=anchor, roots=strip, reds=spine, settled=True)

    def combine_roots(self, roots, trace=None):
        """Merge free-standing complete trees into one half-full tree.

        Binary addition on the leaf counts: equal-sized trees pair up under a
        new helper (smallest first), then the distinct sizes chain bottom-up,
        each new parent simulated by its left child's representative and
        inheriting the right child's. Returns (root, strip, spine): the tree,
        its complete-subtree roots, and the chain helpers joining them.
        """
        trace = trace if trace is not None else RepairTrace()
        L = sorted(roots, key=lambda s: (self.desc[s], _key(s)))
        i = 0
        while i + 1 < len(L):
            a, b = L[i], L[i + 1]
            if self.desc[a] != self.desc[b]:
                i += 1
                continue
            h = self._new_helper(a, b, trace)
            del L[i:i + 2]
            j = 0
            while j < len(L) and ((self.desc[L[j]], _key(L[j]))
                                  < (self.desc[h], _key(h))):
                j += 1
            L.insert(j, h)
        strip = list(L)
        acc = L[0]
        spine = []
        for nxt in L[1:]:
            acc = self._new_helper(nxt, acc, trace)
            spine.append(acc)
        return acc, strip, spine

    def _new_helper(self, left, right, trace):
        """Mint the parent of two roots on the left root's representative."""
        rep = self.rep[left]
        slot = ("h", rep[1], rep[2])
        if slot in self.height:
            raise RepresentativeUnavailable(
                f"edge {_edge(rep)} already hosts a helper")
        self.par[slot] = None
        self.kids[slot] = [left, right]
        self.par[left] = slot
        self.par[right] = slot
        self.height[slot] = self.height[left] + 1
        self.desc[slot] = self.desc[left] + self.desc[right]
        self.rep[slot] = self.rep[right]
        self._serial += 1
        self.events.append(("new", self._serial, slot, self.rep[slot]))
        trace.helpers_created += 1
        self._msg(trace, "edge", _sim(slot), _sim(left), 2)
        self._msg(trace, "edge", _sim(slot), _sim(right), 2)
        return slot

    def _dissolve(self, spine, trace):
        """Remove broken internal slots, freeing their children and their
        edges' helper capacity."""
        for r in sorted(spine, key=_key):
            assert r[0] == "h"
            p = self.par.pop(r)
            if p in self.kids and r in self.kids[p]:
                self.kids[p].remove(r)
            if p is not None and p in self.height:
                self._msg(trace, "edge", _sim(r), _sim(p), 2)
            for c in self.kids.pop(r):
                self.par[c] = None
                self._msg(trace, "edge", _sim(r), _sim(c), 2)
            del self.height[r], self.desc[r], self.rep[r]
            self._serial += 1
            self.events.append(("del", self._serial, r, None))
            trace.helpers_destroyed += 1

    def _msg(self, trace, cls, a, b, units):
        # Each unit is charged to exactly one processor: the two endpoints of
        # an exchange split the bill (sender takes the odd unit), so the
        # per-node counters always sum back to the round total.
        if units:
            trace.messages[cls] += units
            if a == b:
                trace.by_node[a] += units
            else:
                trace.by_node[a] += units - units // 2
                trace.by_node[b] += units // 2

    # -- validation ---------------------------------------------------------------

    def check(self):
        """Validate every structural invariant; raises AssertionError on a lie."""
        for s in self.height:
            kind, v, x = s
            if kind == "leaf":
                assert v in self.alive and x not in self.alive and x in self.gp[v]
                assert self.height[s] == 0 and self.desc[s] == 1
                assert self.rep[s] == s and s not in self.kids
            else:
                assert kind == "h" and v in self.alive
                assert ("leaf", v, x) in self.height
                assert len(self.kids[s]) == 2
        for v in self.alive:
            for x in self.gp[v]:
                if x not in self.alive:
                    assert ("leaf", v, x) in self.height
        for s, p in self.par.items():
            assert p is None or (p in self.kids and s in self.kids[p])
        for p, ks in self.kids.items():
            for c in ks:
                assert self.par[c] == p

        def ancestors(s):
            p = self.par[s]
            while p is not None:
                yield p
                p = self.par[p]

        for r in self.tree_roots():
            self._check_tree(r)
        for h in self.kids:
            assert h in set(ancestors(("leaf", h[1], h[2]))), \
                "helper strayed off its own leaf's ancestor path"
        for s in self.height:
            rep = self.rep[s]
            assert rep[0] == "leaf" and rep in self.height
            assert s == rep or s in set(ancestors(rep)), \
                "representative outside its subtree"
            taken = ("h", rep[1], rep[2])
            if taken in self.height and taken != s:
                assert taken in set(ancestors(s)), \
                    "representative's edge consumed elsewhere"

    def _check_tree(self, root):
        """Recount one tree and hold its shape against the half-full laws."""
        def walk(s):
            if s not in self.kids:
                assert self.height[s] == 0 and self.desc[s] == 1
                return s, 0, 1, [s]
            l, r = self.kids[s]
            tl, hl, dl, frees_l = walk(l)
            tr, hr, dr, frees_r = walk(r)
            assert self.height[s] == hl + 1
            assert self.desc[s] == dl + dr
            frees = [f for f in frees_l + frees_r
                     if ("h", f[1], f[2]) not in self.height
                     or not self._below(("h", f[1], f[2]), s)]
            assert frees == [self.rep[s]], \
                f"free-leaf set under {s} is {frees}, not its representative"
            return Node(tl, tr), self.height[s], self.desc[s], frees
        shape = walk(root)[0]
        assert is_haft(shape), f"tree at {root} is not half-full"

    def _below(self, s, top):
        while s is not None:
            if s == top:
                return True
            s = self.par[s]
        return False


class FgHealer:
    """Harness adapter: drives a ForgivingGraph over the live graph.

    Latency model: one round to detect the loss; a repair spends one round
    wiring the anchor tree plus one per merge level (probing and wiring within
    a level happen in parallel).
    """

    name = "fgraph"

    def attach(self, g: Graph, rng=None):
        self.g = g
        self.fg = ForgivingGraph(g)
        self.ref_degree = {v: g.degree(v) for v in g.nodes()}
        return self

    def degree_increase(self, v):
        return self.g.degree(v) - self.ref_degree[v]

    def note_insertion(self, v, nbrs):
        self.fg.insert(v, nbrs)
        self.ref_degree[v] = len(nbrs)
        report = RoundReport()
        report.messages_total = 2 * len(nbrs)
        for u in nbrs:
            self.ref_degree[u] += 1
            report.messages_by_node[v] += 1
            report.messages_by_node[u] += 1
        report.latency = 1 if nbrs else 0
        return report

    def heal_deletion(self, vid, survivors):
        trace = self.fg.delete(vid)
        target = self.fg.project()
        old = set(self.g.edges())
        new = set(target.edges())
        wire = sorted(new - old)
        unwire = sorted(old - new)
        for a, b in wire:
            self.g.add_edge(a, b)
        for a, b in unwire:
            self.g.remove_edge(a, b)
        report = RoundReport(wire_edges=wire, unwire_edges=unwire)
        report.messages_total = trace.total
        report.messages_by_node = trace.by_node
        report.fields_changed = trace.total - trace.messages.get("edge", 0)
        report.latency = 2 + trace.merge_levels if trace.total else 1
        self.last_trace = trace
        return report
