"""Spanning-tree healing with per-node wills and simulated helper nodes.

The structure is a virtual tree whose nodes are *slots*: every alive real
node v owns a real slot ("r", v) and at most one helper slot ("h", v) that it
simulates. The network actually maintained is the projection of the virtual
tree: one real edge per virtual edge between slots with distinct simulators
(edges between a node's own two slots collapse). Healing a deletion is pure
slot surgery — the deleted node's position is replaced by a small balanced
tree of helper slots prepared in advance (its will), and the node's own
helper duties pass to its heir — so every repair is local and the degree of
any node can only ever grow by a small constant.

Wills are kept incrementally: when a child dies or is renamed, the stored
shape is spliced or relabelled in place; the balanced-BST ordering used to
build a will initially is just a construction device and is not preserved.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graphs import Graph, bfs_distances, bfs_spanning_tree, is_connected
from .dash import RoundReport


class NotATree(ValueError):
    """The input graph is not a tree."""


# ---------------------------------------------------------------------------
# wills: a binary shape over child labels.  Leaves are ("leaf", y), internal
# positions ("int", w); internal labels are exactly the child labels minus the
# heir (the heir takes the root duty at execution time instead).

@dataclass
class Will:
    par: dict = field(default_factory=dict)      # typed node -> typed node | None
    kids: dict = field(default_factory=dict)     # typed internal -> [typed, typed]
    root: tuple = None
    heir: int = None

    def derived(self):
        """Flat (child label, field) -> value map; diffs of this are what the
        owner would actually re-send to its children."""
        out = {"heir": self.heir}
        for t, p in self.par.items():
            out[(t, "up")] = p
        for t, ks in self.kids.items():
            out[(t, "down")] = tuple(ks)
        return out


def build_will(labels):
    """Balanced shape over ascending labels; internal separators are the max
    of each left half, so exactly the largest label never appears internally."""
    if not labels:
        raise ValueError("a will needs at least one child")
    labels = sorted(labels)

    def rec(ls):
        if len(ls) == 1:
            return ("leaf", ls[0])
        mid = (len(ls) + 1) // 2
        node = ("int", ls[mid - 1])
        left, right = rec(ls[:mid]), rec(ls[mid:])
        w.kids[node] = [left, right]
        w.par[left] = node
        w.par[right] = node
        return node

    w = Will()
    w.root = rec(labels)
    w.par[w.root] = None
    w.heir = labels[-1]
    return w


def will_relabel(w: Will, old, new):
    """Rename one child label everywhere it appears in the shape."""
    for t in (("leaf", old), ("int", old)):
        if t not in w.par:
            continue
        nt = (t[0], new)
        p = w.par.pop(t)
        w.par[nt] = p
        if p is None:
            w.root = nt
        else:
            w.kids[p][w.kids[p].index(t)] = nt
        if t in w.kids:
            ks = w.kids.pop(t)
            w.kids[nt] = ks
            for c in ks:
                w.par[c] = nt
    if w.heir == old:
        w.heir = new


def will_splice_leaf(w: Will, y):
    """Drop the leaf for a dead child y, keeping the skeleton invariant
    (internals = remaining labels minus heir). Returns False when the will
    emptied out entirely."""
    leaf = ("leaf", y)
    p = w.par.pop(leaf)
    if p is None:                       # y was the only child
        w.root = w.heir = None
        return False
    freed = p[1]                        # the label whose internal vanishes
    sib = next(c for c in w.kids.pop(p) if c != leaf)
    gp = w.par.pop(p)
    w.par[sib] = gp
    if gp is None:
        w.root = sib
    else:
        w.kids[gp][w.kids[gp].index(p)] = sib
    if y == w.heir:
        w.heir = freed                  # unique child whose duty just freed up
    elif freed != y:
        will_relabel(w, y, freed)       # freed label takes over y's old duty
    return True


# ---------------------------------------------------------------------------

class ForgivingTree:
    """The virtual tree plus per-node wills, with deletion healing."""

    def __init__(self, tree: Graph, root=None):
        n = len(tree)
        if n and (not is_connected(tree) or tree.num_edges() != n - 1):
            raise NotATree("healing structure needs a tree")
        self.root = min(tree.nodes()) if root is None and n else root
        self.vpar = {}                  # slot -> slot | None
        self.vkids = {}                 # slot -> [slots]
        self.children_labels = {}       # real id -> [labels]
        self.wills = {}                 # real id -> Will | None
        self.ready = set()              # real ids in the single-child heir state
        self.vroot = None
        if n == 0:
            return
        dist = bfs_distances(tree, self.root)
        self.vroot = ("r", self.root)
        for v in tree.nodes():
            kids = sorted(u for u in tree.neighbors(v) if dist[u] == dist[v] + 1)
            self.vpar[("r", v)] = None
            self.vkids[("r", v)] = [("r", c) for c in kids]
            self.children_labels[v] = kids
            self.wills[v] = build_will(kids) if kids else None
        for v in tree.nodes():
            for c in self.children_labels[v]:
                self.vpar[("r", c)] = ("r", v)

    # -- queries ---------------------------------------------------------

    def alive(self):
        return sorted(v for (k, v) in self.vpar if k == "r")

    def is_helper(self, v):
        return ("h", v) in self.vpar

    def node_state(self, v):
        """Read-only per-node field view (real-node ids, not slots)."""
        p = self.vpar[("r", v)]
        w = self.wills.get(v)
        st = {
            "parent": None if p is None else p[1],
            "children": tuple(self.children_labels[v]),
            "heir": w.heir if w else None,
            "sub_rt": w,
            "ishelper": self.is_helper(v),
            "isreadyheir": v in self.ready,
            "hparent": None,
            "hchildren": (),
        }
        if st["ishelper"]:
            hp = self.vpar[("h", v)]
            st["hparent"] = None if hp is None else hp[1]
            st["hchildren"] = tuple(c[1] for c in self.vkids[("h", v)])
        return st

    def real_edges(self):
        """Projection of the virtual tree onto real nodes."""
        out = set()
        for s, p in self.vpar.items():
            if p is None:
                continue
            a, b = s[1], p[1]
            if a != b:
                out.add((a, b) if a < b else (b, a))
        return out

    def slot_depth(self, s):
        d = 0
        while self.vpar[s] is not None:
            s = self.vpar[s]
            d += 1
        return d

    def real_ancestors(self, v):
        """Nodes whose own position lies above v's (helper slots simulated on
        someone else's behalf do not make their simulator an ancestor)."""
        out, s = [], self.vpar[("r", v)]
        while s is not None:
            if s[0] == "r":
                out.append(s[1])
            s = self.vpar[s]
        return out

    def _helper_view(self):
        """Per-node field snapshot used for message accounting."""
        view = {}
        for (k, v), p in self.vpar.items():
            f = view.setdefault(v, {})
            key = "up" if k == "r" else "hup"
            f[key] = None if p is None else p[1]
            if k == "h":
                f["hdown"] = tuple(sorted(c[1] for c in self.vkids[("h", v)]))
                f["ready"] = v in self.ready
        return view

    # -- low-level slot surgery ------------------------------------------

    def _cut(self, s):
        p = self.vpar[s]
        if p is not None:
            self.vkids[p].remove(s)
        self.vpar[s] = None
        return p

    def _drop(self, s):
        assert not self.vkids[s], f"dropping occupied slot {s}"
        del self.vkids[s]
        del self.vpar[s]

    def _new(self, s):
        assert s not in self.vpar, f"{s[1]} already simulates a helper"
        self.vpar[s] = None
        self.vkids[s] = []
        return s

    def _link(self, p, s):
        self.vpar[s] = p
        self.vkids[p].append(s)

    def _seat(self, parent, old_label, head):
        """Put `head` where the subtree labelled old_label used to hang."""
        if parent is None:
            self.vroot = head
            self.vpar[head] = None
            return
        self._link(parent, head)
        if parent[0] == "r":
            u = parent[1]
            new_label = head[1]
            if new_label != old_label:
                labs = self.children_labels[u]
                labs[labs.index(old_label)] = new_label
                will_relabel(self.wills[u], old_label, new_label)

    def _rename_helper(self, old, new):
        """Real node `new` takes over the helper slot of dead `old`."""
        s, ns = ("h", old), ("h", new)
        assert ns not in self.vpar, f"{new} already simulates a helper"
        p = self.vpar.pop(s)
        kids = self.vkids.pop(s)
        self.vpar[ns] = p
        self.vkids[ns] = kids
        for c in kids:
            self.vpar[c] = ns
        if p is not None:
            self.vkids[p][self.vkids[p].index(s)] = ns
            if p[0] == "r":
                u = p[1]
                labs = self.children_labels[u]
                labs[labs.index(old)] = new
                will_relabel(self.wills[u], old, new)
        elif self.vroot == s:
            self.vroot = ns
        if old in self.ready:
            self.ready.discard(old)
        if len(kids) == 1:
            self.ready.add(new)

    def bypass(self, v):
        """Dissolve v's single-child helper, splicing the child into its
        place; v's degree drops by up to 2, the endpoints' net change is 0."""
        hv = ("h", v)
        if hv not in self.vpar:
            raise ValueError(f"{v} simulates no helper")
        kids = self.vkids[hv]
        if len(kids) != 1:
            raise ValueError("bypass needs a single-child helper")
        (t,) = kids
        p = self._cut(hv)
        self._cut(t)
        self._drop(hv)
        self.ready.discard(v)
        self._seat(p, v, t)

    # -- healing ----------------------------------------------------------

    def delete(self, v):
        """Remove real node v and repair; returns (added, removed, messages,
        touched) where messages counts field diffs plus 2 per edge change."""
        pre_edges = self.real_edges()
        pre_view = self._helper_view()
        pre_wills = {u: w.derived() for u, w in self.wills.items() if w is not None}

        if self.children_labels[v]:
            self._fix_node(v)
        else:
            self._fix_leaf(v)
        del self.children_labels[v]
        self.wills.pop(v, None)
        self.ready.discard(v)

        post_edges = self.real_edges()
        added = sorted(post_edges - pre_edges)
        removed = sorted(e for e in pre_edges - post_edges if v not in e)
        touched = set()
        field_msgs = 0
        post_view = self._helper_view()
        for u, f in post_view.items():
            diff = sum(1 for k in set(f) | set(pre_view.get(u, {}))
                       if f.get(k) != pre_view.get(u, {}).get(k))
            if diff:
                field_msgs += diff
                touched.add(u)
        for u, w in self.wills.items():
            if w is None:
                continue
            d, pre = w.derived(), pre_wills.get(u, {})
            changes = [k for k in set(d) | set(pre) if d.get(k) != pre.get(k)]
            if changes:
                field_msgs += len(changes)
                touched.add(u)
                for k in changes:
                    if isinstance(k, tuple):
                        touched.add(k[0][1])
        for u in pre_wills:
            if u != v and self.wills.get(u) is None and pre_wills[u]:
                field_msgs += 1          # will emptied out
                touched.add(u)
        msgs = 2 * (len(added) + len(removed)) + field_msgs
        return added, removed, msgs, touched

    def _fix_node(self, v):
        rv = ("r", v)
        parent = self.vpar[rv]
        labels = self.children_labels[v]
        will = self.wills[v]
        was_helper = self.is_helper(v)
        self._cut(rv)

        heads = {}
        for y in labels:
            hy = ("h", y)
            if y in self.ready and self.vpar.get(hy) == rv:
                # the old single-child helper dissolves; its child steps up,
                # freeing y for the duty assigned in v's will
                (w,) = self.vkids[hy]
                self._cut(w)
                self._cut(hy)
                self._drop(hy)
                self.ready.discard(y)
                heads[y] = w
            else:
                assert self.vpar[("r", y)] == rv
                assert not self.is_helper(y), f"child {y} already busy"
                self._cut(("r", y))
                heads[y] = ("r", y)
        assert not self.vkids[rv]
        self._drop(rv)

        def realize(t):
            if t[0] == "leaf":
                return heads[t[1]]
            s = self._new(("h", t[1]))
            for c in will.kids[t]:
                self._link(s, realize(c))
            return s

        sub_root = realize(will.root)
        heir = will.heir
        if was_helper and parent == ("h", v):
            # v sat directly below its own helper
            if not self.vkids[parent]:
                # that helper was a single-child heir slot: it dissolves and
                # the replacement tree takes the whole position
                hp = self._cut(parent)
                self._drop(parent)
                self.ready.discard(v)
                s = self._new(("h", heir))
                self._link(s, sub_root)
                self.ready.add(heir)
                self._seat(hp, v, s)
            else:
                # deployed: heir inherits the slot, replacement tree fills
                # the gap v's own slot left under it
                self._rename_helper(v, heir)
                self._link(("h", heir), sub_root)
                self.ready.discard(heir)
            return
        if was_helper:
            # heir inherits v's existing duty wholesale; the replacement tree
            # hangs where v's own slot used to be
            assert parent is None or parent[0] == "h"
            self._rename_helper(v, heir)
            new_head = sub_root
        else:
            s = self._new(("h", heir))
            self._link(s, sub_root)
            self.ready.add(heir)
            new_head = s
        self._seat(parent, v, new_head)

    def _fix_leaf(self, v):
        rv = ("r", v)
        q = self.vpar[rv]
        if not self.is_helper(v):
            if q is None:               # the last node of the tree
                self._drop(rv)
                self.vroot = None
                return
            self._cut(rv)
            self._drop(rv)
            self._absorb_hole(q, v)
            return

        hv = ("h", v)
        if q == hv:
            # v sat directly below its own helper
            self._cut(rv)
            self._drop(rv)
            others = list(self.vkids[hv])
            hp = self._cut(hv)
            if others:
                (s,) = others
                self._cut(s)
                self._drop(hv)
                self.ready.discard(v)
                self._seat(hp, v, s)
            else:
                self._drop(hv)
                self.ready.discard(v)
                self._absorb_hole(hp, v)
            return

        assert q[0] == "h", f"busy leaf under real slot {q}"
        z = q[1]
        self._cut(rv)
        self._drop(rv)
        if hv in self.vkids[q]:
            # v's slot and v's helper were siblings: z's helper dissolves
            # into the duty v leaves behind
            assert self.vkids[q] == [hv]
            gp = self._cut(q)
            self._cut(hv)
            self._drop(q)
            self.ready.discard(z)
            self._rename_helper(v, z)
            self._seat(gp, z, ("h", z))
        else:
            # z's helper is down to one child: dissolve it, then z adopts
            # v's duty (keeping z at one simulated helper)
            kids_q = list(self.vkids[q])
            qp = self._cut(q)
            if kids_q:
                assert z not in self.ready
                (w,) = kids_q
                self._cut(w)
                self._drop(q)
                self._seat(qp, z, w)
            else:
                self._drop(q)
                self.ready.discard(z)
                self._absorb_hole(qp, z)
            self._rename_helper(v, z)

    def _absorb_hole(self, p, lost_label):
        """p lost a child slot outright (nothing replaces it)."""
        if p is None:
            self.vroot = None
            return
        if p[0] == "r":
            self._will_remove_child(p[1], lost_label)
            return
        w = p[1]
        kids = self.vkids[p]
        if len(kids) == 1:
            (t,) = kids
            gp = self._cut(p)
            self._cut(t)
            self._drop(p)
            self.ready.discard(w)
            self._seat(gp, w, t)
        elif not kids:
            gp = self._cut(p)
            self._drop(p)
            self.ready.discard(w)
            self._absorb_hole(gp, w)

    def _will_remove_child(self, u, y):
        labs = self.children_labels[u]
        labs.remove(y)
        if not will_splice_leaf(self.wills[u], y):
            self.wills[u] = None

    # -- structural checks (used by tests and the harness's strict mode) --

    def check(self):
        for s, p in self.vpar.items():
            if p is None:
                assert s == self.vroot
            else:
                assert s in self.vkids[p]
        helpers = [v for (k, v) in self.vpar if k == "h"]
        assert len(helpers) == len(set(helpers))
        for v in helpers:
            nk = len(self.vkids[("h", v)])
            assert nk == 2 or (nk == 1 and v in self.ready), \
                f"helper of {v} has {nk} children, ready={v in self.ready}"
        for u, labs in self.children_labels.items():
            heads = {c[1] for c in self.vkids[("r", u)]}
            assert set(labs) == heads, (u, labs, heads)
            w = self.wills[u]
            if labs:
                ints = {t[1] for t in w.kids}
                assert ints == set(labs) - {w.heir}


# ---------------------------------------------------------------------------

class FtreeHealer:
    """Harness adapter: drives a ForgivingTree over the live graph.

    Latency model: 1 round to detect the loss, and when any repair happens,
    1 round of will execution plus 1 round of edge handshakes — the repair
    itself is a constant-time local operation.
    """

    name = "ftree"

    def __init__(self, spanning_tree=False):
        self.spanning_tree = spanning_tree

    def attach(self, g: Graph, rng=None):
        self.g = g
        n = len(g)
        if n and (not is_connected(g) or g.num_edges() != n - 1):
            if not self.spanning_tree:
                raise NotATree(
                    "input is not a tree (pass spanning_tree=True to project one)")
            tree = bfs_spanning_tree(g)
            for e in list(g.edges()):
                if not tree.has_edge(*e):
                    g.remove_edge(*e)
        self.ft = ForgivingTree(g.copy())
        self.ref_degree = {v: g.degree(v) for v in g.nodes()}
        return self

    def degree_increase(self, v):
        return self.g.degree(v) - self.ref_degree[v]

    def note_insertion(self, v, neighbors):
        raise ValueError("this healer only handles deletions")

    def heal_deletion(self, vid, survivors):
        added, removed, msgs, touched = self.ft.delete(vid)
        for a, b in added:
            self.g.add_edge(a, b)
        for a, b in removed:
            self.g.remove_edge(a, b)
        report = RoundReport(wire_edges=added, id_changed=[],
                             unwire_edges=removed)
        report.messages_total = msgs
        report.fields_changed = msgs - 2 * (len(added) + len(removed))
        for a, b in added + removed:
            report.messages_by_node[a] += 1
            report.messages_by_node[b] += 1
        for u in touched:
            report.messages_by_node[u] += 1
        report.latency = 3 if (added or removed or touched) else 1
        return report
