"""Round-based simulation: one adversary event per round, one heal in response.

`run(config)` wires a topology, a healer, and an attack policy together and
produces a `Trace`: the event list, one `MetricsRow` per round, and the final
live and reference graphs. The reference graph is the world where nothing was
ever deleted and nothing was healed — insertions land in both graphs, but
deletions and healing edges touch only the live one — and every row's degree
and stretch columns compare the live graph against it.

Determinism: the seed feeds three independent generator streams (topology,
healer, attack), so re-running the recorded events as a scripted attack
reproduces the exact same rows even though the attack stream is no longer
consumed. `replay(trace)` does exactly that.

Invariant checking is graded: "fast" verifies the live graph stays connected
(when it started out connected and no isolated node was inserted), "all" also
re-validates the healer's internal state after every round, "off" trusts
everyone. A failed check stops the run and stamps `trace.violation`; errors
raised by the modules themselves propagate, with the partial trace attached to
the exception as `partial_trace`.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass, field, fields

from .adversary import ATTACKS, Event, Scripted
from .dash import HEALERS as _LABEL_HEALERS, retained_weight
from .fgraph import FgHealer
from .ftree import FtreeHealer
from .graphs import (Graph, bfs_distances, complete_kary_tree,
                     connected_components, diameter, is_connected, path_graph,
                     pref_attach, star_graph)

INF = float("inf")
NAN = float("nan")

HEALERS = dict(_LABEL_HEALERS, ftree=FtreeHealer, fgraph=FgHealer)

TOPOLOGIES = ("pa", "star", "tree", "path", "file")

# column order is the wire format: the CSV writer and the plots all key on it
COLUMNS = ("round", "action", "node", "max_delta_add", "max_delta_ratio",
           "diameter", "stretch", "msgs_total", "msgs_max_node",
           "id_changes_max", "latency")


class BadParams(ValueError):
    """A config that cannot be run as asked."""


@dataclass
class SimConfig:
    """Everything a run depends on; the seed pins down all randomness."""

    healer: str = "dash"
    attack: str = "random"
    topology: str = "pa"
    n0: int = 100
    m: int = 2                # edges per arrival (pref-attach topology)
    k: int = 4                # branch factor (tree topology; level attack uses k-ary)
    depth: int = 3            # tree depth
    graph_file: str = ""      # topology "file": JSON graph dump
    script_file: str = ""     # attack "script": JSON event list
    rounds: int | None = None  # None: run until the attack stops or the graph empties
    seed: int = 0
    checks: str = "fast"      # all | fast | off
    metrics: str = "full"     # full | degree ("degree" skips the all-pairs columns)
    spanning_tree: bool = False
    random_real_ids: bool = False
    events: list = field(default_factory=list)   # inline script (used by replay)

    def to_obj(self):
        obj = {f.name: getattr(self, f.name) for f in fields(self)}
        obj["events"] = [e.to_obj() for e in self.events]
        return obj

    @classmethod
    def from_obj(cls, obj):
        kwargs = dict(obj)
        kwargs["events"] = [Event.from_obj(e) for e in obj.get("events", [])]
        return cls(**kwargs)


@dataclass
class MetricsRow:
    """One round's success metrics, in CSV column order."""

    round: int
    action: str
    node: int
    max_delta_add: int
    max_delta_ratio: float
    diameter: float
    stretch: float
    msgs_total: int
    msgs_max_node: int
    id_changes_max: int
    latency: int

    def to_obj(self):
        return {c: getattr(self, c) for c in COLUMNS}


@dataclass
class Trace:
    """A finished (or aborted) run: replayable events plus per-round metrics."""

    config: SimConfig
    events: list
    rows: list
    final: Graph
    reference: Graph
    violation: str | None = None

    def to_obj(self):
        return {"config": self.config.to_obj(),
                "events": [e.to_obj() for e in self.events],
                "rows": [r.to_obj() for r in self.rows],
                "violation": self.violation}


# -- config expansion ----------------------------------------------------------

def validate_config(cfg: SimConfig):
    if cfg.healer not in HEALERS:
        raise BadParams(f"unknown healer {cfg.healer!r} (have {sorted(HEALERS)})")
    if cfg.attack != "script" and cfg.attack not in ATTACKS:
        raise BadParams(f"unknown attack {cfg.attack!r} (have {sorted(ATTACKS)} or script)")
    if cfg.topology not in TOPOLOGIES:
        raise BadParams(f"unknown topology {cfg.topology!r} (have {TOPOLOGIES})")
    if cfg.topology == "pa" and not cfg.n0 > cfg.m >= 1:
        raise BadParams(f"pref-attach needs n0 > m >= 1, got n0={cfg.n0} m={cfg.m}")
    if cfg.topology == "file" and not cfg.graph_file:
        raise BadParams("topology 'file' needs a graph file")
    if cfg.attack == "script" and not (cfg.events or cfg.script_file):
        raise BadParams("attack 'script' needs an event file or inline events")
    if cfg.healer == "ftree" and cfg.topology == "pa" and not cfg.spanning_tree:
        raise BadParams("this healer needs a tree; pass spanning_tree to project one")
    if cfg.rounds is not None and cfg.rounds < 0:
        raise BadParams("rounds must be >= 0")
    if cfg.checks not in ("all", "fast", "off"):
        raise BadParams(f"unknown checks level {cfg.checks!r}")
    if cfg.metrics not in ("full", "degree"):
        raise BadParams(f"unknown metrics level {cfg.metrics!r}")


def build_graph(cfg: SimConfig) -> Graph:
    if cfg.topology == "pa":
        return pref_attach(cfg.n0, cfg.m, random.Random(f"{cfg.seed}:topology"))
    if cfg.topology == "star":
        return star_graph(cfg.n0)
    if cfg.topology == "path":
        return path_graph(cfg.n0)
    if cfg.topology == "tree":
        return complete_kary_tree(cfg.k, cfg.depth)
    with open(cfg.graph_file) as fh:
        return Graph.from_obj(json.load(fh))


def make_healer(cfg: SimConfig):
    cls = HEALERS[cfg.healer]
    if cls is FtreeHealer:
        return FtreeHealer(spanning_tree=cfg.spanning_tree)
    if cls is FgHealer:
        return FgHealer()
    return cls(random_real_ids=cfg.random_real_ids,
               rng=random.Random(f"{cfg.seed}:healer"))


def make_attack(cfg: SimConfig):
    if cfg.attack == "script":
        if cfg.events:
            return Scripted(cfg.events)
        return Scripted.from_json_file(cfg.script_file)
    cls = ATTACKS[cfg.attack]
    if cfg.attack == "level":
        return cls(m=cfg.k - 2)      # sweeps a k-ary tree
    return cls()


# -- metrics -------------------------------------------------------------------

def degree_overshoot(actual: Graph, reference: Graph):
    """(max additive increase, max ratio) of live degree over reference degree,
    across alive nodes; both floored at zero for an empty graph."""
    add, ratio = 0, 0.0
    for v in actual.adj:
        d_live, d_ref = actual.degree(v), reference.degree(v)
        add = max(add, d_live - d_ref)
        if d_ref:
            ratio = max(ratio, d_live / d_ref)
    return add, ratio


def compute_stretch(actual: Graph, reference: Graph):
    """Worst live distance relative to reference distance over alive pairs.

    Pairs unreachable even in the reference are exempt; a pair the reference
    connects but the live graph does not yields the infinite sentinel. With no
    eligible pair (fewer than two alive nodes) the stretch is a neutral 1.0.
    Reference paths may route through dead nodes: that graph never loses
    anything, which is exactly what makes it the yardstick.
    """
    alive = sorted(actual.adj)
    worst, seen = 0.0, False
    for i, x in enumerate(alive):
        d_act = bfs_distances(actual, x)
        d_ref = bfs_distances(reference, x)
        for y in alive[i + 1:]:
            if y not in d_ref:
                continue
            if y not in d_act:
                return INF
            seen = True
            worst = max(worst, d_act[y] / d_ref[y])
    return worst if seen else 1.0


def measure(t, event, report, g, reference, id_counts, heavy=True):
    add, ratio = degree_overshoot(g, reference)
    return MetricsRow(
        round=t,
        action=event.action,
        node=event.node,
        max_delta_add=add,
        max_delta_ratio=ratio,
        diameter=diameter(g) if heavy else NAN,
        stretch=compute_stretch(g, reference) if heavy else NAN,
        msgs_total=report.messages_total,
        msgs_max_node=report.messages_max_node,
        id_changes_max=max(id_counts.values(), default=0),
        latency=report.latency,
    )


# -- invariant checks ----------------------------------------------------------

def check_label_healer(healer):
    """Potential-function health for the label-merging family: healing edges
    live in the graph, the healing structure is a forest (except for the
    all-neighbors baseline, which tolerates cycles), and every node retains
    weight at least 2^(increase/2) and at most the total weight in play."""
    for a, b in healer.heal.edges():
        assert healer.g.has_edge(a, b), f"healing edge ({a},{b}) not in live graph"
    if healer.name != "graphheal":
        comps = connected_components(healer.heal)
        assert healer.heal.num_edges() == len(healer.heal) - len(comps), \
            "healing graph grew a cycle"
    total = sum(healer.weight.values())
    for v in healer.g.nodes():
        rem = retained_weight(healer, v)
        assert rem <= total, f"node {v} retains {rem} > total weight {total}"
        need = 2 ** (healer.degree_increase(v) / 2)
        assert rem >= need - 1e-9, \
            f"node {v} retains {rem} < 2^(delta/2) = {need}"


def deep_check(healer):
    if isinstance(healer, FtreeHealer):
        healer.ft.check()
    elif isinstance(healer, FgHealer):
        healer.fg.check()
    else:
        check_label_healer(healer)


def run_checks(level, g, healer, expect_connected):
    if level == "off":
        return None
    if expect_connected and len(g) >= 2 and not is_connected(g):
        return "live graph disconnected"
    if level != "all":
        return None
    try:
        deep_check(healer)
    except AssertionError as e:
        return f"healer state invalid: {e}"
    return None


# -- the loop ------------------------------------------------------------------

def apply_event(g, reference, healer, event):
    if event.action == "delete":
        if event.node not in g:
            raise BadParams(f"delete of absent node {event.node}")
        survivors = g.remove_node(event.node)
        return healer.heal_deletion(event.node, survivors)
    if event.action == "insert":
        v, nbrs = event.node, list(event.neighbors)
        if v in g:
            raise BadParams(f"insert of existing node {v}")
        absent = [u for u in nbrs if u not in g]
        if absent:
            raise BadParams(f"insert of {v} names absent neighbors {absent}")
        g.add_node(v)
        reference.add_node(v)
        for u in nbrs:
            g.add_edge(v, u)
            reference.add_edge(v, u)
        return healer.note_insertion(v, nbrs)
    raise BadParams(f"unknown action {event.action!r}")


def run(config: SimConfig) -> Trace:
    """Execute one full simulation; see the module docstring for the contract."""
    validate_config(config)
    g = build_graph(config)
    healer = make_healer(config)
    healer.attach(g)             # a spanning-tree healer may thin g here
    reference = g.copy()
    attack = make_attack(config).start(g, healer,
                                       random.Random(f"{config.seed}:attack"))
    expect_connected = is_connected(g)
    id_counts = Counter()
    trace = Trace(config=config, events=[], rows=[], final=g, reference=reference)
    t = 0
    while config.rounds is None or t < config.rounds:
        if not len(g):
            break
        event = attack.next_event()
        if event is None:
            break
        t += 1
        try:
            report = apply_event(g, reference, healer, event)
        except Exception as e:
            e.partial_trace = trace
            raise
        attack.observe(event, report)
        if event.action == "insert" and not event.neighbors:
            expect_connected = False
        for u in report.id_changed:
            id_counts[u] += 1
        trace.events.append(event)
        trace.rows.append(measure(t, event, report, g, reference, id_counts,
                                  heavy=config.metrics == "full"))
        problem = run_checks(config.checks, g, healer, expect_connected)
        if problem:
            trace.violation = f"round {t}: {problem}"
            break
    return trace


def replay(trace: Trace) -> Trace:
    """Re-run a finished trace's events as a scripted attack; the result must
    match the original row for row."""
    cfg = SimConfig.from_obj(trace.config.to_obj())
    cfg.attack = "script"
    cfg.script_file = ""
    cfg.events = list(trace.events)
    return run(cfg)
