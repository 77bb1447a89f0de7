"""Attack policies: picks, macro expansions, and the lower-bound schedules."""

import math
import random

import pytest

from selfheal import graphs
from selfheal.adversary import (
    ATTACKS,
    Event,
    LevelAttack,
    LogLogAttack,
    MaxNode,
    NeighborOfMax,
    Scripted,
    StarAttack,
    Strategy1,
    UniformRandom,
    WrongTopology,
    star_stretch_floor_graph,
    star_stretch_floor_tree,
)
from selfheal.dash import DashHealer
from selfheal.graphs import Graph


def drive(g, healer, attack, on_event=None):
    """Run the attack to completion against the healer; returns the events."""
    events = []
    while True:
        ev = attack.next_event()
        if ev is None:
            return events
        if on_event:
            on_event(ev)
        if ev.action == "delete":
            survivors = g.remove_node(ev.node)
            report = healer.heal_deletion(ev.node, survivors)
        else:
            g.add_node(ev.node)
            for u in ev.neighbors:
                g.add_edge(ev.node, u)
            report = healer.note_insertion(ev.node, ev.neighbors)
        attack.observe(ev, report)
        events.append(ev)


def fresh(g):
    healer = DashHealer().attach(g)
    return g, healer, random.Random(0)


# --- memoryless policies ------------------------------------------------------

def test_max_node_picks_center_of_k13():
    g, healer, rng = fresh(graphs.star_graph(4))
    att = MaxNode().start(g, healer, rng)
    assert att.next_event() == Event("delete", 0)


def test_max_node_tie_breaks_low_id():
    g, healer, rng = fresh(graphs.path_graph(4))    # degrees 1,2,2,1
    att = MaxNode().start(g, healer, rng)
    assert att.next_event() == Event("delete", 1)


def test_neighbor_of_max_uniformity():
    g, healer, _ = fresh(graphs.star_graph(4))
    att = NeighborOfMax().start(g, healer, random.Random(42))
    counts = {1: 0, 2: 0, 3: 0}
    for _ in range(1000):
        counts[att.pick().node] += 1
    expected = 1000 / 3
    chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
    assert chi2 < 13.82           # df=2 critical value at the 0.1% level


def test_uniform_random_exhausts_graph():
    g, healer, rng = fresh(graphs.pref_attach(12, 2, random.Random(1)))
    att = UniformRandom().start(g, healer, rng)
    events = drive(g, healer, att)
    assert len(events) == 12 and len(g) == 0


def test_scripted_replay_and_done():
    g, healer, rng = fresh(graphs.path_graph(3))
    att = Scripted([{"action": "delete", "node": 1}]).start(g, healer, rng)
    assert att.next_event() == Event("delete", 1)
    g.remove_node(1)
    assert att.next_event() is None


def test_scripted_rejects_absent_node():
    g, healer, rng = fresh(graphs.path_graph(2))
    att = Scripted([Event("delete", 7)]).start(g, healer, rng)
    with pytest.raises(ValueError):
        att.next_event()


def test_determinism_of_seeded_streams():
    def stream(seed):
        g, healer, _ = fresh(graphs.pref_attach(24, 2, random.Random(3)))
        att = NeighborOfMax().start(g, healer, random.Random(seed))
        return [e.node for e in drive(g, healer, att)]

    assert stream(9) == stream(9)
    assert stream(9) != stream(10)


# --- macro-operations ---------------------------------------------------------

def test_prune_two_node_subtree_deepest_first():
    g, healer, rng = fresh(Graph(edges=[(0, 1), (1, 2), (0, 3)]))
    att = MaxNode().start(g, healer, rng)
    order = []
    for ev in att._prune(0, 1):
        assert g.degree(ev.node) <= 1        # only ever deletes a leaf
        order.append(ev.node)
        healer.heal_deletion(ev.node, g.remove_node(ev.node))
    assert order == [2, 1]


def test_graft_keeps_degree_increase():
    g, healer, rng = fresh(Graph(edges=[(0, 1), (1, 2), (1, 3)]))
    att = MaxNode().start(g, healer, rng)
    before = (healer.degree_increase(0), healer.degree_increase(2))
    for ev in att._graft(0, 2):
        healer.heal_deletion(ev.node, g.remove_node(ev.node))
    assert g.has_edge(0, 2)
    assert (healer.degree_increase(0), healer.degree_increase(2)) == before


# --- level attack -------------------------------------------------------------

def test_level_attack_root_only():
    g, healer, rng = fresh(graphs.complete_kary_tree(3, 1))
    att = LevelAttack(m=1).start(g, healer, rng)
    events = drive(g, healer, att)
    assert events == [Event("delete", 0)]
    assert len(g) == 3


def test_level_attack_rejects_wrong_topology():
    g, healer, rng = fresh(graphs.pref_attach(21, 2, random.Random(0)))
    with pytest.raises(WrongTopology):
        LevelAttack(m=1).start(g, healer, rng)


@pytest.mark.parametrize("m,depth", [(1, 2), (2, 2), (2, 3)])
def test_level_attack_forces_depth_degree_increase(m, depth):
    g, healer, rng = fresh(graphs.complete_kary_tree(m + 2, depth))
    att = LevelAttack(m=m).start(g, healer, rng)
    drive(g, healer, att)
    assert max(healer.degree_increase(v) for v in g.nodes()) >= depth


# --- strategy-1 and the log-log schedule ---------------------------------------

def test_strategy1_forces_two():
    g, healer, rng = fresh(graphs.complete_kary_tree(3, 2))
    att = Strategy1().start(g, healer, rng)
    drive(g, healer, att)
    assert max(healer.degree_increase(v) for v in g.nodes()) >= 2


def test_strategy1_rejects_wrong_topology():
    g, healer, rng = fresh(graphs.complete_kary_tree(3, 3))
    with pytest.raises(WrongTopology):
        Strategy1().start(g, healer, rng)


def test_loglog_three_levels_is_strategy1():
    g, healer, rng = fresh(graphs.complete_kary_tree(3, 2))
    att = LogLogAttack().start(g, healer, rng)
    drive(g, healer, att)
    n0 = 13
    assert max(healer.degree_increase(v) for v in g.nodes()) >= math.log2(math.log(n0, 3))


def test_loglog_six_levels_reaches_target():
    g = graphs.complete_kary_tree(3, 5)      # 3·2^1 levels, 364 nodes
    n0 = len(g)
    healer = DashHealer().attach(g)
    att = LogLogAttack().start(g, healer, random.Random(0))
    drive(g, healer, att)
    target = math.log2(math.log(n0, 3))
    assert max(healer.degree_increase(v) for v in g.nodes()) >= target


def test_loglog_rejects_wrong_level_count():
    g, healer, rng = fresh(graphs.complete_kary_tree(3, 3))   # 4 levels
    with pytest.raises(WrongTopology):
        LogLogAttack().start(g, healer, rng)


# --- star attack ---------------------------------------------------------------

def test_star_attack_deletes_hub():
    g, healer, rng = fresh(graphs.star_graph(6))
    att = StarAttack().start(g, healer, rng)
    events = drive(g, healer, att)
    assert events == [Event("delete", 0)]
    assert graphs.is_connected(g)


def test_star_attack_rejects_non_star():
    g, healer, rng = fresh(graphs.path_graph(5))
    with pytest.raises(WrongTopology):
        StarAttack().start(g, healer, rng)


def test_star_stretch_floors():
    assert star_stretch_floor_graph(82, 3) == pytest.approx(1.5)
    assert star_stretch_floor_tree(64, 3) == pytest.approx(1.0)
    assert star_stretch_floor_tree(3, 3) <= 0          # vacuous small case


def test_registry_names():
    assert set(ATTACKS) == {"max", "nmax", "random", "level", "loglog", "star"}
