import random
import unittest

import networkx as nx

from selfheal import graphs
from selfheal.graphs import Graph


def to_nx(g):
	h = nx.Graph()
	h.add_nodes_from(g.nodes())
	h.add_edges_from(g.edges())
	return h


class GraphBasics(unittest.TestCase):
	def test_add_remove(self):
		g = Graph(nodes=[0, 1, 2], edges=[(0, 1), (1, 2)])
		self.assertEqual(g.degree(1), 2)
		nbrs = g.remove_node(1)
		self.assertEqual(nbrs, {0, 2})
		self.assertEqual(g.edges(), [])
		self.assertEqual(g.nodes(), [0, 2])

	def test_no_self_loops(self):
		g = Graph()
		with self.assertRaises(ValueError):
			g.add_edge(3, 3)

	def test_roundtrip_json_obj(self):
		g = graphs.star_graph(5)
		obj = g.to_obj()
		self.assertEqual(obj["nodes"], [0, 1, 2, 3, 4])
		self.assertEqual(obj["edges"], [[0, 1], [0, 2], [0, 3], [0, 4]])
		g2 = Graph.from_obj(obj)
		self.assertEqual(g2.edges(), g.edges())


class Traversals(unittest.TestCase):
	def test_bfs_against_networkx(self):
		rng = random.Random(7)
		for n in (10, 30, 60):
			g = graphs.pref_attach(n, 2, rng)
			ref = dict(nx.shortest_path_length(to_nx(g), source=0))
			self.assertEqual(graphs.bfs_distances(g, 0), ref)

	def test_diameter_against_networkx(self):
		rng = random.Random(3)
		for n in (8, 20, 40):
			g = graphs.pref_attach(n, 2, rng)
			self.assertEqual(graphs.diameter(g), nx.diameter(to_nx(g)))

	def test_diameter_disconnected_is_inf(self):
		g = Graph(nodes=[0, 1, 2], edges=[(0, 1)])
		self.assertEqual(graphs.diameter(g), graphs.INF)
		self.assertFalse(graphs.is_connected(g))
		self.assertEqual(len(graphs.connected_components(g)), 2)

	def test_trivial_sizes(self):
		self.assertEqual(graphs.diameter(Graph()), 0)
		self.assertEqual(graphs.diameter(Graph(nodes=[4])), 0)
		self.assertTrue(graphs.is_connected(Graph(nodes=[4])))


class Topologies(unittest.TestCase):
	def test_kary_tree_shape(self):
		g = graphs.complete_kary_tree(4, 3)
		self.assertEqual(len(g), 85)			# 1 + 4 + 16 + 64
		self.assertEqual(g.num_edges(), 84)
		self.assertTrue(graphs.is_connected(g))
		self.assertTrue(nx.is_tree(to_nx(g)))
		# root has 4 children, internal nodes 5 neighbors, leaves 1
		self.assertEqual(g.degree(0), 4)
		self.assertEqual(sorted(g.neighbors(5)), [1, 21, 22, 23, 24])

	def test_path_and_star(self):
		p = graphs.path_graph(5)
		self.assertEqual(graphs.diameter(p), 4)
		s = graphs.star_graph(9)
		self.assertEqual(s.degree(0), 8)
		self.assertEqual(graphs.diameter(s), 2)

	def test_pref_attach_basic(self):
		g = graphs.pref_attach(3, 2, random.Random(0))
		self.assertEqual(g.edges(), [(0, 1), (0, 2), (1, 2)])	# n = m+1 seed clique
		g = graphs.pref_attach(100, 2, random.Random(5))
		self.assertEqual(len(g), 100)
		self.assertEqual(g.num_edges(), 1 + 2 * 98)
		self.assertTrue(graphs.is_connected(g))

	def test_pref_attach_deterministic(self):
		a = graphs.pref_attach(64, 2, random.Random(11))
		b = graphs.pref_attach(64, 2, random.Random(11))
		self.assertEqual(a.edges(), b.edges())

	def test_pref_attach_heavy_tail(self):
		# hubs should clearly beat the median degree on most instances
		import statistics
		wins = 0
		for seed in range(30):
			g = graphs.pref_attach(100, 2, random.Random(seed))
			degs = [g.degree(v) for v in g.nodes()]
			if max(degs) > 2 * statistics.median(degs):
				wins += 1
		self.assertGreaterEqual(wins, 28)

	def test_bfs_spanning_tree(self):
		g = graphs.pref_attach(40, 3, random.Random(2))
		t = graphs.bfs_spanning_tree(g)
		self.assertEqual(len(t), 40)
		self.assertEqual(t.num_edges(), 39)
		self.assertTrue(nx.is_tree(to_nx(t)))
		for u, v in t.edges():
			self.assertTrue(g.has_edge(u, v))

	def test_bad_params(self):
		with self.assertRaises(ValueError):
			graphs.pref_attach(2, 2, random.Random(0))
		with self.assertRaises(ValueError):
			graphs.complete_kary_tree(0, 2)
		with self.assertRaises(ValueError):
			graphs.bfs_spanning_tree(Graph(nodes=[0, 1]))


if __name__ == "__main__":
	unittest.main()
