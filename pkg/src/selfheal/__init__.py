"""Self-healing reconfigurable networks: healers, adversaries, and a round-based simulator.

An adversary deletes (or inserts) one node per round; a healing algorithm responds
by adding a few edges among the survivors. The library provides the healing
algorithms, the attack strategies, the metrics that judge them (degree increase,
diameter, stretch, message counts), and a deterministic simulation harness with a
command-line front end.
"""

__version__ = "0.1.0"
