"""Estimator-versus-oracle campaign over generated instances.

Generates a small mixed suite, runs every estimator across seeds, and prints
the per-estimator success fraction at the (1 +- eps) tolerance.  Capped
budgets keep this quick; see the README for the budget discussion.
"""

from stochgraph.campaign import run_campaign
from stochgraph.generate import gen_graph

suite = [
    ("uniform", gen_graph("euclidean-uniform", 3, 4, 1)),
    ("metric", gen_graph("random-metric", 4, 4, 2)),
    ("separated", gen_graph("home-separated", 4, 5, 3)),
    ("colocated", gen_graph("colocated-mass", 4, 4, 4)),
]

result = run_campaign(
    suite,
    ["mst-home", "mst-dp", "mpm", "cc"],
    seeds=range(5),
    epsilon=0.25,
    budget_cap=5_000,
)

print(f"{'instance':10s} {'estimator':9s} {'seed':>4s} {'estimate':>12s} "
      f"{'oracle':>12s} {'rel err':>9s} pass")
for row in result.rows:
    print(f"{row.instance:10s} {row.estimator:9s} {row.seed:4d} "
          f"{row.estimate:12.6g} {row.oracle:12.6g} {row.rel_err:9.2%} "
          f"{'yes' if row.passed else 'NO'}")

print()
for est, frac in result.aggregate().items():
    print(f"{est}: {frac:.0%} of runs within (1 +- 0.25) of the oracle")
