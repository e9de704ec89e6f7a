"""Expected minimum perfect matching via clustered homes.

The home is a family of disjoint clusters, each holding an even number of
nodes with near-certainty: under "everyone home" the matching decomposes
inside clusters, and single escapes are handled near/far like the MST case.
"""

import numpy as np

from stochgraph import (
    Functional,
    MetricSpace,
    StochasticGraph,
    estimate_empm,
    exact_expectation,
    find_home_clusters,
)

# Two pairs of sites 100 apart, plus a sliver of cross-cluster mass small
# enough (below eps / (16 n m^3)) that the sweep keeps the clusters apart
# and the escape is priced by the exact far-field term.
space = MetricSpace(
    ["p0", "p1", "p2", "p3"],
    coords=np.array([[0.0, 0.0], [0.5, 0.0], [100.0, 0.0], [100.5, 0.0]]),
)
g = StochasticGraph(
    ["v0", "v1", "v2", "v3"],
    space,
    {
        "v0": {"p0": 0.99999, "p2": 1e-5},
        "v1": {"p1": 1.0},
        "v2": {"p2": 1.0},
        "v3": {"p3": 1.0},
    },
)

eps = 0.25
hc = find_home_clusters(g, eps)
print("merge radius:", hc.merge_radius, " max cluster diameter:", hc.max_diameter)
for ci, cluster in enumerate(hc.clusters):
    members = [space.point_ids[s] for s in cluster]
    homed = [g.node_ids[v] for v in range(g.n) if hc.home_of[v] == ci]
    print(f"  cluster {ci}: points {members}, homes {homed}")

oracle = exact_expectation(g, Functional.MPM)
report = estimate_empm(g, eps, seed=3, budget_cap=20_000)
print("oracle   E[MPM] =", oracle)
print("estimate E[MPM] =", report.value)
for term in report.terms:
    print(f"  {term.name:14s} {term.method:12s} value={term.value:.6g}")
