"""Ground-truth expectations by exhaustive enumeration.

The oracle sums Pr[r] * f(r) over every realization; exponential, but exact,
and the reference every estimator is compared against.
"""

import math

import numpy as np

from stochgraph import (
    EventSpec,
    Functional,
    MetricSpace,
    StochasticGraph,
    exact_expectation,
    exact_term,
)

space = MetricSpace(
    ["p0", "p1", "p2"],
    coords=np.array([[0.0, 0.0], [1.0, 0.0], [5.0, 0.0]]),
)
g = StochasticGraph(
    ["v0", "v1", "v2", "v3"],
    space,
    {
        "v0": {"p0": 0.6, "p1": 0.4},
        "v1": {"p0": 0.3, "p1": 0.7},
        "v2": {"p1": 0.5, "p2": 0.5},
        "v3": {"p2": 1.0},
    },
)

# Unconditional expectations of the three structures.
for f in (Functional.MST, Functional.MPM, Functional.CC):
    print(f"E[{f.value}] =", exact_expectation(g, f))

# Conditioning on a product event: E[f | event] and Pr[event] * E[f | event].
ev = EventSpec(allowed={"v2": ["p1"]})
print("E[MST | v2@p1] =", exact_expectation(g, Functional.MST, ev))
print("term =", exact_term(g, Functional.MST, ev))

# Law of total expectation: terms over a partition add up exactly.
parts = [
    exact_term(g, Functional.MST, EventSpec(allowed={"v0": [p]}))
    for p in ("p0", "p1")
]
print("sum of partition terms =", math.fsum(parts))
print("unconditional          =", exact_expectation(g, Functional.MST))
