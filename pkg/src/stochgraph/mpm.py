"""Expected-perfect-matching estimator via clustered homes.

The home is a disjoint family of point clusters found by a single-linkage
sweep: grow a radius t, merge components of the graph on {d(s,s') <= 2t}, and
stop at the first t where every node keeps all but a theta-fraction of its
mass inside one cluster (its home) and every cluster is home to an even
number of nodes.  The estimate then mirrors the MST decomposition: an
all-home term, per-node near-escape terms, and exact far-field terms, with
escapes measured from the node's own cluster.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, InternalAssertionError
from .mc import (
    EstimateReport,
    SampleBudget,
    TermReport,
    apply_budget_scale,
    chernoff_budget,
    combine_terms,
    estimate_conditional,
)
from .model import CERTAIN, EventSpec, StochasticGraph
from .oracle import Functional, FunctionalEvaluator


@dataclass(frozen=True)
class HomeClustering:
    """Disjoint point clusters with per-node home assignment.

    ``merge_radius`` is the sweep radius t at acceptance (clusters are
    components of {d <= 2t}); ``max_diameter`` is the largest cluster
    diameter D; ``theta`` the per-node escape bound eps / (16 n m^3).
    """

    clusters: tuple[tuple[int, ...], ...]
    home_of: tuple[int, ...]  # node index -> cluster index
    merge_radius: float
    max_diameter: float
    theta: float

    def to_dict(self, g: StochasticGraph) -> dict:
        return {
            "clusters": [
                [g.space.point_ids[s] for s in cluster] for cluster in self.clusters
            ],
            "home_of": {
                g.node_ids[v]: ci for v, ci in enumerate(self.home_of)
            },
            "merge_radius": self.merge_radius,
            "max_diameter": self.max_diameter,
            "theta": self.theta,
        }


class _DSU:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _components(dsu: _DSU, m: int) -> list[list[int]]:
    groups: dict[int, list[int]] = {}
    for s in range(m):
        groups.setdefault(dsu.find(s), []).append(s)
    return [groups[r] for r in sorted(groups)]


def find_home_clusters(g: StochasticGraph, epsilon: float) -> HomeClustering:
    """Single-linkage sweep stopping at the first radius where both hold:
    every node has a cluster with all but theta of its mass, and every
    cluster is home to an even number of nodes.

    The sweep always terminates: once everything has merged into one
    component the first condition holds with full mass and the second
    reduces to n being even.
    """
    if not 0.0 < epsilon <= 1.0:
        raise DomainError("epsilon must be in (0, 1]")
    if g.presence_mode != CERTAIN:
        raise DomainError("home clustering requires certain presence mode")
    if g.n % 2 != 0:
        raise DomainError("perfect matchings need an even number of nodes")
    m = g.m
    theta = epsilon / (16.0 * g.n * m**3)
    if theta >= 0.5:
        raise InternalAssertionError("theta must stay below 1/2 for home uniqueness")

    def check(dsu: _DSU):
        comps = _components(dsu, m)
        home_of = []
        for v in range(g.n):
            home = None
            for ci, comp in enumerate(comps):
                if float(g.probs[v, comp].sum()) >= 1.0 - theta:
                    home = ci
                    break
            if home is None:
                return None
            home_of.append(home)
        counts = [0] * len(comps)
        for ci in home_of:
            counts[ci] += 1
        if any(c % 2 for c in counts):
            return None
        return comps, home_of

    lengths: dict[float, list[tuple[int, int]]] = {}
    for a in range(m):
        for b in range(a + 1, m):
            lengths.setdefault(float(g.space.dist[a, b]), []).append((a, b))

    dsu = _DSU(m)
    radius = 0.0
    if 0.0 in lengths:
        for a, b in lengths.pop(0.0):
            dsu.union(a, b)
    result = check(dsu)
    for length in sorted(lengths):
        if result is not None:
            break
        for a, b in lengths[length]:
            dsu.union(a, b)
        radius = length / 2.0
        result = check(dsu)
    if result is None:
        raise InternalAssertionError("cluster sweep failed to terminate")
    comps, home_of = result
    diameters = [
        float(g.space.dist[np.ix_(comp, comp)].max()) for comp in comps
    ]
    return HomeClustering(
        clusters=tuple(tuple(comp) for comp in comps),
        home_of=tuple(home_of),
        merge_radius=radius,
        max_diameter=max(diameters),
        theta=theta,
    )


def estimate_empm(
    g: StochasticGraph,
    epsilon: float,
    seed: int,
    *,
    budget_scale: float = 1.0,
    budget_cap: Optional[int] = None,
    threads: int = 1,
    delta: Optional[float] = None,
) -> EstimateReport:
    """FPRAS estimate of the expected minimum perfect matching length."""
    if not 0.0 < epsilon <= 1.0:
        raise DomainError("epsilon must be in (0, 1]")
    if g.presence_mode != CERTAIN:
        raise DomainError("this estimator requires certain presence mode")
    if g.n % 2 != 0 or g.n < 2:
        raise DomainError("perfect matchings need an even number of nodes (>= 2)")
    t0 = time.perf_counter()
    clustering = find_home_clusters(g, epsilon)
    D = clustering.max_diameter
    report = EstimateReport(
        estimator="mpm",
        value=0.0,
        epsilon=epsilon,
        seed=seed,
        epsilon_mc=epsilon / 2.0,
        budget_scale=budget_scale,
        budget_cap=budget_cap,
        threads=threads,
    )
    report.extras["homes"] = clustering.to_dict(g)

    home_pts = [list(clustering.clusters[clustering.home_of[v]]) for v in range(g.n)]
    home_ids = [
        [g.space.point_ids[s] for s in pts] for pts in home_pts
    ]
    p_home = np.array([float(g.probs[v, home_pts[v]].sum()) for v in range(g.n)])

    def prod_except(v: Optional[int]) -> float:
        out = 1.0
        for u in range(g.n):
            if u != v:
                out *= float(p_home[u])
        return out

    near_threshold = (g.n / epsilon) * D
    d_to_own_home = [
        g.space.dist[:, home_pts[v]].min(axis=1) for v in range(g.n)
    ]
    near_pts = [
        [
            s
            for s in range(g.m)
            if s not in clustering.clusters[clustering.home_of[v]]
            and d_to_own_home[v][s] < near_threshold
        ]
        for v in range(g.n)
    ]
    far_pts = [
        [
            s
            for s in range(g.m)
            if s not in clustering.clusters[clustering.home_of[v]]
            and d_to_own_home[v][s] >= near_threshold
        ]
        for v in range(g.n)
    ]

    eps_mc = epsilon / 2.0
    evaluator = FunctionalEvaluator(g.space, Functional.MPM)
    prob_all = prod_except(None)
    p_near = np.array(
        [float(g.probs[v, near_pts[v]].sum()) if near_pts[v] else 0.0 for v in range(g.n)]
    )
    near_nodes = [v for v in range(g.n) if p_near[v] > 0.0 and prod_except(v) > 0.0]
    mc_terms = int(prob_all > 0.0 and D > 0.0) + len(near_nodes)
    delta_each = delta if delta is not None else 1.0 / (8.0 * max(1, mc_terms))

    # All-home term: every cluster realizes its (even) set of homed nodes.
    if prob_all > 0.0:
        if D == 0.0:
            report.terms.append(
                TermReport("all-home", 0.0, "exact", probability=prob_all, mean=0.0)
            )
        else:
            u_bound = g.n * D
            mu_lb = epsilon * D / (64.0 * g.n * g.m**5)
            full = chernoff_budget(u_bound, mu_lb, eps_mc, delta_each)
            used = apply_budget_scale(full, budget_scale, budget_cap)
            budget = SampleBudget(used, u_bound, mu_lb, eps_mc, delta_each)
            mean, samples = estimate_conditional(
                g,
                Functional.MPM,
                EventSpec(allowed={g.node_ids[v]: home_ids[v] for v in range(g.n)}),
                budget,
                seed=seed,
                tag="mpm/all-home",
                threads=threads,
                evaluator=evaluator,
            )
            report.terms.append(
                TermReport(
                    "all-home",
                    prob_all * mean,
                    "monte-carlo",
                    probability=prob_all,
                    mean=mean,
                    samples=samples,
                    full_budget=full,
                    possibly_negligible=mean < 0.5 * mu_lb,
                )
            )
    else:
        report.terms.append(TermReport("all-home", 0.0, "exact", probability=0.0))

    for v in range(g.n):
        vname = g.node_ids[v]
        others = prod_except(v)
        if v in near_nodes:
            prob = float(p_near[v]) * others
            u_bound = (g.n / epsilon) * D + (g.n + 1) * D
            mu_lb = epsilon * D / (128.0 * g.n * g.m**5)
            full = chernoff_budget(u_bound, mu_lb, eps_mc, delta_each)
            used = apply_budget_scale(full, budget_scale, budget_cap)
            budget = SampleBudget(used, u_bound, mu_lb, eps_mc, delta_each)
            allowed = {g.node_ids[u]: home_ids[u] for u in range(g.n)}
            allowed[vname] = [g.space.point_ids[s] for s in near_pts[v]]
            mean, samples = estimate_conditional(
                g,
                Functional.MPM,
                EventSpec(allowed=allowed),
                budget,
                seed=seed,
                tag=f"mpm/near/{vname}",
                threads=threads,
                evaluator=evaluator,
            )
            report.terms.append(
                TermReport(
                    f"near({vname})",
                    prob * mean,
                    "monte-carlo",
                    probability=prob,
                    mean=mean,
                    samples=samples,
                    full_budget=full,
                    possibly_negligible=mean < 0.5 * mu_lb,
                )
            )
        if far_pts[v] and others > 0.0:
            term = math.fsum(
                float(g.probs[v, s]) * others * float(d_to_own_home[v][s])
                for s in far_pts[v]
                if g.probs[v, s] > 0.0
            )
            if term > 0.0:
                report.terms.append(TermReport(f"far({vname})", term, "far-field"))

    report.value = combine_terms(report.terms)
    report.flags["epsilon_split"] = "half to sampling error, half to truncation"
    report.elapsed = time.perf_counter() - t0
    return report
