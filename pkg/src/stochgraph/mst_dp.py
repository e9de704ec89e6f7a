"""Alternate expected-MST estimator: recursive conditioning over point order.

Points are globally ordered u_1..u_m (descending total mass, index
tie-break).  Conditioning on "all nodes realize within the suffix
{u_i..u_m}", the recursion peels off whether anything sits at u_i; the inner
recursion reorders the suffix by distance from u_i and peels off the furthest
occupied point r_j.  At the leaf, something sits at u_i, something at r_j and
everything lives between them, so the conditional MST is squeezed between
d(u_i, r_j) and n * d(u_i, r_j): an ideal Monte Carlo target.

Because the estimate is a weighted sum over leaves with exactly computable
probability weights (each point has a single owning node after splitting),
this method has no truncation error at all and cross-validates the
home-decomposition estimator.
"""

from __future__ import annotations

import time
from typing import Optional

import numpy as np

from .cc import SplitSpace, split_points
from .errors import DomainError
from .mc import (
    EstimateReport,
    SampleBudget,
    TermReport,
    apply_budget_scale,
    chernoff_budget,
    combine_terms,
    estimate_conditional,
)
from .model import EventSpec, StochasticGraph
from .oracle import Functional, FunctionalEvaluator


def _mass_in(g: StochasticGraph, w: int, pts: set[int]) -> float:
    """Probability that node w is inside ``pts`` (or absent, if allowed)."""
    inside = float(g.probs[w, sorted(pts)].sum())
    if g.presence_mode == "existential":
        inside += g.absent_mass(w)
    return inside


def estimate_emst_dp(
    g: StochasticGraph,
    epsilon: float,
    seed: int,
    *,
    budget_scale: float = 1.0,
    budget_cap: Optional[int] = None,
    threads: int = 1,
    delta: Optional[float] = None,
) -> EstimateReport:
    """Expected MST length by recursive conditioning with MC leaves.

    Works in both presence modes; "inside the suffix" reads as "inside or
    absent" when nodes may be missing.
    """
    if not 0.0 < epsilon <= 1.0:
        raise DomainError("epsilon must be in (0, 1]")
    t0 = time.perf_counter()
    report = EstimateReport(
        estimator="mst-dp",
        value=0.0,
        epsilon=epsilon,
        seed=seed,
        epsilon_mc=epsilon / 2.0,
        budget_scale=budget_scale,
        budget_cap=budget_cap,
        threads=threads,
    )
    if g.n == 1:
        report.terms.append(TermReport("trivial", 0.0, "exact", probability=1.0))
        report.elapsed = time.perf_counter() - t0
        return report

    sp: SplitSpace = split_points(g)
    work = sp.graph
    m, n = work.m, work.n
    space = work.space
    mass = work.probs.sum(axis=0)
    order = sorted(range(m), key=lambda s: (-float(mass[s]), s))
    report.extras["point_order"] = [space.point_ids[s] for s in order]

    eps_mc = epsilon / 2.0
    max_leaves = m * (m - 1) // 2
    delta_each = delta if delta is not None else 1.0 / (8.0 * max(1, max_leaves))
    evaluator = FunctionalEvaluator(space, Functional.MST)
    outer_weights: list[float] = []

    outer_weight = 1.0  # Pr[nothing yet at u_1..u_{i-1} | their suffix events]
    for pos in range(m):
        if outer_weight <= 0.0:
            outer_weights.append(0.0)
            continue
        ui = order[pos]
        suffix = order[pos:]
        suffix_set = set(suffix)
        vi = sp.owner[ui]
        if vi < 0 or work.probs[vi, ui] <= 0.0:
            outer_weights.append(0.0)
            continue
        g_vi = _mass_in(work, vi, suffix_set)
        p_exists = float(work.probs[vi, ui]) / g_vi if g_vi > 0.0 else 0.0
        top_w = outer_weight * p_exists
        outer_weight *= 1.0 - p_exists
        outer_weights.append(top_w)
        if top_w <= 0.0:
            continue

        # Inner reorder of the suffix by distance from u_i (u_i pinned first).
        r_order = [ui] + sorted(
            (s for s in suffix if s != ui),
            key=lambda s: (float(space.dist[ui, s]), s),
        )
        inner_weight = 1.0  # Pr[nothing yet at r_m..r_{j+1} | ...]
        for j in range(len(r_order) - 1, 0, -1):
            if inner_weight <= 0.0:
                break
            rj = r_order[j]
            wj = sp.owner[rj]
            prefix = set(r_order[: j + 1])
            if wj < 0 or wj == vi or work.probs[wj, rj] <= 0.0:
                continue  # nothing can newly appear at r_j
            g_wj = _mass_in(work, wj, prefix)
            p_here = float(work.probs[wj, rj]) / g_wj if g_wj > 0.0 else 0.0
            leaf_w = top_w * inner_weight * p_here
            inner_weight *= 1.0 - p_here
            if leaf_w <= 0.0:
                continue

            d_ij = float(space.dist[ui, rj])
            name = f"dp({space.point_ids[ui]},{space.point_ids[rj]})"
            if d_ij == 0.0:
                report.terms.append(
                    TermReport(name, 0.0, "exact", probability=leaf_w, mean=0.0)
                )
                continue
            allowed: dict[str, object] = {
                work.node_ids[vi]: space.point_ids[ui],
                work.node_ids[wj]: space.point_ids[rj],
            }
            absent = {work.node_ids[vi]: False, work.node_ids[wj]: False}
            dead = False
            for w in range(n):
                if w in (vi, wj):
                    continue
                pts = [
                    space.point_ids[s] for s in prefix if work.probs[w, s] > 0.0
                ]
                if not pts:
                    if work.presence_mode == "certain":
                        dead = True  # unreachable: the chain weight is 0 here
                        break
                    pts = [space.point_ids[rj]]  # zero mass: node must be absent
                allowed[work.node_ids[w]] = pts
            if dead:
                continue
            full = chernoff_budget(n * d_ij, d_ij, eps_mc, delta_each)
            used = apply_budget_scale(full, budget_scale, budget_cap)
            budget = SampleBudget(used, n * d_ij, d_ij, eps_mc, delta_each)
            mean, samples = estimate_conditional(
                work,
                Functional.MST,
                EventSpec(allowed=allowed, allow_absent=absent),
                budget,
                seed=seed,
                tag=f"mst-dp/{space.point_ids[ui]}/{space.point_ids[rj]}",
                threads=threads,
                evaluator=evaluator,
            )
            report.terms.append(
                TermReport(
                    name,
                    leaf_w * mean,
                    "monte-carlo",
                    probability=leaf_w,
                    mean=mean,
                    samples=samples,
                    full_budget=full,
                )
            )

    report.extras["outer_weights"] = outer_weights
    report.extras["residual_weight"] = outer_weight
    report.value = combine_terms(report.terms)
    report.elapsed = time.perf_counter() - t0
    return report
