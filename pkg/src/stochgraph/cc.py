"""Expected-cycle-cover estimator conditioned on nearest-neighbor events.

Decomposition: let L be the longest edge of the nearest-neighbor graph of a
realization.  Summed over point pairs e = (s, t),

    E[CC] = sum_e  Pr[L = e] * E[CC | L = e]

and each edge term splits by inclusion-exclusion over "t is s's nearest
neighbor and e is longest" (A_s(t)), the symmetric A_t(s), and their
conjunction.  Conditioned on the plain nearest-neighbor event N_s(t) the
sampler is cheap and exact, and the longest-edge part rides along as an
indicator inside the sample average.

Points shared by several nodes are first split into co-located copies so each
point has a unique owning node; all distances are preserved, only the edge
tie-breaking order is refined, so solver values are unchanged.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import DomainError, InternalAssertionError
from .mc import (
    EstimateReport,
    TermReport,
    apply_budget_scale,
    combine_terms,
    run_conditional_mc,
)
from .model import EventSpec, MetricSpace, StochasticGraph
from .rng import SampleStream
from .sampling import ConditionalSampler
from .solvers import EdgeKey, _cc_indices, _nn_indices

_SLACK = 1e-9  # relative float slack in per-sample sandwich assertions


@dataclass(frozen=True)
class SplitSpace:
    """Derived graph in which every point has at most one owning node."""

    graph: StochasticGraph
    owner: tuple[int, ...]   # split point index -> node index (-1 unowned)
    origin: tuple[int, ...]  # split point index -> original point index
    source: StochasticGraph

    def point_id(self, s: int) -> str:
        return self.graph.space.point_ids[s]


def split_points(g: StochasticGraph) -> SplitSpace:
    """Copy each point once per node that may realize there.

    Copies are co-located (zero distance); the canonical point order of the
    new space is the deterministic tie-breaker standing in for the usual
    "no two edges have equal length" assumption.
    """
    ids: list[str] = []
    origin: list[int] = []
    owner: list[int] = []
    for s in range(g.m):
        owners = [v for v in range(g.n) if g.probs[v, s] > 0.0]
        if len(owners) <= 1:
            ids.append(g.space.point_ids[s])
            origin.append(s)
            owner.append(owners[0] if owners else -1)
        else:
            for v in owners:
                ids.append(f"{g.space.point_ids[s]}~{g.node_ids[v]}")
                origin.append(s)
                owner.append(v)
    origin_arr = np.asarray(origin)
    dist = g.space.dist[np.ix_(origin_arr, origin_arr)].copy()
    coords = g.space.coords[origin_arr] if g.space.coords is not None else None
    space = MetricSpace(ids, dist=dist, coords=None, validate=False)
    if coords is not None:
        space.coords = coords
    probs = np.zeros((g.n, len(ids)))
    for sp_idx, (v, s) in enumerate(zip(owner, origin)):
        if v >= 0:
            probs[v, sp_idx] = g.probs[v, s]
    graph = StochasticGraph(
        g.node_ids, space, probs, presence_mode=g.presence_mode, validate=False
    )
    return SplitSpace(graph, tuple(owner), tuple(origin), g)


def _ball(sp: SplitSpace, s: int, t: int) -> list[int]:
    """Points strictly nearer to s than t under EdgeKey order (s, t excluded)."""
    space = sp.graph.space
    ref = EdgeKey(float(space.dist[min(s, t), max(s, t)]), min(s, t), max(s, t))
    out = []
    for r in range(sp.graph.m):
        if r == s or r == t:
            continue
        lo, hi = (s, r) if s < r else (r, s)
        if EdgeKey(float(space.dist[lo, hi]), lo, hi) < ref:
            out.append(r)
    return out


def _resolve_pair(sp: SplitSpace, s, t) -> tuple[int, int, int, int]:
    si, ti = sp.graph.space.index(s), sp.graph.space.index(t)
    if si == ti:
        raise DomainError("the two points must be distinct")
    v, u = sp.owner[si], sp.owner[ti]
    if v >= 0 and v == u:
        raise DomainError("both points belong to the same node")
    return si, ti, v, u


def _outside_mass(g: StochasticGraph, w: int, ball: set[int]) -> float:
    """1 - p_w(ball), evaluated as the complement sum so it is exactly the
    mass the conditional sampler renormalizes over (absence included)."""
    inside = [r for r in range(g.m) if r not in ball]
    mass = float(g.probs[w, inside].sum())
    if g.presence_mode == "existential":
        mass += g.absent_mass(w)
    return mass


def prob_nearest(sp: SplitSpace, s: Union[str, int], t: Union[str, int]) -> float:
    """Exact probability that t is the realized nearest neighbor of s."""
    si, ti, v, u = _resolve_pair(sp, s, t)
    if v < 0 or u < 0:
        return 0.0
    g = sp.graph
    ball = set(_ball(sp, si, ti))
    prob = float(g.probs[v, si]) * float(g.probs[u, ti])
    for w in range(g.n):
        if w in (v, u):
            continue
        prob *= _outside_mass(g, w, ball)
    return prob


def prob_mutual_nearest(sp: SplitSpace, s: Union[str, int], t: Union[str, int]) -> float:
    """Exact probability that s and t are each other's nearest neighbors."""
    si, ti, v, u = _resolve_pair(sp, s, t)
    if v < 0 or u < 0:
        return 0.0
    g = sp.graph
    ball = set(_ball(sp, si, ti)) | set(_ball(sp, ti, si))
    prob = float(g.probs[v, si]) * float(g.probs[u, ti])
    for w in range(g.n):
        if w in (v, u):
            continue
        prob *= _outside_mass(g, w, ball)
    return prob


@dataclass
class PairTerm:
    """One conditioned sub-term of the cycle-cover decomposition."""

    s: str
    t: str
    node_s: str
    node_t: str
    kind: str  # "nearest(s->t)" | "nearest(t->s)" | "mutual"
    prob_ns_t: float
    estimate: float
    samples: int
    indicator_hits: int

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "t": self.t,
            "node_s": self.node_s,
            "node_t": self.node_t,
            "kind": self.kind,
            "prob": self.prob_ns_t,
            "estimate": self.estimate,
            "samples": self.samples,
            "indicator_hits": self.indicator_hits,
        }


class _PairValues:
    """Shared per-run cache: realized point set -> (CC, longest NN edge).

    Also enforces the per-realization sandwiches: NN <= CC <= 2 NN and
    NN/k <= longest <= NN.
    """

    def __init__(self, space: MetricSpace):
        self.space = space
        self.cache: dict[tuple[int, ...], tuple[float, EdgeKey]] = {}

    def get(self, realized: tuple[int, ...]) -> tuple[float, EdgeKey]:
        try:
            return self.cache[realized]
        except KeyError:
            pass
        nn = _nn_indices(self.space, realized)
        cc = _cc_indices(self.space, realized)
        total = nn.total_length
        k = len(realized)
        if not (
            total * (1.0 - _SLACK) <= cc <= 2.0 * total * (1.0 + _SLACK) + 1e-300
        ):
            raise InternalAssertionError(
                f"cycle-cover sandwich violated: NN={total}, CC={cc}"
            )
        lam = nn.longest.length
        if not (
            total / k * (1.0 - _SLACK) <= lam <= total * (1.0 + _SLACK)
        ):
            raise InternalAssertionError(
                f"longest-edge sandwich violated: NN={total}, longest={lam}, k={k}"
            )
        out = (cc, nn.longest)
        self.cache[realized] = out
        return out


def _pair_event(sp: SplitSpace, si: int, ti: int, mutual: bool) -> EventSpec:
    g = sp.graph
    ball = set(_ball(sp, si, ti))
    if mutual:
        ball |= set(_ball(sp, ti, si))
    v, u = sp.owner[si], sp.owner[ti]
    allowed: dict[str, object] = {}
    absent: dict[str, bool] = {}
    vname, uname = g.node_ids[v], g.node_ids[u]
    allowed[vname] = g.space.point_ids[si]
    allowed[uname] = g.space.point_ids[ti]
    absent[vname] = False
    absent[uname] = False
    complement = [
        g.space.point_ids[r] for r in range(g.m) if r not in ball
    ]
    for w in range(g.n):
        if w not in (v, u):
            allowed[g.node_ids[w]] = complement
    return EventSpec(allowed=allowed, allow_absent=absent)


def estimate_pair_term(
    sp: SplitSpace,
    s: Union[str, int],
    t: Union[str, int],
    n_samples: int,
    seed: int,
    *,
    mutual: bool = False,
    threads: int = 1,
    values: Optional[_PairValues] = None,
) -> PairTerm:
    """Indicator-weighted sample mean for one conditioned pair event.

    Samples are drawn given "t is s's nearest neighbor" (both directions for
    ``mutual``); each sample contributes CC times the indicator that (s, t)
    is the longest nearest-neighbor edge.  The returned estimate is the
    conditioning probability times that mean; its expectation is exactly
    Pr[A_s(t)] * E[CC | A_s(t)].
    """
    si, ti, v, u = _resolve_pair(sp, s, t)
    g = sp.graph
    kind = "mutual" if mutual else f"nearest({g.space.point_ids[si]}->{g.space.point_ids[ti]})"
    term = PairTerm(
        s=g.space.point_ids[si],
        t=g.space.point_ids[ti],
        node_s=g.node_ids[v] if v >= 0 else "",
        node_t=g.node_ids[u] if u >= 0 else "",
        kind=kind,
        prob_ns_t=0.0,
        estimate=0.0,
        samples=0,
        indicator_hits=0,
    )
    prob = (
        prob_mutual_nearest(sp, si, ti) if mutual else prob_nearest(sp, si, ti)
    )
    if prob <= 0.0:
        return term
    term.prob_ns_t = prob

    values = values or _PairValues(g.space)
    lo, hi = (si, ti) if si < ti else (ti, si)
    target = EdgeKey(float(g.space.dist[lo, hi]), lo, hi)
    n_nodes = g.n

    def class_fn(row: tuple[int, ...]) -> tuple[float, int]:
        realized = tuple(i for i in row if i >= 0)
        cc, longest = values.get(realized)
        if longest != target:
            return 0.0, 0
        d = target.length
        if not (
            d * (1.0 - _SLACK) <= cc <= 2.0 * n_nodes * d * (1.0 + _SLACK) + 1e-300
        ):
            raise InternalAssertionError(
                f"conditioned cycle-cover bound violated: d={d}, CC={cc}"
            )
        return cc, 1

    sampler = ConditionalSampler(g, _pair_event(sp, si, ti, mutual))
    if sampler.is_deterministic:
        row = tuple(sorted(int(o[0]) for o in sampler.outcomes))
        val, hit = class_fn(row)
        term.estimate = prob * val
        term.samples = 1
        term.indicator_hits = hit
        return term

    stream = SampleStream(seed, f"cc/{term.s}/{term.t}/{kind}")
    mean, hits = run_conditional_mc(sampler, class_fn, n_samples, stream, threads)
    term.estimate = prob * mean
    term.samples = n_samples
    term.indicator_hits = hits
    return term


def pair_budget(n: int, m: int, epsilon: float, c: float = 4.0) -> int:
    """Per-pair sample count: ceil(c n^2 m^3 (ln n + ln m) / eps^3)."""
    return max(1, math.ceil(c * n * n * m**3 * (math.log(n) + math.log(m)) / epsilon**3))


def estimate_ecc(
    g: StochasticGraph,
    epsilon: float,
    seed: int,
    *,
    budget_scale: float = 1.0,
    budget_cap: Optional[int] = None,
    threads: int = 1,
    budget_constant: float = 4.0,
) -> EstimateReport:
    """FPRAS estimate of the expected minimum cycle cover length."""
    if not 0.0 < epsilon <= 1.0:
        raise DomainError("epsilon must be in (0, 1]")
    if g.n < 2:
        raise DomainError("a cycle cover needs at least 2 nodes")
    t0 = time.perf_counter()
    sp = split_points(g)
    work = sp.graph
    full = pair_budget(g.n, work.m, epsilon, budget_constant)
    used = apply_budget_scale(full, budget_scale, budget_cap)

    report = EstimateReport(
        estimator="cc",
        value=0.0,
        epsilon=epsilon,
        seed=seed,
        budget_scale=budget_scale,
        budget_cap=budget_cap,
        threads=threads,
    )
    report.extras["split_points"] = work.m
    report.extras["pair_budget"] = {"full": full, "used": used}
    if g.presence_mode != "certain":
        report.flags["cc_of_fewer_than_2_present_is_zero"] = True

    values = _PairValues(work.space)
    pairs: list[dict] = []
    for a in range(work.m):
        if sp.owner[a] < 0:
            continue
        for b in range(a + 1, work.m):
            if sp.owner[b] < 0 or sp.owner[b] == sp.owner[a]:
                continue
            t_ab = estimate_pair_term(
                sp, a, b, used, seed, threads=threads, values=values
            )
            t_ba = estimate_pair_term(
                sp, b, a, used, seed, threads=threads, values=values
            )
            t_mut = estimate_pair_term(
                sp, a, b, used, seed, mutual=True, threads=threads, values=values
            )
            contribution = t_ab.estimate + t_ba.estimate - t_mut.estimate
            union_prob = t_ab.prob_ns_t + t_ba.prob_ns_t - t_mut.prob_ns_t
            if union_prob <= 0.0:
                continue
            pairs.extend([t_ab.to_dict(), t_ba.to_dict(), t_mut.to_dict()])
            report.terms.append(
                TermReport(
                    f"edge({sp.point_id(a)},{sp.point_id(b)})",
                    contribution,
                    "monte-carlo",
                    probability=union_prob,
                    samples=t_ab.samples + t_ba.samples + t_mut.samples,
                    full_budget=full,
                )
            )
    report.extras["pairs"] = pairs
    report.value = combine_terms(report.terms)
    report.elapsed = time.perf_counter() - t0
    return report
