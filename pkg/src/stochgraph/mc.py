"""Seeded Monte Carlo engine with explicit sample budgets.

Budgets invert the two-sided Chernoff bound for variables in [0, U] with mean
at least mu_lower: N = ceil(4 * U * ln(2/delta) / (mu_lower * epsilon^2))
samples make the failure probability at most delta.

Determinism: sample i draws from a counter-based substream owned by its index,
blocks have a fixed size, and aggregation is a fixed-fan-in pairwise tree over
sample order, so the result is bit-identical at any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError
from .model import EventSpec, StochasticGraph
from .oracle import Functional, FunctionalEvaluator
from .rng import SampleStream
from .sampling import ConditionalSampler

BLOCK_SIZE = 4096


def tree_sum(values) -> float:
    """Pairwise (fan-in 2) sum in index order; independent of chunking."""
    a = np.asarray(values, dtype=float).ravel()
    if a.size == 0:
        return 0.0
    while a.size > 1:
        half = a.size // 2
        paired = a[0 : 2 * half : 2] + a[1 : 2 * half : 2]
        a = np.concatenate([paired, a[2 * half :]]) if a.size % 2 else paired
    return float(a[0])


def chernoff_budget(U: float, mu_lower: float, epsilon: float, delta: float) -> int:
    """Smallest N making the Chernoff failure bound <= delta, with the mean
    replaced by its lower bound."""
    if mu_lower <= 0.0:
        raise DomainError("mu_lower must be positive")
    if U < mu_lower:
        raise DomainError("U must be at least mu_lower")
    if epsilon <= 0.0:
        raise DomainError("epsilon must be positive")
    if not 0.0 < delta < 1.0:
        raise DomainError("delta must be in (0, 1)")
    return max(1, math.ceil(4.0 * U * math.log(2.0 / delta) / (mu_lower * epsilon * epsilon)))


@dataclass(frozen=True)
class SampleBudget:
    """Monte Carlo plan for one conditional-expectation term."""

    n: int
    u: float
    mu_lower: float
    epsilon: float
    delta: float

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("budget needs at least one sample")
        if not (self.u >= self.mu_lower > 0.0):
            raise DomainError("need U >= mu_lower > 0")
        if self.epsilon <= 0.0 or not 0.0 < self.delta < 1.0:
            raise DomainError("need epsilon > 0 and delta in (0, 1)")

    @classmethod
    def for_bound(cls, u: float, mu_lower: float, epsilon: float, delta: float) -> "SampleBudget":
        return cls(chernoff_budget(u, mu_lower, epsilon, delta), u, mu_lower, epsilon, delta)


def apply_budget_scale(full_n: int, scale: float = 1.0, cap: Optional[int] = None) -> int:
    """Scaled-down sample count: ceil(full * scale), clipped by cap, floor 1."""
    if scale <= 0.0:
        raise DomainError("budget scale must be positive")
    n = full_n if scale == 1.0 else math.ceil(full_n * scale)
    if cap is not None:
        n = min(n, int(cap))
    return max(1, n)


def run_conditional_mc(
    sampler: ConditionalSampler,
    class_fn: Callable[[tuple[int, ...]], tuple[float, int]],
    n_samples: int,
    stream: SampleStream,
    threads: int = 1,
) -> tuple[float, int]:
    """Mean of a per-realization value over n_samples conditional draws.

    ``class_fn`` maps a sorted realized-index tuple to (value, indicator);
    it is called once per distinct realization class per block and may cache.
    Returns (mean, indicator_hits).
    """
    n_blocks = (n_samples + BLOCK_SIZE - 1) // BLOCK_SIZE

    def process(b: int) -> tuple[float, int]:
        start = b * BLOCK_SIZE
        count = min(BLOCK_SIZE, n_samples - start)
        rows = sampler.draw_block(stream, start, count)
        rows.sort(axis=1)
        uniq, inverse = np.unique(rows, axis=0, return_inverse=True)
        vals = np.empty(len(uniq))
        hits = np.empty(len(uniq), dtype=np.int64)
        for k, row in enumerate(uniq):
            v, h = class_fn(tuple(int(x) for x in row))
            vals[k] = v
            hits[k] = h
        return tree_sum(vals[inverse]), int(hits[inverse].sum())

    if threads > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(process, range(n_blocks)))
    else:
        results = [process(b) for b in range(n_blocks)]

    total = tree_sum(np.array([s for s, _ in results]))
    hits = sum(h for _, h in results)
    return total / n_samples, hits


def estimate_conditional(
    g: StochasticGraph,
    functional: Functional,
    event: Optional[EventSpec],
    budget: SampleBudget,
    *,
    seed: int,
    tag: str,
    threads: int = 1,
    evaluator: Optional[FunctionalEvaluator] = None,
    per_sample_check: Optional[Callable[[tuple[int, ...], float], None]] = None,
) -> tuple[float, int]:
    """Sample mean of the functional under the conditioning event.

    Returns (mean, samples_used).  If the event pins every node the value is
    computed once, exactly.  ``per_sample_check`` runs on every distinct
    realization class (equivalently, on every sample) and may raise.
    """
    sampler = ConditionalSampler(g, event)
    evaluator = evaluator or FunctionalEvaluator(g.space, functional)

    def class_fn(row: tuple[int, ...]) -> tuple[float, int]:
        key = tuple(i for i in row if i >= 0)
        v = evaluator.value(key)
        if per_sample_check is not None:
            per_sample_check(key, v)
        return v, 0

    if sampler.is_deterministic:
        v, _ = class_fn(tuple(sorted(int(o[0]) for o in sampler.outcomes)))
        return v, 1

    stream = SampleStream(seed, tag)
    mean, _ = run_conditional_mc(sampler, class_fn, budget.n, stream, threads)
    return mean, budget.n


# ---------------------------------------------------------------------------
# Estimator reports
# ---------------------------------------------------------------------------

@dataclass
class TermReport:
    """One additive term of an estimate and how it was obtained."""

    name: str
    value: float
    method: str  # "exact" | "monte-carlo" | "far-field"
    probability: Optional[float] = None
    mean: Optional[float] = None
    samples: int = 0
    full_budget: Optional[int] = None
    possibly_negligible: bool = False

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "value": self.value,
            "method": self.method,
            "samples": self.samples,
        }
        if self.probability is not None:
            d["probability"] = self.probability
        if self.mean is not None:
            d["mean"] = self.mean
        if self.full_budget is not None:
            d["full_budget"] = self.full_budget
        if self.possibly_negligible:
            d["possibly_negligible"] = True
        return d


@dataclass
class EstimateReport:
    """Estimator output: the value, its term breakdown, and run parameters."""

    estimator: str
    value: float
    epsilon: float
    seed: int
    terms: list[TermReport] = field(default_factory=list)
    epsilon_mc: Optional[float] = None
    budget_scale: float = 1.0
    budget_cap: Optional[int] = None
    threads: int = 1
    flags: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {
            "schema_version": 1,
            "estimator": self.estimator,
            "value": self.value,
            "epsilon": self.epsilon,
            "seed": self.seed,
            "budget_scale": self.budget_scale,
            "budget_cap": self.budget_cap,
            "threads": self.threads,
            "terms": [t.to_dict() for t in self.terms],
        }
        if self.epsilon_mc is not None:
            d["epsilon_mc"] = self.epsilon_mc
        if self.flags:
            d["flags"] = dict(sorted(self.flags.items()))
        if self.extras:
            d["extras"] = self.extras
        if include_timing:
            d["elapsed_seconds"] = self.elapsed
        return d


def combine_terms(terms: Sequence[TermReport]) -> float:
    """The estimate is the exact (fsum) total of its term values."""
    return math.fsum(t.value for t in terms)
