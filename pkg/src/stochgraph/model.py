"""Stochastic graph data model.

A ``MetricSpace`` is a finite set of points with a symmetric distance matrix
satisfying the triangle inequality.  A ``StochasticGraph`` places ``n`` nodes
on that space, each node carrying an independent discrete distribution over
the points.  A ``Realization`` assigns every node to a concrete point (or, in
existential mode, marks it absent).  ``EventSpec`` describes product-form
events: per-node restrictions of the allowed points, which is the only kind of
conditioning the estimators in this package ever need.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .errors import DomainError, ValidationError

TRIANGLE_TOL = 1e-9   # relative slack when validating the triangle inequality
ROW_SUM_TOL = 1e-12   # slack on per-node probability mass

CERTAIN = "certain"
EXISTENTIAL = "existential"

ABSENT = None  # public marker for "node not present" in a realization


class MetricSpace:
    """Finite metric space: point identifiers plus a distance matrix.

    Construct either from an explicit matrix (``MetricSpace(ids, dist=...)``)
    or from Euclidean coordinates (``MetricSpace(ids, coords=...)``), in which
    case pairwise L2 distances are computed once and then treated as a plain
    matrix.

    The canonical point order (the order of ``point_ids``) doubles as the
    fixed total order on identifiers used for deterministic edge tie-breaking.
    """

    def __init__(
        self,
        point_ids: Sequence[str],
        dist: Optional[np.ndarray] = None,
        coords: Optional[np.ndarray] = None,
        validate: bool = True,
    ):
        self.point_ids: tuple[str, ...] = tuple(str(p) for p in point_ids)
        if len(set(self.point_ids)) != len(self.point_ids):
            raise ValidationError("duplicate point identifiers")
        if len(self.point_ids) == 0:
            raise ValidationError("a metric space needs at least one point")
        self._index = {p: i for i, p in enumerate(self.point_ids)}

        m = len(self.point_ids)
        if coords is not None:
            coords = np.asarray(coords, dtype=float)
            if coords.ndim != 2 or coords.shape[0] != m:
                raise ValidationError("coords must be an (m, dim) array")
            diff = coords[:, None, :] - coords[None, :, :]
            dist = np.sqrt((diff * diff).sum(axis=2))
            self.coords: Optional[np.ndarray] = coords
        else:
            self.coords = None
            if dist is None:
                raise ValidationError("need either a distance matrix or coordinates")
        dist = np.asarray(dist, dtype=float)
        if dist.shape != (m, m):
            raise ValidationError(f"distance matrix must be {m}x{m}")
        self.dist: np.ndarray = dist
        self.dist.setflags(write=False)
        if validate:
            self._validate()

    def _validate(self) -> None:
        d = self.dist
        m = len(self.point_ids)
        if np.any(~np.isfinite(d)) or np.any(d < 0):
            raise ValidationError("distances must be finite and nonnegative")
        if np.any(np.diag(d) != 0.0):
            raise ValidationError("dist(a, a) must be 0")
        if np.any(d != d.T):
            raise ValidationError("distance matrix must be symmetric")
        # d[a, c] <= d[a, b] + d[b, c], up to relative tolerance.
        for b in range(m):
            via_b = d[:, b:b + 1] + d[b:b + 1, :]
            bad = d > via_b * (1.0 + TRIANGLE_TOL) + 0.0
            if np.any(bad):
                a, c = np.argwhere(bad)[0]
                raise ValidationError(
                    f"triangle inequality violated: d({self.point_ids[a]},{self.point_ids[c]})="
                    f"{d[a, c]} > d(.,{self.point_ids[b]}) path {via_b[a, c]}"
                )

    @property
    def m(self) -> int:
        return len(self.point_ids)

    def index(self, point: Union[str, int]) -> int:
        if isinstance(point, (int, np.integer)):
            if not 0 <= point < self.m:
                raise ValidationError(f"point index {point} out of range")
            return int(point)
        try:
            return self._index[point]
        except KeyError:
            raise ValidationError(f"unknown point identifier {point!r}") from None

    def indices(self, points: Iterable[Union[str, int]]) -> list[int]:
        return [self.index(p) for p in points]

    def d(self, a: Union[str, int], b: Union[str, int]) -> float:
        return float(self.dist[self.index(a), self.index(b)])


def set_distance(space: MetricSpace, p: Union[str, int], H: Iterable) -> float:
    """Closest distance from point ``p`` to the nonempty point set ``H``."""
    idx = space.indices(H)
    if not idx:
        raise DomainError("set_distance: empty point set")
    return float(space.dist[space.index(p), idx].min())


def diam(space: MetricSpace, H: Iterable) -> float:
    """max pairwise distance within the nonempty point set ``H``."""
    idx = space.indices(H)
    if not idx:
        raise DomainError("diam: empty point set")
    sub = space.dist[np.ix_(idx, idx)]
    return float(sub.max())


def set_set_distance(space: MetricSpace, H1: Iterable, H2: Iterable) -> float:
    """min over s in H1, t in H2 of d(s, t); both sets must be nonempty."""
    i1, i2 = space.indices(H1), space.indices(H2)
    if not i1 or not i2:
        raise DomainError("set_set_distance: empty point set")
    return float(space.dist[np.ix_(i1, i2)].min())


class StochasticGraph:
    """Nodes with independent discrete location distributions over a space.

    ``probs[v, s]`` is the probability that node ``v`` realizes at point
    ``s``.  In ``certain`` mode every row sums to 1; in ``existential`` mode a
    row may sum to less than 1, the deficit being the probability that the
    node is absent.
    """

    def __init__(
        self,
        node_ids: Sequence[str],
        space: MetricSpace,
        probs: Union[np.ndarray, Mapping[str, Mapping[str, float]]],
        presence_mode: str = CERTAIN,
        validate: bool = True,
    ):
        self.node_ids: tuple[str, ...] = tuple(str(v) for v in node_ids)
        if len(set(self.node_ids)) != len(self.node_ids):
            raise ValidationError("duplicate node identifiers")
        if not self.node_ids:
            raise ValidationError("a stochastic graph needs at least one node")
        self._index = {v: i for i, v in enumerate(self.node_ids)}
        self.space = space
        if presence_mode not in (CERTAIN, EXISTENTIAL):
            raise ValidationError(f"unknown presence mode {presence_mode!r}")
        self.presence_mode = presence_mode

        if isinstance(probs, Mapping):
            P = np.zeros((len(self.node_ids), space.m))
            for v, row in probs.items():
                vi = self.node_index(v)
                for s, p in row.items():
                    P[vi, space.index(s)] = float(p)
        else:
            P = np.asarray(probs, dtype=float)
            if P.shape != (len(self.node_ids), space.m):
                raise ValidationError(
                    f"probability matrix must be {len(self.node_ids)}x{space.m}"
                )
        self.probs: np.ndarray = P
        self.probs.setflags(write=False)
        if validate:
            self._validate()

    def _validate(self) -> None:
        P = self.probs
        if np.any(~np.isfinite(P)) or np.any(P < 0):
            raise ValidationError("location probabilities must be finite and >= 0")
        rows = P.sum(axis=1)
        if self.presence_mode == CERTAIN:
            bad = np.abs(rows - 1.0) > ROW_SUM_TOL
            if np.any(bad):
                v = int(np.argmax(bad))
                raise ValidationError(
                    f"node {self.node_ids[v]}: probabilities sum to {rows[v]}, expected 1"
                )
        else:
            if np.any(rows > 1.0 + ROW_SUM_TOL):
                v = int(np.argmax(rows))
                raise ValidationError(
                    f"node {self.node_ids[v]}: probabilities sum to {rows[v]} > 1"
                )

    @property
    def n(self) -> int:
        return len(self.node_ids)

    @property
    def m(self) -> int:
        return self.space.m

    def node_index(self, node: Union[str, int]) -> int:
        if isinstance(node, (int, np.integer)):
            if not 0 <= node < self.n:
                raise ValidationError(f"node index {node} out of range")
            return int(node)
        try:
            return self._index[node]
        except KeyError:
            raise ValidationError(f"unknown node identifier {node!r}") from None

    def absent_mass(self, node: Union[str, int]) -> float:
        """Probability that the node is not present (0 in certain mode)."""
        if self.presence_mode == CERTAIN:
            return 0.0
        return max(0.0, 1.0 - float(self.probs[self.node_index(node)].sum()))


@dataclass(frozen=True)
class Realization:
    """One joint assignment of nodes to points; ``None`` marks an absent node.

    ``indices`` is the internal form: one entry per node in node order, the
    point index or -1 for absent.
    """

    indices: tuple[int, ...]

    @classmethod
    def from_mapping(cls, g: StochasticGraph, assignment: Mapping[str, Optional[str]]) -> "Realization":
        if set(assignment.keys()) != set(g.node_ids):
            missing = set(g.node_ids) - set(assignment.keys())
            extra = set(assignment.keys()) - set(g.node_ids)
            raise ValidationError(
                f"realization must assign every node exactly once "
                f"(missing {sorted(missing)}, unknown {sorted(extra)})"
            )
        idx = []
        for v in g.node_ids:
            point = assignment[v]
            if point is ABSENT:
                if g.presence_mode != EXISTENTIAL:
                    raise ValidationError(f"node {v}: absent only allowed in existential mode")
                idx.append(-1)
            else:
                idx.append(g.space.index(point))
        return cls(tuple(idx))

    def to_mapping(self, g: StochasticGraph) -> dict[str, Optional[str]]:
        return {
            v: (None if i < 0 else g.space.point_ids[i])
            for v, i in zip(g.node_ids, self.indices)
        }

    def present_indices(self) -> list[int]:
        return [i for i in self.indices if i >= 0]


@dataclass(frozen=True)
class EventSpec:
    """Product-form conditioning event: per-node allowed point sets.

    ``allowed`` maps a node id to an iterable of point ids (or one point id,
    meaning the node is forced there).  Unmentioned nodes are unrestricted.
    ``allow_absent`` (existential mode only) controls whether "not present"
    counts as allowed for a node; it defaults to True for every node.
    """

    allowed: Mapping[str, Union[str, Iterable[str]]] = field(default_factory=dict)
    allow_absent: Mapping[str, bool] = field(default_factory=dict)

    def allowed_indices(self, g: StochasticGraph, node: Union[str, int]) -> list[int]:
        """Sorted point indices allowed for ``node`` (absence not included)."""
        ni = g.node_index(node)
        name = g.node_ids[ni]
        if name not in self.allowed:
            return list(range(g.m))
        spec = self.allowed[name]
        if isinstance(spec, str):
            return [g.space.index(spec)]
        idx = sorted({g.space.index(p) for p in spec})
        if not idx:
            raise ValidationError(f"node {name}: empty allowed set")
        return idx

    def absent_allowed(self, g: StochasticGraph, node: Union[str, int]) -> bool:
        if g.presence_mode != EXISTENTIAL:
            return False
        name = g.node_ids[g.node_index(node)]
        return bool(self.allow_absent.get(name, True))

    def node_mass(self, g: StochasticGraph, node: Union[str, int]) -> float:
        """Probability that ``node`` satisfies its restriction."""
        ni = g.node_index(node)
        mass = float(g.probs[ni, self.allowed_indices(g, ni)].sum())
        if self.absent_allowed(g, ni):
            mass += g.absent_mass(ni)
        return mass

    def contains(self, g: StochasticGraph, r: Realization) -> bool:
        for ni, pi in enumerate(r.indices):
            if pi < 0:
                if not self.absent_allowed(g, ni):
                    return False
            elif pi not in self.allowed_indices(g, ni):
                return False
        return True

    def to_json_dict(self, g: StochasticGraph) -> dict:
        out: dict = {"allowed": {}, "allow_absent": {}}
        for v, spec in self.allowed.items():
            out["allowed"][v] = [spec] if isinstance(spec, str) else sorted(spec)
        for v, b in self.allow_absent.items():
            out["allow_absent"][v] = bool(b)
        return out


def realization_probability(g: StochasticGraph, r: Realization) -> float:
    """Product of per-node marginals for one realization."""
    if len(r.indices) != g.n:
        raise ValidationError("realization does not match graph size")
    prob = 1.0
    for ni, pi in enumerate(r.indices):
        if pi < 0:
            if g.presence_mode != EXISTENTIAL:
                raise ValidationError("absent node in certain mode")
            prob *= g.absent_mass(ni)
        else:
            if not 0 <= pi < g.m:
                raise ValidationError(f"point index {pi} out of range")
            prob *= float(g.probs[ni, pi])
    return prob


def expected_mass(g: StochasticGraph, H: Iterable) -> float:
    """p(H): expected number of nodes realized in the point set ``H``."""
    idx = g.space.indices(H)
    return float(g.probs[:, idx].sum())


def node_mass(g: StochasticGraph, v: Union[str, int], H: Iterable) -> float:
    """p_v(H): probability that node ``v`` realizes in the point set ``H``."""
    idx = g.space.indices(H)
    return float(g.probs[g.node_index(v), idx].sum())


def event_probability(g: StochasticGraph, event: EventSpec) -> float:
    """Probability of a product-form event: the product of per-node masses."""
    prob = 1.0
    for v in g.node_ids:
        prob *= event.node_mass(g, v)
    return prob


# ---------------------------------------------------------------------------
# Instance JSON format
# ---------------------------------------------------------------------------
# {"points": [{"id": str, "coords": [f, ...]}, ...]        (coords optional)
#  "distance_matrix": [[f, ...], ...],                     (alternative)
#  "nodes": [{"id": str, "dist": {point_id: prob, ...}}, ...],
#  "presence_mode": "certain" | "existential"}

def instance_from_dict(doc: Mapping) -> StochasticGraph:
    if not isinstance(doc, Mapping):
        raise ValidationError("instance document must be a JSON object")
    if "points" not in doc or "nodes" not in doc:
        raise ValidationError('instance needs "points" and "nodes"')
    points = doc["points"]
    ids = []
    coords = []
    have_coords = True
    for entry in points:
        if isinstance(entry, str):
            ids.append(entry)
            have_coords = False
            continue
        ids.append(entry["id"])
        if "coords" in entry:
            coords.append(entry["coords"])
        else:
            have_coords = False
    if "distance_matrix" in doc:
        space = MetricSpace(ids, dist=np.asarray(doc["distance_matrix"], dtype=float))
    elif have_coords and coords:
        space = MetricSpace(ids, coords=np.asarray(coords, dtype=float))
    else:
        raise ValidationError("points need coords, or provide a distance_matrix")

    node_ids = []
    rows = {}
    for entry in doc["nodes"]:
        node_ids.append(entry["id"])
        rows[entry["id"]] = {str(k): float(p) for k, p in entry["dist"].items()}
    mode = doc.get("presence_mode", CERTAIN)
    return StochasticGraph(node_ids, space, rows, presence_mode=mode)


def instance_to_dict(g: StochasticGraph) -> dict:
    points: list[dict] = []
    for i, p in enumerate(g.space.point_ids):
        entry: dict = {"id": p}
        if g.space.coords is not None:
            entry["coords"] = [float(x) for x in g.space.coords[i]]
        points.append(entry)
    doc: dict = {"points": points, "presence_mode": g.presence_mode}
    if g.space.coords is None:
        doc["distance_matrix"] = [[float(x) for x in row] for row in g.space.dist]
    doc["nodes"] = [
        {
            "id": v,
            "dist": {
                g.space.point_ids[s]: float(g.probs[vi, s])
                for s in range(g.m)
                if g.probs[vi, s] > 0.0
            },
        }
        for vi, v in enumerate(g.node_ids)
    ]
    return doc


def load_instance(path: str) -> StochasticGraph:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    return instance_from_dict(doc)


def dump_instance(g: StochasticGraph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(instance_to_dict(g), sort_keys=True, indent=1))
        fh.write("\n")
