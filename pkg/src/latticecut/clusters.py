"""Positive-capacity clusters and the null-cutset constructions built on them.

A cluster is the connected component of a vertex in the bond percolation
opened exactly on edges of positive capacity (INF counts as positive).  In
the supercritical-zero regime these clusters are almost surely finite; the
random height of a base rectangle and the union-of-boundaries null cutset
are computed from them.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .capacity import CapacityDistribution, CapacityField, RegimeConstants, RegimeError, \
    is_infinite, require_supercritical_zero
from .exact import QuadExt, as_fraction, le_scaled
from .geometry import HyperRectangle, InvalidGeometryError, build_cylinder, \
    edge_endpoints, thicken
from .rng import derive_seed

DEFAULT_CLUSTER_CAP = 10 ** 6


class ConsistencyError(RuntimeError):
    """A hard internal invariant failed; results cannot be trusted."""


def _positive(value) -> bool:
    return is_infinite(value) or value > 0


@dataclass(frozen=True)
class ClusterReport:
    """One positive-capacity cluster: vertices, exterior boundary, diameter."""

    root: tuple
    vertices: frozenset
    diameter: float
    boundary: frozenset
    truncated: bool

    @property
    def card_v(self) -> int:
        return len(self.vertices)

    def to_json(self) -> dict:
        return {
            "root": list(self.root),
            "card_v": self.card_v,
            "diameter": self.diameter,
            "truncated": self.truncated,
            "vertices": [list(v) for v in sorted(self.vertices)],
            "boundary": [[list(x), list(y)] for x, y in
                         sorted(edge_endpoints(e) for e in self.boundary)],
        }


def _component(x, field, cap):
    """BFS closure of x over positive-capacity edges; (vertices, truncated)."""
    x = tuple(x)
    d = len(x)
    seen = {x}
    frontier = [x]
    while frontier:
        nxt = []
        for v in frontier:
            for axis in range(d):
                for step in (1, -1):
                    w = tuple(c + step if i == axis else c for i, c in enumerate(v))
                    if w in seen:
                        continue
                    edge = (v, axis) if step == 1 else (w, axis)
                    if _positive(field.capacity_of(edge)):
                        seen.add(w)
                        nxt.append(w)
                        if len(seen) > cap:
                            return frozenset(seen), True
        frontier = nxt
    return frozenset(seen), False


def _diameter(vertices) -> float:
    if len(vertices) <= 1:
        return 0.0
    pts = np.array(sorted(vertices), dtype=float)
    best = 0.0
    for i in range(0, len(pts), 256):
        block = pts[i:i + 256]
        d2 = ((block[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        best = max(best, float(d2.max()))
    return math.sqrt(best)


def exterior_boundary(vertices, field: CapacityField | None = None) -> frozenset:
    """Edges from a finite connected vertex set to the infinite complement part.

    Flood fills the complement inside the bounding box inflated by one, so
    edges into holes (finite complement components) are excluded.  When a
    field is given, every returned edge is asserted to have capacity zero.
    """
    vset = frozenset(tuple(v) for v in vertices)
    if not vset:
        raise ValueError("empty vertex set")
    d = len(next(iter(vset)))
    # connectivity of the input is a precondition; verify it cheaply
    seed = next(iter(vset))
    seen = {seed}
    stack = [seed]
    while stack:
        v = stack.pop()
        for axis in range(d):
            for step in (1, -1):
                w = tuple(c + step if i == axis else c for i, c in enumerate(v))
                if w in vset and w not in seen:
                    seen.add(w)
                    stack.append(w)
    if len(seen) != len(vset):
        raise ValueError("vertex set is not connected")

    lo = [min(v[i] for v in vset) - 1 for i in range(d)]
    hi = [max(v[i] for v in vset) + 1 for i in range(d)]

    def in_box(p):
        return all(a <= c <= b for c, a, b in zip(p, lo, hi))

    corner = tuple(lo)
    exterior = {corner}
    stack = [corner]
    while stack:
        v = stack.pop()
        for axis in range(d):
            for step in (1, -1):
                w = tuple(c + step if i == axis else c for i, c in enumerate(v))
                if w in exterior or w in vset or not in_box(w):
                    continue
                exterior.add(w)
                stack.append(w)

    edges = set()
    for v in vset:
        for axis in range(d):
            for step in (1, -1):
                w = tuple(c + step if i == axis else c for i, c in enumerate(v))
                if w in vset or w not in exterior:
                    continue
                edges.add((v, axis) if step == 1 else (w, axis))
    if field is not None:
        for e in edges:
            if field.capacity_of(e) != 0:
                raise ConsistencyError(f"exterior boundary edge {e} has positive capacity")
    return frozenset(edges)


def cluster_of(x, field: CapacityField, cap: int = DEFAULT_CLUSTER_CAP) -> ClusterReport:
    """The positive-capacity cluster of x, capped at cap vertices.

    A truncated report (empty boundary, NaN diameter) signals a possibly
    supercritical positive-edge regime; supercritical-zero callers treat it
    as fatal.
    """
    if cap < 1:
        raise ValueError("cap must be at least 1")
    verts, truncated = _component(x, field, cap)
    if truncated:
        return ClusterReport(tuple(x), verts, float("nan"), frozenset(), True)
    return ClusterReport(tuple(x), verts, _diameter(verts),
                         exterior_boundary(verts, field), False)


class ClusterIndex:
    """Shared cluster lookup for one field; truncation raises RegimeError."""

    def __init__(self, field: CapacityField, cap: int = DEFAULT_CLUSTER_CAP):
        self.field = field
        self.cap = cap
        self._comp_of = {}
        self._components = []
        self._reports = {}

    def component_id(self, x) -> int:
        x = tuple(x)
        cid = self._comp_of.get(x)
        if cid is not None:
            return cid
        verts, truncated = _component(x, self.field, self.cap)
        if truncated:
            raise RegimeError(
                f"cluster of {x} exceeds cap {self.cap}; "
                "positive edges may be supercritical")
        cid = len(self._components)
        self._components.append(verts)
        for v in verts:
            self._comp_of[v] = cid
        return cid

    def component(self, x) -> frozenset:
        return self._components[self.component_id(x)]

    def size(self, x) -> int:
        return len(self.component(x))

    def report(self, x) -> ClusterReport:
        cid = self.component_id(x)
        if cid not in self._reports:
            verts = self._components[cid]
            self._reports[cid] = ClusterReport(
                min(verts), verts, _diameter(verts),
                exterior_boundary(verts, self.field), False)
        return self._reports[cid]


# ---------------------------------------------------------------------------
# random height

@dataclass(frozen=True)
class RandomHeight:
    """The random height H >= h at which the W layer clears all base clusters."""

    base: HyperRectangle
    requested: Fraction
    value: float
    scaled: QuadExt
    contributing_clusters: tuple


def _check_lemma_height(A: HyperRectangle, h, allow_equal: bool):
    h = as_fraction(h)
    two_d = 2 * A.d
    if h > two_d or (h == two_d and allow_equal):
        return h
    raise InvalidGeometryError(f"height {h} must exceed 2d = {two_d}")


def random_height(A: HyperRectangle, h, field: CapacityField, *,
                  cap: int = DEFAULT_CLUSTER_CAP, allow_h_equal_2d: bool = False,
                  index: ClusterIndex | None = None) -> RandomHeight:
    """Smallest t >= h whose W layer misses every cluster rooted in cyl(A, h/2).

    Scans the scaled heights of all cluster vertices instead of stepping t;
    the two are equivalent because a vertex u blocks exactly the height
    interval [r_u, r_u + max_i |normal_i|) in scaled units.
    """
    h = _check_lemma_height(A, h, allow_h_equal_2d)
    if index is None:
        index = ClusterIndex(field, cap)
    elif index.field is not field and index.field != field:
        raise ValueError("cluster index belongs to a different field")

    base_region = build_cylinder(A, h / 2)
    m = A.direction.m
    maxstep = max(abs(c) for c in A.direction.normal)
    tol_q = QuadExt.sqrt_scaled(A.tol, m)
    start = QuadExt.sqrt_scaled(h, m)

    comp_ids = sorted({index.component_id(v) for v in base_region.vertices})
    intervals = []
    interval_src = []
    total_card = 0
    for cid in comp_ids:
        verts = index._components[cid]
        total_card += len(verts)
        for u in verts:
            r = A.height_scaled(u)
            if not le_scaled(-r, A.tol, m):
                continue  # below the slab, never in any W layer
            lo = QuadExt.rational(r, m) - tol_q
            hi = QuadExt.rational(r + maxstep, m) - tol_q
            intervals.append((lo, hi))
            interval_src.append(cid)

    order = sorted(range(len(intervals)), key=lambda i: intervals[i][0])
    cur = start
    for i in order:
        lo, hi = intervals[i]
        if lo > cur:
            break
        if hi > cur:
            cur = hi

    bound = QuadExt.sqrt_scaled(h + total_card + 2 * A.d, m)
    if cur > bound:
        raise ConsistencyError("random height exceeded its a priori bound")

    contributing = sorted({interval_src[i] for i in order
                           if intervals[i][1] > start and intervals[i][0] <= cur})
    reports = tuple(index.report(min(index._components[cid])) for cid in contributing)
    value = float(cur) / math.sqrt(m)
    return RandomHeight(A, h, value, cur, reports)


def lemma_cutset(A: HyperRectangle, h, field: CapacityField, *,
                 constants: RegimeConstants | None = None,
                 cap: int = DEFAULT_CLUSTER_CAP,
                 index: ClusterIndex | None = None) -> frozenset:
    """Union of exterior cluster boundaries over the thickened base.

    Every returned edge has capacity zero, and the set cuts the thickened
    base from the W layer at the random height inside the slab.
    """
    constants = constants or RegimeConstants.for_dimension(A.d)
    require_supercritical_zero(field.distribution, constants)
    h = _check_lemma_height(A, h, allow_equal=False)
    if index is None:
        index = ClusterIndex(field, cap)
    edges = set()
    seen_cids = set()
    for x in thicken(A).lattice_vertices():
        cid = index.component_id(x)
        if cid in seen_cids:
            continue
        seen_cids.add(cid)
        edges |= index.report(x).boundary
    return frozenset(edges)


# ---------------------------------------------------------------------------
# cluster-size tails

@dataclass(frozen=True)
class TailFit:
    """Least-squares fit of log survival of cluster sizes to a linear decay."""

    kappa1_hat: float
    kappa2_hat: float
    r_squared: float
    sample_size: int
    points: tuple  # (size, empirical survival, fitted survival)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["size", "empirical_survival", "fitted_survival"])
            for size, emp, fit in self.points:
                writer.writerow([size, repr(emp), repr(fit)])


def sample_cluster_sizes(p, d: int, samples: int, seed: int,
                         cap: int = DEFAULT_CLUSTER_CAP) -> np.ndarray:
    """Sizes of the origin cluster over independent Bernoulli(p) fields."""
    dist = CapacityDistribution.bernoulli(p)
    origin = (0,) * d
    sizes = np.empty(samples, dtype=np.int64)
    for i in range(samples):
        field = CapacityField(derive_seed(seed, i, 0), dist)
        verts, truncated = _component(origin, field, cap)
        if truncated:
            raise RegimeError("origin cluster exceeded cap while sampling tails")
        sizes[i] = len(verts)
    return sizes


def tail_fit(p, d: int, samples: int, seed: int, *,
             constants: RegimeConstants | None = None,
             cap: int = DEFAULT_CLUSTER_CAP) -> TailFit:
    """Fit survival P[card >= n] ~ kappa1 * exp(-kappa2 n) at the origin.

    The regression runs on sizes from 5 up to the 95th percentile of the
    observed sizes; the extremes are noise dominated.
    """
    p = as_fraction(p)
    constants = constants or RegimeConstants.for_dimension(d)
    if p >= constants.pc:
        raise RegimeError(f"positive-edge probability {p} is not below pc = {constants.pc}")
    sizes = sample_cluster_sizes(p, d, samples, seed, cap)
    n = len(sizes)
    hi = int(np.percentile(sizes, 95))
    ks, survival = [], []
    for k in range(5, max(hi, 5) + 1):
        s = float(np.count_nonzero(sizes >= k)) / n
        if s > 0:
            ks.append(k)
            survival.append(s)
    if len(ks) < 2:
        return TailFit(float("nan"), float("nan"), float("nan"), n, ())
    ks_arr = np.array(ks, dtype=float)
    logs = np.log(np.array(survival))
    slope, intercept = np.polyfit(ks_arr, logs, 1)
    fitted = slope * ks_arr + intercept
    ss_res = float(((logs - fitted) ** 2).sum())
    ss_tot = float(((logs - logs.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    points = tuple((int(k), s, float(math.exp(f)))
                   for k, s, f in zip(ks, survival, fitted))
    return TailFit(float(math.exp(intercept)), float(-slope), r2, n, points)
