"""Exact max-flow / min-cut on lattice regions with {0, rational, inf} capacities.

Capacities scale to integers by the distribution's common denominator and a
shortest-augmenting-path (Dinic) solver runs in exact Python integers, so
flow equals cut capacity with no tolerance.  Lexicographic (capacity, then
cardinality) optima use composite weights w = c*(m+1) + 1 decoded by
divmod; infinite capacities become a computed finite bound that only enters
a cut when unavoidable.  The canonical cut of a solve is the residual-
reachable source side, which is the unique minimal optimum.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .capacity import CapacityField, INF, RegimeConstants, is_infinite, \
    require_supercritical_zero
from .clusters import ClusterIndex, ConsistencyError, DEFAULT_CLUSTER_CAP, \
    RandomHeight, random_height
from .exact import as_fraction
from .geometry import DegenerateRegionError, HyperRectangle, LatticeRegion, \
    MarkedRegion, build_cyl_prime, build_cylinder, bottom_top_sets, edge_endpoints, \
    pack_edge, slab_window_scaled, thicken


class WindowOverflowError(RuntimeError):
    """The slab window grew past its cap without stabilizing the cut."""


# ---------------------------------------------------------------------------
# core solver

class _Dinic:
    """Dinic's algorithm with multiple sources/sinks and big-int capacities."""

    def __init__(self, n):
        self.n = n
        self.to = []
        self.cap = []
        self.adj = [[] for _ in range(n)]

    def add_undirected(self, u, v, w):
        self.adj[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(w)
        self.adj[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(w)

    def _levels(self, sources, is_sink):
        level = [-1] * self.n
        q = deque()
        for s in sources:
            level[s] = 0
            q.append(s)
        found = False
        cap, to, adj = self.cap, self.to, self.adj
        while q:
            v = q.popleft()
            lv = level[v] + 1
            for a in adj[v]:
                if cap[a] > 0:
                    w = to[a]
                    if level[w] < 0:
                        level[w] = lv
                        if is_sink[w]:
                            found = True
                        else:
                            q.append(w)
        return level if found else None

    def _blocking(self, s, level, it, is_sink):
        cap, to, adj = self.cap, self.to, self.adj
        total = 0
        stack = [s]
        arcs = []
        while stack:
            v = stack[-1]
            if is_sink[v]:
                aug = min(cap[a] for a in arcs)
                for a in arcs:
                    cap[a] -= aug
                    cap[a ^ 1] += aug
                total += aug
                cut_at = next(i for i, a in enumerate(arcs) if cap[a] == 0)
                del stack[cut_at + 1:]
                del arcs[cut_at:]
                continue
            advanced = False
            while it[v] < len(adj[v]):
                a = adj[v][it[v]]
                w = to[a]
                if cap[a] > 0 and level[w] == level[v] + 1:
                    stack.append(w)
                    arcs.append(a)
                    advanced = True
                    break
                it[v] += 1
            if not advanced:
                level[v] = -1
                stack.pop()
                if arcs:
                    arcs.pop()
                    it[stack[-1]] += 1
        return total

    def max_flow(self, sources, sinks):
        is_sink = bytearray(self.n)
        for t in sinks:
            is_sink[t] = 1
        total = 0
        while True:
            level = self._levels(sources, is_sink)
            if level is None:
                return total
            it = [0] * self.n
            for s in sources:
                total += self._blocking(s, level, it, is_sink)

    def residual_reach(self, sources):
        seen = [False] * self.n
        stack = list(sources)
        for s in sources:
            seen[s] = True
        cap, to, adj = self.cap, self.to, self.adj
        while stack:
            v = stack.pop()
            for a in adj[v]:
                if cap[a] > 0:
                    w = to[a]
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
        return seen


# ---------------------------------------------------------------------------
# problems and results

@dataclass(frozen=True)
class FlowProblem:
    """A marked region plus exact edge capacities aligned with region.edges."""

    marked: MarkedRegion
    capacities: tuple
    denominator: int | None = None

    def __post_init__(self):
        region = self.marked.region
        if len(self.capacities) != region.n_edges:
            raise ValueError("capacity vector does not match edge count")
        for c in self.capacities:
            if not is_infinite(c) and c < 0:
                raise ValueError("capacities must be nonnegative")
        if not self.marked.sources or not self.marked.sinks:
            raise DegenerateRegionError("sources and sinks must be nonempty")

    @classmethod
    def from_field(cls, marked: MarkedRegion, field: CapacityField) -> "FlowProblem":
        caps = tuple(field.capacity_of(e) for e in marked.region.edges)
        return cls(marked, caps, field.distribution.common_denominator)


@dataclass(frozen=True)
class CutResult:
    """A max-flow answer: value, canonical cut, and the cut's statistics."""

    flow_value: object
    cut_edges: tuple
    cut_capacity: object
    cut_cardinality: int
    source_side: frozenset
    lexicographic: bool

    def to_json(self) -> dict:
        def enc(v):
            if is_infinite(v):
                return "inf"
            return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)

        return {
            "flow_value": enc(self.flow_value),
            "cut_capacity": enc(self.cut_capacity),
            "cut_cardinality": self.cut_cardinality,
            "lexicographic": self.lexicographic,
            "cut_edge_ids": [pack_edge(e) for e in self.cut_edges],
            "cut_edges": [[list(x), list(y)] for x, y in
                          (edge_endpoints(e) for e in self.cut_edges)],
        }


def cut_edges_to_csv(cut_edges, path):
    """CSV of cut edges as coordinate pairs x1..xd,y1..yd."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for e in cut_edges:
            x, y = edge_endpoints(e)
            writer.writerow(list(x) + list(y))


def check_cut(marked: MarkedRegion, cut_edges) -> bool:
    """True when removing cut_edges disconnects every source from every sink."""
    blocked = set(cut_edges)
    region = marked.region
    adj = region.adjacency
    seen = set(marked.sources)
    stack = list(marked.sources)
    while stack:
        v = stack.pop()
        for w, idx in adj[v]:
            if region.edges[idx] in blocked or w in seen:
                continue
            if w in marked.sinks:
                return False
            seen.add(w)
            stack.append(w)
    return True


def _scaled_capacities(problem: FlowProblem):
    denom = problem.denominator
    if denom is None:
        denom = 1
        for c in problem.capacities:
            if not is_infinite(c):
                denom = denom * c.denominator // math.gcd(denom, c.denominator)
    scaled = []
    total = 0
    for c in problem.capacities:
        if is_infinite(c):
            scaled.append(None)
        else:
            s = int(c * denom)
            scaled.append(s)
            total += s
    return scaled, total + 1, denom


def _solve(problem: FlowProblem, weights):
    region = problem.marked.region
    vindex = region.vertex_index
    din = _Dinic(region.n_vertices)
    for idx, e in enumerate(region.edges):
        w = weights[idx]
        if w == 0:
            continue
        x, y = edge_endpoints(e)
        din.add_undirected(vindex[x], vindex[y], w)
    src = [vindex[v] for v in sorted(problem.marked.sources)]
    snk = [vindex[v] for v in sorted(problem.marked.sinks)]
    flow = din.max_flow(src, snk)
    reach = din.residual_reach(src)
    cut_idx = []
    for idx, e in enumerate(region.edges):
        x, y = edge_endpoints(e)
        if reach[vindex[x]] != reach[vindex[y]]:
            cut_idx.append(idx)
    if flow != sum(weights[i] for i in cut_idx):
        raise ConsistencyError("max flow does not equal the canonical cut weight")
    side = frozenset(v for v in region.vertices if reach[vindex[v]])
    return flow, side, cut_idx


def _finalize(problem, cut_idx, side, flow_value, cut_capacity, cardinality, lexicographic):
    region = problem.marked.region
    cut_edges = tuple(region.edges[i] for i in cut_idx)
    result = CutResult(flow_value, cut_edges, cut_capacity, cardinality, side, lexicographic)
    if not check_cut(problem.marked, cut_edges):
        raise ConsistencyError("canonical cut does not disconnect sources from sinks")
    return result


def max_flow(problem: FlowProblem) -> CutResult:
    """Exact maximal flow with the canonical (residual-reachable) minimal cut.

    Duality holds by construction and is re-verified: the integer flow must
    equal the crossing weight of the canonical cut, and the cut must
    disconnect (BFS check) on every solve.
    """
    scaled, w_inf, denom = _scaled_capacities(problem)
    weights = [w_inf if s is None else s for s in scaled]
    flow, side, cut_idx = _solve(problem, weights)
    infinite = flow >= w_inf
    has_inf_edge = any(scaled[i] is None for i in cut_idx)
    if infinite != has_inf_edge:
        raise ConsistencyError("infinite flow detection disagrees with cut content")
    if infinite:
        return _finalize(problem, cut_idx, side, INF, INF, len(cut_idx), False)
    value = Fraction(flow, denom)
    return _finalize(problem, cut_idx, side, value, value, len(cut_idx), False)


def lexi_min_cut(problem: FlowProblem) -> CutResult:
    """Among minimal-capacity cuts, one of minimal cardinality.

    Composite integer weights w(e) = c(e)*(m+1) + 1 make the solver minimize
    (capacity, cardinality) lexicographically; divmod by m+1 decodes both
    coordinates and each is checked against the returned cut.
    """
    scaled, w_inf, denom = _scaled_capacities(problem)
    m = problem.marked.region.n_edges
    weights = [w_inf * (m + 1) if s is None else s * (m + 1) + 1 for s in scaled]
    flow, side, cut_idx = _solve(problem, weights)
    if flow >= w_inf * (m + 1):
        if not any(scaled[i] is None for i in cut_idx):
            raise ConsistencyError("forced-infinite cut lacks an infinite edge")
        return _finalize(problem, cut_idx, side, INF, INF, len(cut_idx), False)
    cap_scaled, cardinality = divmod(flow, m + 1)
    if cardinality != len(cut_idx):
        raise ConsistencyError("decoded cardinality disagrees with the cut")
    if cap_scaled != sum(scaled[i] for i in cut_idx):
        raise ConsistencyError("decoded capacity disagrees with the cut")
    value = Fraction(cap_scaled, denom)
    return _finalize(problem, cut_idx, side, value, value, cardinality, True)


# ---------------------------------------------------------------------------
# zero-cut contraction

def _positive_reach(problem: FlowProblem):
    """Vertices reachable from sources through positive-capacity edges."""
    region = problem.marked.region
    adj = region.adjacency
    caps = problem.capacities
    seen = set(problem.marked.sources)
    stack = list(problem.marked.sources)
    while stack:
        v = stack.pop()
        for w, idx in adj[v]:
            c = caps[idx]
            if (is_infinite(c) or c > 0) and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def _contracted_zero_cut(problem: FlowProblem) -> CutResult:
    """Unit min cut after collapsing positive-capacity clusters.

    Exact whenever a zero-capacity cut exists: such a cut never severs a
    positive edge, so the quotient preserves all candidate cuts and their
    cardinalities (parallel zero edges stay distinct arcs).
    """
    region = problem.marked.region
    caps = problem.capacities
    parent = list(range(region.n_vertices))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    vindex = region.vertex_index
    for idx, e in enumerate(region.edges):
        c = caps[idx]
        if is_infinite(c) or c > 0:
            x, y = edge_endpoints(e)
            ra, rb = find(vindex[x]), find(vindex[y])
            if ra != rb:
                parent[ra] = rb

    roots = sorted({find(i) for i in range(region.n_vertices)})
    qid = {r: i for i, r in enumerate(roots)}
    src = sorted({qid[find(vindex[v])] for v in problem.marked.sources})
    snk = sorted({qid[find(vindex[v])] for v in problem.marked.sinks})
    if set(src) & set(snk):
        raise ConsistencyError("positive path joins sources to sinks; zero cut impossible")

    din = _Dinic(len(roots))
    zero_edges = []
    for idx, e in enumerate(region.edges):
        c = caps[idx]
        if is_infinite(c) or c > 0:
            continue
        x, y = edge_endpoints(e)
        u, v = qid[find(vindex[x])], qid[find(vindex[y])]
        if u != v:
            din.add_undirected(u, v, 1)
            zero_edges.append(idx)
    flow = din.max_flow(src, snk)
    reach = din.residual_reach(src)
    cut_idx = []
    for idx in zero_edges:
        x, y = edge_endpoints(region.edges[idx])
        if reach[qid[find(vindex[x])]] != reach[qid[find(vindex[y])]]:
            cut_idx.append(idx)
    if flow != len(cut_idx):
        raise ConsistencyError("contracted flow does not equal cut cardinality")
    side = frozenset(v for v in region.vertices if reach[qid[find(vindex[v])]])
    return _finalize(problem, cut_idx, side, Fraction(0), Fraction(0), len(cut_idx), True)


# ---------------------------------------------------------------------------
# the four flow quantities

def _cylinder_problem(A: HyperRectangle, h, field: CapacityField) -> FlowProblem:
    region = build_cylinder(A, h)
    bottom, top = bottom_top_sets(A, h, region)
    marked = MarkedRegion(region, frozenset(top), frozenset(bottom))
    return FlowProblem.from_field(marked, field)


def phi(A: HyperRectangle, h, field: CapacityField) -> CutResult:
    """Maximal flow from the top to the bottom of cyl(A, h)."""
    return max_flow(_cylinder_problem(A, h, field))


def tau(A: HyperRectangle, h, field: CapacityField) -> CutResult:
    """Maximal flow between the half boundaries of cyl'(A, h)."""
    region, c1, c2 = build_cyl_prime(A, h)
    if not c1 or not c2:
        raise DegenerateRegionError("empty half boundary")
    marked = MarkedRegion(region, frozenset(c1), frozenset(c2))
    return max_flow(FlowProblem.from_field(marked, field))


def psi(A: HyperRectangle, h, field: CapacityField, contract: str = "auto"):
    """Minimal cardinality among minimal-capacity top-bottom cutsets.

    contract="auto" collapses positive clusters whenever no positive path
    joins top to bottom (the maximal flow is then zero and the contraction
    is exact); the composite-weight solve is used otherwise.  Returns
    (cardinality, CutResult).
    """
    problem = _cylinder_problem(A, h, field)
    if contract not in ("auto", "always", "never"):
        raise ValueError("contract must be auto, always or never")
    if contract != "never":
        reach = _positive_reach(problem)
        if not (reach & problem.marked.sinks):
            result = _contracted_zero_cut(problem)
            return result.cut_cardinality, result
        if contract == "always":
            raise ValueError("positive path joins top to bottom; cannot contract")
    result = lexi_min_cut(problem)
    return result.cut_cardinality, result


def chi(A: HyperRectangle, h, field: CapacityField, *,
        constants: RegimeConstants | None = None,
        margin_start: int = 4, margin_cap: int = 1024,
        cap: int = DEFAULT_CLUSTER_CAP, index: ClusterIndex | None = None):
    """Minimal cardinality of a zero-capacity cut from the thickened base to
    the W layer at the random height, inside the laterally infinite slab.

    Solved on a finite lateral window with the escape boundary wired to the
    sinks (so any window answer is a valid slab cut); the margin doubles
    until the optimal cut touches no window-boundary vertex.  Returns
    (cardinality, CutResult, RandomHeight).
    """
    constants = constants or RegimeConstants.for_dimension(A.d)
    require_supercritical_zero(field.distribution, constants)
    if index is None:
        index = ClusterIndex(field, cap)
    rh = random_height(A, h, field, cap=cap, index=index)
    abar = thicken(A).lattice_vertices()
    if not abar:
        raise DegenerateRegionError("thickened base contains no lattice points")

    margin = max(1, margin_start)
    while margin <= margin_cap:
        win = slab_window_scaled(A, rh.scaled, margin)
        vset = win.region.vertex_index
        if any(v not in vset for v in abar):
            raise ConsistencyError("thickened base escapes the slab window")
        sources = frozenset(abar)
        sinks = frozenset(win.w_layer) | win.escape
        if sinks & sources:
            margin *= 2
            continue
        if not sinks:
            raise DegenerateRegionError("slab window has no W layer")
        caps = tuple(Fraction(0) if field.capacity_of(e) == 0 else INF
                     for e in win.region.edges)
        problem = FlowProblem(MarkedRegion(win.region, sources, sinks), caps, 1)
        result = lexi_min_cut(problem)
        if is_infinite(result.flow_value):
            margin *= 2
            continue
        touches = any(x in win.escape or y in win.escape
                      for x, y in (edge_endpoints(e) for e in result.cut_edges))
        if touches:
            margin *= 2
            continue
        for e in result.cut_edges:
            if field.capacity_of(e) != 0:
                raise ConsistencyError("chi cut contains a positive-capacity edge")
        return result.cut_cardinality, result, rh
    raise WindowOverflowError(f"slab window margin exceeded {margin_cap}")


# ---------------------------------------------------------------------------
# serialization

def _enc_value(v):
    if is_infinite(v):
        return "inf"
    return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)


def problem_to_json(problem: FlowProblem) -> dict:
    region = problem.marked.region
    vindex = region.vertex_index
    return {
        "schema": 1,
        "d": region.d,
        "vertices": [list(v) for v in region.vertices],
        "edges": [[vindex[x], vindex[y]] for x, y in
                  (edge_endpoints(e) for e in region.edges)],
        "capacities": [_enc_value(c) for c in problem.capacities],
        "sources": sorted(vindex[v] for v in problem.marked.sources),
        "sinks": sorted(vindex[v] for v in problem.marked.sinks),
    }


def problem_from_json(doc: dict) -> FlowProblem:
    vertices = [tuple(v) for v in doc["vertices"]]
    region = LatticeRegion(doc["d"], vertices)
    vindex = region.vertex_index
    declared = [[vindex[vertices[i]], vindex[vertices[j]]] for i, j in doc["edges"]]
    induced = [[vindex[x], vindex[y]] for x, y in
               (edge_endpoints(e) for e in region.edges)]
    if declared != induced:
        raise ValueError("edge list does not match the induced lattice edges")
    caps = []
    for c in doc["capacities"]:
        caps.append(INF if c == "inf" else as_fraction(c))
    marked = MarkedRegion(region,
                          frozenset(region.vertices[i] for i in doc["sources"]),
                          frozenset(region.vertices[i] for i in doc["sinks"]))
    return FlowProblem(marked, tuple(caps))
