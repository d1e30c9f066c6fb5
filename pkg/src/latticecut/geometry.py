"""Discrete geometry on Z^d: cylinders, slabs, and their boundary layers.

All regions are finite induced subgraphs of the hypercubic lattice carved
out by exact predicates.  Directions are primitive integer normal vectors;
membership tests run in the quadratic extension Q[sqrt(|normal|^2)] so that
tilted geometry is decided without floating point.  Non-integral inputs
(float base points or side lengths) get a 1e-9 inclusion slack on every
closed set; boundary points always count as inside.

Vertices are integer tuples.  An edge is (x, axis) for the lattice edge
joining x and x + e_axis, with x the endpoint of smaller coordinate along
axis; this identity is global (region independent) and packs into the
canonical integer edge id consumed by capacity fields.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exact import QuadExt, as_fraction, dot, le_scaled, primitive, quad_le_scaled, vec_sub

SUPPORTED_DIMENSIONS = (2, 3, 4, 5)

# Canonical edge ids pack zigzagged coordinates into 21 bits each; regions
# beyond this extent would silently collide, so refuse them.
COORD_BOUND = 1 << 20
_AXIS_BITS = 3

_TOL = Fraction(1, 10 ** 9)


class InvalidGeometryError(ValueError):
    """Degenerate or malformed geometric input."""


class DegenerateRegionError(ValueError):
    """A constructed region is too thin or empty for the requested use."""


# ---------------------------------------------------------------------------
# lattice primitives

def lattice_neighbors(v):
    for axis in range(len(v)):
        for step in (1, -1):
            yield tuple(c + step if i == axis else c for i, c in enumerate(v)), axis


def edge_between(x, y):
    """Canonical edge (vertex, axis) for two nearest neighbors."""
    diff = [(i, b - a) for i, (a, b) in enumerate(zip(x, y)) if a != b]
    if len(diff) != 1 or abs(diff[0][1]) != 1:
        raise ValueError(f"{x} and {y} are not nearest neighbors")
    axis, step = diff[0]
    return (x if step == 1 else y), axis


def edge_endpoints(edge):
    x, axis = edge
    y = tuple(c + 1 if i == axis else c for i, c in enumerate(x))
    return x, y


def _zigzag(c: int) -> int:
    return 2 * c if c >= 0 else -2 * c - 1


def pack_edge(edge) -> int:
    """Region-independent integer id of a lattice edge.

    Injective for coordinates in (-2^20, 2^20); enlarging a region never
    changes the id of an existing edge.
    """
    x, axis = edge
    packed = 0
    for c in reversed(x):
        if not -COORD_BOUND < c < COORD_BOUND:
            raise ValueError(f"coordinate {c} outside packable range")
        packed = (packed << 21) | _zigzag(c)
    return (packed << _AXIS_BITS) | axis


# ---------------------------------------------------------------------------
# directions and hyperrectangles

@dataclass(frozen=True)
class Direction:
    """A lattice direction: primitive integer normal vector in Z^d."""

    d: int
    normal: tuple

    def __post_init__(self):
        if self.d not in SUPPORTED_DIMENSIONS:
            raise InvalidGeometryError(f"dimension {self.d} unsupported (need 2..5)")
        if len(self.normal) != self.d:
            raise InvalidGeometryError("normal length does not match dimension")
        if all(c == 0 for c in self.normal):
            raise InvalidGeometryError("normal vector is zero")
        if primitive(self.normal) != tuple(self.normal):
            raise InvalidGeometryError("normal must be primitive (gcd of components 1)")

    @classmethod
    def of(cls, normal):
        normal = tuple(int(c) for c in normal)
        return cls(len(normal), primitive(normal))

    @property
    def m(self) -> int:
        """Squared euclidean norm of the normal (the radicand of the direction)."""
        return dot(self.normal, self.normal)

    @property
    def unit(self) -> np.ndarray:
        n = np.asarray(self.normal, dtype=float)
        return n / np.linalg.norm(n)

    @property
    def straight_axis(self):
        """(axis, sign) when the normal is +-e_axis, else None."""
        nz = [(i, c) for i, c in enumerate(self.normal) if c != 0]
        if len(nz) == 1 and abs(nz[0][1]) == 1:
            return nz[0]
        return None


def lateral_frame(normal):
    """Deterministic orthogonal integer frame spanning the hyperplane of normal.

    Exact Gram-Schmidt over the canonical basis in index order, each result
    scaled to a primitive integer vector; ties (dependent candidates) are
    skipped, which is the lexicographic tie-break.
    """
    d = len(normal)
    n = tuple(Fraction(c) for c in normal)
    nn = dot(n, n)
    frame = []
    for k in range(d):
        w = [Fraction(1) if i == k else Fraction(0) for i in range(d)]
        coef = w[k] * n[k] / nn
        w = [wi - coef * ni for wi, ni in zip(w, n)]
        for u in frame:
            uu = dot(u, u)
            coef = dot(w, u) / uu
            w = [wi - coef * ui for wi, ui in zip(w, u)]
        if any(wi != 0 for wi in w):
            frame.append(primitive(w))
        if len(frame) == d - 1:
            break
    return tuple(frame)


@dataclass(frozen=True)
class HyperRectangle:
    """A (d-1)-dimensional box normal to an integer lattice direction.

    The box is base + sum_i s_i * u_i/|u_i| for s_i in [0, L_i], with u_i the
    deterministic integer lateral frame.  side lengths L_i are real lengths
    (Hausdorff measure is their product).
    """

    direction: Direction
    base: tuple
    lateral: tuple
    lengths: tuple
    tol: Fraction

    @classmethod
    def make(cls, normal, side_lengths, base_point=None):
        direction = normal if isinstance(normal, Direction) else Direction.of(normal)
        d = direction.d
        lengths = tuple(as_fraction(x) for x in side_lengths)
        if len(lengths) != d - 1:
            raise InvalidGeometryError(f"need {d - 1} side lengths, got {len(lengths)}")
        if any(L <= 0 for L in lengths):
            raise InvalidGeometryError("side lengths must be positive")
        if base_point is None:
            base = (Fraction(0),) * d
        else:
            base = tuple(as_fraction(x) for x in base_point)
            if len(base) != d:
                raise InvalidGeometryError("base point length does not match dimension")
        frame = lateral_frame(direction.normal)
        tol = Fraction(0) if cls._integral(direction, base, frame, lengths) else _TOL
        return cls(direction, base, frame, lengths, tol)

    @staticmethod
    def _integral(direction, base, frame, lengths):
        from math import isqrt

        if any(b.denominator != 1 for b in base):
            return False
        for u, L in zip(frame, lengths):
            mi = dot(u, u)
            root = isqrt(mi)
            if root * root != mi:
                return False
            # corner displacement (L/sqrt(mi)) * u must be an integer vector
            factor = L / root
            if any((factor * c).denominator != 1 for c in u):
                return False
        return True

    @classmethod
    def straight(cls, side_lengths, d=None, base_point=None, axis=None):
        """Axis-aligned base Prod[0, k_i] x {c} normal to e_axis (default last)."""
        if d is None:
            d = len(side_lengths) + 1
        if axis is None:
            axis = d - 1
        normal = tuple(1 if i == axis else 0 for i in range(d))
        return cls.make(normal, side_lengths, base_point)

    def __post_init__(self):
        # cross checks of the declared frame invariants
        n = self.direction.normal
        for u in self.lateral:
            if dot(u, n) != 0:
                raise InvalidGeometryError("lateral vector not orthogonal to normal")
        for i, u in enumerate(self.lateral):
            for v in self.lateral[i + 1:]:
                if dot(u, v) != 0:
                    raise InvalidGeometryError("lateral vectors not orthogonal")

    @property
    def d(self) -> int:
        return self.direction.d

    @property
    def area(self) -> Fraction:
        a = Fraction(1)
        for L in self.lengths:
            a *= L
        return a

    @property
    def side_vectors(self) -> np.ndarray:
        """Float lateral vectors scaled to their side lengths (reporting only)."""
        rows = []
        for u, L in zip(self.lateral, self.lengths):
            arr = np.asarray(u, dtype=float)
            rows.append(arr / np.linalg.norm(arr) * float(L))
        return np.array(rows)

    def scale(self, n) -> "HyperRectangle":
        """The dilation nA about the origin."""
        f = as_fraction(n)
        if f <= 0:
            raise InvalidGeometryError("scale factor must be positive")
        return HyperRectangle(self.direction, tuple(b * f for b in self.base),
                              self.lateral, tuple(L * f for L in self.lengths), self.tol)

    def translate(self, vec) -> "HyperRectangle":
        off = tuple(as_fraction(x) for x in vec)
        return HyperRectangle(self.direction, tuple(b + o for b, o in zip(self.base, off)),
                              self.lateral, self.lengths, self.tol)

    # -- exact membership helpers ------------------------------------------

    def height_scaled(self, p) -> Fraction:
        """(p - base) . normal, i.e. real height above hyp(A) times |normal|."""
        return dot(vec_sub(tuple(as_fraction(c) for c in p), self.base),
                   self.direction.normal)

    def lateral_ok(self, p, pad=0) -> bool:
        q = vec_sub(tuple(as_fraction(c) for c in p), self.base)
        pad = as_fraction(pad)
        for u, L in zip(self.lateral, self.lengths):
            s = dot(q, u)
            mi = dot(u, u)
            if not le_scaled(-s, self.tol + pad, mi):
                return False
            if not le_scaled(s, L + self.tol + pad, mi):
                return False
        return True

    def is_integral_straight(self) -> bool:
        return (self.direction.straight_axis is not None and self.tol == 0
                and all(b.denominator == 1 for b in self.base)
                and all(L.denominator == 1 for L in self.lengths))


def point_in_cylinder(A: HyperRectangle, h, p) -> bool:
    """p in cyl(A, h) = {x + t*v : x in A, t in [0, h]}, boundary inclusive."""
    h = as_fraction(h)
    r = A.height_scaled(p)
    m = A.direction.m
    if not le_scaled(-r, A.tol, m):
        return False
    if not le_scaled(r, h + A.tol, m):
        return False
    return A.lateral_ok(p)


def point_in_cyl_prime(A: HyperRectangle, h, p) -> bool:
    """p in cyl'(A, h) = {x + t*v : x in A, t in [-h, h]}."""
    h = as_fraction(h)
    r = A.height_scaled(p)
    m = A.direction.m
    if not le_scaled(-r, h + A.tol, m):
        return False
    if not le_scaled(r, h + A.tol, m):
        return False
    return A.lateral_ok(p)


# ---------------------------------------------------------------------------
# regions

class LatticeRegion:
    """Finite induced subgraph of Z^d with canonical vertex/edge enumeration.

    Vertices sort lexicographically; edges sort by (smaller endpoint, axis).
    Construction is deterministic given the vertex set, so two builds from
    equal inputs enumerate identically.
    """

    __slots__ = ("d", "vertices", "vertex_index", "edges", "edge_index", "_adj")

    def __init__(self, d, vertices):
        self.d = d
        self.vertices = tuple(sorted(vertices))
        self.vertex_index = {v: i for i, v in enumerate(self.vertices)}
        vset = self.vertex_index
        edges = []
        for v in self.vertices:
            for axis in range(d):
                w = tuple(c + 1 if i == axis else c for i, c in enumerate(v))
                if w in vset:
                    edges.append((v, axis))
        edges.sort()
        self.edges = tuple(edges)
        self.edge_index = {e: i for i, e in enumerate(self.edges)}
        self._adj = None

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_edges(self):
        return len(self.edges)

    def __contains__(self, v):
        return v in self.vertex_index

    @property
    def adjacency(self):
        """vertex -> list of (neighbor, edge index), built on first use."""
        if self._adj is None:
            adj = {v: [] for v in self.vertices}
            for idx, e in enumerate(self.edges):
                x, y = edge_endpoints(e)
                adj[x].append((y, idx))
                adj[y].append((x, idx))
            self._adj = adj
        return self._adj

    def edge_ids(self):
        return tuple(pack_edge(e) for e in self.edges)

    def export_vertices_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            for v in self.vertices:
                writer.writerow(v)


@dataclass(frozen=True)
class MarkedRegion:
    """A region with disjoint source and sink vertex sets."""

    region: LatticeRegion
    sources: frozenset
    sinks: frozenset

    def __post_init__(self):
        if self.sources & self.sinks:
            raise DegenerateRegionError("sources and sinks intersect")
        verts = self.region.vertex_index
        if not all(v in verts for v in self.sources) or not all(v in verts for v in self.sinks):
            raise DegenerateRegionError("marked vertices outside region")


def _float_corners(A: HyperRectangle, t_lo, t_hi, lat_pad=0.0):
    base = np.asarray([float(b) for b in A.base])
    unit = A.direction.unit
    units = []
    for u in A.lateral:
        arr = np.asarray(u, dtype=float)
        units.append(arr / np.linalg.norm(arr))
    corners = []
    for deltas in itertools.product(*[(-lat_pad, float(L) + lat_pad) for L in A.lengths]):
        p = base.copy()
        for s, uv in zip(deltas, units):
            p = p + s * uv
        for t in (float(t_lo), float(t_hi)):
            corners.append(p + t * unit)
    return np.array(corners)


def _scan_box(corners, pad=1.5):
    lo = np.floor(corners.min(axis=0) - pad).astype(int)
    hi = np.ceil(corners.max(axis=0) + pad).astype(int)
    return itertools.product(*[range(a, b + 1) for a, b in zip(lo, hi)])


def _straight_ranges(A: HyperRectangle, h):
    """Coordinate ranges of Z^d in cyl(A, h) for integral straight geometry."""
    axis, sign = A.direction.straight_axis
    ranges = []
    lat = iter(A.lengths)
    for i in range(A.d):
        c = int(A.base[i])
        if i == axis:
            t0, t1 = sorted((c, c + sign * int(h)))
            ranges.append(range(t0, t1 + 1))
        else:
            L = next(lat)
            # frame for +-e_axis is the identity on the other axes
            ranges.append(range(c, c + int(L) + 1))
    return ranges


def build_cylinder(A: HyperRectangle, h) -> LatticeRegion:
    """Z^d intersected with cyl(A, h), with all induced nearest-neighbor edges."""
    h = as_fraction(h)
    if h <= 0:
        raise InvalidGeometryError("cylinder height must be positive")
    if A.is_integral_straight():
        vertices = list(itertools.product(*_straight_ranges(A, int(h))))
        return LatticeRegion(A.d, vertices)
    corners = _float_corners(A, 0, h)
    vertices = [p for p in _scan_box(corners) if point_in_cylinder(A, h, p)]
    return LatticeRegion(A.d, vertices)


def _segment_hits_level(A: HyperRectangle, level, x, y):
    """Does the segment [x, y] meet A + level*v?  level is a rational height.

    Exact: heights are compared in Q[sqrt(m)]; a crossing point's lateral
    coordinates stay in the same field and are squared against the bounds.
    """
    m = A.direction.m
    r_x = A.height_scaled(x)
    r_y = A.height_scaled(y)
    s = QuadExt.sqrt_scaled(as_fraction(level), m)
    dx = QuadExt.rational(r_x, m) - s
    dy = QuadExt.rational(r_y, m) - s
    sx, sy = dx.sign(), dy.sign()
    if sx == 0:
        # x lies on the level plane; x in cyl means its laterals are in range
        return True
    if sy == 0:
        return A.lateral_ok(y)
    if sx == sy:
        return False
    lam = (s - r_x) / (r_y - r_x)
    qx = vec_sub(tuple(as_fraction(c) for c in x), A.base)
    step = vec_sub(tuple(Fraction(c) for c in y), tuple(Fraction(c) for c in x))
    for u, L in zip(A.lateral, A.lengths):
        c = dot(qx, u)
        dstep = dot(step, u)
        val = lam * dstep + c
        mi = dot(u, u)
        if not quad_le_scaled(-val, A.tol, mi):
            return False
        if not quad_le_scaled(val, L + A.tol, mi):
            return False
    return True


def bottom_top_sets(A: HyperRectangle, h, region: LatticeRegion | None = None):
    """Discretized bottom B(A, h) and top T(A, h) of cyl(A, h).

    A vertex is in B (resp. T) when one of its lattice neighbors leaves the
    cylinder through the base plane A (resp. the shifted plane A + h*v).
    """
    h = as_fraction(h)
    if region is None:
        region = build_cylinder(A, h)
    if region.n_vertices == 0:
        raise DegenerateRegionError("empty cylinder")
    if A.is_integral_straight():
        # only the two extreme layers can emit a segment meeting the planes
        axis, sign = A.direction.straight_axis
        c = int(A.base[axis])
        top_r = int(h)
        bottom = tuple(v for v in region.vertices if v[axis] == c)
        top = tuple(v for v in region.vertices if sign * (v[axis] - c) == top_r)
        if not bottom or not top:
            raise DegenerateRegionError("cylinder too thin: empty bottom or top layer")
        return bottom, top
    bottom, top = [], []
    for x in region.vertices:
        in_b = in_t = False
        for y, _axis in lattice_neighbors(x):
            if y in region.vertex_index:
                continue
            if not in_b and _segment_hits_level(A, 0, x, y):
                in_b = True
            if not in_t and _segment_hits_level(A, h, x, y):
                in_t = True
            if in_b and in_t:
                break
        if in_b:
            bottom.append(x)
        if in_t:
            top.append(x)
    if not bottom or not top:
        raise DegenerateRegionError("cylinder too thin: empty bottom or top layer")
    return tuple(bottom), tuple(top)


def build_cyl_prime(A: HyperRectangle, h):
    """Z^d in cyl'(A, h) plus the discretized half boundaries C'_1, C'_2.

    C'_1 is the half on the +v side of A, C'_2 the -v side; vertices on the
    plane of A belong to neither.
    """
    h = as_fraction(h)
    if h <= 0:
        raise InvalidGeometryError("cylinder height must be positive")
    corners = _float_corners(A, -h, h)
    vertices = [p for p in _scan_box(corners) if point_in_cyl_prime(A, h, p)]
    region = LatticeRegion(A.d, vertices)
    c1, c2 = [], []
    for x in region.vertices:
        r = A.height_scaled(x)
        if r == 0:
            continue
        if any(y not in region.vertex_index for y, _ in lattice_neighbors(x)):
            (c1 if r > 0 else c2).append(x)
    return region, tuple(c1), tuple(c2)


class ThickenedBase:
    """Predicate for the thickened base cyl(A, d) (written Abar)."""

    def __init__(self, A: HyperRectangle):
        self.rect = A
        self.height = Fraction(A.d)

    def contains(self, p) -> bool:
        return point_in_cylinder(self.rect, self.height, p)

    def lattice_vertices(self):
        return build_cylinder(self.rect, self.height).vertices


def thicken(A: HyperRectangle) -> ThickenedBase:
    return ThickenedBase(A)


@dataclass(frozen=True)
class SlabWindow:
    """A laterally truncated slab: region, W layer, and escape flags.

    escape marks region vertices with a lattice neighbor that stays inside
    the slab's height range but leaves the lateral window; a cut that never
    touches them is a valid cut of the laterally infinite slab.
    """

    region: LatticeRegion
    w_layer: tuple
    escape: frozenset
    margin: int


def _in_slab_heights(A, r, s_scaled):
    m = A.direction.m
    if not le_scaled(-r, A.tol, m):
        return False
    gap = QuadExt.rational(r, m) - s_scaled - QuadExt.sqrt_scaled(A.tol, m)
    return gap.sign() <= 0


def _beyond_slab(A, r, s_scaled):
    m = A.direction.m
    gap = QuadExt.rational(r, m) - s_scaled - QuadExt.sqrt_scaled(A.tol, m)
    return gap.sign() > 0


def _slab_window_straight(A: HyperRectangle, s: Fraction, margin: int) -> SlabWindow:
    axis, sign = A.direction.straight_axis
    c = int(A.base[axis])
    top_r = int(s)
    ranges = []
    lat = iter(A.lengths)
    for i in range(A.d):
        if i == axis:
            t0, t1 = sorted((c, c + sign * top_r))
            ranges.append(range(t0, t1 + 1))
        else:
            b = int(A.base[i])
            ranges.append(range(b - margin, b + int(next(lat)) + margin + 1))
    region = LatticeRegion(A.d, list(itertools.product(*ranges)))
    w_layer = tuple(v for v in region.vertices if sign * (v[axis] - c) == top_r)
    escape = frozenset(
        v for v in region.vertices
        if any(v[i] in (ranges[i].start, ranges[i].stop - 1)
               for i in range(A.d) if i != axis))
    return SlabWindow(region, w_layer, escape, margin)


def slab_window_scaled(A: HyperRectangle, s_scaled: QuadExt, lateral_margin: int) -> SlabWindow:
    if lateral_margin < 0:
        raise InvalidGeometryError("lateral margin must be nonnegative")
    if A.is_integral_straight() and s_scaled.b == 0:
        return _slab_window_straight(A, s_scaled.a, lateral_margin)
    t_real = float(s_scaled) / A.direction.m ** 0.5
    corners = _float_corners(A, -1, t_real + 1, lat_pad=lateral_margin + 1)
    vertices = []
    for p in _scan_box(corners):
        r = A.height_scaled(p)
        if _in_slab_heights(A, r, s_scaled) and A.lateral_ok(p, pad=lateral_margin):
            vertices.append(p)
    region = LatticeRegion(A.d, vertices)
    w_layer = []
    escape = set()
    for x in region.vertices:
        in_w = False
        for y, _ in lattice_neighbors(x):
            r_y = A.height_scaled(y)
            if _beyond_slab(A, r_y, s_scaled):
                in_w = True
            elif y not in region.vertex_index and _in_slab_heights(A, r_y, s_scaled):
                escape.add(x)
        if in_w:
            w_layer.append(x)
    return SlabWindow(region, tuple(w_layer), frozenset(escape), lateral_margin)


def slab_window(A: HyperRectangle, t, lateral_margin: int) -> SlabWindow:
    """Finite window of slab(A, t, v) with W(A, t, v) and escape flags.

    t is the real slab height (t >= 0); the lateral extent is A's, inflated
    by lateral_margin lattice units per side.
    """
    t = as_fraction(t)
    if t < 0:
        raise InvalidGeometryError("slab height must be nonnegative")
    return slab_window_scaled(A, QuadExt.sqrt_scaled(t, A.direction.m), lateral_margin)


# ---------------------------------------------------------------------------
# serialization

def _num_to_json(x):
    f = as_fraction(x)
    return int(f) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def geometry_to_json(A: HyperRectangle, height=None) -> dict:
    doc = {
        "d": A.d,
        "normal": list(A.direction.normal),
        "base_point": [_num_to_json(b) for b in A.base],
        "side_lengths": [_num_to_json(L) for L in A.lengths],
    }
    if height is not None:
        doc["height"] = _num_to_json(height)
    return doc


def geometry_from_json(doc: dict):
    """Returns (HyperRectangle, height or None)."""
    A = HyperRectangle.make(doc["normal"], doc["side_lengths"],
                            doc.get("base_point"))
    height = doc.get("height")
    return A, (as_fraction(height) if height is not None else None)
