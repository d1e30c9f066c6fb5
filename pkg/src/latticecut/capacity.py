"""Capacity distributions on [0, +inf] and reproducible i.i.d. edge fields.

Distributions are finite atomic laws with exact rational probabilities; the
value +inf is the distinguished symbol INF, never a float.  A field maps a
canonical edge id to its capacity through a counter-based generator, so any
subset of edges evaluated in any order, from any region, sees the same
values for the same (seed, distribution).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .exact import as_fraction
from .geometry import pack_edge
from .rng import uniform_bits53


class _Infinity:
    """The +inf capacity symbol; a singleton, not a float."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __gt__(self, other):
        return not isinstance(other, _Infinity)

    def __ge__(self, other):
        return True

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return isinstance(other, _Infinity)

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_infinite(value) -> bool:
    return isinstance(value, _Infinity)


class RegimeError(RuntimeError):
    """The requested computation needs a different percolation regime."""


def _parse_value(v):
    if is_infinite(v):
        return INF
    if isinstance(v, str) and v.strip().lower() in ("inf", "+inf", "infinity"):
        return INF
    if isinstance(v, float) and math.isinf(v):
        return INF
    f = as_fraction(v)
    if f < 0:
        raise ValueError("capacities must be nonnegative")
    return f


@dataclass(frozen=True)
class CapacityDistribution:
    """Finite atomic law on [0, +inf]; probabilities sum to exactly 1.

    atoms are stored sorted by value, finite values ascending and INF last;
    the inverse CDF over that order defines the field sampling.
    """

    atoms: tuple

    def __post_init__(self):
        finite = [(v, p) for v, p in self.atoms if not is_infinite(v)]
        inf = [(v, p) for v, p in self.atoms if is_infinite(v)]
        if len(inf) > 1:
            raise ValueError("duplicate +inf atom")
        values = [v for v, _ in finite]
        if len(set(values)) != len(values):
            raise ValueError("atom values must be distinct")
        if any(p < 0 or p > 1 for _, p in self.atoms):
            raise ValueError("atom probabilities must lie in [0, 1]")
        if sum(p for _, p in self.atoms) != 1:
            raise ValueError("atom probabilities must sum to exactly 1")
        ordered = tuple(sorted(finite)) + tuple(inf)
        object.__setattr__(self, "atoms", ordered)

    @classmethod
    def from_pairs(cls, pairs):
        return cls(tuple((_parse_value(v), as_fraction(p)) for v, p in pairs))

    @classmethod
    def delta(cls, value):
        return cls.from_pairs([(value, 1)])

    @classmethod
    def bernoulli(cls, p):
        """G_p = (1-p) delta_0 + p delta_1."""
        p = as_fraction(p)
        if p == 0:
            return cls.delta(0)
        if p == 1:
            return cls.delta(1)
        return cls.from_pairs([(0, 1 - p), (1, p)])

    @property
    def zero_mass(self) -> Fraction:
        for v, p in self.atoms:
            if v == 0:
                return p
        return Fraction(0)

    @property
    def infinity_mass(self) -> Fraction:
        for v, p in self.atoms:
            if is_infinite(v):
                return p
        return Fraction(0)

    @property
    def common_denominator(self) -> int:
        den = 1
        for v, _ in self.atoms:
            if not is_infinite(v):
                den = den * v.denominator // math.gcd(den, v.denominator)
        return den

    def is_bernoulli(self) -> bool:
        return all(not is_infinite(v) and v in (0, 1) for v, _ in self.atoms)

    def cumulative(self):
        out = []
        acc = Fraction(0)
        for v, p in self.atoms:
            acc += p
            out.append((v, acc))
        return tuple(out)

    def to_json(self) -> dict:
        def enc(v):
            if is_infinite(v):
                return "inf"
            return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)

        return {"atoms": [{"value": enc(v), "prob": f"{p.numerator}/{p.denominator}"}
                          for v, p in self.atoms]}

    @classmethod
    def from_json(cls, doc: dict):
        return cls.from_pairs([(a["value"], a["prob"]) for a in doc["atoms"]])


class CapacityField:
    """Deterministic realization of an i.i.d. capacity family.

    capacity(edge_id) is a pure function of (seed, edge_id, distribution):
    53 uniform bits from the counter-based mix feed the inverse CDF over the
    distribution's sorted atoms.  The comparison bits/2^53 < p/q runs as
    bits*q < p*2^53 in plain integers, and values are memoized per instance.
    """

    __slots__ = ("seed", "distribution", "_thresholds", "_cache")

    def __init__(self, seed: int, distribution: CapacityDistribution):
        self.seed = seed & ((1 << 64) - 1)
        self.distribution = distribution
        self._thresholds = tuple(
            (v, c.denominator, c.numerator << 53)
            for v, c in distribution.cumulative())
        self._cache = {}

    def capacity(self, edge_id: int):
        cached = self._cache.get(edge_id)
        if cached is not None:
            return cached
        if edge_id < 0:
            raise ValueError("edge ids are nonnegative")
        bits = uniform_bits53(self.seed, edge_id)
        value = self._thresholds[-1][0]
        for v, den, num53 in self._thresholds:
            if bits * den < num53:
                value = v
                break
        self._cache[edge_id] = value
        return value

    def capacity_of(self, edge):
        return self.capacity(pack_edge(edge))

    def __eq__(self, other):
        return (isinstance(other, CapacityField) and self.seed == other.seed
                and self.distribution == other.distribution)

    def __hash__(self):
        return hash((self.seed, self.distribution))

    def __reduce__(self):
        return (CapacityField, (self.seed, self.distribution))


def couple_bernoulli(field: CapacityField) -> CapacityField:
    """The coupled Bernoulli field: capacity 1 exactly where field is positive.

    Because atoms sample through a shared uniform in ascending value order,
    the returned field satisfies the pointwise identity
    output(e) = 1 iff field(e) > 0 (including INF) on every edge.
    """
    p = 1 - field.distribution.zero_mass
    return CapacityField(field.seed, CapacityDistribution.bernoulli(p))


# default bond percolation thresholds; d = 2 is the exact value, d >= 3 are
# standard numerical estimates from the percolation literature and may be
# overridden through configuration
DEFAULT_PC = {
    2: Fraction(1, 2),
    3: Fraction("0.2488"),
    4: Fraction("0.1601"),
    5: Fraction("0.1182"),
}


@dataclass(frozen=True)
class RegimeConstants:
    """Dimension plus the critical bond percolation probability used for labels."""

    d: int
    pc: Fraction

    def __post_init__(self):
        object.__setattr__(self, "pc", as_fraction(self.pc))
        if not 0 < self.pc < 1:
            raise ValueError("pc must lie in (0, 1)")

    @classmethod
    def for_dimension(cls, d: int, pc=None):
        if pc is None:
            if d not in DEFAULT_PC:
                raise ValueError(f"no default pc for d={d}; supply one")
            pc = DEFAULT_PC[d]
        return cls(d, as_fraction(pc))


SUPERCRITICAL_ZERO = "supercritical-zero"
CRITICAL_ZERO = "critical-zero"
SUBCRITICAL_ZERO = "subcritical-zero"


@dataclass(frozen=True)
class Regime:
    label: str
    infinity_ok: bool


def regime_of(distribution: CapacityDistribution, constants: RegimeConstants) -> Regime:
    """Classify G({0}) against 1 - pc(d) and check G({+inf}) < pc(d)."""
    threshold = 1 - constants.pc
    g0 = distribution.zero_mass
    if g0 > threshold:
        label = SUPERCRITICAL_ZERO
    elif g0 == threshold:
        label = CRITICAL_ZERO
    else:
        label = SUBCRITICAL_ZERO
    return Regime(label, distribution.infinity_mass < constants.pc)


def require_supercritical_zero(distribution: CapacityDistribution,
                               constants: RegimeConstants) -> None:
    regime = regime_of(distribution, constants)
    if regime.label != SUPERCRITICAL_ZERO:
        raise RegimeError(
            f"G({{0}}) = {distribution.zero_mass} is not above 1 - pc = "
            f"{1 - constants.pc} (regime {regime.label})")
