"""Monte Carlo campaigns and statistical diagnostics at desk scale.

Campaigns run independent replicates of the flow quantities over a ladder of
scales, with per-replicate seeds derived statelessly from the master seed,
so results are bit-identical for any worker count.  Aggregation uses
percentile bootstrap confidence intervals; a campaign of a degenerate
distribution (delta_0, delta_1) has zero sampling variance by construction.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from multiprocessing import Pool

import numpy as np

from .capacity import CapacityDistribution, CapacityField, RegimeConstants, \
    couple_bernoulli, is_infinite, require_supercritical_zero
from .clusters import ClusterIndex, ConsistencyError, DEFAULT_CLUSTER_CAP
from .exact import as_fraction
from .geometry import HyperRectangle, bottom_top_sets, build_cylinder
from .mincut import chi, phi, psi
from .rng import derive_seed

# replicate-id streams reserved for derived randomness; real replicate
# indices stay below 2**32
BOOTSTRAP_STREAM = 1 << 40
CHI_BOOTSTRAP_STREAM = (1 << 40) + 1
VAR_BOOTSTRAP_STREAM = (1 << 40) + 2

D2_SCOPE_WARNING = ("d=2 campaign: outside the scope of the almost-sure "
                    "convergence theorem for psi/area")


@dataclass(frozen=True)
class HeightSchedule:
    """A height function n -> h(n) satisfying h/log n -> inf and h/n -> 0.

    Forms: sqrt h(n)=ceil(c*sqrt(n)); power h(n)=ceil(c*n**alpha) with
    alpha in (0,1); polylog h(n)=ceil(c*log(n+1)**beta) with beta > 1.
    The constraint is enforced symbolically at construction.
    """

    form: str = "sqrt"
    c: float = 1.0
    alpha: float | None = None
    beta: float | None = None

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("schedule constant c must be positive")
        if self.form == "sqrt":
            pass
        elif self.form == "power":
            if self.alpha is None or not 0 < self.alpha < 1:
                raise ValueError("power schedule needs alpha in (0, 1)")
        elif self.form == "polylog":
            if self.beta is None or self.beta <= 1:
                raise ValueError("polylog schedule needs beta > 1")
        else:
            raise ValueError(f"unknown schedule form {self.form!r}")

    def height(self, n: int) -> int:
        if n < 1:
            raise ValueError("scale must be at least 1")
        if self.form == "sqrt":
            return math.ceil(self.c * math.sqrt(n))
        if self.form == "power":
            return math.ceil(self.c * n ** self.alpha)
        return math.ceil(self.c * math.log(n + 1) ** self.beta)

    def to_json(self) -> dict:
        doc = {"form": self.form, "c": self.c}
        if self.alpha is not None:
            doc["alpha"] = self.alpha
        if self.beta is not None:
            doc["beta"] = self.beta
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "HeightSchedule":
        return cls(doc.get("form", "sqrt"), doc.get("c", 1.0),
                   doc.get("alpha"), doc.get("beta"))


@dataclass(frozen=True)
class CampaignSpec:
    """Everything a replicate worker needs; picklable and immutable."""

    distribution: CapacityDistribution
    rect: HyperRectangle
    schedule: HeightSchedule
    scales: tuple
    replicates: int
    seed: int
    include_chi: bool = False
    include_events: bool = False
    audit_coupling: bool = True
    contract: str = "auto"
    margin_start: int = 4
    margin_cap: int = 1024
    cluster_cap: int = DEFAULT_CLUSTER_CAP
    pc: object = None

    def __post_init__(self):
        if self.replicates < 1 or self.replicates >= 1 << 32:
            raise ValueError("replicates must be in [1, 2**32)")
        if any(n < 1 for n in self.scales):
            raise ValueError("scales must be positive")

    def constants(self) -> RegimeConstants:
        return RegimeConstants.for_dimension(self.rect.d, self.pc)


@dataclass(frozen=True)
class ReplicateRecord:
    scale: int
    replicate: int
    seed: int
    psi_card: int
    flow_capacity: object
    chi_card: int | None
    chi_height: int | None
    height: float | None
    event_e: bool | None
    event_g: bool | None
    event_h: bool | None
    psi_coupled: int | None
    coupling_checked: bool


def _replicate_worker(task) -> ReplicateRecord:
    spec, n, r = task
    seed = derive_seed(spec.seed, r, n)
    field = CapacityField(seed, spec.distribution)
    A_n = spec.rect.scale(n)
    h = spec.schedule.height(n)

    psi_card, result = psi(A_n, h, field, contract=spec.contract)
    flow_capacity = result.cut_capacity

    chi_card = chi_height = height = None
    index = None
    if spec.include_chi:
        index = ClusterIndex(field, spec.cluster_cap)
        # chi's null-cutset construction needs its height above 2d, which
        # flat schedules undercut at desk scales; the limit is height
        # independent, so floor it
        chi_height = max(h, 2 * A_n.d + 1)
        chi_card, _chi_res, rh = chi(
            A_n, chi_height, field, constants=spec.constants(),
            margin_start=spec.margin_start, margin_cap=spec.margin_cap,
            cap=spec.cluster_cap, index=index)
        height = rh.value

    nontrivial_coupling = spec.audit_coupling and not spec.distribution.is_bernoulli()
    event_e = event_g = event_h = None
    if spec.include_events or nontrivial_coupling:
        if index is None:
            index = ClusterIndex(field, spec.cluster_cap)
        bottom, _top = bottom_top_sets(A_n, h)
        event_h = all(2 * index.size(x) <= h for x in bottom)
    if spec.include_events:
        half = build_cylinder(A_n, Fraction(h, 2))
        event_e = all(2 * index.size(x) < h for x in half.vertices)
        full = build_cylinder(A_n, h)
        event_g = all(4 * index.size(x) <= h and index.size(x) ** 4 <= n
                      for x in full.vertices)

    psi_coupled = None
    coupling_checked = False
    if nontrivial_coupling and event_h and flow_capacity == 0:
        coupled = couple_bernoulli(field)
        psi_coupled, _ = psi(A_n, h, coupled, contract=spec.contract)
        coupling_checked = True
        if psi_coupled != psi_card:
            raise ConsistencyError(
                f"coupling audit failed at scale {n} replicate {r}: "
                f"psi_G = {psi_card}, psi_Gp = {psi_coupled}")

    return ReplicateRecord(n, r, seed, psi_card, flow_capacity, chi_card, chi_height,
                           height, event_e, event_g, event_h, psi_coupled,
                           coupling_checked)


def run_campaign(spec: CampaignSpec, workers: int = 1):
    """All replicate records, ordered by (scale, replicate).

    The worker count is a wall-time knob only: records are a pure function
    of (spec, per-replicate derived seed).
    """
    tasks = [(spec, n, r) for n in spec.scales for r in range(spec.replicates)]
    if workers <= 1:
        return tuple(_replicate_worker(t) for t in tasks)
    with Pool(workers) as pool:
        return tuple(pool.map(_replicate_worker, tasks, chunksize=1))


# ---------------------------------------------------------------------------
# statistics

def bootstrap_ci(values, seed: int, resamples: int = 10_000, alpha: float = 0.05):
    """Percentile bootstrap CI for the mean; deterministic given the seed."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return (float("nan"), float("nan"))
    if np.all(arr == arr[0]):
        return (float(arr[0]), float(arr[0]))
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, arr.size, size=(resamples, arr.size))
    means = arr[idx].mean(axis=1)
    lo, hi = np.quantile(means, [alpha / 2, 1 - alpha / 2])
    return (float(lo), float(hi))


def _var_se_bootstrap(values, seed: int, resamples: int = 2_000) -> float:
    """Bootstrap standard error of the sample variance."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 2 or np.all(arr == arr[0]):
        return 0.0
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, arr.size, size=(resamples, arr.size))
    vars_ = arr[idx].var(axis=1, ddof=1)
    return float(vars_.std(ddof=1))


@dataclass(frozen=True)
class ScaleStats:
    n: int
    h: int
    area: Fraction
    count: int
    psi_mean: float
    psi_var: float
    psi_area_mean: float
    psi_area_ci: tuple
    psi_area_var: float
    flow_area_mean: float
    chi_h: int | None
    chi_area_mean: float | None
    chi_area_ci: tuple | None
    chi_area_var: float | None
    height_mean: float | None


@dataclass(frozen=True)
class EstimateReport:
    """Per-scale estimates of psi/area (and chi/area), plus the headline
    point estimates zeta_hat and nu_hat taken at the largest scale."""

    master_seed: int
    replicates: int
    schedule: HeightSchedule
    distribution: CapacityDistribution
    per_scale: tuple
    zeta_hat: float
    nu_hat: float
    warnings: tuple
    raw: dict

    def stats_for(self, n: int) -> ScaleStats:
        for s in self.per_scale:
            if s.n == n:
                return s
        raise KeyError(f"no scale {n} in report")

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "master_seed": self.master_seed,
            "replicates": self.replicates,
            "schedule": self.schedule.to_json(),
            "distribution": self.distribution.to_json(),
            "zeta_hat": self.zeta_hat,
            "nu_hat": self.nu_hat,
            "warnings": list(self.warnings),
            "scales": [
                {
                    "n": s.n, "h": s.h,
                    "area": f"{s.area.numerator}/{s.area.denominator}",
                    "count": s.count,
                    "psi_mean": s.psi_mean, "psi_var": s.psi_var,
                    "psi_area_mean": s.psi_area_mean,
                    "psi_area_ci": list(s.psi_area_ci),
                    "psi_area_var": s.psi_area_var,
                    "flow_area_mean": s.flow_area_mean,
                    "chi_h": s.chi_h,
                    "chi_area_mean": s.chi_area_mean,
                    "chi_area_ci": None if s.chi_area_ci is None else list(s.chi_area_ci),
                    "chi_area_var": s.chi_area_var,
                    "height_mean": s.height_mean,
                }
                for s in self.per_scale
            ],
        }


def _mean_flow_area(flows, area) -> float:
    vals = []
    for f in flows:
        if is_infinite(f):
            return math.inf
        vals.append(float(f) / float(area))
    return float(np.mean(vals)) if vals else float("nan")


def summarize_campaign(spec: CampaignSpec, records) -> EstimateReport:
    per_scale = []
    raw = {}
    by_scale = {n: [rec for rec in records if rec.scale == n] for n in spec.scales}
    for n in spec.scales:
        recs = by_scale[n]
        area = spec.rect.scale(n).area
        area_f = float(area)
        psis = np.array([rec.psi_card for rec in recs], dtype=float)
        psi_area = psis / area_f
        ci = bootstrap_ci(psi_area, derive_seed(spec.seed, BOOTSTRAP_STREAM, n))
        mean_pa = float(psi_area.mean())
        if not (math.isnan(ci[0]) or ci[0] <= mean_pa <= ci[1]):
            raise ConsistencyError("bootstrap CI does not contain its mean")
        chis = [rec.chi_card for rec in recs if rec.chi_card is not None]
        chi_mean = chi_ci = chi_var = chi_h = None
        if chis:
            chi_area = np.array(chis, dtype=float) / area_f
            chi_mean = float(chi_area.mean())
            chi_ci = bootstrap_ci(chi_area, derive_seed(spec.seed, CHI_BOOTSTRAP_STREAM, n))
            if not chi_ci[0] <= chi_mean <= chi_ci[1]:
                raise ConsistencyError("bootstrap CI does not contain its mean")
            chi_var = float(chi_area.var(ddof=1)) if len(chis) > 1 else 0.0
            chi_h = next(rec.chi_height for rec in recs if rec.chi_height is not None)
        heights = [rec.height for rec in recs if rec.height is not None]
        per_scale.append(ScaleStats(
            n=n, h=spec.schedule.height(n), area=area, count=len(recs),
            psi_mean=float(psis.mean()),
            psi_var=float(psis.var(ddof=1)) if len(recs) > 1 else 0.0,
            psi_area_mean=mean_pa,
            psi_area_ci=ci,
            psi_area_var=float(psi_area.var(ddof=1)) if len(recs) > 1 else 0.0,
            flow_area_mean=_mean_flow_area([rec.flow_capacity for rec in recs], area),
            chi_h=chi_h, chi_area_mean=chi_mean, chi_area_ci=chi_ci,
            chi_area_var=chi_var,
            height_mean=float(np.mean(heights)) if heights else None,
        ))
        raw[n] = {
            "psi": [rec.psi_card for rec in recs],
            "chi": chis,
            "flow": [math.inf if is_infinite(rec.flow_capacity)
                     else float(rec.flow_capacity) for rec in recs],
        }
    largest = max(spec.scales)
    top = next(s for s in per_scale if s.n == largest)
    warnings = (D2_SCOPE_WARNING,) if spec.rect.d == 2 else ()
    return EstimateReport(spec.seed, spec.replicates, spec.schedule,
                          spec.distribution, tuple(per_scale),
                          top.psi_area_mean, top.flow_area_mean, warnings, raw)


def estimate_zeta(distribution: CapacityDistribution, A: HyperRectangle,
                  schedule: HeightSchedule, scales, replicates: int, seed: int, *,
                  include_chi: bool = False, include_events: bool = False,
                  workers: int = 1, pc=None, contract: str = "auto",
                  margin_start: int = 4, margin_cap: int = 1024,
                  cluster_cap: int = DEFAULT_CLUSTER_CAP) -> EstimateReport:
    """Monte Carlo estimate of the cutset-size constant zeta = lim psi/area.

    Requires the supercritical-zero regime.  The point estimate is the
    largest-scale mean (no extrapolation); d = 2 runs are permitted but the
    report carries a scope warning.
    """
    constants = RegimeConstants.for_dimension(A.d, pc)
    require_supercritical_zero(distribution, constants)
    spec = CampaignSpec(distribution, A, schedule, tuple(scales), replicates, seed,
                        include_chi=include_chi, include_events=include_events,
                        contract=contract, margin_start=margin_start,
                        margin_cap=margin_cap, cluster_cap=cluster_cap, pc=pc)
    records = run_campaign(spec, workers)
    return summarize_campaign(spec, records)


# ---------------------------------------------------------------------------
# positivity scan

@dataclass(frozen=True)
class PositivityScan:
    n: int
    h: object
    area: Fraction
    rows: tuple  # (zero_mass: Fraction, mean flow/area: float, values: tuple)

    def to_json(self) -> dict:
        return {
            "schema": 1, "n": self.n, "h": str(self.h),
            "area": f"{self.area.numerator}/{self.area.denominator}",
            "rows": [{"zero_mass": f"{g.numerator}/{g.denominator}",
                      "mean_flow_per_area": m, "values": list(vals)}
                     for g, m, vals in self.rows],
        }


def _scan_worker(task):
    A_n, h, g0, gi, r, seed = task
    dist = CapacityDistribution.bernoulli(1 - g0)
    field = CapacityField(derive_seed(seed, r, gi), dist)
    result = phi(A_n, h, field)
    return float(result.flow_value) / float(A_n.area)


def positivity_scan(A: HyperRectangle, n: int, h, zero_mass_grid, replicates: int,
                    seed: int, *, workers: int = 1) -> PositivityScan:
    """Rescaled flow through cyl(nA, h) across a grid of G({0}) values.

    The flow constant vanishes exactly when G({0}) passes 1 - pc(d), so the
    emitted table localizes the positivity transition.
    """
    A_n = A.scale(n)
    grid = [as_fraction(g) for g in zero_mass_grid]
    if any(not 0 <= g <= 1 for g in grid):
        raise ValueError("zero-mass grid entries must lie in [0, 1]")
    tasks = [(A_n, as_fraction(h), g0, gi, r, seed)
             for gi, g0 in enumerate(grid) for r in range(replicates)]
    if workers <= 1:
        flat = [_scan_worker(t) for t in tasks]
    else:
        with Pool(workers) as pool:
            flat = pool.map(_scan_worker, tasks, chunksize=1)
    rows = []
    for gi, g0 in enumerate(grid):
        vals = tuple(flat[gi * replicates: (gi + 1) * replicates])
        rows.append((g0, float(np.mean(vals)), vals))
    return PositivityScan(n, as_fraction(h), A_n.area, tuple(rows))


# ---------------------------------------------------------------------------
# concentration diagnostic

@dataclass(frozen=True)
class ConcentrationRow:
    n: int
    count: int
    psi_mean: float
    psi_var: float
    bound: float
    var_se: float
    audit_a: bool
    psi_area_var: float


@dataclass(frozen=True)
class ConcentrationReport:
    rows: tuple
    audit_a_all: bool
    audit_b: bool
    slack_sigma: float

    def to_json(self) -> dict:
        return {
            "schema": 1, "slack_sigma": self.slack_sigma,
            "audit_a_all": self.audit_a_all, "audit_b": self.audit_b,
            "rows": [{"n": r.n, "count": r.count, "psi_mean": r.psi_mean,
                      "psi_var": r.psi_var, "bound": r.bound, "var_se": r.var_se,
                      "audit_a": r.audit_a, "psi_area_var": r.psi_area_var}
                     for r in self.rows],
        }


def concentration_diagnostic(distribution: CapacityDistribution, A: HyperRectangle,
                             schedule: HeightSchedule, scales, replicates: int,
                             seed: int, *, workers: int = 1, pc=None,
                             slack_sigma: float = 3.0) -> ConcentrationReport:
    """Variance audit of psi under the coupled Bernoulli field.

    Audit (a): empirical Var(psi) <= 4*sqrt(n)*mean(psi) plus slack_sigma
    bootstrap standard errors of the variance, per scale.  Audit (b):
    Var(psi/area) weakly decreasing across the top half of the scales.
    """
    constants = RegimeConstants.for_dimension(A.d, pc)
    require_supercritical_zero(distribution, constants)
    coupled = CapacityDistribution.bernoulli(1 - distribution.zero_mass)
    spec = CampaignSpec(coupled, A, schedule, tuple(scales), replicates, seed, pc=pc)
    records = run_campaign(spec, workers)
    rows = []
    area_vars = []
    for n in spec.scales:
        psis = np.array([rec.psi_card for rec in records if rec.scale == n], dtype=float)
        var = float(psis.var(ddof=1)) if psis.size > 1 else 0.0
        mean = float(psis.mean())
        se = _var_se_bootstrap(psis, derive_seed(seed, VAR_BOOTSTRAP_STREAM, n))
        bound = 4.0 * math.sqrt(n) * mean + slack_sigma * se
        area_f = float(A.scale(n).area)
        area_var = float((psis / area_f).var(ddof=1)) if psis.size > 1 else 0.0
        rows.append(ConcentrationRow(n, psis.size, mean, var, bound, se,
                                     var <= bound, area_var))
        area_vars.append(area_var)
    ordered = sorted(spec.scales)
    top_half = [area_vars[list(spec.scales).index(n)] for n in ordered[len(ordered) // 2:]]
    audit_b = all(b <= a for a, b in zip(top_half, top_half[1:]))
    return ConcentrationReport(tuple(rows), all(r.audit_a for r in rows),
                               audit_b, slack_sigma)


# ---------------------------------------------------------------------------
# subadditivity comparison

@dataclass(frozen=True)
class SubadditivityReport:
    n_small: int
    n_large: int
    chi_area_small: float
    chi_area_large: float
    ci_small: tuple
    ci_large: tuple
    violation: bool

    def to_json(self) -> dict:
        return {
            "schema": 1, "n_small": self.n_small, "n_large": self.n_large,
            "chi_area_small": self.chi_area_small,
            "chi_area_large": self.chi_area_large,
            "ci_small": list(self.ci_small), "ci_large": list(self.ci_large),
            "violation": self.violation,
        }


def subadditivity_diagnostic(distribution: CapacityDistribution, A: HyperRectangle,
                             schedule: HeightSchedule, n_small: int, n_large: int,
                             replicates: int, seed: int, *, workers: int = 1,
                             pc=None, margin_cap: int = 1024) -> SubadditivityReport:
    """Compare E[chi]/area at two scales; flag only gross violations.

    The subadditive inequality holds up to correction terms that vanish in
    the scale, so a violation is flagged only when the large-scale mean
    exceeds the small-scale mean by more than the combined CI widths.
    """
    if n_small >= n_large:
        raise ValueError("n_small must be less than n_large")
    constants = RegimeConstants.for_dimension(A.d, pc)
    require_supercritical_zero(distribution, constants)
    spec = CampaignSpec(distribution, A, schedule, (n_small, n_large), replicates,
                        seed, include_chi=True, pc=pc, margin_cap=margin_cap)
    records = run_campaign(spec, workers)
    report = summarize_campaign(spec, records)
    small = report.stats_for(n_small)
    large = report.stats_for(n_large)
    width = (small.chi_area_ci[1] - small.chi_area_ci[0]) + \
            (large.chi_area_ci[1] - large.chi_area_ci[0])
    violation = large.chi_area_mean > small.chi_area_mean + width
    return SubadditivityReport(n_small, n_large, small.chi_area_mean,
                               large.chi_area_mean, small.chi_area_ci,
                               large.chi_area_ci, violation)


# ---------------------------------------------------------------------------
# event probabilities

@dataclass(frozen=True)
class EventStats:
    """Empirical per-scale probabilities of the three cluster-size events."""

    scales: tuple
    p_e: tuple
    p_g: tuple
    p_h: tuple
    count: int
    implication_checked: int
    implication_passed: int

    def to_json(self) -> dict:
        return {
            "schema": 1, "count": self.count,
            "implication_checked": self.implication_checked,
            "implication_passed": self.implication_passed,
            "scales": [{"n": n, "p_e": pe, "p_g": pg, "p_h": ph}
                       for n, pe, pg, ph in
                       zip(self.scales, self.p_e, self.p_g, self.p_h)],
        }


def event_probabilities(distribution: CapacityDistribution, A: HyperRectangle,
                        schedule: HeightSchedule, scales, replicates: int,
                        seed: int, *, workers: int = 1, pc=None,
                        cluster_cap: int = DEFAULT_CLUSTER_CAP) -> EventStats:
    """Empirical probabilities of the small-cluster events per scale.

    Event E: every cluster rooted in cyl(nA, h/2) has fewer than h/2
    vertices.  Event G: every cluster rooted in cyl(nA, h) has at most
    min(h/4, n^(1/4)) vertices.  Event H: every cluster rooted in the
    bottom layer has at most h/2 vertices.  Whenever H holds, the flow is
    zero and the distribution is not already Bernoulli, psi under the
    coupled Bernoulli field is recomputed and must agree exactly.
    """
    constants = RegimeConstants.for_dimension(A.d, pc)
    require_supercritical_zero(distribution, constants)
    spec = CampaignSpec(distribution, A, schedule, tuple(scales), replicates, seed,
                        include_events=True, pc=pc, cluster_cap=cluster_cap)
    records = run_campaign(spec, workers)
    p_e, p_g, p_h = [], [], []
    for n in spec.scales:
        recs = [rec for rec in records if rec.scale == n]
        p_e.append(float(np.mean([rec.event_e for rec in recs])))
        p_g.append(float(np.mean([rec.event_g for rec in recs])))
        p_h.append(float(np.mean([rec.event_h for rec in recs])))
    checked = sum(1 for rec in records if rec.coupling_checked)
    passed = sum(1 for rec in records
                 if rec.coupling_checked and rec.psi_coupled == rec.psi_card)
    return EventStats(tuple(spec.scales), tuple(p_e), tuple(p_g), tuple(p_h),
                      replicates, checked, passed)


# ---------------------------------------------------------------------------
# CSV emission (shared by the CLI so reruns are byte-identical)

def _csv_write(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def report_to_csv(report: EstimateReport, path):
    """One row per scale per statistic; exact values as p/q, floats tagged."""
    rows = []
    for s in report.per_scale:
        rows.append([s.n, "h", "exact", str(s.h)])
        rows.append([s.n, "area", "exact", f"{s.area.numerator}/{s.area.denominator}"])
        rows.append([s.n, "count", "exact", str(s.count)])
        rows.append([s.n, "psi_mean", "float", repr(s.psi_mean)])
        rows.append([s.n, "psi_var", "float", repr(s.psi_var)])
        rows.append([s.n, "psi_area_mean", "float", repr(s.psi_area_mean)])
        rows.append([s.n, "psi_area_ci_lo", "float", repr(s.psi_area_ci[0])])
        rows.append([s.n, "psi_area_ci_hi", "float", repr(s.psi_area_ci[1])])
        rows.append([s.n, "psi_area_var", "float", repr(s.psi_area_var)])
        rows.append([s.n, "flow_area_mean", "float", repr(s.flow_area_mean)])
        if s.chi_area_mean is not None:
            rows.append([s.n, "chi_h", "exact", str(s.chi_h)])
            rows.append([s.n, "chi_area_mean", "float", repr(s.chi_area_mean)])
            rows.append([s.n, "chi_area_ci_lo", "float", repr(s.chi_area_ci[0])])
            rows.append([s.n, "chi_area_ci_hi", "float", repr(s.chi_area_ci[1])])
            rows.append([s.n, "chi_area_var", "float", repr(s.chi_area_var)])
        if s.height_mean is not None:
            rows.append([s.n, "height_mean", "float", repr(s.height_mean)])
    rows.append(["", "zeta_hat", "float", repr(report.zeta_hat)])
    rows.append(["", "nu_hat", "float", repr(report.nu_hat)])
    _csv_write(path, ["scale", "statistic", "kind", "value"], rows)


def scan_to_csv(scan: PositivityScan, path):
    rows = [[f"{g.numerator}/{g.denominator}", "mean_flow_per_area", "float", repr(m)]
            for g, m, _vals in scan.rows]
    _csv_write(path, ["zero_mass", "statistic", "kind", "value"], rows)


def concentration_to_csv(report: ConcentrationReport, path):
    rows = []
    for r in report.rows:
        rows.append([r.n, "psi_mean", "float", repr(r.psi_mean)])
        rows.append([r.n, "psi_var", "float", repr(r.psi_var)])
        rows.append([r.n, "bound", "float", repr(r.bound)])
        rows.append([r.n, "var_se", "float", repr(r.var_se)])
        rows.append([r.n, "audit_a", "exact", str(r.audit_a)])
        rows.append([r.n, "psi_area_var", "float", repr(r.psi_area_var)])
    rows.append(["", "audit_a_all", "exact", str(report.audit_a_all)])
    rows.append(["", "audit_b", "exact", str(report.audit_b)])
    _csv_write(path, ["scale", "statistic", "kind", "value"], rows)


def events_to_csv(stats: EventStats, path):
    rows = []
    for n, pe, pg, ph in zip(stats.scales, stats.p_e, stats.p_g, stats.p_h):
        rows.append([n, "p_event_e", "float", repr(pe)])
        rows.append([n, "p_event_g", "float", repr(pg)])
        rows.append([n, "p_event_h", "float", repr(ph)])
    rows.append(["", "implication_checked", "exact", str(stats.implication_checked)])
    rows.append(["", "implication_passed", "exact", str(stats.implication_passed)])
    _csv_write(path, ["scale", "statistic", "kind", "value"], rows)
