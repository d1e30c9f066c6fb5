"""Maximal flows and minimal cutsets for first passage percolation on Z^d.

The package computes, exactly, the four flow quantities of a lattice
cylinder or slab (top-bottom flow, half-boundary flow, the minimal size of
a minimal-capacity cutset, and its null-capacity slab analogue), the
positive-capacity cluster constructions behind them, and Monte Carlo
estimates of the cutset-size constant with statistical diagnostics.
"""

from .capacity import CapacityDistribution, CapacityField, INF, Regime, \
    RegimeConstants, RegimeError, couple_bernoulli, is_infinite, regime_of
from .clusters import ClusterIndex, ClusterReport, ConsistencyError, RandomHeight, \
    TailFit, cluster_of, exterior_boundary, lemma_cutset, random_height, tail_fit
from .exact import QuadExt, as_fraction
from .experiments import CampaignSpec, ConcentrationReport, EstimateReport, \
    EventStats, HeightSchedule, PositivityScan, SubadditivityReport, bootstrap_ci, \
    concentration_diagnostic, estimate_zeta, event_probabilities, positivity_scan, \
    run_campaign, subadditivity_diagnostic, summarize_campaign
from .geometry import Direction, HyperRectangle, LatticeRegion, MarkedRegion, \
    SlabWindow, bottom_top_sets, build_cyl_prime, build_cylinder, edge_between, \
    edge_endpoints, geometry_from_json, geometry_to_json, pack_edge, slab_window, \
    thicken
from .mincut import CutResult, FlowProblem, WindowOverflowError, check_cut, chi, \
    cut_edges_to_csv, lexi_min_cut, max_flow, phi, problem_from_json, \
    problem_to_json, psi, tau
from .rng import derive_seed

__version__ = "0.1.0"
