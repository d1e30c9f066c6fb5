"""Command-line interface: sampling, solving, clusters, and campaigns.

One entry point with subcommands {flow, cut, chi, clusters, height, zeta,
scan, diag, events}.  Every run takes a JSON config validated against a
strict schema (unknown keys rejected), writes machine-readable CSV/JSON to
the output directory, prints a one-line summary, and exits 0 on success,
2 on validation errors, 3 on regime errors, 4 on assertion failures.
Errors carry a JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import jsonschema

from .capacity import CapacityDistribution, CapacityField, RegimeError, is_infinite
from .clusters import ConsistencyError, cluster_of, random_height
from .exact import as_fraction
from .experiments import HeightSchedule, concentration_diagnostic, \
    concentration_to_csv, estimate_zeta, event_probabilities, events_to_csv, \
    positivity_scan, report_to_csv, scan_to_csv, subadditivity_diagnostic
from .geometry import DegenerateRegionError, InvalidGeometryError, \
    geometry_from_json, geometry_to_json
from .mincut import WindowOverflowError, chi, cut_edges_to_csv, phi, psi
from .rng import derive_seed

__all__ = ["main", "run", "derive_seed"]


class ConfigError(ValueError):
    """The run configuration is malformed."""


_NUM = {"type": ["number", "string"]}
_GEOMETRY = {
    "type": "object",
    "properties": {
        "d": {"type": "integer"},
        "normal": {"type": "array", "items": {"type": "integer"}},
        "base_point": {"type": "array", "items": _NUM},
        "side_lengths": {"type": "array", "items": _NUM},
        "height": _NUM,
    },
    "required": ["normal", "side_lengths"],
    "additionalProperties": False,
}
_DISTRIBUTION = {
    "type": "object",
    "properties": {
        "atoms": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {"value": _NUM, "prob": _NUM},
                "required": ["value", "prob"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["atoms"],
    "additionalProperties": False,
}
_SCHEDULE = {
    "type": "object",
    "properties": {
        "form": {"enum": ["sqrt", "power", "polylog"]},
        "c": {"type": "number"},
        "alpha": {"type": "number"},
        "beta": {"type": "number"},
    },
    "additionalProperties": False,
}
_SEED = {"type": ["integer", "string"]}


def _schema(extra_props, required):
    props = {"schema": {"const": 1}}
    props.update(extra_props)
    return {
        "type": "object",
        "properties": props,
        "required": ["schema"] + required,
        "additionalProperties": False,
    }


_SCHEMAS = {
    "flow": _schema({"geometry": _GEOMETRY, "distribution": _DISTRIBUTION,
                     "seed": _SEED, "pc": _NUM},
                    ["geometry", "distribution", "seed"]),
    "cut": _schema({"geometry": _GEOMETRY, "distribution": _DISTRIBUTION,
                    "seed": _SEED, "pc": _NUM},
                   ["geometry", "distribution", "seed"]),
    "chi": _schema({"geometry": _GEOMETRY, "distribution": _DISTRIBUTION,
                    "seed": _SEED, "pc": _NUM, "margin": {"type": "integer"},
                    "margin_cap": {"type": "integer"},
                    "cluster_cap": {"type": "integer"}},
                   ["geometry", "distribution", "seed"]),
    "clusters": _schema({"d": {"type": "integer"}, "root": {"type": "array",
                         "items": {"type": "integer"}},
                         "distribution": _DISTRIBUTION, "seed": _SEED,
                         "cap": {"type": "integer"}},
                        ["d", "root", "distribution", "seed"]),
    "height": _schema({"geometry": _GEOMETRY, "distribution": _DISTRIBUTION,
                       "seed": _SEED, "cap": {"type": "integer"},
                       "allow_h_equal_2d": {"type": "boolean"}},
                      ["geometry", "distribution", "seed"]),
    "zeta": _schema({"geometry": _GEOMETRY, "distribution": _DISTRIBUTION,
                     "schedule": _SCHEDULE, "scales": {"type": "array",
                     "items": {"type": "integer"}, "minItems": 1},
                     "replicates": {"type": "integer"}, "seed": _SEED,
                     "include_chi": {"type": "boolean"},
                     "include_events": {"type": "boolean"}, "pc": _NUM,
                     "margin_cap": {"type": "integer"},
                     "cluster_cap": {"type": "integer"}},
                    ["geometry", "distribution", "schedule", "scales",
                     "replicates", "seed"]),
    "scan": _schema({"geometry": _GEOMETRY, "n": {"type": "integer"},
                     "height": _NUM, "zero_mass_grid": {"type": "array",
                     "items": _NUM, "minItems": 1},
                     "replicates": {"type": "integer"}, "seed": _SEED},
                    ["geometry", "n", "height", "zero_mass_grid",
                     "replicates", "seed"]),
    "diag": _schema({"kind": {"enum": ["concentration", "subadditivity"]},
                     "geometry": _GEOMETRY, "distribution": _DISTRIBUTION,
                     "schedule": _SCHEDULE, "scales": {"type": "array",
                     "items": {"type": "integer"}},
                     "n_small": {"type": "integer"},
                     "n_large": {"type": "integer"},
                     "replicates": {"type": "integer"}, "seed": _SEED,
                     "pc": _NUM, "slack_sigma": {"type": "number"},
                     "margin_cap": {"type": "integer"}},
                    ["kind", "geometry", "distribution", "schedule",
                     "replicates", "seed"]),
    "events": _schema({"geometry": _GEOMETRY, "distribution": _DISTRIBUTION,
                       "schedule": _SCHEDULE, "scales": {"type": "array",
                       "items": {"type": "integer"}, "minItems": 1},
                       "replicates": {"type": "integer"}, "seed": _SEED,
                       "pc": _NUM, "cluster_cap": {"type": "integer"}},
                      ["geometry", "distribution", "schedule", "scales",
                       "replicates", "seed"]),
}


def _parse_seed(value) -> int:
    if isinstance(value, int):
        return value
    try:
        return int(str(value), 0)
    except ValueError as exc:
        raise ConfigError(f"bad seed {value!r}: expected decimal or hex") from exc


def _load_config(path, command):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(doc, _SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config does not match the {command} schema: "
                          f"{exc.message}") from exc
    return doc


def _enc(v):
    if is_infinite(v):
        return "inf"
    return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)


def _write_json(doc, path):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _geometry_with_height(cfg):
    A, height = geometry_from_json(cfg["geometry"])
    if height is None:
        raise ConfigError("geometry.height is required for this command")
    if "d" in cfg["geometry"] and cfg["geometry"]["d"] != A.d:
        raise ConfigError("geometry.d does not match the normal vector length")
    return A, height


def _geometry_campaign(cfg):
    A, _height = geometry_from_json(cfg["geometry"])
    if "d" in cfg["geometry"] and cfg["geometry"]["d"] != A.d:
        raise ConfigError("geometry.d does not match the normal vector length")
    return A


def _field(cfg, seed):
    dist = CapacityDistribution.from_json(cfg["distribution"])
    return CapacityField(seed, dist), dist


def _cmd_flow(cfg, args):
    A, h = _geometry_with_height(cfg)
    field, _ = _field(cfg, args.seed)
    result = phi(A, h, field)
    _write_json({"schema": 1, "geometry": geometry_to_json(A, h),
                 "seed": args.seed, "result": result.to_json()},
                os.path.join(args.out, "flow.json"))
    if args.emit_cut:
        cut_edges_to_csv(result.cut_edges, os.path.join(args.out, "flow_cut.csv"))
    return (f"flow {_enc(result.flow_value)} "
            f"cut_cardinality {result.cut_cardinality}")


def _cmd_cut(cfg, args):
    A, h = _geometry_with_height(cfg)
    field, _ = _field(cfg, args.seed)
    card, result = psi(A, h, field)
    _write_json({"schema": 1, "geometry": geometry_to_json(A, h),
                 "seed": args.seed, "result": result.to_json()},
                os.path.join(args.out, "cut.json"))
    if args.emit_cut:
        cut_edges_to_csv(result.cut_edges, os.path.join(args.out, "cut_cut.csv"))
    return f"capacity {_enc(result.cut_capacity)} cardinality {card}"


def _cmd_chi(cfg, args):
    A, h = _geometry_with_height(cfg)
    field, _ = _field(cfg, args.seed)
    card, result, rh = chi(A, h, field,
                           margin_start=cfg.get("margin", 4),
                           margin_cap=cfg.get("margin_cap", 1024),
                           cap=cfg.get("cluster_cap", 10 ** 6))
    _write_json({"schema": 1, "geometry": geometry_to_json(A, h),
                 "seed": args.seed, "height": rh.value,
                 "result": result.to_json()},
                os.path.join(args.out, "chi.json"))
    if args.emit_cut:
        cut_edges_to_csv(result.cut_edges, os.path.join(args.out, "chi_cut.csv"))
    return f"chi {card} height {rh.value}"


def _cmd_clusters(cfg, args):
    field, _ = _field(cfg, args.seed)
    root = tuple(cfg["root"])
    if len(root) != cfg["d"]:
        raise ConfigError("root length does not match d")
    report = cluster_of(root, field, cfg.get("cap", 10 ** 6))
    _write_json({"schema": 1, "seed": args.seed, "cluster": report.to_json()},
                os.path.join(args.out, "clusters.json"))
    return (f"cluster card_v {report.card_v} truncated {report.truncated} "
            f"boundary {len(report.boundary)}")


def _cmd_height(cfg, args):
    A, h = _geometry_with_height(cfg)
    field, _ = _field(cfg, args.seed)
    rh = random_height(A, h, field, cap=cfg.get("cap", 10 ** 6),
                       allow_h_equal_2d=cfg.get("allow_h_equal_2d", False))
    _write_json({"schema": 1, "geometry": geometry_to_json(A, h),
                 "seed": args.seed, "value": rh.value,
                 "requested": _enc(rh.requested),
                 "contributing_clusters": len(rh.contributing_clusters)},
                os.path.join(args.out, "height.json"))
    return f"height {rh.value} (requested {_enc(rh.requested)})"


def _cmd_zeta(cfg, args):
    A = _geometry_campaign(cfg)
    dist = CapacityDistribution.from_json(cfg["distribution"])
    report = estimate_zeta(
        dist, A, HeightSchedule.from_json(cfg["schedule"]), cfg["scales"],
        cfg["replicates"], args.seed, include_chi=cfg.get("include_chi", False),
        include_events=cfg.get("include_events", False), workers=args.workers,
        pc=cfg.get("pc"), margin_cap=cfg.get("margin_cap", 1024),
        cluster_cap=cfg.get("cluster_cap", 10 ** 6))
    report_to_csv(report, os.path.join(args.out, "zeta.csv"))
    _write_json(report.to_json(), os.path.join(args.out, "zeta.json"))
    return f"zeta_hat {report.zeta_hat} nu_hat {report.nu_hat}"


def _cmd_scan(cfg, args):
    A = _geometry_campaign(cfg)
    scan = positivity_scan(A, cfg["n"], as_fraction(cfg["height"]),
                           cfg["zero_mass_grid"], cfg["replicates"], args.seed,
                           workers=args.workers)
    scan_to_csv(scan, os.path.join(args.out, "scan.csv"))
    _write_json(scan.to_json(), os.path.join(args.out, "scan.json"))
    means = ", ".join(f"G0={_enc(g)}: {m:.6g}" for g, m, _ in scan.rows)
    return f"positivity scan: {means}"


def _cmd_diag(cfg, args):
    A = _geometry_campaign(cfg)
    dist = CapacityDistribution.from_json(cfg["distribution"])
    schedule = HeightSchedule.from_json(cfg["schedule"])
    if cfg["kind"] == "concentration":
        if "scales" not in cfg:
            raise ConfigError("concentration diagnostic needs scales")
        report = concentration_diagnostic(
            dist, A, schedule, cfg["scales"], cfg["replicates"], args.seed,
            workers=args.workers, pc=cfg.get("pc"),
            slack_sigma=cfg.get("slack_sigma", 3.0))
        concentration_to_csv(report, os.path.join(args.out, "diag.csv"))
        _write_json(report.to_json(), os.path.join(args.out, "diag.json"))
        return (f"concentration audit_a {report.audit_a_all} "
                f"audit_b {report.audit_b}")
    if "n_small" not in cfg or "n_large" not in cfg:
        raise ConfigError("subadditivity diagnostic needs n_small and n_large")
    report = subadditivity_diagnostic(
        dist, A, schedule, cfg["n_small"], cfg["n_large"], cfg["replicates"],
        args.seed, workers=args.workers, pc=cfg.get("pc"),
        margin_cap=cfg.get("margin_cap", 1024))
    _write_json(report.to_json(), os.path.join(args.out, "diag.json"))
    return (f"subadditivity small {report.chi_area_small:.6g} "
            f"large {report.chi_area_large:.6g} violation {report.violation}")


def _cmd_events(cfg, args):
    A = _geometry_campaign(cfg)
    dist = CapacityDistribution.from_json(cfg["distribution"])
    stats = event_probabilities(
        dist, A, HeightSchedule.from_json(cfg["schedule"]), cfg["scales"],
        cfg["replicates"], args.seed, workers=args.workers, pc=cfg.get("pc"),
        cluster_cap=cfg.get("cluster_cap", 10 ** 6))
    events_to_csv(stats, os.path.join(args.out, "events.csv"))
    _write_json(stats.to_json(), os.path.join(args.out, "events.json"))
    last = -1
    return (f"events at n={stats.scales[last]}: "
            f"E {stats.p_e[last]:.3f} G {stats.p_g[last]:.3f} "
            f"H {stats.p_h[last]:.3f}")


_COMMANDS = {
    "flow": _cmd_flow,
    "cut": _cmd_cut,
    "chi": _cmd_chi,
    "clusters": _cmd_clusters,
    "height": _cmd_height,
    "zeta": _cmd_zeta,
    "scan": _cmd_scan,
    "diag": _cmd_diag,
    "events": _cmd_events,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="latticecut",
        description="Maximal flows and minimal cutsets on the hypercubic lattice")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the JSON run config")
        p.add_argument("--seed", default=None,
                       help="override the config seed (decimal or 0x hex)")
        p.add_argument("--workers", type=int, default=1,
                       help="worker processes; affects wall time only")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--emit-cut", action="store_true",
                       help="also write the cut edge list as coordinate CSV")
    return parser


def run(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    cfg = _load_config(args.config, args.command)
    args.seed = _parse_seed(args.seed if args.seed is not None else cfg.get("seed", 0))
    os.makedirs(args.out, exist_ok=True)
    summary = _COMMANDS[args.command](cfg, args)
    print(summary)
    return 0


def main(argv=None) -> int:
    try:
        return run(argv)
    except RegimeError as exc:
        _emit_error(exc)
        return 3
    except (ConsistencyError, WindowOverflowError, AssertionError) as exc:
        _emit_error(exc)
        return 4
    except (ConfigError, InvalidGeometryError, DegenerateRegionError,
            jsonschema.ValidationError, ValueError) as exc:
        _emit_error(exc)
        return 2


def _emit_error(exc):
    doc = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(doc), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
