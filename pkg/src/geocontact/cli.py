"""Command-line entry point: catalog, analyze, orbit, verify, volume.

Exit codes: 0 on success, 1 when a mathematical check fails, 2 on
usage/config errors. All output is deterministic: floats are printed with
17 significant digits, JSON keys are sorted, lines end with LF.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__, catalog
from .catalog import CatalogEntry, GridSpec, OrbitSpec
from .errors import (ConfigError, ExprError, GeoContactError, NoParametrization,
                     UnknownEntry)
from .field import RealPair, UnitField, diagnose_point
from .flow import (integrate_orbit, noncontact_eigen_drift, riccati_residual,
                   trace_evolution_residual, wronskian)
from .geometry import manifold_from_exprs
from .verify import (THEOREM_IDS, Tolerances, applicable_theorems, run_theorem,
                     volume_integral)


def _fmt(value) -> str:
    return f"{float(value):.17g}"


# ---------------------------------------------------------------------------
# Config handling
# ---------------------------------------------------------------------------

_SECTIONS = {
    None: {"manifold", "field", "grid", "orbit", "diff", "tolerances", "volume"},
    "grid": {"min", "max", "counts"},
    "orbit": {"start", "t_end", "step"},
    "diff": {"mode", "step"},
    "volume": {"nodes"},
    "manifold": {"metric", "domain"},
    "field": {"components"},
}


def _check_keys(mapping, section):
    allowed = _SECTIONS[section]
    unknown = set(mapping) - allowed
    if unknown:
        where = "config" if section is None else f"config section {section!r}"
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def _triple(values, section, kind=float):
    if not isinstance(values, (list, tuple)) or len(values) != 3:
        raise ConfigError(f"{section} entries must be triples")
    return tuple(kind(v) for v in values)


@dataclass
class Resolved:
    """Effective analysis setup: entry, tolerances and echoed config."""

    entry: CatalogEntry
    tolerances: Tolerances
    volume_nodes: int
    echo: dict


def resolve_config(config: dict) -> Resolved:
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    _check_keys(config, None)

    man_spec = config.get("manifold")
    field_spec = config.get("field")
    if isinstance(man_spec, str):
        entry = catalog.builtin(man_spec)
    elif isinstance(man_spec, dict):
        _check_keys(man_spec, "manifold")
        if "metric" not in man_spec:
            raise ConfigError("custom manifold needs a metric")
        metric = man_spec["metric"]
        if len(metric) != 3 or any(len(row) != 3 for row in metric):
            raise ConfigError("metric must be a 3x3 table of expressions")
        manifold = manifold_from_exprs("custom", tuple(tuple(row) for row in metric),
                                       domain=man_spec.get("domain", "true"))
        if field_spec is None:
            raise ConfigError("custom manifold needs a field")
        entry = CatalogEntry(name="custom", manifold=manifold,
                             field=None, expected={}, notes="user-defined",
                             grid=None, orbit=None)
    else:
        raise ConfigError("config needs a manifold (catalog name or custom object)")

    if field_spec is not None:
        if not isinstance(field_spec, dict):
            raise ConfigError("field must be an object with components")
        _check_keys(field_spec, "field")
        comps = field_spec.get("components")
        if not isinstance(comps, (list, tuple)) or len(comps) != 3:
            raise ConfigError("field needs exactly 3 component expressions")
        entry.field = UnitField.from_exprs("custom", tuple(comps))

    if "grid" in config:
        _check_keys(config["grid"], "grid")
        grid = config["grid"]
        counts = _triple(grid.get("counts", (5, 5, 5)), "grid.counts", int)
        if any(c < 1 for c in counts):
            raise ConfigError("grid counts must be >= 1")
        entry.grid = GridSpec(_triple(grid["min"], "grid.min"),
                              _triple(grid["max"], "grid.max"), counts)
    if "orbit" in config:
        _check_keys(config["orbit"], "orbit")
        orbit = config["orbit"]
        step = float(orbit.get("step", 1e-3))
        if step <= 0:
            raise ConfigError("orbit step must be positive")
        entry.orbit = OrbitSpec(_triple(orbit["start"], "orbit.start"),
                                float(orbit.get("t_end", 2.0)), step)
    if "diff" in config:
        _check_keys(config["diff"], "diff")
        mode = config["diff"].get("mode", "dual")
        if mode not in ("dual", "central"):
            raise ConfigError("diff mode must be 'dual' or 'central'")
        entry.manifold.diff_mode = mode
        entry.manifold.diff_step = float(config["diff"].get("step", entry.manifold.diff_step))

    tolerances = Tolerances.from_mapping(config.get("tolerances"))
    if "volume" in config:
        _check_keys(config["volume"], "volume")
    volume_nodes = int(config.get("volume", {}).get("nodes", 32))
    return Resolved(entry=entry, tolerances=tolerances,
                    volume_nodes=volume_nodes, echo=config)


def _load(args) -> Resolved:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            try:
                config = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
    elif getattr(args, "entry", None):
        config = {"manifold": args.entry}
    else:
        raise ConfigError("give --config or --entry")
    return resolve_config(config)


def _echo_json(resolved: Resolved) -> str:
    return json.dumps(resolved.echo, sort_keys=True, separators=(",", ":"))


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_catalog(args) -> int:
    rows = catalog.describe()
    if args.json:
        doc = [{"name": name, "description": desc} for name, desc in rows]
        _emit(json.dumps(doc, sort_keys=True, indent=2) + "\n", args.out)
    else:
        _emit("".join(f"{name}: {desc}\n" for name, desc in rows), args.out)
    return 0


ANALYZE_HEADER = ("x1,x2,x3,unit_defect,geodesic_defect,killing_defect,contact_defect,"
                  "eig_kind,eig_re1,eig_im1,eig_re2,eig_im2,ric_X,Delta,delta,beta_rank")


def cmd_analyze(args) -> int:
    resolved = _load(args)
    entry, tol = resolved.entry, resolved.tolerances
    if entry.grid is None:
        raise ConfigError("analyze needs a grid")
    lines = [ANALYZE_HEADER]
    skipped = []
    failed = False
    for p in entry.grid.points():
        if not entry.manifold.contains(p):
            skipped.append(p)
            continue
        d = diagnose_point(entry.manifold, entry.field, p, unit_tol=np.inf)
        failed |= d.unit_defect > tol.unit_defect or d.geodesic_defect > tol.geodesic_defect
        if isinstance(d.eigen, RealPair):
            eig = ("real", d.eigen.lam, 0.0, d.eigen.mu, 0.0)
        else:
            eig = ("complex", d.eigen.a, d.eigen.b, d.eigen.a, -d.eigen.b)
        lines.append(",".join(
            [_fmt(p[0]), _fmt(p[1]), _fmt(p[2]),
             _fmt(d.unit_defect), _fmt(d.geodesic_defect), _fmt(d.killing_defect),
             _fmt(d.contact_defect), eig[0], _fmt(eig[1]), _fmt(eig[2]),
             _fmt(eig[3]), _fmt(eig[4]), _fmt(d.ric_X), _fmt(d.Delta),
             _fmt(d.delta), str(d.beta_rank)]))
    lines.append(f"# version: geocontact {__version__}")
    lines.append(f"# config: {_echo_json(resolved)}")
    if skipped:
        lines.append(f"# out_of_chart: {len(skipped)}")
        lines.extend(f"# {_fmt(p[0])},{_fmt(p[1])},{_fmt(p[2])}" for p in skipped)
    _emit("\n".join(lines) + "\n", args.out)
    return 1 if failed else 0


ORBIT_HEADER = ("t,x1,x2,x3,tr_beta,det_beta,discriminant,contact_defect,"
                "A_numeric,A_expected,riccati_residual,adapted_residual")


def cmd_orbit(args) -> int:
    resolved = _load(args)
    entry, tol = resolved.entry, resolved.tolerances
    if entry.orbit is None:
        raise ConfigError("orbit needs an orbit section")
    spec = entry.orbit
    traj = integrate_orbit(entry.manifold, entry.field, np.asarray(spec.start, float),
                           spec.t_end, spec.step, with_jacobi=True)
    wr = wronskian(traj)
    max_riccati = riccati_residual(entry.manifold, entry.field, traj)
    max_trace = trace_evolution_residual(entry.manifold, entry.field, traj)

    n = len(traj)
    trb = np.trace(traj.B, axis1=1, axis2=2)
    detb = traj.B[:, 0, 0] * traj.B[:, 1, 1] - traj.B[:, 0, 1] * traj.B[:, 1, 0]
    disc = trb * trb - 4.0 * detb
    defect = traj.B[:, 1, 0] - traj.B[:, 0, 1]
    riccati = np.full(n, np.nan)
    if n >= 3:
        bdot = (traj.B[2:] - traj.B[:-2]) / (2.0 * traj.step)
        res = bdot + np.einsum("nij,njk->nik", traj.B[1:-1], traj.B[1:-1]) + traj.M[1:-1]
        riccati[1:-1] = np.sqrt((res ** 2).sum(axis=(1, 2)))
    adapted = np.maximum(
        np.linalg.norm(traj.Jdot - np.einsum("nij,nj->ni", traj.B, traj.J), axis=1),
        np.linalg.norm(traj.Jtdot - np.einsum("nij,nj->ni", traj.B, traj.Jt), axis=1))

    lines = [ORBIT_HEADER]
    for k in range(n):
        lines.append(",".join([
            _fmt(traj.t[k]), _fmt(traj.points[k, 0]), _fmt(traj.points[k, 1]),
            _fmt(traj.points[k, 2]), _fmt(trb[k]), _fmt(detb[k]), _fmt(disc[k]),
            _fmt(defect[k]), _fmt(traj.A[k]), _fmt(wr.A_expected[k]),
            _fmt(riccati[k]), _fmt(adapted[k])]))
    lines.append(f"# version: geocontact {__version__}")
    lines.append(f"# config: {_echo_json(resolved)}")
    lines.append(f"# max_riccati_residual: {_fmt(max_riccati)}")
    lines.append(f"# max_trace_residual: {_fmt(max_trace)}")
    lines.append(f"# max_adapted_residual: {_fmt(traj.adapted_residual)}")
    lines.append(f"# max_wronskian_residual: {_fmt(wr.residual)}")
    if traj.truncated:
        lines.append("# truncated: true")
    drift = noncontact_eigen_drift(traj)
    if drift is not None:
        lines.append(f"# noncontact_eigen_drift: {_fmt(drift)}")
    _emit("\n".join(lines) + "\n", args.out)
    worst = max(max_riccati, max_trace, traj.adapted_residual, wr.residual)
    return 1 if worst > tol.orbit_residual else 0


def cmd_verify(args) -> int:
    if args.all:
        entries = catalog.all_entries()
        tolerances = Tolerances()
        volume_nodes = 32
        echo = {"verify": "all"}
        if args.config:
            resolved = _load(args)
            tolerances, echo = resolved.tolerances, resolved.echo
            volume_nodes = resolved.volume_nodes
        reports = []
        for entry in entries:
            wanted = args.theorems or applicable_theorems(entry)
            for theorem in wanted:
                if theorem in applicable_theorems(entry):
                    reports.append(run_theorem(entry, theorem, tol=tolerances,
                                               volume_nodes=volume_nodes))
    else:
        resolved = _load(args)
        entry, tolerances, echo = resolved.entry, resolved.tolerances, resolved.echo
        wanted = args.theorems or applicable_theorems(entry)
        reports = [run_theorem(entry, theorem, c=args.c, tol=tolerances,
                               volume_nodes=resolved.volume_nodes)
                   for theorem in wanted]
    doc = {
        "version": f"geocontact {__version__}",
        "config": echo,
        "reports": [r.to_dict() for r in reports],
    }
    _emit(json.dumps(doc, sort_keys=True, indent=2) + "\n", args.out)
    return 1 if any(r.verdict == "violated" for r in reports) else 0


def cmd_volume(args) -> int:
    resolved = _load(args)
    nodes = args.nodes or resolved.volume_nodes
    result = volume_integral(resolved.entry, nodes)
    doc = {
        "version": f"geocontact {__version__}",
        "config": resolved.echo,
        "result": result.to_dict(),
    }
    _emit(json.dumps(doc, sort_keys=True, indent=2) + "\n", args.out)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to a JSON config document")
    common.add_argument("--out", help="write the report to a file instead of stdout")
    common.add_argument("--json", action="store_true", help="JSON output where applicable")

    parser = argparse.ArgumentParser(
        prog="geocontact",
        description="Numerical verification toolkit for contact structures "
                    "induced by geodesic vector fields on 3-manifolds.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("catalog", parents=[common],
                   help="list the built-in manifold/field pairs").set_defaults(fn=cmd_catalog)

    p_analyze = sub.add_parser("analyze", parents=[common],
                               help="per-point diagnostics over a grid (CSV)")
    p_analyze.add_argument("--entry", help="catalog entry (shortcut for a minimal config)")
    p_analyze.set_defaults(fn=cmd_analyze)

    p_orbit = sub.add_parser("orbit", parents=[common],
                             help="orbit integration diagnostics (CSV)")
    p_orbit.add_argument("--entry")
    p_orbit.set_defaults(fn=cmd_orbit)

    p_verify = sub.add_parser("verify", parents=[common],
                              help="theorem verdict suites (JSON)")
    p_verify.add_argument("theorems", nargs="*",
                          help=f"theorem ids, any of {', '.join(THEOREM_IDS)}")
    p_verify.add_argument("--all", action="store_true",
                          help="run every applicable suite over the full catalog")
    p_verify.add_argument("--entry")
    p_verify.add_argument("--c", type=float, default=None,
                          help="constant curvature value for the space-form suites")
    p_verify.set_defaults(fn=cmd_verify)

    p_volume = sub.add_parser("volume", parents=[common],
                              help="contact volume by midpoint quadrature (JSON)")
    p_volume.add_argument("--entry")
    p_volume.add_argument("--nodes", type=int, default=None, help="nodes per axis")
    p_volume.set_defaults(fn=cmd_volume)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ConfigError, NoParametrization, UnknownEntry, ExprError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GeoContactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
