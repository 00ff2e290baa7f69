"""``qgeom`` command line.

Exit codes: 0 success, 1 a scientific check failed (or a solver did not
converge), 2 bad usage or input. Every file written carries the seed, a
hash of the run configuration and the package version, and contains no
timestamps, so identical configurations give byte-identical files.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from qgeom import __version__
from qgeom.capacity import (
    estimate_capacity_ba,
    estimate_capacity_seb,
    estimate_json,
    image_states,
    parse_channel,
)
from qgeom.distances import DistanceKind
from qgeom.errors import DidNotConverge, QGeomError
from qgeom.section import (
    SectionSite,
    boundary_residual_divergence,
    boundary_residual_euclidean,
    coefficient_cross,
    divergence_bisector_coefficients,
    divergence_difference,
    euclidean_bisector_coefficients,
    geodesic_rescaled_labeling,
    noncoincidence_witnesses,
    sample_section_ellipsoid,
    section_coordinates,
    section_query_grid,
    site_states,
)
from qgeom.states import DensityMatrix, parse_states
from qgeom.voronoi import (
    DEFAULT_BAND,
    SiteSet,
    fibonacci_points,
    label_samples,
    labelings_agree,
    labelings_csv,
    random_pure_sites,
    read_labeling_csv,
    sample_mixed_ball,
    sample_pure,
    sample_sphere,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MIXED_RMAX = 0.95
WITNESS_MARGIN = 1e-3
ORACLE_TOL = 5e-4
SIGN_CUT = 1e-6

DEFAULT_METRICS = {
    ("pure", 2): "fs,bures_pure,bures,geodesic,euclid,div,divdual",
    ("pure", 3): "fs,bures_pure,divdual",
    ("mixed", 2): "bures,euclid,div,divdual",
    ("section", 3): "div,divdual,geodesic,euclid",
}


class UsageError(Exception):
    pass


# --- shared plumbing ---------------------------------------------------------------

def config_hash(config: dict[str, Any]) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def metadata(config: dict[str, Any]) -> dict[str, Any]:
    return {"seed": config.get("seed"), "config_hash": config_hash(config), "version": __version__}


def _config(args: argparse.Namespace, *keys: str) -> dict[str, Any]:
    cfg = {"command": args.command}
    for k in keys:
        v = getattr(args, k)
        cfg[k] = str(v) if isinstance(v, Path) else v
    return cfg


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _dump(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _read_json(path: Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def _metrics(text: str) -> list[DistanceKind]:
    try:
        kinds = [DistanceKind.parse(m) for m in text.split(",") if m.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if len(kinds) < 2:
        raise UsageError("--metrics needs at least two distance kinds to compare")
    return list(dict.fromkeys(kinds))


# --- coincide ----------------------------------------------------------------------

def _load_sites(args) -> list[DensityMatrix]:
    raw = _read_json(args.sites)
    items = raw.get("sites") if isinstance(raw, dict) else raw
    if not isinstance(items, list):
        raise UsageError("site file must be a JSON list of state literals (or {\"sites\": [...]})")
    return parse_states(items)


def _suite_inputs(args) -> tuple[list[DensityMatrix], list[DensityMatrix], list[SectionSite] | None,
                                 list[SectionSite] | None]:
    """Sites and samples for the chosen suite; section suites also return slice coordinates."""
    d = args.d
    if args.suite == "section":
        if d < 3:
            raise UsageError("--suite section needs --d >= 3")
        if args.sites:
            sec_sites = [section_coordinates(s) for s in _load_sites(args)]
        else:
            sec_sites = sample_section_ellipsoid(args.random, d, args.seed)
        sec_samples = sample_section_ellipsoid(args.samples, d, args.seed + 1)
        return site_states(sec_sites), site_states(sec_samples), sec_sites, sec_samples
    sites = _load_sites(args) if args.sites else list(random_pure_sites(args.random, d, args.seed))
    if any(s.dim != d for s in sites):
        raise UsageError(f"site dimension does not match --d {d}")
    if args.suite == "mixed":
        if d != 2:
            raise UsageError("--suite mixed samples the qubit Bloch ball; use --d 2")
        samples = sample_mixed_ball(args.samples, MIXED_RMAX, args.seed + 1)
    else:
        samples = sample_sphere(args.samples, args.seed + 1) if d == 2 else sample_pure(args.samples, d, args.seed + 1)
    return sites, samples, None, None


def cmd_coincide(args) -> int:
    if args.d is None:
        args.d = 3 if args.suite == "section" else 2
    if args.metrics is None:
        args.metrics = DEFAULT_METRICS.get((args.suite, min(args.d, 3)), DEFAULT_METRICS[("pure", 3)])
    kinds = _metrics(args.metrics)
    if args.sites is None and (args.random is None or args.random < 2):
        raise UsageError("give --sites FILE or --random K with K >= 2")
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    cfg = _config(args, "suite", "d", "seed", "samples", "eps", "metrics", "variant", "random",
                  "sites", "expect_mismatch")
    meta = metadata(cfg)

    sites, samples, sec_sites, sec_samples = _suite_inputs(args)
    SiteSet(sites)
    variants = ["nearest", "farthest"] if args.variant == "both" else [args.variant]
    reports = []
    out = Path(args.out)
    for variant in variants:
        labelings = {}
        for kind in kinds:
            if args.suite == "section" and kind is DistanceKind.GEODESIC_SPHERE:
                if variant != "nearest":
                    continue
                labelings[kind.value] = geodesic_rescaled_labeling(sec_samples, sec_sites, args.eps)
            else:
                labelings[kind.value] = label_samples(samples, sites, kind, variant, args.eps)
        names = list(labelings)
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                rep = labelings_agree(labelings[a], labelings[b])
                expected = not (args.expect_mismatch and (args.suite != "section" or "euclid" in (a, b)))
                witnesses = noncoincidence_witnesses(labelings[a], labelings[b], WITNESS_MARGIN)
                reports.append({
                    "variant": variant,
                    "pair": [a, b],
                    "expect": "agree" if expected else "mismatch",
                    **rep.to_dict(),
                    "witnesses": [int(w) for w in witnesses],
                })
        _write(out / f"labelings_{variant}.csv", labelings_csv(samples, labelings, meta))

    agree_ok = all(r["mismatches"] == 0 for r in reports if r["expect"] == "agree")
    expected_mismatch = [r for r in reports if r["expect"] == "mismatch"]
    mismatch_ok = not args.expect_mismatch or any(r["witnesses"] for r in expected_mismatch)
    ok = agree_ok and mismatch_ok
    payload = {"metadata": meta, "suite": args.suite, "reports": reports, "passed": ok}
    _write(out / "agreement.json", _dump(payload))

    for r in reports:
        tag = "mismatch" if r["mismatches"] else "agree"
        print(f"{r['variant']:8s} {r['pair'][0]:>10s} vs {r['pair'][1]:<10s} {tag:8s} "
              f"compared={r['compared']} mismatches={r['mismatches']} witnesses={len(r['witnesses'])} "
              f"(expected {r['expect']})")
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


# --- capacity ----------------------------------------------------------------------

def cmd_capacity(args) -> int:
    if args.channel is None:
        raise UsageError("--channel FILE is required")
    if args.points < 2:
        raise UsageError("--points must be at least 2")
    if args.tol <= 0 or args.max_iter < 0:
        raise UsageError("--tol must be positive and --max-iter non-negative")
    raw = _read_json(args.channel)
    if not isinstance(raw, dict):
        raise UsageError("channel file must be a JSON object")
    cfg = _config(args, "points", "tol", "max_iter", "oracle", "seed")
    cfg["channel"] = raw
    meta = metadata(cfg)
    try:
        ch = parse_channel(raw)
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed channel file: {exc}") from None

    status = EXIT_OK
    try:
        est = estimate_capacity_seb(ch, args.points, args.max_iter, args.tol)
    except DidNotConverge as exc:
        print(f"error: {exc}", file=sys.stderr)
        est, status = exc.best, EXIT_FAIL
    payload = json.loads(estimate_json(est, meta))
    payload["converged"] = est.converged
    if args.oracle:
        points = image_states(ch, fibonacci_points(args.points))
        try:
            ba = estimate_capacity_ba(points, max(args.max_iter, 1_000_000), args.tol)
        except DidNotConverge as exc:
            print(f"error: oracle {exc}", file=sys.stderr)
            ba, status = exc.best, EXIT_FAIL
        gap = abs(ba.radius_nats - est.radius_nats)
        payload["oracle"] = {"radius_nats": ba.radius_nats, "iterations": ba.iterations, "difference": gap}
        if gap >= ORACLE_TOL:
            print(f"error: SEB and Blahut-Arimoto differ by {gap:.3e} nats", file=sys.stderr)
            status = EXIT_FAIL
    if args.out:
        _write(Path(args.out), _dump(payload))

    nats, bits = est.radius_nats, est.radius_nats / math.log(2.0)
    line = f"radius {bits:.6f} bits ({nats:.6f} nats)" if args.bits else f"radius {nats:.6f} nats ({bits:.6f} bits)"
    print(f"{line}  iterations={est.iterations} residual={est.residual:.2e} support={len(est.support())}")
    if args.oracle:
        print(f"oracle {payload['oracle']['radius_nats']:.6f} nats  difference={payload['oracle']['difference']:.2e}")
    return status


# --- section -----------------------------------------------------------------------

def cmd_section(args) -> int:
    if args.d < 3:
        raise UsageError("the section analysis needs --d >= 3")
    if args.pairs < 1 or args.grid < 2:
        raise UsageError("--pairs must be positive and --grid at least 2")
    cfg = _config(args, "d", "seed", "pairs", "grid", "r")
    meta = metadata(cfg)
    d = args.d
    grid = section_query_grid(d, args.grid)
    coords = [section_coordinates(q) for q in grid]
    ends = sample_section_ellipsoid(2 * args.pairs, d, args.seed)

    lines = [f"# {k}={v}" for k, v in meta.items()]
    lines.append("pair,query_index,xi_1,xi_d,xi_d1,residual_div,divergence_difference,residual_euclid,"
                 "euclid_difference,sign_ok")
    mismatches = checked = 0
    crosses = []
    for p in range(args.pairs):
        eta, eta_t = ends[2 * p], ends[2 * p + 1]
        crosses.append(coefficient_cross(divergence_bisector_coefficients(eta, eta_t, d),
                                         euclidean_bisector_coefficients(eta, eta_t, d)))
        a, b = eta.xi().values, eta_t.xi().values
        for i, (q, c) in enumerate(zip(grid, coords)):
            res = boundary_residual_divergence(eta, eta_t, c, d)
            diff = divergence_difference(q, eta, eta_t, r=args.r)
            x = c.xi().values
            ediff = float((x - a) @ (x - a) - (x - b) @ (x - b))
            res_e = boundary_residual_euclidean(eta, eta_t, c, d)
            sign_ok = abs(res) <= SIGN_CUT or np.sign(res) == np.sign(diff)
            if abs(res) > SIGN_CUT:
                checked += 1
                mismatches += not sign_ok
            lines.append(",".join([str(p), str(i), *(repr(float(v)) for v in c.coords),
                                   repr(res), repr(diff), repr(res_e), repr(ediff), str(int(sign_ok))]))
    summary = {
        "metadata": meta,
        "checked": checked,
        "sign_mismatches": mismatches,
        "coefficient_cross": crosses,
        "min_coefficient_cross": min(crosses),
        "passed": mismatches == 0,
    }
    out = Path(args.out)
    _write(out / "section_residuals.csv", "\n".join(lines) + "\n")
    _write(out / "section_summary.json", _dump(summary))
    print(f"sign checks {checked}, mismatches {mismatches}; "
          f"min coefficient cross product {min(crosses):.3e}")
    print("PASS" if mismatches == 0 else "FAIL")
    return EXIT_OK if mismatches == 0 else EXIT_FAIL


# --- export ------------------------------------------------------------------------

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#bcbd22", "#17becf", "#393b79")
BOUNDARY_COLOR = "#9e9e9e"


def render_svg(rows: Sequence[dict[str, str]], metric: str | None, meta: dict[str, Any],
               width: int = 720, height: int = 360) -> str:
    """Equirectangular map of a qubit labeling: longitude ``atan2(y, x)``, latitude ``asin(z/|b|)``."""
    head = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        "<metadata>" + json.dumps(meta, sort_keys=True) + "</metadata>",
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff" stroke="#000000"/>',
    ]
    body = []
    for row in rows:
        x, y, z = (float(row[c]) for c in ("x", "y", "z"))
        norm = math.sqrt(x * x + y * y + z * z)
        lon = math.atan2(y, x)
        lat = math.asin(max(-1.0, min(1.0, z / norm))) if norm > 0 else 0.0
        px = (lon + math.pi) / (2 * math.pi) * width
        py = (math.pi / 2 - lat) / math.pi * height
        if row[f"boundary_{metric}"] == "1":
            color = BOUNDARY_COLOR
        else:
            color = PALETTE[int(row[f"label_{metric}"]) % len(PALETTE)]
        body.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="2" fill="{color}"/>')
    return "\n".join(head + body + ["</svg>"]) + "\n"


def cmd_export(args) -> int:
    try:
        text = Path(args.labels).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {args.labels}: {exc}") from None
    try:
        meta, header, rows = read_labeling_csv(text)
    except Exception as exc:  # csv raises a variety of errors on garbage
        raise UsageError(f"malformed labeling CSV: {exc}") from None
    kinds = [h[len("label_"):] for h in header if h.startswith("label_")]
    metric = args.metric or (kinds[0] if kinds else None)
    if header:
        missing = {"sample_index", "x", "y", "z"} - set(header)
        if missing:
            raise UsageError(f"labeling CSV lacks Bloch columns {sorted(missing)}; export draws qubit labelings")
        if metric not in kinds:
            raise UsageError(f"metric {metric!r} not in labeling (have {kinds})")
    try:
        for row in rows:
            int(row[f"label_{metric}"]), float(row["x"]), float(row["y"]), float(row["z"])
            if row[f"boundary_{metric}"] not in ("0", "1"):
                raise ValueError(f"bad boundary flag {row[f'boundary_{metric}']!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed labeling CSV row: {exc}") from None

    cfg = _config(args, "metric", "width", "height")
    cfg["input_sha256"] = hashlib.sha256(text.encode()).hexdigest()
    svg_meta = {**metadata(cfg), "seed": meta.get("seed"), "source": meta}
    _write(Path(args.out), render_svg(rows, metric, svg_meta, args.width, args.height))
    print(f"wrote {args.out} ({len(rows)} samples)")
    return EXIT_OK


# --- entry point -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qgeom", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"qgeom {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("coincide", help="compare Voronoi labelings under several distances")
    src = c.add_mutually_exclusive_group()
    src.add_argument("--sites", type=Path, help="JSON list of state literals")
    src.add_argument("--random", type=int, metavar="K", help="K random pure sites")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--samples", type=int, default=2000)
    c.add_argument("--eps", type=float, default=DEFAULT_BAND, help="boundary band on the margin")
    c.add_argument("--metrics", help="comma-separated distance kinds")
    c.add_argument("--suite", choices=("pure", "mixed", "section"), default="pure")
    c.add_argument("--d", type=int, default=None, help="Hilbert space dimension")
    c.add_argument("--variant", choices=("nearest", "farthest", "both"), default="nearest")
    c.add_argument("--expect-mismatch", action="store_true",
                   help="succeed only if a confident disagreement is found")
    c.add_argument("--out", default="qgeom-out", help="output directory")
    c.set_defaults(func=cmd_coincide)

    k = sub.add_parser("capacity", help="Holevo capacity of a qubit channel")
    k.add_argument("--channel", type=Path, help="channel JSON file")
    k.add_argument("--points", type=int, default=1000)
    k.add_argument("--tol", type=float, default=1e-5)
    k.add_argument("--max-iter", type=int, default=100_000)
    k.add_argument("--seed", type=int, default=0, help="recorded only; the input lattice is deterministic")
    k.add_argument("--oracle", action="store_true", help="cross-check with Blahut-Arimoto")
    k.add_argument("--bits", action="store_true", help="print bits first")
    k.add_argument("--out", help="estimate JSON path")
    k.set_defaults(func=cmd_capacity)

    s = sub.add_parser("section", help="bisector residual tables in the d >= 3 section")
    s.add_argument("--d", type=int, default=3)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--pairs", type=int, default=10)
    s.add_argument("--grid", type=int, default=20)
    s.add_argument("--r", type=float, default=0.9999, help="radius used to realise pure sites")
    s.add_argument("--out", default="qgeom-out")
    s.set_defaults(func=cmd_section)

    e = sub.add_parser("export", help="draw a qubit labeling CSV as an SVG map")
    e.add_argument("--labels", type=Path, required=True)
    e.add_argument("--metric", help="which label column to draw (default: first)")
    e.add_argument("--width", type=int, default=720)
    e.add_argument("--height", type=int, default=360)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_export)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DidNotConverge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except QGeomError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
