"""Command-line front end.

Subcommands
    eval      evaluate lambda values / the full residual at a point
    hessian   finite-difference Hessian check against the closed forms
    certify   produce region + local certificates (one region or all)
    verify    independently re-check certificate files or a bundle dir
    scan      multi-start Newton scan, prints a RootReport as JSON
    plotdata  CSV grids (region ids, residual fields, per-region gaps)

Exit codes: 0 success; 2 domain error / bad window / bad config;
3 certification refuted or contraction failure; 4 budget exhausted;
5 verification rejected.  CSV floats carry 17 significant digits,
evaluated values print with 15; see docs/formats.md for the column and
JSON layouts.  The output directory for certificates resolves in order:
--output flag, STARCC_OUTPUT_DIR, config file, then ./certificates.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

import numpy as np

from . import kernel
from .certify import (
    BudgetExhausted,
    Certificate,
    CertificationRefuted,
    ContractionFailure,
    LocalUniquenessCertificate,
    MalformedCertificate,
    RunConfig,
    certify_all,
    certify_inequality,
    certify_local_uniqueness,
    verify_certificate,
    verify_local_certificate,
)
from .forces import (
    HESSIAN_CLOSED_FORM,
    HESSIAN_CLOSED_FORM_DET,
    hessian_measure,
    lambda_component,
    residual_vector,
)
from .geometry import DomainError
from .regions import REGION_IDS, TRUNCATION_R5, region_def, region_plan
from .solver import grid_scan

OUTPUT_DIR_ENV = "STARCC_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "certificates"

EXIT_DOMAIN = 2
EXIT_CERTIFICATION = 3
EXIT_BUDGET = 4
EXIT_VERIFY = 5

_CONFIG_KEYS = (
    "max_box_width", "delta_b0", "truncation", "max_depth",
    "threads", "seed", "output_dir", "spread_tol", "y1_tol",
    "posteriori_tol",
)


def _g15(x: float) -> str:
    return f"{float(x):.15g}"


def _g17(x: float) -> str:
    return f"{float(x):.17g}"


def _load_run_config(args) -> RunConfig:
    """Defaults <- config file <- STARCC_OUTPUT_DIR <- flags."""
    values = {}
    path = getattr(args, "config", None)
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        for key in raw:
            if key not in _CONFIG_KEYS:
                raise ValueError(f"unknown config key {key!r} in {path}")
        values.update(raw)
    env_dir = os.environ.get(OUTPUT_DIR_ENV)
    if env_dir:
        values["output_dir"] = env_dir
    for key, flag in (
        ("max_box_width", "width"), ("delta_b0", "delta"),
        ("truncation", "truncate_r5"), ("max_depth", "max_depth"),
        ("threads", "threads"), ("seed", "seed"), ("output_dir", "output"),
    ):
        v = getattr(args, flag, None)
        if v is not None:
            values[key] = v
    return RunConfig(**values).validate()


def _resolve_outdir(cfg: RunConfig) -> str:
    out = cfg.output_dir or DEFAULT_OUTPUT_DIR
    os.makedirs(out, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# eval


def _parse_index(text: str):
    if len(text) == 2 and text.isdigit():
        idx = (int(text[0]), int(text[1]))
        if idx in kernel.LAMBDA_INDICES:
            return idx
    valid = ", ".join(f"{i}{k}" for i, k in kernel.LAMBDA_INDICES)
    raise ValueError(f"index must be one of {valid} (got {text!r})")


def cmd_eval(args) -> int:
    p = (args.r3, args.r5)
    if args.index is not None:
        idx = _parse_index(args.index)
        value = lambda_component(idx, p)
        if args.json:
            print(json.dumps({"r3": p[0], "r5": p[1],
                              f"lambda_{idx[0]}{idx[1]}": value}))
        else:
            print(f"lambda_{idx[0]}{idx[1]}({_g15(p[0])}, {_g15(p[1])}) = {_g15(value)}")
        return 0
    res = residual_vector(p)
    if args.json:
        print(json.dumps({
            "r3": p[0], "r5": p[1],
            "lambda": {f"{i}{k}": v for (i, k), v in res.lambda_values.items()},
            "y1": res.y1, "spread": res.pairwise_spread,
        }, indent=2))
        return 0
    for (i, k), v in sorted(res.lambda_values.items()):
        print(f"lambda_{i}{k} = {_g15(v)}")
    print(f"y1     = {_g15(res.y1)}")
    print(f"spread = {_g15(res.pairwise_spread)}")
    return 0


# ---------------------------------------------------------------------------
# hessian


def cmd_hessian(args) -> int:
    h = hessian_measure((1.0, 1.0), h=args.step, richardson=not args.no_richardson)
    det = float(np.linalg.det(h))
    targets = HESSIAN_CLOSED_FORM
    entries = {
        "h11": (h[0, 0], targets[0][0]),
        "h12": (h[0, 1], targets[0][1]),
        "h22": (h[1, 1], targets[1][1]),
        "det": (det, HESSIAN_CLOSED_FORM_DET),
    }
    rel = {k: abs(v - t) / abs(t) for k, (v, t) in entries.items()}
    worst = max(rel.values())
    verdict = "PASS" if worst <= args.tol else "FAIL"
    record = {
        "point": [1.0, 1.0],
        "step": args.step,
        "richardson": not args.no_richardson,
        "numeric": {k: v for k, (v, _) in entries.items()},
        "closed_form": {k: t for k, (_, t) in entries.items()},
        "relative_error": rel,
        "leading_minors_positive": bool(h[0, 0] > 0.0 and det > 0.0),
        "tolerance": args.tol,
        "verdict": verdict,
    }
    if args.json:
        print(json.dumps(record, indent=2))
        return 0
    print(f"Hessian of the configuration measure at (1, 1), step {args.step:g}:")
    for k in ("h11", "h12", "h22", "det"):
        v, t = entries[k]
        print(f"  {k}: numeric {_g15(v)}  closed form {_g15(t)}"
              f"  rel.err {rel[k]:.3e}")
    print(f"  leading minors positive: {record['leading_minors_positive']}"
          " (local minimum)")
    print(f"  worst relative error {worst:.3e} vs tolerance {args.tol:g}"
          f" -> {verdict}")
    if verdict == "FAIL":
        print("  note: the check is O(h^2); steps above ~1e-3 trade accuracy"
              " for stencil width and are expected to miss the tolerance.")
    return 0


# ---------------------------------------------------------------------------
# certify


def _print_region_row(cert: Certificate) -> None:
    s = cert.stats
    print(f"  {cert.region:<4} leaves {cert.n_leaves():>6}  depth {s['max_depth']:>2}"
          f"  min_gap {cert.min_bound:.6e}  {s['wall_seconds']:7.2f}s")


def cmd_certify(args) -> int:
    cfg = _load_run_config(args)
    outdir = _resolve_outdir(cfg)
    target = args.target
    if target != "all" and target not in REGION_IDS:
        raise ValueError(f"unknown region {target!r}; use J1..J16 or 'all'")

    if target == "all":
        manifest = certify_all(cfg)
        for rid in REGION_IDS:
            cert = manifest.certificates[rid]
            with open(os.path.join(outdir, f"{rid}.json"), "w", encoding="utf-8") as fh:
                fh.write(cert.to_json())
            _print_region_row(cert)
        with open(os.path.join(outdir, "local.json"), "w", encoding="utf-8") as fh:
            fh.write(manifest.local.to_json())
        with open(os.path.join(outdir, "manifest.json"), "w", encoding="utf-8") as fh:
            json.dump(manifest.summary_payload(), fh, indent=2)
        loc = manifest.local
        print(f"  local uniqueness on [1-{loc.delta:g}, 1+{loc.delta:g}]^2:"
              f" containment margin {loc.containment_margin:.4e},"
              f" residual {loc.posteriori_residual:.2e},"
              f" annulus leaves {loc.ann_lo3.size}")
        print(f"verdict: {manifest.verdict}  ({manifest.wall_seconds:.2f}s total,"
              f" fingerprint {manifest.fingerprint[:16]})")
        print(f"bundle written to {outdir}")
        return 0

    truncation = cfg.truncation if region_def(target).unbounded else None
    cert = certify_inequality(
        target,
        max_box_width=cfg.max_box_width,
        truncation=truncation,
        delta=cfg.delta_b0,
        max_depth=cfg.max_depth,
    )
    with open(os.path.join(outdir, f"{target}.json"), "w", encoding="utf-8") as fh:
        fh.write(cert.to_json())
    _print_region_row(cert)
    if truncation is not None:
        print(f"  truncated at r5 <= {truncation:g} (recorded in the certificate)")
    print(f"certificate written to {os.path.join(outdir, target + '.json')}")
    return 0


# ---------------------------------------------------------------------------
# verify


def _load_payload(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedCertificate(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict) or "kind" not in payload:
        raise MalformedCertificate(f"{path}: missing 'kind' discriminator")
    return payload


def _verify_file(path: str) -> str:
    payload = _load_payload(path)
    kind = payload["kind"]
    if kind == "inequality":
        cert = Certificate.from_payload(payload)
        verify_certificate(cert)
        return (f"ACCEPT {path}: region {cert.region}, {cert.n_leaves()} leaves,"
                f" min_gap {cert.min_bound:.6e}")
    if kind == "local-uniqueness":
        cert = LocalUniquenessCertificate.from_payload(payload)
        verify_local_certificate(cert)
        return (f"ACCEPT {path}: local uniqueness, margin"
                f" {cert.containment_margin:.4e}")
    if kind == "manifest":
        raise MalformedCertificate(
            f"{path}: manifests are verified as part of their bundle directory")
    raise MalformedCertificate(f"{path}: unknown certificate kind {kind!r}")


def _verify_bundle(dirpath: str) -> List[str]:
    manifest_path = os.path.join(dirpath, "manifest.json")
    if not os.path.exists(manifest_path):
        raise MalformedCertificate(f"{dirpath}: no manifest.json")
    summary = _load_payload(manifest_path)
    if summary.get("kind") != "manifest":
        raise MalformedCertificate(f"{manifest_path}: not a manifest")
    lines = []
    for rid in REGION_IDS:
        if rid not in summary.get("regions", {}):
            raise MalformedCertificate(f"{manifest_path}: region {rid} missing")
        path = os.path.join(dirpath, f"{rid}.json")
        cert = Certificate.from_payload(_load_payload(path))
        verify_certificate(cert)
        claimed = summary["regions"][rid]["min_bound"]
        if claimed != cert.min_bound:
            raise MalformedCertificate(
                f"{manifest_path}: min_bound for {rid} ({claimed!r}) does not"
                f" match the certificate ({cert.min_bound!r})")
        if summary["fingerprint"] != cert.fingerprint:
            raise MalformedCertificate(
                f"{path}: fingerprint differs from the manifest")
        lines.append(f"ACCEPT {rid}: min_gap {cert.min_bound:.6e},"
                     f" {cert.n_leaves()} leaves")
    local = LocalUniquenessCertificate.from_payload(
        _load_payload(os.path.join(dirpath, "local.json")))
    verify_local_certificate(local)
    lines.append(f"ACCEPT local: margin {local.containment_margin:.4e},"
                 f" {local.ann_lo3.size} annulus leaves")
    lines.append(f"bundle {dirpath}: verdict {summary.get('verdict')!r} confirmed")
    return lines


def cmd_verify(args) -> int:
    if not os.path.exists(args.path):
        # a missing path is a usage error, not a rejected certificate
        raise OSError(f"no such file or directory: {args.path}")
    try:
        if os.path.isdir(args.path):
            for line in _verify_bundle(args.path):
                print(line)
        else:
            print(_verify_file(args.path))
        return 0
    except Exception as exc:  # any defect means rejection
        print(f"REJECT: {exc}", file=sys.stderr)
        return EXIT_VERIFY


# ---------------------------------------------------------------------------
# scan


def cmd_scan(args) -> int:
    lo3, hi3, lo5, hi5 = args.window
    report = grid_scan(((lo3, hi3), (lo5, hi5)), args.starts,
                       tol=args.tol, seed=args.seed)
    text = report.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        print(f"{len(report.roots)} root(s); report written to {args.out}")
    else:
        print(text)
    return 0


# ---------------------------------------------------------------------------
# plotdata


def _grid_axes(window, n):
    lo3, hi3, lo5, hi5 = window
    if not (lo3 < hi3 and lo5 < hi5) or n < 2:
        raise DomainError(f"bad plot window {window} / grid {n}")
    g3 = np.linspace(lo3, hi3, n)
    g5 = np.linspace(lo5, hi5, n)
    r3, r5 = np.meshgrid(g3, g5, indexing="ij")
    return r3.ravel(), r5.ravel()


def _domain_filter(r3, r5):
    from .solver import _domain_mask

    keep = _domain_mask(r3, r5)
    return r3[keep], r5[keep]


def _emit_csv(out, header, rows) -> None:
    fh = open(out, "w", encoding="utf-8") if out else sys.stdout
    try:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    finally:
        if out:
            fh.close()


def _plot_regions(args) -> None:
    from .regions import _membership_matrix

    r3, r5 = _domain_filter(*_grid_axes(args.window, args.grid))
    member = _membership_matrix(r3, r5)
    idx = np.argmax(member, axis=1)
    covered = member.any(axis=1)
    rows = (
        (_g17(a), _g17(b), REGION_IDS[i] if c else "none")
        for a, b, i, c in zip(r3, r5, idx, covered)
    )
    _emit_csv(args.out, ("r3", "r5", "region"), rows)


def _plot_spread(args) -> None:
    r3, r5 = _domain_filter(*_grid_axes(args.window, args.grid))
    bk = kernel.FloatBackend
    cache: dict = {}
    values = [kernel.lambda_quot(bk, r3, r5, i, k, cache)
              for i, k in kernel.LAMBDA_INDICES]
    stack = np.stack(values)
    spread = stack.max(axis=0) - stack.min(axis=0)
    y1 = kernel.y1_num(bk, r3, r5, cache)
    rows = (
        (_g17(a), _g17(b), _g17(s), _g17(y))
        for a, b, s, y in zip(r3, r5, spread, y1)
    )
    _emit_csv(args.out, ("r3", "r5", "spread", "y1"), rows)


def _plot_gap(args, rid: str) -> None:
    region = region_def(rid)
    plan = region_plan(rid)
    trunc = args.truncate_r5 if region.unbounded else None
    lo3, hi3, lo5, hi5 = region.bbox(trunc)
    r3, r5 = _grid_axes((lo3, hi3, lo5, hi5), args.grid)
    keep = np.fromiter((region.contains((a, b)) for a, b in zip(r3, r5)),
                       dtype=bool, count=r3.size)
    r3, r5 = r3[keep], r5[keep]
    bk = kernel.FloatBackend
    rows = []
    for a, b in zip(r3, r5):
        check = plan.check_for_box(a, a, b, b)
        label = check.describe()
        if hasattr(check, "low"):
            cache: dict = {}
            hi = kernel.lambda_quot(bk, a, b, *check.high, cache)
            lo = kernel.lambda_quot(bk, a, b, *check.low, cache)
            value = hi - lo
        else:
            value = kernel.y1_num(bk, a, b)
        rows.append((_g17(a), _g17(b), _g17(value), f'"{label}"'))
    _emit_csv(args.out, ("r3", "r5", "value", "check"), rows)


def cmd_plotdata(args) -> int:
    what = args.what
    if what == "regions":
        _plot_regions(args)
    elif what == "spread":
        _plot_spread(args)
    elif what.startswith("gap-") and what[4:] in REGION_IDS:
        _plot_gap(args, what[4:])
    else:
        raise ValueError(
            f"unknown plotdata kind {what!r}; use regions, spread, or gap-J<n>")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="starcc",
        description="Star central configurations of five equal masses:"
                    " evaluate, scan, certify, verify.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate lambda values / residual at a point")
    p.add_argument("r3", type=float)
    p.add_argument("r5", type=float)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--index", help="one lambda, e.g. --index 31 for lambda_31")
    g.add_argument("--all", action="store_true",
                   help="full residual (default when --index is absent)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("hessian", help="Hessian check at (1,1) vs closed forms")
    p.add_argument("--step", type=float, default=1e-4,
                   help="finite-difference step in [1e-6, 1e-2] (default 1e-4)")
    p.add_argument("--tol", type=float, default=1e-5,
                   help="relative-error threshold for the PASS verdict")
    p.add_argument("--no-richardson", dest="no_richardson", action="store_true",
                   help="plain central differences: error grows as O(step^2)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_hessian)

    p = sub.add_parser("certify", help="certify one region or everything")
    p.add_argument("target", help="J1..J16 or 'all'")
    p.add_argument("--config", help="JSON file with RunConfig fields")
    p.add_argument("--width", type=float, help="max box width (default 0.02)")
    p.add_argument("--delta", type=float,
                   help="B0 half-width; 0 disables the excision (default 0.02)")
    p.add_argument("--truncate-r5", dest="truncate_r5", type=float,
                   help="truncation for unbounded regions (default 10)")
    p.add_argument("--max-depth", dest="max_depth", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output", help=f"output directory (or ${OUTPUT_DIR_ENV})")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify", help="re-verify certificate file(s)")
    p.add_argument("path", help="certificate JSON file or bundle directory")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scan", help="multi-start Newton scan (JSON report)")
    p.add_argument("--window", type=float, nargs=4,
                   metavar=("R3LO", "R3HI", "R5LO", "R5HI"),
                   default=[0.2, 3.0, 0.2, 3.0])
    p.add_argument("--starts", type=int, default=10_000)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser(
        "plotdata",
        help="CSV grids for external plotting",
        description="Kinds: 'regions' (columns r3,r5,region over the window;"
                    " region is 'none' on uncovered boundary nodes);"
                    " 'spread' (columns r3,r5,spread,y1);"
                    " 'gap-J<n>' (columns r3,r5,value,check over that region;"
                    " value is lambda_high - lambda_low for pair checks and"
                    " the signed y1 for nonvanishing-y1 bands).",
    )
    p.add_argument("what", help="regions | spread | gap-J<n>")
    p.add_argument("grid", type=int, help="nodes per axis")
    p.add_argument("--window", type=float, nargs=4,
                   metavar=("R3LO", "R3HI", "R5LO", "R5HI"),
                   default=[0.0, 3.4, 0.0, 3.4],
                   help="plot window for regions/spread (default [0,3.4]^2)")
    p.add_argument("--truncate-r5", dest="truncate_r5", type=float,
                   default=TRUNCATION_R5,
                   help="bbox truncation for gap dumps on unbounded regions")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_plotdata)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (CertificationRefuted, ContractionFailure) as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATION
    except BudgetExhausted as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
