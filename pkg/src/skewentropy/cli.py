"""Command-line interface: entropy | mutinfo | kl | sample | density | curve.

Every command reads distribution specs from JSON files (see
:mod:`skewentropy.specio`), writes CSV (header row, LF endings, '.' decimal
separator, 17 significant digits) to ``--out`` or stdout, and is fully
reproducible: the root seed is split per (command, shard), and when writing
to a file a run manifest ``<out>.manifest.json`` is emitted whose stored
argv replays the byte-identical result via :func:`replay_manifest`.

Exit codes: 0 success, 2 parse/validation failure, 3 numerical failure.
Estimates are reported in nats; ``--bits`` rescales values by 1/ln 2 on
output only.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import distributions as ds
from . import entropy as en
from . import information as info
from . import oracle as orc
from .errors import SkewEntropyError, SpecFileError
from .numerics import as_seed_sequence, substream
from .specio import load_spec

__all__ = ["main", "replay_manifest"]

_COMMAND_IDS = {
    "entropy": 1,
    "mutinfo": 2,
    "kl": 3,
    "sample": 4,
    "density": 5,
    "curve": 6,
}

_LN2 = math.log(2.0)


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def _root_stream(command: str, seed: int):
    return as_seed_sequence(np.random.SeedSequence(seed, spawn_key=(_COMMAND_IDS[command],)))


def _parse_grid(text: str) -> np.ndarray:
    try:
        start, stop, step = (float(p) for p in text.split(":"))
    except ValueError as exc:
        raise SpecFileError(f"grid must be start:stop:step, got {text!r}") from exc
    if step <= 0 or stop < start:
        raise SpecFileError(f"grid {text!r} must have step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def _add_common(sub, oracle_flag=True):
    sub.add_argument("--samples", type=int, default=en.DEFAULT_N_SAMPLES,
                     help="Monte Carlo sample count (default 100000)")
    sub.add_argument("--seed", type=_seed_value, default=0,
                     help="root seed, 64-bit unsigned (default 0)")
    sub.add_argument("--out", default=None,
                     help="output CSV path (default stdout)")
    sub.add_argument("--bits", action="store_true",
                     help="report values in bits instead of nats")
    sub.add_argument("--workers", type=int, default=1,
                     help="worker threads for sharded estimators (default 1)")
    if oracle_flag:
        sub.add_argument("--oracle", action="store_true",
                         help="append quadrature oracle value and abs. difference (n <= 2)")


def _seed_value(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skewentropy",
        description="Entropy, mutual information and KL divergence for "
        "skew-normal and log-skew-normal families.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("entropy", help="entropy of the distribution in --spec")
    p.add_argument("--spec", required=True, help="JSON spec file")
    _add_common(p)

    p = subs.add_parser("mutinfo", help="mutual information between two blocks")
    p.add_argument("--spec", required=True,
                   help="JSON spec file (canonical lcfusn: mu=0, sigma=I)")
    p.add_argument("--split", type=int, required=True,
                   help="size of the first block")
    _add_common(p)

    p = subs.add_parser("kl", help="KL divergence lcfusn vs mvlsn")
    p.add_argument("--spec", required=True, help="lcfusn JSON spec file")
    p.add_argument("--vs", required=True, help="mvlsn JSON spec file")
    p.add_argument("--direction", choices=["lcfusn_vs_lsn", "lsn_vs_lcfusn"],
                   default="lcfusn_vs_lsn")
    p.add_argument("--method", choices=["formula", "direct"], default="formula")
    _add_common(p)

    p = subs.add_parser("sample", help="draw i.i.d. variates")
    p.add_argument("--spec", required=True, help="JSON spec file")
    _add_common(p, oracle_flag=False)

    p = subs.add_parser("density", help="evaluate log-density at points")
    p.add_argument("--spec", required=True, help="JSON spec file")
    p.add_argument("--points", required=True,
                   help="CSV file of evaluation points, one per row")
    _add_common(p, oracle_flag=False)

    p = subs.add_parser("curve", help="entropy over a parameter grid")
    p.add_argument("--family", choices=["sn", "lsn", "cfusn12"], required=True)
    p.add_argument("--grid", required=True, help="start:stop:step")
    p.add_argument("--sigma2", default="1",
                   help="comma-separated scale values sigma^2 for sn/lsn (default 1)")
    p.add_argument("--mu", type=float, default=0.0,
                   help="location for sn/lsn curves (default 0)")
    _add_common(p, oracle_flag=False)
    return parser


def _rescale(row: dict, bits: bool) -> dict:
    if not bits:
        return row
    out = {}
    for key, value in row.items():
        if key.endswith("_nats"):
            out[key.replace("_nats", "_bits")] = value / _LN2
        elif key in ("std_error", "closed_form_part", "mc_part", "oracle_value",
                     "abs_diff", "log_pdf"):
            out[key] = value / _LN2
        else:
            out[key] = value
    return out


def _estimate_row(est: en.McEstimate, seed: int) -> dict:
    return {
        "estimate_nats": est.value,
        "std_error": est.std_error,
        "closed_form_part": est.closed_form_part,
        "mc_part": est.mc_part,
        "n_samples": est.n_samples,
        "seed": seed,
    }


def _run_entropy(args):
    spec = load_spec(args.spec)
    if isinstance(spec, info.LsnSpec):
        raise SpecFileError("the entropy command expects a distribution family, not mvlsn")
    root = _root_stream("entropy", args.seed)
    est = en.entropy_estimate(spec, root, args.samples, args.workers)
    row = {"family": ds.family_name(spec), "n": ds.dim(spec), "m": ds.skew_width(spec)}
    row.update(_estimate_row(est, args.seed))
    if args.oracle:
        oracle_value = orc.entropy_quadrature(spec)
        row["oracle_value"] = oracle_value
        row["abs_diff"] = abs(est.value - oracle_value)
    return [row]


def _run_mutinfo(args):
    spec = load_spec(args.spec)
    if not isinstance(spec, ds.Lcfusn):
        raise SpecFileError("mutinfo requires an lcfusn spec")
    if not spec.loc_scale.is_canonical():
        raise SpecFileError("mutinfo requires the canonical case (mu = 0, sigma = I)")
    part = ds.Partition.split(spec.skew, args.split)
    root = _root_stream("mutinfo", args.seed)
    est = info.mutual_information(spec.skew, part, root, args.samples, args.workers)
    row = {
        "family": "lcfusn",
        "n": ds.dim(spec),
        "m": ds.skew_width(spec),
        "n1": part.n1,
        "n2": part.n2,
    }
    row.update(_estimate_row(est, args.seed))
    if args.oracle:
        oracle_value = orc.mi_quadrature(spec.skew, part)
        row["oracle_value"] = oracle_value
        row["abs_diff"] = abs(est.value - oracle_value)
    return [row]


def _run_kl(args):
    z = load_spec(args.spec)
    y = load_spec(args.vs)
    if not isinstance(z, ds.Lcfusn) or not isinstance(y, info.LsnSpec):
        raise SpecFileError("kl requires --spec lcfusn and --vs mvlsn")
    root = _root_stream("kl", args.seed)
    est = info.kl_lcfusn_vs_lsn(
        z, y, root, args.samples, args.workers,
        direction=args.direction, method=args.method,
    )
    row = {
        "direction": args.direction,
        "method": args.method,
        "n": ds.dim(z),
        "m": ds.skew_width(z),
    }
    row.update(_estimate_row(est, args.seed))
    if args.oracle:
        pair = (z, y) if args.direction == "lcfusn_vs_lsn" else (y, z)
        oracle_value = orc.kl_quadrature(*pair)
        row["oracle_value"] = oracle_value
        row["abs_diff"] = abs(est.value - oracle_value)
    return [row]


def _run_sample(args):
    spec = load_spec(args.spec)
    if isinstance(spec, info.LsnSpec):
        spec = spec.as_lcfusn()
    rng = substream(_root_stream("sample", args.seed), 0)
    draws = ds.sample(spec, rng, args.samples)
    return [
        {f"x{j + 1}": draws[i, j] for j in range(draws.shape[1])}
        for i in range(draws.shape[0])
    ]


def _run_density(args):
    spec = load_spec(args.spec)
    points = np.loadtxt(args.points, delimiter=",", dtype=float, ndmin=2)
    n = spec.n if isinstance(spec, info.LsnSpec) else ds.dim(spec)
    if points.shape[1] != n:
        raise SpecFileError(
            f"points have {points.shape[1]} columns, spec has dimension {n}"
        )
    log_pdf = spec.log_pdf(points) if isinstance(spec, info.LsnSpec) else ds.log_pdf(spec, points)
    rows = []
    for i in range(points.shape[0]):
        row = {f"x{j + 1}": points[i, j] for j in range(n)}
        row["log_pdf"] = float(log_pdf[i])
        rows.append(row)
    return rows


def _run_curve(args):
    grid = _parse_grid(args.grid)
    root = _root_stream("curve", args.seed)
    rows = []
    if args.family in ("sn", "lsn"):
        try:
            sigma2s = [float(s) for s in args.sigma2.split(",") if s]
        except ValueError as exc:
            raise SpecFileError(f"bad --sigma2 list {args.sigma2!r}") from exc
        for sigma2 in sigma2s:
            if sigma2 <= 0:
                raise SpecFileError("sigma2 values must be positive")
            points = en.entropy_curve(
                args.family, grid, {"mu": args.mu, "sigma": math.sqrt(sigma2)},
                root, args.samples, args.workers,
            )
            for alpha, est in points:
                row = {"family": args.family, "sigma2": sigma2, "alpha": alpha}
                row.update(_estimate_row(est, args.seed))
                rows.append(row)
        return rows
    pairs = [(d1, d2) for d1 in grid for d2 in grid]
    points = en.entropy_curve("cfusn12", pairs, None, root, args.samples, args.workers)
    for d1, d2, est in points:
        row = {"family": "cfusn12", "delta1": d1, "delta2": d2}
        row.update(_estimate_row(est, args.seed))
        rows.append(row)
    return rows


_RUNNERS = {
    "entropy": _run_entropy,
    "mutinfo": _run_mutinfo,
    "kl": _run_kl,
    "sample": _run_sample,
    "density": _run_density,
    "curve": _run_curve,
}


def _render_csv(rows: list[dict], bits: bool) -> str:
    rows = [_rescale(row, bits) for row in rows]
    header = list(rows[0].keys())
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(row[key]) for key in header))
    return "\n".join(lines) + "\n"


def _plot_script(args, out_path: Path) -> str:
    lines = [
        f"# gnuplot script for {out_path.name}",
        'set datafile separator ","',
        "set key autotitle columnhead",
    ]
    if args.family in ("sn", "lsn"):
        sigma2s = [s for s in args.sigma2.split(",") if s]
        lines += [
            "set xlabel 'alpha'",
            "set ylabel 'entropy (nats)'",
            "plot " + ", \\\n     ".join(
                f"'{out_path.name}' using 3:($2=={s} ? $4 : NaN) "
                f"with linespoints title 'sigma2={s}'"
                for s in sigma2s
            ),
        ]
    else:
        lines += [
            "set xlabel 'delta1'",
            "set ylabel 'delta2'",
            "set zlabel 'entropy (nats)'",
            "set dgrid3d",
            "set hidden3d",
            f"splot '{out_path.name}' using 2:3:4 with lines notitle",
        ]
    return "\n".join(lines) + "\n"


def _manifest(args, argv: list[str]) -> dict:
    spec_files = [
        str(Path(getattr(args, name)))
        for name in ("spec", "vs", "points")
        if getattr(args, name, None)
    ]
    return {
        "command": args.command,
        "argv": argv,
        "spec_files": spec_files,
        "seed": args.seed,
        "n_samples": args.samples,
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        rows = _RUNNERS[args.command](args)
    except (SpecFileError, SkewEntropyError) as exc:
        kind = 2 if isinstance(exc, SpecFileError) or _is_validation(exc) else 3
        print(f"skewentropy {args.command}: error: {exc}", file=sys.stderr)
        return kind
    text = _render_csv(rows, args.bits)
    if args.out is None:
        sys.stdout.write(text)
        return 0
    out_path = Path(args.out)
    out_path.write_bytes(text.encode("ascii"))
    manifest_path = out_path.with_name(out_path.name + ".manifest.json")
    manifest_path.write_text(json.dumps(_manifest(args, argv), indent=2) + "\n")
    if args.command == "curve":
        script_path = out_path.with_name(out_path.name + ".plt")
        script_path.write_text(_plot_script(args, out_path))
    return 0


def _is_validation(exc: SkewEntropyError) -> bool:
    """Errors raised while constructing inputs are validation failures (exit
    2); anything surfacing later from the numerics is a numerical failure
    (exit 3)."""
    from .errors import (
        DimensionMismatch,
        InvalidPartition,
        MismatchedLocationScale,
        NotPositiveDefinite,
        NotSymmetric,
        OutOfSupport,
        Unsupported,
    )

    return isinstance(
        exc,
        (
            DimensionMismatch,
            InvalidPartition,
            MismatchedLocationScale,
            NotPositiveDefinite,
            NotSymmetric,
            OutOfSupport,
            Unsupported,
        ),
    )


def replay_manifest(manifest_path) -> int:
    """Re-run the command recorded in a manifest; the result file is
    reproduced byte-identically (the fresh manifest differs only in its
    timestamp)."""
    manifest = json.loads(Path(manifest_path).read_text())
    return main(manifest["argv"])


if __name__ == "__main__":
    sys.exit(main())
