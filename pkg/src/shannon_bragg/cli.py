"""Command-line front end.

Data commands (``redundancy``, ``diffraction``) write CSV or JSON; report
commands (``commensurability``, ``bragg``, ``duality``, ``markov``) write
JSON.  JSON documents carry the run manifest inline; a CSV written to a file
gets its manifest at ``PATH.manifest.json``.

Exit status: 0 success, 2 usage or invalid input, 3 resource limit,
4 numeric or domain failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .coherence import DEFAULT_QMAX, DEFAULT_TOL, PhaseVector, classify_commensurability
from .diffraction import (
    COHERENCE_DELTA,
    HTMedium,
    asymptotic_profile,
    exact_profile,
    monte_carlo_intensity,
    predict_bragg,
)
from .duality import MATCH_TOL, conjugate_medium, correspondence
from .errors import InvalidArgumentError, ShannonBraggError
from .markov import DEFAULT_EPS, WeightMode, classify_markov, load_matrix
from .redundancy import Method, SourceModel, analyze_source, redundancy_series

EXIT_USAGE = 2

_PI_MULTIPLE = re.compile(r"^\s*([-+]?(?:\d+(?:\.\d*)?|\.\d+)?(?:[eE][-+]?\d+)?)\s*\*?\s*pi\s*$")


def _number_list(text: str) -> list[str]:
    items = [part.strip() for part in text.split(",") if part.strip()]
    if not items:
        raise argparse.ArgumentTypeError("expected a comma-separated list")
    return items


def _wavenumber(text: str) -> float:
    """A float, or a multiple of pi such as ``2pi`` or ``0.5*pi``."""
    m = _PI_MULTIPLE.match(text)
    try:
        if m:
            coef = m.group(1)
            value = (float(coef) if coef not in ("", "+", "-") else float(coef + "1")) * math.pi
        else:
            value = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid wave number {text!r}") from exc
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"non-finite wave number {text!r}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from exc
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from exc
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


# ---------------------------------------------------------------------------
# output


def _fmt(x: float) -> str:
    return "%.17g" % x


def _json_float(x: float) -> Optional[float]:
    return None if x is None or not math.isfinite(x) else float(x)


def _manifest(argv: Sequence[str], args, started: float, tolerances: dict) -> dict:
    return {
        "command_line": ["shannon-bragg", *argv],
        "seed": getattr(args, "seed", None),
        "tolerances": tolerances,
        "qmax": getattr(args, "qmax", None),
        "version": __version__,
        "wall_time": time.perf_counter() - started,
    }


def _emit_text(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _emit_json(doc: dict, out: Optional[str]) -> None:
    _emit_text(json.dumps(doc, indent=2, allow_nan=False) + "\n", out)


def _emit_csv(header: Sequence[str], rows, out: Optional[str], manifest: dict) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    _emit_text(buf.getvalue(), out)
    if out is not None:
        _emit_json(manifest, out + ".manifest.json")


def _document(input_: dict, parameters: dict, results: dict, manifest: dict) -> dict:
    return {"input": input_, "parameters": parameters, "results": results, "manifest": manifest}


# ---------------------------------------------------------------------------
# commands


def cmd_redundancy(args, argv, started) -> int:
    src = SourceModel.from_values(args.probs, ",".join(args.probs))
    series = redundancy_series(
        src, args.n_start, args.n_end, args.method, args.m_max, args.qmax, args.tol, args.workers
    )
    manifest = _manifest(argv, args, started, {"tol": args.tol})
    if args.format == "csv":
        rows = [
            (n, _fmt(r), ";".join(f))
            for n, r, f in zip(series.n_values, series.values, series.flags)
        ]
        _emit_csv(("n", "R_n", "flags"), rows, args.out, manifest)
        return 0
    analysis = analyze_source(src, args.qmax, args.tol)
    doc = _document(
        {"probs": args.probs},
        {"n_start": args.n_start, "n_end": args.n_end, "method": series.method.value,
         "m_max": args.m_max, "qmax": args.qmax, "tol": args.tol, "workers": args.workers},
        {
            "commensurability": analysis.report.to_dict(),
            "omega0": analysis.omega0,
            "n": list(series.n_values),
            "R_n": list(series.values),
            "flags": [list(f) for f in series.flags],
        },
        manifest,
    )
    _emit_json(doc, args.out)
    return 0


def cmd_diffraction(args, argv, started) -> int:
    if args.method == "mc" and args.samples is None:
        raise InvalidArgumentError("--method mc requires --samples")
    medium = HTMedium.from_values(args.distances, args.probs)
    grid = np.linspace(args.q_min, args.q_max, args.q_steps)
    if args.method == "exact":
        profile = exact_profile(medium, args.n, grid)
    elif args.method == "mc":
        profile = monte_carlo_intensity(medium, args.n, grid, args.samples, args.seed)
    else:
        profile = asymptotic_profile(medium, grid, args.n)

    stderr = profile.stderr or (None,) * len(profile.q_grid)
    manifest = _manifest(argv, args, started, {"coherence_delta": COHERENCE_DELTA})
    if args.format == "csv":
        rows = [
            (
                _fmt(q),
                "" if math.isnan(i) else _fmt(i),
                "" if s is None else _fmt(s),
                "true" if flag else "false",
            )
            for q, i, s, flag in zip(profile.q_grid, profile.intensity, stderr, profile.near_coherent_mask)
        ]
        _emit_csv(("q", "intensity", "stderr", "near_coherent"), rows, args.out, manifest)
        return 0
    doc = _document(
        {"distances": args.distances, "probs": args.probs},
        {"n": args.n, "q_min": args.q_min, "q_max": args.q_max, "q_steps": args.q_steps,
         "method": profile.method.value, "samples": args.samples, "seed": args.seed},
        {
            "q": list(profile.q_grid),
            "intensity": [_json_float(i) for i in profile.intensity],
            "stderr": None if profile.stderr is None else list(profile.stderr),
            "near_coherent": list(profile.near_coherent_mask),
        },
        manifest,
    )
    _emit_json(doc, args.out)
    return 0


def cmd_commensurability(args, argv, started) -> int:
    report = classify_commensurability(PhaseVector.from_values(args.values), args.qmax, args.tol)
    doc = _document(
        {"values": args.values},
        {"qmax": args.qmax, "tol": args.tol},
        report.to_dict(),
        _manifest(argv, args, started, {"tol": args.tol}),
    )
    _emit_json(doc, args.out)
    return 0


def cmd_bragg(args, argv, started) -> int:
    medium = HTMedium.from_values(args.distances, args.probs)
    prediction = predict_bragg(medium, args.qmax, args.tol, args.harmonics)
    doc = _document(
        {"distances": args.distances, "probs": args.probs},
        {"qmax": args.qmax, "tol": args.tol, "harmonics": args.harmonics},
        prediction.to_dict(),
        _manifest(argv, args, started, {"tol": args.tol}),
    )
    _emit_json(doc, args.out)
    return 0


def cmd_duality(args, argv, started) -> int:
    src = SourceModel.from_values(args.probs, ",".join(args.probs))
    medium = conjugate_medium(src, args.qmax, args.tol)
    report = correspondence(src, args.qmax, args.tol)
    results = report.to_dict()
    results["conjugate_medium"] = {
        "distances": list(medium.distances),
        "probs": list(medium.p.probs),
        "phase_only": medium.phase_only,
    }
    doc = _document(
        {"probs": args.probs},
        {"qmax": args.qmax, "tol": args.tol},
        results,
        _manifest(argv, args, started, {"tol": args.tol, "match": MATCH_TOL}),
    )
    _emit_json(doc, args.out)
    return 0


def cmd_markov(args, argv, started) -> int:
    P, distances, d0 = load_matrix(args.matrix)
    if args.d0 is not None:
        d0 = args.d0
    mode = WeightMode(args.mode)
    report = classify_markov(P, mode, distances, d0, args.m_max, args.eps)
    doc = _document(
        {"matrix": str(args.matrix), "rows": P.entries.tolist(),
         "distances": None if distances is None else distances.tolist(), "d0": d0},
        {"mode": mode.value, "m_max": args.m_max, "eps": args.eps},
        report.to_dict(),
        _manifest(argv, args, started, {"eps": args.eps}),
    )
    _emit_json(doc, args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shannon-bragg",
        description="Shannon-code redundancy oscillations and Hendricks-Teller Bragg peaks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(p, *, fmt: bool, reconstruct: bool = True):
        p.add_argument("--out", metavar="PATH", help="output file (default: standard output)")
        if fmt:
            p.add_argument("--format", choices=("csv", "json"), default="csv")
        if reconstruct:
            p.add_argument("--qmax", type=_positive_int, default=DEFAULT_QMAX,
                           help="largest denominator tried in rational reconstruction")
            p.add_argument("--tol", type=float, default=DEFAULT_TOL,
                           help="acceptance tolerance for a rational approximation")

    p = sub.add_parser("redundancy", help="average redundancy R_n of the Shannon block code")
    p.add_argument("--probs", type=_number_list, required=True,
                   help="symbol probabilities, e.g. 1/3,2/3 (fractions are exact)")
    p.add_argument("--n-start", type=_positive_int, default=1)
    p.add_argument("--n-end", type=_positive_int, default=10)
    p.add_argument("--method", choices=[m.value for m in Method], default=Method.EXACT.value)
    p.add_argument("--m-max", type=_positive_int, default=10**4, help="series truncation")
    p.add_argument("--workers", type=_positive_int, default=1)
    common(p, fmt=True)
    p.set_defaults(handler=cmd_redundancy)

    p = sub.add_parser("diffraction", help="Hendricks-Teller scattered intensity on a q grid")
    p.add_argument("--distances", type=_number_list, required=True)
    p.add_argument("--probs", type=_number_list, required=True)
    p.add_argument("--n", type=_positive_int, default=16, help="number of layers")
    p.add_argument("--q-min", type=_wavenumber, default=0.0, help="accepts multiples of pi, e.g. 2pi")
    p.add_argument("--q-max", type=_wavenumber, default=2 * math.pi)
    p.add_argument("--q-steps", type=_positive_int, default=101)
    p.add_argument("--method", choices=("exact", "mc", "asymptotic"), default="exact")
    p.add_argument("--samples", type=_non_negative_int, help="Monte Carlo walks (>= 2)")
    p.add_argument("--seed", type=_non_negative_int, default=0)
    common(p, fmt=True, reconstruct=False)
    p.set_defaults(handler=cmd_diffraction)

    p = sub.add_parser("commensurability", help="classify phase parameters as rational or not")
    p.add_argument("--values", type=_number_list, required=True)
    common(p, fmt=False)
    p.set_defaults(handler=cmd_commensurability)

    p = sub.add_parser("bragg", help="predicted Bragg fundamental and harmonics")
    p.add_argument("--distances", type=_number_list, required=True)
    p.add_argument("--probs", type=_number_list, required=True)
    p.add_argument("--harmonics", type=_positive_int, default=5)
    common(p, fmt=False)
    p.set_defaults(handler=cmd_bragg)

    p = sub.add_parser("duality", help="compare a source with its conjugate medium")
    p.add_argument("--probs", type=_number_list, required=True)
    common(p, fmt=False)
    p.set_defaults(handler=cmd_duality)

    p = sub.add_parser("markov", help="spectral-radius scan of a weighted transition matrix")
    p.add_argument("--matrix", type=Path, required=True, metavar="FILE",
                   help='JSON {"states": S, "rows": [...], "distances": optional, "d0": optional}')
    p.add_argument("--mode", choices=[m.value for m in WeightMode], default=WeightMode.SOURCE.value)
    p.add_argument("--d0", type=float, help="reference distance for medium weights")
    p.add_argument("--m-max", type=_positive_int, default=100)
    p.add_argument("--eps", type=float, default=DEFAULT_EPS)
    common(p, fmt=False, reconstruct=False)
    p.set_defaults(handler=cmd_markov)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    started = time.perf_counter()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args, argv, started)
    except ShannonBraggError as exc:
        print(f"shannon-bragg: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"shannon-bragg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
