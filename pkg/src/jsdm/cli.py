"""Command line entry point: ``jsdm <subcommand> ...``.

Exit status is 0 on success, 1 on domain errors (one ``error: Kind: message``
line on stderr) and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import contextlib
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import io
from .errors import JSDMError
from .metric import (
    ScanGrid,
    classify_alpha,
    delta_u,
    dh_alpha_du,
    figure_data,
    monotonicity_scan,
    triangle_search,
)
from .probability import (
    F_JS,
    F_KL,
    d_alpha,
    f_divergence,
    jsd,
    jsd_weighted,
    kl_divergence,
    shannon_entropy,
)
from .quantum import DensityMatrix, QJSDConfig, qjsd_max
from .segmentation import (
    DEFAULT_MARGIN,
    DEFAULT_MIN_SEG_LEN,
    DEFAULT_THRESHOLD,
    EnsembleSpec,
    average_profile,
    generate_ensemble,
    mean_max_dprime,
    segment_many,
)

DEFAULT_BLOCKS = "0.8,0.2@0;0.2,0.8@500"
DEFAULT_ALPHAS = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0"


def _resolve_seed(seed: Optional[int]) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("JSDM_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise JSDMError(f"JSDM_SEED={env!r} is not an integer") from None


@contextlib.contextmanager
def _output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _read_input(path: Optional[str]) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _pair_value(args, p, q) -> float:
    if args.kl:
        return kl_divergence(p, q)
    if args.fdiv:
        return f_divergence(p, q, F_KL if args.fdiv == "kl" else F_JS)
    if args.weighted is not None:
        return jsd_weighted(p, q, (args.weighted, 1.0 - args.weighted))
    if args.alpha is not None:
        return d_alpha(p, q, args.alpha)
    return jsd(p, q)


def cmd_divergence(args) -> int:
    if args.infile is not None:
        dists, fmt = io.parse_distributions(_read_input(args.infile))
        if args.entropy:
            rows = [[shannon_entropy(p)] for p in dists]
        else:
            rows = [[_pair_value(args, p, q) for q in dists] for p in dists]
        with _output(args.out) as out:
            out.write(io.format_rows(rows, fmt))
        return 0
    if args.p is None:
        raise JSDMError("give --p (and --q) or --in")
    p = io.parse_distribution(args.p)
    if args.entropy:
        value = shannon_entropy(p)
    else:
        if args.q is None:
            raise JSDMError("--q is required for a divergence")
        value = _pair_value(args, p, io.parse_distribution(args.q))
    with _output(args.out) as out:
        out.write(io.format_number(value) + "\n")
    return 0


def cmd_metric_scan(args) -> int:
    seed = _resolve_seed(args.seed)
    exponent = classify_alpha(args.alpha)
    grid = ScanGrid.uniform(args.grid_points)
    report = monotonicity_scan(args.alpha, grid)
    deltas = np.asarray(delta_u(np.arange(args.grid_points) / args.grid_points, args.alpha))
    found = triangle_search(args.alpha, args.dim, args.samples, seed)

    if args.out is not None:
        if args.fig is not None:
            rows = figure_data(f"fig{args.fig}", u_points=args.grid_points, alpha_points=args.alpha_points)
        else:
            rows = np.column_stack(
                [grid.points, np.full(len(grid), args.alpha), dh_alpha_du(grid.points, args.alpha)]
            )
        with _output(args.out) as out:
            io.write_csv(out, ["u", "alpha", "value"], rows)

    summary = {
        "alpha": args.alpha,
        "classification": exponent.classification.value,
        "nonincreasing": report.nonincreasing,
        "worst_point": report.worst_point,
        "worst_derivative": report.worst_derivative,
        "delta_negative_fraction": float(np.mean(deltas < 0)),
        "triangle_samples": args.samples,
        "triangle_dim": args.dim,
        "seed": seed,
        "counterexample": found.as_dict() if found is not None else None,
    }
    sys.stdout.write(io.dumps(summary))
    return 0


def cmd_segment(args) -> int:
    seqs = io.read_sequences(_read_input(args.infile), args.alphabet)
    if not seqs:
        raise JSDMError("no sequences in input")
    results = segment_many(
        seqs, args.alpha, args.threshold, args.min_seg_len, args.margin, workers=args.threads
    )
    payload = results[0].as_dict() if len(results) == 1 else [r.as_dict() for r in results]
    with _output(args.out) as out:
        out.write(io.dumps(payload))
    return 0


def cmd_simulate(args) -> int:
    seed = _resolve_seed(args.seed)
    alphas = io.parse_vector(args.alpha_list)
    spec = EnsembleSpec(args.count, args.length, io.parse_blocks(args.blocks))
    ensemble = generate_ensemble(spec, seed)

    argmax = {}
    for a in alphas:
        profile = average_profile(ensemble, a)
        argmax[io.format_number(a)] = int(profile[np.argmax(profile[:, 1]), 0])
        if args.out_prefix is not None:
            with _output(f"{args.out_prefix}profile_alpha{io.format_number(a)}.csv") as out:
                io.write_csv(out, ["ell", "mean_dprime"], ([int(e), v] for e, v in profile))

    maxima = mean_max_dprime(ensemble, alphas, args.margin)
    with _output(None if args.out_prefix is None else f"{args.out_prefix}max_dprime.csv") as out:
        io.write_csv(out, ["alpha", "mean_max_dprime"], maxima)

    if args.out_prefix is not None:
        results = segment_many(
            ensemble, args.seg_alpha, args.threshold, args.min_seg_len, args.margin, workers=args.threads
        )
        top = [min(r.cuts, key=lambda c: (c.depth, c.pos)).pos for r in results if r.cuts]
        summary = {
            "count": args.count,
            "length": args.length,
            "seed": seed,
            "profile_argmax": argmax,
            "sequences_with_cut": len(top),
            "mean_top_cut": float(np.mean(top)) if top else None,
        }
        sys.stdout.write(io.dumps(summary))
    return 0


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 64x128, got {text!r}") from None


def cmd_quantum(args) -> int:
    states = [io.parse_state(s) for s in args.state or []]
    states += [DensityMatrix.from_bloch(io.parse_vector(b)) for b in args.bloch or []]
    if len(states) != 2:
        raise JSDMError(f"need exactly two states (--state/--bloch), got {len(states)}")
    theta_points, phi_points = args.grid
    config = QJSDConfig(theta_points, phi_points, args.refine_iters)
    result = qjsd_max(states[0], states[1], config)
    payload = {
        "value": result.value,
        "alpha": args.alpha,
        "alpha_value": result.value**args.alpha,
        "best_povm_bloch_direction": list(result.direction),
        "converged": result.converged,
        "iterations": result.iterations,
        "lower_bound": result.lower_bound,
    }
    with _output(args.out) as out:
        out.write(io.dumps(payload))
    return 0


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jsdm", description="Jensen-Shannon divergence metrics and segmentation tools."
    )
    parser.add_argument(
        "--threads", type=int, default=os.cpu_count() or 1,
        help="worker threads for per-sequence work (output does not depend on it)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("divergence", help="entropy and divergences between distributions")
    which = p.add_mutually_exclusive_group()
    which.add_argument("--jsd", action="store_true", help="Jensen-Shannon divergence (default)")
    which.add_argument("--kl", action="store_true", help="Kullback-Leibler divergence")
    which.add_argument("--entropy", action="store_true", help="Shannon entropy of --p")
    which.add_argument("--weighted", type=float, metavar="PI1", help="weighted JSD with weights (PI1, 1-PI1)")
    which.add_argument("--alpha", type=_positive_float, help="JSD ** alpha")
    which.add_argument("--fdiv", choices=["kl", "js"], help="generic f-divergence with a built-in generator")
    p.add_argument("--p", help="comma-separated probabilities")
    p.add_argument("--q", help="comma-separated probabilities")
    p.add_argument("--in", dest="infile", help="file of distributions; prints the pairwise matrix")
    p.add_argument("--out")
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("metric-scan", help="metric checks for JSD ** alpha")
    p.add_argument("--alpha", type=_positive_float, default=0.5)
    p.add_argument("--grid-points", type=int, default=10_000)
    p.add_argument("--alpha-points", type=int, default=50, help="alpha resolution of --fig 1")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--seed", type=int)
    p.add_argument(
        "--fig", type=int, choices=[1, 2],
        help="CSV content: 1 = -dh/du over u and alpha <= 1/2, 2 = delta(u) curves above 1/2",
    )
    p.add_argument("--out", help="CSV of (u, alpha, value)")
    p.set_defaults(func=cmd_metric_scan)

    p = sub.add_parser("segment", help="recursive segmentation of symbol sequences")
    p.add_argument("--in", dest="infile", help="one sequence per line (default stdin)")
    p.add_argument("--alphabet")
    p.add_argument("--alpha", type=_positive_float, default=0.5)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--min-seg-len", type=int, default=DEFAULT_MIN_SEG_LEN)
    p.add_argument("--margin", type=int, default=DEFAULT_MARGIN)
    p.add_argument("--out")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("simulate", help="Monte Carlo segmentation experiment")
    p.add_argument("--count", type=int, default=500)
    p.add_argument("--length", type=int, default=1000)
    p.add_argument("--blocks", default=DEFAULT_BLOCKS, help='e.g. "0.8,0.2@0;0.2,0.8@500"')
    p.add_argument("--seed", type=int)
    p.add_argument("--alpha-list", default=DEFAULT_ALPHAS)
    p.add_argument("--margin", type=int, default=DEFAULT_MARGIN)
    p.add_argument("--seg-alpha", type=_positive_float, default=0.5)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--min-seg-len", type=int, default=DEFAULT_MIN_SEG_LEN)
    p.add_argument("--out-prefix")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("quantum-jsd", help="measured JSD between two qubit states")
    p.add_argument("--state", action="append", help='{"d": 2, "entries": [[re, im], ...]}; give twice')
    p.add_argument("--bloch", action="append", help='"x,y,z"; give twice')
    p.add_argument("--alpha", type=_positive_float, default=0.5)
    p.add_argument("--grid", type=_parse_grid, default=(64, 128))
    p.add_argument("--refine-iters", type=int, default=500)
    p.add_argument("--out")
    p.set_defaults(func=cmd_quantum)
    return parser


# flags whose comma-separated values may start with "-", which argparse
# would otherwise read as an option
_VECTOR_FLAGS = frozenset({"--bloch", "--p", "--q", "--alpha-list"})


def _attach_vector_values(argv: Sequence[str]) -> list[str]:
    out: list[str] = []
    items = list(argv)
    i = 0
    while i < len(items):
        if items[i] in _VECTOR_FLAGS and i + 1 < len(items) and items[i + 1].startswith("-"):
            out.append(f"{items[i]}={items[i + 1]}")
            i += 2
        else:
            out.append(items[i])
            i += 1
    return out


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = _attach_vector_values(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (JSDMError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
