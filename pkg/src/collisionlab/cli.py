"""Command-line front end.

Every command reads a JSON state file, writes CSV (or JSON) to stdout and
diagnostics to stderr. Exit codes: 0 success, 1 replay mismatch, 2 input
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from . import asympt, channelcode, divergence, hyptest, sidecomp, statefile
from .config import settings
from .errors import ConvergenceError, ValidationError

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


class Table:
    def __init__(self, header: list[str]):
        self.header = header
        self.rows: list[list] = []

    def add(self, *values):
        self.rows.append([fmt(v) for v in values])

    def render(self, form: str) -> str:
        if form == "json":
            return json.dumps([dict(zip(self.header, r)) for r in self.rows], indent=2) + "\n"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        w.writerows(self.rows)
        return buf.getvalue()


# --------------------------------------------------------------------------
# commands


def cmd_divergence(args, sf) -> Table:
    rho = sf.density(args.rho)
    sigma = sf.density(args.sigma)
    table = Table(["quantity", "epsilon", "value"])
    for which in args.which:
        if which == "D":
            table.add("D", None, divergence.relative_entropy(rho, sigma))
        elif which == "D2":
            table.add("D2", None, divergence.collision_divergence(rho, sigma))
        elif which == "V":
            table.add("V", None, divergence.info_variance(rho, sigma))
        elif which == "Ds":
            profile = divergence.SpectrumProfile([(rho, sigma)])
            for est in profile.estimate_many(args.eps):
                table.add("Ds", est.epsilon, est.value)
    return table


def _probs(args, k: int) -> np.ndarray:
    if args.p is None:
        return np.full(k, 1.0 / k)
    return np.array(args.p, dtype=float)


def cmd_channel(args, sf) -> Table:
    channel = sf.channel(args.channel)
    probs = _probs(args, channel.alphabet_size)
    table = Table(["M", "bound", "exact_or_mc_mean", "stderr", "corollary1_M", "seed"])
    bounds, means, errs = [], [], []
    cor = None
    if args.eps is not None and args.delta is not None:
        cor = channelcode.corollary1_M(channel, probs, args.eps, args.delta)
    for M in args.M:
        exp = channelcode.CodingExperiment(channel, probs, M, args.mode, args.samples, args.seed)
        res = channelcode.run_experiment(exp, threads=args.threads)
        table.add(M, res.bound, res.value, res.stderr, cor, args.seed)
        bounds.append(res.bound)
        means.append(res.value)
        errs.append(res.stderr)
    if args.figure:
        from .plotting import bound_vs_measured

        bound_vs_measured(args.M, bounds, means, errs, args.figure, f"channel {args.channel}")
    return table


def cmd_hyptest(args, sf) -> Table:
    rho = sf.density(args.rho)
    sigma = sf.density(args.sigma)
    profile = divergence.SpectrumProfile([(rho, sigma)])
    table = Table(["epsilon", "Ds", "M", "typeI", "typeI_bound", "typeII", "typeII_bound"])
    for est in profile.estimate_many(args.eps):
        t = hyptest.oneshot_ht_bound(rho, sigma, est.epsilon, ds=est.value)
        table.add(t.epsilon, t.ds, t.M, t.typeI, t.typeI_bound, t.typeII, t.typeII_bound)
    return table


def cmd_sw(args, sf) -> Table:
    source = sf.cq_state(args.source)
    table = Table(
        ["M", "tight", "relaxed", "exact_or_mc_mean", "stderr", "corollary2_M", "seed"]
    )
    cor = None
    if args.eps is not None and args.delta is not None:
        cor = sidecomp.corollary2_M(source, args.eps, args.delta)
    ms = args.M if args.M else ([cor] if cor is not None else None)
    if not ms:
        raise ValidationError("sw: give --M or both --eps and --delta")
    ds = sidecomp.conditional_spectrum(source, args.eps) if args.eps is not None else None
    bounds, means, errs = [], [], []
    for M in ms:
        exp = sidecomp.SWExperiment(source, M, args.mode, args.samples, args.seed)
        res = sidecomp.run_experiment(exp, threads=args.threads)
        bound = sidecomp.theorem6_bound(source, M)
        relaxed = bound.relaxed(args.eps, ds) if args.eps is not None else None
        table.add(M, res.bound, relaxed, res.value, res.stderr, cor, args.seed)
        bounds.append(res.bound)
        means.append(res.value)
        errs.append(res.stderr)
    if args.figure:
        from .plotting import bound_vs_measured

        bound_vs_measured(ms, bounds, means, errs, args.figure, f"source {args.source}")
    return table


def cmd_second_order(args, sf) -> Table:
    table = Table(["n", "epsilon", "D", "V", "estimate", "exact_Ds", "residual"])
    curves = []
    if args.channel:
        channel = sf.channel(args.channel)
        cap = channelcode.capacity_and_dispersion(channel)
        for e in args.eps:
            if not 0.0 < e < 0.5:
                raise ValidationError("second-order on a channel needs 0 < eps < 1/2")
            curve = asympt.second_order_curve(cap.capacity, cap.dispersion, e, args.n)
            for n, est in zip(curve.ns, curve.estimates):
                table.add(n, e, cap.capacity, cap.dispersion, est, None, None)
            curves.append((curve, None))
    else:
        if not (args.rho and args.sigma):
            raise ValidationError("second-order: give --rho and --sigma, or --channel")
        rho = sf.density(args.rho)
        sigma = sf.density(args.sigma)
        D = divergence.relative_entropy(rho, sigma)
        V = divergence.info_variance(rho, sigma)
        spectra = divergence.commuting_spectra(rho, sigma)
        for e in args.eps:
            curve = asympt.second_order_curve(D, V, e, args.n)
            exact = None
            if spectra is not None:
                exact = [divergence.iid_spectrum_classical(*spectra, n, e) for n in curve.ns]
            for i, (n, est) in enumerate(zip(curve.ns, curve.estimates)):
                ex = exact[i] if exact else None
                table.add(n, e, D, V, est, ex, None if ex is None else ex - est)
            curves.append((curve, exact))
    if args.figure:
        from .plotting import second_order_curve

        curve, exact = curves[0]
        second_order_curve(curve.ns, curve.estimates, exact, args.figure, curve.epsilon)
    return table


COMMANDS = {
    "divergence": cmd_divergence,
    "channel": cmd_channel,
    "hyptest": cmd_hyptest,
    "sw": cmd_sw,
    "second-order": cmd_second_order,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol-rank", type=float, default=1e-10)
    common.add_argument("--grid-points", type=int, default=4001)
    common.add_argument("--threads", type=int, default=1, help="speed only, never results")
    common.add_argument("--eig", choices=["lapack", "jacobi"], default="lapack")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--record", metavar="PATH", help="write a replayable run record")

    p = argparse.ArgumentParser(prog="collisionlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("divergence", parents=[common], help="D, D2, V, Ds of a pair")
    d.add_argument("file")
    d.add_argument("--rho", required=True)
    d.add_argument("--sigma", required=True)
    d.add_argument("--which", type=lambda s: s.split(","), default=["D", "D2", "V", "Ds"])
    d.add_argument("--eps", type=_floats, default=[0.1])

    c = sub.add_parser("channel", parents=[common], help="random-coding experiment on a c-q channel")
    c.add_argument("file")
    c.add_argument("--channel", required=True)
    c.add_argument("--p", type=_floats, help="input distribution (default uniform)")
    c.add_argument("--M", type=_ints, required=True)
    c.add_argument("--mode", choices=["exact", "mc"], default="exact")
    c.add_argument("--samples", type=int, default=1000)
    c.add_argument("--eps", type=float)
    c.add_argument("--delta", type=float)
    c.add_argument("--figure", metavar="PNG")

    h = sub.add_parser("hyptest", parents=[common], help="one-shot hypothesis test")
    h.add_argument("file")
    h.add_argument("--rho", required=True)
    h.add_argument("--sigma", required=True)
    h.add_argument("--eps", type=_floats, default=[0.1])

    s = sub.add_parser("sw", parents=[common], help="compression with quantum side information")
    s.add_argument("file")
    s.add_argument("--source", required=True)
    s.add_argument("--M", type=_ints)
    s.add_argument("--eps", type=float)
    s.add_argument("--delta", type=float)
    s.add_argument("--mode", choices=["exact", "mc"], default="exact")
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--figure", metavar="PNG")

    o = sub.add_parser("second-order", parents=[common], help="second-order curves over n")
    o.add_argument("file")
    o.add_argument("--rho")
    o.add_argument("--sigma")
    o.add_argument("--channel")
    o.add_argument("--eps", type=_floats, default=[0.1])
    o.add_argument("--n", type=_ints, default=[16, 64, 256, 1024])
    o.add_argument("--figure", metavar="PNG")

    r = sub.add_parser("replay", help="re-run a recorded command and compare outputs")
    r.add_argument("record")
    return p


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _strip_record(argv: list[str]) -> list[str]:
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a == "--record":
            skip = True
            continue
        if a.startswith("--record="):
            continue
        out.append(a)
    return out


def execute(argv: list[str]) -> tuple[str, statefile.StateFile, argparse.Namespace]:
    args = build_parser().parse_args(argv)
    sf = statefile.load(args.file)
    with settings(tol_rank=args.tol_rank, grid_points=args.grid_points, eig_method=args.eig):
        table = COMMANDS[args.command](args, sf)
    return table.render(args.format), sf, args


def replay(path: str, out, err) -> int:
    try:
        record = json.loads(Path(path).read_text())
        argv = record["argv"]
    except (OSError, ValueError, KeyError) as exc:
        err.write(f"error: cannot read run record {path}: {exc}\n")
        return EXIT_INPUT
    output, sf, _ = execute(argv)
    if sf.sha256 != record.get("inputs_sha256"):
        err.write("error: input file changed since the record was written\n")
        return EXIT_INPUT
    out.write(output)
    if output != record.get("output"):
        err.write("replay: output differs from the record\n")
        return EXIT_MISMATCH
    err.write("replay: output identical\n")
    return EXIT_OK


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        if argv and argv[0] == "replay":
            args = build_parser().parse_args(argv)
            return replay(args.record, out, err)
        t0 = time.perf_counter()
        output, sf, args = execute(argv)
        wall = time.perf_counter() - t0
        out.write(output)
        if args.record:
            record = {
                "command": args.command,
                "argv": _strip_record(argv),
                "inputs_sha256": sf.sha256,
                "seed": args.seed,
                "tolerances": {
                    "tol_rank": args.tol_rank,
                    "grid_points": args.grid_points,
                    "eig": args.eig,
                },
                "version": _version(),
                "output": output,
                "output_sha256": hashlib.sha256(output.encode()).hexdigest(),
                "wall_time_s": wall,
            }
            Path(args.record).write_text(json.dumps(record, indent=2) + "\n")
        return EXIT_OK
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code) if isinstance(exc.code, int) else EXIT_INPUT
    except (ValidationError, ValueError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT
    except (ConvergenceError, np.linalg.LinAlgError, ArithmeticError) as exc:
        err.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
