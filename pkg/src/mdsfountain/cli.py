"""``mdsfountain`` command line: bounds, simulations and code checks as CSV.

Every CSV run also writes a JSON manifest (``<out>.manifest.json``, or a
single line on stderr when the CSV goes to stdout).
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import datetime as _dt
import json
import os
import re
import sys

from . import __version__
from ._backend import NAME as BACKEND
from .analysis import (
    ConcatBounds,
    ExactRank,
    Idealized,
    LrfcBounds,
    SystemParams,
    concat_bounds,
    concat_exact,
    format_prob,
    lrfc_bounds,
    rank_deficiency,
    smallest_overhead,
    system_failure,
)
from .codes import build_lrfc_only, build_rs, build_spc, mds_check, write_generator_csv
from .gf import field_of_order
from .sim import SimConfig, estimate_multiuser, estimate_pf

SEED_ENV = "MDSFOUNTAIN_SEED"


class CliError(Exception):
    pass


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw, 0)
    except ValueError:
        raise CliError(f"{SEED_ENV}={raw!r} is not an integer") from None


def parse_range(text):
    """``"0..6"`` (inclusive) or ``"0,2,5"`` into a list of ints."""
    out = []
    for part in text.split(","):
        part = part.strip()
        m = re.fullmatch(r"(-?\d+)\.\.(-?\d+)", part)
        if m:
            a, b = int(m.group(1)), int(m.group(2))
            out.extend(range(a, b + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return out


def _code_from_args(args):
    chosen = [x for x in ("rs", "spc", "lrfc") if getattr(args, x, None) is not None]
    if len(chosen) != 1:
        raise CliError("choose exactly one of --rs N K, --spc K, --lrfc K")
    if args.spc is not None:
        if args.q not in (None, 2):
            raise CliError("SPC codes are binary; drop --q or use --q 2")
        return build_spc(args.spc)
    if args.q is None:
        raise CliError("--q is required for --rs and --lrfc")
    field = field_of_order(args.q)
    if args.rs is not None:
        n, k = args.rs
        return build_rs(n, k, field)
    return build_lrfc_only(args.lrfc, field)


def _add_code_args(p):
    p.add_argument("--q", type=int, help="field order 2^m")
    p.add_argument("--rs", type=int, nargs=2, metavar=("N", "K"), help="shortened Reed-Solomon outer code")
    p.add_argument("--spc", type=int, metavar="K", help="binary (K+1, K) single parity check outer code")
    p.add_argument("--lrfc", type=int, metavar="K", help="no outer code, fountain symbols only")


def _add_output_args(p):
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--manifest", help="manifest path (default: <out>.manifest.json)")


@contextlib.contextmanager
def _output(args, argv):
    manifest = {
        "subcommand": args.command,
        "argv": list(argv),
        "params": {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "manifest", "func")},
        "seed": getattr(args, "seed", None),
        "tool_version": __version__,
        "backend": BACKEND,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    if args.out:
        with open(args.out, "w", newline="") as fh:
            yield fh
    else:
        yield sys.stdout
    text = json.dumps(manifest, sort_keys=True)
    path = args.manifest or (args.out + ".manifest.json" if args.out else None)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text, file=sys.stderr)


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def cmd_bounds(args, argv):
    if args.delta_max < 0:
        raise CliError("--delta-max must be non-negative")
    if not 1 <= args.k <= args.n:
        raise CliError("need 1 <= k <= n")
    field_of_order(args.q)
    with _output(args, argv) as fh:
        w = _writer(fh)
        w.writerow(["delta", "lrfc_low", "lrfc_up", "concat_low", "concat_up"])
        for d in range(args.delta_max + 1):
            lb = lrfc_bounds(d, args.q)
            cb = concat_bounds(d, args.q, args.n, args.k, args.eps)
            w.writerow([d] + [format_prob(x) for x in (lb.lower, lb.upper, cb.lower, cb.upper)])
    return 0


def _bound_for(code, delta, eps):
    if code.n == 0:
        b = lrfc_bounds(delta, code.q)
        return b, rank_deficiency(code.k + delta, code.k, code.q)
    return (
        concat_bounds(delta, code.q, code.n, code.k, eps),
        concat_exact(delta, code.q, code.n, code.k, eps),
    )


def cmd_simulate(args, argv):
    code = _code_from_args(args)
    target = args.target_failures if args.target_failures > 0 else None
    cfg = SimConfig(
        code=code, epsilon=args.eps, deltas=args.deltas, trials=args.trials, seed=args.seed,
        payload_len=args.payload_len, max_failures_target=target, block_size=args.block_size,
        workers=args.workers,
    )
    points = estimate_pf(cfg)
    with _output(args, argv) as fh:
        w = _writer(fh)
        w.writerow(["delta", "failures", "trials", "p_hat", "ci_low", "ci_high",
                    "bound_low", "bound_high", "exact"])
        for p in points:
            b, exact = _bound_for(code, p.delta, args.eps)
            w.writerow([p.delta, p.failures, p.trials] + [
                format_prob(x) for x in (p.p_hat, p.ci_low, p.ci_high, b.lower, b.upper, exact)
            ])
    return 0


_MODEL_RE = re.compile(r"(exact-)?(lrfc|concat)(\d+)|ideal")


def _parse_model(name, k, n_rs):
    m = _MODEL_RE.fullmatch(name)
    if not m:
        raise CliError(f"unknown model {name!r}; use lrfcQ, concatQ, exact-lrfcQ, exact-concatQ or ideal")
    if name == "ideal":
        return Idealized(), None, 2
    exact, kind, q = m.group(1), m.group(2), int(m.group(3))
    field = field_of_order(q)
    if kind == "lrfc":
        code, model = build_lrfc_only(k, field), LrfcBounds()
    else:
        code = build_spc(k) if q == 2 else build_rs(n_rs, k, field)
        model = ConcatBounds()
    return (ExactRank() if exact else model), code, q


def cmd_multiuser(args, argv):
    models = []
    for name in (s.strip() for s in args.models.split(",")):
        model, code, q = _parse_model(name, args.k, args.n_rs)
        n = code.n if code is not None else args.k
        models.append((name, model, code, SystemParams(n, args.k, q, args.eps, args.users)))
    sims = {}
    if args.simulate_trials > 0:
        sim_users = args.sim_users or args.users
        for name, _, code, _ in models:
            if code is not None:
                sims[name] = estimate_multiuser(
                    code, args.eps, sim_users, args.simulate_trials, seed=args.seed, workers=args.workers
                )
    header = ["Delta"]
    for name, *_ in models:
        header += [f"{name}_lower", f"{name}_upper"]
        if name in sims:
            header += [f"{name}_sim", f"{name}_sim_ci_low", f"{name}_sim_ci_high"]
    with _output(args, argv) as fh:
        w = _writer(fh)
        w.writerow(header)
        for d in range(args.delta_max + 1):
            row = [d]
            for name, model, _, params in models:
                b = system_failure(params.with_delta(d), model)
                row += [format_prob(b.lower), format_prob(b.upper)]
                if name in sims:
                    e = sims[name].pe(d)
                    row += [format_prob(e.p_hat), format_prob(e.ci_low), format_prob(e.ci_high)]
            w.writerow(row)
    if args.target is not None:
        for name, model, _, params in models:
            lo = smallest_overhead(params, model, args.target, side="lower")
            hi = smallest_overhead(params, model, args.target, side="upper")
            print(f"{name}: P_E <= {args.target:g} at Delta = {lo} (lower) / {hi} (upper)", file=sys.stderr)
    return 0


def cmd_mds_check(args, argv):
    code = _code_from_args(args)
    res = mds_check(code, exhaustive_limit=args.limit)
    how = "exhaustive" if res.exhaustive else "sampled"
    if res.verified:
        print(f"Verified: {code.label()}, {res.checked} submatrices ({how})")
        return 0
    cols = " ".join(str(c + 1) for c in res.counterexample)
    print(f"Counterexample columns (1-based ESIs): {cols}")
    return 1


def cmd_generator(args, argv):
    code = _code_from_args(args)
    with _output(args, argv) as fh:
        write_generator_csv(code, fh)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="mdsfountain", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="analytic failure bounds vs receiver overhead")
    p.add_argument("--q", type=int, default=16)
    p.add_argument("--n", type=int, default=15)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--delta-max", type=int, default=10)
    _add_output_args(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("simulate", help="Monte Carlo decoding failure vs receiver overhead")
    _add_code_args(p)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--deltas", type=parse_range, default=parse_range("0..4"))
    p.add_argument("--trials", type=int, default=10**7, help="trial cap per overhead")
    p.add_argument("--target-failures", type=int, default=100, help="stop a point after this many failures (0: never)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--block-size", type=int, default=1 << 16)
    p.add_argument("--payload-len", type=int, default=0, help="run real encode/decode with T-symbol payloads")
    _add_output_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("multiuser", help="probability some of N users fail vs transmitter overhead")
    p.add_argument("--users", type=int, default=10000)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--n-rs", type=int, default=15, help="length of the RS outer code for concatQ, Q > 2")
    p.add_argument("--models", default="lrfc2,concat2,lrfc16,concat16,ideal")
    p.add_argument("--delta-max", type=int, default=40)
    p.add_argument("--target", type=float, default=None, help="report the smallest Delta reaching this P_E")
    p.add_argument("--simulate-trials", type=int, default=0)
    p.add_argument("--sim-users", type=int, default=None, help="users in the simulation (default --users)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    _add_output_args(p)
    p.set_defaults(func=cmd_multiuser)

    p = sub.add_parser("mds-check", help="verify every k-column submatrix of the generator is invertible")
    _add_code_args(p)
    p.add_argument("--limit", type=int, default=10**6)
    p.set_defaults(func=cmd_mds_check)

    p = sub.add_parser("generator", help="export the outer-code generator matrix as CSV")
    _add_code_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_generator)
    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if hasattr(args, "seed") and args.seed is None:
            args.seed = _default_seed()
        return args.func(args, argv)
    except (CliError, ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
