"""
Command-line entry point: ``xxchain <group> <command> [options]``.

Groups are ``pst``, ``transport``, ``ent`` and ``neg``. Scans print CSV,
single evaluations print JSON. Exit status is 0 on success, 1 when the
computation itself fails (e.g. a non-positive spectrum) and 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import List, Mapping, Optional, Sequence

import numpy as np

from . import entanglement as ent
from . import negativity as neg
from . import pst
from . import transport as tr
from .chain import Chain, build_chain, chain_to_spec, diagonalize, homogeneous_chain, krawtchouk_chain
from .errors import XXChainError

FAMILIES = ("krawtchouk", "homogeneous")


class UsageError(Exception):
    """Bad command-line input; exits with status 2."""


# --------------------------------------------------------------------------
# parsing helpers
# --------------------------------------------------------------------------

def parse_range(text: str) -> List[int]:
    """``start:stop:step`` with inclusive stop, or a single integer.

    >>> parse_range("16:64:16")
    [16, 32, 48, 64]
    """
    parts = text.split(":")
    try:
        nums = [int(x) for x in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; expected start:stop:step")
    if len(nums) == 1:
        return nums
    if len(nums) == 2:
        nums.append(1)
    if len(nums) != 3:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; expected start:stop:step")
    start, stop, step = nums
    if step <= 0 or start > stop:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; need start <= stop and step > 0")
    return list(range(start, stop + 1, step))


def _k_arg(text: str):
    if text == "auto":
        return "auto"
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"K must be 'auto' or an integer, got {text!r}")


def _shift_arg(text: str):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"shift must be 'auto' or a number, got {text!r}")


def _leftmost_arg(text: str):
    if text in ("0", "1"):
        return int(text)
    if text == "bulk":
        return "bulk"
    raise argparse.ArgumentTypeError("leftmost must be 0, 1 or bulk")


def _load_chain_source(source: str) -> Chain:
    """JSON file path, or an inline JSON object."""
    text = source.strip()
    if not text.startswith("{"):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read chain file {source!r}: {exc.strerror}")
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"chain JSON is malformed: {exc}")
    if not isinstance(spec, Mapping):
        raise UsageError("chain JSON must be an object")
    try:
        return build_chain(spec)
    except KeyError as exc:
        raise UsageError(f"chain JSON misses field {exc}")


def _family_chain(family: str, N: int, args) -> Chain:
    if family == "krawtchouk":
        return krawtchouk_chain(N, args.p)
    return homogeneous_chain(N, args.J, args.B)


def _chain_from_args(args) -> Chain:
    if args.chain is not None:
        return _load_chain_source(args.chain)
    if args.family is not None:
        if args.N is None:
            raise UsageError("--family needs --N")
        return _family_chain(args.family, args.N, args)
    raise UsageError("no chain given; use --chain FILE|JSON or --family with --N")


def _resolve_K(K, sd) -> int:
    """``auto`` fills every negative-energy mode, or half the modes if none is negative."""
    if K != "auto":
        return K
    tol = 1e-12 * np.max(np.abs(sd.omegas))
    if np.any(sd.omegas < -tol) and np.any(sd.omegas >= -tol):
        return ent.fermi_level(sd)
    return neg.half_filling(sd.N)


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _jsonable(x):
    if isinstance(x, Mapping):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def emit(records: Sequence[Mapping], fmt: str, target=None, columns: Optional[Sequence[str]] = None):
    """Write records as CSV (one header row, 17 significant digits) or a JSON array.

    ``columns`` fixes the header when ``records`` may be empty.
    """
    if fmt == "csv":
        cols = list(columns) if columns is not None else (list(records[0]) if records else [])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in records:
            w.writerow([_fmt(r[c]) for c in cols])
        text = buf.getvalue()
    elif fmt == "json":
        text = json.dumps(_jsonable(list(records)), indent=2) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    _write(text, target)


def _emit_object(obj: Mapping, target=None):
    _write(json.dumps(_jsonable(obj), indent=2) + "\n", target)


def _write(text: str, target):
    if target is None or target == "-":
        sys.stdout.write(text)
    else:
        Path(target).write_text(text)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_pst_check(args):
    chain = _chain_from_args(args)
    sd = diagonalize(chain)
    v = pst.pst_verdict(chain, args.tau, sd=sd)
    out = {
        "N": chain.N,
        "tau": v.tau,
        "mirror_residual": v.mirror_residual,
        "gap_ok": v.gap_ok,
        "M": v.M.tolist(),
        "fidelity": v.fidelity,
        "phase": v.phase,
        "verdict": v.verdict,
    }
    _emit_object(out, args.output)


def cmd_pst_synthesize(args):
    try:
        omegas = json.loads(Path(args.spectrum).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read spectrum file {args.spectrum!r}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"spectrum JSON is malformed: {exc}")
    if not isinstance(omegas, list) or not all(isinstance(x, (int, float)) for x in omegas):
        raise UsageError("spectrum file must hold a JSON array of numbers")
    chain = pst.synthesize_from_spectrum(omegas, method=args.method)
    _emit_object(chain_to_spec(chain), args.output)


def _apply_shift(chain: Chain, shift):
    if shift is None:
        return chain
    if shift == "auto":
        return tr.shift_to_positive(chain, tr.AUTO_SHIFT_GAP)
    return chain.shifted(shift)


def cmd_transport_current(args):
    chain = _apply_shift(_chain_from_args(args), args.shift)
    sd = diagonalize(chain)
    bath = tr.BathConfig(args.T0, args.TN, args.lam, args.h)
    out = {
        "N": chain.N,
        "T0": args.T0,
        "TN": args.TN,
        "lambda": args.lam,
        "h": args.h,
        "omega_min": float(sd.omegas[0]),
        "current": tr.heat_current_general(sd, bath),
    }
    try:
        out["current_mirror"] = tr.heat_current_mirror(sd, bath)
    except XXChainError:
        out["current_mirror"] = None
    _emit_object(out, args.output)


def cmd_transport_scan(args):
    records = []
    for N in args.N:
        chain = _apply_shift(_family_chain(args.family, N, args), args.shift)
        sd = diagonalize(chain)
        kappa = tr.conductivity(chain, args.T, args.dT, lam=args.lam, h=args.h, sd=sd)
        records.append({"N": N, "kappa": kappa, "hL": kappa * args.dT / N})
    emit(records, args.format, args.output, columns=["N", "kappa", "hL"])


def _entropy_record(chain, sd, K, ell, route):
    C = ent.correlation_matrix(sd, K, ent.interval(ell))
    residual = float("nan")
    T = None
    if chain.dual is not None and ell <= chain.N - 1 and K <= chain.N - 1:
        T = ent.heun_operator(chain, sd, K, ell)
        residual = ent.commutator_residual(T, C)
    if route == "heun":
        if T is None:
            raise UsageError("--route heun needs a dual grid and K, ell below N")
        gamma, _, _ = ent.stable_correlation_spectrum(C, T)
        S = ent.entropy_from_spectrum(gamma)
    else:
        S = ent.entanglement_entropy(C)
    return S, residual


def cmd_ent_entropy(args):
    chain = _chain_from_args(args)
    sd = diagonalize(chain)
    K = _resolve_K(args.K, sd)
    S, residual = _entropy_record(chain, sd, K, args.ell, args.route)
    _emit_object({"N": chain.N, "K": K, "ell": args.ell, "S": S, "route": args.route,
                  "commutator_residual": residual}, args.output)


def _fraction_index(ratio: float, N: int) -> int:
    """Index whose count ``index + 1`` is ``ratio`` of the N+1 sites or modes."""
    return max(0, min(N - 1, int(ratio * (N + 1)) - 1))


def cmd_ent_scan(args):
    records = []
    for N in args.N:
        chain = _family_chain(args.family, N, args)
        sd = diagonalize(chain)
        ell = _fraction_index(args.ratio_l, N)
        K = _fraction_index(args.ratio_k, N)
        S, residual = _entropy_record(chain, sd, K, ell, args.route)
        records.append({"N": N, "ell": ell, "S": S, "route": args.route,
                        "commutator_residual": residual})
    emit(records, args.format, args.output,
         columns=["N", "ell", "S", "route", "commutator_residual"])


def cmd_ent_fit_affine(args):
    chain = _chain_from_args(args)
    sd = diagonalize(chain)
    K = _resolve_K(args.K, sd)
    C = ent.correlation_matrix(sd, K, ent.interval(args.ell))
    T = ent.heun_operator(chain, sd, K, args.ell)
    fit = ent.fit_affine_approximation(C, T)
    out = {"N": chain.N, "K": K, "ell": args.ell}
    out.update(fit.as_dict())
    _emit_object(out, args.output)


def _pair_record(source, K, rho, m, n, kind=None, p=0.5):
    sub = source.phi[[m, n], : K + 1]
    setup = neg.setup_from_matrix([m], [n], sub @ sub.T, K)
    c_mn = float(setup.C.C[0, 1])
    rec = {
        "m": m,
        "n": n,
        "d": n - m,
        "Ef": neg.logarithmic_negativity(setup),
        "Ef_skeletal": float(neg.skeletal_negativity(c_mn, rho)),
        "C_mn": c_mn,
        "C_asymptotic": float("nan"),
    }
    if kind == "bulk":
        rec["C_asymptotic"] = float(neg.correlation_asymptotic(kind, n - m, p, rho))
    elif kind is not None and abs(rho - p) <= 1.0 / (source.N + 1):
        # boundary forms are stated for rho = p; a filling within one mode of p
        # is the finite-N version of that
        rec["C_asymptotic"] = float(neg.correlation_asymptotic(kind, n - m, p))
    return rec


def cmd_neg_pair(args):
    chain = _chain_from_args(args)
    sd = diagonalize(chain)
    K = _resolve_K(args.K, sd)
    if not (0 <= args.m <= chain.N and 0 <= args.n <= chain.N) or args.m == args.n:
        raise UsageError(f"--m and --n must be distinct sites in 0..{chain.N}")
    rho = neg.filling_fraction(chain.N, K)
    rec = _pair_record(sd, K, rho, min(args.m, args.n), max(args.m, args.n))
    out = {"N": chain.N, "K": K, "rho": rho}
    out.update(rec)
    _emit_object(out, args.output)


def cmd_neg_adjacent(args):
    chain = _chain_from_args(args)
    sd = diagonalize(chain)
    K = _resolve_K(args.K, sd)
    A1, A2 = neg.adjacent_intervals(chain.N, args.ell1, args.ell2, args.center)
    Ef = neg.logarithmic_negativity(neg.negativity_setup(sd, K, A1, A2))
    x = math.log(args.ell1 * args.ell2 / (args.ell1 + args.ell2))
    _emit_object({"N": chain.N, "K": K, "ell1": args.ell1, "ell2": args.ell2,
                  "A1_start": int(A1[0]), "A2_end": int(A2[-1]), "Ef": Ef,
                  "log_ratio": x}, args.output)


def cmd_neg_sweep(args):
    if args.mode != "skeletal":
        raise UsageError(f"unknown sweep mode {args.mode!r}")
    kind = {0: "boundary0", 1: "boundary1", "bulk": "bulk"}[args.leftmost]
    if args.chain is not None:
        chain = _load_chain_source(args.chain)
        source = diagonalize(chain)
        N, p = chain.N, None
    else:
        if args.family != "krawtchouk":
            raise UsageError("sweeps without --chain use the krawtchouk family")
        N, p = args.N, args.p
        pairs = [neg.skeletal_pair(N, d, args.leftmost, p) for d in args.d]
        top = max((n for _, n in pairs), default=0)
        source = neg.KrawtchoukRows.build(N, p, top)
    K = neg.half_filling(N) if args.K == "auto" else args.K
    rho = neg.filling_fraction(N, K)
    records = []
    for d in args.d:
        m, n = neg.skeletal_pair(N, d, args.leftmost, 0.5 if p is None else p)
        rec = _pair_record(source, K, rho, m, n, kind if p is not None else None,
                           p if p is not None else 0.5)
        records.append({k: rec[k] for k in ("d", "Ef", "Ef_skeletal", "C_mn", "C_asymptotic")})
    emit(records, args.format, args.output,
         columns=["d", "Ef", "Ef_skeletal", "C_mn", "C_asymptotic"])


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _chain_options(p):
    src = p.add_argument_group("chain source (exactly one)")
    src.add_argument("--chain", metavar="FILE|JSON",
                     help="chain JSON file, or an inline JSON object")
    src.add_argument("--family", choices=FAMILIES, help="built-in chain family")
    p.add_argument("--N", type=int, help="chain length (N+1 sites) for --family")
    _family_params(p)


def _family_params(p):
    p.add_argument("--p", type=float, default=0.5, help="Krawtchouk parameter (default 0.5)")
    p.add_argument("--J", type=float, default=1.0, help="homogeneous coupling (default 1)")
    p.add_argument("--B", type=float, default=0.0, help="homogeneous field (default 0)")


def _output_options(p, default_format="json"):
    p.add_argument("--output", "-o", metavar="FILE", help="write here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default=default_format,
                   help=f"output format (default {default_format})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xxchain",
        description="Inhomogeneous XX chains: state transfer, heat transport, entanglement.",
        epilog="Chain JSON: {\"kind\": \"krawtchouk\", \"N\": 32, \"p\": 0.5} | "
               "{\"kind\": \"homogeneous\", \"N\": 32, \"J\": 1.0, \"B\": 0.0} | "
               "{\"kind\": \"custom\", \"J\": [...], \"B\": [...], \"dual\": [...]}",
    )
    groups = parser.add_subparsers(dest="group", metavar="GROUP", required=True)

    # pst
    g = groups.add_parser("pst", help="perfect state transfer").add_subparsers(
        dest="cmd", metavar="COMMAND", required=True)
    p = g.add_parser("check", help="mirror symmetry, gap condition and fidelity at tau")
    _chain_options(p)
    p.add_argument("--tau", type=float, default=math.pi, help="transfer time (default pi)")
    _output_options(p)
    p.set_defaults(func=cmd_pst_check)

    p = g.add_parser("synthesize", help="mirror-symmetric chain with a given spectrum")
    p.add_argument("--spectrum", required=True, metavar="FILE",
                   help="JSON array of N+1 distinct eigenvalues")
    p.add_argument("--method", choices=("lanczos", "euclid"), default="lanczos",
                   help="synthesis route (default lanczos; euclid is unstable past N ~ 15)")
    _output_options(p)
    p.set_defaults(func=cmd_pst_synthesize)

    # transport
    g = groups.add_parser("transport", help="boundary-driven heat transport").add_subparsers(
        dest="cmd", metavar="COMMAND", required=True)
    p = g.add_parser("current", help="steady-state heat current out of the left bath")
    _chain_options(p)
    p.add_argument("--T0", type=float, required=True, help="left bath temperature")
    p.add_argument("--TN", type=float, required=True, help="right bath temperature")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="bath coupling")
    p.add_argument("--h", type=float, default=1.0, help="smearing amplitude")
    p.add_argument("--shift", type=_shift_arg, default=None,
                   help="'auto' moves the lowest mode to +0.5; a number shifts every field")
    _output_options(p)
    p.set_defaults(func=cmd_transport_current)

    p = g.add_parser("scan", help="conductivity against chain length (CSV: N, kappa, hL)")
    p.add_argument("--family", choices=FAMILIES, default="krawtchouk")
    _family_params(p)
    p.add_argument("--T", type=float, required=True, help="mean temperature")
    p.add_argument("--dT", type=float, required=True, help="temperature difference T0 - TN")
    p.add_argument("--N", type=parse_range, required=True, metavar="START:STOP:STEP")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--shift", type=_shift_arg, default="auto",
                   help="'auto' (default) moves the lowest mode to +0.5")
    _output_options(p, "csv")
    p.set_defaults(func=cmd_transport_scan)

    # ent
    g = groups.add_parser("ent", help="ground-state entanglement").add_subparsers(
        dest="cmd", metavar="COMMAND", required=True)
    p = g.add_parser("entropy", help="entropy of sites 0..ell")
    _chain_options(p)
    p.add_argument("--K", type=_k_arg, default="auto",
                   help="last filled mode; 'auto' fills negative modes, else half")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--route", choices=("direct", "heun"), default="direct")
    _output_options(p)
    p.set_defaults(func=cmd_ent_entropy)

    p = g.add_parser("scan", help="entropy against N at fixed ratios "
                                  "(CSV: N, ell, S, route, commutator_residual)")
    p.add_argument("--family", choices=FAMILIES, default="krawtchouk")
    _family_params(p)
    p.add_argument("--ratio-l", type=float, default=0.5,
                   help="fraction of sites in the region (default 0.5)")
    p.add_argument("--ratio-k", type=float, default=0.5,
                   help="filling fraction (default 0.5)")
    p.add_argument("--N", type=parse_range, required=True, metavar="START:STOP:STEP")
    p.add_argument("--route", choices=("direct", "heun"), default="direct")
    _output_options(p, "csv")
    p.set_defaults(func=cmd_ent_scan)

    p = g.add_parser("fit-affine", help="fit h ~ alpha0 + alpha1 T")
    _chain_options(p)
    p.add_argument("--K", type=_k_arg, default="auto")
    p.add_argument("--ell", type=int, required=True)
    _output_options(p)
    p.set_defaults(func=cmd_ent_fit_affine)

    # neg
    g = groups.add_parser("neg", help="fermionic logarithmic negativity").add_subparsers(
        dest="cmd", metavar="COMMAND", required=True)
    p = g.add_parser("pair", help="negativity between two single sites")
    _chain_options(p)
    p.add_argument("--K", type=_k_arg, default="auto")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    _output_options(p)
    p.set_defaults(func=cmd_neg_pair)

    p = g.add_parser("adjacent", help="negativity between touching intervals")
    _chain_options(p)
    p.add_argument("--K", type=_k_arg, default="auto")
    p.add_argument("--ell1", type=int, required=True)
    p.add_argument("--ell2", type=int, required=True)
    p.add_argument("--center", choices=("bulk", "left"), default="bulk")
    _output_options(p)
    p.set_defaults(func=cmd_neg_adjacent)

    p = g.add_parser("sweep", help="single-site negativity against separation "
                                   "(CSV: d, Ef, Ef_skeletal, C_mn, C_asymptotic)")
    p.add_argument("--mode", choices=("skeletal",), default="skeletal")
    p.add_argument("--chain", metavar="FILE|JSON", help="chain; default is a Krawtchouk family")
    p.add_argument("--family", choices=("krawtchouk",), default="krawtchouk")
    p.add_argument("--N", type=int, default=4000)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--K", type=_k_arg, default="auto", help="'auto' is half filling")
    p.add_argument("--d", type=parse_range, required=True, metavar="START:STOP:STEP")
    p.add_argument("--leftmost", type=_leftmost_arg, default="bulk", metavar="0|1|bulk")
    _output_options(p, "csv")
    p.set_defaults(func=cmd_neg_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "chain", None) is not None and getattr(args, "family", None) is not None \
            and args.func not in (cmd_neg_sweep,):
        parser.error("give either --chain or --family, not both")
    try:
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"xxchain: error: {exc}", file=sys.stderr)
        return 2
    except (XXChainError, ValueError, IndexError, ArithmeticError, RuntimeError) as exc:
        print(f"xxchain: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"xxchain: cannot write output: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
