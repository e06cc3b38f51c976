"""Command line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or input errors.
"""

import argparse
import json
import sys

from .diagrams import DiagramError, SpaceSignature
from .relations import SliceKey, SliceOverflow, enumerate_slice, quotient_equal
from .suites import SUITES, VerifyConfig, run_suite
from .textio import ParseError, parse, serialize


class UsageError(ValueError):
    pass


def main(argv=None):
    try:
        return _main(argv)
    except (UsageError, ParseError, DiagramError, SliceOverflow, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


def _main(argv):
    parser = _build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="wheelforge",
        description="exact verification of the Weil-diagram Wheeling identities",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run an identity suite")
    p.add_argument("suite", choices=sorted(SUITES) + ["all"])
    p.add_argument("--max-weight", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--v", help="diagram file for the first argument (hw/wheeling)")
    p.add_argument("--w", help="diagram file for the second argument (hw/wheeling)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("apply", help="apply a named map or operator to a sum")
    p.add_argument("name")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", default=None)
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("eq", help="decide quotient equality of two sums")
    p.add_argument("--lhs", required=True)
    p.add_argument("--rhs", required=True)
    p.add_argument("--max-weight", type=int, default=None)
    p.set_defaults(func=cmd_eq)

    p = sub.add_parser("derive-omega", help="derive wheels coefficients")
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--out", dest="outfile", default=None)
    p.set_defaults(func=cmd_derive_omega)

    p = sub.add_parser("enumerate", help="list canonical diagrams in a slice")
    p.add_argument("--space", required=True)
    p.add_argument("--max-weight", type=int, required=True)
    p.add_argument("--max-trivalent", type=int, default=None)
    p.add_argument("--max-loops", type=int, default=None)
    p.add_argument("--legs", default=None, help="exact leg word, e.g. g1,g2")
    p.set_defaults(func=cmd_enumerate)
    return parser


def _load(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse(fh.read())


def cmd_verify(args):
    try:
        cfg = VerifyConfig(
            max_weight=args.max_weight
            if args.max_weight is not None
            else VerifyConfig().max_weight,
            jobs=args.jobs,
            fmt=args.format,
        )
    except ValueError as exc:
        raise UsageError(str(exc))
    v = _load(args.v) if args.v else None
    w = _load(args.w) if args.w else None

    def emit(suite, label, ok, detail):
        if cfg.fmt == "json":
            print(
                json.dumps(
                    {
                        "suite": suite,
                        "identity": label,
                        "slice": "max_weight=%d" % cfg.max_weight,
                        "status": "pass" if ok else "fail",
                        "detail": detail,
                    }
                )
            )
        else:
            mark = "ok  " if ok else "FAIL"
            line = "[%s] %s %s" % (suite, mark, label)
            if detail:
                line += "  (%s)" % detail
            print(line)

    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    failures = 0
    for name in names:
        if name in ("hw", "wheeling"):
            checks_fn = SUITES[name]
            fails = _run_with_args(name, cfg, emit, v, w)
        else:
            fails = run_suite(name, cfg, emit)
        failures += fails
    return 1 if failures else 0


def _run_with_args(name, cfg, emit, v, w):
    from .suites import suite_hw, suite_wheeling

    fn = suite_hw if name == "hw" else suite_wheeling
    checks = fn(cfg, v, w)
    failures = 0
    for label, thunk in checks:
        try:
            ok, detail = thunk()
        except Exception as exc:
            ok, detail = False, "error: %s" % exc
        emit(name, label, ok, detail)
        if not ok:
            failures += 1
    return failures


def _named_transform(name, s):
    from . import maps
    from .operators import builtin, contracting_homotopy_s

    table = {
        "chi_B": maps.chi_B,
        "chi_W": maps.chi_W,
        "tau": maps.tau,
        "phi_B": maps.phi_B,
        "BFdot": maps.basis_F_to_dot,
        "BdotF": maps.basis_dot_to_F,
        "upsilon": maps.upsilon,
        "i_n": lambda x: maps.inject_line("nc", x),
        "i_c": lambda x: maps.inject_line("c", x),
        "theta": maps.theta,
        "omega": maps.omega_collapse,
        "ev0": lambda x: maps.eval_disc(0, x),
        "ev1": lambda x: maps.eval_disc(1, x),
        "int": maps.integrate_discs,
        "sT": maps.homotopy_sT,
        "pi": maps.project_pi,
        "lambda": maps.lambda_map,
        "chi_wedge": maps.chi_wedge,
        "hat_iota": maps.hat_iota,
        "phi_A": maps.phi_A,
        "phi_A_inv": maps.phi_A_inverse,
    }
    if name in table:
        return table[name](s)
    if name == "s":
        # the contraction on W; the iota-chain homotopy on W_tilde
        if s.signature.name == "W":
            return contracting_homotopy_s(s)
        return maps.homotopy_s(s)
    operator_names = {
        "d": "d",
        "iota": "iota",
        "t": "t",
        "d_F": "d",
        "iota_F": "iota",
        "d_T": "d_T",
        "iota_T": "iota_T",
        "d_bullet": "d_bullet",
        "d_TdR": "d_TdR",
        "iota_wedge": "iota_wedge",
    }
    if name in operator_names:
        return builtin(operator_names[name], s.signature).apply(s)
    raise UsageError("unknown map or operator %r" % name)


def cmd_apply(args):
    s = _load(args.infile)
    out = _named_transform(args.name, s)
    text = serialize(out)
    if args.outfile:
        with open(args.outfile, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_eq(args):
    lhs = _load(args.lhs)
    rhs = _load(args.rhs)
    if lhs.signature != rhs.signature:
        raise UsageError(
            "signatures differ: %s vs %s"
            % (lhs.signature.text(), rhs.signature.text())
        )
    equal = quotient_equal(lhs, rhs)
    support = max(lhs.max_weight(), rhs.max_weight())
    print(
        "%s in %s (support weight %d)"
        % ("equal" if equal else "not equal", lhs.signature.text(), support)
    )
    return 0 if equal else 1


def cmd_derive_omega(args):
    from .wheeling import (
        derive_wheels_coefficients,
        format_coefficients,
        parse_coefficients,
    )

    coeffs = derive_wheels_coefficients(args.order)
    text = format_coefficients(coeffs)
    if args.outfile:
        existing = None
        try:
            with open(args.outfile, "r", encoding="utf-8") as fh:
                existing = parse_coefficients(fh.read())
        except FileNotFoundError:
            pass
        if existing is not None:
            stale = {
                m: v for m, v in existing.items() if m in coeffs and coeffs[m] != v
            }
            if stale:
                print(
                    "error: derived values disagree with %s: %s"
                    % (args.outfile, stale),
                    file=sys.stderr,
                )
                return 1
        merged = dict(existing or {})
        merged.update(coeffs)
        with open(args.outfile, "w", encoding="utf-8") as fh:
            fh.write(format_coefficients(merged))
    sys.stdout.write(text)
    return 0


def cmd_enumerate(args):
    sig = SpaceSignature.parse(args.space)
    bound = args.max_weight
    if bound < 0:
        raise UsageError("max weight must be nonnegative")
    if args.legs:
        word = tuple(
            __import__("wheelforge.legs", fromlist=["leg_from_name"]).leg_from_name(t)
            for t in args.legs.split(",")
        )
        key = SliceKey.exact(
            sig,
            word,
            args.max_trivalent if args.max_trivalent is not None else bound,
            max_loops=args.max_loops or 0,
        )
    else:
        key = SliceKey.weight(sig, bound)
        if args.max_trivalent is not None:
            key = SliceKey(
                sig,
                ("maxweight", bound),
                args.max_trivalent,
                max_loops=args.max_loops
                if args.max_loops is not None
                else bound // 2,
            )
    basis = enumerate_slice(key)
    print("# %d canonical diagrams" % len(basis))
    from .diagrams import FormalSum
    from fractions import Fraction

    out = FormalSum(sig, {d: Fraction(1) for d in basis}, _canonical=True)
    sys.stdout.write(serialize(out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
