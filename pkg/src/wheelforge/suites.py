"""Named verification suites behind the command line front end.

Each suite is a list of (name, thunk) pairs; a thunk returns (ok, detail).
Suites are pure, so checks can be dispatched to a thread pool; results are
reported in declaration order regardless of scheduling.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .diagrams import FormalSum, SpaceSignature, disjoint_union, juxtapose
from .legs import grade
from .maps import (
    basis_F_to_dot,
    basis_dot_to_F,
    chi_W,
    chi_wedge,
    eval_disc,
    hat_iota,
    homotopy_s,
    homotopy_sT,
    inject_line,
    integrate_discs,
    lambda_map,
    omega_collapse,
    phi_B,
    tau,
    theta,
    upsilon,
)
from .operators import builtin, commutator, contracting_homotopy_s
from .relations import (
    SliceKey,
    enumerate_slice,
    quotient_zero,
    relation_vectors,
    rows_at,
)
from .wheeling import (
    check_composite_lemma,
    check_hw,
    check_wheeling,
    derive_wheels_coefficients,
    load_golden_coefficients,
    literature_coefficients,
    wheel,
)

DEFAULT_MAX_WEIGHT = 6


@dataclass
class VerifyConfig:
    max_weight: int = DEFAULT_MAX_WEIGHT
    slice_cap: int = 500_000
    jobs: int = 1
    fmt: str = "text"

    def __post_init__(self):
        env = os.environ.get("WHEELFORGE_MAX_WEIGHT")
        if env is not None and self.max_weight == DEFAULT_MAX_WEIGHT:
            self.max_weight = int(env)
        if self.max_weight < 0:
            raise ValueError("max_weight must be nonnegative")


def _one(sig, d):
    return FormalSum(sig, {d: Fraction(1)}, _canonical=True)


def _slice(sig, bound, **kw):
    return list(enumerate_slice(SliceKey.weight(sig, bound, **kw)))


def _sweep(sig, bound, check, **kw):
    bad = []
    for d in _slice(sig, bound, **kw):
        if not check(_one(sig, d), d):
            bad.append(d)
    if bad:
        from .textio import serialize

        s = FormalSum(sig, {bad[0]: Fraction(1)}, _canonical=True)
        return False, "failed on %d diagrams, first:\n%s" % (len(bad), serialize(s))
    return True, ""


# ---------------------------------------------------------------------------
# axioms suite


def suite_axioms(cfg):
    mw = cfg.max_weight
    checks = []
    for name in ("W", "W_F", "W_tilde", "T", "T_dR"):
        sig = SpaceSignature(name)
        d_name = "d_T" if sig.lines else "d"
        i_name = "iota_T" if sig.lines else "iota"
        if name == "T_dR":
            d_op = builtin("d_TdR", sig)
        else:
            d_op = builtin(d_name, sig)
        i_op = builtin(i_name, sig)
        kw = {"max_opens": 2, "max_filled": 1} if sig.discs else {}
        bound = mw if not sig.lines else min(mw, 4)

        def dd_check(x, d, d_op=d_op):
            return d_op.apply(d_op.apply(x)).is_zero()

        checks.append(
            (
                "d.d = 0 on %s, weight <= %d" % (name, bound),
                lambda sig=sig, bound=bound, dd=dd_check, kw=kw: _sweep(
                    sig, bound, dd, **kw
                ),
            )
        )

        def id_check(x, d, d_op=d_op, i_op=i_op):
            r = i_op.apply(d_op.apply(x)) + d_op.apply(i_op.apply(x))
            return r.is_zero() or quotient_zero(r)

        checks.append(
            (
                "[iota,d] = 0 on %s, weight <= %d" % (name, bound),
                lambda sig=sig, bound=bound, f=id_check, kw=kw: _sweep(
                    sig, bound, f, **kw
                ),
            )
        )
    W = SpaceSignature("W")
    d_W = builtin("d", W)
    t_W = builtin("t", W)
    td = commutator(t_W, d_W)

    def td_check(x, d):
        return td.apply(x) == x * d.n_legs

    checks.append(
        (
            "[t,d] = legs id on W, weight <= %d" % mw,
            lambda: _sweep(W, mw, td_check),
        )
    )

    def ds_check(x, d):
        if d.n_legs == 0:
            return True
        return (
            d_W.apply(contracting_homotopy_s(x))
            + contracting_homotopy_s(d_W.apply(x))
            == x
        )

    checks.append(
        (
            "d s + s d = id on W (leg-grade >= 1), weight <= %d" % mw,
            lambda: _sweep(W, mw, ds_check),
        )
    )

    # basis change block
    WF = SpaceSignature("W_F")
    dF = builtin("d", WF)
    iF = builtin("iota", WF)
    iW = builtin("iota", W)

    def basis_check(x, d):
        if basis_dot_to_F(basis_F_to_dot(x)) != x:
            return False
        a = basis_F_to_dot(dF.apply(x))
        b = d_W.apply(basis_F_to_dot(x))
        if a != b and not quotient_zero(a - b):
            return False
        return basis_F_to_dot(iF.apply(x)) == iW.apply(basis_F_to_dot(x))

    checks.append(
        (
            "basis change invertible and chain map, weight <= %d" % mw,
            lambda: _sweep(WF, mw, basis_check),
        )
    )

    def hat_check(x, d):
        j = sum(1 for c in d.legs if grade(c) == 1)
        return hat_iota(iF.apply(x)) == x * j

    checks.append(
        (
            "hat_iota . iota = j id on W_F, weight <= %d" % mw,
            lambda: _sweep(WF, mw, hat_check),
        )
    )

    B = SpaceSignature("B")

    def phi_check(x, d):
        p = phi_B(x)
        if not iF.apply(p).is_zero():
            return False
        r = dF.apply(p)
        return r.is_zero() or quotient_zero(r)

    checks.append(
        (
            "phi_B lands in ker iota and ker d, weight <= %d" % mw,
            lambda: _sweep(B, mw, phi_check),
        )
    )

    def pbw():
        results = []
        for bound in (4, min(8, mw + 2)):
            a = SliceKey(SpaceSignature("A"), ("maxweight", bound), bound, max_loops=0)
            b = SliceKey(SpaceSignature("B"), ("maxweight", bound), bound, max_loops=0)
            ba, bb = enumerate_slice(a), enumerate_slice(b)
            ra = len(ba) - relation_vectors(ba).rank
            rb = len(bb) - relation_vectors(bb).rank
            results.append((bound, ra, rb))
        ok = all(ra == rb for _, ra, rb in results)
        return ok, "; ".join("weight<=%d: dim A=%d, dim B=%d" % r for r in results)

    checks.append(("PBW rank equality (B vs A)", pbw))
    return checks


# ---------------------------------------------------------------------------
# homotopy suite


def suite_homotopy(cfg):
    mw = min(cfg.max_weight, 5)
    Wt = SpaceSignature("W_tilde")
    T = SpaceSignature("T")
    TdR = SpaceSignature("T_dR")
    d_op = builtin("d", Wt)
    i_op = builtin("iota", Wt)
    dT = builtin("d_T", T)
    iT = builtin("iota_T", T)
    dTdR = builtin("d_TdR", TdR)
    dTr = builtin("d_T", TdR)
    dbul = builtin("d_bullet", TdR)
    iTdR = builtin("iota_T", TdR)

    def theta_check(x, d):
        th = theta(x)
        if eval_disc(0, th) != inject_line("c", x):
            return False
        if eval_disc(1, th) != inject_line("nc", x):
            return False
        if dTdR.apply(th) != theta(d_op.apply(x)):
            return False
        return theta(i_op.apply(x)) == iTdR.apply(th)

    def omega_check(x, d):
        if omega_collapse(inject_line("nc", x)) != x:
            return False
        return omega_collapse(inject_line("c", x)) == chi_W(tau(x))

    def key_check(x, d):
        sT = homotopy_sT(x)
        lhs = inject_line("nc", x) - inject_line("c", x)
        if lhs != dT.apply(sT) + homotopy_sT(d_op.apply(x)):
            return False
        return (homotopy_sT(i_op.apply(x)) + iT.apply(sT)).is_zero()

    def big_check(x, d):
        s = homotopy_s(x)
        diff = x - chi_W(tau(x)) - d_op.apply(s) - homotopy_s(d_op.apply(x))
        if not (diff.is_zero() or quotient_zero(diff)):
            return False
        return (homotopy_s(i_op.apply(x)) + i_op.apply(s)).is_zero()

    def ftc_check(x, d):
        lhs = eval_disc(1, x) - eval_disc(0, x)
        if lhs != integrate_discs(dbul.apply(x)):
            return False
        if not (
            integrate_discs(iTdR.apply(x)) + iT.apply(integrate_discs(x))
        ).is_zero():
            return False
        return (
            integrate_discs(dTr.apply(x)) + dT.apply(integrate_discs(x))
        ).is_zero()

    disc_kw = {"max_opens": 4, "max_filled": 1}
    tb = min(mw, 4)
    return [
        (
            "Ev and theta interpolation identities, weight <= %d" % mw,
            lambda: _sweep(Wt, mw, theta_check),
        ),
        (
            "omega collapse identities, weight <= %d" % mw,
            lambda: _sweep(Wt, mw, omega_check),
        ),
        (
            "disc integral: FTC and anticommutation, weight <= %d" % tb,
            lambda: _sweep(TdR, tb, ftc_check, **disc_kw),
        ),
        (
            "i_n - i_c = d s_T + s_T d and s_T iota, weight <= %d" % mw,
            lambda: _sweep(Wt, mw, key_check),
        ),
        (
            "id - chi tau = d s + s d and s iota, weight <= %d" % mw,
            lambda: _sweep(Wt, mw, big_check),
        ),
    ]


# ---------------------------------------------------------------------------
# lambda suite


def suite_lambda(cfg):
    mw = cfg.max_weight
    WhF = SpaceSignature("W_hat_F")
    Wwe = SpaceSignature("W_wedge")
    iw = builtin("iota_wedge", Wwe)
    iF = builtin("iota", WhF)

    def clifford_check(x, d):
        from .diagrams import glue_leg_pairs
        from .relations import _swap_adjacent_legs

        for p in range(d.n_legs - 1):
            if grade(d.legs[p]) != 1 or grade(d.legs[p + 1]) != 1:
                continue
            row = FormalSum.zero(WhF)
            row.add_raw(d, 1)
            row.add_raw(_swap_adjacent_legs(d, p), 1)
            row.add_raw(glue_leg_pairs(d, [(p, p + 1)]), -1)
            if not lambda_map(row).is_zero():
                return False
        return True

    def lcw_check(x, d):
        return lambda_map(chi_wedge(x)) == x

    def cwl_check(x, d):
        y = chi_wedge(lambda_map(x))
        if y == x:
            return True
        key = SliceKey.weight(WhF, max(d.weight, (y - x).max_weight()))
        return quotient_zero(y - x, key=key, method="direct")

    def iota_check(x, d):
        return iF.apply(chi_wedge(x)) == chi_wedge(iw.apply(x))

    return [
        (
            "lambda kills Clifford rows, weight <= %d" % mw,
            lambda: _sweep(WhF, mw, clifford_check),
        ),
        (
            "lambda . chi_wedge = id, weight <= %d" % mw,
            lambda: _sweep(Wwe, mw, lcw_check),
        ),
        (
            "chi_wedge . lambda = id, weight <= %d" % min(mw, 5),
            lambda: _sweep(WhF, min(mw, 5), cwl_check),
        ),
        (
            "iota commutes with chi_wedge, weight <= %d" % mw,
            lambda: _sweep(Wwe, mw, iota_check),
        ),
    ]


# ---------------------------------------------------------------------------
# hw / wheeling suites


def suite_hw(cfg, v=None, w=None):
    def run():
        a = v if v is not None else wheel(2)
        b = w if w is not None else wheel(2)
        rep = check_hw(a, b)
        ok = rep["equal"] and rep["iota_zero"]
        detail = "iota(x) %s, identity %s, |x| = %d" % (
            "= 0 exactly" if rep["iota_exact"] else "quotient-zero",
            "holds" if rep["equal"] else "FAILS",
            len(rep["x"]),
        )
        return ok, detail

    def trivial():
        e = FormalSum.unit(SpaceSignature("B"))
        rep = check_hw(e, e)
        return rep["equal"] and rep["x"].is_zero(), "x = 0 on empty input"

    def unit_side():
        e = FormalSum.unit(SpaceSignature("B"))
        rep = check_hw(wheel(2), e)
        return rep["equal"], "lhs = rhs when one factor is the unit"

    return [
        ("HW on (empty, empty)", trivial),
        ("HW on (wheel2, empty)", unit_side),
        ("HW on (wheel2, wheel2) at leg-grade 8", run),
    ]


def suite_wheeling(cfg, v=None, w=None):
    def derive():
        coeffs = derive_wheels_coefficients(2)
        lit = literature_coefficients(2)
        golden = load_golden_coefficients()
        ok = coeffs[2] == lit[2] == golden.get(2)
        return ok, "b2 = %s (literature %s)" % (coeffs[2], lit[2])

    def golden_vs_literature():
        golden = load_golden_coefficients()
        lit = literature_coefficients(max(golden) if golden else 0)
        ok = bool(golden) and all(golden[m] == lit[m] for m in golden)
        return ok, ", ".join("b%d = %s" % (m, golden[m]) for m in sorted(golden))

    def composite():
        golden = load_golden_coefficients()
        e = FormalSum.unit(SpaceSignature("B"))
        for x, label in ((e, "empty"), (wheel(2), "wheel2"),
                         (disjoint_union(wheel(2), wheel(2)), "wheel2 u wheel2")):
            rep = check_composite_lemma(x, coefficients=golden)
            if not rep["equal"]:
                return False, "composite lemma fails on %s" % label
        return True, "holds on empty, wheel2, wheel2 u wheel2"

    def main():
        a = v if v is not None else wheel(2)
        b = w if w is not None else wheel(2)
        rep = check_wheeling(a, b)
        ok = (
            rep["equal"]
            and rep["dispatch_ok"]
            and rep["pipeline_lhs_ok"]
            and rep["pipeline_rhs_ok"]
            and rep["residues_ok"]
        )
        detail = "A-identity %s, pipeline %s, dispatch %s" % (
            rep["equal"],
            rep["pipeline_lhs_ok"] and rep["pipeline_rhs_ok"],
            rep["dispatch_ok"],
        )
        return ok, detail

    return [
        ("derive b2 and cross-check", derive),
        ("golden coefficients match literature series", golden_vs_literature),
        ("composite lemma instances", composite),
        ("Wheeling on (wheel2, wheel2) with dispatch", main),
    ]


SUITES = {
    "axioms": suite_axioms,
    "homotopy": suite_homotopy,
    "lambda": suite_lambda,
    "hw": suite_hw,
    "wheeling": suite_wheeling,
}


def run_suite(name, cfg, emit):
    checks = SUITES[name](cfg)
    results = [None] * len(checks)

    def job(idx):
        label, thunk = checks[idx]
        try:
            ok, detail = thunk()
        except Exception as exc:  # pragma: no cover - surfaced to the report
            ok, detail = False, "error: %s" % exc
        return idx, label, ok, detail

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            for idx, label, ok, detail in pool.map(job, range(len(checks))):
                results[idx] = (label, ok, detail)
    else:
        for idx in range(len(checks)):
            _, label, ok, detail = job(idx)
            results[idx] = (label, ok, detail)
    failed = 0
    for label, ok, detail in results:
        emit(name, label, ok, detail)
        if not ok:
            failed += 1
    return failed
