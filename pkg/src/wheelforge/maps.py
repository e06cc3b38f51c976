"""The named maps between diagram spaces.

Averaging maps expand a generator over signed leg orderings; basis changes
expand legs through the curvature substitution F = fat - fork/2; the
two-line machinery (theta, Ev, the disc integral, omega) implements the
interpolation argument behind the chain homotopy; the quotient route
(pi, B, lambda, chi_wedge, phi_A) recovers the ordered Jacobi space.
"""

import itertools
from fractions import Fraction

from .diagrams import (
    Diagram,
    DiagramError,
    FormalSum,
    SignatureError,
    SpaceSignature,
    glue_leg_pairs,
    juxtapose,
    koszul_sign,
    permute_legs_raw,
    relabel_legs_raw,
)
from .legs import (
    F,
    G1,
    G2,
    LINE_C,
    LINE_NC,
    grade,
    kind_of,
    line_of,
    make_leg,
    strip_line,
    with_line,
)
from .operators import FORK, OPEN, Fragment, builtin, substitute_leg

B_SIG = SpaceSignature("B")
A_SIG = SpaceSignature("A")


def _require(s, *names):
    if s.signature.name not in names:
        raise SignatureError(
            "expected a sum in %s, got %s" % ("/".join(names), s.signature.text())
        )


def _retag(s, name):
    """Reinterpret every generator in another signature (re-canonicalizing)."""
    out = FormalSum.zero(SpaceSignature(name, s.signature.iota))
    for d, c in s:
        out.add_raw(d, c)
    return out


# ---------------------------------------------------------------------------
# averaging maps


def _signed_orderings(s, positions, target):
    """Sum over signed permutations of the given leg positions, averaged."""
    out = FormalSum.zero(target)
    for d, coeff in s:
        pos = positions(d)
        k = len(pos)
        if k == 0:
            out.add_raw(d, coeff)
            continue
        grades = [grade(c) for c in d.legs]
        share = coeff * Fraction(1, _factorial(k))
        for sigma in itertools.permutations(pos):
            perm = list(range(d.n_legs))
            for slot, orig in zip(pos, sigma):
                perm[slot] = orig
            sign = koszul_sign(perm, grades)
            out.add_raw(permute_legs_raw(d, perm), share * sign)
    return out


def _factorial(k):
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def chi_B(s):
    """Average over all leg orderings: the PBW map from B into A."""
    _require(s, "B")
    name = "A" if all(d.loops == 0 for d, _ in s) else "A_loops"
    target = SpaceSignature(name, s.signature.iota)
    return _signed_orderings(s, lambda d: list(range(d.n_legs)), target)


def chi_W(s):
    """Graded averaging from the commutative into the free Weil complex."""
    _require(s, "W")
    target = SpaceSignature("W_tilde", s.signature.iota)
    return _signed_orderings(s, lambda d: list(range(d.n_legs)), target)


def tau(s):
    """Forget the ordering: reinterpret free Weil diagrams commutatively."""
    _require(s, "W_tilde")
    return _retag(s, "W")


def chi_wedge(s):
    """Signed average over the grade-1 legs, landing in the hatted F space."""
    _require(s, "W_wedge")
    target = SpaceSignature("W_hat_F", s.signature.iota)
    return _signed_orderings(
        s, lambda d: [p for p, c in enumerate(d.legs) if grade(c) == 1], target
    )


# ---------------------------------------------------------------------------
# relabeling maps


def phi_B(s):
    """Label every leg of a symmetric Jacobi diagram with F."""
    _require(s, "B")
    out = FormalSum.zero(SpaceSignature("W_F", s.signature.iota))
    for d, c in s:
        out.add_raw(relabel_legs_raw(d, lambda code: F), c)
    return out


def phi_A(s):
    """Label every leg with F: the iso from loopy ordered diagrams onto
    the zero-grade-1 summand of the wedge space."""
    _require(s, "A", "A_loops")
    out = FormalSum.zero(SpaceSignature("W_wedge", s.signature.iota))
    for d, c in s:
        out.add_raw(relabel_legs_raw(d, lambda code: F), c)
    return out


def phi_A_inverse(s):
    _require(s, "W_wedge")
    out = FormalSum.zero(SpaceSignature("A_loops", s.signature.iota))
    for d, c in s:
        if any(grade(code) == 1 for code in d.legs):
            raise DiagramError(
                "phi_A inverse applied outside the zero-grade-1 summand"
            )
        out.add_raw(relabel_legs_raw(d, lambda code: G2), c)
    return out


def project_pi(s):
    """Introduce the STU, bracket and Clifford relations."""
    _require(s, "W_tilde")
    return _retag(s, "W_hat")


def inject_line(side, s):
    """Put every leg on the chosen orienting line of the two-line space."""
    _require(s, "W_tilde")
    line = LINE_NC if side == "nc" else LINE_C
    out = FormalSum.zero(SpaceSignature("T", s.signature.iota))
    for d, c in s:
        out.add_raw(relabel_legs_raw(d, lambda code: with_line(code, line)), c)
    return out


def erase_lines(s):
    _require(s, "T")
    out = FormalSum.zero(SpaceSignature("W_tilde", s.signature.iota))
    for d, c in s:
        out.add_raw(relabel_legs_raw(d, strip_line), c)
    return out


# ---------------------------------------------------------------------------
# basis change


_EXPANSIONS = {
    "F_to_dot": {F: [(Fraction(1), (G2,)), (Fraction(-1, 2), None)]},
    "dot_to_F": {G2: [(Fraction(1), (F,)), (Fraction(1, 2), None)]},
}


def _expand_legs(s, table, target_name):
    """Simultaneous per-leg expansion; None marks the fork branch."""
    target = SpaceSignature(target_name, s.signature.iota)
    out = FormalSum.zero(target)
    for d, coeff in s:
        stack = [(d, coeff, 0)]
        while stack:
            cur, c, p = stack.pop()
            if p == cur.n_legs:
                out.add_raw(cur, c)
                continue
            rule = table.get(kind_of(cur.legs[p]))
            if rule is None:
                stack.append((cur, c, p + 1))
                continue
            for branch_coeff, branch in rule:
                if branch is None:
                    nd, extra = substitute_leg(cur, p, FORK)
                    stack.append((nd, c * branch_coeff * extra, p + 2))
                else:
                    nd = Diagram(
                        legs=cur.legs[:p] + branch + cur.legs[p + 1 :],
                        nv=cur.nv,
                        edges=cur.edges,
                        iota=cur.iota,
                        opens=cur.opens,
                        filled=cur.filled,
                        loops=cur.loops,
                    )
                    stack.append((nd, c * branch_coeff, p + 1))
    return out


def basis_F_to_dot(s):
    """Expand curvature legs: F becomes fat minus half a fork."""
    if s.signature.name == "W_F":
        return _expand_legs(s, _EXPANSIONS["F_to_dot"], "W")
    if s.signature.name == "W_hat_F":
        return _expand_legs(s, _EXPANSIONS["F_to_dot"], "W_hat")
    raise SignatureError("F-basis expansion expects W_F or W_hat_F")


def basis_dot_to_F(s):
    """Contract fat legs into the curvature basis: fat = F plus half a fork."""
    if s.signature.name == "W":
        return _expand_legs(s, _EXPANSIONS["dot_to_F"], "W_F")
    if s.signature.name == "W_hat":
        return _expand_legs(s, _EXPANSIONS["dot_to_F"], "W_hat_F")
    raise SignatureError("dot-basis contraction expects W or W_hat")


def upsilon(s):
    """The hair-splitting map: label legs with F, then expand."""
    return basis_F_to_dot(phi_B(s))


# ---------------------------------------------------------------------------
# the T_dR interpolation machinery


def theta(s):
    """Interpolate each leg between the two lines with a formal parameter.

    Grade-1 rule: nc with an open disc, plus c, minus c with an open disc.
    Fat rule is its differential image: the same three fat terms plus the
    filled-disc grade-1 terms (nc minus c).
    """
    _require(s, "W_tilde")
    target = SpaceSignature("T_dR", s.signature.iota)
    out = FormalSum.zero(target)
    g1_rule = [
        (Fraction(1), LINE_NC, 1, 0, None),
        (Fraction(1), LINE_C, 0, 0, None),
        (Fraction(-1), LINE_C, 1, 0, None),
    ]
    fat_rule = [
        (Fraction(1), LINE_NC, 1, 0, None),
        (Fraction(1), LINE_C, 0, 0, None),
        (Fraction(-1), LINE_C, 1, 0, None),
        (Fraction(1), LINE_NC, 0, 1, G1),
        (Fraction(-1), LINE_C, 0, 1, G1),
    ]
    for d, coeff in s:
        partial = [(d.legs, 0, 0, coeff)]
        for p, code in enumerate(d.legs):
            rule = g1_rule if grade(code) == 1 else fat_rule
            grown = {}
            left_grade = sum(grade(c) for c in d.legs[:p])
            for legs, opens, filled, c in partial:
                for bc, line, d_open, d_fill, new_kind in rule:
                    nf = filled + d_fill
                    if nf > 1:
                        continue
                    kind = new_kind if new_kind is not None else kind_of(code)
                    nl = legs[:p] + (make_leg(kind, line),) + legs[p + 1 :]
                    sign = bc
                    if d_fill and left_grade % 2:
                        sign = -sign
                    key = (nl, opens + d_open, nf)
                    grown[key] = grown.get(key, Fraction(0)) + c * sign
            partial = [
                (legs, o, f, c) for (legs, o, f), c in grown.items() if c
            ]
        for legs, opens, filled, c in partial:
            out.add_raw(
                Diagram(
                    legs=legs,
                    nv=d.nv,
                    edges=d.edges,
                    iota=d.iota,
                    opens=d.opens + opens,
                    filled=d.filled + filled,
                    loops=d.loops,
                ),
                c,
            )
    return out


def eval_disc(endpoint, s):
    """Set the formal parameter to 0 or 1 by inspecting the third line."""
    _require(s, "T_dR")
    out = FormalSum.zero(SpaceSignature("T", s.signature.iota))
    for d, c in s:
        if endpoint == 0:
            if d.opens or d.filled:
                continue
        else:
            if d.filled:
                continue
        out.add_raw(
            Diagram(
                legs=d.legs,
                nv=d.nv,
                edges=d.edges,
                iota=d.iota,
                loops=d.loops,
            ),
            c,
        )
    return out


def integrate_discs(s):
    """Keep one-filled-disc terms, weighted by 1/(open count + 1)."""
    _require(s, "T_dR")
    out = FormalSum.zero(SpaceSignature("T", s.signature.iota))
    for d, c in s:
        if d.filled != 1:
            continue
        out.add_raw(
            Diagram(
                legs=d.legs,
                nv=d.nv,
                edges=d.edges,
                iota=d.iota,
                loops=d.loops,
            ),
            c * Fraction(1, d.opens + 1),
        )
    return out


def omega_collapse(s):
    """Average the commutative-line legs behind the non-commutative block."""
    _require(s, "T")
    target = SpaceSignature("W_tilde", s.signature.iota)
    out = FormalSum.zero(target)
    for d, coeff in s:
        # canonical T order already holds all nc legs before all c legs
        c_pos = [p for p, code in enumerate(d.legs) if line_of(code) == LINE_C]
        k = len(c_pos)
        grades = [grade(code) for code in d.legs]
        share = coeff * Fraction(1, _factorial(k))
        base = list(range(d.n_legs))
        for sigma in itertools.permutations(c_pos):
            perm = list(base)
            for slot, orig in zip(c_pos, sigma):
                perm[slot] = orig
            sign = koszul_sign(perm, grades)
            out.add_raw(
                relabel_legs_raw(permute_legs_raw(d, perm), strip_line),
                share * sign,
            )
    return out


def homotopy_sT(s):
    """The homotopy between the two line injections: integrate theta.

    Closed form: pick the fat leg that emits the filled disc and a line
    assignment for the rest; summing the open-disc subsets against the
    1/(n+1) integral weight gives the Euler beta factor a! c! / (a+c+1)!.
    """
    _require(s, "W_tilde")
    target = SpaceSignature("T", s.signature.iota)
    out = FormalSum.zero(target)
    for d, coeff in s:
        n = d.n_legs
        grades = [grade(code) for code in d.legs]
        fats = [p for p in range(n) if grades[p] == 2]
        for e in fats:
            head = -1 if sum(grades[:e]) % 2 else 1
            others = [p for p in range(n) if p != e]
            for mask in range(1 << len(others)):
                a = c = 0
                lines = {}
                for idx, p in enumerate(others):
                    if mask >> idx & 1:
                        lines[p] = LINE_C
                        c += 1
                    else:
                        lines[p] = LINE_NC
                        a += 1
                beta = Fraction(
                    _factorial(a) * _factorial(c), _factorial(a + c + 1)
                )
                for eline, esign in ((LINE_NC, 1), (LINE_C, -1)):
                    legs = list(d.legs)
                    for p in others:
                        legs[p] = with_line(legs[p], lines[p])
                    legs[e] = make_leg(G1, eline)
                    out.add_raw(
                        Diagram(
                            legs=tuple(legs),
                            nv=d.nv,
                            edges=d.edges,
                            iota=d.iota,
                            loops=d.loops,
                        ),
                        coeff * head * esign * beta,
                    )
    return out


def homotopy_s(s):
    """The iota-chain homotopy between the identity and resymmetrization."""
    return omega_collapse(homotopy_sT(s))


# ---------------------------------------------------------------------------
# pairings, lambda, hat iota


def pairing_action(pairs, d, sig=None):
    """Glue the listed grade-1 leg position pairs, half a chord each.

    Returns (raw diagram or None, coefficient).  Pairs are contracted in
    sorted order; the result is independent of that order.
    """
    sig = sig or SpaceSignature("W_hat_F")
    coeff = Fraction(1)
    cur = d
    alive = list(range(d.n_legs))  # original position of each current leg
    for x, y in sorted(tuple(sorted(p)) for p in pairs):
        ix = alive.index(x)
        iy = alive.index(y)
        if grade(cur.legs[ix]) != 1 or grade(cur.legs[iy]) != 1:
            raise DiagramError("pairing touches a leg of grade 2")
        between = sum(grade(c) for c in cur.legs[ix + 1 : iy])
        sign = -1 if between % 2 else 1
        coeff *= Fraction(sign, 2)
        cur = glue_leg_pairs(cur, [(ix, iy)])
        alive = [o for o in alive if o not in (x, y)]
    return cur, coeff


def lambda_map(s):
    """Sum over all pairings of the grade-1 legs, gluing each pair.

    Computed iteratively: with G the sum of all single-pair gluings,
    the sum over pairings of m disjoint pairs is G^m / m! (the m! divides
    out the gluing order), and intermediate canonicalization keeps the
    term count down.
    """
    _require(s, "W_hat_F")
    target = SpaceSignature("W_wedge", s.signature.iota)
    total = FormalSum.zero(target)
    layer = s  # layers keep the rigid grade-1 order until reinterpretation
    m = 0
    while not layer.is_zero():
        for d, c in layer:
            total.add_raw(d, c)
        m += 1
        nxt = FormalSum.zero(s.signature)
        for d, coeff in layer:
            ones = [p for p, code in enumerate(d.legs) if grade(code) == 1]
            for i in range(len(ones)):
                for j in range(i + 1, len(ones)):
                    nd, cc = pairing_action([(ones[i], ones[j])], d)
                    nxt.add_raw(nd, coeff * cc)
        layer = nxt * Fraction(1, m)
    return total


def lambda_map_direct(s):
    """Reference form of the pairing sum, one term per pairing."""
    _require(s, "W_hat_F")
    target = SpaceSignature("W_wedge", s.signature.iota)
    out = FormalSum.zero(target)
    for d, coeff in s:
        ones = [p for p, code in enumerate(d.legs) if grade(code) == 1]
        for pairing in _pairings(ones):
            nd, c = pairing_action(pairing, d)
            out.add_raw(nd, coeff * c)
    return out


def _pairings(items):
    """All sets of mutually disjoint 2-element subsets (including empty)."""

    def gen(rest):
        if not rest:
            return [[]]
        first, tail = rest[0], rest[1:]
        combos = [list(p) for p in gen(tail)]  # first stays unpaired
        for i in range(len(tail)):
            nxt = tail[:i] + tail[i + 1 :]
            for p in gen(nxt):
                combos.append([(first, tail[i])] + p)
        return combos

    return gen(list(items))


def hat_iota(s):
    """Reattach the floating iota vertex as a far-left grade-1 leg."""
    if not s.signature.iota:
        raise SignatureError("hat_iota expects an iota-variant sum")
    target = s.signature.with_iota(False)
    out = FormalSum.zero(target)
    for d, coeff in s:
        n = d.n_legs
        iota_id = n
        table = {q: q + 1 for q in range(n)}
        table[iota_id] = 0
        base_old = n + 1
        base_new = n + 1
        for k in range(d.nv):
            for j in range(3):
                table[base_old + 3 * k + j] = base_new + 3 * k + j
        edges = tuple(
            sorted(
                (min(table[a], table[b]), max(table[a], table[b]))
                for a, b in d.edges
            )
        )
        line = LINE_NC if s.signature.lines else 0
        out.add_raw(
            Diagram(
                legs=(make_leg(G1, line),) + d.legs,
                nv=d.nv,
                edges=edges,
                iota=False,
                opens=d.opens,
                filled=d.filled,
                loops=d.loops,
            ),
            coeff,
        )
    return out


def transport_to_wedge(s):
    """Carry a hatted sum into the wedge space, split by grade-1 leg count.

    Equality in the hatted spaces is decided summand by summand here, since
    the wedge space is graded by that count and its relations stay inside
    weight-preserving families.
    """
    if s.signature.name == "W_hat":
        s = basis_dot_to_F(s)
    _require(s, "W_hat_F")
    w = lambda_map(s)
    parts = {}
    for d, c in w:
        key = sum(1 for code in d.legs if grade(code) == 1)
        part = parts.get(key)
        if part is None:
            part = FormalSum.zero(w.signature)
            parts[key] = part
        part.add_canonical(d, c)
    return parts
