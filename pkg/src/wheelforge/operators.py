"""Formal linear differential operators as per-leg substitution templates.

An operator of grade j consumes one leg at a time, sweeping left to right:
substituting at position p costs the pass-through sign (-1)^(j*G(p)), G(p)
being the total grade of everything left of p (disc letters included, since
the disc word sits at the far left).  The replacement is a fragment: a
small graph with fresh legs, fresh vertices, optionally a fresh iota vertex
or disc emissions, and one open half-edge where the consumed leg's edge
reattaches.  Fragment legs inherit the consumed leg's line tag.
"""

from dataclasses import dataclass
from fractions import Fraction

from .diagrams import Diagram, DiagramError, FormalSum, SignatureError
from .legs import F, G1, G2, grade, kind_of, line_of, with_line

OPEN = -1


@dataclass(frozen=True)
class Fragment:
    """Replacement graph for one consumed leg.

    Local half-edge ids: fresh legs 0..m-1, iota = m when used, port j of
    fresh vertex k = m + iota + 3k + j.  ``edges`` covers every local
    half-edge exactly once, with OPEN (-1) marking where the consumed
    edge attaches.
    """

    legs: tuple
    nv: int = 0
    edges: tuple = ()
    iota: bool = False
    opens: int = 0
    filled: int = 0

    @property
    def base(self):
        return len(self.legs) + (1 if self.iota else 0)

    @property
    def leg_grade(self):
        return sum(grade(c) for c in self.legs) + self.filled


CAP = Fragment(legs=(), iota=True, edges=((OPEN, 0),))
TO_FAT = Fragment(legs=(G2,), edges=((OPEN, 0),))
TO_G1 = Fragment(legs=(G1,), edges=((OPEN, 0),))
TO_F = Fragment(legs=(F,), edges=((OPEN, 0),))
# trivalent vertex with the iota edge and one fresh grade-1 leg, read
# cyclically (incoming edge, iota, leg)
IOTA_FORK = Fragment(legs=(G1,), nv=1, iota=True, edges=((OPEN, 2), (3, 1), (4, 0)))
FORK = Fragment(legs=(G1, G1), nv=1, edges=((OPEN, 2), (3, 0), (4, 1)))


def _fork2(a, b):
    """Vertex whose lower branches are the leg words a and b (left, right)."""
    legs_a = a if isinstance(a, tuple) else (a,)
    legs_b = b if isinstance(b, tuple) else (b,)
    # only the shapes needed by the F-basis differential are supported
    if len(legs_a) == 1 and len(legs_b) == 1:
        return Fragment(legs=legs_a + legs_b, nv=1, edges=((OPEN, 2), (3, 0), (4, 1)))
    if len(legs_a) == 2 and len(legs_b) == 1:
        # outer vertex feeds an inner fork on the left branch
        return Fragment(
            legs=legs_a + legs_b,
            nv=2,
            edges=((OPEN, 3), (4, 6), (5, 2), (7, 0), (8, 1)),
        )
    if len(legs_a) == 1 and len(legs_b) == 2:
        return Fragment(
            legs=legs_a + legs_b,
            nv=2,
            edges=((OPEN, 3), (4, 0), (5, 6), (7, 1), (8, 2)),
        )
    raise ValueError("unsupported fork shape")


class Operator:
    """Substitution-rule operator; apply() is the closed-form sweep."""

    def __init__(self, name, sig, grade_, rules, disc_rules=None, adds_iota=False):
        self.name = name
        self.sig = sig
        self.grade = grade_
        self.rules = rules  # kind -> list of (Fraction, Fragment)
        self.disc_rules = disc_rules or {}
        self.adds_iota = adds_iota

    def out_signature(self, in_sig):
        if self.adds_iota:
            if in_sig.iota:
                raise SignatureError("iota applied to an iota-variant sum")
            return in_sig.with_iota(True)
        return in_sig

    def __repr__(self):
        return "Operator(%s on %s, grade %+d)" % (self.name, self.sig.name, self.grade)

    def apply(self, s):
        if s.signature.name != self.sig.name:
            raise SignatureError(
                "operator %s defined on %s, got %s"
                % (self.name, self.sig.name, s.signature.text())
            )
        out = FormalSum.zero(self.out_signature(s.signature))
        j = self.grade
        for d, coeff in s:
            self._apply_generator(d, coeff, j, out)
        return out

    def _apply_generator(self, d, coeff, j, out):
        if self.disc_rules and d.opens:
            rule = self.disc_rules.get("o", ())
            for c, (d_opens, d_filled) in rule:
                nd = Diagram(
                    legs=d.legs,
                    nv=d.nv,
                    edges=d.edges,
                    iota=d.iota,
                    opens=d.opens + d_opens,
                    filled=d.filled + d_filled,
                    loops=d.loops,
                )
                # an open disc has grade 0, so no pass sign; each of the
                # interchangeable open discs is a substitution site
                out.add_raw(nd, coeff * c * d.opens)
        g = d.filled  # disc word sits to the left of every leg
        for p, code in enumerate(d.legs):
            rule = self.rules.get(kind_of(code))
            if rule is None:
                raise DiagramError(
                    "operator %s has no rule for leg kind %d"
                    % (self.name, kind_of(code))
                )
            if rule:
                sign = Fraction(-1) if (j * g) % 2 else Fraction(1)
                for c, frag in rule:
                    nd, extra = substitute_leg(d, p, frag)
                    if nd is not None:
                        out.add_raw(nd, coeff * c * sign * extra)
            g += grade(code)


def substitute_leg(d, p, frag):
    """Instantiate a fragment at leg position p of d.

    Returns (raw diagram, sign) where the sign normalizes any emitted
    filled disc to the far left; (None, 0) when the result is a zero
    generator (two filled discs).
    """
    if frag.filled and d.filled:
        return None, Fraction(0)
    if frag.iota and d.iota:
        raise SignatureError("iota applied to an iota-variant sum")
    n = d.n_legs
    m = len(frag.legs)
    line = line_of(d.legs[p])
    new_n = n + m - 1
    iota = d.iota or frag.iota
    base_new = new_n + (1 if iota else 0)

    table = {}
    for q in range(n):
        if q < p:
            table[q] = q
        elif q > p:
            table[q] = q + m - 1
    if d.iota:
        table[n] = new_n
    for k in range(d.nv):
        for j in range(3):
            table[d.base + 3 * k + j] = base_new + 3 * k + j

    ftable = {}
    for i in range(m):
        ftable[i] = p + i
    if frag.iota:
        ftable[m] = new_n
    fbase = frag.base
    for k in range(frag.nv):
        for j in range(3):
            ftable[fbase + 3 * k + j] = base_new + 3 * (d.nv + k) + j

    partner = d.partner_map()
    target = table.get(partner[p], partner[p])
    edges = []
    for a, b in d.edges:
        if p in (a, b):
            continue
        edges.append((min(table[a], table[b]), max(table[a], table[b])))
    for a, b in frag.edges:
        x = target if a == OPEN else ftable[a]
        y = target if b == OPEN else ftable[b]
        edges.append((min(x, y), max(x, y)))

    sign = Fraction(1)
    if frag.filled:
        passed = sum(grade(c) for c in d.legs[:p])
        if passed % 2:
            sign = Fraction(-1)
    legs = (
        d.legs[:p]
        + tuple(with_line(c, line) for c in frag.legs)
        + d.legs[p + 1 :]
    )
    nd = Diagram(
        legs=legs,
        nv=d.nv + frag.nv,
        edges=tuple(sorted(edges)),
        iota=iota,
        opens=d.opens + frag.opens,
        filled=d.filled + frag.filled,
        loops=d.loops,
    )
    return nd, sign


# ---------------------------------------------------------------------------
# fragment-level substitution, for the commutator lemma


def substitute_in_fragment(frag, i, sub):
    """Replace fragment leg i by another fragment (used by commutators)."""
    if frag.filled and sub.filled:
        return None
    if frag.iota and sub.iota:
        return None
    m = len(frag.legs)
    ms = len(sub.legs)
    new_m = m + ms - 1
    iota = frag.iota or sub.iota
    base_new = new_m + (1 if iota else 0)

    table = {}
    for q in range(m):
        if q < i:
            table[q] = q
        elif q > i:
            table[q] = q + ms - 1
    if frag.iota:
        table[m] = new_m
    for k in range(frag.nv):
        for j in range(3):
            table[frag.base + 3 * k + j] = base_new + 3 * k + j

    stable = {}
    for q in range(ms):
        stable[q] = i + q
    if sub.iota:
        stable[ms] = new_m
    for k in range(sub.nv):
        for j in range(3):
            stable[sub.base + 3 * k + j] = base_new + 3 * (frag.nv + k) + j

    partner = {}
    for a, b in frag.edges:
        partner[a] = b
        partner[b] = a
    tgt = partner[i]
    tgt_m = OPEN if tgt == OPEN else table[tgt]
    edges = []
    for a, b in frag.edges:
        if i in (a, b):
            continue
        a2 = OPEN if a == OPEN else table[a]
        b2 = OPEN if b == OPEN else table[b]
        edges.append((a2, b2))
    for a, b in sub.edges:
        a2 = tgt_m if a == OPEN else stable[a]
        b2 = tgt_m if b == OPEN else stable[b]
        edges.append((a2, b2))
    legs = frag.legs[:i] + sub.legs + frag.legs[i + 1 :]
    return Fragment(
        legs=legs,
        nv=frag.nv + sub.nv,
        edges=tuple(edges),
        iota=iota,
        opens=frag.opens + sub.opens,
        filled=frag.filled + sub.filled,
    )


def _apply_into_fragment(op, rule_term):
    """Sweep an operator across a single weighted fragment."""
    coeff, frag = rule_term
    out = []
    g = frag.filled
    for i, code in enumerate(frag.legs):
        rule = op.rules.get(kind_of(code), ())
        sign = Fraction(-1) if (op.grade * g) % 2 else Fraction(1)
        for c, sub in rule:
            combined = substitute_in_fragment(frag, i, sub)
            if combined is not None:
                extra = Fraction(1)
                if sub.filled and sum(grade(x) for x in frag.legs[:i]) % 2:
                    extra = Fraction(-1)
                out.append((coeff * c * sign * extra, combined))
        g += grade(code)
    return out


def commutator(f, g):
    """Graded commutator [f, g] = f g - (-1)^(|f||g|) g f as an operator."""
    if f.sig.name != g.sig.name:
        raise SignatureError("commutator needs operators on one signature")
    if f.disc_rules or g.disc_rules:
        raise SignatureError("commutator of disc-acting operators unsupported")
    sign = Fraction(-1) if (f.grade * g.grade) % 2 else Fraction(1)
    rules = {}
    kinds = set(f.rules) | set(g.rules)
    for kind in kinds:
        terms = []
        for term in g.rules.get(kind, ()):
            terms.extend(_apply_into_fragment(f, term))
        for c, frag in f.rules.get(kind, ()):
            for c2, frag2 in _apply_into_fragment(g, (c, frag)):
                terms.append((-sign * c2, frag2))
        rules[kind] = terms
    return Operator(
        "[%s,%s]" % (f.name, g.name),
        f.sig,
        f.grade + g.grade,
        rules,
        adds_iota=f.adds_iota or g.adds_iota,
    )


# ---------------------------------------------------------------------------
# builtins


_BUILTINS = {}


def builtin(name, sig):
    """Memoized named operator on the given signature."""
    key = (name, sig.name)
    op = _BUILTINS.get(key)
    if op is None:
        op = _make_builtin(name, sig)
        _BUILTINS[key] = op
    return op


def _make_builtin(name, sig):
    from .diagrams import SpaceSignature

    base = SpaceSignature(sig.name)
    kinds = base.kinds
    if name == "d":
        if F in kinds:
            # conjugate of the plain differential under the F basis change:
            # F legs map to a bracket with the curvature piece re-expanded
            rules = {
                G1: [(Fraction(1), TO_F), (Fraction(1, 2), FORK)],
                F: [
                    (Fraction(-1, 2), _fork2(F, G1)),
                    (Fraction(1, 2), _fork2(G1, F)),
                    (Fraction(-1, 4), _fork2((G1, G1), G1)),
                    (Fraction(1, 4), _fork2(G1, (G1, G1))),
                ],
            }
        else:
            rules = {G1: [(Fraction(1), TO_FAT)], G2: []}
        return Operator(name, base, 1, rules)
    if name == "iota":
        if F in kinds:
            rules = {G1: [(Fraction(1), CAP)], F: []}
        else:
            rules = {G1: [(Fraction(1), CAP)], G2: [(Fraction(1), IOTA_FORK)]}
        return Operator(name, base, -1, rules, adds_iota=True)
    if name == "t":
        if base.name != "W":
            raise SignatureError("t is defined on W")
        return Operator(name, base, -1, {G1: [], G2: [(Fraction(1), TO_G1)]})
    if name == "d_T":
        if base.name not in ("T", "T_dR"):
            raise SignatureError("d_T is defined on T and T_dR")
        return Operator(name, base, 1, {G1: [(Fraction(1), TO_FAT)], G2: []})
    if name == "iota_T":
        if base.name not in ("T", "T_dR"):
            raise SignatureError("iota_T is defined on T and T_dR")
        return Operator(
            name,
            base,
            -1,
            {G1: [(Fraction(1), CAP)], G2: [(Fraction(1), IOTA_FORK)]},
            adds_iota=True,
        )
    if name == "d_bullet":
        if base.name != "T_dR":
            raise SignatureError("d_bullet is defined on T_dR")
        return Operator(
            name,
            base,
            1,
            {G1: [], G2: []},
            disc_rules={"o": [(Fraction(1), (-1, 1))], "x": []},
        )
    if name == "d_TdR":
        return OperatorSum("d_TdR", [builtin("d_T", sig), builtin("d_bullet", sig)])
    if name == "iota_wedge":
        if base.name != "W_wedge":
            raise SignatureError("iota_wedge is defined on W_wedge")
        return Operator(name, base, -1, {G1: [(Fraction(1), CAP)], F: []}, adds_iota=True)
    raise SignatureError("no builtin operator %r on %s" % (name, sig.name))


class OperatorSum:
    def __init__(self, name, parts):
        self.name = name
        self.parts = parts
        self.sig = parts[0].sig
        self.grade = parts[0].grade
        self.adds_iota = parts[0].adds_iota

    def apply(self, s):
        out = self.parts[0].apply(s)
        for part in self.parts[1:]:
            out = out + part.apply(s)
        return out

    def __repr__(self):
        return "OperatorSum(%s)" % self.name


def contracting_homotopy_s(s):
    """The W contraction: s(D) = t(D) / (number of legs of D)."""
    if s.signature.name != "W":
        raise SignatureError("the contracting homotopy lives on W")
    t = builtin("t", s.signature)
    out = FormalSum.zero(s.signature)
    for d, coeff in s:
        n = d.n_legs
        if n == 0:
            raise DiagramError("contracting homotopy undefined on zero-leg terms")
        single = FormalSum(s.signature, {d: coeff * Fraction(1, n)}, _canonical=True)
        out = out + t.apply(single)
    return out
