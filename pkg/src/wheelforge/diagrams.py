"""Diagram generators, space signatures and exact formal sums.

Half-edge ids of a diagram with n legs: legs occupy 0..n-1 in leg order,
the iota half-edge (if present) is n, and port j of trivalent vertex k is
``base + 3k + j`` with ``base = n + iota``.  Port order 0,1,2 is the cyclic
orientation of the vertex.  Open and filled discs on the third line of
T_dR diagrams are stored as counts with the convention that the whole disc
word sits to the far left of all legs (any presentation with discs placed
elsewhere is normalized into this form at build time, with signs).
"""

from dataclasses import dataclass
from fractions import Fraction

from . import canon
from .legs import (
    F,
    G1,
    G2,
    LINE_C,
    LINE_NC,
    LINE_NONE,
    grade,
    kind_of,
    line_of,
)


class DiagramError(ValueError):
    pass


class SignatureError(DiagramError):
    pass


@dataclass(frozen=True)
class SpaceSignature:
    """Which relation regime a sum lives in; iota marks the lower row."""

    name: str
    iota: bool = False

    def __post_init__(self):
        if self.name not in _SPACES:
            raise SignatureError("unknown space %r" % self.name)

    @property
    def regime(self):
        return _SPACES[self.name][0]

    @property
    def kinds(self):
        return _SPACES[self.name][1]

    @property
    def lines(self):
        return _SPACES[self.name][2]

    @property
    def discs(self):
        return _SPACES[self.name][3]

    @property
    def loops_ok(self):
        return _SPACES[self.name][4]

    @property
    def relations(self):
        return _SPACES[self.name][5]

    def with_iota(self, flag=True):
        return SpaceSignature(self.name, flag)

    def text(self):
        return self.name + ("_iota" if self.iota else "")

    @staticmethod
    def parse(token):
        token = token.strip()
        iota = False
        if token.endswith("_iota"):
            token, iota = token[: -len("_iota")], True
        return SpaceSignature(token, iota)

    def __repr__(self):
        return "SpaceSignature(%s)" % self.text()


# name -> (mobility regime, allowed kinds, lines?, discs?, loops ok?, row relations)
_SPACES = {
    "B": ("free", (G2,), False, False, True, ("ihx",)),
    "A": ("none", (G2,), False, False, False, ("ihx", "stu")),
    "A_loops": ("none", (G2,), False, False, True, ("ihx", "stu")),
    "W": ("free", (G1, G2), False, False, True, ("ihx",)),
    "W_F": ("free", (G1, F), False, False, True, ("ihx",)),
    "W_tilde": ("none", (G1, G2), False, False, True, ("ihx",)),
    "W_hat": ("none", (G1, G2), False, False, True, ("ihx", "stu", "mixed", "clifford")),
    "W_hat_F": ("difkind", (G1, F), False, False, True, ("ihx", "stuF", "clifford")),
    "W_wedge": ("wedge", (G1, F), False, False, True, ("ihx", "stuF")),
    "T": ("line", (G1, G2), True, False, True, ("ihx",)),
    "T_dR": ("line", (G1, G2), True, True, True, ("ihx",)),
}

SPACE_NAMES = tuple(_SPACES)


@dataclass(frozen=True)
class Diagram:
    """A single generator: graded legs anchored to a trivalent graph."""

    legs: tuple
    nv: int
    edges: tuple
    iota: bool = False
    opens: int = 0
    filled: int = 0
    loops: int = 0

    @property
    def n_legs(self):
        return len(self.legs)

    @property
    def base(self):
        return len(self.legs) + (1 if self.iota else 0)

    @property
    def n_half_edges(self):
        return self.base + 3 * self.nv

    @property
    def leg_grade(self):
        return sum(grade(c) for c in self.legs) + self.filled

    @property
    def weight(self):
        return len(self.legs) + self.nv + 2 * self.loops

    def partner_map(self):
        partner = [-1] * self.n_half_edges
        for a, b in self.edges:
            partner[a] = b
            partner[b] = a
        return partner

    def is_empty(self):
        return not self.legs and self.nv == 0 and not self.iota and self.loops == 0 \
            and self.opens == 0 and self.filled == 0


EMPTY = Diagram(legs=(), nv=0, edges=())


def validate(d, sig):
    """Structural check; raises DiagramError naming the violated invariant."""
    nh = d.n_half_edges
    seen = [0] * nh
    for a, b in d.edges:
        if not (0 <= a < nh and 0 <= b < nh):
            raise DiagramError("edge endpoint %r out of range" % ((a, b),))
        if a == b:
            raise DiagramError("edge with repeated half-edge %d" % a)
        seen[a] += 1
        seen[b] += 1
    for h, c in enumerate(seen):
        if c != 1:
            raise DiagramError("half-edge %d appears in %d edges, expected 1" % (h, c))
    for code in d.legs:
        if kind_of(code) not in sig.kinds:
            raise DiagramError(
                "leg kind %d not allowed in %s" % (kind_of(code), sig.text())
            )
        if sig.lines:
            if line_of(code) == LINE_NONE:
                raise DiagramError("missing line tag in %s" % sig.text())
        elif line_of(code) != LINE_NONE:
            raise DiagramError("line tags only allowed in T spaces")
    if d.iota != sig.iota:
        raise DiagramError(
            "diagram %s an iota vertex but signature is %s"
            % ("carries" if d.iota else "lacks", sig.text())
        )
    if (d.opens or d.filled) and not sig.discs:
        raise DiagramError("discs only allowed in T_dR")
    if d.loops and not sig.loops_ok:
        raise DiagramError("closed loops not allowed in %s" % sig.text())
    if d.loops < 0 or d.opens < 0 or d.filled < 0:
        raise DiagramError("negative component count")


def canonicalize(d, sig):
    """Canonical representative and sign, with d == sign * canonical.

    Returns ``(None, 0)`` for zero generators: AS-degenerate diagrams,
    diagrams with two filled discs, and diagrams whose sign orbit contains
    their own negative.
    """
    if d.filled >= 2:
        return None, Fraction(0)
    res = canon.canonical_cached(d.legs, d.nv, d.edges, d.iota, sig.regime)
    if res is None:
        return None, Fraction(0)
    word, edges, sign = res
    out = Diagram(
        legs=word,
        nv=d.nv,
        edges=edges,
        iota=d.iota,
        opens=d.opens,
        filled=d.filled,
        loops=d.loops,
    )
    return out, Fraction(sign)


class FormalSum:
    """Finite rational linear combination of canonical diagrams."""

    __slots__ = ("signature", "terms")

    def __init__(self, signature, terms=None, _canonical=False):
        self.signature = signature
        self.terms = {}
        if terms:
            if _canonical:
                self.terms = dict(terms)
            else:
                for coeff, d in terms:
                    self.add_raw(d, coeff)

    @classmethod
    def zero(cls, sig):
        return cls(sig)

    @classmethod
    def unit(cls, sig):
        """The empty diagram with coefficient one."""
        s = cls(sig)
        s.add_raw(EMPTY, 1)
        return s

    def add_raw(self, d, coeff):
        """Canonicalize d and accumulate coeff * d into the sum."""
        coeff = Fraction(coeff)
        if not coeff:
            return
        c, sign = canonicalize(d, self.signature)
        if c is None:
            return
        cur = self.terms.get(c)
        new = (cur or 0) + coeff * sign
        if new:
            self.terms[c] = new
        elif cur is not None:
            del self.terms[c]

    def add_canonical(self, d, coeff):
        cur = self.terms.get(d)
        new = (cur or 0) + coeff
        if new:
            self.terms[d] = new
        elif cur is not None:
            del self.terms[d]

    def is_zero(self):
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def __eq__(self, other):
        return (
            isinstance(other, FormalSum)
            and self.signature == other.signature
            and self.terms == other.terms
        )

    def __add__(self, other):
        self._check_sig(other)
        out = FormalSum(self.signature, self.terms.items(), _canonical=True)
        for d, c in other.terms.items():
            out.add_canonical(d, c)
        return out

    def __sub__(self, other):
        self._check_sig(other)
        out = FormalSum(self.signature, self.terms.items(), _canonical=True)
        for d, c in other.terms.items():
            out.add_canonical(d, -c)
        return out

    def __neg__(self):
        return self * -1

    def __mul__(self, scalar):
        scalar = Fraction(scalar)
        out = FormalSum(self.signature)
        if scalar:
            out.terms = {d: c * scalar for d, c in self.terms.items()}
        return out

    __rmul__ = __mul__

    def _check_sig(self, other):
        if self.signature != other.signature:
            raise SignatureError(
                "signature mismatch: %s vs %s"
                % (self.signature.text(), other.signature.text())
            )

    def coefficient(self, d):
        return self.terms.get(d, Fraction(0))

    def max_weight(self):
        return max((d.weight for d in self.terms), default=0)

    def validate(self):
        for d in self.terms:
            validate(d, self.signature)
        return self

    def __repr__(self):
        return "FormalSum(%s, %d terms)" % (self.signature.text(), len(self.terms))


# ---------------------------------------------------------------------------
# raw builders and surgery helpers


def chord(code_a, code_b, **kw):
    """Two legs joined by a single edge."""
    return Diagram(legs=(code_a, code_b), nv=0, edges=((0, 1),), **kw)


def shift_half_edges(edges, amount):
    return tuple((a + amount, b + amount) for a, b in edges)


def merge_raw(a, b):
    """Disjoint union presentation: b's legs appended after a's.

    Returns the raw Diagram; at most one operand may carry an iota vertex.
    """
    if a.iota and b.iota:
        raise DiagramError("cannot merge two diagrams with iota vertices")
    na, nb = a.n_legs, b.n_legs
    n = na + nb
    iota = a.iota or b.iota
    base = n + (1 if iota else 0)

    def remap(d, leg_off, vert_off):
        table = {}
        for i in range(d.n_legs):
            table[i] = i + leg_off
        if d.iota:
            table[d.n_legs] = n
        for k in range(d.nv):
            for j in range(3):
                table[d.base + 3 * k + j] = base + 3 * (k + vert_off) + j
        return tuple(
            (min(table[x], table[y]), max(table[x], table[y])) for x, y in d.edges
        )

    edges = remap(a, 0, 0) + remap(b, na, a.nv)
    return Diagram(
        legs=a.legs + b.legs,
        nv=a.nv + b.nv,
        edges=tuple(sorted(edges)),
        iota=iota,
        opens=a.opens + b.opens,
        filled=a.filled + b.filled,
        loops=a.loops + b.loops,
    )


def glue_leg_pairs(d, pairs):
    """Join the edges hanging off the given leg position pairs.

    Every listed leg is consumed.  Chains of glued trivial chords that
    close up count as new vertex-free loops.  Returns the raw Diagram.
    """
    partner = d.partner_map()
    glued = {}
    for x, y in pairs:
        glued[x] = y
        glued[y] = x
    loops = d.loops
    new_edges = []
    seen = set()
    for a, b in d.edges:
        for h in (a, b):
            if h in seen or h in glued:
                continue
            # walk through glued legs until a surviving half-edge appears
            cur = partner[h]
            closed = False
            while cur in glued:
                nxt = partner[glued[cur]]
                if nxt == h:
                    closed = True
                    break
                cur = nxt
            if closed:
                continue
            seen.add(h)
            seen.add(cur)
            new_edges.append((h, cur))
    # loops: glued cycles never touching a surviving half-edge
    visited = set()
    for x in glued:
        if x in visited:
            continue
        cur, cycle = x, True
        chain = []
        while True:
            chain.append(cur)
            visited.add(cur)
            nxt = partner[glued[cur]]
            if nxt == x:
                break
            if nxt not in glued:
                cycle = False
                break
            cur = nxt
        if cycle:
            # each half-edge of the cycle visited once; a closed cycle of k
            # glued pairs contributes one loop component
            loops += 1
            for h in chain:
                visited.add(h)
                visited.add(glued[h])
    # compact ids: drop consumed legs
    keep = [i for i in range(d.n_legs) if i not in glued]
    table = {old: new for new, old in enumerate(keep)}
    n = len(keep)
    base_new = n + (1 if d.iota else 0)
    if d.iota:
        table[d.n_legs] = n
    for k in range(d.nv):
        for j in range(3):
            table[d.base + 3 * k + j] = base_new + 3 * k + j
    edges = tuple(
        sorted((min(table[a], table[b]), max(table[a], table[b])) for a, b in new_edges)
    )
    return Diagram(
        legs=tuple(d.legs[i] for i in keep),
        nv=d.nv,
        edges=edges,
        iota=d.iota,
        opens=d.opens,
        filled=d.filled,
        loops=loops,
    )


def permute_legs_raw(d, perm):
    """Raw diagram with leg anchors rearranged; perm[p] = original leg index."""
    n = d.n_legs
    inv = [0] * n
    for p, o in enumerate(perm):
        inv[o] = p
    table = {i: inv[i] for i in range(n)}
    edges = tuple(
        sorted(
            (
                min(table.get(a, a), table.get(b, b)),
                max(table.get(a, a), table.get(b, b)),
            )
            for a, b in d.edges
        )
    )
    return Diagram(
        legs=tuple(d.legs[o] for o in perm),
        nv=d.nv,
        edges=edges,
        iota=d.iota,
        opens=d.opens,
        filled=d.filled,
        loops=d.loops,
    )


def koszul_sign(perm, grades):
    """Sign of rearranging a graded word by perm (perm[p] = original index)."""
    sign = 1
    n = len(perm)
    for p in range(n):
        if grades[perm[p]] & 1 == 0:
            continue
        for q in range(p):
            if perm[q] > perm[p] and grades[perm[q]] & 1:
                sign = -sign
    return sign


def relabel_legs_raw(d, mapper):
    return Diagram(
        legs=tuple(mapper(c) for c in d.legs),
        nv=d.nv,
        edges=d.edges,
        iota=d.iota,
        opens=d.opens,
        filled=d.filled,
        loops=d.loops,
    )


# ---------------------------------------------------------------------------
# products


def juxtapose(a, b):
    """Concatenation product on ordered-leg signatures."""
    sig = a.signature
    if sig != b.signature:
        raise SignatureError("juxtapose needs matching signatures")
    if sig.name not in ("A", "A_loops", "W_tilde", "W_hat", "W_hat_F", "T", "T_dR"):
        raise SignatureError("juxtaposition undefined on %s" % sig.text())
    out = FormalSum.zero(sig)
    for da, ca in a:
        for db, cb in b:
            out.add_raw(merge_raw(da, db), ca * cb)
    return out


def disjoint_union(a, b):
    sig = a.signature
    if sig != b.signature or sig.name != "B":
        raise SignatureError("disjoint union is the B product")
    out = FormalSum.zero(sig)
    for da, ca in a:
        for db, cb in b:
            out.add_raw(merge_raw(da, db), ca * cb)
    return out
