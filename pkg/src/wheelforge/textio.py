"""Line-oriented textual format for formal sums of diagrams.

Grammar (comments start with ``#``)::

    space W
    sum
      1/2 :: legs=[g1,g2] iota=no loops=0 discs=[]
             verts={v1:(h1,h2,h3)} edges={(l1,h1),(l2,h2),(li,h3)}

Leg half-edges are implicitly named l1..ln left to right, the iota
half-edge is ``li``, and vertex ports carry the names listed in ``verts``
(the listed order is the cyclic orientation).  A term may continue over
several lines; a new term starts at the next ``coeff ::`` line.
"""

import re
from fractions import Fraction

from .diagrams import Diagram, DiagramError, FormalSum, SpaceSignature, validate
from .legs import leg_from_name, leg_name


class ParseError(ValueError):
    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = " at line %d" % line
            if column is not None:
                loc += ", column %d" % column
        super().__init__(message + loc)
        self.line = line
        self.column = column


_TERM_RE = re.compile(r"^\s*(-?\d+(?:/\d+)?)\s*::\s*(.*)$")
_FIELD_RE = re.compile(r"(\w+)=(\[[^\]]*\]|\{.*?\}|\S+)")
_VERT_RE = re.compile(r"(\w+)\s*:\s*\(\s*(\w+)\s*,\s*(\w+)\s*,\s*(\w+)\s*\)")
_EDGE_RE = re.compile(r"\(\s*(\w+)\s*,\s*(\w+)\s*\)")


def serialize(s):
    """Render a FormalSum in the textual format (canonical order)."""
    lines = ["space %s" % s.signature.text(), "sum"]
    for d, coeff in sorted(
        s.terms.items(), key=lambda item: (item[0].weight, item[0].legs, item[0].edges)
    ):
        lines.append("  %s :: %s" % (coeff, _serialize_diagram(d)))
    return "\n".join(lines) + "\n"


def _half_edge_names(d):
    names = {}
    for i in range(d.n_legs):
        names[i] = "l%d" % (i + 1)
    if d.iota:
        names[d.n_legs] = "li"
    for k in range(d.nv):
        for j in range(3):
            names[d.base + 3 * k + j] = "h%d" % (3 * k + j + 1)
    return names


def _serialize_diagram(d):
    names = _half_edge_names(d)
    legs = ",".join(leg_name(c) for c in d.legs)
    discs = ",".join(["o"] * d.opens + ["x"] * d.filled)
    fields = [
        "legs=[%s]" % legs,
        "iota=%s" % ("yes" if d.iota else "no"),
        "loops=%d" % d.loops,
        "discs=[%s]" % discs,
    ]
    verts = ",".join(
        "v%d:(h%d,h%d,h%d)" % (k + 1, 3 * k + 1, 3 * k + 2, 3 * k + 3)
        for k in range(d.nv)
    )
    fields.append("verts={%s}" % verts)
    edges = ",".join("(%s,%s)" % (names[a], names[b]) for a, b in d.edges)
    fields.append("edges={%s}" % edges)
    return " ".join(fields)


def parse(text):
    """Parse the textual format into a canonicalized FormalSum."""
    sig = None
    term_blocks = []
    in_sum = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("space"):
            token = stripped[len("space") :].strip()
            try:
                sig = SpaceSignature.parse(token)
            except DiagramError as exc:
                raise ParseError(str(exc), lineno)
            continue
        if stripped == "sum":
            in_sum = True
            continue
        if not in_sum:
            raise ParseError("unexpected content before 'sum' block", lineno)
        m = _TERM_RE.match(line)
        if m:
            term_blocks.append([lineno, m.group(1), m.group(2)])
        else:
            if not term_blocks:
                raise ParseError("continuation line outside a term", lineno)
            term_blocks[-1][2] += " " + stripped
    if sig is None:
        raise ParseError("missing 'space' header")
    out = FormalSum.zero(sig)
    for lineno, coeff_text, body in term_blocks:
        coeff = Fraction(coeff_text)
        d = _parse_diagram(body, sig, lineno)
        try:
            validate(d, sig)
        except DiagramError as exc:
            raise ParseError(str(exc), lineno)
        out.add_raw(d, coeff)
    return out


def _parse_diagram(body, sig, lineno):
    fields = dict((m.group(1), m.group(2)) for m in _FIELD_RE.finditer(body))
    if "legs" not in fields:
        raise ParseError("term missing legs=[...]", lineno)
    legs_body = fields["legs"][1:-1].strip()
    try:
        legs = tuple(
            leg_from_name(tok.strip()) for tok in legs_body.split(",") if tok.strip()
        )
    except ValueError as exc:
        raise ParseError(str(exc), lineno)
    iota = fields.get("iota", "no").lower() in ("yes", "true", "1")
    loops = int(fields.get("loops", "0"))
    discs_body = fields.get("discs", "[]")[1:-1]
    opens = filled = 0
    for tok in discs_body.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok == "o":
            opens += 1
        elif tok == "x":
            filled += 1
        else:
            raise ParseError("unknown disc letter %r" % tok, lineno)
    names = {}
    for i in range(len(legs)):
        names["l%d" % (i + 1)] = i
    if iota:
        names["li"] = len(legs)
    base = len(legs) + (1 if iota else 0)
    verts_body = fields.get("verts", "{}")
    nv = 0
    for m in _VERT_RE.finditer(verts_body):
        ports = m.groups()[1:]
        for j, port in enumerate(ports):
            if port in names:
                raise ParseError(
                    "half-edge name %r repeated in verts" % port, lineno
                )
            names[port] = base + 3 * nv + j
        nv += 1
    edges_body = fields.get("edges", "{}")
    edges = []
    for m in _EDGE_RE.finditer(edges_body):
        a_name, b_name = m.groups()
        if a_name not in names or b_name not in names:
            unknown = a_name if a_name not in names else b_name
            raise ParseError("unknown half-edge %r in edges" % unknown, lineno)
        a, b = names[a_name], names[b_name]
        if a == b:
            raise ParseError("edge with repeated half-edge %r" % a_name, lineno)
        edges.append((min(a, b), max(a, b)))
    if len(set(edges)) != len(edges):
        raise ParseError("duplicate edge", lineno)
    return Diagram(
        legs=legs,
        nv=nv,
        edges=tuple(sorted(edges)),
        iota=iota,
        opens=opens,
        filled=filled,
        loops=loops,
    )
