"""Leg codes: packed integers describing a leg's kind and orienting line.

A leg code is ``kind | (line << 2)`` where kind is 1 (plain grade-1 leg),
2 (fat grade-2 leg) or 3 (curvature F leg, also grade 2), and line is
0 (no line tag), 1 (non-commutative line) or 2 (commutative line).
Integer order of the codes doubles as the canonical kind ranking.
"""

G1 = 1
G2 = 2
F = 3

LINE_NONE = 0
LINE_NC = 1
LINE_C = 2

_KIND_NAMES = {G1: "g1", G2: "g2", F: "F"}
_KIND_BY_NAME = {v: k for k, v in _KIND_NAMES.items()}
_LINE_NAMES = {LINE_NONE: "", LINE_NC: "@nc", LINE_C: "@c"}
_LINE_BY_NAME = {"": LINE_NONE, "nc": LINE_NC, "c": LINE_C}


def make_leg(kind, line=LINE_NONE):
    return kind | (line << 2)


def kind_of(code):
    return code & 3


def line_of(code):
    return code >> 2


def grade(code):
    """Leg grade: 1 for plain legs, 2 for fat and F legs."""
    return 1 if (code & 3) == G1 else 2


def with_line(code, line):
    return (code & 3) | (line << 2)


def strip_line(code):
    return code & 3


def leg_name(code):
    return _KIND_NAMES[kind_of(code)] + _LINE_NAMES[line_of(code)]


def leg_from_name(token):
    """Parse tokens like ``g1``, ``g2``, ``F``, ``F@nc``, ``g1@c``."""
    if "@" in token:
        base, line = token.split("@", 1)
    else:
        base, line = token, ""
    if base not in _KIND_BY_NAME:
        raise ValueError("unknown leg kind %r" % token)
    if line not in _LINE_BY_NAME:
        raise ValueError("unknown line tag %r" % token)
    return make_leg(_KIND_BY_NAME[base], _LINE_BY_NAME[line])


def grade_word(codes):
    return sum(grade(c) for c in codes)
