"""Serialization: round trips and error reporting."""

import pytest

from wheelforge.diagrams import FormalSum, SpaceSignature
from wheelforge.relations import SliceKey, enumerate_slice
from wheelforge.textio import ParseError, parse, serialize
from wheelforge.wheeling import wheel


def test_roundtrip_on_enumerated_slices():
    for name in ("B", "A", "W", "W_tilde", "W_hat_F", "T", "T_dR"):
        sig = SpaceSignature(name)
        kw = {"max_opens": 1, "max_filled": 1} if sig.discs else {}
        bound = 4 if not sig.lines else 3
        for d in enumerate_slice(SliceKey.weight(sig, bound, **kw)):
            s = FormalSum(sig, {d: 1}, _canonical=True)
            assert parse(serialize(s)) == s


def test_roundtrip_iota_variant():
    sig = SpaceSignature("W", iota=True)
    for d in enumerate_slice(SliceKey.weight(sig, 3)):
        s = FormalSum(sig, {d: 1}, _canonical=True)
        assert parse(serialize(s)) == s


def test_empty_sum_parses_to_zero():
    s = parse("space B\nsum\n")
    assert s.is_zero()
    assert s.signature == SpaceSignature("B")


def test_parse_rejects_repeated_half_edge():
    text = """space W
sum
  1 :: legs=[g1,g1] iota=no loops=0 discs=[] verts={} edges={(l1,l1)}
"""
    with pytest.raises(ParseError):
        parse(text)


def test_parse_rejects_unknown_half_edge():
    text = """space W
sum
  1 :: legs=[g1,g1] verts={} edges={(l1,l7)}
"""
    with pytest.raises(ParseError):
        parse(text)


def test_parse_rejects_line_tags_outside_T():
    text = """space W
sum
  1 :: legs=[g1@nc,g1@nc] verts={} edges={(l1,l2)}
"""
    with pytest.raises(ParseError):
        parse(text)


def test_parse_reports_line_numbers():
    text = "space W\nsum\n  1 :: legs=[g9]\n"
    with pytest.raises(ParseError) as err:
        parse(text)
    assert "line 3" in str(err.value)


def test_multiline_terms_and_comments():
    w2 = wheel(2)
    text = serialize(w2)
    # re-wrap the term across lines with a comment
    lines = text.splitlines()
    term = lines[2].strip()
    head, _, tail = term.partition(" verts=")
    wrapped = "\n".join(
        [lines[0], "# a comment", lines[1], "  " + head, "     verts=" + tail]
    )
    assert parse(wrapped) == w2


def test_coefficients_merge_on_parse():
    text = serialize(wheel(2))
    doubled = text + text.split("sum\n", 1)[1]
    assert parse(doubled) == 2 * wheel(2)
