"""Sparse exact-rational row reduction.

Rows are dicts mapping column keys to nonzero Fractions.  The reducer keeps
a pivot-normalized row per pivot column; reduction is exact, so membership
in the row span is decided by whether a vector reduces to nothing.
"""

from fractions import Fraction


class RowReducer:
    def __init__(self):
        self.pivots = {}  # pivot column -> normalized row

    @property
    def rank(self):
        return len(self.pivots)

    def reduce(self, row):
        """Residual of row modulo the current span (row is not consumed)."""
        row = dict(row)
        while row:
            col = min(row)
            piv = self.pivots.get(col)
            if piv is None:
                return row
            factor = row[col]
            for c, v in piv.items():
                new = row.get(c, Fraction(0)) - factor * v
                if new:
                    row[c] = new
                else:
                    row.pop(c, None)
        return row

    def add_row(self, row):
        """Reduce and, if independent, install the residual as a pivot row.

        Returns True when the row enlarged the span.
        """
        res = self.reduce(row)
        if not res:
            return False
        col = min(res)
        inv = 1 / res[col]
        self.pivots[col] = {c: v * inv for c, v in res.items()}
        return True

    def contains(self, row):
        return not self.reduce(row)
