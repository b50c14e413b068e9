"""Independent brute-force Cohen's kappa oracle.

Kept deliberately dumb and exact (Fraction arithmetic, no shared code with
the package) so the library implementation is checked against first
principles.
"""

from fractions import Fraction


def kappa_oracle(pairs):
    """Return (kappa or None, degenerate) from raw (a, b) score pairs."""
    n = len(pairs)
    if n == 0:
        raise ValueError("no pairs")
    agree = 0
    for a, b in pairs:
        if a == b:
            agree += 1
    po = Fraction(agree, n)

    categories = sorted({a for a, _ in pairs} | {b for _, b in pairs})
    pe = Fraction(0)
    for c in categories:
        pa = Fraction(sum(1 for a, _ in pairs if a == c), n)
        pb = Fraction(sum(1 for _, b in pairs if b == c), n)
        pe += pa * pb
    if pe == 1:
        return None, True
    return float((po - pe) / (1 - pe)), False
