"""Exact rational arithmetic backend.

The equal-shares engine does all price and payment arithmetic in exact
rationals (a price q is the root of a piecewise-linear equation; floats
would break the payment-sum invariants). gmpy2's mpq is used when
available; the stdlib Fraction is the drop-in fallback. Both expose the
same arithmetic surface, so the engine is backend-agnostic.

benchmarks/bench_rational.py compares the two backends.
"""

from fractions import Fraction

try:
    from gmpy2 import mpq as _mpq

    RAT = _mpq
    BACKEND = "gmpy2"
except ImportError:  # pragma: no cover - depends on environment
    RAT = Fraction
    BACKEND = "fractions"


def rat(num, den=1):
    """Exact rational from ints (or from a 'a/b' string)."""
    if isinstance(num, str):
        if "/" in num:
            a, b = num.split("/", 1)
            return RAT(int(a), int(b))
        return RAT(int(num))
    return RAT(num, den)


def rat_str(x) -> str:
    """Canonical 'a/b' (or plain integer) rendering, backend independent."""
    f = Fraction(x.numerator, x.denominator)
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"


def to_money(x, rounding="half-even") -> int:
    """Render an exact rational to integer minor units (round-half-even)."""
    f = Fraction(x.numerator, x.denominator)
    floor, rem = divmod(f.numerator, f.denominator)
    twice = 2 * rem
    if twice < f.denominator:
        return floor
    if twice > f.denominator:
        return floor + 1
    return floor if floor % 2 == 0 else floor + 1
