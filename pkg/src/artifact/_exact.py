"""Exact rational arithmetic for scheme constants and decision regions.

Burst positions in the variable-spacing scheme grow geometrically with the
message index and overflow 2**53 long before the message count gets
interesting, so anything that is eventually compared against an integer
stream position is computed with Fractions over the binary values of the
float inputs.  Floats are only used for rough bracketing; membership and
floor/ceil decisions are exact.
"""

from __future__ import annotations

import math
from fractions import Fraction


def frac(x) -> Fraction:
    """Exact Fraction of an int or float (binary value, not decimal text)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot convert non-finite value {x!r} to a fraction")
    return Fraction(x)


def floor_frac(q: Fraction) -> int:
    return q.numerator // q.denominator


def ceil_frac(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def floor_sqrt_frac(q: Fraction) -> int:
    """floor(sqrt(q)) for a nonnegative rational, exactly."""
    if q < 0:
        raise ValueError("square root of a negative value")
    # floor(sqrt(n/d)) == isqrt(n*d) // d
    return math.isqrt(q.numerator * q.denominator) // q.denominator


def floor_minus_sqrt(x: Fraction, q: Fraction) -> int:
    """floor(x - sqrt(q)) for rationals, q >= 0, exactly."""
    if q < 0:
        raise ValueError("square root of a negative value")
    if q == 0:
        return floor_frac(x)

    def fits(j: int) -> bool:
        # j <= x - sqrt(q)  <=>  sqrt(q) <= x - j  <=>  x - j >= 0 and q <= (x-j)^2
        d = x - j
        return d >= 0 and q <= d * d

    j = math.floor(float(x) - math.sqrt(float(q)))
    while not fits(j):
        j -= 1
    while fits(j + 1):
        j += 1
    return j


def ge_sqrt(t: Fraction, q: Fraction) -> bool:
    """Exact test of t >= sqrt(q), q >= 0."""
    if q < 0:
        raise ValueError("square root of a negative value")
    return t >= 0 and t * t >= q


def ge_sum_sqrt(t: Fraction, a: Fraction, b: Fraction) -> bool:
    """Exact test of t >= sqrt(a) + sqrt(b), a, b >= 0."""
    if a < 0 or b < 0:
        raise ValueError("square root of a negative value")
    if t < 0:
        return a == 0 and b == 0 and t >= 0
    s = t * t - a - b
    return s >= 0 and s * s >= 4 * a * b


def ints_in_open(center: Fraction, radius_sq: Fraction, lo: int = 1) -> tuple[int, ...]:
    """Integers >= lo strictly inside (center - r, center + r), r = sqrt(radius_sq).

    radius_sq == 0 degenerates to the closed singleton {center} when the
    center itself is an integer (the jitter-free case); the open interval
    would otherwise be empty and the singleton is the intended region.
    """
    if radius_sq < 0:
        raise ValueError("negative squared radius")
    if radius_sq == 0:
        if center.denominator == 1 and center >= lo:
            return (int(center),)
        return ()
    r = math.sqrt(float(radius_sq))
    first = max(lo, math.floor(float(center) - r) - 1)
    last = math.ceil(float(center) + r) + 1
    out = []
    for k in range(first, last + 1):
        d = Fraction(k) - center
        if d * d < radius_sq:
            out.append(k)
    return tuple(out)


def multiples_in_open(step: int, center: Fraction, radius_sq: Fraction,
                      lo: int = 1) -> tuple[int, ...]:
    """Multiples of ``step`` (>= lo) strictly inside the open interval around center."""
    if step < 1:
        raise ValueError("step must be a positive integer")
    if radius_sq < 0:
        raise ValueError("negative squared radius")
    if radius_sq == 0:
        if center.denominator == 1:
            c = int(center)
            if c >= lo and c % step == 0:
                return (c,)
        return ()
    r = math.sqrt(float(radius_sq))
    kfirst = max((lo + step - 1) // step, math.floor((float(center) - r) / step) - 1)
    klast = math.ceil((float(center) + r) / step) + 1
    out = []
    for k in range(max(kfirst, 1), klast + 1):
        v = k * step
        d = Fraction(v) - center
        if d * d < radius_sq:
            out.append(v)
    return tuple(out)


def multiples_between(step: int, lo: Fraction, hi: Fraction) -> tuple[int, ...]:
    """Multiples of ``step`` strictly inside (lo, hi), exactly."""
    if step < 1:
        raise ValueError("step must be a positive integer")
    kfirst = floor_frac(lo / step)  # k*step <= lo for this k
    klast = ceil_frac(hi / step)
    out = []
    for k in range(max(kfirst, 1), klast + 1):
        v = Fraction(k * step)
        if lo < v < hi:
            out.append(k * step)
    return tuple(out)
