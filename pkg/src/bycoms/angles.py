"""Angle helpers shared by the reference engine and the compiled kernel.

Everything here is plain float arithmetic so that ``numba.njit`` can compile the
same source and produce bit-identical results.
"""
import math

TWO_PI = 2.0 * math.pi


def wrap_angle(a):
    """Wrap ``a`` into (-pi, pi]."""
    r = a - TWO_PI * math.floor((a + math.pi) / TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    return r


def angle_between(a, b):
    """Unsigned angle between two directions, in [0, pi]."""
    return abs(wrap_angle(a - b))
