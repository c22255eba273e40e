"""Independent oracles shared by the test suite.

These deliberately avoid the library's own root finder and evaluators, so
that the quantities they produce can stand as expected values for it.
"""

import math

# Roots of c^3 + 2c^2 + c + 1, computed by bisection on the real root and
# exact deflation of the remaining quadratic (frozen below, re-derivable
# with period3_parameters()).  These are the quadratic parameters with a
# superattracting 3-cycle.
AIRPLANE_C = -1.754877666246693
RABBIT_C = complex(-0.12256116687665353, 0.7448617666197442)
CORABBIT_C = RABBIT_C.conjugate()


def period3_parameters():
    """Re-derive the three parameters from scratch.

    Bisection brackets the real root of c^3 + 2c^2 + c + 1 in [-2, -1];
    dividing it out leaves c^2 + (2+r)c - 1/r (sum of roots -2, product of
    roots -1), solved in closed form.
    """

    def p(c):
        return ((c + 2.0) * c + 1.0) * c + 1.0

    lo, hi = -2.0, -1.0
    assert p(lo) < 0 < p(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if p(lo) * p(mid) <= 0:
            hi = mid
        else:
            lo = mid
    r = 0.5 * (lo + hi)
    b = 2.0 + r
    g = -1.0 / r
    re = -b / 2.0
    im = math.sqrt(4.0 * g - b * b) / 2.0
    return [complex(r, 0.0), complex(re, -im), complex(re, im)]


def rabbit_image_by_hand(a1, a2):
    """The endomorphism of the period-3 quadratic portrait, expanded by hand:
    F_a(z) = z^2 - a2^2, so G(a) = (F(0), F(a1)) = (-a2^2, a1^2 - a2^2)."""
    return (-(a2 * a2), a1 * a1 - a2 * a2)


def rabbit_jacobian_by_hand(a1, a2):
    """Hand differentiation of the map above: [[0, -2a2], [2a1, -2a2]]."""
    return [[0.0, -2.0 * a2], [2.0 * a1, -2.0 * a2]]


def period4_image_by_hand(a1, a2, a3):
    """Same construction for the period-4 quadratic portrait: nu fixes the
    base at a3, so F_a(z) = z^2 - a3^2 and G = (F(0), F(a1), F(a2))."""
    s = a3 * a3
    return (-s, a1 * a1 - s, a2 * a2 - s)


def horner(coeffs_ascending, z):
    acc = 0j
    for c in reversed(coeffs_ascending):
        acc = acc * z + c
    return acc
