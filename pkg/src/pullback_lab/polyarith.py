"""Polynomial and rational-map arithmetic over the complex numbers.

Coefficients are stored ascending (index k holds the z^k term) and trailing
zeros are trimmed, so every polynomial has one canonical representation; the
zero polynomial is the empty sequence.  Points on the Riemann sphere are
plain ``complex`` values plus the marker ``INF``.  Rational maps evaluate
homogeneously as [num : den] pairs, so poles and the point at infinity need
no special-casing by callers.

The root finder runs a simultaneous (Aberth-style) iteration on all roots at
once, started deterministically on a circle of Cauchy-bound radius.  Results
are sorted lexicographically by (real, imag), so identical inputs always
produce identical output.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

_EPS = sys.float_info.epsilon

#: Marker for the point at infinity on the Riemann sphere.
INF = complex(math.inf, 0.0)


def is_inf(z: complex) -> bool:
    z = complex(z)
    return math.isinf(z.real) or math.isinf(z.imag)


def chordal(z: complex, w: complex) -> float:
    """Chordal distance on the Riemann sphere; INF is an ordinary point."""
    zi, wi = is_inf(z), is_inf(w)
    if zi and wi:
        return 0.0
    if zi:
        z, w = w, z
        zi, wi = wi, zi
    z = complex(z)
    if wi:
        return 2.0 / math.sqrt(1.0 + abs(z) ** 2)
    w = complex(w)
    return 2.0 * abs(z - w) / math.sqrt((1.0 + abs(z) ** 2) * (1.0 + abs(w) ** 2))


def sphere_key(z: complex):
    """Deterministic sort key placing finite points first, INF last."""
    if is_inf(z):
        return (1, 0.0, 0.0)
    z = complex(z)
    return (0, z.real, z.imag)


class NonConvergence(RuntimeError):
    """The iterative root finder ran out of iterations."""


def _trim(coeffs: Sequence[complex]) -> tuple[complex, ...]:
    cs = [complex(c) for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


@dataclass(frozen=True)
class ComplexPoly:
    """Immutable complex polynomial with ascending coefficients."""

    coeffs: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(self.coeffs))

    @staticmethod
    def of(coeffs: Iterable[complex]) -> "ComplexPoly":
        return ComplexPoly(tuple(coeffs))

    @staticmethod
    def constant(c: complex) -> "ComplexPoly":
        return ComplexPoly((complex(c),))

    @property
    def degree(self) -> int:
        """Degree of the polynomial; the zero polynomial has degree -1."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> complex:
        if self.is_zero:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def eval(self, z: complex) -> complex:
        """Horner evaluation at a finite point."""
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    __call__ = eval

    def eval_many(self, z: np.ndarray) -> np.ndarray:
        """Vectorised Horner evaluation."""
        acc = np.zeros_like(z)
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def derivative(self) -> "ComplexPoly":
        return ComplexPoly(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def antiderivative(self, base: complex = 0j) -> "ComplexPoly":
        """The antiderivative P with P' = self and P(base) = 0."""
        raw = [0j] + [c / (k + 1) for k, c in enumerate(self.coeffs)]
        p = ComplexPoly(tuple(raw))
        shift = p.eval(base)
        return ComplexPoly((raw[0] - shift,) + tuple(raw[1:]))

    def scale(self, c: complex) -> "ComplexPoly":
        return ComplexPoly(tuple(c * a for a in self.coeffs))

    def monic(self) -> "ComplexPoly":
        return self.scale(1.0 / self.leading)

    def __add__(self, other: "ComplexPoly") -> "ComplexPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0j] * (n - len(self.coeffs))
        for k, c in enumerate(other.coeffs):
            a[k] += c
        return ComplexPoly(tuple(a))

    def __neg__(self) -> "ComplexPoly":
        return self.scale(-1.0)

    def __sub__(self, other: "ComplexPoly") -> "ComplexPoly":
        return self + (-other)

    def __mul__(self, other: "ComplexPoly") -> "ComplexPoly":
        if self.is_zero or other.is_zero:
            return ComplexPoly(())
        out = [0j] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return ComplexPoly(tuple(out))

    def pow(self, k: int) -> "ComplexPoly":
        if k < 0:
            raise ValueError("negative power")
        out = ComplexPoly((1 + 0j,))
        for _ in range(k):
            out = out * self
        return out

    def compose(self, inner: "ComplexPoly") -> "ComplexPoly":
        """self(inner(z)) by Horner over polynomial arithmetic."""
        acc = ComplexPoly(())
        for c in reversed(self.coeffs):
            acc = acc * inner + ComplexPoly.constant(c)
        return acc

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            zs = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
            terms.append(f"({format_complex(c)}){zs}" if zs else format_complex(c))
        return " + ".join(terms)


def format_complex(z: complex) -> str:
    """Render a complex value as the 're,im' literal used in files and CLI."""
    if is_inf(z):
        return "inf"
    z = complex(z)
    return f"{z.real:.12g},{z.imag:.12g}"


def parse_complex(text: str) -> complex:
    """Parse the 're,im' literal; 'inf' maps to the infinity marker."""
    t = text.strip()
    if t.lower() == "inf":
        return INF
    if "," in t:
        re_s, im_s = t.split(",", 1)
        return complex(float(re_s), float(im_s))
    return complex(float(t), 0.0)


def expand_from_roots(roots_with_mult: Iterable[tuple[complex, int]]) -> ComplexPoly:
    """Monic polynomial vanishing exactly at the given roots.

    Each (root, multiplicity) pair contributes a factor (z - root)^mult;
    an empty input yields the constant 1.
    """
    out = ComplexPoly((1 + 0j,))
    for root, mult in roots_with_mult:
        if mult < 1:
            raise ValueError(f"multiplicity must be >= 1, got {mult}")
        factor = ComplexPoly((-complex(root), 1 + 0j))
        for _ in range(mult):
            out = out * factor
    return out


def _residual_scale(p: ComplexPoly, z: complex) -> float:
    m = max(1.0, abs(z))
    s = 0.0
    t = 1.0
    for c in p.coeffs:
        s += abs(c) * t
        t *= m
    return max(s, 1.0)


def roots(p: ComplexPoly, tol: float = 1e-9, max_iter: int = 512) -> list[complex]:
    """All complex roots of p, lexicographically sorted by (real, imag).

    Roots at the origin are split off exactly before iterating; the rest are
    found simultaneously.  Multiple roots converge as tight clusters (use
    ``cluster_roots`` to regroup them).  Raises NonConvergence if the
    iteration does not settle, and if any returned root fails the residual
    bound |p(root)| <= tol * scale.
    """
    if p.is_zero:
        raise ValueError("cannot root-find the zero polynomial")
    if p.degree == 0:
        return []
    val = 0
    while p.coeffs[val] == 0:
        val += 1
    found = [0j] * val
    reduced = list(p.coeffs[val:])
    d = len(reduced) - 1
    if d == 1:
        found.append(-reduced[0] / reduced[1])
    elif d >= 2:
        found.extend(_aberth(reduced, max_iter))
    for r in found:
        if abs(p.eval(r)) > tol * _residual_scale(p, r):
            raise NonConvergence(
                f"root {format_complex(r)} has residual above {tol:g}*scale"
            )
    found.sort(key=lambda z: (z.real, z.imag))
    return found


def _aberth(coeffs: list[complex], max_iter: int) -> list[complex]:
    c = np.asarray(coeffs, dtype=complex)
    c = c / c[-1]
    n = len(c) - 1
    dc = c[1:] * np.arange(1, n + 1)
    abs_c = np.abs(c)

    # Deterministic start: circle at the Cauchy root bound, rotated off the
    # axes so symmetric polynomials do not stall in symmetric configurations.
    radius = 1.0 + float(np.max(abs_c[:-1]))
    k = np.arange(n)
    z = radius * np.exp(1j * (2.0 * np.pi * k / n + 0.4 / n + 0.5))

    stop_factor = 4.0 * (n + 1) * _EPS
    done = np.zeros(n, dtype=bool)
    for _ in range(max_iter):
        pv = _horner_vec(c, z)
        bound = _horner_vec(abs_c, np.abs(z)).real
        done = np.abs(pv) <= stop_factor * bound + 1e-300
        if done.all():
            return list(z)
        dv = _horner_vec(dc, z)
        dv = np.where(dv == 0, _EPS, dv)
        w = pv / dv
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        diff = np.where(diff == 0, 1e-12, diff)
        s = (1.0 / diff).sum(axis=1)
        denom = 1.0 - w * s
        denom = np.where(np.abs(denom) < 1e-300, 1e-300, denom)
        z = np.where(done, z, z - w / denom)
    raise NonConvergence(f"Aberth iteration did not converge in {max_iter} steps")


def _horner_vec(c: np.ndarray, z: np.ndarray) -> np.ndarray:
    acc = np.full_like(z, c[-1])
    for k in range(len(c) - 2, -1, -1):
        acc = acc * z + c[k]
    return acc


def cluster_roots(
    rts: Sequence[complex], rel_tol: float = 1e-4
) -> list[tuple[complex, int]]:
    """Group near-coincident roots into (center, multiplicity) pairs.

    A multiple root of multiplicity m comes out of the stopped iteration as
    a cluster of radius roughly (stop_tol)^(1/m), a few 1e-5 for m = 3 at
    coefficient scale 1.  The default tolerance absorbs m <= 3 while keeping
    genuinely distinct roots (separated by >~1e-3) apart; use
    ``polish_root`` on each cluster centre to recover full accuracy.
    """
    m = len(rts)
    parent = list(range(m))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(m):
        for j in range(i + 1, m):
            lim = rel_tol * max(1.0, abs(rts[i]), abs(rts[j]))
            if abs(rts[i] - rts[j]) <= lim:
                parent[find(i)] = find(j)
    groups: dict[int, list[complex]] = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(complex(rts[i]))
    out = []
    for members in groups.values():
        center = sum(members) / len(members)
        out.append((center, len(members)))
    out.sort(key=lambda cm: (cm[0].real, cm[0].imag))
    return out


def polish_root(p: ComplexPoly, z0: complex, mult: int = 1, steps: int = 12) -> complex:
    """Refine a root of known multiplicity by Newton on the (m-1)-th derivative.

    The multiplicity-m root of p is a simple root of p^(m-1), where Newton
    converges quadratically; cluster centroids come in accurate to ~1e-10 and
    leave at machine precision.
    """
    q = p
    for _ in range(mult - 1):
        q = q.derivative()
    dq = q.derivative()
    z = complex(z0)
    for _ in range(steps):
        dv = dq.eval(z)
        if abs(dv) == 0:
            break
        step = q.eval(z) / dv
        if not (math.isfinite(step.real) and math.isfinite(step.imag)):
            break
        z -= step
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            break
    if abs(z - z0) > 1e-2 * max(1.0, abs(z0)):
        return complex(z0)  # refinement wandered off; keep the centroid
    return z


@dataclass(frozen=True)
class RationalMap:
    """Quotient of two polynomials; reduction is never performed silently."""

    num: ComplexPoly
    den: ComplexPoly

    def __post_init__(self):
        if self.den.is_zero:
            raise ValueError("denominator must not be identically zero")

    @staticmethod
    def from_poly(p: ComplexPoly) -> "RationalMap":
        return RationalMap(p, ComplexPoly((1 + 0j,)))

    @property
    def degree(self) -> int:
        return max(self.num.degree, self.den.degree)

    @property
    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    def eval(self, z: complex) -> complex:
        """Value on the Riemann sphere (finite complex or INF).

        Evaluates the normalised homogeneous pair, so poles and arbitrarily
        large inputs are handled without overflow."""
        if is_inf(z):
            dn, dd = self.num.degree, self.den.degree
            if dn > dd:
                return INF
            if dn < dd:
                return 0j
            return self.num.leading / self.den.leading
        z = complex(z)
        s = max(1.0, abs(z))
        u, v = self.eval_homog(z / s, 1.0 / s)
        if abs(v) == 0:
            if abs(u) == 0:
                raise ZeroDivisionError("indeterminate 0/0 (common factor?)")
            return INF
        w = u / v
        if not (math.isfinite(w.real) and math.isfinite(w.imag)):
            return INF  # beyond double range: indistinguishable from infinity
        return w

    __call__ = eval

    def eval_homog(self, u, v):
        """One homogeneous step [u:v] -> [N_h(u,v) : D_h(u,v)].

        Both polynomials are homogenised to the common degree of the map, so
        overflow near poles is avoided by renormalising the pair outside.
        Accepts scalars or numpy arrays.
        """
        d = self.degree
        nu = _homog_eval(self.num.coeffs, d, u, v)
        dv = _homog_eval(self.den.coeffs, d, u, v)
        return nu, dv

    def iterate(self, z: complex, k: int) -> complex:
        for _ in range(k):
            z = self.eval(z)
        return z

    def derivative_value(self, z: complex) -> complex:
        """f'(z) at a finite non-pole point."""
        w = self.wronskian()
        dv = self.den.eval(z)
        return w.eval(z) / (dv * dv)

    def wronskian(self) -> ComplexPoly:
        """num' * den - num * den'; its roots are the finite critical points."""
        return self.num.derivative() * self.den - self.num * self.den.derivative()

    def critical_points(self, tol: float = 1e-9) -> list[tuple[complex, int]]:
        """Critical points with multiplicity, including infinity.

        The finite ones are the roots of the Wronskian (this also catches
        multiple poles); the multiplicity at infinity is the deficit against
        the Riemann-Hurwitz total 2*deg - 2.  Requires num/den coprime.
        """
        d = self.degree
        if d < 1:
            raise ValueError("constant map has no critical points")
        total = 2 * d - 2
        w = self.wronskian()
        out: list[tuple[complex, int]] = []
        finite_count = 0
        if not w.is_zero and w.degree >= 1:
            clusters = cluster_roots(roots(w, tol=tol))
            for center, mult in clusters:
                out.append((polish_root(w, center, mult), mult))
                finite_count += mult
        elif w.is_zero:
            raise ValueError("degenerate map: Wronskian vanishes identically")
        at_inf = total - finite_count
        if at_inf < 0:
            raise ArithmeticError("critical point count exceeds 2d-2; map not reduced?")
        if at_inf > 0:
            out.append((INF, at_inf))
        out.sort(key=lambda pm: sphere_key(pm[0]))
        return out

    def critical_values(self, tol: float = 1e-9) -> list[complex]:
        vals = [self.eval(z) for z, _ in self.critical_points(tol=tol)]
        return _dedupe_sphere(vals, 1e-9)

    def preimages(self, w: complex, tol: float = 1e-9) -> list[tuple[complex, int]]:
        """Solutions of f(z) = w with multiplicity, including infinity."""
        d = self.degree
        if is_inf(w):
            q = self.den
        else:
            q = self.num - self.den.scale(complex(w))
        out: list[tuple[complex, int]] = []
        finite = 0
        if not q.is_zero and q.degree >= 1:
            for center, mult in cluster_roots(roots(q, tol=tol)):
                out.append((polish_root(q, center, mult), mult))
                finite += mult
        at_inf = d - finite
        if at_inf > 0:
            out.append((INF, at_inf))
        out.sort(key=lambda pm: sphere_key(pm[0]))
        return out

    def compose(self, inner: "RationalMap") -> "RationalMap":
        """self o inner as a rational map, cleared of inner denominators."""
        dn = self.degree
        sn, sd = inner.num, inner.den
        num = ComplexPoly(())
        den = ComplexPoly(())
        for k, c in enumerate(self.num.coeffs):
            num = num + (sn.pow(k) * sd.pow(dn - k)).scale(c)
        for k, c in enumerate(self.den.coeffs):
            den = den + (sn.pow(k) * sd.pow(dn - k)).scale(c)
        return RationalMap(num, den)


def _homog_eval(coeffs: tuple[complex, ...], deg: int, u, v):
    # sum_k c_k u^k v^(deg-k), Horner in u with running power of v
    if not coeffs:
        return u * 0
    padded = list(coeffs) + [0j] * (deg + 1 - len(coeffs))
    acc = u * 0 + padded[deg]
    vp = u * 0 + 1.0
    for k in range(deg - 1, -1, -1):
        vp = vp * v
        acc = acc * u + padded[k] * vp
    return acc


def rational_eval(r: RationalMap, z: complex) -> complex:
    return r.eval(z)


def _dedupe_sphere(points: Iterable[complex], tol: float) -> list[complex]:
    out: list[complex] = []
    for p in points:
        if all(chordal(p, q) > tol for q in out):
            out.append(p)
    out.sort(key=sphere_key)
    return out
