"""The moduli-space endomorphism attached to an all-periodic polynomial portrait.

A validated portrait with degree d, finite marked points indexed 0..n+1
(the first one pinned to coordinate 0) and index permutation mu compiles
into a homogeneous degree-d map G on C^(n+1):

    G_j(a_1..a_{n+1}) = F_a(a_{nu(j)}),   j = 1..n+1,

where F_a is the unique monic degree-d polynomial vanishing at a_{nu(0)}
whose critical points are exactly the a_k with multiplicity m_k > 0.  G
descends to an endomorphism of projective n-space; the forbidden locus
(some coordinate zero, or two coordinates equal) is where marked points
collide.

The Jacobian determinant of G equals, up to a portrait-dependent nonzero
constant, the closed-form product

    J(a) = prod_{0 <= i < j <= n+1} (a_i - a_j)^(m_i + m_j),  a_0 = 0,

which is what ``jacobian_constant`` measures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .polyarith import ComplexPoly, expand_from_roots
from .portrait import RamificationPortrait, validate


class HypothesisViolation(ValueError):
    """The portrait does not satisfy the construction hypotheses."""


class NumericalDegeneracy(ArithmeticError):
    """The image shrank below round-off scale; not a mathematical zero."""


#: below this distance from the collision locus a point is reported "on Delta"
ON_DELTA_TOL = 1e-9


@dataclass(frozen=True)
class GfMap:
    """Compiled endomorphism data: degree, dimension, permutation, multiplicities."""

    degree: int
    n: int
    mu: tuple[int, ...]
    nu: tuple[int, ...]
    multiplicities: tuple[int, ...]
    finite_labels: tuple[str, ...]

    @property
    def dim(self) -> int:
        """Number of moving coordinates a_1..a_{n+1}."""
        return self.n + 1


def build_gf(portrait: RamificationPortrait) -> GfMap:
    """Compile a portrait, checking each construction hypothesis by name."""
    report = validate(portrait)
    failed = []
    if not report.polynomial:
        failed.append("portrait is not polynomial")
    if not report.is_permutation:
        failed.append("marked points are not permuted")
    if not report.all_critical_periodic:
        failed.append("not all critical points are periodic")
    if failed:
        raise HypothesisViolation("; ".join(failed))
    assert report.mu is not None and report.nu is not None
    mults = tuple(p.multiplicity for p in portrait.finite_points())
    return GfMap(
        degree=portrait.degree,
        n=report.n,
        mu=report.mu,
        nu=report.nu,
        multiplicities=mults,
        finite_labels=report.finite_labels,
    )


def _full_coordinates(gf: GfMap, a) -> np.ndarray:
    a = np.asarray(a, dtype=complex).reshape(-1)
    if a.shape[0] != gf.dim:
        raise ValueError(f"expected {gf.dim} coordinates, got {a.shape[0]}")
    return np.concatenate(([0j], a))


def monic_polynomial(gf: GfMap, a) -> ComplexPoly:
    """The monic degree-d polynomial for configuration a: vanishes at
    a_{nu(0)}, critical exactly at the a_k with m_k > 0."""
    full = _full_coordinates(gf, a)
    integrand = expand_from_roots(
        [(full[k], m) for k, m in enumerate(gf.multiplicities) if m > 0]
    ).scale(complex(gf.degree))
    return integrand.antiderivative(base=full[gf.nu[0]])


def eval_Gf(gf: GfMap, a) -> np.ndarray:
    """The homogeneous map: component j is F_a evaluated at a_{nu(j)}."""
    full = _full_coordinates(gf, a)
    f_a = monic_polynomial(gf, a)
    return np.array([f_a.eval(full[gf.nu[j]]) for j in range(1, gf.dim + 1)])


def chart_normalize(x) -> np.ndarray:
    """Scale a projective representative so its largest-modulus coordinate is 1."""
    x = np.asarray(x, dtype=complex).reshape(-1)
    mags = np.abs(x)
    pivot = int(np.argmax(mags))
    if mags[pivot] == 0:
        raise ValueError("the zero vector is not a projective point")
    return x / x[pivot]


def chart_distance(x, y) -> float:
    """Sup-norm distance between max-modulus-normalised representatives."""
    return float(np.max(np.abs(chart_normalize(x) - chart_normalize(y))))


def eval_gf_chart(gf: GfMap, x, eps: float = 1e-12) -> np.ndarray:
    """Projective image, renormalised to the max-modulus chart.

    The homogeneous map sends only the origin to the origin, so a vanishing
    image signals round-off, not mathematics: NumericalDegeneracy is raised
    when the image norm falls below eps * |x|^d.
    """
    x = chart_normalize(x)
    g = eval_Gf(gf, x)
    scale = float(np.max(np.abs(x))) ** gf.degree
    if float(np.max(np.abs(g))) < eps * scale:
        raise NumericalDegeneracy("image vanished below round-off scale")
    return chart_normalize(g)


def jacobian(gf: GfMap, a, step: float = 1e-6) -> tuple[np.ndarray, complex]:
    """Central finite-difference Jacobian of G at a, and its determinant.

    The map is polynomial of low degree, so the h^2 truncation term is
    negligible against round-off at the default step; each coordinate uses
    a step scaled by its own magnitude.
    """
    a = np.asarray(a, dtype=complex).reshape(-1)
    m = gf.dim
    jac = np.empty((m, m), dtype=complex)
    for j in range(m):
        h = step * max(1.0, abs(a[j]))
        ap = a.copy()
        am = a.copy()
        ap[j] += h
        am[j] -= h
        jac[:, j] = (eval_Gf(gf, ap) - eval_Gf(gf, am)) / (2.0 * h)
    det = complex(np.linalg.det(jac))
    return jac, det


def closed_form_J(gf: GfMap, a) -> complex:
    """The pairwise-difference product with exponents m_i + m_j (a_0 = 0)."""
    full = _full_coordinates(gf, a)
    m = gf.multiplicities
    out = 1 + 0j
    for i in range(len(full)):
        for j in range(i + 1, len(full)):
            e = m[i] + m[j]
            if e:
                out *= (full[i] - full[j]) ** e
    return out


def closed_form_J_degree(gf: GfMap) -> int:
    m = gf.multiplicities
    return sum(m[i] + m[j] for i in range(len(m)) for j in range(i + 1, len(m)))


def delta_distance(a) -> float:
    """Distance of a projective class from the collision locus.

    After sup-norm normalisation: the minimum over coordinate moduli and
    pairwise coordinate gaps.  Zero exactly on the locus; the zero vector
    counts as on it.
    """
    a = np.asarray(a, dtype=complex).reshape(-1)
    top = float(np.max(np.abs(a)))
    if top == 0.0:
        return 0.0
    a = a / top
    best = float(np.min(np.abs(a)))
    for i in range(a.shape[0]):
        for j in range(i + 1, a.shape[0]):
            best = min(best, abs(a[i] - a[j]))
    return best


def on_delta(a, tol: float = ON_DELTA_TOL) -> bool:
    return delta_distance(a) < tol


@dataclass(frozen=True)
class JacobianCheck:
    constant: complex
    relative_spread: float
    samples_used: int
    degree_J: int


def jacobian_constant(
    gf: GfMap,
    samples: int = 100,
    rng_seed: int = 1,
    step: float = 1e-6,
    delta_floor: float = 0.1,
) -> JacobianCheck:
    """Measure det(Jac G)/J over random off-collision points.

    Draws deterministic points in the polydisk of radius 2, keeps those at
    normalised distance > delta_floor from the collision locus, and returns
    the mean ratio together with its relative spread.  The spread being at
    round-off scale is the quantitative form of "the determinant equals a
    constant times the closed-form product".
    """
    rng = np.random.default_rng(rng_seed)
    ratios = []
    attempts = 0
    while len(ratios) < samples and attempts < 50 * samples:
        attempts += 1
        a = sample_polydisk(rng, gf.dim)
        if delta_distance(a) <= delta_floor:
            continue
        _, det = jacobian(gf, a, step=step)
        j = closed_form_J(gf, a)
        if abs(j) == 0:
            continue
        ratios.append(det / j)
    if len(ratios) < samples:
        raise RuntimeError("could not draw enough off-collision samples")
    arr = np.array(ratios)
    mean = complex(arr.mean())
    spread = float(np.max(np.abs(arr - mean)) / abs(mean))
    return JacobianCheck(
        constant=mean,
        relative_spread=spread,
        samples_used=len(arr),
        degree_J=closed_form_J_degree(gf),
    )


def sample_polydisk(rng: np.random.Generator, dim: int, radius: float = 2.0) -> np.ndarray:
    """Uniform draw from the product of coordinate disks, by rejection;
    deterministic given the generator state."""
    out = np.empty(dim, dtype=complex)
    for k in range(dim):
        while True:
            re, im = rng.uniform(-radius, radius, size=2)
            if re * re + im * im <= radius * radius:
                out[k] = complex(re, im)
                break
    return out
