"""Fixed points of the moduli endomorphism and what they recover.

Affine fixed points G(a) = a are found by damped Newton from a
deterministic seed sweep.  The monic normalisation (first marked point at
coordinate 0, monic model polynomial) pins the scale, so the affine
equation is solved directly instead of chasing projective eigendirections.
Each converged point off the collision locus yields a monic polynomial
whose critical orbits are then certified against the input portrait.

``pullback_orbit`` iterates a local inverse branch of the endomorphism:
each step solves G(x_{k+1}) = x_k with Newton seeded at x_k, which keeps
the branch continuous.  Near a fixed class the branch contracts; the
orbit records chart distances so the contraction rate can be read off.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .modulimap import (
    GfMap,
    chart_distance,
    chart_normalize,
    delta_distance,
    eval_Gf,
    jacobian,
    monic_polynomial,
    sample_polydisk,
)
from .polyarith import (
    INF,
    ComplexPoly,
    chordal,
    cluster_roots,
    is_inf,
    polish_root,
    roots,
)
from .portrait import INFINITY_LABEL, RamificationPortrait, validate

#: records closer than this to the collision locus are flagged and skipped
DELTA_FLAG_TOL = 1e-6
#: chart distance below which two fixed points count as the same class
DEDUP_TOL = 1e-6
#: sup norm below which a solution is the trivial fixed point at the origin,
#: which is not a projective class at all (Newton near 0 has residual ~ |a|)
ZERO_CLASS_TOL = 1e-6


class CorruptFixedPoint(RuntimeError):
    """A converged fixed point failed the reconstruction consistency check."""


@dataclass
class FixedPointRecord:
    a: np.ndarray
    residual: float
    on_delta: bool
    newton_steps: int
    recovered_poly: ComplexPoly | None = None
    certified: bool | None = None


@dataclass
class SweepResult:
    records: list[FixedPointRecord]
    seeds_used: int
    converged_seeds: int
    failed_seeds: int

    def off_delta(self) -> list[FixedPointRecord]:
        return [r for r in self.records if not r.on_delta]


def _damped_newton(residual_fn, jac_fn, x0, tol, max_iter):
    """Newton with step halving (up to 20 times) when the residual stalls.

    residual_fn maps x -> H(x); jac_fn maps x -> Jacobian of H.  Returns
    (x, residual_inf_norm, steps, converged)."""
    x = np.array(x0, dtype=complex)
    r = residual_fn(x)
    rnorm = float(np.max(np.abs(r)))
    for step in range(1, max_iter + 1):
        if rnorm <= tol:
            return x, rnorm, step - 1, True
        jac = jac_fn(x)
        try:
            delta = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            return x, rnorm, step - 1, False
        lam = 1.0
        for _ in range(20):
            cand = x + lam * delta
            rc = residual_fn(cand)
            rcnorm = float(np.max(np.abs(rc)))
            if np.isfinite(rcnorm) and rcnorm < rnorm:
                x, r, rnorm = cand, rc, rcnorm
                break
            lam *= 0.5
        else:
            return x, rnorm, step, False
    return x, rnorm, max_iter, rnorm <= tol


def newton_fixed_points(
    gf: GfMap,
    seed_count: int = 200,
    tol: float = 1e-12,
    max_iter: int = 200,
    rng_seed: int = 1,
) -> SweepResult:
    """Sweep deterministic seeds in the radius-2 polydisk for G(a) = a.

    Converged points are re-checked against the fixed-point residual
    independently of Newton's own flag, deduplicated at chart distance
    1e-6 (sorted by residual then position so the reduction order is
    deterministic), and flagged when they sit on the collision locus.
    """
    rng = np.random.default_rng(rng_seed)
    dim = gf.dim

    def residual(a):
        return eval_Gf(gf, a) - a

    def jac_h(a):
        m, _ = jacobian(gf, a)
        return m - np.eye(dim)

    raw: list[FixedPointRecord] = []
    converged = failed = 0
    for _ in range(seed_count):
        seed = sample_polydisk(rng, dim)
        a, rnorm, steps, ok = _damped_newton(residual, jac_h, seed, tol, max_iter)
        recheck = float(np.max(np.abs(eval_Gf(gf, a) - a)))
        if not ok or recheck > tol:
            failed += 1
            continue
        converged += 1
        is_zero = float(np.max(np.abs(a))) < ZERO_CLASS_TOL
        raw.append(
            FixedPointRecord(
                a=a,
                residual=recheck,
                on_delta=is_zero or delta_distance(a) < DELTA_FLAG_TOL,
                newton_steps=steps,
            )
        )

    raw.sort(key=lambda r: (r.residual,) + tuple(x for z in r.a for x in (z.real, z.imag)))
    kept: list[FixedPointRecord] = []
    for rec in raw:
        if any(_same_class(rec.a, k.a) for k in kept):
            continue
        kept.append(rec)
    kept.sort(key=lambda r: tuple(x for z in r.a for x in (z.real, z.imag)))
    return SweepResult(kept, seed_count, converged, failed)


def _same_class(a, b) -> bool:
    na, nb = float(np.max(np.abs(a))), float(np.max(np.abs(b)))
    za, zb = na < ZERO_CLASS_TOL, nb < ZERO_CLASS_TOL
    if za or zb:
        return za and zb
    return chart_distance(a, b) < DEDUP_TOL


def recover_polynomial(gf: GfMap, record: FixedPointRecord, tol: float = 1e-9) -> ComplexPoly:
    """Rebuild the monic polynomial at a fixed point and verify it moves the
    marked coordinates the way the portrait says (F(a_nu(k)) = a_k)."""
    if record.on_delta:
        raise CorruptFixedPoint("fixed point lies on the collision locus")
    f_a = monic_polynomial(gf, record.a)
    full = np.concatenate(([0j], np.asarray(record.a, dtype=complex)))
    for k in range(len(full)):
        got = f_a.eval(full[gf.nu[k]])
        if abs(got - full[k]) > tol * max(1.0, float(np.max(np.abs(full)))):
            raise CorruptFixedPoint(
                f"recovered polynomial misplaces marked point {k}: "
                f"|F(a_nu({k})) - a_{k}| = {abs(got - full[k]):.3e}"
            )
    record.recovered_poly = f_a
    return f_a


# ----------------------------------------------------------------------
# certification of a polynomial against a portrait
# ----------------------------------------------------------------------

@dataclass
class CertificationReport:
    certified: bool
    max_deviation: float
    positions: dict[str, complex] = field(default_factory=dict)
    reason: str = ""


def certify_pcf(
    poly: ComplexPoly,
    portrait: RamificationPortrait,
    tol: float = 1e-9,
    max_iter: int = 256,
) -> CertificationReport:
    """Check that the polynomial's critical orbits realise the portrait.

    Critical points of the polynomial are matched to the portrait's critical
    labels (same multiplicities), then every marked-point arrow is verified
    numerically: the image of each placed label must land on the placed image
    label within tol.  Distinct labels must stay at distinct positions, and
    no undeclared marked point may be critical.
    """
    if poly.degree < 1:
        return CertificationReport(False, float("inf"), reason="constant polynomial")
    report = validate(portrait)
    if portrait.polynomial and poly.degree != portrait.degree:
        return CertificationReport(
            False,
            float("inf"),
            reason=f"degree mismatch: polynomial {poly.degree}, portrait {portrait.degree}",
        )

    dp = poly.derivative()
    if dp.is_zero:
        return CertificationReport(False, float("inf"), reason="derivative vanishes")
    crit: list[tuple[complex, int]] = []
    if dp.degree >= 1:
        for center, mult in cluster_roots(roots(dp, tol=min(tol, 1e-9))):
            crit.append((polish_root(dp, center, mult), mult))
    elif dp.degree == 0:
        crit = []

    finite = portrait.finite_points()
    port_crit = [p for p in finite if p.multiplicity > 0]
    if sorted(m for _, m in crit) != sorted(p.multiplicity for p in port_crit):
        return CertificationReport(
            False,
            float("inf"),
            reason=(
                "critical multiplicities differ: polynomial "
                f"{sorted(m for _, m in crit)}, portrait "
                f"{sorted(p.multiplicity for p in port_crit)}"
            ),
        )

    image = {p.label: p.image_label for p in finite}
    best_reason = "no multiplicity-respecting assignment closes the orbits"
    best_dev = float("inf")

    by_mult: dict[int, list[complex]] = {}
    for z, m in crit:
        by_mult.setdefault(m, []).append(z)
    label_groups: dict[int, list[str]] = {}
    for p in port_crit:
        label_groups.setdefault(p.multiplicity, []).append(p.label)

    for assignment in _assignments(label_groups, by_mult):
        ok, dev, positions, reason = _propagate(
            poly, finite, image, assignment, crit, tol, max_iter
        )
        if ok:
            positions[INFINITY_LABEL] = INF
            return CertificationReport(True, dev, positions)
        if dev < best_dev:
            best_dev, best_reason = dev, reason
    return CertificationReport(False, best_dev, reason=best_reason)


def _assignments(label_groups, by_mult):
    """All bijections portrait-critical-labels -> numeric critical points
    that respect multiplicities (small: portraits carry few criticals)."""
    mults = sorted(label_groups)
    perms_per_mult = [itertools.permutations(by_mult[m]) for m in mults]
    for combo in itertools.product(*perms_per_mult):
        assignment = {}
        for m, perm in zip(mults, combo):
            for label, z in zip(label_groups[m], perm):
                assignment[label] = z
        yield assignment


def _propagate(poly, finite, image, assignment, crit, tol, max_iter):
    positions = dict(assignment)
    deviation = 0.0
    # breadth-first along portrait arrows; each label is evaluated once
    for _ in range(min(max_iter, len(finite) + 1)):
        changed = False
        for p in finite:
            if p.label not in positions:
                continue
            value = poly.eval(positions[p.label])
            target = image[p.label]
            if target == INFINITY_LABEL:
                return False, deviation, positions, "finite label maps to infinity"
            if target in positions:
                gap = chordal(value, positions[target])
                deviation = max(deviation, gap)
                if gap > tol:
                    return (
                        False,
                        deviation,
                        positions,
                        f"orbit of {p.label!r} misses {target!r} by {gap:.3e}",
                    )
            else:
                positions[target] = value
                changed = True
        if not changed:
            break
    missing = [p.label for p in finite if p.label not in positions]
    if missing:
        return (
            False,
            deviation,
            positions,
            f"marked points unreachable from critical orbits: {missing}",
        )
    labels = [p.label for p in finite]
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            if chordal(positions[labels[i]], positions[labels[j]]) <= 100 * tol:
                return (
                    False,
                    deviation,
                    positions,
                    f"labels {labels[i]!r} and {labels[j]!r} collide numerically",
                )
    declared = {label for label, _ in assignment.items()}
    for p in finite:
        if p.label in declared:
            continue
        for z, _ in crit:
            if not is_inf(z) and chordal(positions[p.label], z) <= tol:
                return (
                    False,
                    deviation,
                    positions,
                    f"marked point {p.label!r} is critical but declared with multiplicity 0",
                )
    return True, deviation, positions, ""


# ----------------------------------------------------------------------
# inverse-branch iteration on moduli coordinates
# ----------------------------------------------------------------------

@dataclass
class PullbackOrbit:
    points: list[np.ndarray]
    distances: list[float]
    status: str  # "ok" | "branch_lost" | "stalled"
    steps_completed: int


#: a Newton solution jumping farther than this in the chart means the
#: continuous branch was lost
BRANCH_JUMP_TOL = 0.5


def _chart_preimage(gf: GfMap, target, seed, tol, max_iter):
    """Solve g([v]) = [target] in chart coordinates, Newton-seeded at seed.

    The unknown keeps the seed's pivot coordinate pinned to 1 and the image
    is renormalised by the target's pivot, so the equation stays projective
    and never collapses toward the zero vector the way the raw affine
    system G(a) = target can.
    """
    dim = gf.dim
    p = int(np.argmax(np.abs(seed)))
    q = int(np.argmax(np.abs(target)))
    free = [i for i in range(dim) if i != p]

    def embed(u):
        v = np.empty(dim, dtype=complex)
        v[p] = 1.0
        v[free] = u
        return v

    def residual(u):
        img = eval_Gf(gf, embed(u))
        piv = img[q]
        if abs(piv) < 1e-300:
            return np.full(len(free), 1e6, dtype=complex)
        img = img / piv
        return np.delete(img, q) - np.delete(target, q)

    def jac_h(u):
        m = len(free)
        out = np.empty((m, m), dtype=complex)
        for j in range(m):
            h = 1e-7 * max(1.0, abs(u[j]))
            up, um = u.copy(), u.copy()
            up[j] += h
            um[j] -= h
            out[:, j] = (residual(up) - residual(um)) / (2.0 * h)
        return out

    u0 = np.asarray(seed, dtype=complex)[free] / seed[p]
    u, rnorm, _, ok = _damped_newton(residual, jac_h, u0, tol, max_iter)
    return chart_normalize(embed(u)), rnorm, ok


def pullback_orbit(
    gf: GfMap,
    start,
    steps: int,
    tol: float = 1e-12,
    max_iter: int = 100,
    known_fixed: tuple = (),
) -> PullbackOrbit:
    """Iterate the inverse branch x_{k+1} = g^{-1}(x_k) chosen by continuity.

    Each backward step solves the chart equation g(x_{k+1}) = x_k with
    Newton seeded at x_k; seeding at the previous point selects the branch
    through it.  The orbit stops with status "branch_lost" if the solution
    lands farther than 0.5 from its seed in chart distance (the continuity
    rule cannot certify the branch), or "stalled" if Newton fails.

    distances[k] holds the chart distance from points[k] to the nearest of
    the supplied fixed classes (empty tuple -> empty list of distances).
    """
    x = chart_normalize(start)
    pts = [x]
    dists = []

    def dist_to_fixed(p):
        return min(chart_distance(p, f) for f in known_fixed)

    if known_fixed:
        dists.append(dist_to_fixed(x))
    status = "ok"
    done = 0
    for _ in range(steps):
        target = pts[-1]
        nxt, _, ok = _chart_preimage(gf, target, target, tol, max_iter)
        if not ok:
            status = "stalled"
            break
        if chart_distance(nxt, target) > BRANCH_JUMP_TOL:
            status = "branch_lost"
            break
        pts.append(nxt)
        if known_fixed:
            dists.append(dist_to_fixed(nxt))
        done += 1
    return PullbackOrbit(pts, dists, status, done)


def chart_branch_derivative(gf: GfMap, fixed_class, h: float = 1e-6) -> complex:
    """Finite-difference derivative of the forward chart map at a fixed class
    (one-dimensional charts only); its reciprocal is the inverse-branch
    multiplier used as the contraction oracle."""
    x = chart_normalize(fixed_class)
    if x.shape[0] != 2:
        raise ValueError("chart derivative implemented for n = 1 only")
    pivot = int(np.argmax(np.abs(x)))
    free = 1 - pivot

    def phi(t: complex) -> complex:
        v = x.copy()
        v[free] = t
        img = chart_normalize(eval_Gf(gf, v))
        return img[free]

    t0 = x[free]
    return (phi(t0 + h) - phi(t0 - h)) / (2.0 * h)
