"""Executable certificates for decomposition-induced degenerate pullbacks.

Given rational maps s, g and a finite sphere set A with

    V_s contained in A   and   V_g union g(A) contained in s^-1(A),

the composite f = g o s has finite postcritical set squeezed between
V_g union g(V_s) and B = V_g union g(A), and the pullback dynamics of f
factor through a space of dimension |A| - 3 (a single point when |A| = 3).
``check_conditions`` verifies exactly those inclusions numerically and
reports the resulting dimension bound; the example factories build the
quartic instance, the one-parameter family s = z^n with
g = ((n+1)z - z^(n+1))/n, and the skinny variants s = z^k, g = g_n with
A the m-th roots of unity plus {0, inf} (n = k*m).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

from .polyarith import (
    INF,
    ComplexPoly,
    RationalMap,
    chordal,
    is_inf,
    sphere_key,
)

#: chordal tolerance for set membership on the sphere
MEMBERSHIP_TOL = 1e-9


@dataclass(frozen=True)
class DecompositionInstance:
    name: str
    s: RationalMap
    g: RationalMap
    A: tuple[complex, ...]


@dataclass
class PostcriticalResult:
    closed: bool
    points: tuple[complex, ...]
    steps: int
    reason: str = ""

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class CertificateReport:
    ok: bool
    failures: list[str] = field(default_factory=list)
    v_s: tuple[complex, ...] = ()
    v_g: tuple[complex, ...] = ()
    g_of_a: tuple[complex, ...] = ()
    s_preimage_a: tuple[complex, ...] = ()
    B: tuple[complex, ...] = ()
    bound: int = 0
    constant: bool = False
    lower_sandwich: tuple[complex, ...] = ()
    postcritical: PostcriticalResult | None = None
    sandwich_ok: bool = False


def _in_set(z: complex, points, tol: float) -> bool:
    return any(chordal(z, p) <= tol for p in points)


def _merge(points, tol: float) -> tuple[complex, ...]:
    out: list[complex] = []
    for p in points:
        if not _in_set(p, out, tol):
            out.append(p)
    out.sort(key=sphere_key)
    return tuple(out)


def _subset(sub, sup, tol: float):
    for z in sub:
        if not _in_set(z, sup, tol):
            return False, z
    return True, None


def roots_of_unity(n: int) -> tuple[complex, ...]:
    """n-th roots of unity by repeated multiplication, renormalised once so
    set-equality checks stay tight for moderate n."""
    base = cmath.exp(2j * cmath.pi / n)
    out = [1 + 0j]
    for _ in range(n - 1):
        z = out[-1] * base
        out.append(z / abs(z))
    return tuple(out)


def check_conditions(inst: DecompositionInstance, tol: float = MEMBERSHIP_TOL) -> CertificateReport:
    """Verify the two inclusions and report the dimension bound.

    On success the report carries B = V_g union g(A), the postcritical set
    of the composite with the sandwich check, and the verdict "constant"
    when |A| = 3.  On failure the offending inclusion and point are listed.
    """
    rep = CertificateReport(ok=True)
    if len(inst.A) < 3:
        rep.ok = False
        rep.failures.append(f"|A| = {len(inst.A)} < 3")
        return rep

    rep.v_s = _merge(inst.s.critical_values(), tol)
    rep.v_g = _merge(inst.g.critical_values(), tol)
    rep.g_of_a = _merge([inst.g.eval(a) for a in inst.A], tol)
    pre: list[complex] = []
    for a in inst.A:
        pre.extend(z for z, _ in inst.s.preimages(a))
    rep.s_preimage_a = _merge(pre, tol)

    ok1, bad1 = _subset(rep.v_s, inst.A, tol)
    if not ok1:
        rep.ok = False
        rep.failures.append(
            f"critical values of s not inside A: offending point {_fmt(bad1)}"
        )
    rep.B = _merge(list(rep.v_g) + list(rep.g_of_a), tol)
    ok2, bad2 = _subset(rep.B, rep.s_preimage_a, tol)
    if not ok2:
        rep.ok = False
        rep.failures.append(
            "V_g union g(A) not inside s^-1(A): offending point " + _fmt(bad2)
        )
    rep.bound = len(inst.A) - 3
    rep.constant = len(inst.A) == 3

    if rep.ok:
        composite = inst.g.compose(inst.s)
        rep.postcritical = compute_postcritical(composite)
        g_of_vs = [inst.g.eval(v) for v in rep.v_s]
        rep.lower_sandwich = _merge(list(rep.v_g) + g_of_vs, tol)
        if rep.postcritical.closed:
            lo_ok, _ = _subset(rep.lower_sandwich, rep.postcritical.points, tol)
            hi_ok, _ = _subset(rep.postcritical.points, rep.B, tol)
            rep.sandwich_ok = lo_ok and hi_ok
            if not rep.sandwich_ok:
                rep.ok = False
                rep.failures.append("postcritical sandwich violated")
        else:
            rep.ok = False
            rep.failures.append(
                f"postcritical set did not close: {rep.postcritical.reason}"
            )
    return rep


def _fmt(z) -> str:
    if z is None:
        return "?"
    if is_inf(z):
        return "inf"
    return f"{z.real:.6g}{z.imag:+.6g}i"


# ----------------------------------------------------------------------
# postcritical sets
# ----------------------------------------------------------------------

def compute_postcritical(
    fmap: RationalMap, tol: float = MEMBERSHIP_TOL, max_steps: int = 64
) -> PostcriticalResult:
    """Forward-close the critical values of a rational map.

    Points are merged chordally at tol, each set member is expanded exactly
    once, and closure is rejected (NotClosed) when the evidence says an
    orbit converged instead of landing:

    * a finite point may only step to (or merge with) infinity through an
      actual pole of the map;
    * a cycle of the induced finite dynamics whose multiplier sits strictly
      between 0 and 1 would be attracting without being superattracting,
      which a finite forward-invariant critical orbit cannot produce.
    """
    d = fmap.degree
    if d < 1:
        raise ValueError("constant map")
    poles = [z for z, _ in fmap.preimages(INF) if not is_inf(z)]
    crit = fmap.critical_points()

    points: list[complex] = []
    frontier: list[complex] = []
    for z, _ in crit:
        w = fmap.eval(z)
        if not _in_set(w, points, tol):
            points.append(w)
            frontier.append(w)

    steps = 0
    while frontier:
        steps += 1
        if steps > max_steps:
            return PostcriticalResult(
                False, tuple(points), steps, "still growing at the step limit"
            )
        new_frontier: list[complex] = []
        for z in frontier:
            w = fmap.eval(z)
            # anything chordally within tol of infinity counts as infinity,
            # which a finite point can only reach through a pole
            if is_inf(w) or abs(w) > 2.0 / tol:
                if not (is_inf(z) or _in_set(z, poles, 1e-6)):
                    return PostcriticalResult(
                        False,
                        tuple(points),
                        steps,
                        "an orbit ran off to infinity without passing "
                        "through a pole (escape, not landing)",
                    )
                w = INF
            if not _in_set(w, points, tol):
                points.append(w)
                new_frontier.append(w)
        frontier = new_frontier

    verdict = _reject_creeping_closure(fmap, points, crit, tol)
    if verdict:
        return PostcriticalResult(False, tuple(points), steps, verdict)
    pts = tuple(sorted(points, key=sphere_key))
    return PostcriticalResult(True, pts, steps)


def _reject_creeping_closure(fmap, points, crit, tol) -> str:
    """Detect cycles that are attracting but not superattracting: those only
    appear when an orbit crept up on a limit, never in a genuinely finite
    critical orbit."""
    index = {}
    for i in range(len(points)):
        image = fmap.eval(points[i])
        index[i] = min(range(len(points)), key=lambda j: chordal(image, points[j]))
    seen_cycle: set[int] = set()
    crit_pts = [z for z, _ in crit]
    for start in range(len(points)):
        path = []
        cur = start
        visited = {}
        while cur not in visited:
            visited[cur] = len(path)
            path.append(cur)
            cur = index[cur]
        cycle = path[visited[cur]:]
        key = min(cycle)
        if key in seen_cycle:
            continue
        seen_cycle.add(key)
        cyc_pts = [points[i] for i in cycle]
        if any(_in_set(c, cyc_pts, tol) for c in crit_pts):
            continue  # superattracting, fine
        lam = _cycle_multiplier(fmap, cyc_pts)
        if lam is not None and 1e-4 < lam < 1.01:
            return (
                f"cycle through {_fmt(cyc_pts[0])} has multiplier {lam:.4f}: "
                "attracting without a critical point, so an orbit converged "
                "rather than landed"
            )
    return ""


def _cycle_multiplier(fmap: RationalMap, cycle) -> float | None:
    if any(is_inf(z) for z in cycle):
        # derivative of the cycle return map at infinity, in the 1/z chart
        h = 1e-6

        def ret(w: complex) -> complex:
            z = INF if w == 0 else 1.0 / w
            for _ in cycle:
                z = fmap.eval(z)
            return 0j if is_inf(z) else 1.0 / z

        try:
            lam = (ret(complex(h)) - ret(complex(-h))) / (2 * h)
        except ZeroDivisionError:
            return None
        return abs(lam)
    lam = 1 + 0j
    for z in cycle:
        try:
            lam *= fmap.derivative_value(z)
        except ZeroDivisionError:
            return None
    return abs(lam)


# ----------------------------------------------------------------------
# example factories
# ----------------------------------------------------------------------

def _power_map(k: int) -> RationalMap:
    return RationalMap.from_poly(ComplexPoly((0j,) * k + (1 + 0j,)))


def _fixing_polynomial(n: int) -> RationalMap:
    """g_n(z) = ((n+1) z - z^(n+1))/n: critical at every n-th root of unity,
    fixing each of them, with g_n(0) = 0."""
    coeffs = [0j] * (n + 2)
    coeffs[1] = complex((n + 1) / n)
    coeffs[n + 1] = complex(-1.0 / n)
    return RationalMap.from_poly(ComplexPoly(tuple(coeffs)))


def example_quartic() -> DecompositionInstance:
    """s = z^2 and g = 2i (z - (1+i)/2)^2 with A = {0, 1, inf}; the composite
    is the dendrite quartic 2i (z^2 - (1+i)/2)^2."""
    u = (1 + 1j) / 2
    shifted = ComplexPoly((-u, 1 + 0j))
    g = RationalMap.from_poly((shifted * shifted).scale(2j))
    return DecompositionInstance(
        name="quartic",
        s=_power_map(2),
        g=g,
        A=(0j, 1 + 0j, INF),
    )


def example_family(n: int) -> DecompositionInstance:
    """s = z^n, g = g_n, A = {0, 1, inf}; the composite has n + 2 marked
    points and verdict constant."""
    if n < 2:
        raise ValueError("family requires n >= 2")
    return DecompositionInstance(
        name=f"family:{n}",
        s=_power_map(n),
        g=_fixing_polynomial(n),
        A=(0j, 1 + 0j, INF),
    )


@dataclass(frozen=True)
class SkinnyFamily:
    instance: DecompositionInstance
    n: int
    k: int
    m: int
    marked_space_dim: int
    image_dim: int
    codim: int
    A_n: tuple[complex, ...]


def skinny_family(n: int, k: int) -> SkinnyFamily:
    """s = z^k, g = g_n, A = A_m = {0, inf} union the m-th roots of unity
    with m = n/k; the image dimension drops to m - 1 (codimension (k-1)m)."""
    if n < 2 or k < 1 or n % k != 0:
        raise ValueError("need n >= 2 and k dividing n")
    m = n // k
    a_m = (0j, INF) + roots_of_unity(m)
    a_n = tuple(sorted((0j, INF) + roots_of_unity(n), key=sphere_key))
    inst = DecompositionInstance(
        name=f"skinny:{n},{k}",
        s=_power_map(k),
        g=_fixing_polynomial(n),
        A=a_m,
    )
    return SkinnyFamily(
        instance=inst,
        n=n,
        k=k,
        m=m,
        marked_space_dim=n - 1,
        image_dim=m - 1,
        codim=(k - 1) * m,
        A_n=a_n,
    )


def sets_equal(first, second, tol: float = MEMBERSHIP_TOL) -> bool:
    a, _ = _subset(first, second, tol)
    b, _ = _subset(second, first, tol)
    return a and b


# ----------------------------------------------------------------------
# custom instances from a maps file
# ----------------------------------------------------------------------

def parse_instance(text: str, name: str = "custom") -> DecompositionInstance:
    """Strict key-value maps file: lines 's_num', 's_den' (optional),
    'g_num', 'g_den' (optional) with ascending re,im coefficients, and 'A'
    with sphere points ('inf' allowed)."""
    from .polyarith import parse_complex

    fields: dict[str, list[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        key = parts[0]
        if key not in ("s_num", "s_den", "g_num", "g_den", "A"):
            raise ValueError(f"line {lineno}: unknown field {key!r}")
        if key in fields:
            raise ValueError(f"line {lineno}: duplicate field {key!r}")
        if len(parts) < 2:
            raise ValueError(f"line {lineno}: field {key!r} needs values")
        fields[key] = parts[1:]
    for required in ("s_num", "g_num", "A"):
        if required not in fields:
            raise ValueError(f"maps file is missing {required!r}")
    one = ComplexPoly((1 + 0j,))

    def poly(key: str) -> ComplexPoly:
        return ComplexPoly(tuple(parse_complex(tok) for tok in fields[key]))

    s = RationalMap(poly("s_num"), poly("s_den") if "s_den" in fields else one)
    g = RationalMap(poly("g_num"), poly("g_den") if "g_den" in fields else one)
    a = tuple(parse_complex(tok) for tok in fields["A"])
    return DecompositionInstance(name=name, s=s, g=g, A=a)


def load_instance(path) -> DecompositionInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_instance(fh.read(), name=str(path))
