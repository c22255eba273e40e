"""Ramification portraits: the combinatorial input for the whole pipeline.

A portrait lists marked points with their images and critical
multiplicities (local degree minus one).  The reserved label ``inf``
denotes the point at infinity and may only appear in polynomial
portraits, where it must be fixed with multiplicity degree-1.

File format (strict, line oriented, ``#`` comments allowed)::

    degree 2
    polynomial true
    point p0 p1 1
    point p1 p2 0
    point p2 p0 0
    point inf inf 1

``point LABEL IMAGE MULT`` lines are kept in file order; the first finite
point listed is pinned to coordinate 0 by downstream modules, so results
are always reported together with this ordering.  Unknown keys, duplicate
labels and repeated scalar keys are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

INFINITY_LABEL = "inf"


class PortraitError(ValueError):
    """Structurally invalid portrait (dangling label, bad multiplicities...)."""


@dataclass(frozen=True)
class MarkedPoint:
    label: str
    image_label: str
    multiplicity: int


@dataclass(frozen=True)
class RamificationPortrait:
    degree: int
    points: tuple[MarkedPoint, ...]
    polynomial: bool

    def labels(self) -> tuple[str, ...]:
        return tuple(p.label for p in self.points)

    def finite_points(self) -> tuple[MarkedPoint, ...]:
        return tuple(p for p in self.points if p.label != INFINITY_LABEL)

    def point(self, label: str) -> MarkedPoint:
        for p in self.points:
            if p.label == label:
                return p
        raise PortraitError(f"no marked point labelled {label!r}")


@dataclass(frozen=True)
class ValidationReport:
    degree: int
    n: int
    polynomial: bool
    all_critical_periodic: bool
    is_permutation: bool
    finite_labels: tuple[str, ...]
    mu: tuple[int, ...] | None
    nu: tuple[int, ...] | None

    def to_text(self) -> str:
        lines = [
            f"degree             d = {self.degree}",
            f"moduli dimension   n = {self.n}",
            f"polynomial           = {str(self.polynomial).lower()}",
            f"all_critical_periodic = {str(self.all_critical_periodic).lower()}",
            f"is_permutation        = {str(self.is_permutation).lower()}",
            f"finite ordering       = {' '.join(self.finite_labels)}",
        ]
        if self.mu is not None and self.nu is not None:
            lines.append("mu (k -> image index) = " + " ".join(map(str, self.mu)))
            lines.append("nu (inverse of mu)    = " + " ".join(map(str, self.nu)))
        return "\n".join(lines)


def _check_structure(portrait: RamificationPortrait) -> None:
    if portrait.degree < 2:
        raise PortraitError(f"degree must be >= 2, got {portrait.degree}")
    labels = portrait.labels()
    if len(set(labels)) != len(labels):
        raise PortraitError("duplicate labels in portrait")
    label_set = set(labels)
    for p in portrait.points:
        if p.image_label not in label_set:
            raise PortraitError(
                f"dangling label: {p.label!r} maps to unknown {p.image_label!r}"
            )
        if p.multiplicity < 0:
            raise PortraitError(f"negative multiplicity at {p.label!r}")
    has_inf = INFINITY_LABEL in label_set
    if has_inf and not portrait.polynomial:
        raise PortraitError("label 'inf' is reserved for polynomial portraits")
    if portrait.polynomial:
        if not has_inf:
            raise PortraitError("polynomial portrait must mark the point 'inf'")
        pi = portrait.point(INFINITY_LABEL)
        if pi.image_label != INFINITY_LABEL:
            raise PortraitError("'inf' must be fixed in a polynomial portrait")
        if pi.multiplicity != portrait.degree - 1:
            raise PortraitError(
                f"'inf' must carry multiplicity d-1 = {portrait.degree - 1}, "
                f"got {pi.multiplicity}"
            )
        finite_sum = sum(p.multiplicity for p in portrait.finite_points())
        if finite_sum != portrait.degree - 1:
            raise PortraitError(
                "finite multiplicities must sum to d-1 for a polynomial "
                f"portrait (got {finite_sum}, need {portrait.degree - 1})"
            )
        for p in portrait.finite_points():
            if p.image_label == INFINITY_LABEL:
                raise PortraitError(
                    f"finite point {p.label!r} cannot map to 'inf' under a polynomial"
                )


def orbit_of(portrait: RamificationPortrait, label: str) -> tuple[int, int]:
    """(tail_length, cycle_length) of the forward orbit of a marked point."""
    portrait.point(label)  # raises on unknown label
    image = {p.label: p.image_label for p in portrait.points}
    seen: dict[str, int] = {}
    cur = label
    step = 0
    while cur not in seen:
        seen[cur] = step
        cur = image[cur]
        step += 1
    tail = seen[cur]
    cycle = step - tail
    return tail, cycle


def mu_nu(portrait: RamificationPortrait) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Index permutation mu with p_mu(k) = f(p_k) over finite points, and its
    inverse nu.  Raises PortraitError when the induced map is not a bijection."""
    _check_structure(portrait)
    finite = portrait.finite_points()
    index = {p.label: k for k, p in enumerate(finite)}
    mu = []
    for p in finite:
        if p.image_label not in index:
            raise PortraitError("finite marked points do not map among themselves")
        mu.append(index[p.image_label])
    if len(set(mu)) != len(mu):
        raise PortraitError("induced map on marked points is not a permutation")
    nu = [0] * len(mu)
    for k, m in enumerate(mu):
        nu[m] = k
    return tuple(mu), tuple(nu)


def validate(portrait: RamificationPortrait) -> ValidationReport:
    """Validate and classify a portrait.

    Structural violations raise PortraitError; the classifications
    (all critical points periodic, induced permutation) are reported as
    booleans because portraits failing them are still legitimate inputs
    for parts of the pipeline.
    """
    _check_structure(portrait)
    finite = portrait.finite_points()
    n = len(portrait.points) - 3

    all_periodic = True
    for p in portrait.points:
        if p.multiplicity > 0:
            tail, _ = orbit_of(portrait, p.label)
            if tail != 0:
                all_periodic = False
                break

    try:
        mu, nu = mu_nu(portrait)
        is_perm = True
    except PortraitError:
        mu, nu = None, None
        is_perm = False

    return ValidationReport(
        degree=portrait.degree,
        n=n,
        polynomial=portrait.polynomial,
        all_critical_periodic=all_periodic,
        is_permutation=is_perm,
        finite_labels=tuple(p.label for p in finite),
        mu=mu,
        nu=nu,
    )


# ----------------------------------------------------------------------
# file format
# ----------------------------------------------------------------------

def parse_portrait(text: str) -> RamificationPortrait:
    degree = None
    polynomial = None
    points: list[MarkedPoint] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        key = fields[0]
        if key == "degree":
            if degree is not None:
                raise PortraitError(f"line {lineno}: duplicate 'degree'")
            if len(fields) != 2:
                raise PortraitError(f"line {lineno}: expected 'degree D'")
            degree = int(fields[1])
        elif key == "polynomial":
            if polynomial is not None:
                raise PortraitError(f"line {lineno}: duplicate 'polynomial'")
            if len(fields) != 2 or fields[1] not in ("true", "false"):
                raise PortraitError(f"line {lineno}: expected 'polynomial true|false'")
            polynomial = fields[1] == "true"
        elif key == "point":
            if len(fields) != 4:
                raise PortraitError(f"line {lineno}: expected 'point LABEL IMAGE MULT'")
            try:
                mult = int(fields[3])
            except ValueError:
                raise PortraitError(f"line {lineno}: multiplicity must be an integer")
            points.append(MarkedPoint(fields[1], fields[2], mult))
        else:
            raise PortraitError(f"line {lineno}: unknown field {key!r}")
    if degree is None:
        raise PortraitError("missing 'degree' field")
    if polynomial is None:
        raise PortraitError("missing 'polynomial' field")
    if not points:
        raise PortraitError("portrait has no marked points")
    return RamificationPortrait(degree, tuple(points), polynomial)


def load_portrait(path) -> RamificationPortrait:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_portrait(fh.read())


def portrait_to_text(portrait: RamificationPortrait) -> str:
    lines = [f"degree {portrait.degree}", f"polynomial {str(portrait.polynomial).lower()}"]
    for p in portrait.points:
        lines.append(f"point {p.label} {p.image_label} {p.multiplicity}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# stock portraits used across tests and the command line
# ----------------------------------------------------------------------

def periodic_quadratic_portrait(period: int) -> RamificationPortrait:
    """Quadratic z^2 + c with a superattracting cycle of the given period:
    finite points p0 -> p1 -> ... -> p0, the critical point p0 carrying
    multiplicity 1."""
    if period < 1:
        raise ValueError("period must be >= 1")
    pts = []
    for k in range(period):
        pts.append(MarkedPoint(f"p{k}", f"p{(k + 1) % period}", 1 if k == 0 else 0))
    pts.append(MarkedPoint(INFINITY_LABEL, INFINITY_LABEL, 1))
    return RamificationPortrait(2, tuple(pts), True)


def rabbit_portrait() -> RamificationPortrait:
    """The period-3 quadratic portrait (rabbit/corabbit/airplane family)."""
    return periodic_quadratic_portrait(3)


def fixed_critical_cubic_portrait() -> RamificationPortrait:
    """Cubic with two finite fixed critical points and one extra fixed
    marked point; the smallest degree-3 all-periodic test case."""
    pts = (
        MarkedPoint("p0", "p0", 1),
        MarkedPoint("p1", "p1", 1),
        MarkedPoint("p2", "p2", 0),
        MarkedPoint(INFINITY_LABEL, INFINITY_LABEL, 2),
    )
    return RamificationPortrait(3, pts, True)


def galois_cubic_portrait() -> RamificationPortrait:
    """Portrait of 3z^2/(2z^3+1): 0 and 1 fixed critical, w <-> wb swapped."""
    pts = (
        MarkedPoint("0", "0", 1),
        MarkedPoint("1", "1", 1),
        MarkedPoint("w", "wb", 1),
        MarkedPoint("wb", "w", 1),
    )
    return RamificationPortrait(3, pts, False)


def dendrite_quartic_portrait() -> RamificationPortrait:
    """Portrait of the quartic 2i(z^2-(1+i)/2)^2: the critical point 0 is
    preperiodic (0 -> -1 -> 1 with 1 fixed), so not all-periodic."""
    pts = (
        MarkedPoint("0", "-1", 1),
        MarkedPoint("-1", "1", 0),
        MarkedPoint("1", "1", 0),
        MarkedPoint("c+", "0", 1),
        MarkedPoint("c-", "0", 1),
        MarkedPoint(INFINITY_LABEL, INFINITY_LABEL, 3),
    )
    return RamificationPortrait(4, pts, True)


def degree6_family_portrait() -> RamificationPortrait:
    """Portrait of z^2(3-z^4)/2: 0, 1 fixed critical; +-i -> -1 -> 1."""
    pts = (
        MarkedPoint("0", "0", 1),
        MarkedPoint("1", "1", 1),
        MarkedPoint("-1", "1", 1),
        MarkedPoint("i", "-1", 1),
        MarkedPoint("-i", "-1", 1),
        MarkedPoint(INFINITY_LABEL, INFINITY_LABEL, 5),
    )
    return RamificationPortrait(6, pts, True)
