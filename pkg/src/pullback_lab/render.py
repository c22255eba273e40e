"""Basin-of-attraction rendering for rational maps.

Every pixel's orbit is iterated homogeneously as a [u : v] pair with
per-step sup-norm renormalisation, so poles and the basin of infinity cost
nothing extra; capture is decided in the chordal metric against the
precomputed attracting cycles.  Output is a binary PPM (P6) written
byte-deterministically; a matplotlib figure of the same labels can be
saved alongside it.

Row blocks may be processed by a thread pool (numpy releases the GIL);
each block writes a disjoint slice of the preallocated label grid, so the
result is identical for any thread count, including 1.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .polyarith import (
    INF,
    ComplexPoly,
    RationalMap,
    chordal,
    is_inf,
    sphere_key,
)

UNRESOLVED = -1

#: env var capping render parallelism; 0 or unset means automatic
THREADS_ENV = "PULLBACKLAB_THREADS"


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "0").strip()
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    if cap <= 0:
        cap = min(os.cpu_count() or 1, 8)
    return max(1, cap)


@dataclass(frozen=True)
class Viewport:
    center: complex
    width: float
    pixels_x: int
    pixels_y: int

    def __post_init__(self):
        if self.width <= 0 or self.pixels_x < 1 or self.pixels_y < 1:
            raise ValueError("viewport needs positive width and dimensions")

    def grid(self) -> np.ndarray:
        """Pixel-center sample points, row 0 at the top of the image."""
        px = self.width / self.pixels_x
        height = px * self.pixels_y
        x0 = self.center.real - self.width / 2.0
        y0 = self.center.imag + height / 2.0
        xs = x0 + (np.arange(self.pixels_x) + 0.5) * px
        ys = y0 - (np.arange(self.pixels_y) + 0.5) * px
        return xs[None, :] + 1j * ys[:, None]


@dataclass(frozen=True)
class Cycle:
    points: tuple[complex, ...]
    multiplier: float

    @property
    def period(self) -> int:
        return len(self.points)


@dataclass
class BasinImage:
    labels: np.ndarray      # int16, UNRESOLVED or cycle index
    iterations: np.ndarray  # uint16 capture times
    cycles: list[Cycle]

    @property
    def unresolved_fraction(self) -> float:
        return float(np.count_nonzero(self.labels == UNRESOLVED) / self.labels.size)

    def label_counts(self) -> dict[int, int]:
        vals, counts = np.unique(self.labels, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, counts)}


def find_attracting_cycles(
    fmap: RationalMap,
    max_period: int = 8,
    tol: float = 1e-9,
    max_iter: int = 2000,
) -> list[Cycle]:
    """Iterate every critical point and collect the attracting cycles hit.

    A cycle is detected by chordal revisit within tol and kept when its
    multiplier (finite-difference return-map derivative) is below 1.
    Dendrite-like maps legitimately yield only the cycle at infinity.
    """
    cycles: list[Cycle] = []
    for z0, _ in fmap.critical_points():
        orbit = [z0]
        z = z0
        found = None
        for _ in range(max_iter):
            z = fmap.eval(z)
            orbit.append(z)
            k = len(orbit) - 1
            for p in range(1, min(max_period, k) + 1):
                if chordal(orbit[k], orbit[k - p]) < tol:
                    found = orbit[k - p + 1 : k + 1]
                    break
            if found:
                break
        if not found:
            continue
        cyc = _canonical_cycle(found)
        if any(_same_cycle(cyc, c.points) for c in cycles):
            continue
        lam = _return_multiplier(fmap, cyc)
        if lam < 1.0:
            cycles.append(Cycle(points=cyc, multiplier=lam))
    cycles.sort(key=lambda c: (c.period, sphere_key(c.points[0])))
    return cycles


def _canonical_cycle(points) -> tuple[complex, ...]:
    k = min(range(len(points)), key=lambda i: sphere_key(points[i]))
    return tuple(points[k:] + points[:k])


def _same_cycle(a, b) -> bool:
    if len(a) != len(b):
        return False
    return all(any(chordal(p, q) < 1e-6 for q in b) for p in a)


def _return_multiplier(fmap: RationalMap, cycle) -> float:
    """|d(f^p)/dz| around the cycle, finite-differenced in a safe chart."""
    p = len(cycle)
    base = cycle[0]
    h = 1e-6
    use_inverted = is_inf(base) or abs(base) > 1.0

    def ret(w: complex) -> complex:
        z = (INF if w == 0 else 1.0 / w) if use_inverted else w
        for _ in range(p):
            z = fmap.eval(z)
        if use_inverted:
            return 0j if is_inf(z) else 1.0 / z
        return z

    w0 = (0j if is_inf(base) else 1.0 / base) if use_inverted else base
    try:
        lam = (ret(w0 + h) - ret(w0 - h)) / (2.0 * h)
    except (ZeroDivisionError, OverflowError):
        return math.inf
    return abs(lam)


def render_basins(
    fmap: RationalMap,
    viewport: Viewport,
    cycles: list[Cycle],
    max_iter: int = 500,
    tol: float = 1e-3,
    threads: int | None = None,
) -> BasinImage:
    """Label every pixel by the first cycle its orbit approaches within tol.

    Pixels still unlabelled after max_iter steps stay UNRESOLVED.  The
    capture test runs before the first step too, so starting on an
    attractor labels immediately.
    """
    if not cycles:
        raise ValueError("no cycles to classify against")
    grid = viewport.grid()
    h, w = grid.shape
    labels = np.full((h, w), UNRESOLVED, dtype=np.int16)
    iters = np.zeros((h, w), dtype=np.uint16)

    nthreads = thread_count() if threads is None else max(1, threads)
    block = max(8, h // (nthreads * 4) or 8)
    rows = [(r, min(r + block, h)) for r in range(0, h, block)]

    def work(span):
        r0, r1 = span
        lab, itr = _classify_block(fmap, grid[r0:r1], cycles, max_iter, tol)
        labels[r0:r1] = lab
        iters[r0:r1] = itr

    if nthreads == 1 or len(rows) == 1:
        for span in rows:
            work(span)
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            list(pool.map(work, rows))
    return BasinImage(labels=labels, iterations=iters, cycles=cycles)


def _classify_block(fmap, grid, cycles, max_iter, tol):
    shape = grid.shape
    u = grid.reshape(-1).astype(complex)
    v = np.ones_like(u)
    n = u.size
    labels = np.full(n, UNRESOLVED, dtype=np.int16)
    iters = np.zeros(n, dtype=np.uint16)

    # flatten cycles into target arrays: finite targets as points, plus a
    # mask of which cycles contain infinity
    targets = []
    for ci, cyc in enumerate(cycles):
        for pt in cyc.points:
            targets.append((ci, pt))

    active = np.arange(n)
    for step in range(max_iter + 1):
        if active.size == 0:
            break
        ua, va = u[active], v[active]
        norm = np.sqrt(np.abs(ua) ** 2 + np.abs(va) ** 2)
        captured = np.full(active.size, UNRESOLVED, dtype=np.int16)
        for ci, pt in targets:
            if is_inf(pt):
                dist = 2.0 * np.abs(va) / norm
            else:
                scale = math.sqrt(1.0 + abs(pt) ** 2)
                dist = 2.0 * np.abs(ua - pt * va) / (norm * scale)
            hit = (dist < tol) & (captured == UNRESOLVED)
            captured[hit] = ci
        newly = captured != UNRESOLVED
        if newly.any():
            idx = active[newly]
            labels[idx] = captured[newly]
            iters[idx] = step
            active = active[~newly]
            ua, va = u[active], v[active]
        if step == max_iter or active.size == 0:
            break
        un, vn = fmap.eval_homog(ua, va)
        mag = np.maximum(np.abs(un), np.abs(vn))
        # a vanishing pair can only come from round-off; freeze those pixels
        dead = mag == 0
        if dead.any():
            mag[dead] = 1.0
        u[active] = un / mag
        v[active] = vn / mag
    return labels.reshape(shape), iters.reshape(shape)


# ----------------------------------------------------------------------
# image output
# ----------------------------------------------------------------------

def write_image(image: BasinImage, palette, path, unresolved_color=(0, 0, 0)) -> None:
    """Write a binary PPM (P6).  Identical input produces identical bytes."""
    if len(palette) < len(image.cycles):
        raise ValueError("palette does not cover all basin labels")
    h, w = image.labels.shape
    lut = np.array([unresolved_color] + list(palette), dtype=np.uint8)
    rgb = lut[image.labels.astype(np.int32) + 1]
    header = f"P6\n{w} {h}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(rgb.tobytes())


def save_figure(image: BasinImage, palette, path, title: str = "", unresolved_color=(0, 0, 0), viewport: Viewport | None = None) -> None:
    """Matplotlib rendering of the label grid, saved to a file."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    lut = np.array([unresolved_color] + list(palette), dtype=float) / 255.0
    rgb = lut[image.labels.astype(np.int32) + 1]
    fig, ax = plt.subplots(figsize=(6, 6))
    extent = None
    if viewport is not None:
        half_w = viewport.width / 2.0
        half_h = viewport.width * viewport.pixels_y / viewport.pixels_x / 2.0
        extent = (
            viewport.center.real - half_w,
            viewport.center.real + half_w,
            viewport.center.imag - half_h,
            viewport.center.imag + half_h,
        )
    ax.imshow(rgb, extent=extent, origin="upper")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


# ----------------------------------------------------------------------
# presets for the three reference pictures
# ----------------------------------------------------------------------

WHITE = (255, 255, 255)
LIGHT_GREY = (200, 200, 200)
DARK_GREY = (104, 104, 104)

_OMEGA = complex(-0.5, math.sqrt(3.0) / 2.0)


@dataclass(frozen=True)
class RenderPreset:
    name: str
    map: RationalMap
    viewport: Viewport
    expected_attractors: tuple[tuple[complex, ...], ...]
    colors: tuple[tuple[int, int, int], ...]
    description: str


def _dendrite_quartic() -> RationalMap:
    u = (1 + 1j) / 2
    inner = ComplexPoly((-u, 0j, 1 + 0j))          # z^2 - u
    return RationalMap.from_poly((inner * inner).scale(2j))


def _degree6_polynomial() -> RationalMap:
    # z^2 (3 - z^4)/2 = (3 z^2 - z^6)/2
    return RationalMap.from_poly(ComplexPoly((0j, 0j, 1.5, 0j, 0j, 0j, -0.5)))


def _galois_cubic() -> RationalMap:
    return RationalMap(ComplexPoly((0j, 0j, 3 + 0j)), ComplexPoly((1 + 0j, 0j, 0j, 2 + 0j)))


PRESETS: dict[str, RenderPreset] = {
    "fig1": RenderPreset(
        name="fig1",
        map=_galois_cubic(),
        viewport=Viewport(0j, 4.0, 512, 512),
        expected_attractors=((0j,), (1 + 0j,), (_OMEGA, _OMEGA.conjugate())),
        colors=(WHITE, LIGHT_GREY, DARK_GREY),
        description="3z^2/(2z^3+1): basin of 0 white, of 1 light grey, "
        "of the 2-cycle dark grey",
    ),
    "fig3": RenderPreset(
        name="fig3",
        map=_dendrite_quartic(),
        viewport=Viewport(0j, 4.0, 512, 512),
        expected_attractors=((INF,),),
        colors=(WHITE,),
        description="2i(z^2-(1+i)/2)^2: dendrite, basin of infinity white",
    ),
    "fig4": RenderPreset(
        name="fig4",
        map=_degree6_polynomial(),
        viewport=Viewport(0j, 4.0, 512, 512),
        expected_attractors=((INF,), (0j,), (1 + 0j,)),
        colors=(WHITE, LIGHT_GREY, DARK_GREY),
        description="z^2(3-z^4)/2: basin of infinity white, of 0 light grey, "
        "of 1 dark grey",
    ),
}


def match_attractors(cycles: list[Cycle], expected, tol: float = 1e-6):
    """Pair found cycles with expected point sets; returns (mapping, ok).

    mapping[found_index] = expected_index.  ok is False when the match is
    not a bijection (extra, missing, or ambiguous cycles)."""
    mapping: dict[int, int] = {}
    used: set[int] = set()
    for ci, cyc in enumerate(cycles):
        for ei, exp in enumerate(expected):
            if ei in used:
                continue
            if len(exp) == len(cyc.points) and all(
                any(chordal(p, q) < tol for q in cyc.points) for p in exp
            ):
                mapping[ci] = ei
                used.add(ei)
                break
    ok = len(mapping) == len(cycles) == len(expected)
    return mapping, ok


def render_preset(
    name: str, size: tuple[int, int] | None = None, max_iter: int = 500, tol: float = 1e-3
):
    """Run a preset end to end; returns (preset, image, palette)."""
    preset = PRESETS[name]
    vp = preset.viewport
    if size is not None:
        vp = Viewport(vp.center, vp.width, size[0], size[1])
    cycles = find_attracting_cycles(preset.map)
    mapping, ok = match_attractors(cycles, preset.expected_attractors)
    if not ok:
        raise RuntimeError(
            f"attractors of preset {name!r} do not match its caption"
        )
    image = render_basins(preset.map, vp, cycles, max_iter=max_iter, tol=tol)
    palette = [preset.colors[mapping[ci]] for ci in range(len(cycles))]
    return preset, image, palette
