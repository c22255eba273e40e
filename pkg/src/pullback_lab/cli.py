"""Command-line entry point.

Exit codes: 0 all checks passed, 1 a mathematical check failed, 2 input or
configuration error.  Every run prints a human-readable report followed by
a machine-readable key=value summary block; runs with equal seeds produce
byte-identical reports.  Files are only written through explicit --out /
--figure flags.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import constsigma, cubicgalois, modulimap, render, solver
from .polyarith import (
    ComplexPoly,
    NonConvergence,
    RationalMap,
    format_complex,
    parse_complex,
)
from .portrait import PortraitError, load_portrait, validate

EXIT_PASS = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2


class InputError(ValueError):
    pass


def _summary(lines: list[str], **kv) -> None:
    lines.append("-- summary --")
    for key, value in kv.items():
        if isinstance(value, (bool, np.bool_)):
            value = str(bool(value)).lower()
        elif isinstance(value, complex):
            value = format_complex(value)
        elif isinstance(value, float):
            value = f"{value:.12e}"
        lines.append(f"{key}={value}")


def _parse_points(text: str) -> list[complex]:
    """Split a quoted coefficient/point list on whitespace or semicolons."""
    toks = [t for t in text.replace(";", " ").split() if t]
    if not toks:
        raise InputError("empty point list")
    return [parse_complex(t) for t in toks]


def _emit(lines: list[str]) -> None:
    sys.stdout.write("\n".join(lines) + "\n")


# ----------------------------------------------------------------------
# subcommand implementations
# ----------------------------------------------------------------------

def cmd_portrait_validate(args) -> int:
    portrait = load_portrait(args.portrait)
    report = validate(portrait)
    lines = [f"portrait {args.portrait}", report.to_text()]
    _summary(
        lines,
        subcommand="portrait.validate",
        degree=report.degree,
        n=report.n,
        polynomial=report.polynomial,
        all_critical_periodic=report.all_critical_periodic,
        is_permutation=report.is_permutation,
        ordering=",".join(report.finite_labels),
        passed=True,
    )
    _emit(lines)
    return EXIT_PASS


def _build_gf_from_file(path):
    portrait = load_portrait(path)
    try:
        return modulimap.build_gf(portrait)
    except modulimap.HypothesisViolation as exc:
        raise InputError(f"portrait unusable for the endomorphism: {exc}") from exc


def cmd_gf_eval(args) -> int:
    gf = _build_gf_from_file(args.portrait)
    a = np.array(_parse_points(args.point))
    if a.shape[0] != gf.dim:
        raise InputError(f"expected {gf.dim} coordinates, got {a.shape[0]}")
    image = modulimap.eval_Gf(gf, a)
    lines = [f"endomorphism of P^{gf.n} from {args.portrait} (degree {gf.degree})"]
    lines.append("a      = " + " ".join(format_complex(z) for z in a))
    lines.append("G(a)   = " + " ".join(format_complex(z) for z in image))
    if args.chart:
        chart = modulimap.eval_gf_chart(gf, a)
        lines.append("chart  = " + " ".join(format_complex(z) for z in chart))
    dd = modulimap.delta_distance(a)
    lines.append(f"distance to collision locus = {dd:.6e}")
    _summary(
        lines,
        subcommand="gf.eval",
        portrait=str(args.portrait),
        image=" ".join(format_complex(z) for z in image),
        delta_distance=dd,
        passed=True,
    )
    _emit(lines)
    return EXIT_PASS


def cmd_gf_jac_check(args) -> int:
    gf = _build_gf_from_file(args.portrait)
    check = modulimap.jacobian_constant(
        gf, samples=args.samples, rng_seed=args.rng_seed, step=args.step
    )
    jac, det = modulimap.jacobian(
        gf,
        np.array(_parse_points(args.point))
        if args.point
        else np.arange(1, gf.dim + 1).astype(complex) * (0.37 + 0.61j),
    )
    ok = check.relative_spread < args.tol
    lines = [
        f"check jacobian-constant-ratio on {args.portrait}",
        "the determinant of the finite-difference Jacobian divided by the "
        "pairwise-difference product is constant off the collision locus",
        f"samples           = {check.samples_used}",
        f"measured constant = {format_complex(check.constant)}",
        f"relative spread   = {check.relative_spread:.3e}  (tolerance {args.tol:g})",
        f"product degree    = {check.degree_J} (expected (n+1)(d-1) = "
        f"{(gf.n + 1) * (gf.degree - 1)})",
        "sample Jacobian (row-major):",
    ]
    for row in jac:
        lines.append("  " + "  ".join(format_complex(z) for z in row))
    lines.append(f"sample determinant = {format_complex(det)}")
    lines.append("verdict: " + ("pass" if ok else "FAIL"))
    _summary(
        lines,
        subcommand="gf.jac-check",
        portrait=str(args.portrait),
        samples=check.samples_used,
        constant=check.constant,
        spread=check.relative_spread,
        tolerance=args.tol,
        rng_seed=args.rng_seed,
        passed=ok,
    )
    _emit(lines)
    return EXIT_PASS if ok else EXIT_CHECK_FAILED


def cmd_gf_fixed_points(args) -> int:
    gf = _build_gf_from_file(args.portrait)
    portrait = load_portrait(args.portrait)
    sweep = solver.newton_fixed_points(
        gf,
        seed_count=args.seeds,
        tol=args.tol,
        rng_seed=args.rng_seed,
    )
    lines = [
        f"fixed points of the moduli endomorphism from {args.portrait}",
        f"seeds = {sweep.seeds_used}  converged = {sweep.converged_seeds}  "
        f"failed = {sweep.failed_seeds}",
        f"distinct fixed points = {len(sweep.records)} "
        f"({len(sweep.off_delta())} off the collision locus)",
    ]
    certified_count = 0
    for i, rec in enumerate(sweep.records):
        coords = " ".join(format_complex(z) for z in rec.a)
        tag = "on-collision-locus" if rec.on_delta else "moduli point"
        lines.append(f"[{i}] a = ({coords})  residual = {rec.residual:.3e}  {tag}")
        if rec.on_delta:
            continue
        poly = solver.recover_polynomial(gf, rec)
        cert = solver.certify_pcf(poly, portrait)
        rec.certified = cert.certified
        if cert.certified:
            certified_count += 1
        lines.append(f"     recovered monic polynomial: {poly}")
        lines.append(
            f"     certification: {'ok' if cert.certified else 'FAILED'} "
            f"(orbit deviation {cert.max_deviation:.3e})"
            + ("" if cert.certified else f"  reason: {cert.reason}")
        )
    ok = len(sweep.off_delta()) > 0 and certified_count == len(sweep.off_delta())
    _summary(
        lines,
        subcommand="gf.fixed-points",
        portrait=str(args.portrait),
        seeds=args.seeds,
        rng_seed=args.rng_seed,
        tolerance=args.tol,
        fixed_points=len(sweep.records),
        off_delta=len(sweep.off_delta()),
        certified=certified_count,
        passed=ok,
    )
    _emit(lines)
    return EXIT_PASS if ok else EXIT_CHECK_FAILED


def cmd_pcf_certify(args) -> int:
    portrait = load_portrait(args.portrait)
    poly = ComplexPoly(tuple(_parse_points(args.poly)))
    cert = solver.certify_pcf(poly, portrait, tol=args.tol)
    lines = [
        f"certify {poly} against {args.portrait}",
        f"certified = {str(cert.certified).lower()}",
        f"max orbit deviation = {cert.max_deviation:.3e} (tolerance {args.tol:g})",
    ]
    if cert.certified:
        for label, z in sorted(cert.positions.items()):
            lines.append(f"  {label:>6} at {format_complex(z)}")
    else:
        lines.append(f"reason: {cert.reason}")
    _summary(
        lines,
        subcommand="pcf.certify",
        portrait=str(args.portrait),
        certified=cert.certified,
        deviation=cert.max_deviation,
        tolerance=args.tol,
        passed=cert.certified,
    )
    _emit(lines)
    return EXIT_PASS if cert.certified else EXIT_CHECK_FAILED


def cmd_cubic_verify(args) -> int:
    kept, excluded = cubicgalois.sample_alphas(args.samples, rng_seed=args.rng_seed)
    worst_p1 = worst_diag = 0.0
    for a in kept:
        p1 = cubicgalois.verify_P1(a, tol=args.tol)
        dg = cubicgalois.verify_diagram(a, tol=args.tol)
        worst_p1 = max(worst_p1, p1.residual)
        worst_diag = max(worst_diag, dg.residual)
    theta = cubicgalois.theta_preimages()
    mult_list = [theta.y_multiplicities[t] for t in cubicgalois.THETA_PRIME]
    ok = worst_p1 <= args.tol and worst_diag <= args.tol and theta.sets_match
    lines = [
        "cubic family checks: critical structure, correspondence diagram, "
        "and preimages of the fixed critical triple",
        f"samples = {len(kept)} (excluded near degeneracies: {len(excluded)})",
        f"critical-structure residual (P1) = {worst_p1:.3e}",
        f"diagram residual (x = a^2, y = F_a(a^2), recovery) = {worst_diag:.3e}",
        f"preimage set equality = {str(theta.sets_match).lower()} "
        f"(residual {theta.max_residual:.3e})",
        "observed multiplicities on [1, w, wb, -1, -w, -wb] under the "
        "degree-4 coordinate = " + " ".join(map(str, mult_list)),
        "verdict: " + ("pass" if ok else "FAIL"),
    ]
    _summary(
        lines,
        subcommand="cubic.verify",
        samples=len(kept),
        excluded=len(excluded),
        rng_seed=args.rng_seed,
        tolerance=args.tol,
        p1_residual=worst_p1,
        diagram_residual=worst_diag,
        theta_sets_match=theta.sets_match,
        y_multiplicities=",".join(map(str, mult_list)),
        passed=ok,
    )
    _emit(lines)
    return EXIT_PASS if ok else EXIT_CHECK_FAILED


def cmd_cubic_local_degree(args) -> int:
    fit = cubicgalois.local_degree_at_basepoint(sample_radius=args.radius)
    ok = abs(fit.exponent - 2.0) < 1e-3 and abs(fit.coefficient - 0.25) < 1e-3
    lines = [
        "local behaviour of the basepoint branch of the correspondence "
        "(critical value -> critical point)",
        f"sample radius = {args.radius:g}",
        f"fitted exponent    = {fit.exponent:.6f}  (expected 2)",
        f"fitted coefficient = {fit.coefficient:.6f}  (expected 0.25)",
        f"fit residual       = {fit.max_fit_residual:.3e}",
        "verdict: " + ("pass" if ok else "FAIL"),
    ]
    if args.figure:
        _save_local_degree_figure(fit, args.figure)
        lines.append(f"figure written to {args.figure}")
    _summary(
        lines,
        subcommand="cubic.local-degree",
        radius=args.radius,
        exponent=fit.exponent,
        coefficient=fit.coefficient,
        fit_residual=fit.max_fit_residual,
        passed=ok,
    )
    _emit(lines)
    return EXIT_PASS if ok else EXIT_CHECK_FAILED


def _save_local_degree_figure(fit, path) -> None:
    import math

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ys = [abs(y) for y, _ in fit.samples]
    xs = [abs(x) for _, x in fit.samples]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(ys, xs, "o", ms=4, label="branch samples")
    lo, hi = min(ys), max(ys)
    ax.loglog(
        [lo, hi],
        [fit.coefficient * lo**fit.exponent, fit.coefficient * hi**fit.exponent],
        "-",
        label=f"fit: {fit.coefficient:.3f} |y|^{fit.exponent:.3f}",
    )
    ax.set_xlabel("|y| (critical value)")
    ax.set_ylabel("|x| (critical point)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def cmd_constsigma_check(args) -> int:
    if args.custom:
        instances = [(constsigma.load_instance(args.custom), None)]
    else:
        instances = [_example_instance(args.example)]
    lines = []
    all_ok = True
    reports = []
    for inst, skinny in instances:
        rep = constsigma.check_conditions(inst, tol=args.tol)
        reports.append(rep)
        all_ok = all_ok and rep.ok
        lines.append(f"instance {inst.name}: s degree {inst.s.degree}, "
                     f"g degree {inst.g.degree}, |A| = {len(inst.A)}")
        lines.append("  V_s          = " + _point_set(rep.v_s))
        lines.append("  V_g          = " + _point_set(rep.v_g))
        lines.append("  g(A)         = " + _point_set(rep.g_of_a))
        lines.append("  s^-1(A)      = " + _point_set(rep.s_preimage_a))
        lines.append("  B            = " + _point_set(rep.B))
        if rep.postcritical is not None and rep.postcritical.closed:
            lines.append("  postcritical = " + _point_set(rep.postcritical.points))
        if rep.ok:
            verdict = "constant" if rep.constant else f"dimension <= {rep.bound}"
            lines.append(f"  sigma_f: {verdict} (|A|={len(inst.A)})")
        else:
            for f in rep.failures:
                lines.append("  FAILED: " + f)
        if skinny is not None:
            lines.append(
                f"  marked-point space dimension {skinny.marked_space_dim}, image "
                f"dimension {skinny.image_dim}, codimension {skinny.codim}"
            )
            pf_ok = rep.postcritical is not None and rep.postcritical.closed and \
                constsigma.sets_equal(rep.postcritical.points, skinny.A_n, args.tol)
            lines.append(f"  postcritical set equals the expected marked set: "
                         f"{str(pf_ok).lower()}")
            all_ok = all_ok and pf_ok
    lines.append("verdict: " + ("pass" if all_ok else "FAIL"))
    summary_kv = dict(
        subcommand="constsigma.check",
        tolerance=args.tol,
        passed=all_ok,
    )
    if not args.custom:
        summary_kv["example"] = args.example
    rep0 = reports[0]
    summary_kv["bound"] = rep0.bound
    summary_kv["constant"] = rep0.constant
    if rep0.postcritical is not None and rep0.postcritical.closed:
        summary_kv["postcritical_size"] = len(rep0.postcritical.points)
    _summary(lines, **summary_kv)
    _emit(lines)
    return EXIT_PASS if all_ok else EXIT_CHECK_FAILED


def _example_instance(spec: str):
    if spec == "quartic":
        return constsigma.example_quartic(), None
    if spec.startswith("family:"):
        try:
            n = int(spec.split(":", 1)[1])
        except ValueError:
            raise InputError(f"bad family spec {spec!r}")
        return constsigma.example_family(n), None
    if spec.startswith("skinny:"):
        try:
            n_s, k_s = spec.split(":", 1)[1].split(",")
            skinny = constsigma.skinny_family(int(n_s), int(k_s))
        except ValueError as exc:
            raise InputError(f"bad skinny spec {spec!r}: {exc}")
        return skinny.instance, skinny
    raise InputError(
        f"unknown example {spec!r}: use quartic, family:<n> or skinny:<n>,<k>"
    )


def _point_set(points) -> str:
    return "{" + ", ".join(format_complex(p) for p in points) + "}"


def cmd_render_julia(args) -> int:
    try:
        w_s, h_s = args.size.lower().split("x")
        size = (int(w_s), int(h_s))
    except ValueError:
        raise InputError(f"bad --size {args.size!r}, expected WxH")
    if args.map.startswith("preset:"):
        name = args.map.split(":", 1)[1]
        if name not in render.PRESETS:
            raise InputError(f"unknown preset {name!r}")
        preset = render.PRESETS[name]
        fmap = preset.map
        vp = render.Viewport(preset.viewport.center, preset.viewport.width, *size)
        if args.viewport:
            vp = _parse_viewport(args.viewport, size)
        cycles = render.find_attracting_cycles(fmap)
        mapping, ok = render.match_attractors(cycles, preset.expected_attractors)
        if not ok:
            raise RuntimeError("attractors do not match the preset caption")
        palette = [preset.colors[mapping[ci]] for ci in range(len(cycles))]
        title = preset.description
    elif args.map.startswith("custom:"):
        fmap = _load_map(args.map.split(":", 1)[1])
        if not args.viewport:
            raise InputError("--viewport is required for custom maps")
        vp = _parse_viewport(args.viewport, size)
        cycles = render.find_attracting_cycles(fmap)
        if not cycles:
            raise InputError("no attracting cycles found for the custom map")
        greys = np.linspace(255, 80, max(len(cycles), 2)).astype(int)
        palette = [(int(g), int(g), int(g)) for g in greys[: len(cycles)]]
        title = args.map
    else:
        raise InputError("--map must be preset:<name> or custom:<file>")

    image = render.render_basins(fmap, vp, cycles, max_iter=args.max_iter, tol=args.tol)
    lines = [f"render {args.map} at {size[0]}x{size[1]}, max_iter {args.max_iter}"]
    for ci, cyc in enumerate(cycles):
        pts = ", ".join(format_complex(p) for p in cyc.points)
        lines.append(
            f"  attractor {ci}: period {cyc.period} at [{pts}] "
            f"(multiplier {cyc.multiplier:.3e})"
        )
    lines.append(f"unresolved fraction = {image.unresolved_fraction:.6f}")
    if args.out:
        render.write_image(image, palette, args.out)
        lines.append(f"ppm written to {args.out}")
    if args.figure:
        render.save_figure(image, palette, args.figure, title=title, viewport=vp)
        lines.append(f"figure written to {args.figure}")
    _summary(
        lines,
        subcommand="render.julia",
        map=args.map,
        size=f"{size[0]}x{size[1]}",
        max_iter=args.max_iter,
        tolerance=args.tol,
        attractors=len(cycles),
        unresolved_fraction=image.unresolved_fraction,
        out=args.out or "-",
        passed=True,
    )
    _emit(lines)
    return EXIT_PASS


def _parse_viewport(spec: str, size) -> render.Viewport:
    try:
        cx_s, cy_s, w_s = spec.split(",")
        return render.Viewport(complex(float(cx_s), float(cy_s)), float(w_s), *size)
    except ValueError:
        raise InputError(f"bad --viewport {spec!r}, expected cx,cy,width")


def _load_map(path) -> RationalMap:
    num = None
    den = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "num" and num is None:
                num = ComplexPoly(tuple(parse_complex(t) for t in parts[1:]))
            elif parts[0] == "den" and den is None:
                den = ComplexPoly(tuple(parse_complex(t) for t in parts[1:]))
            else:
                raise InputError(f"{path}:{lineno}: expected unique 'num'/'den' lines")
    if num is None:
        raise InputError(f"{path}: missing 'num' line")
    if den is None:
        den = ComplexPoly((1 + 0j,))
    return RationalMap(num, den)


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pullback-lab",
        description="moduli-space endomorphisms of postcritically finite "
        "polynomials: validation, fixed points, certificates, renders",
    )
    sub = parser.add_subparsers(dest="group", required=True)

    p_port = sub.add_parser("portrait", help="portrait file operations")
    port_sub = p_port.add_subparsers(dest="action", required=True)
    v = port_sub.add_parser("validate", help="validate and classify a portrait")
    v.add_argument("portrait")
    v.set_defaults(func=cmd_portrait_validate)

    p_gf = sub.add_parser("gf", help="the moduli endomorphism")
    gf_sub = p_gf.add_subparsers(dest="action", required=True)
    e = gf_sub.add_parser("eval", help="evaluate the homogeneous map at a point")
    e.add_argument("portrait")
    e.add_argument("--point", required=True, metavar="'RE,IM RE,IM ...'")
    e.add_argument("--chart", action="store_true", help="also print the projective image")
    e.set_defaults(func=cmd_gf_eval)
    j = gf_sub.add_parser("jac-check", help="determinant vs closed-form product")
    j.add_argument("portrait")
    j.add_argument("--samples", type=int, default=100)
    j.add_argument("--rng-seed", type=int, default=1)
    j.add_argument("--tol", type=float, default=1e-6)
    j.add_argument("--step", type=float, default=1e-6)
    j.add_argument("--point", metavar="'RE,IM ...'",
                   help="where to print the sample Jacobian matrix")
    j.set_defaults(func=cmd_gf_jac_check)
    f = gf_sub.add_parser("fixed-points", help="Newton sweep for G(a) = a")
    f.add_argument("portrait")
    f.add_argument("--seeds", type=int, default=200)
    f.add_argument("--tol", type=float, default=1e-12)
    f.add_argument("--rng-seed", type=int, default=1)
    f.set_defaults(func=cmd_gf_fixed_points)

    p_pcf = sub.add_parser("pcf", help="postcritically finite certification")
    pcf_sub = p_pcf.add_subparsers(dest="action", required=True)
    c = pcf_sub.add_parser("certify", help="certify a polynomial against a portrait")
    c.add_argument("portrait")
    c.add_argument("--poly", required=True, metavar="'RE,IM RE,IM ...'",
                   help="ascending coefficients in one quoted argument")
    c.add_argument("--tol", type=float, default=1e-9)
    c.set_defaults(func=cmd_pcf_certify)

    p_cubic = sub.add_parser("cubic", help="the degree-3 covering family")
    cubic_sub = p_cubic.add_subparsers(dest="action", required=True)
    cv = cubic_sub.add_parser("verify", help="family-wide structure checks")
    cv.add_argument("--samples", type=int, default=1000)
    cv.add_argument("--rng-seed", type=int, default=1)
    cv.add_argument("--tol", type=float, default=1e-9)
    cv.set_defaults(func=cmd_cubic_verify)
    cl = cubic_sub.add_parser("local-degree", help="branch behaviour at the basepoint")
    cl.add_argument("--radius", type=float, default=1e-3)
    cl.add_argument("--figure", help="save a log-log fit figure (png)")
    cl.set_defaults(func=cmd_cubic_local_degree)

    p_cs = sub.add_parser("constsigma", help="decomposition certificates")
    cs_sub = p_cs.add_subparsers(dest="action", required=True)
    cc = cs_sub.add_parser("check", help="verify the decomposition inclusions")
    group = cc.add_mutually_exclusive_group(required=True)
    group.add_argument("--example", help="quartic | family:<n> | skinny:<n>,<k>")
    group.add_argument("--custom", help="maps file with s, g, A")
    cc.add_argument("--tol", type=float, default=1e-10)
    cc.set_defaults(func=cmd_constsigma_check)

    p_render = sub.add_parser("render", help="basin images")
    render_sub = p_render.add_subparsers(dest="action", required=True)
    rj = render_sub.add_parser("julia", help="render basins of attraction")
    rj.add_argument("--map", required=True, help="preset:fig1|fig3|fig4 or custom:<file>")
    rj.add_argument("--size", default="512x512")
    rj.add_argument("--viewport", help="cx,cy,width (defaults per preset)")
    rj.add_argument("--max-iter", type=int, default=500)
    rj.add_argument("--tol", type=float, default=1e-3)
    rj.add_argument("--out", help="output PPM path")
    rj.add_argument("--figure", help="also save a matplotlib figure (png)")
    rj.set_defaults(func=cmd_render_julia)

    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, PortraitError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT_ERROR
    except (NonConvergence, RuntimeError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_CHECK_FAILED


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
