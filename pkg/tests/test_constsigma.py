import cmath

import pytest

from pullback_lab import constsigma as cs
from pullback_lab.polyarith import INF, ComplexPoly, RationalMap


def spheres_equal(points, expected, tol=1e-9):
    return cs.sets_equal(points, expected, tol)


@pytest.fixture(scope="module")
def report():
    return cs.check_conditions(cs.example_quartic())


class TestQuarticExample:
    def test_g_values(self):
        g = cs.example_quartic().g
        assert abs(g.eval(0) - (-1)) < 1e-14
        assert abs(g.eval(1) - 1) < 1e-14
        assert cmath.isinf(abs(g.eval(INF)))

    def test_composite_coefficients(self):
        inst = cs.example_quartic()
        f = inst.g.compose(inst.s)
        assert f.num.coeffs == (-1 + 0j, 0j, 2 - 2j, 0j, 2j)

    def test_certified_constant(self, report):
        assert report.ok
        assert report.bound == 0
        assert report.constant

    def test_s_preimage_set(self, report):
        assert spheres_equal(report.s_preimage_a, [0, INF, -1, 1])

    def test_postcritical_set(self, report):
        assert report.postcritical.closed
        assert spheres_equal(report.postcritical.points, [0, 1, -1, INF])

    def test_critical_values_two_ways(self):
        inst = cs.example_quartic()
        composite = inst.g.compose(inst.s)
        direct = composite.critical_values()
        via_parts = list(inst.g.critical_values()) + [
            inst.g.eval(v) for v in inst.s.critical_values()
        ]
        assert spheres_equal(direct, cs._merge(via_parts, 1e-9))
        assert spheres_equal(direct, [0, -1, INF])

    def test_perturbed_instance_fails(self):
        inst = cs.example_quartic()
        shifted = RationalMap(
            inst.g.num + ComplexPoly((0.1 + 0j,)), inst.g.den
        )
        bad = cs.DecompositionInstance("perturbed", inst.s, shifted, inst.A)
        report = cs.check_conditions(bad)
        assert not report.ok
        assert report.failures

    def test_bookkeeping_agrees_with_recomposition(self, report):
        # the marked-set bound B computed from (s, g) agrees with what the
        # composite itself produces: P_f inside B, and V_f = V_g u g(V_s)
        inst = cs.example_quartic()
        composite = inst.g.compose(inst.s)
        pf = cs.compute_postcritical(composite)
        ok, _ = cs._subset(pf.points, report.B, 1e-9)
        assert ok
        assert spheres_equal(report.B, [0, 1, -1, INF])


class TestFamilyExamples:
    def test_n2_composite_is_the_degree6_polynomial(self):
        inst = cs.example_family(2)
        f = inst.g.compose(inst.s)
        assert f.num.coeffs == (0j, 0j, 1.5 + 0j, 0j, 0j, 0j, -0.5 + 0j)

    @pytest.mark.parametrize("n", range(2, 9))
    def test_fixes_roots_of_unity(self, n):
        g = cs.example_family(n).g
        for u in cs.roots_of_unity(n):
            assert abs(g.eval(u) - u) < 1e-13

    def test_fixes_origin(self):
        assert cs.example_family(5).g.eval(0) == 0

    @pytest.mark.parametrize("n", range(2, 9))
    def test_certified_with_expected_marked_count(self, n):
        report = cs.check_conditions(cs.example_family(n), tol=1e-10)
        assert report.ok
        assert report.constant
        assert len(report.postcritical.points) == n + 2


class TestSkinnyFamilies:
    def test_dimension_bookkeeping(self):
        sk = cs.skinny_family(6, 2)
        assert (sk.marked_space_dim, sk.image_dim) == (5, 2)
        assert sk.codim == 3

    def test_trivial_cover(self):
        sk = cs.skinny_family(4, 1)
        assert sk.codim == 0
        assert sk.image_dim == sk.marked_space_dim

    def test_full_collapse_matches_constant_family(self):
        sk = cs.skinny_family(6, 6)
        assert sk.m == 1
        assert sk.image_dim == 0
        report = cs.check_conditions(sk.instance)
        assert report.ok and report.constant

    def test_divisibility_enforced(self):
        with pytest.raises(ValueError):
            cs.skinny_family(6, 4)

    @pytest.mark.parametrize("n,k", [(4, 2), (6, 2), (6, 3), (8, 4)])
    def test_postcritical_equals_expected_marked_set(self, n, k):
        sk = cs.skinny_family(n, k)
        report = cs.check_conditions(sk.instance, tol=1e-10)
        assert report.ok
        assert report.postcritical.closed
        assert cs.sets_equal(report.postcritical.points, sk.A_n, 1e-10)
        assert sk.codim == (k - 1) * sk.m


class TestPostcritical:
    def test_squaring_map(self):
        r = cs.compute_postcritical(RationalMap.from_poly(ComplexPoly((0j, 0j, 1 + 0j))))
        assert r.closed
        assert spheres_equal(r.points, [0, INF])

    def test_galois_cubic(self):
        f = RationalMap(ComplexPoly((0j, 0j, 3 + 0j)), ComplexPoly((1 + 0j, 0j, 0j, 2 + 0j)))
        r = cs.compute_postcritical(f)
        assert r.closed
        omega = cmath.exp(2j * cmath.pi / 3)
        assert spheres_equal(r.points, [0, 1, omega, omega.conjugate()])

    def test_generic_quadratic_not_closed(self):
        r = cs.compute_postcritical(RationalMap.from_poly(ComplexPoly((0.3 + 0j, 0j, 1 + 0j))))
        assert not r.closed
        assert r.reason

    def test_converging_orbit_not_closed(self):
        r = cs.compute_postcritical(RationalMap.from_poly(ComplexPoly((0.2 + 0j, 0j, 1 + 0j))))
        assert not r.closed


class TestRootsOfUnity:
    def test_unit_modulus_and_count(self):
        for n in (2, 3, 8, 16):
            pts = cs.roots_of_unity(n)
            assert len(pts) == n
            assert all(abs(abs(z) - 1) < 1e-15 for z in pts)

    def test_tight_against_exponentials(self):
        pts = cs.roots_of_unity(12)
        worst = max(
            min(abs(z - cmath.exp(2j * cmath.pi * k / 12)) for k in range(12))
            for z in pts
        )
        assert worst < 1e-14


class TestMapsFile:
    def test_round_trip_matches_builtin(self, portraits_dir):
        inst = cs.load_instance(portraits_dir / "mcmullen_quartic.maps")
        ref = cs.example_quartic()
        assert inst.s.num.coeffs == ref.s.num.coeffs
        assert inst.g.num.coeffs == ref.g.num.coeffs
        assert len(inst.A) == 3
        report = cs.check_conditions(inst)
        assert report.ok and report.constant

    def test_unknown_field_rejected(self):
        with pytest.raises(ValueError, match="unknown field"):
            cs.parse_instance("s_num 1,0\ng_num 1,0\nA 0,0\nbogus 1\n")

    def test_missing_field_rejected(self):
        with pytest.raises(ValueError, match="missing"):
            cs.parse_instance("s_num 0,0 1,0\nA 0,0 1,0 inf\n")
