import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import period3_parameters, AIRPLANE_C, RABBIT_C
from pullback_lab.polyarith import (
    INF,
    ComplexPoly,
    RationalMap,
    chordal,
    cluster_roots,
    expand_from_roots,
    is_inf,
    polish_root,
    roots,
)

OMEGA = cmath.exp(2j * cmath.pi / 3)


def match_multiset(got, expected):
    """Greedy nearest-pair matching; returns the worst pair distance."""
    remaining = list(expected)
    worst = 0.0
    assert len(got) == len(remaining)
    for g in got:
        best = min(remaining, key=lambda e: abs(g - e))
        worst = max(worst, abs(g - best))
        remaining.remove(best)
    return worst


def poly(*coeffs):
    return ComplexPoly(tuple(complex(c) for c in coeffs))


class TestExpandFromRoots:
    def test_single_simple_root(self):
        assert expand_from_roots([(0j, 1)]).coeffs == (0j, 1 + 0j)

    def test_pair(self):
        assert expand_from_roots([(1, 1), (-1, 1)]).coeffs == (-1 + 0j, 0j, 1 + 0j)

    def test_double_root(self):
        assert expand_from_roots([(2, 2)]).coeffs == (4 + 0j, -4 + 0j, 1 + 0j)

    def test_empty_is_one(self):
        assert expand_from_roots([]).coeffs == (1 + 0j,)

    def test_rejects_zero_multiplicity(self):
        with pytest.raises(ValueError):
            expand_from_roots([(1, 0)])


class TestAntiderivative:
    def test_shifted_square(self):
        assert poly(0, 2).antiderivative(base=1).coeffs == (-1 + 0j, 0j, 1 + 0j)

    def test_identity(self):
        assert poly(1).antiderivative(base=0).coeffs == (0j, 1 + 0j)

    def test_complex_base(self):
        got = poly(0, 0, 3).antiderivative(base=1j)
        assert got.coeffs == (1j, 0j, 0j, 1 + 0j)  # z^3 + i

    def test_derivative_inverts_exactly(self):
        p = poly(3, -2j, 0.5, 1 + 1j)
        assert p.antiderivative(base=0.3 - 0.7j).derivative().coeffs == p.coeffs


class TestEval:
    def test_values(self):
        p = poly(-1, 0, 1)
        assert p.eval(2) == 3
        assert ComplexPoly(()).eval(5 + 1j) == 0
        assert p.eval(1 + 1j) == pytest.approx(-1 + 2j)

    def test_canonical_trim(self):
        assert poly(1, 2, 0, 0).coeffs == (1 + 0j, 2 + 0j)
        assert poly(0, 0).coeffs == ()
        assert poly(0, 0).is_zero


class TestRoots:
    def test_quadratic(self):
        assert match_multiset(roots(poly(-1, 0, 1)), [-1, 1]) < 1e-14

    def test_cube_roots_of_unity(self):
        got = roots(poly(-1, 0, 0, 1))
        assert match_multiset(got, [1, OMEGA, OMEGA.conjugate()]) < 1e-12

    def test_period3_cubic_against_bisection_oracle(self):
        got = roots(poly(1, 1, 2, 1))
        assert match_multiset(got, period3_parameters()) < 1e-12
        assert abs(got[0] - AIRPLANE_C) < 1e-12
        assert min(abs(g - RABBIT_C) for g in got) < 1e-12

    def test_deterministic_reruns(self):
        p = poly(2, -1j, 0.25, 3, 1)
        assert roots(p) == roots(p)

    def test_origin_roots_split_exactly(self):
        got = roots(poly(0, 0, 0, -1, 0, 0, 0, 1))  # z^3 (z^4 - 1)
        assert got.count(0j) == 3

    def test_high_degree_roots_of_unity(self):
        n = 64
        coeffs = [0j] * (n + 1)
        coeffs[0], coeffs[n] = -1 + 0j, 1 + 0j
        got = roots(ComplexPoly(tuple(coeffs)))
        assert len(got) == n
        worst = max(min(abs(g - cmath.exp(2j * cmath.pi * k / n)) for k in range(n)) for g in got)
        assert worst < 1e-12

    def test_degree_zero_has_no_roots(self):
        assert roots(poly(3)) == []
        with pytest.raises(ValueError):
            roots(ComplexPoly(()))


class TestClusterAndPolish:
    def test_triple_root_cluster(self):
        p = expand_from_roots([(1, 3), (-1, 1)])
        clusters = cluster_roots(roots(p, tol=1e-6))
        assert sorted(m for _, m in clusters) == [1, 3]
        center, mult = max(clusters, key=lambda cm: cm[1])
        refined = polish_root(p, center, mult)
        assert abs(refined - 1) < 1e-12


@st.composite
def separated_roots(draw, max_degree=10):
    grid = st.tuples(st.integers(-3, 3), st.integers(-3, 3))
    pts = draw(st.lists(grid, min_size=1, max_size=max_degree, unique=True))
    return [complex(a, b) for a, b in pts]


class TestRoundTrips:
    @settings(max_examples=40, deadline=None)
    @given(separated_roots(max_degree=12))
    def test_eval_vanishes_at_roots(self, rts):
        p = expand_from_roots([(r, 1) for r in rts])
        scale = sum(abs(c) for c in p.coeffs)
        assert all(abs(p.eval(r)) <= 1e-10 * scale for r in rts)

    @settings(max_examples=25, deadline=None)
    @given(separated_roots())
    def test_roots_recover_expansion(self, rts):
        p = expand_from_roots([(r, 1) for r in rts])
        assert match_multiset(roots(p), rts) < 1e-8


class TestRationalMap:
    def test_eval_and_poles(self):
        f = RationalMap(poly(0, 0, 3), poly(1, 0, 0, 2))  # 3z^2/(2z^3+1)
        assert abs(f.eval(1) - 1) < 1e-15
        assert abs(f.eval(OMEGA) - OMEGA.conjugate()) < 1e-14
        # real pole at 2z^3 + 1 = 0; just off it the value is huge, on it INF
        pole = -(0.5 ** (1.0 / 3.0))
        assert is_inf(f.eval(pole)) or abs(f.eval(pole)) > 1e12
        # value at infinity follows the degree comparison
        assert f.eval(INF) == 0

    def test_poly_at_infinity(self):
        assert is_inf(RationalMap.from_poly(poly(1, 0, 1)).eval(INF))

    def test_critical_points_power_map(self):
        f = RationalMap.from_poly(poly(0, 0, 1))
        assert f.critical_points() == [(0j, 1), (INF, 1)]

    def test_critical_points_cubic_family_alpha2(self):
        # member with moving critical point at alpha^2 = 4
        a = 2.0
        f = RationalMap(poly(2 * a, 0, 3, a), poly(1, 3 * a, 0, 2))
        got = f.critical_points()
        expected = [1, OMEGA, OMEGA.conjugate(), 4]
        assert len(got) == 4
        worst = max(min(chordal(z, e) for e in expected) for z, _ in got)
        assert worst < 1e-9
        assert all(m == 1 for _, m in got)

    def test_critical_points_galois_cubic(self):
        f = RationalMap(poly(0, 0, 3), poly(1, 0, 0, 2))
        got = f.critical_points()
        expected = [0, 1, OMEGA, OMEGA.conjugate()]
        assert len(got) == 4
        worst = max(min(chordal(z, e) for e in expected) for z, _ in got)
        assert worst < 1e-10

    def test_riemann_hurwitz_count(self):
        maps = [
            RationalMap.from_poly(poly(0.3, 0, 1)),
            RationalMap(poly(0, 0, 3), poly(1, 0, 0, 2)),
            RationalMap.from_poly(poly(0, 0, 1.5, 0, 0, 0, -0.5)),
            RationalMap(poly(2, 0, 0, 1), poly(0, 3)),
        ]
        for f in maps:
            total = sum(m for _, m in f.critical_points())
            assert total == 2 * f.degree - 2

    def test_preimages(self):
        s = RationalMap.from_poly(poly(0, 0, 1))
        pre = s.preimages(1 + 0j)
        assert [z for z, _ in pre] == [-1, 1]
        assert s.preimages(INF) == [(INF, 2)]

    def test_compose(self):
        u = (1 + 1j) / 2
        g = RationalMap.from_poly((poly(-u, 1) * poly(-u, 1)).scale(2j))
        s = RationalMap.from_poly(poly(0, 0, 1))
        f = g.compose(s)
        assert f.num.coeffs == (-1 + 0j, 0j, 2 - 2j, 0j, 2j)
        assert f.den.degree == 0

    def test_homogeneous_eval_matches_affine(self):
        f = RationalMap(poly(0, 0, 3), poly(1, 0, 0, 2))
        rng = np.random.default_rng(5)
        for _ in range(50):
            z = complex(*rng.uniform(-2, 2, 2))
            u, v = f.eval_homog(z, 1 + 0j)
            if abs(v) > 1e-12:
                assert abs(u / v - f.eval(z)) < 1e-10 * max(1.0, abs(u / v))


class TestChordal:
    def test_infinity_is_ordinary(self):
        assert chordal(INF, INF) == 0
        assert chordal(0, INF) == 2
        assert chordal(1e12, INF) < 1e-11

    def test_symmetry_and_scale(self):
        assert chordal(1, 1j) == pytest.approx(chordal(1j, 1))
        assert chordal(0, 1) == pytest.approx(math.sqrt(2))
