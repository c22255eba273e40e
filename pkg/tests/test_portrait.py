import pytest

from pullback_lab.portrait import (
    MarkedPoint,
    PortraitError,
    RamificationPortrait,
    degree6_family_portrait,
    dendrite_quartic_portrait,
    fixed_critical_cubic_portrait,
    galois_cubic_portrait,
    load_portrait,
    mu_nu,
    orbit_of,
    parse_portrait,
    periodic_quadratic_portrait,
    portrait_to_text,
    rabbit_portrait,
    validate,
)


class TestValidate:
    def test_rabbit(self):
        rep = validate(rabbit_portrait())
        assert rep.degree == 2
        assert rep.n == 1
        assert rep.polynomial and rep.all_critical_periodic and rep.is_permutation

    def test_galois_cubic_is_not_polynomial(self):
        rep = validate(galois_cubic_portrait())
        assert not rep.polynomial
        assert rep.all_critical_periodic
        assert rep.is_permutation
        assert rep.n == 1

    def test_preperiodic_critical_point_classified(self):
        rep = validate(dendrite_quartic_portrait())
        assert rep.polynomial
        assert not rep.all_critical_periodic
        assert not rep.is_permutation

    def test_multiplicity_sum_enforced(self):
        pts = (
            MarkedPoint("a", "a", 2),  # should be 1 for degree 2
            MarkedPoint("inf", "inf", 1),
        )
        with pytest.raises(PortraitError, match="sum"):
            validate(RamificationPortrait(2, pts, True))

    def test_dangling_label(self):
        pts = (MarkedPoint("a", "ghost", 1), MarkedPoint("inf", "inf", 1))
        with pytest.raises(PortraitError, match="dangling"):
            validate(RamificationPortrait(2, pts, True))

    def test_degree_too_small(self):
        pts = (MarkedPoint("a", "a", 0),)
        with pytest.raises(PortraitError, match="degree"):
            validate(RamificationPortrait(1, pts, False))

    def test_duplicate_labels(self):
        pts = (
            MarkedPoint("a", "a", 1),
            MarkedPoint("a", "a", 0),
            MarkedPoint("inf", "inf", 1),
        )
        with pytest.raises(PortraitError, match="duplicate"):
            validate(RamificationPortrait(2, pts, True))

    def test_inf_reserved_for_polynomials(self):
        pts = (MarkedPoint("inf", "inf", 1), MarkedPoint("b", "b", 1))
        with pytest.raises(PortraitError, match="reserved"):
            validate(RamificationPortrait(2, pts, False))

    def test_finite_point_cannot_map_to_inf(self):
        pts = (
            MarkedPoint("a", "inf", 1),
            MarkedPoint("inf", "inf", 1),
        )
        with pytest.raises(PortraitError, match="cannot map"):
            validate(RamificationPortrait(2, pts, True))

    def test_pure_and_idempotent(self):
        p = rabbit_portrait()
        assert validate(p).to_text() == validate(p).to_text()


class TestOrbitOf:
    def test_rabbit_cycle(self):
        assert orbit_of(rabbit_portrait(), "p0") == (0, 3)

    def test_preperiodic_tail(self):
        assert orbit_of(dendrite_quartic_portrait(), "0") == (2, 1)

    def test_fixed_infinity(self):
        assert orbit_of(rabbit_portrait(), "inf") == (0, 1)

    def test_unknown_label(self):
        with pytest.raises(PortraitError):
            orbit_of(rabbit_portrait(), "nope")


class TestMuNu:
    def test_rabbit_three_cycle(self):
        mu, nu = mu_nu(rabbit_portrait())
        assert mu == (1, 2, 0)
        assert nu == (2, 0, 1)

    def test_all_fixed_is_identity(self):
        mu, nu = mu_nu(fixed_critical_cubic_portrait())
        assert mu == nu == (0, 1, 2)

    def test_swap_is_self_inverse(self):
        mu, nu = mu_nu(galois_cubic_portrait())
        assert mu == nu
        assert mu[2] == 3 and mu[3] == 2

    def test_inverse_property(self):
        for p in (rabbit_portrait(), periodic_quadratic_portrait(4), galois_cubic_portrait()):
            mu, nu = mu_nu(p)
            assert all(nu[mu[k]] == k for k in range(len(mu)))

    def test_not_a_permutation(self):
        with pytest.raises(PortraitError, match="permutation"):
            mu_nu(dendrite_quartic_portrait())


class TestStockPortraits:
    def test_polynomial_multiplicity_sums(self):
        for p in (
            rabbit_portrait(),
            periodic_quadratic_portrait(4),
            fixed_critical_cubic_portrait(),
            dendrite_quartic_portrait(),
            degree6_family_portrait(),
        ):
            finite = sum(q.multiplicity for q in p.finite_points())
            assert finite == p.degree - 1


class TestFileFormat:
    def test_round_trip(self):
        p = rabbit_portrait()
        assert parse_portrait(portrait_to_text(p)) == p

    def test_shipped_files_load(self, portraits_dir):
        for name in (
            "rabbit.txt",
            "period4.txt",
            "cubic_fixed.txt",
            "galois_cubic.txt",
            "dendrite_quartic.txt",
            "degree6_family.txt",
        ):
            validate(load_portrait(portraits_dir / name))

    def test_shipped_rabbit_matches_builtin(self, portraits_dir):
        assert load_portrait(portraits_dir / "rabbit.txt") == rabbit_portrait()

    def test_unknown_field_rejected(self):
        with pytest.raises(PortraitError, match="unknown field"):
            parse_portrait("degree 2\npolynomial true\ncolour red\n")

    def test_duplicate_scalar_rejected(self):
        with pytest.raises(PortraitError, match="duplicate"):
            parse_portrait("degree 2\ndegree 3\npolynomial true\npoint a a 1\n")

    def test_missing_fields_rejected(self):
        with pytest.raises(PortraitError, match="missing"):
            parse_portrait("polynomial true\npoint a a 1\n")

    def test_comments_and_blanks_ignored(self):
        text = "# header\n\ndegree 2\npolynomial true\npoint p0 p0 1  # fixed\npoint inf inf 1\n"
        p = parse_portrait(text)
        assert p.degree == 2 and len(p.points) == 2
