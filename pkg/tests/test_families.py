import pytest
from mpmath import mp, mpf, workprec

import nextremal as nx


class TestQuarticConstants:
    def test_k0_value(self, ctx):
        c = nx.QuarticConstants.compute(ctx)
        direct = mp.gamma(mpf(1) / 4) ** 2 / (4 * mp.sqrt(mp.pi))
        assert abs(c.K0 - direct) <= direct * mpf(2) ** (-200)
        assert abs(c.normalizer - 4 * mp.pi / c.K0 ** 2) <= mpf(2) ** (-200)


class TestQuarticFriedrichs:
    def test_atoms_and_first_masses(self, ctx, quartic):
        m = quartic["mu_F"]
        assert m.atoms[0] == 1
        assert m.atoms[1] == 81
        c = nx.QuarticConstants.compute(ctx)
        expected = c.normalizer * 3 * mp.pi / mp.sinh(3 * mp.pi)
        assert abs(m.masses[1] - expected) <= expected * mpf(2) ** (-200)

    def test_total_mass_one(self, ctx, quartic):
        assert abs(quartic["mu_F"].total_mass() - 1) <= mpf("1e-12")

    def test_xi(self, quartic):
        assert nx.xi(quartic["mu_F"]) == 1


class TestQuarticKrein:
    def test_zero_atom_mass(self, ctx, quartic):
        m = quartic["mu_K"]
        c = nx.QuarticConstants.compute(ctx)
        assert m.atoms[0] == 0
        assert abs(m.masses[0] - mp.pi / c.K0 ** 2) <= mpf(2) ** (-200)

    def test_total_mass_one(self, ctx, quartic):
        assert abs(quartic["mu_K"].total_mass() - 1) <= mpf("1e-12")


class TestQuarticMuC:
    def test_c_zero_proportional_to_friedrichs(self, ctx, quartic):
        mu_c = nx.quartic_mu_c(0, 40, ctx)
        c = nx.QuarticConstants.compute(ctx)
        for got, want in zip(mu_c.masses[:6], quartic["mu_F"].masses[:6]):
            assert abs(got * c.normalizer - want) <= abs(want) * mpf(2) ** (-180)

    def test_c_four_multiplies_by_atom(self, ctx):
        mu0 = nx.quartic_mu_c(0, 20, ctx)
        mu4 = nx.quartic_mu_c(4, 20, ctx)
        for x, m0, m4 in zip(mu0.atoms, mu0.masses, mu4.masses):
            assert abs(m4 - x * m0) <= abs(x * m0) * mpf(2) ** (-180)

    def test_c_minus_four_determinate(self, ctx):
        mu = nx.quartic_mu_c(-4, 96, ctx)
        seq = nx.normalize(nx.moment_sequence(mu, 2 * 32 + 1, ctx))
        rc = nx.recurrence_from_moments(seq, 32, ctx)
        assert nx.classify(rc, ctx).verdict == "determinate"

    def test_quartic_family_indeterminate(self, ctx, quartic):
        assert nx.classify(quartic["rc32"], ctx).verdict == "indeterminate"


class TestAlSalamCarlitz:
    def test_parameter_domain(self, ctx):
        with pytest.raises(ValueError):
            nx.asc_friedrichs(mpf("2.5"), mpf("0.5"), 10, ctx)  # a >= 1/q
        with pytest.raises(ValueError):
            nx.asc_krein(mpf("0.9"), mpf("0.5"), 10, ctx)  # a <= 1

    def test_krein_charges_zero(self, asc):
        assert asc["mu_K"].atoms[0] == 0

    def test_total_masses_one(self, asc):
        assert abs(asc["mu_F"].total_mass() - 1) <= mpf("1e-12")
        assert abs(asc["mu_K"].total_mass() - 1) <= mpf("1e-12")

    def test_moments_agree(self, ctx, asc):
        for n in range(7):
            vF, _ = nx.moment(asc["mu_F"], n)
            vK, _ = nx.moment(asc["mu_K"], n)
            assert abs(vF - vK) <= abs(vF) * mpf("1e-12")

    def test_atoms_interlace(self, asc):
        a, q = asc["a"], asc["q"]
        # friedrichs atoms a q^-k - 1 and krein atoms q^-k - 1 alternate
        merged = sorted([(x, 0) for x in asc["mu_F"].atoms[:10]]
                        + [(x, 1) for x in asc["mu_K"].atoms[:10]])
        labels = [l for _, l in merged]
        assert all(l1 != l2 for l1, l2 in zip(labels, labels[1:]))

    def test_F_series_positive(self, asc):
        assert asc["F_series"] > 0

    def test_F_series_matches_recovered_parameter(self, ctx, asc):
        sc = nx.friedrichs_parameter(asc["rc"], ctx)
        assert sc.converged
        assert abs(sc.F - asc["F_series"]) <= mpf("1e-8")

    def test_parameter_of_point_at_first_atom(self, ctx, asc):
        # the first Friedrichs atom a - 1 must map back to F(s)
        nev_ctx = ctx.with_tail_tol(mpf("1e-13"))
        t = nx.parameter_of_point(asc["rc"], asc["mu_F"].atoms[0], nev_ctx)
        assert abs(t - asc["F_series"]) <= mpf("1e-8")


class TestStieltjesWigert:
    def test_density_domain(self, ctx):
        with pytest.raises(ValueError, match="x > 0"):
            nx.sw_density(0, mpf("0.5"), ctx)

    def test_moment_values(self, ctx):
        assert nx.sw_moment(0, mpf("0.5"), ctx) == 1
        assert nx.sw_moment(2, mpf("0.5"), ctx) == 8

    def test_p0_is_one(self, ctx):
        for x in (mpf("0.1"), mpf(3)):
            assert nx.sw_p(0, x, mpf("0.5"), ctx) == 1

    def test_krein_charges_zero(self, sw):
        assert nx.xi(sw["measures"]["krein"]) == 0

    def test_supports_interlace(self, sw):
        mF = sw["measures"]["friedrichs"].atoms[:12]
        mK = sw["measures"]["krein"].atoms[:12]
        merged = sorted([(x, 0) for x in mF] + [(x, 1) for x in mK])
        labels = [l for _, l in merged]
        assert all(l1 != l2 for l1, l2 in zip(labels, labels[1:]))

    def test_t_one_parameters(self, ctx, sw):
        for x0 in sw["measures"]["t_one"].atoms[:3]:
            t = nx.parameter_of_point(sw["rc"], x0, ctx)
            assert abs(t - 1) <= mpf("1e-12")

    def test_unknown_solution_rejected(self, ctx):
        with pytest.raises(ValueError, match="unknown solution"):
            nx.sw_nextremal("median", mpf("0.5"), 8, ctx)


class TestFamilyMomentSequencesPositive:
    def test_hankel_pd_up_to_ten(self, ctx, sw, quartic, asc):
        sequences = {
            "sw": sw["s"],
            "quartic": nx.moment_sequence(quartic["mu_F"], 21, ctx),
            "asc": nx.moment_sequence(asc["mu_F"], 21, ctx),
        }
        for name, seq in sequences.items():
            assert nx.hankel_positive_definite(seq, 10, ctx), name


class TestSmallestZeroApproach:
    def test_monotone_in_n(self, ctx, sw):
        # smallest zero of p_n computed from the explicit polynomial by a
        # sign scan + bisection, independent of the recurrence machinery
        q = sw["q"]
        xi1 = sw["table"][0]
        values = []
        for n in (5, 10, 20, 40):
            f = lambda x: nx.sw_p(n, x, q, ctx)
            hi = xi1 * mpf("1.0001")
            x = hi
            fx = f(x)
            step = mpf(2) ** (mpf(1) / 8)
            while True:
                x2 = x / step
                f2 = f(x2)
                if f2 * fx < 0:
                    root = nx.bracketed_root(f, x2, x, ctx)
                    break
                x, fx = x2, f2
            values.append(root)
        assert values == sorted(values)
        assert all(v < xi1 for v in values)
        assert abs(values[-1] - xi1) <= mpf("1e-4")


class TestFamilyHandle:
    def test_validation(self):
        with pytest.raises(ValueError):
            nx.FamilyHandle(family="cubic")
        with pytest.raises(ValueError):
            nx.FamilyHandle(family="quartic", q=mpf("0.5"))
        with pytest.raises(ValueError):
            nx.FamilyHandle(family="stieltjes_wigert")
        with pytest.raises(ValueError):
            nx.FamilyHandle(family="al_salam_carlitz", a=mpf(3), q=mpf("0.5"))
        h = nx.FamilyHandle(family="al_salam_carlitz", a=mpf("1.5"), q=mpf("0.5"))
        assert h.atom_count == 40
