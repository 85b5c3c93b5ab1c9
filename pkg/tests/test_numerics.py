import pytest
from mpmath import mp, mpf, workprec

import nextremal as nx
from nextremal.numerics import GUARD_BITS


class TestPrecisionContext:
    def test_invariants(self):
        with pytest.raises(ValueError):
            nx.PrecisionContext(bits=32)
        with pytest.raises(ValueError):
            nx.PrecisionContext(max_terms=4)
        with pytest.raises(ValueError):
            nx.PrecisionContext(tail_tol=1.5)

    def test_ladder_doubles_to_ceiling(self):
        ctx = nx.PrecisionContext(bits=100, max_bits=500)
        assert [c.bits for c in ctx.ladder()] == [100, 200, 400, 500]


class TestSumSeries:
    def test_geometric(self, ctx):
        res = nx.sum_series(lambda k: mpf(2) ** (-k), ctx)
        assert res.converged
        assert abs(res.value - 2) <= mpf("1e-20")
        assert res.tail_bound <= mpf(ctx.tail_tol) * 2

    def test_divergent_constant(self, ctx):
        res = nx.sum_series(lambda k: mp.one, ctx)
        assert not res.converged
        assert res.terms_used == ctx.max_terms

    def test_finitely_supported_is_exact(self, ctx):
        # the k=0 term alone survives: one term, zero tail
        res = nx.sum_series(lambda k: mp.one if k == 0 else mp.zero, ctx)
        assert res.converged
        assert res.value == 1
        assert res.tail_bound == 0
        assert res.terms_used == 1

    def test_polynomial_generator_exact_sum(self, ctx):
        coeffs = [mpf(3), mpf(-1), mpf("0.25")]
        res = nx.sum_series(lambda k: coeffs[k] if k < 3 else mp.zero, ctx)
        assert res.converged
        assert res.value == mpf("2.25")
        assert res.tail_bound == 0

    def test_doubling_bits_stays_within_tail_bound(self, ctx):
        gen = lambda k: mpf(3) ** (-k) + mpf(7) ** (-k - 1)
        lo = nx.sum_series(gen, ctx)
        hi = nx.sum_series(gen, ctx.with_bits(2 * ctx.bits))
        assert lo.converged and hi.converged
        assert abs(lo.value - hi.value) <= lo.tail_bound + hi.tail_bound


class TestBracketedRoot:
    def test_sqrt_two_full_precision(self, ctx):
        root = nx.bracketed_root(lambda x: x * x - 2, 1, 2, ctx)
        assert abs(root - mp.sqrt(2)) <= mpf(2) ** (-ctx.bits + 9)

    def test_linear_through_zero(self, ctx):
        assert abs(nx.bracketed_root(lambda x: x, -1, 1, ctx)) <= mpf(2) ** (-ctx.bits + 9)

    def test_first_phi_zero_against_grid_scan_oracle(self, ctx, q_half):
        # oracle: locate the first sign change of the alternating q-series by
        # a dense partial-sum scan, independently of the library root finder
        def phi_partial(x, terms=64):
            total, poch, xk = mp.zero, mp.one, mp.one
            for k in range(terms):
                total += (-1) ** k * q_half.q ** (k * k) / poch * xk
                poch *= 1 - q_half.q ** (k + 1)
                xk *= x
            return total

        lo, hi = None, None
        prev_x, prev_sign = mpf(1), mp.sign(phi_partial(mpf(1)))
        for i in range(1, 10001):
            x = 1 + mpf(3) * i / 10000
            s = mp.sign(phi_partial(x))
            if s != prev_sign:
                lo, hi = prev_x, x
                break
            prev_x, prev_sign = x, s
        assert lo is not None
        root = nx.bracketed_root(lambda t: nx.ramanujan_phi(t, q_half, ctx).value,
                                 lo, hi, ctx)
        assert lo <= root <= hi
        # cross-check against the dedicated zero table
        table = nx.phi_zeros(q_half, 1, ctx)
        assert abs(root - table[0]) <= mpf("1e-50")

    def test_invalid_bracket_raises(self, ctx):
        with pytest.raises(ValueError, match="bracket"):
            nx.bracketed_root(lambda x: x * x + 1, -1, 1, ctx)

    def test_deterministic(self, ctx):
        f = lambda x: mp.cos(x) - x
        r1 = nx.bracketed_root(f, 0, 1, ctx)
        r2 = nx.bracketed_root(f, 0, 1, ctx)
        assert r1 == r2


class TestQuadrature:
    def test_exponential(self, ctx):
        res = nx.quadrature(lambda x: mp.e ** (-x), 0, mp.inf, ctx)
        assert res.converged
        assert abs(res.value - 1) <= mpf("1e-40")

    def test_sw_density_mass_is_one(self, ctx):
        res = nx.quadrature(lambda x: nx.sw_density(x, mpf("0.5"), ctx), 0, mp.inf, ctx)
        assert res.converged
        assert abs(res.value - 1) <= mpf("1e-30")

    def test_sw_density_first_moment(self, ctx):
        res = nx.quadrature(lambda x: x * nx.sw_density(x, mpf("0.5"), ctx),
                            0, mp.inf, ctx)
        assert res.converged
        assert abs(res.value - 2) <= mpf("1e-30") * 2

    def test_finite_interval(self, ctx):
        res = nx.quadrature(lambda x: x * x, 0, 1, ctx)
        assert res.converged
        assert abs(res.value - mpf(1) / 3) <= mpf("1e-40")


class TestGamma:
    def test_quarter_reflection(self, ctx):
        g14 = nx.gamma(mpf(1) / 4, ctx)
        g34 = nx.gamma(mpf(3) / 4, ctx)
        ref = mp.pi / mp.sin(mp.pi / 4)
        assert abs(g14 * g34 - ref) <= abs(ref) * mpf(2) ** (-ctx.bits + 8)
