"""Shared fixtures.  The expensive artifacts (zero tables, recovered
recurrences, N-extremal measures) are session-scoped and shared by the unit,
integration, and acceptance tests; everything is deterministic, so sharing
cannot couple test outcomes."""

import pytest
from mpmath import mp, mpf, workprec

import nextremal as nx

# Comparisons in tests run at this precision so that reference values
# (mp.sqrt(2), closed forms) are not silently truncated to float precision.
TEST_PREC = 420


@pytest.fixture(autouse=True)
def _high_precision_comparisons():
    with workprec(TEST_PREC):
        yield


@pytest.fixture(scope="session")
def ctx():
    return nx.PrecisionContext()


@pytest.fixture(scope="session")
def q_half():
    return nx.QParameter(mpf("0.5"))


@pytest.fixture(scope="session")
def sw(ctx):
    """Stieltjes-Wigert master bundle at q = 1/2.

    count=64 atoms per measure so transformed problems can be classified at
    depth 48 (their degree-97 moments draw on atoms around index 56); the
    recurrence is deep enough that Nevanlinna tails reach the default 1e-30
    tolerance.
    """
    q = mpf("0.5")
    with workprec(TEST_PREC):
        count = 64
        rc = nx.sw_recurrence(q, 2 * (count + 1) + 24, ctx)
        table = nx.sw_phi_table(q, count + 1, ctx)
        F = nx.friedrichs_parameter(rc, ctx)
        measures = {
            "friedrichs": nx.sw_nextremal("friedrichs", q, count, ctx),
            "t_one": nx.sw_nextremal("t_one", q, count, ctx),
            "krein": nx.sw_nextremal("krein", q, count, ctx),
        }
        return {
            "q": q, "count": count, "rc": rc, "table": table,
            "F": F.F, "alpha": F.alpha, "measures": measures,
            "s": nx.sw_moment_sequence(q, 2 * rc.length + 2, ctx),
            "grid_factor": q ** (mpf(-1) / 4),
        }


@pytest.fixture(scope="session")
def quartic(ctx):
    """Quartic-rate bundle: shallow measures for moment work plus a deep
    512-bit recurrence for the polynomially-converging mass sums."""
    with workprec(TEST_PREC):
        ctx512 = nx.PrecisionContext(bits=512)
        mu_F = nx.quartic_friedrichs(40, ctx)
        mu_K = nx.quartic_krein(40, ctx)
        deep = nx.quartic_friedrichs(450, ctx512)
        seq = nx.moment_sequence(deep, 2 * 192 + 2, ctx512)
        rc = nx.recurrence_from_moments(seq, 192, ctx512)
        shallow_seq = nx.moment_sequence(nx.quartic_friedrichs(96, ctx), 2 * 32 + 2, ctx)
        rc32 = nx.recurrence_from_moments(shallow_seq, 32, ctx)
        return {"mu_F": mu_F, "mu_K": mu_K, "rc": rc, "rc32": rc32,
                "ctx512": ctx512}


@pytest.fixture(scope="session")
def asc(ctx):
    """Al-Salam-Carlitz bundle at (a, q) = (3/2, 1/2).

    The recurrence depth 112 lets the Nevanlinna series (term ratio ~ 3/4)
    reach 1e-13 tails for parameter recovery at the atoms.
    """
    with workprec(TEST_PREC):
        a, q = mpf("1.5"), mpf("0.5")
        mu_F = nx.asc_friedrichs(a, q, 128, ctx)
        mu_K = nx.asc_krein(a, q, 128, ctx)
        seq = nx.moment_sequence(mu_F, 2 * 112 + 2, ctx)
        rc = nx.recurrence_from_moments(seq, 112, ctx)
        return {"a": a, "q": q, "mu_F": mu_F, "mu_K": mu_K, "rc": rc,
                "F_series": nx.asc_F(a, q, ctx)}
