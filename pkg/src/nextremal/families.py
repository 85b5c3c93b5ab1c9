"""The three explicit indeterminate Stieltjes families: quartic rates,
Al-Salam--Carlitz, and Stieltjes--Wigert.

Each constructor returns a DiscreteMeasure whose truncation tails are bounded
from the decay of its closed-form masses (sinh decay for the quartic family,
q^{k^2} decay for the q-lattices).  Atom counts default high enough that a
truncated measure reproduces moments up to degree ~2*count - 16 at full
precision; deeper work (classification of transformed problems) simply asks
for more atoms.

Everything is deterministic and cached per (family, parameters, count, bits):
the Stieltjes--Wigert recurrence recovery and the zero table of the q-series
Phi are the expensive pieces shared by many operations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from mpmath import mp, mpf, workprec

from . import numerics
from .measures import DiscreteMeasure, geometric_tail_bounds, moment_sequence
from .moments import MomentSequence, RecurrenceCoefficients, recurrence_from_moments
from .nevanlinna import mass_at
from .numerics import DEFAULT_CTX, GUARD_BITS, PrecisionContext
from .qcalc import PhiZeroTable, QParameter, gauss_binomial, phi_zeros, qpochhammer

_cache: dict = {}


@dataclass(frozen=True)
class QuarticConstants:
    """K0 = Gamma(1/4)^2 / (4 sqrt(pi)) and the normalizer 4 pi / K0^2."""

    K0: mpf
    normalizer: mpf

    @classmethod
    def compute(cls, ctx: PrecisionContext = DEFAULT_CTX) -> "QuarticConstants":
        with ctx.working():
            g = numerics.gamma(mpf(1) / 4, ctx)
            # reflection cross-check: Gamma(1/4) Gamma(3/4) = pi / sin(pi/4)
            other = numerics.gamma(mpf(3) / 4, ctx)
            ref = mp.pi / mp.sin(mp.pi / 4)
            if abs(g * other - ref) > abs(ref) * mpf(2) ** (-ctx.bits + 8):
                raise ArithmeticError("gamma reflection identity violated")
            K0 = g ** 2 / (4 * mp.sqrt(mp.pi))
            return cls(K0=K0, normalizer=4 * mp.pi / K0 ** 2)


@dataclass(frozen=True)
class FamilyHandle:
    """Family selector used by the verification harness and the CLI."""

    family: str               # "quartic" | "al_salam_carlitz" | "stieltjes_wigert"
    q: object = None
    a: object = None
    atom_count: int = 40

    def __post_init__(self):
        if self.family not in ("quartic", "al_salam_carlitz", "stieltjes_wigert"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "quartic":
            if self.q is not None or self.a is not None:
                raise ValueError("the quartic family takes no parameters")
        elif self.family == "stieltjes_wigert":
            if self.q is None:
                raise ValueError("stieltjes_wigert needs q")
            object.__setattr__(self, "q", mpf(self.q))
        else:
            if self.q is None or self.a is None:
                raise ValueError("al_salam_carlitz needs a and q")
            qv, av = mpf(self.q), mpf(self.a)
            object.__setattr__(self, "q", qv)
            object.__setattr__(self, "a", av)
            if not (0 < qv < 1 < av < 1 / qv):
                raise ValueError("need 0 < q < 1 < a < 1/q")


# --- quartic rates ----------------------------------------------------------

def _quartic_tail(masses_fn, atoms_fn, count, max_degree):
    atoms = [atoms_fn(k) for k in range(count)]
    masses = [masses_fn(k) for k in range(count)]
    bounds = geometric_tail_bounds(atoms if atoms[0] != 0 else atoms[1:],
                                   masses if atoms[0] != 0 else masses[1:],
                                   atoms_fn(count), masses_fn(count), max_degree)
    return atoms, masses, bounds


def quartic_friedrichs(count: int, ctx: PrecisionContext = DEFAULT_CTX) -> DiscreteMeasure:
    """Friedrichs solution of the quartic-rate problem: atoms (2k+1)^4 with
    masses 4 pi/K0^2 * (2k+1) pi / sinh((2k+1) pi); a probability measure."""
    if count < 1:
        raise ValueError("count must be >= 1")
    with ctx.working():
        c = QuarticConstants.compute(ctx)
        atom = lambda k: mpf((2 * k + 1) ** 4)
        mass = lambda k: c.normalizer * (2 * k + 1) * mp.pi / mp.sinh((2 * k + 1) * mp.pi)
        atoms, masses, bounds = _quartic_tail(mass, atom, count, 4 * count)
        return DiscreteMeasure(atoms=tuple(atoms), masses=tuple(masses),
                               tail_mass_bound=bounds.get(0, mp.inf),
                               tail_moment_bounds=bounds,
                               label="quartic-friedrichs")


def quartic_krein(count: int, ctx: PrecisionContext = DEFAULT_CTX) -> DiscreteMeasure:
    """Krein solution: pi/K0^2 at 0 plus masses 4 pi/K0^2 * 2k pi / sinh(2k pi)
    at (2k)^4, k >= 1."""
    if count < 1:
        raise ValueError("count must be >= 1")
    with ctx.working():
        c = QuarticConstants.compute(ctx)
        atom = lambda k: mpf((2 * k) ** 4)
        mass = lambda k: (c.normalizer / 4 if k == 0
                          else c.normalizer * 2 * k * mp.pi / mp.sinh(2 * k * mp.pi))
        atoms, masses, bounds = _quartic_tail(mass, atom, count, 4 * count)
        return DiscreteMeasure(atoms=tuple(atoms), masses=tuple(masses),
                               tail_mass_bound=bounds.get(0, mp.inf),
                               tail_moment_bounds=bounds,
                               label="quartic-krein")


def quartic_mu_c(c_exp, count: int, ctx: PrecisionContext = DEFAULT_CTX) -> DiscreteMeasure:
    """The unnormalized family with masses (2k+1) pi/sinh((2k+1) pi) (2k+1)^c
    at (2k+1)^4.  c = 0 recovers the Friedrichs weights up to the global
    normalizer; c = -4 is the reciprocal-density transform and is determinate."""
    if count < 1:
        raise ValueError("count must be >= 1")
    with ctx.working():
        cv = mp.mpmathify(c_exp)
        atom = lambda k: mpf((2 * k + 1) ** 4)
        mass = lambda k: (2 * k + 1) * mp.pi / mp.sinh((2 * k + 1) * mp.pi) * mpf(2 * k + 1) ** cv
        atoms, masses, bounds = _quartic_tail(mass, atom, count, 4 * count)
        return DiscreteMeasure(atoms=tuple(atoms), masses=tuple(masses),
                               tail_mass_bound=bounds.get(0, mp.inf),
                               tail_moment_bounds=bounds,
                               label=f"quartic-mu-c({mp.nstr(cv, 6)})")


# --- Al-Salam--Carlitz ------------------------------------------------------

def _asc_validate(a, q):
    av, qv = mpf(a), mpf(q)
    if not (0 < qv < 1 < av < 1 / qv):
        raise ValueError(f"need 0 < q < 1 < a < 1/q, got a={mp.nstr(av)}, q={mp.nstr(qv)}")
    return av, qv


def _asc_bits(count: int, q, ctx: PrecisionContext) -> int:
    # atoms grow like a q^-k: k_max * log2(1/q) + 64 extra bits keep the
    # masses' q^{k^2} factors at full relative accuracy
    return ctx.bits + int(count * QParameter(mpf(q)).log2_inv) + 64


def asc_friedrichs(a, q, count: int, ctx: PrecisionContext = DEFAULT_CTX) -> DiscreteMeasure:
    """Friedrichs solution of the Al-Salam--Carlitz problem: atoms a q^-k - 1,
    masses (q/a;q)_inf a^-k q^{k^2} / ((q/a;q)_k (q;q)_k)."""
    av, qv = _asc_validate(a, q)
    with workprec(_asc_bits(count, qv, ctx)):
        qp = QParameter(qv)
        pref = qpochhammer(qv / av, qp)
        atom = lambda k: av * qv ** (-k) - 1
        mass = lambda k: (pref * av ** (-k) * qv ** (k * k)
                          / (qpochhammer(qv / av, qp, k) * qpochhammer(qv, qp, k)))
        atoms = [atom(k) for k in range(count)]
        masses = [mass(k) for k in range(count)]
        bounds = geometric_tail_bounds(atoms, masses, atom(count), mass(count), 4 * count)
        return DiscreteMeasure(atoms=tuple(atoms), masses=tuple(masses),
                               tail_mass_bound=bounds.get(0, mp.inf),
                               tail_moment_bounds=bounds,
                               label=f"asc-friedrichs(a={mp.nstr(av, 6)},q={mp.nstr(qv, 6)})")


def asc_krein(a, q, count: int, ctx: PrecisionContext = DEFAULT_CTX) -> DiscreteMeasure:
    """Krein solution: atoms q^-k - 1 (charging 0 at k = 0), masses
    (aq;q)_inf a^k q^{k^2} / ((aq;q)_k (q;q)_k)."""
    av, qv = _asc_validate(a, q)
    with workprec(_asc_bits(count, qv, ctx)):
        qp = QParameter(qv)
        pref = qpochhammer(av * qv, qp)
        atom = lambda k: qv ** (-k) - 1
        mass = lambda k: (pref * av ** k * qv ** (k * k)
                          / (qpochhammer(av * qv, qp, k) * qpochhammer(qv, qp, k)))
        atoms = [atom(k) for k in range(count)]
        masses = [mass(k) for k in range(count)]
        bounds = geometric_tail_bounds(atoms[1:], masses[1:], atom(count), mass(count),
                                       4 * count)
        return DiscreteMeasure(atoms=tuple(atoms), masses=tuple(masses),
                               tail_mass_bound=bounds.get(0, mp.inf),
                               tail_moment_bounds=bounds,
                               label=f"asc-krein(a={mp.nstr(av, 6)},q={mp.nstr(qv, 6)})")


def asc_F(a, q, ctx: PrecisionContext = DEFAULT_CTX):
    """Friedrichs parameter of the Al-Salam--Carlitz problem:
    (q;q)_inf * sum_k q^k / ((a - q^k) (q;q)_k)."""
    av, qv = _asc_validate(a, q)
    with ctx.working():
        qp = QParameter(qv)
        pref = qpochhammer(qv, qp)
        poch = mp.one
        total = mp.zero
        k = 0
        while True:
            term = qv ** k / ((av - qv ** k) * poch)
            total += term
            if k > 4 and term < mpf(2) ** (-ctx.bits - 16) * total:
                break
            poch *= 1 - qv ** (k + 1)
            k += 1
        return pref * total


# --- Stieltjes--Wigert ------------------------------------------------------

def sw_density(x, q, ctx: PrecisionContext = DEFAULT_CTX):
    """The log-normal density q^{1/8} / sqrt(2 pi log(1/q)) x^{-1/2}
    exp(-log^2(x) / (2 log(1/q))) on x > 0."""
    qv = mpf(q)
    QParameter(qv)
    with ctx.working():
        xx = mp.mpmathify(x)
        if not xx > 0:
            raise ValueError("density defined for x > 0")
        lg = mp.log(1 / qv)
        return (qv ** (mpf(1) / 8) / mp.sqrt(2 * mp.pi * lg)
                * xx ** (mpf(-1) / 2) * mp.exp(-mp.log(xx) ** 2 / (2 * lg)))


def sw_moment(n: int, q, ctx: PrecisionContext = DEFAULT_CTX):
    """n-th moment q^{-n(n+1)/2} of the log-normal density above."""
    if n < 0:
        raise ValueError("n must be >= 0")
    qv = mpf(q)
    QParameter(qv)
    with ctx.working():
        return mp.power(qv, mpf(-n * (n + 1)) / 2)


def sw_moment_sequence(q, n_max: int, ctx: PrecisionContext = DEFAULT_CTX) -> MomentSequence:
    with ctx.working():
        return MomentSequence(tuple(sw_moment(n, q, ctx) for n in range(n_max + 1)),
                              source="closed-form", normalized=True)


def sw_p(n: int, x, q, ctx: PrecisionContext = DEFAULT_CTX):
    """Orthonormal polynomial value by the closed form
    (-1)^n sqrt(q^n/(q;q)_n) sum_k [n k]_q (-1)^k q^{k^2} x^k.

    The alternating sum cancels down to ~q^{-n} near the top zero, so the
    working precision grows with the same max-term guard used for the entire
    q-series.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    qp = QParameter(mpf(q))
    from .qcalc import _phi_guard_bits
    guard = _phi_guard_bits(mp.mpmathify(x), qp) + 2 * n
    with workprec(ctx.bits + guard + GUARD_BITS):
        qv = qp.q
        xx = mp.mpmathify(x)
        total = mp.zero
        for k in range(n + 1):
            total += gauss_binomial(n, k, qp) * (-1) ** k * qv ** (k * k) * xx ** k
        norm = mp.sqrt(qv ** n / qpochhammer(qv, qp, n))
        return (-1) ** n * norm * total


def sw_recurrence(q, n_max: int, ctx: PrecisionContext = DEFAULT_CTX) -> RecurrenceCoefficients:
    """Jacobi coefficients recovered from the closed-form moments (cached)."""
    key = ("sw_rc", str(mpf(q)), n_max, ctx.bits)
    if key not in _cache:
        seq = sw_moment_sequence(q, 2 * n_max + 1, ctx)
        _cache[key] = recurrence_from_moments(seq, n_max, ctx)
    return _cache[key]


def sw_phi_table(q, count: int, ctx: PrecisionContext = DEFAULT_CTX) -> PhiZeroTable:
    key = ("sw_zeros", str(mpf(q)), count, ctx.bits)
    if key not in _cache:
        _cache[key] = phi_zeros(QParameter(mpf(q)), count, ctx)
    return _cache[key]


def sw_nextremal(which: str, q, count: int,
                 ctx: PrecisionContext = DEFAULT_CTX) -> DiscreteMeasure:
    """The three explicitly known N-extremal solutions of the Stieltjes-Wigert
    problem: "friedrichs" sits on the zeros xi_k of Phi, "t_one" on (q xi_k),
    and "krein" on {0} + (xi_k / q); every mass is rho(atom) = 1/sum p_n^2.
    """
    if which not in ("friedrichs", "t_one", "krein"):
        raise ValueError(f"unknown solution {which!r}")
    qv = mpf(q)
    table = sw_phi_table(qv, count + 1, ctx)
    # masses at atom ~ xi_k need the p_n series summed past its peak at ~2k
    rc = sw_recurrence(qv, 2 * (count + 1) + 24, ctx)
    with ctx.working():
        if which == "friedrichs":
            atoms = [table[k] for k in range(count + 1)]
        elif which == "t_one":
            atoms = [qv * table[k] for k in range(count + 1)]
        else:
            atoms = [mp.zero] + [table[k] / qv for k in range(count)]
        masses = []
        for x in atoms[: count]:
            res = mass_at(rc, x, ctx)
            masses.append(res.value)
        kept_atoms = atoms[: count]
        extra_atom = atoms[count]
        extra_mass = mass_at(rc, extra_atom, ctx).value
        start = 1 if which == "krein" else 0
        bounds = geometric_tail_bounds(kept_atoms[start:], masses[start:],
                                       extra_atom, extra_mass, 4 * count)
        return DiscreteMeasure(atoms=tuple(kept_atoms), masses=tuple(masses),
                               tail_mass_bound=bounds.get(0, mp.inf),
                               tail_moment_bounds=bounds,
                               label=f"sw-{which}(q={mp.nstr(qv, 6)})")
