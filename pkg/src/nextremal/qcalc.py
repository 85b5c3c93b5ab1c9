"""q-calculus primitives: q-Pochhammer symbols, Gaussian binomials, and the
entire function Phi(x) = sum_k (-1)^k q^{k^2}/(q;q)_k x^k together with its
positive zero sequence xi_1 < xi_2 < ...

Phi's zeros carry the supports of the Stieltjes-Wigert N-extremal measures,
so they are located carefully: evaluation works at an elevated precision that
absorbs the cancellation between terms of size up to max_k q^{k^2} x^k, and
the zeros are polished to the full requested precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from mpmath import mp, mpf, workprec

from .numerics import (DEFAULT_CTX, GUARD_BITS, Inconclusive, PrecisionContext,
                       SummationResult, bracketed_root, sum_series)


@dataclass(frozen=True)
class QParameter:
    """Base q with 0 < q < 1."""

    q: mpf

    def __post_init__(self):
        qv = mpf(self.q) if not isinstance(self.q, mpf) else self.q
        object.__setattr__(self, "q", qv)
        if not (0 < qv < 1):
            raise ValueError(f"q must lie in (0,1), got {mp.nstr(qv)}")

    @property
    def log2_inv(self) -> float:
        """log2(1/q), used for precision planning."""
        return -math.log(float(self.q), 2)


def qpochhammer(z, q: QParameter, n=None):
    """(z;q)_n = prod_{k=0}^{n-1} (1 - z q^k); n=None (or mp.inf) for n=infinity.

    The finite product is evaluated exactly at working precision.  The
    infinite product truncates once |z| q^k falls below the unit roundoff.
    """
    qq = q.q
    if n is not None and n not in (mp.inf, math.inf):
        n = int(n)
        if n < 0:
            raise ValueError("n must be >= 0 or infinity")
        out = mp.one
        f = mp.mpmathify(z)
        for _ in range(n):
            out *= 1 - f
            f *= qq
        return out
    out = mp.one
    f = mp.mpmathify(z)
    tiny = mpf(2) ** (-mp.prec)
    while abs(f) >= tiny:
        out *= 1 - f
        f *= qq
    return out


def gauss_binomial(n: int, k: int, q: QParameter):
    """Gaussian binomial (q;q)_n / ((q;q)_k (q;q)_{n-k}).

    Computed as prod_{i=1}^{k} (1 - q^{n-k+i}) / (1 - q^i): every factor is
    positive for 0 < q < 1, so there is no cancellation.
    """
    if k < 0 or k > n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    qq = q.q
    k = min(k, n - k)
    out = mp.one
    for i in range(1, k + 1):
        out *= (1 - qq ** (n - k + i)) / (1 - qq ** i)
    return out


def _phi_guard_bits(x, q: QParameter) -> int:
    """Bits of cancellation in Phi(x): log2 of the largest term magnitude.

    Terms have size q^{k^2} |x|^k, maximal near k* = log2|x| / (2 log2(1/q)).
    """
    ax = abs(x)
    if ax <= 1:
        return 0
    lx = float(mp.log(ax, 2))
    L = q.log2_inv
    kstar = lx / (2 * L)
    return int(max(0.0, kstar * lx - kstar * kstar * L)) + 16


def ramanujan_phi(x, q: QParameter, ctx: PrecisionContext = DEFAULT_CTX) -> SummationResult:
    """Phi(x) = sum_{k>=0} (-1)^k q^{k^2}/(q;q)_k x^k (entire; always converges).

    The reported value is accurate to roughly 2^-bits relative to the largest
    term, which is the natural scale near a zero: the series is summed with a
    precision-scaled tolerance (not just the context tail tolerance) so that
    zero locations resolve to the full bit budget.  tail_bound follows the
    geometric three-ratio estimate.
    """
    guard = _phi_guard_bits(x, q)
    tol = min(mpf(ctx.tail_tol), mpf(2) ** (-ctx.bits))
    work = ctx.with_bits(ctx.bits + guard).with_tail_tol(tol)
    with work.working():
        qq = q.q
        xx = mp.mpmathify(x)
        state = {"poch": mp.one, "xk": mp.one, "k": 0}

        def term(k: int):
            # terms are consumed sequentially; keep running q-Pochhammer/power
            assert k == state["k"], "term generator must be consumed in order"
            t = (-1) ** k * mp.power(qq, k * k) / state["poch"] * state["xk"]
            state["poch"] *= 1 - qq ** (k + 1)
            state["xk"] *= xx
            state["k"] += 1
            return t

        return sum_series(term, work)


@dataclass(frozen=True)
class PhiZeroTable:
    """First `count` zeros of Phi for a fixed q, strictly increasing.

    Consecutive zeros are checked against the separation bound
    xi_{n+1}/xi_n > q^{-2}; violating tables are rejected at construction.
    """

    q: QParameter
    zeros: tuple
    count: int
    bits: int

    def __post_init__(self):
        sep = self.q.q ** -2
        for i in range(len(self.zeros) - 1):
            if not self.zeros[i + 1] / self.zeros[i] > sep:
                raise ValueError(
                    f"zero separation violated at index {i}: "
                    f"{mp.nstr(self.zeros[i + 1] / self.zeros[i])} <= q^-2")

    def __len__(self):
        return len(self.zeros)

    def __getitem__(self, i):
        return self.zeros[i]


def phi_zeros(q: QParameter, count: int, ctx: PrecisionContext = DEFAULT_CTX) -> PhiZeroTable:
    """Locate the first `count` zeros of Phi by a geometric sign scan plus
    bracketed root polishing.

    The scan walks the grid x_j = start * q^{-j/4}; the q^{-2} separation of
    consecutive zeros guarantees at least eight grid points between them, so
    every sign change isolates exactly one zero.  Phi(0) = 1 > 0 and the
    first-order coefficient is negative, so the scan starts at 1 and first
    expands downward until Phi is positive.
    """
    if count < 1:
        raise ValueError("count must be >= 1")

    def phi_at(x):
        return ramanujan_phi(x, q, ctx).value

    with workprec(ctx.bits + GUARD_BITS):
        step = mp.power(q.q, mpf(-1) / 4)
        x = mp.one
        guard_steps = 0
        while phi_at(x) <= 0:
            x = x / step
            guard_steps += 1
            if guard_steps > 64 * max(1.0, 1 / q.log2_inv):
                raise Inconclusive("no positive starting point found for the zero scan",
                                   q=float(q.q), reached=float(x))
        zeros = []
        fx = phi_at(x)
        scanned = 0
        max_scan = 16 * count * 8 + 256
        while len(zeros) < count:
            x2 = x * step
            f2 = phi_at(x2)
            if fx * f2 < 0:
                root = bracketed_root(phi_at, x, x2, ctx)
                zeros.append(root)
            elif f2 == 0:
                zeros.append(x2)
            x, fx = x2, f2
            scanned += 1
            if scanned > max_scan:
                raise Inconclusive(
                    f"sign scan found only {len(zeros)} of {count} zeros",
                    q=float(q.q), scanned=scanned, window_end=float(x))
    return PhiZeroTable(q=q, zeros=tuple(zeros), count=count, bits=ctx.bits)
