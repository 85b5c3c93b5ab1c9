"""Arbitrary-precision numerical kernel: series summation, root bracketing, quadrature.

All routines work on mpmath numbers at a precision chosen through a
PrecisionContext.  Results are plain mpf/mpc values (or small result records);
nothing here mutates global state beyond mpmath's thread-local working
precision, which is always restored on exit.

Tail bounds are heuristic geometric estimates, not certified enclosures.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass, replace
from typing import Callable

from mpmath import mp, mpf, workprec

# Extra working bits beyond the requested precision, absorbing roundoff of
# O(n)-term reductions.
GUARD_BITS = 32


class Inconclusive(ArithmeticError):
    """A computation could not decide within its precision/iteration budget.

    Carries a diagnostics dict so callers can report the evidence instead of
    silently failing.
    """

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class PrecisionContext:
    """Numerical budget shared by all operations.

    bits      -- binary working precision (>= 64)
    max_terms -- cap on series terms before giving up
    tail_tol  -- relative tail tolerance for convergence decisions (< 1)
    max_bits  -- ceiling for the precision ladder (retries at doubled bits)
    """

    bits: int = 256
    max_terms: int = 4096
    tail_tol: float = 1e-30
    max_bits: int = 16384

    def __post_init__(self):
        if self.bits < 64:
            raise ValueError(f"bits must be >= 64, got {self.bits}")
        if self.max_terms < 8:
            raise ValueError(f"max_terms must be >= 8, got {self.max_terms}")
        if not (0 < mpf(self.tail_tol) < 1):
            raise ValueError(f"tail_tol must be in (0,1), got {self.tail_tol}")
        if self.max_bits < self.bits:
            raise ValueError("max_bits must be >= bits")

    def with_bits(self, bits: int) -> "PrecisionContext":
        return replace(self, bits=bits, max_bits=max(self.max_bits, bits))

    def with_tail_tol(self, tail_tol) -> "PrecisionContext":
        """Same budget with a different tail tolerance.  Series-based
        operations can only certify tails down to (decay rate)^length, so
        callers working from short recovered recurrences relax the tolerance
        to what the coefficient supply supports."""
        return replace(self, tail_tol=tail_tol)

    def ladder(self):
        """Yield contexts at bits, 2*bits, ... up to max_bits."""
        b = self.bits
        while True:
            yield self.with_bits(b)
            if b >= self.max_bits:
                return
            b = min(2 * b, self.max_bits)

    @contextmanager
    def working(self, extra_bits: int = 0):
        with workprec(self.bits + GUARD_BITS + extra_bits):
            yield

    @property
    def eps(self) -> mpf:
        return mpf(2) ** (-self.bits)


DEFAULT_CTX = PrecisionContext()


@dataclass(frozen=True)
class SummationResult:
    """Partial sum with a geometric tail estimate.

    `converged` guarantees tail_bound <= tail_tol * |value| (or an absolute
    tail_tol when the value itself sits within tail_tol of zero).
    """

    value: object          # mpf or mpc
    terms_used: int
    tail_bound: mpf
    converged: bool


def sum_series(term_generator: Callable[[int], object],
               ctx: PrecisionContext = DEFAULT_CTX) -> SummationResult:
    """Sum term_generator(0) + term_generator(1) + ... with a geometric tail test.

    Convergence rule: once the last three ratios |t_k|/|t_{k-1}| all lie below
    some r < 1, the tail is estimated as |t_last| * r / (1 - r) with r the
    largest of the three; the sum converged when that bound drops below
    tail_tol relative to the partial sum.  Three consecutive exactly-zero
    terms are read as a finitely supported generator: the sum is exact and the
    tail bound is zero.

    Divergence is not an error: the partial sum is returned with
    converged=False and an infinite tail bound.
    """
    tol = mpf(ctx.tail_tol)
    with ctx.working():
        total = mp.zero
        prev_mag = None
        ratios = []
        zero_run = 0
        last_nonzero = -1
        terms = 0
        for k in range(ctx.max_terms):
            t = term_generator(k)
            terms = k + 1
            total = total + t
            mag = abs(t)
            if mag == 0:
                zero_run += 1
                if zero_run >= 3 and k >= 1:
                    return SummationResult(total, last_nonzero + 1, mp.zero, True)
                continue
            last_nonzero = k
            if zero_run:
                # ratios across a zero gap are meaningless; restart the window
                ratios = []
                zero_run = 0
            if prev_mag is not None and prev_mag > 0:
                ratios.append(mag / prev_mag)
                if len(ratios) > 3:
                    ratios.pop(0)
            prev_mag = mag
            if len(ratios) == 3:
                r = max(ratios)
                if r < 1:
                    bound = mag * r / (1 - r)
                    scale = abs(total)
                    if bound <= tol * scale or (scale <= tol and bound <= tol):
                        return SummationResult(total, terms, bound, True)
        # budget exhausted
        if len(ratios) == 3 and max(ratios) < 1:
            r = max(ratios)
            bound = prev_mag * r / (1 - r)
        else:
            bound = mp.inf
        return SummationResult(total, terms, bound, False)


def bracketed_root(f: Callable, lo, hi, ctx: PrecisionContext = DEFAULT_CTX) -> mpf:
    """Root of f in [lo, hi] given f(lo)*f(hi) < 0.

    Illinois-damped regula falsi with a forced bisection step whenever the
    bracket fails to halve within two iterations, so convergence is guaranteed
    for any continuous sign change.  Deterministic: fixed inputs and precision
    give bit-identical output.  Terminates when the bracket width is below
    2^(-bits+8) * max(1, |x|).
    """
    with ctx.working():
        a, b = mpf(lo), mpf(hi)
        fa, fb = f(a), f(b)
        if fa == 0:
            return a
        if fb == 0:
            return b
        if mp.sign(fa) == mp.sign(fb):
            raise ValueError(f"invalid bracket: f({mp.nstr(a)}) and f({mp.nstr(b)}) share a sign")
        width_tol = lambda x: mpf(2) ** (-ctx.bits + 8) * max(mp.one, abs(x))
        side = 0
        stall = 0
        prev_width = b - a
        for _ in range(64 * ctx.bits):
            if b - a <= width_tol((a + b) / 2):
                break
            if stall >= 2:
                x = (a + b) / 2  # forced bisection
                stall = 0
            else:
                denom = fb - fa
                x = b - fb * (b - a) / denom if denom != 0 else (a + b) / 2
                if not (a < x < b):
                    x = (a + b) / 2
            fx = f(x)
            if fx == 0:
                return x
            if mp.sign(fx) != mp.sign(fa):
                b, fb = x, fx
                if side == -1:
                    fa = fa / 2  # Illinois damping
                side = -1
            else:
                a, fa = x, fx
                if side == 1:
                    fb = fb / 2
                side = 1
            if b - a > prev_width / 2:
                stall += 1
            else:
                stall = 0
            prev_width = b - a
        return (a + b) / 2


def _decay_limit(g, start, direction, cut, budget):
    """Walk from `start` in unit steps until |g| has stayed below cut times
    its running maximum for eight consecutive samples.  Returns (limit,
    hit_budget)."""
    u = mpf(start)
    best = mp.zero
    quiet = 0
    for _ in range(budget):
        gu = abs(g(u))
        if gu > best:
            best = gu
        if best > 0 and gu <= cut * best:
            quiet += 1
            if quiet >= 8:
                return u, False
        else:
            quiet = 0
        u += direction
    return u, True


def quadrature(f: Callable, a, b, ctx: PrecisionContext = DEFAULT_CTX) -> SummationResult:
    """Integrate f over [a, b]; b may be +inf.

    Improper integrals with a >= 0 are mapped by x = e^u onto a line
    integral: the intended integrands are log-normal-like, so the transformed
    integrand dies fast on both ends.  The integration window is clamped
    where the transformed integrand has decayed below roundoff (sampled
    outward in unit steps), then refined tanh-sinh style.  The working
    precision follows the tail tolerance rather than the full context
    precision: the returned error estimate, not the working epsilon, is the
    accuracy contract.  converged=False flags refinement that could not push
    the estimate below tail_tol relative accuracy (an inconclusive flag,
    never an exception).
    """
    tol = mpf(ctx.tail_tol)
    work_bits = max(96, min(ctx.bits, int(float(-mp.log(tol, 2))) + 64))
    hit_budget = False
    with workprec(work_bits + GUARD_BITS):
        cut = mpf(2) ** (-(work_bits + 16))
        infinite = b in (mp.inf, math.inf) or (isinstance(b, (int, float)) and math.isinf(b))
        if infinite:
            a = mpf(a)
            if a < 0:
                raise ValueError("infinite upper limit requires a >= 0")
            g = lambda u: f(mp.e ** u) * mp.e ** u
            hard_lo = mp.ninf if a == 0 else mp.log(a)
            hi, clipped_hi = _decay_limit(g, 0, mp.one, cut, ctx.max_terms)
            lo, clipped_lo = _decay_limit(g, 0, -mp.one, cut, ctx.max_terms)
            hit_budget = clipped_hi or clipped_lo
            if hard_lo != mp.ninf and lo < hard_lo:
                lo = hard_lo
            interval = [lo, hi]
        else:
            g = f
            interval = [mpf(a), mpf(b)]
        val, err = mp.quad(g, interval, method="tanh-sinh", error=True)
        scale = max(abs(val), mpf(1))
        if err > tol * scale:
            val, err = mp.quad(g, interval, method="tanh-sinh", error=True,
                               maxdegree=10)
        converged = (not hit_budget) and err <= tol * max(abs(val), tol)
        return SummationResult(val, 0, mpf(err), converged)


def gamma(x, ctx: PrecisionContext = DEFAULT_CTX) -> mpf:
    """Gamma function at working precision."""
    with ctx.working():
        return mp.gamma(mpf(x))
