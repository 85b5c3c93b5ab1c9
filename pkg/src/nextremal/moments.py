"""Moment sequences, Jacobi (three-term recurrence) data, and the orthonormal
polynomials p_n with their second-kind companions q_n.

Recurrence recovery goes through a Cholesky factorization of the Hankel
matrix H = (s_{j+k}).  Writing H = L L^T, the Jacobi matrix is the tridiagonal
J = L^{-1} S L^{-T} with S = (s_{j+k+1}); its diagonal gives b_n and its
off-diagonal a_n > 0.  Hankel matrices of fast-growing moment sequences are
notoriously ill-conditioned, so each recovery runs a precision ladder: on
pivot collapse or a failed round-trip check the whole factorization retries at
doubled precision, up to the context ceiling, and reports inconclusive rather
than returning silently corrupted coefficients.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from mpmath import mp, mpf, workprec

from .numerics import DEFAULT_CTX, GUARD_BITS, Inconclusive, PrecisionContext


@dataclass(frozen=True)
class MomentSequence:
    """Real moment data s_0, s_1, ... with provenance.

    source is one of "closed-form", "from-measure", "transformed".
    normalized means s_0 = 1.
    """

    values: tuple
    source: str = "closed-form"
    normalized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(mp.mpmathify(v) for v in self.values))
        if self.normalized and self.values and self.values[0] != 1:
            raise ValueError("normalized sequence must have s_0 = 1")

    def __len__(self):
        return len(self.values)

    def __getitem__(self, n):
        return self.values[n]


@dataclass(frozen=True)
class RecurrenceCoefficients:
    """Jacobi data: off-diagonal a_n > 0 and diagonal b_n, n = 0..length-1."""

    a: tuple
    b: tuple
    length: int
    bits: int

    def __post_init__(self):
        if len(self.a) != self.length or len(self.b) != self.length:
            raise ValueError("a and b must both have `length` entries")
        for n, an in enumerate(self.a):
            if not an > 0:
                raise ValueError(f"a_{n} must be positive, got {mp.nstr(an)}")


@dataclass(frozen=True)
class PolynomialPair:
    """Values p_0(z)..p_N(z) and q_0(z)..q_N(z) at one point z."""

    p_values: tuple
    q_values: tuple

    def __post_init__(self):
        if self.p_values[0] != 1 or self.q_values[0] != 0:
            raise ValueError("initial conditions violated: need p_0 = 1, q_0 = 0")


def normalize(s: MomentSequence) -> MomentSequence:
    """Scale so that s_0 = 1.  Proportional sequences share their Jacobi matrix,
    so nothing downstream changes except the mass normalization."""
    if not len(s):
        raise ValueError("empty moment sequence")
    s0 = s[0]
    if not s0 > 0:
        raise ValueError(f"s_0 must be positive, got {mp.nstr(s0)}")
    if s0 == 1:
        return MomentSequence(s.values, source=s.source, normalized=True)
    return MomentSequence(tuple(v / s0 for v in s.values),
                          source=s.source, normalized=True)


class _PivotCollapse(Exception):
    def __init__(self, index, pivot):
        self.index = index
        self.pivot = pivot


def _cholesky(h, n, pivot_tol):
    """Lower Cholesky of the n x n matrix h (list of rows); raises
    _PivotCollapse when a pivot falls below pivot_tol relative to its
    diagonal entry."""
    L = [[mp.zero] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            acc = h[i][j]
            for k in range(j):
                acc -= L[i][k] * L[j][k]
            if i == j:
                if not acc > pivot_tol * abs(h[i][i]):
                    raise _PivotCollapse(i, acc)
                L[i][i] = mp.sqrt(acc)
            else:
                L[i][j] = acc / L[j][j]
    return L


def _solve_lower(L, B, n):
    """X with L X = B (all n x n, L lower triangular)."""
    X = [[mp.zero] * n for _ in range(n)]
    for col in range(n):
        for i in range(n):
            acc = B[i][col]
            for k in range(i):
                acc -= L[i][k] * X[k][col]
            X[i][col] = acc / L[i][i]
    return X


def hankel_positive_definite(s: MomentSequence, m: int,
                             ctx: PrecisionContext = DEFAULT_CTX) -> bool:
    """True iff the (m+1) x (m+1) Hankel matrix (s_{j+k}) is positive definite.

    Cholesky pivots below 2^(-bits/2) trigger the precision ladder; when even
    the ceiling cannot separate the smallest pivot from zero the answer is
    False for a non-positive pivot and Inconclusive for a marginally positive
    one.
    """
    if len(s) < 2 * m + 1:
        raise ValueError(f"need at least {2 * m + 1} moments, have {len(s)}")
    last = None
    for rung in ctx.ladder():
        with workprec(rung.bits + GUARD_BITS):
            h = [[s[i + j] for j in range(m + 1)] for i in range(m + 1)]
            try:
                _cholesky(h, m + 1, mpf(2) ** (-rung.bits // 2))
                return True
            except _PivotCollapse as pc:
                last = (rung.bits, pc.index, pc.pivot)
    bits, index, pivot = last
    if pivot <= 0:
        return False
    raise Inconclusive(
        f"Hankel pivot {index} marginal ({mp.nstr(pivot)}) at precision ceiling",
        index=index, bits=bits)


def recurrence_from_moments(s: MomentSequence, n_max: int,
                            ctx: PrecisionContext = DEFAULT_CTX) -> RecurrenceCoefficients:
    """Recover a_0..a_{n_max-1}, b_0..b_{n_max-1} from s_0..s_{2 n_max + 1}.

    For a normalized sequence b_0 = s_1 and a_0 = sqrt(s_2 - s_1^2).  The
    result is accepted only if the reconstructed moments <J^n e_0, e_0>
    reproduce the input relatively to 2^(-bits/2) for n <= 2 n_max; otherwise
    the ladder escalates.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if len(s) < 2 * n_max + 2:
        raise ValueError(f"need {2 * n_max + 2} moments for n_max={n_max}, have {len(s)}")
    n = n_max + 1
    failure = None
    for rung in ctx.ladder():
        with workprec(rung.bits + GUARD_BITS):
            h = [[s[i + j] for j in range(n)] for i in range(n)]
            sh = [[s[i + j + 1] for j in range(n)] for i in range(n)]
            try:
                L = _cholesky(h, n, mpf(2) ** (-rung.bits // 2))
            except _PivotCollapse as pc:
                failure = f"Hankel pivot collapse at index {pc.index}"
                continue
            x = _solve_lower(L, sh, n)
            xt = [[x[j][i] for j in range(n)] for i in range(n)]
            jac = _solve_lower(L, xt, n)
            a = tuple(jac[i][i + 1] for i in range(n - 1))
            b = tuple(jac[i][i] for i in range(n - 1))
            if any(not an > 0 for an in a):
                failure = "non-positive off-diagonal element"
                continue
            rc = RecurrenceCoefficients(a=a, b=b, length=n_max, bits=rung.bits)
            err = _roundtrip_error(rc, s, 2 * n_max)
            if err <= mpf(2) ** (-rung.bits // 2):
                return rc
            failure = f"round-trip error {mp.nstr(err, 5)} too large"
    raise Inconclusive(
        f"recurrence recovery failed at precision ceiling: {failure}",
        n_max=n_max, max_bits=ctx.max_bits)


def _roundtrip_error(rc: RecurrenceCoefficients, s: MomentSequence, upto: int):
    """max_n |<J^n e_0, e_0> - s_n| / |s_n| over n <= upto (s normalized or not:
    the comparison rescales by s_0)."""
    s0 = s[0]
    worst = mp.zero
    for n, sn in enumerate(reconstructed_moments(rc, upto)):
        ref = s[n] / s0
        err = abs(sn - ref) / max(abs(ref), mpf(1))
        if err > worst:
            worst = err
    return worst


def reconstructed_moments(rc: RecurrenceCoefficients, upto: int):
    """Yield <J^n e_0, e_0> for n = 0..upto via the truncated Jacobi matrix.

    Walk paths of length n from index 0 back to 0: they never climb above
    height n/2, so entries beyond the stored coefficients cannot contribute
    for n <= 2*length.
    """
    if upto > 2 * rc.length:
        raise ValueError(f"can reconstruct moments only up to {2 * rc.length}")
    size = rc.length + 1
    v = [mp.zero] * (size + 1)
    v[0] = mp.one
    yield mp.one
    for _ in range(upto):
        w = [mp.zero] * (size + 1)
        for i in range(size):
            c = v[i]
            if c == 0:
                continue
            if i < rc.length:
                w[i] += rc.b[i] * c
                w[i + 1] += rc.a[i] * c
            if i >= 1:
                w[i - 1] += rc.a[i - 1] * c
        v = w
        yield v[0]


def eval_pq(rc: RecurrenceCoefficients, z, N: int) -> PolynomialPair:
    """p_0(z)..p_N(z) and q_0(z)..q_N(z) by the forward recurrence
    x p_n = a_n p_{n+1} + b_n p_n + a_{n-1} p_{n-1}, p_0 = 1, p_{-1} = 0.

    The second-kind values satisfy the same recurrence with q_0 = 0,
    q_1 = 1/a_0 (equivalent to the divided-difference integral definition;
    the Wronskian identity a_n (p_{n+1} q_n - p_n q_{n+1}) = -1 pins this
    normalization down and is enforced by the test-suite).
    """
    if N > rc.length:
        raise ValueError(f"N={N} exceeds available coefficients ({rc.length})")
    zz = mp.mpmathify(z)
    p = [mp.one]
    qv = [mp.zero]
    if N >= 1:
        p.append((zz - rc.b[0]) / rc.a[0])
        qv.append(1 / rc.a[0])
    for n in range(1, N):
        p.append(((zz - rc.b[n]) * p[n] - rc.a[n - 1] * p[n - 1]) / rc.a[n])
        qv.append(((zz - rc.b[n]) * qv[n] - rc.a[n - 1] * qv[n - 1]) / rc.a[n])
    return PolynomialPair(p_values=tuple(p), q_values=tuple(qv))


def jacobi_apply(rc: RecurrenceCoefficients, c) -> list:
    """(J c)_n = a_{n-1} c_{n-1} + b_n c_n + a_n c_{n+1} for finitely supported c.

    The support must stay below the last stored coefficient pair so the result
    is exact; otherwise a length error is raised.
    """
    c = list(c)
    support = [i for i, v in enumerate(c) if v != 0]
    if not support:
        return [mp.zero]
    top = support[-1]
    if top >= rc.length:
        raise ValueError(
            f"support index {top} touches the last stored coefficient (length {rc.length})")
    out = [mp.zero] * (top + 2)
    for i in range(top + 2):
        acc = mp.zero
        if i <= top:
            acc += rc.b[i] * c[i]
        if i >= 1 and i - 1 <= top:
            acc += rc.a[i - 1] * c[i - 1]
        if i + 1 <= top:
            acc += rc.a[i] * c[i + 1]
        out[i] = acc
    return out


# --- precision-lossless JSON interchange -----------------------------------

def _decimal_digits(bits: int) -> int:
    # ceil(bits * log10(2)) + 2 guard digits makes the decimal <-> binary
    # round trip exact at fixed precision
    return int(bits * 0.30103) + 3


def mpf_to_str(x, bits: int) -> str:
    with workprec(bits + 8):
        return mp.nstr(mp.mpmathify(x), _decimal_digits(bits),
                       strip_zeros=True, min_fixed=1, max_fixed=0)


def moments_to_json(s: MomentSequence, bits: int = 256) -> str:
    """Serialize as a JSON array of decimal strings (lossless at `bits`)."""
    return json.dumps([mpf_to_str(v, bits) for v in s.values])


def moments_from_json(text: str, source: str = "closed-form",
                      bits: int = 256) -> MomentSequence:
    data = json.loads(text)
    # parse at exactly the writing precision: the decimal strings carry
    # enough digits to round uniquely back to the original mantissas
    with workprec(bits):
        values = tuple(mpf(v) for v in data)
    normalized = bool(values) and values[0] == 1
    return MomentSequence(values, source=source, normalized=normalized)
