"""Exact coefficients of the leaf-counting series and their evaluation.

``a[n][k]`` counts rooted unlabelled trees with ``n`` vertices and ``k``
leaves, i.e. the coefficients of ``T(x, z) = sum a[n][k] x^n z^k``.  The
rows come from the logarithmic-derivative recurrence

    n a_{n+1}(z) = sum_{m=1}^{n} b_m(z) ~a_{n+1-m}(z),
    b_m(z) = sum_{jk=m} j a_j(z^k),

with ``a_1 = z`` and ``~a_1 = 1``.  Polynomials in ``z`` are packed into
single big integers (one fixed-width slot per coefficient) so that each
product is one multiprecision multiplication; all coefficients are
nonnegative, so slots never borrow.

Floating point only enters in :func:`eval_T` and :func:`eval_h`, which
evaluate truncated series in fixed-point integer arithmetic.  The cut-off
comes from a geometric envelope when the table reaches it and from the
observed decay of the terms otherwise; a short table either grows or
raises :class:`InsufficientOrderError`.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import gmpy2
import mpmath

from .precision import InsufficientOrderError, PrecisionContext

__all__ = [
    "LeafPolynomial",
    "CoefficientTable",
    "DerivativeSeries",
    "CacheFormatError",
    "Partials",
    "leaf_polynomials",
    "otter_counts",
    "specialize_counts",
    "derivative_coeffs",
    "eval_T",
    "eval_h",
    "series_partials",
    "ALPHA_LOWER",
    "GrowingSource",
    "required_order",
    "truncated_partials",
]

# rough lower bound for Otter's radius; only used to certify tail ratios
ALPHA_LOWER = 0.3383

CACHE_HEADER = "leafcount-table v1 N="


class CacheFormatError(ValueError):
    def __init__(self, path, lineno: int, line: str, reason: str):
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {reason}: {line.rstrip()!r}")


@dataclass(frozen=True)
class LeafPolynomial:
    """``a_n(z)``; ``coeffs[k]`` is the number of trees with ``k`` leaves."""

    n: int
    coeffs: tuple[int, ...]

    def __getitem__(self, k: int) -> int:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __call__(self, z):
        return sum(c * z**k for k, c in enumerate(self.coeffs) if c)

    @property
    def total(self) -> int:
        return sum(self.coeffs)

    def moment(self, order: int) -> int:
        """``a_n^{(order)}(1)``, the falling-factorial moment."""
        return sum(math.perm(k, order) * c for k, c in enumerate(self.coeffs))

    def upper_half(self) -> int:
        """Trees with more than ``n/2`` leaves."""
        return sum(c for k, c in enumerate(self.coeffs) if 2 * k > self.n)


class CoefficientTable:
    """Exact rows ``a_1(z), ..., a_N(z)``."""

    def __init__(self, rows):
        self.rows = tuple(rows)
        for i, row in enumerate(self.rows, start=1):
            if row.n != i:
                raise ValueError(f"row {i} is labelled n={row.n}")
        self._weighted = None

    @property
    def order(self) -> int:
        return len(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def __getitem__(self, n: int) -> LeafPolynomial:
        if not 1 <= n <= self.order:
            raise IndexError(f"row {n} outside 1..{self.order}")
        return self.rows[n - 1]

    def a(self, n: int, k: int) -> int:
        return self[n][k]

    def __eq__(self, other):
        return isinstance(other, CoefficientTable) and self.rows == other.rows

    # -- persistence ------------------------------------------------------

    def dumps(self) -> str:
        lines = [f"{CACHE_HEADER}{self.order}"]
        for row in self.rows:
            for k, c in enumerate(row.coeffs):
                if c:
                    lines.append(f"{row.n} {k} {c}")
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str, source="<string>") -> CoefficientTable:
        lines = text.splitlines()
        if not lines or not lines[0].startswith(CACHE_HEADER):
            raise CacheFormatError(source, 1, lines[0] if lines else "", "bad header")
        try:
            order = int(lines[0][len(CACHE_HEADER):])
        except ValueError:
            raise CacheFormatError(source, 1, lines[0], "bad order") from None
        if order < 1:
            raise CacheFormatError(source, 1, lines[0], "order must be >= 1")
        coeffs = [[0] * (n + 1) for n in range(order + 1)]
        for lineno, line in enumerate(lines[1:], start=2):
            parts = line.split()
            if len(parts) != 3:
                raise CacheFormatError(source, lineno, line, "expected 'n k value'")
            try:
                n, k, value = (int(p) for p in parts)
            except ValueError:
                raise CacheFormatError(source, lineno, line, "non-integer field") from None
            if not (1 <= n <= order and 0 <= k <= n) or value <= 0:
                raise CacheFormatError(source, lineno, line, "entry out of range")
            if coeffs[n][k]:
                raise CacheFormatError(source, lineno, line, "duplicate entry")
            coeffs[n][k] = value
        rows = [LeafPolynomial(n, _trim(coeffs[n])) for n in range(1, order + 1)]
        return cls(rows)

    @classmethod
    def load(cls, path) -> CoefficientTable:
        return cls.loads(Path(path).read_text(encoding="utf-8"), source=path)

    # -- fixed-point row evaluation ----------------------------------------

    def _weights(self):
        if self._weighted is None:
            w1, w2 = [], []
            for row in self.rows:
                c = row.coeffs
                w1.append([k * c[k] for k in range(1, len(c))])
                w2.append([k * (k - 1) * c[k] for k in range(2, len(c))])
            self._weighted = (w1, w2)
        return self._weighted

    def row_values(self, Z, prec: int, nmax: int, deriv: int):
        """Fixed-point ``a_n(Z)``, ``a_n'(Z)``, ``a_n''(Z)`` for ``n <= nmax``."""
        zf = _to_fixed(Z, prec)
        zp = [1 << prec]
        for _ in range(nmax):
            zp.append((zp[-1] * zf) >> prec)
        p0 = [sum(map(operator.mul, row.coeffs, zp)) for row in self.rows[:nmax]]
        p1 = p2 = None
        if deriv >= 1:
            w1, w2 = self._weights()
            p1 = [sum(map(operator.mul, w, zp)) for w in w1[:nmax]]
            if deriv >= 2:
                p2 = [sum(map(operator.mul, w, zp)) for w in w2[:nmax]]
        return p0, p1, p2


def _trim(coeffs) -> tuple[int, ...]:
    coeffs = list(coeffs)
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


@dataclass(frozen=True)
class DerivativeSeries:
    """Exact ``a_n(1)``, ``a_n'(1)``, ``a_n''(1)``; index ``n`` (index 0 unused)."""

    counts: tuple[int, ...]
    first: tuple[int, ...]
    second: tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.counts) - 1

    def row_values(self, Z, prec: int, nmax: int, deriv: int):
        if Z != 1:
            raise ValueError("a derivative series only evaluates at z = 1")
        p0 = [c << prec for c in self.counts[1 : nmax + 1]]
        p1 = [c << prec for c in self.first[1 : nmax + 1]] if deriv >= 1 else None
        p2 = [c << prec for c in self.second[1 : nmax + 1]] if deriv >= 2 else None
        return p0, p1, p2


class GrowingSource:
    """A coefficient source that rebuilds itself longer on demand.

    Evaluators call :meth:`ensure` when the tail bound needs more terms than
    the current table holds; growth stops at ``cap``.
    """

    def __init__(self, build, order: int, cap: int = 600):
        self._build = build
        self.cap = cap
        self.table = build(order)
        self.builds = 1

    @property
    def order(self) -> int:
        return self.table.order

    def ensure(self, order: int) -> bool:
        if order <= self.order:
            return True
        if order > self.cap:
            return False
        self.table = self._build(min(self.cap, max(order, int(self.order * 1.2))))
        self.builds += 1
        return True

    def row_values(self, Z, prec: int, nmax: int, deriv: int):
        return self.table.row_values(Z, prec, nmax, deriv)


def _available(source, need: int) -> int:
    ensure = getattr(source, "ensure", None)
    if ensure is not None:
        ensure(need)
    return source.order


# ---------------------------------------------------------------------------
# exact recurrences
# ---------------------------------------------------------------------------

def otter_counts(N: int) -> list[int]:
    """``T_n`` (index ``n``) for ``n <= N`` from the classical recurrence."""
    return list(derivative_coeffs(N, moments=False).counts)


def _pack(coeffs, width: int) -> gmpy2.mpz:
    blob = b"".join(c.to_bytes(width, "little") for c in coeffs)
    return gmpy2.mpz(int.from_bytes(blob, "little"))


def _unpack(value, width: int, length: int) -> list[int]:
    blob = int(value).to_bytes(width * length, "little")
    return [int.from_bytes(blob[i : i + width], "little") for i in range(0, width * length, width)]


def leaf_polynomials(N: int) -> CoefficientTable:
    """Exact table of ``a_n(z)`` for ``n <= N``.

    >>> leaf_polynomials(4)[4].coeffs
    (0, 1, 2, 1)
    """
    if N < 1:
        raise ValueError("order must be >= 1")
    totals = otter_counts(N)
    # every partial sum of slot k is bounded by n a_{n+1,k} <= N T_N
    width = ((N * totals[N]).bit_length() + 8) // 8
    a: list[list[int] | None] = [None, [0, 1]]
    packed_tilde = [None, _pack([1], width)]
    packed_b = [None]
    b_acc: list[list[int]] = [[0] * (m + 1) for m in range(N)]
    for n in range(1, N):
        # b_n collects j a_j(z^k) over jk = n; all a_j with j <= n are known
        for j in range(1, n + 1):
            if n % j:
                continue
            k = n // j
            for deg, c in enumerate(a[j]):
                if c:
                    b_acc[n][deg * k] += j * c
        packed_b.append(_pack(b_acc[n], width))
        acc = gmpy2.mpz(0)
        for m in range(1, n + 1):
            acc += packed_b[m] * packed_tilde[n + 1 - m]
        acc //= n
        row = _unpack(acc, width, n + 2)
        row = list(_trim(row))
        a.append(row)
        packed_tilde.append(_pack(row, width))
    return CoefficientTable(LeafPolynomial(n, tuple(a[n])) for n in range(1, N + 1))


def specialize_counts(table: CoefficientTable) -> list[int]:
    """``T_n = a_n(1)`` with ``T_n`` at index ``n`` (index 0 holds 0)."""
    return [0] + [row.total for row in table.rows]


def derivative_coeffs(N: int, moments: bool = True) -> DerivativeSeries:
    """Exact ``a_n(1)``, ``a_n'(1)``, ``a_n''(1)`` without the bivariate table.

    Uses the z-derivatives of the functional equation at ``z = 1``; the
    last inner sum runs over ``k <= n/j`` like the other two.
    """
    if N < 1:
        raise ValueError("order must be >= 1")
    a = [0] * (N + 1)
    d1 = [0] * (N + 1)
    d2 = [0] * (N + 1)
    a[1] = d1[1] = 1
    # cycle-index weights: s[m] = sum_{j | m} j a_j
    s = [0] * (N + 1)
    for n in range(1, N):
        s[n] = sum(j * a[j] for j in range(1, n + 1) if n % j == 0)
        a[n + 1] = sum(s[m] * a[n + 1 - m] for m in range(1, n + 1)) // n
        if not moments:
            continue
        first = second = 0
        for j in range(1, n + 1):
            kmax = n // j
            base = sum(a[n + 1 - k * j] for k in range(1, kmax + 1))
            first += d1[j] * base
            tilde = sum(d1[n + 1 - k * j] for k in range(1, (n - 1) // j + 1))
            shifted = sum((k - 1) * a[n + 1 - k * j] for k in range(2, kmax + 1))
            weighted = sum(k * a[n + 1 - k * j] for k in range(1, kmax + 1))
            second += d1[j] * (tilde + shifted) + d2[j] * weighted
        d1[n + 1] = first
        d2[n + 1] = second
    return DerivativeSeries(tuple(a), tuple(d1), tuple(d2))


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

class Partials(NamedTuple):
    """A function value and its partial derivatives up to second order."""

    f: mpmath.mpf
    fx: mpmath.mpf | None = None
    fz: mpmath.mpf | None = None
    fxx: mpmath.mpf | None = None
    fxz: mpmath.mpf | None = None
    fzz: mpmath.mpf | None = None
    error: mpmath.mpf | None = None
    order: int = 0
    certified: bool = True


def _to_fixed(v, prec: int) -> int:
    return int(mpmath.nint(mpmath.ldexp(mpmath.mpf(v), prec)))


def _from_fixed(v: int, prec: int) -> mpmath.mpf:
    return mpmath.ldexp(mpmath.mpf(v), -prec)


def _log(v) -> float:
    return float(mpmath.log(v))


def _tail_bound_log(n: int, log_q: float, s: int, log_scale: float) -> float:
    """log of sum_{m > n} m^s q^m e^{log_scale}, assuming the ratio stays < 1."""
    m = n + 1
    ratio = math.exp(log_q) * ((m + 1) / m) ** s
    if ratio >= 1:
        return math.inf
    return s * math.log(m) + m * log_q + log_scale - math.log1p(-ratio)


def required_order(X, Z, tol, deriv: int = 0, limit: int = 10**6) -> int:
    """Smallest truncation order whose enveloped tail is below ``tol``.

    The envelope is ``a_n(Z) X^n <= (X max(Z, 1) / alpha)^n``, valid because
    ``T_n <= alpha^-n`` and every ``a_n`` has degree below ``n``; each
    derivative costs a factor ``n / min(X, Z, 1)``.
    """
    if X <= 0:
        return 0
    log_q = _log(X) + max(_log(Z), 0.0) - math.log(ALPHA_LOWER)
    if log_q >= 0:
        return limit + 1
    log_scale = -deriv * min(_log(X), _log(Z), 0.0)
    log_tol = _log(tol)
    # the bound decreases once n^s q^n does; scan from the bottom
    n = 1
    while n <= limit:
        if _tail_bound_log(n, log_q, deriv, log_scale) <= log_tol:
            return n
        n = n + 1 if n < 64 else int(n * 1.05) + 1
    return limit + 1


def _fixed_prec(Z, nmax: int, extra_bits: int = 0) -> int:
    """Working bits for fixed-point sums up to ``nmax``.

    Rows grow like ``a_n(Z) <= (max(Z, 1) / alpha)^n`` and the second
    derivative weights add ``n^2``; the guard absorbs both so that the
    truncation of ``X^n`` stays below ``2^-mp.prec`` after scaling.
    """
    growth = max(0.0, float(mpmath.log(max(Z, 1), 2)) - math.log2(ALPHA_LOWER))
    return mpmath.mp.prec + math.ceil(nmax * growth) + 2 * nmax.bit_length() + 64 + extra_bits


def series_partials(source, X, Z, nmax: int, deriv: int = 2, extra_bits: int = 0) -> Partials:
    """Truncated ``T`` and partials at ``(X, Z)`` over ``n <= nmax``.

    Runs in fixed point with ``mp.prec`` plus guard bits; the guard covers
    the growth of the row sums ``a_n(Z)``.
    """
    nmax = min(nmax, source.order)
    if nmax <= 0:
        zero = mpmath.mpf(0)
        return Partials(zero, zero, zero, zero, zero, zero, zero, 0)
    prec = _fixed_prec(Z, nmax, extra_bits)
    p0, p1, p2 = source.row_values(Z, prec, nmax, deriv)
    xf = _to_fixed(X, prec)
    xp = [1 << prec]
    for _ in range(nmax):
        xp.append((xp[-1] * xf) >> prec)
    ns = range(1, nmax + 1)
    out = [sum(map(operator.mul, p0, xp[1:]))]
    if deriv >= 1:
        out.append(sum(n * v * xp[n - 1] for n, v in zip(ns, p0)))
        out.append(sum(map(operator.mul, p1, xp[1:])))
    if deriv >= 2:
        out.append(sum(n * (n - 1) * v * xp[n - 2] for n, v in zip(ns, p0) if n >= 2))
        out.append(sum(n * v * xp[n - 1] for n, v in zip(ns, p1)))
        out.append(sum(map(operator.mul, p2, xp[1:])))
    vals = [_from_fixed(v, 2 * prec) for v in out]
    vals += [None] * (6 - len(vals))
    return Partials(*vals, error=None, order=nmax)


def _empirical_cut(terms: list[int], log_tol: float, deriv: int, scale: float):
    """Cut-off from the observed geometric decay of ``terms``.

    Returns ``(n, None)`` when the extrapolated tail after ``n`` terms is
    below ``exp(log_tol)``, else ``(None, order)`` with the extrapolated
    order needed.  The ratio estimate is the largest ratio in the last tenth
    of the terms, inflated by ``1 + 3/n`` to cover the ``n^(-3/2)`` factor.
    """
    nmax = len(terms)
    window = max(5, nmax // 10)
    if nmax < window + 2:
        return None, 2 * nmax + 16
    ratios = [terms[i] / terms[i - 1] for i in range(nmax - window, nmax) if terms[i - 1] > 0]
    if not ratios:
        return 1, None
    rho = max(ratios) * (1 + 3 / nmax)
    if rho >= 1:
        return None, None
    log_rho = math.log(rho)

    def log_tail(i):
        n = i + 1
        return math.log(terms[i]) + log_rho - math.log1p(-rho) + deriv * math.log((n + 1) / scale)

    for i in range(nmax - window, nmax):
        if terms[i] == 0 or log_tail(i) <= log_tol:
            return i + 1, None
    extra = (log_tol - log_tail(nmax - 1)) / log_rho
    return None, nmax + int(extra * 1.1) + 8


def truncated_partials(source, X, Z, tol, deriv: int = 2, where: str = "") -> Partials:
    """Partials at ``(X, Z)`` with the tail pushed below ``tol``.

    The certified envelope of :func:`required_order` is used when the table
    is long enough.  Away from the critical point that envelope is loose
    (it ignores how fast ``r(Z)`` shrinks), so otherwise the cut-off comes
    from the observed decay of ``a_n(Z) X^n``; such results are flagged
    ``certified=False``.  A :class:`GrowingSource` is extended as needed.
    """
    need = required_order(X, Z, tol, deriv)
    if need <= source.order:
        return series_partials(source, X, Z, need, deriv)._replace(error=tol)
    for _ in range(4):
        nmax = source.order
        prec = _fixed_prec(Z, nmax)
        p0, _, _ = source.row_values(Z, prec, nmax, 0)
        xf = _to_fixed(X, prec)
        terms, xp = [], 1 << prec
        for v in p0:
            xp = (xp * xf) >> prec
            terms.append(v * xp)
        scale = float(min(X, Z, 1))
        cut, more = _empirical_cut(terms, _log(tol) + 2 * prec * math.log(2), deriv, scale)
        if cut is not None:
            p = series_partials(source, X, Z, cut, deriv)
            return p._replace(error=tol, certified=False)
        if more is None:
            raise InsufficientOrderError(need, nmax, where + "; series does not decay")
        more = min(more, need)
        if _available(source, more) < more:
            raise InsufficientOrderError(more, source.order, where)
    raise InsufficientOrderError(need, source.order, where)


def eval_T(x, z, source, ctx: PrecisionContext, deriv: int = 2) -> Partials:
    """``T(x, z)`` and its partials, truncated by :func:`truncated_partials`.

    Raises
    ------
    InsufficientOrderError
        If the table is shorter than the order needed and cannot grow.

    Examples
    --------
    >>> from leafrate.precision import PrecisionContext
    >>> ctx = PrecisionContext(digits=10)
    >>> float(eval_T(0.1, 1, leaf_polynomials(60), ctx).f)  # doctest: +ELLIPSIS
    0.11251633...
    """
    with ctx.workdps():
        x = mpmath.mpf(x)
        z = mpmath.mpf(z)
        if z <= 0 or x < 0:
            raise ValueError("eval_T needs x >= 0 and z > 0")
        if x == 0:
            zero = mpmath.mpf(0)
            return Partials(zero, zero, zero, zero, zero, zero, zero, 0)
        where = f"T at x={mpmath.nstr(x, 8)}, z={mpmath.nstr(z, 8)}"
        return truncated_partials(source, x, z, ctx.tol, deriv, where)


def eval_h(x, z, source, ctx: PrecisionContext, deriv: int = 2) -> Partials:
    """``h(x, z) = sum_{k>=2} T(x^k, z^k) / k`` and partials.

    Partials carry the chain factors of the substitution, e.g.
    ``h_z = sum z^(k-1) T_z(x^k, z^k)`` and
    ``h_xx = sum (k-1) x^(k-2) T_x + k x^(2k-2) T_xx``.
    """
    with ctx.workdps():
        x = mpmath.mpf(x)
        z = mpmath.mpf(z)
        if z <= 0 or x < 0:
            raise ValueError("eval_h needs x >= 0 and z > 0")
        zero = mpmath.mpf(0)
        if x == 0:
            return Partials(zero, zero, zero, zero, zero, zero, zero, 0)
        avail = source.order
        # outer terms behave like (x max(z,1))^k; pick the last k first
        log_rho = _log(x) + max(_log(z), 0.0)
        if log_rho >= 0:
            raise InsufficientOrderError(avail + 1, avail, "h outside the closure of the domain")
        log_scale = -math.log(ALPHA_LOWER) - deriv * min(_log(x), _log(z), 0.0) + math.log(4)
        log_tol = _log(ctx.tol)
        kmax = 2
        while _tail_bound_log(kmax, log_rho, 2 * deriv, log_scale) > log_tol:
            kmax += 1
        inner_tol = ctx.tol / (2 * kmax)
        acc = [zero] * 6
        top = 0
        certified = True
        for k in range(2, kmax + 1):
            X = x**k
            Z = z**k
            where = f"h term k={k} at x={mpmath.nstr(x, 8)}, z={mpmath.nstr(z, 8)}"
            p = truncated_partials(source, X, Z, inner_tol, deriv, where)
            top = max(top, p.order)
            certified = certified and p.certified
            acc[0] += p.f / k
            if deriv >= 1:
                xk1 = x ** (k - 1)
                zk1 = z ** (k - 1)
                acc[1] += xk1 * p.fx
                acc[2] += zk1 * p.fz
            if deriv >= 2:
                acc[3] += (k - 1) * x ** (k - 2) * p.fx + k * xk1**2 * p.fxx
                acc[4] += k * xk1 * zk1 * p.fxz
                acc[5] += (k - 1) * z ** (k - 2) * p.fz + k * zk1**2 * p.fzz
        vals = acc[: 1 + 2 * deriv] if deriv < 2 else acc
        vals = list(vals) + [None] * (6 - len(vals))
        return Partials(*vals, error=ctx.tol, order=top, certified=certified)
