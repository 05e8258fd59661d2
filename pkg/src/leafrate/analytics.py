"""Newton solvers on the boundary curve ``x = r(z)`` of the convergence domain.

On the boundary the auxiliary function

    F(x, y, z) = z - 1 + exp(y + h(x, z)) - y / x

vanishes together with ``F_y``, which forces ``a(z) = T(r(z), z) =
1 + r(z)(z - 1)`` and reduces ``r(z)`` to the single equation

    log x + 1 + (z - 1) x + h(x, z) = 0.

Differentiating ``F(r(z), a(z), z) = 0`` along the curve gives ``r'`` and
``r''`` from the partials of ``h``.  Everything else is a root of an
expression in ``r, r', r''``:

* Otter's ``alpha = r(1)``;
* ``z0``, the maximizer of ``r(z) sqrt(z)``, with ``x0 = r(z0) sqrt(z0)``
  and ``C1 = 1 / x0``;
* ``C(lambda)``, from the critical point of ``r(z) z^lambda``;
* the leaf-fraction mean ``m`` and variance ``sigma2`` from ``r'(1)``,
  ``r''(1)``, and the normal-approximation analogue ``C2``.

Error estimates are heuristic: the last Newton correction plus the series
tolerance scaled by the conditioning of the equation, times a safety
factor.  They are not interval bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from functools import lru_cache
from typing import NamedTuple

import mpmath

from .genfunc import GrowingSource, derivative_coeffs, eval_h, leaf_polynomials
from .precision import (
    ORDER_CAP,
    ConvergenceError,
    DegeneratePointError,
    InsufficientOrderError,
    PrecisionContext,
)

__all__ = [
    "Constant",
    "BoundaryPoint",
    "RateResult",
    "InconsistencyError",
    "bivariate_table",
    "univariate_series",
    "solve_alpha",
    "solve_r",
    "r_derivatives",
    "boundary_point",
    "critical_point",
    "find_z0",
    "rate_function",
    "leaf_statistics",
    "normal_approx_constant",
    "all_constants",
    "format_constants",
]

SAFETY = 100


class InconsistencyError(ArithmeticError):
    """Two independent routes to the same quantity disagree."""


class Constant(NamedTuple):
    value: mpmath.mpf
    error: mpmath.mpf
    residual: mpmath.mpf


@dataclass(frozen=True)
class BoundaryPoint:
    """A solved point ``(z, r(z), a(z))`` with optional ``r'``, ``r''``."""

    z: mpmath.mpf
    r: mpmath.mpf
    a: mpmath.mpf
    r1: mpmath.mpf | None = None
    r2: mpmath.mpf | None = None
    error: mpmath.mpf | None = None
    residual: mpmath.mpf | None = None


class RateResult(NamedTuple):
    value: mpmath.mpf
    z_crit: mpmath.mpf | None
    error: mpmath.mpf


@lru_cache(maxsize=4)
def bivariate_table(order: int) -> GrowingSource:
    """Bivariate coefficients, starting at ``order`` and grown on demand."""
    return GrowingSource(leaf_polynomials, order, ORDER_CAP)


@lru_cache(maxsize=4)
def univariate_series(order: int) -> GrowingSource:
    return GrowingSource(derivative_coeffs, order, ORDER_CAP)


def _source(ctx: PrecisionContext, source):
    return bivariate_table(ctx.order) if source is None else source


def solve_r(z, ctx: PrecisionContext, source=None, guess=None) -> BoundaryPoint:
    """``r(z)`` by Newton on ``log x + 1 + (z-1)x + h(x, z) = 0``.

    The default start ``alpha / max(1, z)`` lies inside the domain.  Steps
    that would leave it are halved.
    """
    src = _source(ctx, source)
    with ctx.workdps():
        z = mpmath.mpf(z)
        if z <= 0:
            raise ValueError("z must be positive")
        x = mpmath.mpf(guess) if guess is not None else mpmath.mpf("0.3383") / max(1, z)
        resid = mpmath.inf
        for it in range(1, ctx.max_iter + 1):
            hp = eval_h(x, z, src, ctx, deriv=1)
            resid = mpmath.log(x) + 1 + (z - 1) * x + hp.f
            slope = 1 / x + (z - 1) + hp.fx
            step = resid / slope
            x_new = x - step
            while x_new <= 0 or x_new * max(z, 1) >= 1:
                step /= 2
                x_new = x - step
            x = x_new
            if abs(step) <= ctx.tol * abs(x):
                break
        else:
            raise ConvergenceError(f"r({mpmath.nstr(z, 8)})", resid, ctx.max_iter)
        hp = eval_h(x, z, src, ctx, deriv=1)
        resid = mpmath.log(x) + 1 + (z - 1) * x + hp.f
        slope = 1 / x + (z - 1) + hp.fx
        err = SAFETY * (abs(step) + (abs(resid) + hp.error) / abs(slope))
        return BoundaryPoint(z=z, r=x, a=1 + x * (z - 1), error=err, residual=abs(resid))


def solve_alpha(ctx: PrecisionContext, source=None) -> Constant:
    """Otter's constant, the radius of convergence of ``T(x, 1)``.

    Uses the univariate counts unless another source is given.
    """
    src = univariate_series(ctx.order) if source is None else source
    pt = solve_r(1, ctx, src, guess=mpmath.mpf("0.3383"))
    return Constant(pt.r, pt.error, pt.residual)


def _F_partials(pt: BoundaryPoint, hp):
    r, a = pt.r, pt.a
    return {
        "x": hp.fx / r + a / r**2,
        "z": 1 + hp.fz / r,
        "xx": (hp.fxx + hp.fx**2) / r - 2 * a / r**3,
        "xy": hp.fx / r + 1 / r**2,
        "xz": (hp.fxz + hp.fx * hp.fz) / r,
        "yz": hp.fz / r,
        "zz": (hp.fzz + hp.fz**2) / r,
    }


def r_derivatives(pt: BoundaryPoint, ctx: PrecisionContext, source=None):
    """``(r'(z), r''(z))`` by implicit differentiation along the curve.

    ``F_x r' + F_z = 0`` and, after eliminating ``F_yy`` with the
    differentiated ``F_y = 0``,
    ``F_xx r'^2 + F_xy r' a' + 2 F_xz r' + F_yz a' + F_zz + F_x r'' = 0``
    with ``a' = (z - 1) r' + r``.
    """
    src = _source(ctx, source)
    with ctx.workdps():
        hp = eval_h(pt.r, pt.z, src, ctx, deriv=2)
        F = _F_partials(pt, hp)
        if abs(F["x"]) <= ctx.tol:
            raise DegeneratePointError(f"F_x vanishes at z={mpmath.nstr(pt.z, 8)}")
        r1 = -F["z"] / F["x"]
        a1 = (pt.z - 1) * r1 + pt.r
        r2 = -(F["xx"] * r1**2 + F["xy"] * r1 * a1 + 2 * F["xz"] * r1 + F["yz"] * a1 + F["zz"]) / F["x"]
        return r1, r2


def boundary_point(z, ctx: PrecisionContext, source=None, guess=None) -> BoundaryPoint:
    """:func:`solve_r` followed by :func:`r_derivatives`."""
    pt = solve_r(z, ctx, source, guess)
    r1, r2 = r_derivatives(pt, ctx, source)
    return BoundaryPoint(pt.z, pt.r, pt.a, r1, r2, pt.error, pt.residual)


def critical_point(lam, ctx: PrecisionContext, source=None, z_start=1.5):
    """Critical point of ``r(z) z^lam``.

    Newton runs in ``u = log z`` on ``G(u) = z r'/r + lam``.  ``log r`` is
    concave in ``log z`` (the domain is logarithmically convex), so ``G``
    decreases and capped steps cannot run away.  Returns the final
    :class:`BoundaryPoint`, the error estimate of ``z`` and ``|G|``.
    """
    src = _source(ctx, source)
    with ctx.workdps():
        lam = mpmath.mpf(lam)
        z = mpmath.mpf(z_start)
        guess = None
        G = mpmath.inf
        for it in range(1, ctx.max_iter + 1):
            pt = boundary_point(z, ctx, src, guess)
            G, dG = _log_slope(pt, lam)
            if dG == 0:
                raise DegeneratePointError("flat critical-point equation")
            step = max(min(G / dG, 1), -1)
            z_new = z * mpmath.exp(-step)
            # keep the warm start on the curve: r moves by about r' dz
            guess = pt.r + pt.r1 * (z_new - z)
            if not 0 < guess < min(1, 1 / z_new):
                guess = None
            z = z_new
            if abs(step) <= ctx.tol:
                break
        else:
            raise ConvergenceError(f"critical point for lambda={mpmath.nstr(lam, 8)}", G, ctx.max_iter)
        pt = boundary_point(z, ctx, src, guess)
        G, dG = _log_slope(pt, lam)
        z_err = SAFETY * z * (abs(step) + (abs(G) + ctx.tol) / abs(dG))
        return pt, z_err, abs(G)


def _log_slope(pt: BoundaryPoint, lam):
    """``z r'/r + lam`` and its derivative in ``log z``."""
    q = pt.r1 / pt.r
    return pt.z * q + lam, pt.z * q + pt.z**2 * (pt.r2 / pt.r - q**2)


def find_z0(ctx: PrecisionContext, source=None) -> tuple[Constant, Constant, Constant]:
    """``(z0, x0, C1)``: the maximizer of ``r(z) sqrt(z)``, the maximum and its inverse."""
    with ctx.workdps():
        pt, z_err, resid = critical_point(mpmath.mpf(1) / 2, ctx, source, z_start=1.5)
        sq = mpmath.sqrt(pt.z)
        x0 = pt.r * sq
        # x0 is stationary in z, so only the r error carries over
        x_err = pt.error * sq + abs(pt.r1 + pt.r / (2 * pt.z)) * sq * z_err
        c1 = 1 / x0
        return (
            Constant(pt.z, z_err, resid),
            Constant(x0, x_err, pt.residual),
            Constant(c1, x_err / x0**2, pt.residual),
        )


def rate_function(lam, ctx: PrecisionContext, source=None) -> RateResult:
    """Growth rate ``C(lam)`` of the trees with more than ``lam n`` leaves.

    The critical point of ``r(z) z^lam`` lies above ``z = 1`` exactly when
    ``r'(1) + lam alpha > 0``, i.e. ``lam > m``; otherwise the rate is
    Otter's ``1 / alpha``.
    """
    src = _source(ctx, source)
    with ctx.workdps():
        lam = mpmath.mpf(lam)
        if lam < 0:
            raise ValueError("lambda must be >= 0")
        at_one = boundary_point(1, ctx, src, guess=mpmath.mpf("0.3383"))
        if at_one.r1 + lam * at_one.r <= 0:
            return RateResult(1 / at_one.r, None, at_one.error / at_one.r**2)
        pt, z_err, _ = critical_point(lam, ctx, src)
        peak = pt.r * pt.z**lam
        err = pt.error * pt.z**lam / peak**2
        return RateResult(1 / peak, pt.z, err)


def leaf_statistics(ctx: PrecisionContext) -> tuple[Constant, Constant]:
    """Mean ``m`` and variance ``sigma2`` of the leaf fraction, cross-checked.

    The bivariate table and the univariate derivative series give the same
    ``r'(1)``, ``r''(1)`` along independent summations; they must agree to
    ten times the reported error.
    """
    routes = []
    for src in (bivariate_table(ctx.order), univariate_series(ctx.order)):
        pt = boundary_point(1, ctx, src, guess=mpmath.mpf("0.3383"))
        routes.append(_moments(pt, ctx))
    (m_a, s_a, err_a), (m_b, s_b, err_b) = routes
    with ctx.workdps():
        if abs(m_a - m_b) > 10 * err_a or abs(s_a - s_b) > 10 * err_a:
            raise InconsistencyError(
                f"routes disagree: dm={mpmath.nstr(m_a - m_b, 3)}, dsigma2={mpmath.nstr(s_a - s_b, 3)}"
            )
        return Constant(m_b, err_b, abs(m_a - m_b)), Constant(s_b, err_b, abs(s_a - s_b))


def _moments(pt: BoundaryPoint, ctx: PrecisionContext):
    with ctx.workdps():
        alpha, r1, r2 = pt.r, pt.r1, pt.r2
        m = -r1 / alpha
        sigma2 = r1**2 / alpha**2 - (r1 + r2) / alpha
        err = max(pt.error, ctx.tol) * SAFETY
        return m, sigma2, err


def leaf_statistics_route(ctx: PrecisionContext, source) -> tuple[mpmath.mpf, mpmath.mpf]:
    """``(m, sigma2)`` from one coefficient source."""
    pt = boundary_point(1, ctx, source, guess=mpmath.mpf("0.3383"))
    m, sigma2, _ = _moments(pt, ctx)
    return m, sigma2


def normal_approx_constant(ctx: PrecisionContext, alpha=None, m=None, sigma2=None) -> Constant:
    """``C2 = exp(-(1/2 - m)^2 / (2 sigma2)) / alpha``."""
    if alpha is None:
        alpha = solve_alpha(ctx)
    if m is None or sigma2 is None:
        m, sigma2 = leaf_statistics(ctx)
    with ctx.workdps():
        half = mpmath.mpf(1) / 2
        expo = (half - m.value) ** 2 / (2 * sigma2.value)
        c2 = mpmath.exp(-expo) / alpha.value
        # first-order propagation of the three input errors
        d_alpha = c2 / alpha.value * alpha.error
        d_m = c2 * abs(half - m.value) / sigma2.value * m.error
        d_s = c2 * expo / sigma2.value * sigma2.error
        return Constant(c2, d_alpha + d_m + d_s, mpmath.mpf(0))


CONSTANT_NAMES = ("alpha", "z0", "x0", "C1", "m", "sigma2", "C2")


def all_constants(ctx: PrecisionContext) -> dict[str, Constant]:
    alpha = solve_alpha(ctx)
    z0, x0, c1 = find_z0(ctx)
    m, sigma2 = leaf_statistics(ctx)
    c2 = normal_approx_constant(ctx, alpha, m, sigma2)
    return {"alpha": alpha, "z0": z0, "x0": x0, "C1": c1, "m": m, "sigma2": sigma2, "C2": c2}


def _exact_decimal(value) -> Decimal:
    # re-wrapping an mpf would round it to the ambient precision
    if not isinstance(value, mpmath.mpf):
        value = mpmath.mpf(value)
    sign, man, exp, _ = value._mpf_
    if not man:
        return Decimal(0)
    # man 2^exp == man 5^-exp 10^exp, exactly
    man = int(man)
    d = Decimal(man << exp) if exp >= 0 else Decimal(f"{man * 5**-exp}E{exp}")
    return -d if sign else d


def format_value(value, digits: int) -> str:
    """Fixed-point text with ``digits`` significant digits, ties to even."""
    d = _exact_decimal(value)
    if not d:
        return "0." + "0" * (digits - 1) if digits > 1 else "0"
    with localcontext() as dctx:
        dctx.prec = digits
        dctx.rounding = ROUND_HALF_EVEN
        d = +d
    return format(d, "f")


def format_constants(values: dict, digits: int) -> str:
    """``name = value`` lines, ``digits`` significant digits each."""
    lines = []
    for name, const in values.items():
        v = const.value if isinstance(const, (Constant, RateResult)) else const
        lines.append(f"{name} = {format_value(v, digits)}")
    return "\n".join(lines) + "\n"


__all__ += ["InsufficientOrderError", "leaf_statistics_route", "format_value", "CONSTANT_NAMES"]
