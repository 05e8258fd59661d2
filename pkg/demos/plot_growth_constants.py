"""
Growth constants from the boundary curve
========================================

The bivariate series converges for ``x < r(z)``.  Every constant below is
read off that curve, either near ``z = 1`` or at the maximum of
``r(z) sqrt(z)``.
"""

import mpmath

from leafrate import PrecisionContext, all_constants, solve_r

ctx = PrecisionContext(digits=20)

# a few points of the curve; r falls roughly like 1/z
with ctx.workdps():
    for z in ("0.5", "1", "1.5", "2", "3"):
        pt = solve_r(mpmath.mpf(z), ctx)
        print(f"r({z}) = {mpmath.nstr(pt.r, 15)}")

# all the constants at 20 digits, with their error estimates
for name, c in all_constants(ctx).items():
    print(f"{name:7s} {mpmath.nstr(c.value, 20):>24s}   +- {mpmath.nstr(c.error, 2)}")
