"""
How rare are leafy trees?
=========================

Trees with more than ``lambda n`` leaves grow like ``C(lambda)^n``.  Below
the mean leaf fraction the constraint costs nothing; above it the rate
drops, and the drop at ``lambda = 1/2`` is smaller than a normal
approximation predicts.
"""

import mpmath

from leafrate import PrecisionContext, leaf_polynomials, rate_function

ctx = PrecisionContext(digits=15)
for lam in ("0", "0.4", "0.45", "0.5", "0.55", "0.6", "0.7"):
    res = rate_function(mpmath.mpf(lam), ctx)
    where = "flat" if res.z_crit is None else f"critical z = {mpmath.nstr(res.z_crit, 8)}"
    print(f"C({lam}) = {mpmath.nstr(res.value, 12)}   ({where})")

# the n-th root of the exact count creeps toward 1/C(1/2) only slowly
table = leaf_polynomials(200)
for n in (50, 100, 200):
    print(n, float(mpmath.mpf(table[n].upper_half()) ** (-1.0 / n)))
