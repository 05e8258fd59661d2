"""
Trees allowed for real plane curves
===================================

Nested ovals of a degree ``d`` curve form a rooted tree with at most
``N_d`` vertices.  The leaf bound gives ``L_d`` and ``L'_d`` from the
table; the two-sided bound on non-empty ovals gives ``A_d``, which needs
every tree.
"""

from leafrate import leaf_polynomials
from leafrate.arnold import pipeline_check, rate_report, report_csv

rows = rate_report([4, 5, 6, 7, 8, 9], leaf_polynomials(30), with_A=False)
print(report_csv(rows))

# A_d by exhaustive enumeration for the small even degrees
print(report_csv(rate_report([4, 6], leaf_polynomials(12))))

# strip the leaves, balance the rest, put the leaves back: at d = 5 every
# admitted tree lands inside the degree-12 bounds
summary = pipeline_check(5)
print(f"{summary.trees} trees, {len(summary.failures)} failures, at most {summary.max_inserted} inserted vertices")
