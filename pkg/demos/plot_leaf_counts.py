"""
Counting trees by their leaves
==============================

Rooted unlabelled trees on ``n`` vertices, split by how many leaves they
have, two ways: walking every tree, and reading the coefficient table.
"""

from leafrate import enumerate_rooted_trees, leaf_count, leaf_polynomials

# walk every tree on 7 vertices and tally the leaves
tally = {}
for t in enumerate_rooted_trees(7):
    tally[leaf_count(t)] = tally.get(leaf_count(t), 0) + 1
print("by enumeration:", dict(sorted(tally.items())))

# the same row straight from the recurrence
table = leaf_polynomials(7)
print("from the table:", {k: c for k, c in enumerate(table[7].coeffs) if c})

# rows get wide quickly; the table is exact at any size
big = leaf_polynomials(100)
row = big[100]
print("trees on 100 vertices:", row.total)
print("mean leaf fraction at n = 100:", row.moment(1) / row.total / 100)

# the largest trees come first in the generation order: the path, then down to the star
first, *_, last = enumerate_rooted_trees(6)
print("first:", first, " last:", last)
