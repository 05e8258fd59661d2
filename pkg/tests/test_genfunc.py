import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import PRINTED, PRINTED_ROWS
from leafrate.genfunc import (
    CacheFormatError,
    CoefficientTable,
    GrowingSource,
    derivative_coeffs,
    eval_h,
    eval_T,
    leaf_polynomials,
    otter_counts,
    series_partials,
    specialize_counts,
)
from leafrate.precision import InsufficientOrderError, PrecisionContext

TABLE60 = leaf_polynomials(60)


def test_printed_rows():
    for n, row in PRINTED_ROWS.items():
        assert list(TABLE60[n].coeffs) == row


def test_table_matches_enumeration_oracle():
    ref = oracles.leaf_table(13)
    for n in range(1, 14):
        for k in range(0, n + 1):
            assert TABLE60.a(n, k) == ref.get((n, k), 0), (n, k)


def test_otter_counts_match_divisor_recurrence():
    assert otter_counts(60) == oracles.rooted_tree_counts(60)
    assert specialize_counts(TABLE60) == otter_counts(60)


def test_row_structure():
    for n in range(2, 61):
        row = TABLE60[n]
        assert row[0] == 0
        assert row[1] == 1  # the path
        assert row[n - 1] == 1  # the star
        assert row[n] == 0
        assert len(row.coeffs) == n
        assert all(c > 0 for c in row.coeffs[1:])


def test_adding_a_leaf_injects():
    # the lone root is its own leaf, so n = 1 is the one exception
    assert (TABLE60.a(1, 1), TABLE60.a(2, 2)) == (1, 0)
    for n in range(2, 60):
        for k in range(1, n + 1):
            assert TABLE60.a(n, k) <= TABLE60.a(n + 1, k + 1)


def test_upper_half_superadditive():
    up = [0] + [TABLE60[n].upper_half() for n in range(1, 61)]
    for n in range(1, 59):
        for m in range(1, 59 - n):
            assert 2 * up[n + m + 2] >= up[n] * up[m]


def test_counts_below_otter_envelope():
    counts = otter_counts(300)
    with mpmath.workdps(50):
        alpha = mpmath.mpf(PRINTED["alpha"])
        assert all(counts[n] * alpha**n <= 1 for n in range(1, 301))


def test_derivative_series_equals_moments():
    d = derivative_coeffs(60)
    for n in range(1, 61):
        row = TABLE60[n]
        assert d.counts[n] == row.total
        assert d.first[n] == row.moment(1)
        assert d.second[n] == row.moment(2)


def test_small_table_edges():
    assert list(leaf_polynomials(1)[1].coeffs) == [0, 1]
    with pytest.raises(ValueError):
        leaf_polynomials(0)
    with pytest.raises(IndexError):
        TABLE60[61]


# -- cache file -------------------------------------------------------------------

@settings(max_examples=20, deadline=None)
@given(st.integers(1, 40))
def test_cache_round_trip(N):
    table = leaf_polynomials(N)
    assert CoefficientTable.loads(table.dumps()) == table


def test_cache_file_round_trip(tmp_path):
    path = tmp_path / "t.cache"
    TABLE60.save(path)
    assert CoefficientTable.load(path) == TABLE60


@pytest.mark.parametrize(
    "text,lineno",
    [
        ("", 1),
        ("garbage\n", 1),
        ("leafcount-table v1 N=x\n", 1),
        ("leafcount-table v1 N=3\n1 1 1\n2 1 one\n", 3),
        ("leafcount-table v1 N=3\n1 1 1\n2 1\n", 3),
        ("leafcount-table v1 N=3\n1 1 1\n5 1 1\n", 3),
        ("leafcount-table v1 N=3\n1 1 1\n1 1 1\n", 3),
        ("leafcount-table v1 N=3\n1 1 1\n2 1 1\n3 1 1\n3 2 -1\n", 5),
    ],
)
def test_corrupt_cache_names_line(text, lineno):
    with pytest.raises(CacheFormatError) as info:
        CoefficientTable.loads(text, source="c")
    assert info.value.lineno == lineno
    assert f"c:{lineno}:" in str(info.value)


# -- evaluation ---------------------------------------------------------------------

def direct_partials(x, z, N=60):
    """T and its partials from the exact rows, summed term by term."""
    T = lambda x, z: sum(TABLE60[n](z) * x**n for n in range(1, N + 1))
    return (
        T(x, z),
        mpmath.diff(lambda u: T(u, z), x),
        mpmath.diff(lambda u: T(x, u), z),
        mpmath.diff(lambda u: T(u, z), x, 2),
        mpmath.diff(lambda u, v: T(u, v), (x, z), (1, 1)),
        mpmath.diff(lambda u: T(x, u), z, 2),
    )


def test_eval_T_matches_direct_sum_inside_domain():
    ctx = PrecisionContext(digits=20)
    with mpmath.workdps(40):
        x, z = mpmath.mpf("0.05"), mpmath.mpf("1.5")
        p = eval_T(x, z, TABLE60, ctx)
        ref = direct_partials(x, z)
        for got, want in zip(p[:6], ref):
            assert abs(got - want) < mpmath.mpf(10) ** -18 * max(1, abs(want))


def test_functional_equation_holds():
    ctx = PrecisionContext(digits=20)
    src = GrowingSource(leaf_polynomials, 80)
    with ctx.workdps():
        for x, z in [("0.2", "1.3"), ("0.3", "0.6"), ("0.1", "4")]:
            x, z = mpmath.mpf(x), mpmath.mpf(z)
            T = eval_T(x, z, src, ctx, deriv=0).f
            h = eval_h(x, z, src, ctx, deriv=0).f
            assert abs(T - (x * z - x + x * mpmath.exp(T + h))) < mpmath.mpf(10) ** -20


def test_h_at_otter_point():
    # on z = 1 the boundary equation reads log(alpha) + 1 + h(alpha, 1) = 0
    ctx = PrecisionContext(digits=30)
    with ctx.workdps():
        alpha = mpmath.mpf(PRINTED["alpha"])
        h = eval_h(alpha, 1, GrowingSource(leaf_polynomials, 200), ctx, deriv=0).f
        assert abs(h + mpmath.log(alpha) + 1) < mpmath.mpf(10) ** -30


def test_doubling_order_changes_less_than_tolerance():
    ctx = PrecisionContext(digits=20)
    table = leaf_polynomials(240)
    with ctx.workdps():
        x, z = mpmath.mpf("0.2"), mpmath.mpf("1.1")
        p = eval_T(x, z, table, ctx)
        q = series_partials(table, x, z, 2 * p.order)
        for a, b in zip(p[:6], q[:6]):
            assert abs(a - b) < ctx.tol * max(1, abs(b))


def test_insufficient_order_is_reported():
    ctx = PrecisionContext(digits=30)
    with ctx.workdps():
        with pytest.raises(InsufficientOrderError) as info:
            eval_T(mpmath.mpf("0.33"), 1, leaf_polynomials(20), ctx)
    assert info.value.required > info.value.available == 20


def test_eval_rejects_outside_arguments():
    ctx = PrecisionContext(digits=10)
    with pytest.raises(ValueError):
        eval_T(-0.1, 1, TABLE60, ctx)
    with pytest.raises(ValueError):
        eval_h(0.1, 0, TABLE60, ctx)
