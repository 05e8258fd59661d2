import math
from concurrent.futures import ProcessPoolExecutor

import pytest

from leafrate.arnold import (
    CSV_HEADER,
    EnumerationBudgetError,
    brute_force_L,
    count_A,
    count_L,
    count_L_prime,
    leaf_strip_balance,
    pipeline_check,
    rate_report,
    report_csv,
    vertex_budget,
)
from leafrate.genfunc import leaf_polynomials
from leafrate.precision import InsufficientOrderError
from leafrate.trees import ContractError, RootedTree, level_sequences, level_stats

TABLE = leaf_polynomials(70)


@pytest.mark.parametrize("d,N,K", [(4, 5, 4), (5, 7, 4), (6, 12, 9)])
def test_vertex_budget_examples(d, N, K):
    b = vertex_budget(d)
    assert (b.N, b.K) == (N, K)


def test_even_budget_is_square():
    for d in range(4, 41, 2):
        assert vertex_budget(d).K == (d // 2) ** 2


def test_vertex_budget_rejects_small_degree():
    with pytest.raises(ContractError):
        vertex_budget(2)


def test_small_counts():
    assert count_L(4, TABLE) == 1
    assert count_L(5, TABLE) == 20
    assert count_L_prime(4, TABLE) == 5
    assert count_A(4) == 5


@pytest.mark.parametrize("d", [3, 4, 5, 6, 7])
def test_table_counts_equal_enumeration(d):
    assert (count_L(d, TABLE), count_L_prime(d, TABLE)) == brute_force_L(d)


def test_short_table_names_required_order():
    with pytest.raises(InsufficientOrderError) as info:
        count_L(7, leaf_polynomials(10))
    assert info.value.required == 16


def test_A_bounded_by_L_prime():
    for d in (4, 6):
        assert count_A(d) <= count_L_prime(d, TABLE)
    assert all(count_L(d, TABLE) <= count_L_prime(d, TABLE) for d in range(3, 14))


def test_A_six_matches_direct_filter():
    bound = vertex_budget(6).star_bound
    direct = sum(
        1
        for n in range(1, 13)
        for s in level_sequences(n)
        if max(level_stats(s)[1:]) <= bound
    )
    assert count_A(6) == direct


def test_A_with_worker_pool_is_identical():
    with ProcessPoolExecutor(max_workers=2) as pool:
        assert count_A(6, pool=pool, prefix_len=3) == count_A(6)


def test_A_rejects_odd_degree():
    with pytest.raises(ContractError):
        count_A(5)


def test_budget_exhaustion_reports_progress():
    with pytest.raises(EnumerationBudgetError) as info:
        count_A(8, budget=20_000)
    err = info.value
    assert 20_000 < err.seen < err.total
    assert 0 < err.partial <= err.seen


def test_report_rows_and_csv():
    rows = rate_report([4, 5, 6], TABLE)
    assert [(r.d, r.L, r.L_prime, r.A) for r in rows] == [(4, 1, 5, 5), (5, 20, 49, None), (6, 76, 302, 232)]
    text = report_csv(rows)
    lines = text.splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[2].split(",")[5] == ""
    assert rows[1].log2norm_L == pytest.approx(2 * math.log(20) / 25)


def test_report_carries_partial_rows_on_budget():
    with pytest.raises(EnumerationBudgetError) as info:
        rate_report([5, 8], TABLE, budget=1000)
    assert [r.d for r in info.value.rows] == [5, 8]
    assert info.value.rows[-1].A is None


def test_normalized_logs_positive_and_below_limit():
    rows = rate_report(range(5, 14), TABLE, with_A=False)
    log_c1 = math.log(2.919380017448417)
    for r in rows:
        assert 0 < r.log2norm_L < log_c1 + 0.1
        assert 0 < r.log2norm_Lprime < log_c1 + 0.1


def test_strip_balance_single_tree():
    t = RootedTree.parse("0 1 2 3 3 2 1")
    out = leaf_strip_balance(t.levels)
    assert out.inner_chi == 0
    # every original leaf comes back
    assert level_stats(out.tree.levels)[0] >= level_stats(t.levels)[0]


def test_pipeline_at_degree_five():
    summary = pipeline_check(5)
    assert summary.trees == count_L_prime(5, TABLE)
    assert summary.failures == []
    assert summary.target_degree == 12
