import pytest

from gapforge.errors import SearchError
from gapforge.exactroots import (
    GammaInterval,
    compare_gammas,
    enumerate_cells,
    gamma_range_for_prefix,
)
from gapforge.searchpipe import (
    PRESETS,
    SearchConfig,
    common_prefix,
    run_search,
    run_step,
)

P18 = (1, 4, 9, 20, 45, 102, 230, 516, 1158, 2599)

# best eight sequences at N = 10**5, in rank order
TOP8_1E5 = [
    P18 + (5831, 13082, 29351),
    (1, 4, 9, 20, 46, 103, 233, 524, 1179, 2652, 5964, 13414, 30170),
    P18 + (5831, 13082, 29353),
    (1, 4, 9, 20, 46, 103, 233, 524, 1179, 2652, 5966, 13418, 30180),
    P18 + (5831, 13083, 29353),
    P18 + (5833, 13087, 29363),
    P18 + (5831, 13083, 29355),
    (1, 4, 9, 20, 46, 103, 233, 524, 1179, 2652, 5964, 13414, 30171),
]

# tails of the best eight at N = 10**6, all continuing P18
TOP8_1E6 = [
    P18 + t
    for t in [
        (5831, 13082, 29351, 65853, 147748, 331490),
        (5831, 13082, 29351, 65853, 147748, 331488),
        (5831, 13082, 29351, 65852, 147747, 331488),
        (5831, 13082, 29351, 65852, 147747, 331486),
        (5831, 13082, 29351, 65852, 147747, 331485),
        (5831, 13082, 29351, 65853, 147748, 331489),
        (5833, 13087, 29364, 65884, 147823, 331671),
        (5833, 13087, 29364, 65885, 147826, 331676),
    ]
]


def test_common_prefix_reproduces_consensus():
    assert common_prefix(TOP8_1E5, 5).increments == P18
    assert common_prefix(TOP8_1E6, 5).increments == P18 + (5831, 13082, 29351)


def test_common_prefix_edge_cases():
    assert common_prefix(TOP8_1E5, 8).increments == (1, 4, 9, 20)
    assert common_prefix(TOP8_1E5[:1], 1).increments == TOP8_1E5[0]
    # a tie at equal count goes to the earlier sequence's prefix
    assert common_prefix([(1, 4, 9), (1, 4, 10)], 1).increments == (1, 4, 9)
    with pytest.raises(SearchError):
        common_prefix([(2,), (3,)], 2)
    with pytest.raises(ValueError):
        common_prefix(TOP8_1E5, 9)
    with pytest.raises(ValueError):
        common_prefix([], 1)


def test_config_validation():
    iv = GammaInterval.from_decimals("2.24", "2.26")
    with pytest.raises(ValueError):
        SearchConfig(iv, [(1000, 5), (1000, 5)])
    with pytest.raises(ValueError):
        SearchConfig(iv, [])
    with pytest.raises(ValueError):
        SearchConfig(iv, [(1000, 5)], quorum=0)
    with pytest.raises(ValueError):
        SearchConfig(iv, [(1000, 5)], top_t=0)
    assert set(PRESETS) == {"desk", "full", "ciura-desk", "ciura-full"}
    assert PRESETS["desk"]().steps == [(10**4, 1000), (10**5, 1000)]


def test_degenerate_step_inside_one_cell():
    iv = GammaInterval.from_decimals("2.2436090614", "2.2436090615")
    report = run_step(iv, 2000, 5, top_t=1)
    [cell] = report.cells
    assert report.prefix == cell.sequence
    expected = gamma_range_for_prefix(cell.sequence).intersect(iv)
    assert report.interval_out == expected == iv
    assert report.quorum_count == 1


def test_step_ranking_and_shared_trials():
    iv = GammaInterval.from_decimals("2.24", "2.26")
    report = run_step(iv, 1000, 30, master_seed=77, step_index=3)
    assert report.trials.master_seed == 77 ^ 3
    assert report.trials.count == 30 and report.trials.n == 1000
    assert len(report.cells) == len(enumerate_cells(iv, 500))
    keys = [rc.result.total_comparisons for rc in report.ranking]
    assert keys == sorted(keys)
    for a, b in zip(report.ranking, report.ranking[1:]):
        if a.result.total_comparisons == b.result.total_comparisons:
            assert compare_gammas(a.cell.label, b.cell.label) < 0
    assert all(rc.result.trials == 30 for rc in report.ranking)


def test_step_output_lies_in_prefix_range():
    iv = GammaInterval.from_decimals("2.24", "2.26")
    report = run_step(iv, 2000, 20)
    assert iv.includes(report.interval_out)
    assert gamma_range_for_prefix(report.prefix).includes(report.interval_out)
    top = [rc.cell.sequence for rc in report.ranking[:8]]
    assert sum(s.startswith(report.prefix) for s in top) >= report.quorum_count == 5


@pytest.fixture(scope="module")
def small_search():
    config = SearchConfig(
        GammaInterval.from_decimals("2.24", "2.26"), [(1000, 40), (4000, 20)], master_seed=5
    )
    return config, run_search(config)


def test_search_nests_and_extends(small_search):
    config, result = small_search
    first, second = result.steps
    assert first.interval_in == config.initial_interval
    assert second.interval_in == first.interval_out
    assert first.interval_in.includes(first.interval_out)
    assert second.interval_in.includes(second.interval_out)
    assert second.prefix.startswith(first.prefix)
    assert result.final_interval == second.interval_out
    assert result.sequence == second.best.cell.sequence
    assert second.interval_in.contains(result.gamma)
    assert result.gamma_decimal.startswith("2.2")


def test_search_is_deterministic(small_search):
    config, result = small_search
    again = run_search(config)
    assert again.gamma_decimal == result.gamma_decimal
    assert [s.prefix for s in again.steps] == [s.prefix for s in result.steps]
    assert [
        [rc.result for rc in s.ranking] for s in again.steps
    ] == [[rc.result for rc in s.ranking] for s in result.steps]


def test_progress_callback_receives_messages():
    lines = []
    config = SearchConfig(GammaInterval.from_decimals("2.30", "2.31"), [(200, 3)])
    run_search(config, progress=lines.append)
    assert lines and lines[0].startswith("step 1:")
