import hypothesis.strategies as st
import pytest
from hypothesis import given, settings

from helpers import chain, parallel, point_mass
from sedm.network import (
    Activity,
    Discrete,
    Normal,
    ProjectNetwork,
    Triangular,
    Uniform,
    baseline_schedule,
    forward_pass,
    progressive_levels,
    serial_parallel_indicator,
    validate,
    validated,
)


def tri(pd):
    return Triangular(pd * 0.5, float(pd), pd * 1.5)


class TestValidate:
    def test_valid_two_chain(self):
        net = chain([2, 3])
        assert validate(net) == []

    def test_smallest_cycle_names_the_edge(self):
        net = ProjectNetwork(
            [
                Activity("A", 1, tri(1), ("B",)),
                Activity("B", 1, tri(1), ("A",)),
            ]
        )
        issues = validate(net)
        assert len(issues) == 1
        assert "cycle" in issues[0]
        assert "A" in issues[0] and "B" in issues[0]

    def test_triangular_parameter_order(self):
        net = ProjectNetwork([Activity("A", 5, Triangular(5, 3, 8))])
        issues = validate(net)
        assert any("out of order" in m for m in issues)

    def test_unknown_predecessor_and_self_reference(self):
        net = ProjectNetwork(
            [
                Activity("A", 1, tri(1), ("ghost",)),
                Activity("B", 1, tri(1), ("B",)),
            ]
        )
        issues = validate(net)
        assert any("unknown predecessor id 'ghost'" in m for m in issues)
        assert any("lists itself" in m for m in issues)

    def test_pd_must_be_positive_integer(self):
        net = ProjectNetwork([Activity("A", 0, tri(1))])
        assert any("pd must be" in m for m in validate(net))

    def test_distribution_violations(self):
        bad = [
            Activity("U", 2, Uniform(3.0, 3.0)),
            Activity("N", 2, Normal(2.0, 0.0), ("U",)),
            Activity("D", 2, Discrete(((1.0, 0.6), (2.0, 0.5))), ("N",)),
        ]
        issues = validate(ProjectNetwork(bad))
        assert any("'U'" in m and "uniform" in m for m in issues)
        assert any("'N'" in m and "sd" in m for m in issues)
        assert any("'D'" in m and "sum" in m for m in issues)

    def test_duplicate_ids(self):
        net = ProjectNetwork([Activity("A", 1, tri(1)), Activity("A", 2, tri(2))])
        assert any("duplicate" in m for m in validate(net))

    def test_validated_raises_with_all_issues(self):
        net = ProjectNetwork([Activity("A", 0, Triangular(5, 3, 8))])
        with pytest.raises(ValueError, match="invalid project network"):
            validated(net)


class TestProgressiveLevels:
    def test_serial_chain_of_five(self):
        net = chain([1, 2, 3, 4, 5])
        levels, n_s = progressive_levels(net)
        assert [levels[f"A{k}"] for k in range(1, 6)] == [1, 2, 3, 4, 5]
        assert n_s == 5

    def test_fully_parallel(self):
        net = parallel([1, 2, 3, 4, 5])
        levels, n_s = progressive_levels(net)
        assert set(levels.values()) == {1}
        assert n_s == 1

    def test_diamond(self):
        # chains enumerated by hand: A-B-D, A-C-D -> depth 3
        net = ProjectNetwork(
            [
                Activity("A", 2, tri(2)),
                Activity("B", 3, tri(3), ("A",)),
                Activity("C", 5, tri(5), ("A",)),
                Activity("D", 1, tri(1), ("B", "C")),
            ]
        )
        _, n_s = progressive_levels(net)
        assert n_s == 3


class TestSerialParallelIndicator:
    @pytest.mark.parametrize(
        "n_s,n_t,expected",
        [(9, 13, 0.666), (17, 40, 0.410), (15, 18, 0.823), (10, 21, 0.450)],
    )
    def test_published_values(self, n_s, n_t, expected):
        assert serial_parallel_indicator(n_s, n_t) == pytest.approx(expected, abs=1e-3)

    def test_pure_serial_and_pure_parallel(self):
        for n in (2, 5, 17):
            assert serial_parallel_indicator(n, n) == 1.0
            assert serial_parallel_indicator(1, n) == 0.0

    def test_single_activity_undefined(self):
        with pytest.raises(ValueError, match="undefined"):
            serial_parallel_indicator(1, 1)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            serial_parallel_indicator(5, 4)

    def test_sp_is_one_iff_fully_serial(self):
        assert serial_parallel_indicator(7, 7) == 1.0
        assert serial_parallel_indicator(6, 7) < 1.0


class TestForwardPass:
    def test_chain_durations(self):
        net = chain([2, 3, 4])
        s = forward_pass(net, {"A1": 2, "A2": 3, "A3": 4})
        assert (s.finish["A1"], s.finish["A2"], s.finish["A3"]) == (2, 5, 9)
        assert s.project_duration == 9

    def test_diamond_takes_longest_path(self):
        # enumerated paths: A+B+D = 6, A+C+D = 8
        net = ProjectNetwork(
            [
                Activity("A", 2, tri(2)),
                Activity("B", 3, tri(3), ("A",)),
                Activity("C", 5, tri(5), ("A",)),
                Activity("D", 1, tri(1), ("B", "C")),
            ]
        )
        s = forward_pass(net, {"A": 2, "B": 3, "C": 5, "D": 1})
        assert s.project_duration == 8

    def test_single_activity(self):
        net = ProjectNetwork([Activity("A", 7, tri(7))])
        assert forward_pass(net, {"A": 7}).project_duration == 7

    def test_missing_duration(self):
        net = chain([2, 3])
        with pytest.raises(ValueError, match="missing duration"):
            forward_pass(net, {"A1": 2})

    def test_nonpositive_duration(self):
        net = chain([2])
        with pytest.raises(ValueError, match="must be > 0"):
            forward_pass(net, {"A1": 0})


class TestBaselineSchedule:
    def test_serial_chain(self):
        assert baseline_schedule(chain([2, 3])).project_duration == 5

    def test_two_parallel(self):
        assert baseline_schedule(parallel([4, 6])).project_duration == 6

    def test_serial_bpd_equals_total_planned_work(self):
        net = chain([3, 1, 4, 1, 5])
        assert baseline_schedule(net).project_duration == net.tpd_final == 14


# ---------------------------------------------------------------------------
# Properties over randomized small DAGs
# ---------------------------------------------------------------------------

@st.composite
def small_dags(draw):
    n = draw(st.integers(min_value=1, max_value=8))
    preds = []
    for i in range(n):
        # edges only from lower-numbered activities keeps the graph acyclic
        pool = list(range(i))
        preds.append(draw(st.sets(st.sampled_from(pool), max_size=3)) if pool else set())
    pds = draw(st.lists(st.integers(1, 9), min_size=n, max_size=n))
    activities = [
        Activity(f"T{i}", pds[i], point_mass(pds[i]), tuple(f"T{j}" for j in sorted(preds[i])))
        for i in range(n)
    ]
    durations = {
        f"T{i}": draw(st.floats(0.25, 12.0, allow_nan=False, allow_infinity=False))
        for i in range(n)
    }
    return validated(ProjectNetwork(activities)), durations


def enumerate_chain_sums(network, durations):
    """Oracle: brute-force every precedence chain and sum its durations."""

    def chains_ending_at(i):
        preds = network.by_id[i].predecessors
        if not preds:
            return [[i]]
        return [c + [i] for p in preds for c in chains_ending_at(p)]

    best = 0.0
    for a in network.activities:
        for c in chains_ending_at(a.id):
            best = max(best, sum(durations[x] for x in c))
    return best


@given(small_dags())
@settings(max_examples=120, deadline=None)
def test_forward_pass_respects_precedence(case):
    network, durations = case
    s = forward_pass(network, durations)
    for a in network.activities:
        for p in a.predecessors:
            assert s.start[a.id] >= s.finish[p] - 1e-12
        assert s.start[a.id] >= 0


@given(small_dags())
@settings(max_examples=120, deadline=None)
def test_project_duration_matches_path_enumeration(case):
    network, durations = case
    s = forward_pass(network, durations)
    assert s.project_duration == pytest.approx(
        enumerate_chain_sums(network, durations), abs=1e-9
    )


@given(st.integers(2, 9))
def test_extending_longest_chain_never_decreases_depth(n):
    base = chain([1] * n)
    extended = ProjectNetwork(
        list(base.activities) + [Activity("tail", 1, point_mass(1), (f"A{n}",))]
    )
    assert extended.n_s >= base.n_s
    assert 0.0 <= serial_parallel_indicator(extended.n_s, extended.n_t) <= 1.0
