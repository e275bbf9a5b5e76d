"""Tests for the nearest-PoI and likelihood-greedy comparison planners."""

import random

import pytest

import mrsurvey as m

import reference


def _state_from(pois, robots):
    return m.make_state(
        [(p[0], p[1], p[2], p[3], p[4]) for p in pois],
        [m.RobotState(i, r[0], r[1], r[2]) for i, r in enumerate(robots)],
    )


class TestOptimisticAssign:
    def test_takes_nearest(self):
        st = _state_from([(0, 10.0, 0.0, 30.0, 0.9), (1, 5.0, 0.0, 30.0, 0.1)],
                         [[0, 0, 1]])
        assert m.optimistic_assign(st).targets == (1,)

    def test_index_order_claiming(self):
        # both robots are nearest to PoI 0; robot 0 claims it first
        st = _state_from([(0, 0.0, 0.0, 30.0, 0.5), (1, 10.0, 0.0, 30.0, 0.5)],
                         [[0.0, 5.0, 1.0], [0.0, -5.0, 1.0]])
        assert m.optimistic_assign(st).targets == (0, 1)

    def test_duplicates_only_when_pois_run_out(self):
        st = _state_from([(0, 1.0, 0.0, 30.0, 0.5), (1, 9.0, 0.0, 30.0, 0.5)],
                         [[0.0, 0.0, 1.0], [10.0, 0.0, 1.0], [0.5, 0.0, 1.0]])
        assert m.optimistic_assign(st).targets == (0, 1, 0)

    def test_distance_tie_breaks_to_lower_id(self):
        st = _state_from([(4, 10.0, 0.0, 30.0, 0.5), (8, -10.0, 0.0, 30.0, 0.5)],
                         [[0.0, 0.0, 1.0]])
        assert m.optimistic_assign(st).targets == (4,)

    def test_ignores_likelihoods(self):
        rng = random.Random(41)
        for _ in range(20):
            pois, robots = reference.random_small_instance(rng)
            st1 = _state_from(pois, robots)
            shuffled = [row[:4] + (rng.random(),) for row in pois]
            st2 = _state_from(shuffled, robots)
            assert m.optimistic_assign(st1).targets == m.optimistic_assign(st2).targets

    def test_empty_state_rejected(self):
        st = m.make_state([], [m.RobotState(0, 0.0, 0.0)])
        with pytest.raises(ValueError):
            m.optimistic_assign(st)


class TestGreedyAssign:
    def test_top_likelihood_set_with_min_travel_matching(self):
        pois = [(0, 0.0, 10.0, 30.0, 0.9), (1, 100.0, 10.0, 30.0, 0.5),
                (2, 50.0, 200.0, 30.0, 0.1)]
        st = _state_from(pois, [[0.0, 0.0, 1.0], [100.0, 0.0, 1.0]])
        assert m.greedy_assign(st).targets == (0, 1)
        # swapping the robots swaps the matching, not the target set
        st_swapped = _state_from(pois, [[100.0, 0.0, 1.0], [0.0, 0.0, 1.0]])
        assert m.greedy_assign(st_swapped).targets == (1, 0)

    def test_equal_likelihoods_take_lowest_ids(self):
        pois = [(pid, 10.0 * pid, 0.0, 30.0, 0.4) for pid in (2, 5, 7, 9)]
        st = _state_from(pois, [[35.0, 0.0, 1.0], [90.0, 0.0, 1.0]])
        assert set(m.greedy_assign(st).targets) == {2, 5}

    def test_single_robot_ignores_distance(self):
        st = _state_from([(0, 1.0, 0.0, 30.0, 0.2), (1, 500.0, 0.0, 30.0, 0.9)],
                         [[0.0, 0.0, 1.0]])
        assert m.greedy_assign(st).targets == (1,)

    def test_target_set_invariant_to_geometry(self):
        rng = random.Random(43)
        for _ in range(20):
            pois, robots = reference.random_small_instance(rng)
            if len(pois) < len(robots):
                continue
            st1 = _state_from(pois, robots)
            moved = [(p[0], p[1] * 3.0 - 40.0, p[2] * 0.5 + 7.0, p[3], p[4]) for p in pois]
            st2 = _state_from(moved, [[rng.uniform(-50, 50), rng.uniform(-50, 50), r[2]]
                                      for r in robots])
            assert set(m.greedy_assign(st1).targets) == set(m.greedy_assign(st2).targets)

    def test_duplicates_only_when_pois_run_out(self):
        st = _state_from([(0, 1.0, 0.0, 30.0, 0.9), (1, 9.0, 0.0, 30.0, 0.8)],
                         [[0.0, 0.0, 1.0], [10.0, 0.0, 1.0], [2.0, 0.0, 1.0]])
        targets = m.greedy_assign(st).targets
        assert set(targets) == {0, 1}
        assert len(targets) == 3

    def test_empty_state_rejected(self):
        st = m.make_state([], [m.RobotState(0, 0.0, 0.0)])
        with pytest.raises(ValueError):
            m.greedy_assign(st)


class TestValidity:
    def test_actions_are_valid_joint_actions(self):
        rng = random.Random(44)
        for _ in range(40):
            pois, robots = reference.random_small_instance(rng)
            st = _state_from(pois, robots)
            for assign in (m.optimistic_assign, m.greedy_assign):
                targets = assign(st).targets
                assert len(targets) == len(robots)
                assert set(targets) <= set(st.poi_ids)
                if len(pois) >= len(robots):
                    assert len(set(targets)) == len(targets)
                else:
                    assert set(targets) == set(st.poi_ids)
