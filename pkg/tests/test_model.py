
import numpy as np
import pytest

from tempsec.model import (
    ArrivalRealization,
    Instance,
    Item,
    PackingConstraints,
    ScheduleState,
    capacity_ratio,
    instance_from_dict,
    instance_to_dict,
    is_feasible_now,
    load_instance,
    normalize_constraints,
    peak_excess,
    save_instance,
    sparsity,
)


def rows(*pairs):
    """Build constraints from (coefficients, capacity) rows."""
    A = np.array([p[0] for p in pairs], dtype=float)
    return PackingConstraints.from_dense(A, [p[1] for p in pairs])


class TestNormalize:
    def test_divides_by_row_max(self):
        out = normalize_constraints(rows(([2, 4], 8)))
        np.testing.assert_allclose(out.dense(), [[0.5, 1.0]])
        assert out.capacities == (2.0,)

    def test_idempotent_on_normalized_row(self):
        c = rows(([0.3, 1], 5))
        out = normalize_constraints(c)
        np.testing.assert_array_equal(out.dense(), c.dense())
        assert out.capacities == c.capacities

    def test_two_rows_and_capacity_ratio(self):
        c = rows(([1, 1], 3), ([10, 5], 20))
        out = normalize_constraints(c)
        np.testing.assert_allclose(out.dense(), [[1, 1], [1, 0.5]])
        assert out.capacities == (3.0, 2.0)
        # brute force: min over rows of b_i / max_j a_ij
        brute = min(b / max(r) for r, b in ([[1, 1], 3], [[10, 5], 20]))
        assert capacity_ratio(out) == brute == 2.0
        assert capacity_ratio(c) == 2.0

    def test_rejects_zero_row(self):
        with pytest.raises(ValueError):
            normalize_constraints(rows(([0, 0], 1), ([1, 1], 1)))

    def test_rejects_negative_coefficient(self):
        with pytest.raises(ValueError):
            rows(([1, -1], 1))

    def test_max_coefficient_exactly_one(self):
        rng = np.random.default_rng(0)
        c = PackingConstraints.from_dense(rng.random((4, 7)) * 9 + 0.1, rng.random(4) * 5 + 1)
        out = normalize_constraints(c)
        assert np.all(out.row_max() == 1.0)


class TestCapacityRatioAndSparsity:
    def test_min_capacity(self):
        assert capacity_ratio(rows(([1, 0.5], 3), ([0.2, 1], 2))) == 2.0

    def test_single_row(self):
        assert capacity_ratio(rows(([1], 64))) == 64.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            capacity_ratio(PackingConstraints((), ((), ())))

    def test_sparsity_examples(self):
        assert sparsity(PackingConstraints((1.0, 1.0), (((0, 1.0),), ((0, 1.0), (1, 1.0))))) == 2
        assert sparsity(PackingConstraints((1.0,), ((), ()))) == 0
        assert sparsity(rows(([1] * 5, 3))) == 1


def _inst(B=1, gamma=0.1, n=5, constraints=None):
    return Instance.from_arrays(np.arange(1, n + 1), gamma=gamma, capacity=B,
                                constraints=constraints)


class TestFeasibility:
    def test_active_blocks_b1(self):
        inst = _inst(B=1, gamma=0.2)
        st = ScheduleState(inst)
        st.commit(0, 0.4)
        assert not is_feasible_now(st, 0.5, inst.items[1], inst)

    def test_expired(self):
        inst = _inst(B=1, gamma=0.1)
        st = ScheduleState(inst)
        st.commit(0, 0.3)
        assert is_feasible_now(st, 0.5, inst.items[1], inst)

    def test_hand_example_b2(self):
        inst = _inst(B=2, gamma=0.1)
        st = ScheduleState(inst)
        st.commit(0, 0.50)
        st.commit(1, 0.55)
        assert not is_feasible_now(st, 0.58, inst.items[2], inst)
        assert is_feasible_now(st, 0.62, inst.items[2], inst)

    def test_half_open_boundary(self):
        inst = _inst(B=1, gamma=0.25)
        st = ScheduleState(inst)
        st.commit(0, 0.25)
        assert is_feasible_now(st, 0.5, inst.items[1], inst)

    def test_time_outside_unit_interval(self):
        inst = _inst()
        with pytest.raises(ValueError):
            is_feasible_now(ScheduleState(inst), 1.5, inst.items[0], inst)

    def test_item_not_yet_arrived(self):
        inst = _inst()
        arr = ArrivalRealization([0.9, 0.1, 0.2, 0.3, 0.4])
        with pytest.raises(ValueError):
            is_feasible_now(ScheduleState(inst), 0.5, inst.items[0], inst, arr)

    def test_time_cannot_go_backwards(self):
        inst = _inst()
        st = ScheduleState(inst)
        st.advance(0.5)
        with pytest.raises(ValueError):
            st.advance(0.4)

    def test_packing_rows(self):
        c = rows(([1, 0.5, 0.6], 1.0))
        inst = _inst(n=3, constraints=c)
        st = ScheduleState(inst, "packing")
        st.commit(1, 0.1)
        assert not is_feasible_now(st, 0.12, inst.items[2], inst)
        st2 = ScheduleState(inst, "packing")
        st2.commit(1, 0.1)
        assert is_feasible_now(st2, 0.2, inst.items[0], inst)

    def test_monotone_in_capacity(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            times = np.sort(rng.random(6))
            res = []
            for B in (1, 2, 3):
                inst = _inst(B=B, gamma=0.3, n=7)
                st = ScheduleState(inst)
                for j, t in enumerate(times):
                    st.commit(j, t)
                res.append(is_feasible_now(st, min(1.0, times[-1] + 0.01), inst.items[6], inst))
            assert res == sorted(res)

    def test_active_at_fine_grid_matches_count(self):
        inst = _inst(B=3, gamma=0.1, n=4)
        st = ScheduleState(inst)
        for j, t in enumerate([0.1, 0.15, 0.18]):
            st.commit(j, t)
        for t in np.arange(0.1, 0.3, 0.001):
            assert len(st.active_at(t)) <= 3


class TestInstance:
    def test_duration_bounds(self):
        with pytest.raises(ValueError):
            Instance.from_arrays([1.0], [0.2], gamma=0.1, capacity=1)
        with pytest.raises(ValueError):
            Instance.from_arrays([1.0], [0.0], gamma=0.1, capacity=1)

    def test_negative_value(self):
        with pytest.raises(ValueError):
            Item(0, -1.0, 0.1)

    def test_gamma_range(self):
        for g in (0.0, 1.5):
            with pytest.raises(ValueError):
                Instance.from_arrays([1.0], gamma=g, capacity=1)

    def test_integer_capacity_flagged(self):
        inst = Instance.from_arrays([1.0], gamma=0.1, capacity=2.5)
        with pytest.raises(ValueError):
            inst.integer_capacity()

    def test_constraint_column_count(self):
        with pytest.raises(ValueError):
            _inst(n=3, constraints=rows(([1, 1], 1)))

    def test_json_round_trip(self, tmp_path):
        inst = Instance.from_arrays([3.0, 1.5], [0.1, 0.05], gamma=0.1, capacity=2,
                                    constraints=rows(([1, 0.5], 2)))
        path = save_instance(inst, tmp_path / "i.json")
        back = load_instance(path)
        assert instance_to_dict(back) == instance_to_dict(inst)

    def test_json_duration_defaults_to_gamma(self):
        inst = instance_from_dict({"gamma": 0.2, "capacity": 1, "items": [{"value": 1}]})
        assert inst.durations[0] == 0.2
        assert inst.constraints is None

    def test_json_unknown_key(self):
        with pytest.raises(ValueError):
            instance_from_dict({"gamma": 0.2, "capacity": 1, "items": [], "foo": 1})


class TestArrivalRealization:
    def test_ties_broken_by_id(self):
        arr = ArrivalRealization([0.5, 0.2, 0.5, 0.2])
        assert arr.order.tolist() == [1, 3, 0, 2]

    def test_times_out_of_range(self):
        with pytest.raises(ValueError):
            ArrivalRealization([0.2, 1.2])


class TestPeakExcess:
    def test_touching_intervals(self):
        inst = _inst(B=1, gamma=0.25, n=2)
        assert peak_excess(inst, [0, 1], [0.25, 0.5]) <= 0

    def test_overlap_detected(self):
        inst = _inst(B=1, gamma=0.25, n=2)
        assert peak_excess(inst, [0, 1], [0.25, 0.4]) == 1
