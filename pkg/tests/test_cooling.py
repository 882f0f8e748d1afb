"""Recursive scheduler tests: structure, space, step bounds, execution."""

import numpy as np
import pytest

from algcool.analytic import CoolingPlan, truncation_count
from algcool.circuit import Marker, Register, Reset, validate_schedule
from algcool.cooling import (
    compile_cooling,
    expected_length_after_round,
    run_cooling,
)
from algcool.ensemble import sample_molecule


def reset_phases(schedule):
    return [g for g in schedule.gates() if isinstance(g, Reset)]


def highest_index(schedule):
    return max(max(g.positions()) for g in schedule.gates())


class TestCompileStructure:
    def test_depth_zero_is_single_reset(self):
        sched = compile_cooling(CoolingPlan(0.1, 6, 5, 0))
        assert sched.gates() == [Reset(0, 6)]

    def test_depth_one_interleaving(self):
        with pytest.warns(UserWarning):
            sched = compile_cooling(CoolingPlan(0.1, 4, 4, 1))
        resets = reset_phases(sched)
        assert resets == [Reset(0, 4), Reset(2, 4), Reset(4, 4), Reset(6, 4)]
        bcs_markers = [
            it for it in sched.items
            if isinstance(it, Marker) and it.text.startswith("bcs:")
        ]
        offsets = [
            int(dict(p.split("=") for p in m.text[4:].split())["nu"])
            for m in bcs_markers
        ]
        assert offsets == [0, 2, 4, 6]

    def test_reset_phase_count(self):
        for ell, jf in [(5, 1), (5, 2), (5, 3), (6, 2)]:
            plan = CoolingPlan(0.1, 4, ell, jf)
            assert len(reset_phases(compile_cooling(plan))) == ell**jf

    def test_space_exactness(self):
        for plan in [
            CoolingPlan(0.1, 4, 5, 2),
            CoolingPlan(0.1, 8, 6, 2),
            CoolingPlan(0.1, 20, 5, 3),
        ]:
            assert highest_index(compile_cooling(plan)) == plan.n_required - 1

    def test_structural_recursion_prefix(self):
        # the first inner block of level j is gate-for-gate level j-1
        outer = compile_cooling(CoolingPlan(0.1, 4, 5, 2)).gates()
        inner = compile_cooling(CoolingPlan(0.1, 4, 5, 1)).gates()
        assert outer[: len(inner)] == inner

    def test_register_size_check(self):
        with pytest.raises(ValueError):
            compile_cooling(CoolingPlan(0.1, 20, 5, 3), register_size=139)

    def test_schedule_validates(self):
        plan = CoolingPlan(0.1, 8, 5, 2)
        assert validate_schedule(compile_cooling(plan), plan.n_required) == []

    def test_step_bounds(self):
        for m, ell, jf in [(4, 5, 3), (8, 6, 2), (20, 5, 3)]:
            plan = CoolingPlan(0.1, m, ell, jf)
            assert compile_cooling(plan).step_total() <= plan.step_bound


class TestExpectedLength:
    def test_values(self):
        assert expected_length_after_round(0.0, 20, 4) == pytest.approx(20.0)
        assert expected_length_after_round(0.1, 50, 5) == pytest.approx(63.125)
        assert expected_length_after_round(1.0, 16, 2) == pytest.approx(16.0)

    def test_round_index_check(self):
        with pytest.raises(ValueError):
            expected_length_after_round(0.1, 20, 0)


class TestRunCooling:
    def test_pure_input_always_succeeds(self):
        plan = CoolingPlan(1.0, 4, 5, 2)
        reg = sample_molecule(plan.n_required, 1.0, seed=0, index=0,
                              reset_rows=compile_cooling(plan).reset_rows())
        run = run_cooling(reg, plan)
        assert bool(run.success[0])
        assert run.output_bits[:, 0].tolist() == [0, 0, 0, 0]
        assert len(run.truncation_log) == truncation_count(5, 2)

    def test_truncation_log_count_and_success_recompute(self):
        plan = CoolingPlan(0.1, 4, 5, 2)
        sched = compile_cooling(plan)
        rng = np.random.default_rng(3)
        bits = rng.random((plan.n_required, 64)) < 0.45
        reg = Register.from_comp_bits(bits, rng=rng, one_probability=0.45)
        run = run_cooling(reg, plan, sched)
        assert len(run.truncation_log) == truncation_count(5, 2)
        recomputed = np.ones(64, dtype=bool)
        for rec in run.truncation_log:
            recomputed &= rec.lengths >= rec.required
        assert (run.success == recomputed).all()
        assert run.steps_used == sched.step_total()
        assert run.steps_used <= plan.step_bound

    def test_round_log_counts(self):
        plan = CoolingPlan(0.1, 4, 5, 2)
        reg = sample_molecule(plan.n_required, 0.1, seed=1, index=0,
                              reset_rows=compile_cooling(plan).reset_rows())
        run = run_cooling(reg, plan)
        # ell rounds at the top level, ell per inner block
        assert len(run.round_log) == 5 + 25
        assert all(1 <= r.round_index <= 5 for r in run.round_log)

    def test_register_too_small(self):
        plan = CoolingPlan(0.1, 20, 5, 3)
        reg = Register.from_comp_bits(np.zeros((10, 1), dtype=bool))
        with pytest.raises(ValueError):
            run_cooling(reg, plan)

    def test_depth_zero_run(self):
        plan = CoolingPlan(0.5, 4, 5, 0)
        reg = sample_molecule(4, 0.5, seed=2, index=0, reset_rows=4)
        run = run_cooling(reg, plan)
        assert bool(run.success[0])
        assert run.truncation_log == []
