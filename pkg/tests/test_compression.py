"""Compression-round tests: compiler output, execution, oracle agreement."""

from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from algcool.circuit import (
    PROV_DIRTY,
    PROV_SUPERVISOR,
    Cnot,
    Register,
    StepCounter,
    validate_schedule,
)
from algcool.compression import compile_bcs, reference_bcs, run_bcs


def register_for(bits_by_molecule):
    """Batched register from a list of per-molecule bit lists."""
    arr = np.array(bits_by_molecule, dtype=bool).T
    return Register.from_comp_bits(arr)


class TestCompileBcs:
    def test_single_pair_is_one_cnot(self):
        sched = compile_bcs(2)
        assert sched.gates() == [Cnot(0, 1)]

    def test_validates_and_meets_step_bound(self):
        for m in (8, 20):
            sched = compile_bcs(m)
            assert validate_schedule(sched, m) == []
            assert sched.step_total() < m * m

    def test_offset_region_validates(self):
        sched = compile_bcs(10, nu=15, nu0=5)
        assert validate_schedule(sched, 25) == []

    def test_bad_geometry(self):
        with pytest.raises(ValueError):
            compile_bcs(7)
        with pytest.raises(ValueError):
            compile_bcs(4, nu=2, nu0=5)

    @given(st.integers(min_value=1, max_value=64))
    @settings(deadline=None, max_examples=30)
    def test_step_bound_property(self, half_m):
        m = 2 * half_m
        assert compile_bcs(m).step_total() < m * m


class TestRunBcs:
    def test_equal_zero_pair(self):
        reg = register_for([[0, 0]])
        out = run_bcs(reg, compile_bcs(2))
        assert out.purified_count == 1
        assert reg.prov[0, 0] == 1
        assert reg.prov[1, 0] == PROV_SUPERVISOR
        assert reg.molecule_bits() == [0, 0]

    def test_unequal_pair_not_purified(self):
        reg = register_for([[1, 0]])
        out = run_bcs(reg, compile_bcs(2))
        assert out.purified_count == 0
        assert reg.prov[0, 0] == PROV_DIRTY
        assert reg.molecule_bits()[1] == 1  # supervisor holds the parity

    def test_all_zero_register(self):
        reg = register_for([[0] * 8])
        out = run_bcs(reg, compile_bcs(8))
        assert out.purified_count == 4
        assert out.purified_start == 0
        assert out.supervisor_region == (4, 8)

    def test_geometry_mismatch(self):
        reg = register_for([[0, 0]])
        with pytest.raises(ValueError):
            run_bcs(reg, compile_bcs(4))

    def test_contiguity_no_junk_left_of_purified(self):
        rng = np.random.default_rng(5)
        reg = Register.from_comp_bits(rng.random((10, 500)) < 0.4)
        out = run_bcs(reg, compile_bcs(10))
        counts = out.purified_count
        prov = reg.prov
        for i in range(500):
            run = prov[: counts[i], i]
            assert (run == 1).all()


class TestReferenceBcs:
    def test_documented_examples(self):
        assert reference_bcs([0, 0, 1, 0]) == ([0], [1], [0, 1])
        assert reference_bcs([]) == ([], [], [])
        assert reference_bcs([1, 1]) == ([1], [], [0])

    def test_odd_length(self):
        with pytest.raises(ValueError):
            reference_bcs([0, 1, 0])


def compiled_outputs(m, inputs):
    """Run the compiled schedule on a batch of inputs; return bits and counts."""
    reg = register_for(inputs)
    out = run_bcs(reg, compile_bcs(m))
    counts = np.atleast_1d(out.purified_count)
    return reg.comp_bit_rows(0, m).T.tolist(), counts, reg.prov


def assert_oracle_agreement(m, inputs):
    bits, counts, prov = compiled_outputs(m, inputs)
    for i, molecule in enumerate(inputs):
        purified, dirty, supervisors = reference_bcs(list(molecule))
        row = bits[i]
        assert counts[i] == len(purified)
        # purified prefix: same values, same left-to-right order
        assert row[: len(purified)] == purified
        # supervisors park right-to-left in pair order
        assert row[m - 1 : m // 2 - 1 : -1] == supervisors
        # the middle region holds exactly the dirty bits
        assert sorted(row[len(purified) : m // 2]) == sorted(dirty)


class TestOracleEquivalence:
    @pytest.mark.parametrize("m", [2, 4, 6, 8])
    def test_exhaustive_small(self, m):
        assert_oracle_agreement(m, list(product([0, 1], repeat=m)))

    def test_random_wide(self):
        rng = np.random.default_rng(9)
        inputs = (rng.random((300, 14)) < 0.5).astype(int).tolist()
        assert_oracle_agreement(14, inputs)


class TestExactPairLaw:
    @pytest.mark.parametrize(
        "eps", [Fraction(0), Fraction(1, 10), Fraction(1, 2), Fraction(1)]
    )
    def test_kept_bias_and_keep_probability(self, eps):
        p0 = (1 + eps) / 2  # P(bit = 0)
        keep_prob = Fraction(0)
        kept_zero = Fraction(0)
        for a, b in product((0, 1), repeat=2):
            w = (p0 if a == 0 else 1 - p0) * (p0 if b == 0 else 1 - p0)
            purified, _, _ = reference_bcs([a, b])
            if purified:
                keep_prob += w
                if purified[0] == 0:
                    kept_zero += w
        assert keep_prob == (1 + eps * eps) / 2
        if keep_prob > 0:
            cond_bias = 2 * (kept_zero / keep_prob) - 1
            assert cond_bias == 2 * eps / (1 + eps * eps)


class TestSteps:
    def test_steps_used_matches_schedule(self):
        reg = register_for([[0] * 12])
        sched = compile_bcs(12)
        counter = StepCounter()
        out = run_bcs(reg, sched, counter)
        assert out.steps_used == sched.step_total()

    def test_double_cost_controlled_swap_still_within_bound(self):
        # the bound survives even if a conditional swap costs two steps
        costs = {"CNOT": 1, "SWAP": 1, "ZCSWAP": 2, "RESET": 1}
        for m in (8, 20, 50):
            assert compile_bcs(m).step_total(costs) < 2 * m * m
