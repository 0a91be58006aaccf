"""Configurations, gate models, transitions, and enumeration."""

from __future__ import annotations

from functools import lru_cache

import pytest
from hypothesis import given
from hypothesis import strategies as hs

from chainforge.chains import (
    CZ,
    DPC,
    EMPTY,
    FUSION,
    GATES,
    HALT,
    KLM_CZ,
    Configuration,
    Fuse,
    GateModel,
    action_from_string,
    action_to_string,
    apply_failure,
    apply_success,
    canonicalize,
    count_configs,
    enumerate_configs,
    enumerate_strata,
    gate_from_name,
    legal_actions,
)
from chainforge.errors import ModelError

lengths_lists = hs.lists(hs.integers(min_value=1, max_value=9), max_size=8)
gate_models = hs.sampled_from(list(GATES.values()))


class TestConfiguration:
    def test_canonicalize_sorts_descending(self):
        assert canonicalize([1, 5, 2, 1, 1]).chain_lengths() == [5, 2, 1, 1, 1]

    def test_canonicalize_drops_zeros(self):
        assert canonicalize([3, 0, 1, 0]) == canonicalize([3, 1])

    def test_canonicalize_rejects_negative_lengths(self):
        with pytest.raises(ModelError):
            canonicalize([2, -1])

    @given(lengths_lists)
    def test_canonicalize_is_idempotent(self, lengths):
        once = canonicalize(lengths)
        assert canonicalize(once.chain_lengths()) == once

    @given(lengths_lists)
    def test_canonicalize_ignores_input_order(self, lengths):
        assert canonicalize(lengths) == canonicalize(sorted(lengths))

    def test_counting_accessors(self):
        c = canonicalize([2, 1, 1])
        assert c.num_chains == 3
        assert c.total_edges == 4
        assert c.total_vertices == 7
        assert c.longest == 2
        assert c.count_of(1) == 2
        assert c.count_of(9) == 0

    def test_terminal_means_at_most_one_chain(self):
        assert canonicalize([7]).is_terminal
        assert EMPTY.is_terminal
        assert not canonicalize([1, 1]).is_terminal

    def test_empty_configuration(self):
        assert EMPTY.longest == 0
        assert EMPTY.total_vertices == 0
        assert str(EMPTY) == ""

    def test_string_form_groups_multiplicities(self):
        assert str(canonicalize([5, 2, 2, 1, 1, 1])) == "5^1 2^2 1^3"

    @given(lengths_lists)
    def test_string_form_round_trips(self, lengths):
        c = canonicalize(lengths)
        assert Configuration.parse(str(c)) == c

    def test_parse_rejects_garbage(self):
        for bad in ("5^", "^2", "abc", "5^2 junk"):
            with pytest.raises(ModelError):
                Configuration.parse(bad)


class TestGateModel:
    def test_presets(self):
        assert (FUSION.success_gain, FUSION.failure_loss) == (0, 1)
        assert (KLM_CZ.success_gain, KLM_CZ.failure_loss) == (1, 1)
        assert (DPC.success_gain, DPC.failure_loss) == (0, 2)
        assert (CZ.success_gain, CZ.failure_loss) == (1, 2)

    def test_lookup_by_name_is_forgiving(self):
        assert gate_from_name("FUSION") is FUSION
        assert gate_from_name("klm_cz") is KLM_CZ

    def test_unknown_name_rejected(self):
        with pytest.raises(ModelError):
            gate_from_name("teleport")

    def test_negative_effects_rejected(self):
        with pytest.raises(ModelError):
            GateModel("bad", success_gain=-1, failure_loss=1)


class TestActions:
    def test_fuse_normalizes_operand_order(self):
        assert Fuse(5, 2) == Fuse(2, 5)
        assert Fuse(5, 2).i == 2

    def test_string_round_trip(self):
        for action in (Fuse(1, 3), HALT):
            assert action_from_string(action_to_string(action)) == action
        assert action_to_string(Fuse(1, 2)) == "fuse 1 2"
        assert action_to_string(HALT) == "halt"

    def test_action_parse_rejects_garbage(self):
        for bad in ("fuse 1", "fuse a b", "stop", ""):
            with pytest.raises(ModelError):
                action_from_string(bad)


class TestTransitions:
    def test_success_merges_and_gains(self):
        assert apply_success(canonicalize([2, 1]), Fuse(1, 2), KLM_CZ) == canonicalize([4])
        assert apply_success(canonicalize([1, 1, 1]), Fuse(1, 1), FUSION) == canonicalize([2, 1])

    def test_failure_trims_both_operands(self):
        assert apply_failure(canonicalize([3, 2]), Fuse(2, 3), FUSION) == canonicalize([2, 1])

    def test_failure_discards_chains_ground_to_nothing(self):
        assert apply_failure(canonicalize([1, 1]), Fuse(1, 1), FUSION) == EMPTY
        assert apply_failure(canonicalize([2, 1]), Fuse(1, 2), DPC) == EMPTY

    def test_missing_operand_is_an_error(self):
        with pytest.raises(ModelError):
            apply_success(canonicalize([2, 1]), Fuse(1, 1), FUSION)

    @given(lengths_lists, gate_models)
    def test_success_bookkeeping(self, lengths, gate):
        config = canonicalize(lengths)
        for action in legal_actions(config):
            after = apply_success(config, action, gate)
            assert after.total_edges == config.total_edges + gate.success_gain
            assert after.num_chains == config.num_chains - 1

    @given(lengths_lists, gate_models)
    def test_failure_bookkeeping(self, lengths, gate):
        config = canonicalize(lengths)
        for action in legal_actions(config):
            after = apply_failure(config, action, gate)
            loss = min(action.i, gate.failure_loss) + min(action.j, gate.failure_loss)
            destroyed = (action.i <= gate.failure_loss) + (action.j <= gate.failure_loss)
            assert after.total_edges == config.total_edges - loss
            assert after.num_chains == config.num_chains - destroyed


class TestLegalActions:
    def test_pairs_listed_in_ascending_order(self):
        actions = legal_actions(canonicalize([5, 2, 1, 1]))
        assert actions == [Fuse(1, 1), Fuse(1, 2), Fuse(1, 5), Fuse(2, 5)]

    def test_equal_pair_needs_multiplicity_two(self):
        assert Fuse(2, 2) not in legal_actions(canonicalize([2, 1]))
        assert Fuse(2, 2) in legal_actions(canonicalize([2, 2]))

    def test_halt_comes_last_when_allowed(self):
        actions = legal_actions(canonicalize([1, 1]), allow_halt=True)
        assert actions[-1] == HALT
        assert HALT not in legal_actions(canonicalize([1, 1]))

    def test_terminal_configurations_offer_nothing(self):
        assert legal_actions(canonicalize([4])) == []
        assert legal_actions(EMPTY, allow_halt=True) == []


@lru_cache(maxsize=None)
def _partitions_with_min_part_two(total: int, largest: int) -> int:
    if total == 0:
        return 1
    return sum(
        _partitions_with_min_part_two(total - part, part)
        for part in range(2, min(total, largest) + 1)
    )


class TestEnumeration:
    def test_small_census(self):
        assert [str(c) for c in enumerate_configs(4)] == ["1^1", "2^1", "3^1", "1^2"]

    def test_strata_ordered_by_vertices_then_chains(self):
        keys = [key for key, _ in enumerate_strata(8)]
        assert keys == sorted(keys)
        for (vertices, chains), configs in enumerate_strata(8):
            for c in configs:
                assert (c.total_vertices, c.num_chains) == (vertices, chains)

    def test_count_agrees_with_enumeration(self):
        for v_max in (2, 5, 9, 14):
            assert count_configs(v_max) == sum(1 for _ in enumerate_configs(v_max))

    def test_count_agrees_with_partition_arithmetic(self):
        for v_max in range(2, 31):
            expected = sum(
                _partitions_with_min_part_two(v, v) for v in range(2, v_max + 1)
            )
            assert count_configs(v_max) == expected

    def test_enumeration_has_no_duplicates(self):
        configs = list(enumerate_configs(12))
        assert len(configs) == len(set(configs))
