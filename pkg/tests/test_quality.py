"""Value tables: recursion correctness, serialization, guards, symbolic series."""

from __future__ import annotations

import json
from fractions import Fraction

import pytest

from chainforge.chains import (
    CZ,
    DPC,
    EMPTY,
    FUSION,
    KLM_CZ,
    Fuse,
    GateModel,
    canonicalize,
    enumerate_configs,
)
from chainforge.errors import GuardExceeded, ModelError, UnknownConfiguration
from chainforge.exact import Poly
from chainforge.quality import (
    RunSpec,
    build_quality_table,
    brute_force_value,
    policy_action,
    quality,
    resolve_table_guard,
    symbolic_quality,
)
from chainforge.strategies import Greed, Modesty, Static, exact_distribution

HALF = Fraction(1, 2)


def _spec(gate=FUSION, p=HALF, mode="best", allow_halt=False):
    return RunSpec(gate=gate, p=p, mode=mode, allow_halt=allow_halt)


class TestRunSpec:
    def test_probability_must_be_exact(self):
        with pytest.raises(ModelError):
            RunSpec(gate=FUSION, p=0.5)  # type: ignore[arg-type]

    def test_probability_range(self):
        with pytest.raises(ModelError):
            RunSpec(gate=FUSION, p=Fraction(5, 4))

    def test_mode_names(self):
        with pytest.raises(ModelError):
            RunSpec(gate=FUSION, p=HALF, mode="median")

    def test_worst_mode_never_halts(self):
        with pytest.raises(ModelError):
            RunSpec(gate=FUSION, p=HALF, mode="worst", allow_halt=True)

    def test_gate_must_lose_on_failure(self):
        lossless = GateModel("lossless", success_gain=0, failure_loss=0)
        with pytest.raises(ModelError):
            RunSpec(gate=lossless, p=HALF)

    def test_better_is_mode_aware(self):
        best, worst = _spec(mode="best"), _spec(mode="worst")
        assert best.better(Fraction(2), Fraction(1))
        assert not best.better(Fraction(1), Fraction(1))
        assert worst.better(Fraction(1), Fraction(2))


class TestBuildGuards:
    def test_pair_count_must_be_positive(self):
        with pytest.raises(ModelError):
            build_quality_table(0, _spec())

    def test_runaway_gain_rejected(self):
        grower = GateModel("grower", success_gain=2, failure_loss=1)
        with pytest.raises(ModelError):
            build_quality_table(2, RunSpec(gate=grower, p=HALF))

    def test_entry_guard_parameter(self):
        with pytest.raises(GuardExceeded, match="entries"):
            build_quality_table(12, _spec(), max_entries=10)

    def test_entry_guard_env_var(self, monkeypatch):
        monkeypatch.setenv("CHAINFORGE_MAX_TABLE_ENTRIES", "10")
        with pytest.raises(GuardExceeded):
            build_quality_table(12, _spec())

    def test_parameter_overrides_env_var(self, monkeypatch):
        monkeypatch.setenv("CHAINFORGE_MAX_TABLE_ENTRIES", "10")
        table = build_quality_table(3, _spec(), max_entries=100)
        assert quality(canonicalize([1, 1, 1]), table) == Fraction(3, 2)

    def test_guard_resolution_order(self, monkeypatch):
        assert resolve_table_guard() == 1_000_000
        assert resolve_table_guard(5) == 5
        monkeypatch.setenv("CHAINFORGE_MAX_TABLE_ENTRIES", "123")
        assert resolve_table_guard() == 123
        assert resolve_table_guard(7) == 7


class TestTableValues:
    def test_three_pairs_fusion(self, fusion_best_half):
        assert quality(canonicalize([1, 1, 1]), fusion_best_half) == Fraction(3, 2)

    def test_pair_plus_double(self, fusion_best_half):
        assert quality(canonicalize([2, 1]), fusion_best_half) == Fraction(2)

    def test_terminal_value_is_longest(self, fusion_best_half):
        assert quality(canonicalize([5]), fusion_best_half) == Fraction(5)
        assert quality(EMPTY, fusion_best_half) == Fraction(0)

    def test_two_pairs_by_gate(self):
        pairs = canonicalize([1, 1])
        expected = {FUSION: 1, KLM_CZ: Fraction(3, 2), CZ: Fraction(3, 2), DPC: 1}
        for gate, value in expected.items():
            table = build_quality_table(2, RunSpec(gate=gate, p=HALF))
            assert quality(pairs, table) == value

    def test_certain_success_consumes_everything(self):
        for n in (2, 3, 5):
            table = build_quality_table(n, RunSpec(gate=FUSION, p=Fraction(1)))
            assert quality(canonicalize([1] * n), table) == n
            table = build_quality_table(n, RunSpec(gate=KLM_CZ, p=Fraction(1)))
            assert quality(canonicalize([1] * n), table) == 2 * n - 1

    def test_certain_failure_leaves_parity(self):
        for n in (2, 3, 4, 5):
            table = build_quality_table(n, RunSpec(gate=FUSION, p=Fraction(0)))
            assert quality(canonicalize([1] * n), table) == n % 2

    def test_unknown_configuration_raises(self, fusion_best_half):
        with pytest.raises(UnknownConfiguration):
            quality(canonicalize([9, 9]), fusion_best_half)


class TestPolicy:
    def test_first_action_wins_ties(self, fusion_best_half):
        assert policy_action(canonicalize([1, 1]), fusion_best_half) == Fuse(1, 1)

    def test_terminal_has_no_action(self, fusion_best_half):
        with pytest.raises(ModelError, match="terminal"):
            policy_action(canonicalize([5]), fusion_best_half)

    def test_policy_actions_are_recorded_for_every_interior_config(
        self, fusion_best_half
    ):
        for config in fusion_best_half.configurations():
            if config.is_terminal:
                continue
            action = policy_action(config, fusion_best_half)
            assert isinstance(action, Fuse)


class TestAgainstBruteForce:
    @pytest.mark.parametrize("gate", [FUSION, KLM_CZ, DPC, CZ])
    @pytest.mark.parametrize("mode", ["best", "worst"])
    def test_small_configs_match_game_tree(self, gate, mode):
        spec = RunSpec(gate=gate, p=Fraction(1, 3), mode=mode)
        table = build_quality_table(4, spec)
        for config in enumerate_configs(8):
            assert quality(config, table) == brute_force_value(config, spec)

    def test_brute_force_guard(self):
        with pytest.raises(GuardExceeded):
            brute_force_value(canonicalize([1] * 8), _spec())

    def test_brute_force_guard_override(self):
        value = brute_force_value(canonicalize([1] * 8), _spec(), max_vertices=16)
        table = build_quality_table(8, _spec())
        assert value == quality(canonicalize([1] * 8), table)


class TestModeOrdering:
    def test_heuristics_sit_between_worst_and_best(self):
        p = Fraction(1, 3)
        best = build_quality_table(4, _spec(p=p, mode="best"))
        worst = build_quality_table(4, _spec(p=p, mode="worst"))
        for config in enumerate_configs(8):
            lo, hi = quality(config, worst), quality(config, best)
            assert lo <= hi
            for strategy in (Modesty(), Greed(), Static()):
                mean = exact_distribution(config, FUSION, p, strategy).mean
                assert lo <= mean <= hi


class TestHalting:
    def test_halting_value_dominates_longest_chain(self):
        table = build_quality_table(4, _spec(p=Fraction(1, 4), allow_halt=True))
        for config in table.configurations():
            assert quality(config, table) >= config.longest

    def test_halting_never_helps_at_even_odds(self):
        for n in range(2, 9):
            plain = build_quality_table(n, _spec())
            halting = build_quality_table(n, _spec(allow_halt=True))
            start = canonicalize([1] * n)
            assert quality(start, plain) == quality(start, halting)

    def test_halting_value_is_monotone_in_pair_count(self):
        values = []
        for n in range(2, 9):
            table = build_quality_table(n, _spec(allow_halt=True))
            values.append(quality(canonicalize([1] * n), table))
        assert all(a <= b for a, b in zip(values, values[1:]))


class TestWorstEqualsGreedyLongest:
    """The worst policy and the longest-pair heuristic coincide for fusion.

    Not an axiom: the equality is asserted so any future change that breaks
    it is caught rather than silently absorbed.
    """

    @pytest.mark.parametrize("p", [Fraction(1, 4), HALF, Fraction(3, 4)])
    def test_worst_value_equals_greedy_mean(self, p):
        worst = build_quality_table(4, _spec(p=p, mode="worst"))
        for config in enumerate_configs(8):
            mean = exact_distribution(config, FUSION, p, Greed()).mean
            assert quality(config, worst) == mean


class TestSerialization:
    def test_rebuilds_are_bit_identical(self):
        a = build_quality_table(4, _spec()).to_json()
        b = build_quality_table(4, _spec()).to_json()
        assert a == b

    def test_json_round_trip_preserves_everything(self, fusion_best_half):
        doc = fusion_best_half.to_json_dict()
        clone = type(fusion_best_half).from_json_dict(doc)
        assert clone.spec == fusion_best_half.spec
        assert clone.n_pairs == fusion_best_half.n_pairs
        for config in fusion_best_half.configurations():
            assert quality(config, clone) == quality(config, fusion_best_half)
            if not config.is_terminal:
                assert policy_action(config, clone) == policy_action(
                    config, fusion_best_half
                )

    def test_json_document_shape(self, fusion_best_half):
        doc = json.loads(fusion_best_half.to_json())
        assert doc["format"] == "chainforge-quality-table"
        assert doc["version"] == 1
        assert doc["p"] == "1/2"
        assert all("config" in e and "value" in e for e in doc["entries"])

    def test_tampered_document_rejected(self, fusion_best_half):
        doc = fusion_best_half.to_json_dict()
        doc["format"] = "something-else"
        with pytest.raises(ModelError):
            type(fusion_best_half).from_json_dict(doc)

    def test_probabilities_serialized_as_rational_text(self, fusion_best_half):
        raw = fusion_best_half.to_json()
        assert '"p":"1/2"' in raw
        assert '"value":"3/2"' in raw


class TestReachableOnly:
    def test_reachable_subset_preserves_values(self):
        spec = _spec(p=Fraction(1, 4))
        full = build_quality_table(4, spec)
        trimmed = build_quality_table(4, spec, reachable_only=True)
        reachable = set(trimmed.configurations())
        assert canonicalize([1, 1, 1, 1]) in reachable
        assert len(reachable) <= sum(1 for _ in full.configurations())
        for config in reachable:
            assert quality(config, trimmed) == quality(config, full)


class TestSymbolicSeries:
    def test_two_pairs_is_linear(self):
        poly = symbolic_quality(canonicalize([1, 1]), FUSION, Modesty())
        assert poly == Poly((0, 2))

    def test_three_pairs_recovers_quadratic(self):
        poly = symbolic_quality(canonicalize([1, 1, 1]), FUSION, Modesty())
        assert poly == Poly((1, 0, 2))

    def test_four_pairs_quartic(self):
        poly = symbolic_quality(canonicalize([1] * 4), FUSION, Modesty())
        assert poly == Poly((0, 4, -4, 6, -2))

    def test_gate_presets_on_a_single_pair(self):
        pair = canonicalize([1, 1])
        assert symbolic_quality(pair, FUSION, Modesty()) == Poly((0, 2))
        assert symbolic_quality(pair, KLM_CZ, Modesty()) == Poly((0, 3))
        assert symbolic_quality(pair, CZ, Modesty()) == Poly((0, 3))
        assert symbolic_quality(pair, DPC, Modesty()) == Poly((0, 2))

    @pytest.mark.parametrize("strategy_cls", [Modesty, Greed, Static])
    def test_series_evaluation_matches_distribution_mean(self, strategy_cls):
        config = canonicalize([2, 1, 1, 1])
        poly = symbolic_quality(config, FUSION, strategy_cls())
        for p in (Fraction(1, 7), Fraction(2, 5), Fraction(9, 10)):
            mean = exact_distribution(config, FUSION, p, strategy_cls()).mean
            assert poly.eval_at(p) == mean
