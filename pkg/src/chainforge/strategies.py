"""Fixed assembly strategies and the final-length distributions they induce.

A strategy is a deterministic rule for choosing which two chains to
fuse next (or to halt, where that is allowed). Beyond the action choice
a strategy may carry private bookkeeping, so the runner protocol works
on opaque states: `initial_state` wraps a configuration, `advance`
consumes one attempt outcome, `finished`/`final_length` read off the
end of a run. For most strategies the state simply is the current
configuration.

Three runners consume the protocol: `exact_distribution` (exact pmf by
memoized expansion), `simulate` (seeded Monte Carlo), and
`symbolic_quality` over in `quality` (polynomial in p).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .chains import (
    Action,
    Configuration,
    Fuse,
    GateModel,
    Halt,
    apply_failure,
    apply_success,
    canonicalize,
)
from .errors import GuardExceeded, ModelError
from .exact import as_probability, format_rational
from .quality import QualityTable

DEFAULT_MAX_EXACT_VERTICES = 30


class Strategy:
    """Deterministic action rule; subclasses override `decide`."""

    name = "strategy"

    def initial_state(self, config: Configuration):
        return config

    def config_at(self, state) -> Configuration:
        return state

    def finished(self, state) -> bool:
        return self.config_at(state).is_terminal

    def final_length(self, state) -> int:
        return self.config_at(state).longest

    def decide(self, state) -> Action:
        raise NotImplementedError

    def advance(self, state, action: Fuse, success: bool, gate: GateModel):
        if success:
            return apply_success(state, action, gate)
        return apply_failure(state, action, gate)

    def _require_pair(self, config: Configuration):
        if config.is_terminal:
            raise ModelError(f"'{config}' holds fewer than two chains; nothing to fuse")


class Modesty(Strategy):
    """Always fuse the two shortest chains."""

    name = "modesty"

    def decide(self, state) -> Action:
        self._require_pair(state)
        lengths = state.chain_lengths()
        return Fuse(lengths[-1], lengths[-2])


class Greed(Strategy):
    """Always fuse the two longest chains."""

    name = "greed"

    def decide(self, state) -> Action:
        self._require_pair(state)
        lengths = state.chain_lengths()
        return Fuse(lengths[0], lengths[1])


class Static(Strategy):
    """Fuse a fixed pairing lineup in rounds, obliviously to outcomes.

    The initial lineup is the chains in descending length order. Each
    round attempts adjacent pairs (1st with 2nd, 3rd with 4th, ...);
    outputs of those attempts queue up for the next round in the order
    they were produced, and an odd chain left over sits the round out
    and rejoins at the back of the next lineup. The rule never inspects
    lengths after the initial sort, which is what makes it a useful
    baseline for outcome-adaptive strategies.

    State is the pair (pending, upcoming): chains still to act this
    round and the next round's queue.
    """

    name = "static"

    def initial_state(self, config: Configuration):
        return self._normalize(tuple(config.chain_lengths()), ())

    @staticmethod
    def _normalize(pending: tuple[int, ...], upcoming: tuple[int, ...]):
        while True:
            if len(pending) >= 2:
                return pending, upcoming
            nxt = upcoming + pending  # leftover idles to the back of the lineup
            if len(nxt) == len(pending):
                return nxt, ()  # nothing new was queued: the run is over
            pending, upcoming = nxt, ()

    def config_at(self, state) -> Configuration:
        pending, upcoming = state
        return canonicalize(pending + upcoming)

    def finished(self, state) -> bool:
        pending, upcoming = state
        return len(pending) + len(upcoming) <= 1

    def final_length(self, state) -> int:
        pending, upcoming = state
        remaining = pending + upcoming
        return remaining[0] if remaining else 0

    def decide(self, state) -> Action:
        pending, _ = state
        if len(pending) < 2:
            raise ModelError("static lineup exhausted; nothing to fuse")
        return Fuse(pending[0], pending[1])

    def advance(self, state, action: Fuse, success: bool, gate: GateModel):
        pending, upcoming = state
        a, b = pending[0], pending[1]
        if success:
            produced: tuple[int, ...] = (a + b + gate.success_gain,)
        else:
            produced = tuple(x - gate.failure_loss for x in (a, b) if x > gate.failure_loss)
        return self._normalize(pending[2:], upcoming + produced)


class TablePolicy(Strategy):
    """Play the action a quality table prescribes in every configuration."""

    def __init__(self, table: QualityTable):
        self.table = table
        self.name = f"policy-{table.spec.mode}"

    def decide(self, state) -> Action:
        self._require_pair(state)
        return self.table.action(state)


STRATEGIES: dict[str, Strategy] = {
    s.name: s for s in (Modesty(), Greed(), Static())
}


def strategy_from_name(name: str) -> Strategy:
    key = name.strip().lower()
    if key not in STRATEGIES:
        known = ", ".join(sorted(STRATEGIES))
        raise ModelError(f"unknown strategy {name!r} (known strategies: {known})")
    return STRATEGIES[key]


def strategy_decide(strategy: Strategy, config: Configuration) -> Action:
    """The first action `strategy` takes from `config`."""
    if config.is_terminal:
        raise ModelError(f"'{config}' holds fewer than two chains; nothing to decide")
    return strategy.decide(strategy.initial_state(config))


@dataclass(frozen=True)
class DistSummary:
    """Final-length distribution with its first two moments.

    Exact summaries carry Fraction probabilities and moments; Monte
    Carlo summaries carry floats plus the sample count and seed.
    rel_std is None when the mean is zero.
    """

    pmf: tuple[tuple[int, Fraction | float], ...]
    mean: Fraction | float
    variance: Fraction | float
    std: float
    rel_std: float | None
    samples: int | None = None
    seed: int | None = None

    @property
    def is_exact(self) -> bool:
        return self.samples is None

    def to_json_dict(self) -> dict:
        def num(x):
            return format_rational(x) if isinstance(x, Fraction) else x

        doc = {
            "pmf": [[length, num(prob)] for length, prob in self.pmf],
            "mean": num(self.mean),
            "variance": num(self.variance),
            "std": self.std,
            "rel_std": self.rel_std,
        }
        if self.samples is not None:
            doc["samples"] = self.samples
            doc["seed"] = self.seed
        return doc


def _summary_from_pmf(pmf: dict[int, Fraction]) -> DistSummary:
    mean = Fraction(0)
    second = Fraction(0)
    for length, prob in pmf.items():
        mean += length * prob
        second += length * length * prob
    variance = second - mean * mean
    std = math.sqrt(variance)
    rel_std = std / float(mean) if mean != 0 else None
    ordered = tuple(sorted(pmf.items()))
    return DistSummary(pmf=ordered, mean=mean, variance=variance, std=std, rel_std=rel_std)


def _check_gate_terminates(gate: GateModel):
    if gate.failure_loss < 1:
        raise ModelError(
            f"gate {gate.name!r} loses no edges on failure, so runs need not terminate"
        )


def exact_distribution(
    config: Configuration,
    gate: GateModel,
    p: Fraction | int | str,
    strategy: Strategy,
    allow_halt: bool = False,
    *,
    max_vertices: int = DEFAULT_MAX_EXACT_VERTICES,
) -> DistSummary:
    """Exact pmf of the final chain length under a fixed strategy.

    Expands the run tree with memoization on strategy states, so the
    cost is polynomial for configuration-state strategies but the pmf
    itself is exact. Guarded by a vertex budget because state counts
    grow quickly; raise `max_vertices` deliberately when needed.
    """
    p = as_probability(p)
    _check_gate_terminates(gate)
    if config.total_vertices > max_vertices:
        raise GuardExceeded(
            f"exact distribution is limited to {max_vertices} vertices, "
            f"'{config}' has {config.total_vertices}; raise max_vertices to override"
        )
    q = 1 - p
    memo: dict = {}

    def expand(state) -> dict[int, Fraction]:
        cached = memo.get(state)
        if cached is not None:
            return cached
        if strategy.finished(state):
            result = {strategy.final_length(state): Fraction(1)}
        else:
            action = strategy.decide(state)
            if isinstance(action, Halt):
                if not allow_halt:
                    raise ModelError(
                        f"strategy {strategy.name!r} halted but halting is not allowed here"
                    )
                result = {strategy.config_at(state).longest: Fraction(1)}
            else:
                succ = expand(strategy.advance(state, action, True, gate))
                fail = expand(strategy.advance(state, action, False, gate))
                result = {}
                for length, prob in succ.items():
                    result[length] = result.get(length, Fraction(0)) + p * prob
                for length, prob in fail.items():
                    result[length] = result.get(length, Fraction(0)) + q * prob
                result = {l: pr for l, pr in result.items() if pr != 0}
        memo[state] = result
        return result

    return _summary_from_pmf(expand(strategy.initial_state(config)))


def _attempt_budget(config: Configuration, gate: GateModel) -> int:
    """Upper bound on gate attempts in one run, for pre-drawing randomness.

    Each success removes one chain and adds at most success_gain - 1
    vertices; each failure removes at least two vertices. Both counts
    are therefore bounded by the initial inventory.
    """
    chains = config.num_chains
    vertices = config.total_vertices
    successes = max(chains - 1, 0)
    growth = successes * max(gate.success_gain - 1, 0)
    failures = (vertices + growth) // 2
    return max(successes + failures, 1)


def simulate(
    config: Configuration,
    gate: GateModel,
    p: Fraction | int | str,
    strategy: Strategy,
    allow_halt: bool = False,
    *,
    samples: int,
    seed: int = 0,
) -> DistSummary:
    """Monte Carlo estimate of the final-length distribution.

    Reproducible by construction: sample k draws from its own generator
    seeded with SeedSequence(seed, spawn_key=(k,)), so results do not
    depend on sample order and never collide across seeds. Success
    draws use integer thresholding (uniform integer below p's numerator
    out of its denominator), so the per-attempt success probability is
    exactly p, not a float approximation.
    """
    p = as_probability(p)
    _check_gate_terminates(gate)
    if samples < 1:
        raise ModelError(f"samples must be at least 1, got {samples}")
    if seed < 0:
        raise ModelError(f"seed must be non-negative, got {seed}")
    num, den = p.numerator, p.denominator
    if den > 2**62:
        raise ModelError(
            f"probability denominator {den} is too large for exact integer sampling"
        )
    budget = _attempt_budget(config, gate)
    counts: dict[int, int] = {}
    start = strategy.initial_state(config)
    for index in range(samples):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))
        draws = rng.integers(0, den, size=budget)
        cursor = 0
        state = start
        while not strategy.finished(state):
            action = strategy.decide(state)
            if isinstance(action, Halt):
                if not allow_halt:
                    raise ModelError(
                        f"strategy {strategy.name!r} halted but halting is not allowed here"
                    )
                break
            if cursor >= len(draws):  # unreachable for sane gates; keeps the stream seeded
                draws = rng.integers(0, den, size=budget)
                cursor = 0
            success = draws[cursor] < num
            cursor += 1
            state = strategy.advance(state, action, bool(success), gate)
        # covers both run ends: exhausted (one chain or none) and halted
        length = strategy.config_at(state).longest
        counts[length] = counts.get(length, 0) + 1

    mean = sum(l * c for l, c in counts.items()) / samples
    second = sum(l * l * c for l, c in counts.items()) / samples
    variance = max(second - mean * mean, 0.0)
    std = math.sqrt(variance)
    rel_std = std / mean if mean != 0 else None
    pmf = tuple(sorted((l, c / samples) for l, c in counts.items()))
    return DistSummary(
        pmf=pmf,
        mean=mean,
        variance=variance,
        std=std,
        rel_std=rel_std,
        samples=samples,
        seed=seed,
    )
