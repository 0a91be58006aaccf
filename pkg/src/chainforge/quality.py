"""Exact expected final chain length under optimal or adversarial control.

The central object is the quality table: for every configuration up to
a vertex budget it stores the exact expected length of the single chain
left at the end, assuming every future fuse attempt is chosen to
maximize (mode "best") or minimize (mode "worst") that expectation, and
the action achieving it.

Values satisfy the one-step recursion

    V(c) = opt over actions a of  p * V(succ(c, a)) + (1 - p) * V(fail(c, a))

with V equal to the longest chain once fewer than two chains remain,
and, when halting is allowed, the longest current chain as an extra
candidate on the right-hand side. The table is filled bottom-up over
strata ordered by (total vertices, chain count): failures always shed
at least two vertices and successes shed a chain without adding
vertices beyond the stratum already built, so every lookup hits an
entry that exists. That ordering argument needs failure_loss >= 1 and
success_gain <= 1; the builder refuses anything else.

All arithmetic is over `fractions.Fraction`: results are exact, never
estimates.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, TYPE_CHECKING

from .chains import (
    Action,
    Configuration,
    EMPTY,
    Fuse,
    GateModel,
    Halt,
    action_from_string,
    action_to_string,
    apply_failure,
    apply_success,
    canonicalize,
    count_configs,
    enumerate_strata,
    legal_actions,
)
from .errors import GuardExceeded, ModelError, UnknownConfiguration
from .exact import Poly, as_probability, format_rational, parse_rational

if TYPE_CHECKING:
    from .strategies import Strategy

MODES = ("best", "worst")

TABLE_GUARD_ENV = "CHAINFORGE_MAX_TABLE_ENTRIES"
DEFAULT_MAX_TABLE_ENTRIES = 1_000_000

TABLE_FORMAT = "chainforge-quality-table"
TABLE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class RunSpec:
    """Everything that pins down a control problem: gate, p, objective.

    `p` must be an exact rational in [0, 1]. mode "best" maximizes the
    expected final length, "worst" minimizes it; the worst case never
    halts voluntarily, so allow_halt is rejected there. Gates that lose
    nothing on failure make no progress on repeated failure, so
    failure_loss >= 1 is required for any expected-value recursion to
    ground out.
    """

    gate: GateModel
    p: Fraction
    mode: str = "best"
    allow_halt: bool = False

    def __post_init__(self):
        if not isinstance(self.gate, GateModel):
            raise ModelError(f"gate must be a GateModel, got {type(self.gate).__name__}")
        object.__setattr__(self, "p", as_probability(self.p))
        if self.mode not in MODES:
            raise ModelError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "worst" and self.allow_halt:
            raise ModelError("worst-case analysis never halts voluntarily; drop allow_halt")
        if self.gate.failure_loss < 1:
            raise ModelError(
                f"gate {self.gate.name!r} loses no edges on failure, so attempts can "
                "repeat forever; expected values need failure_loss >= 1"
            )

    @property
    def maximize(self) -> bool:
        return self.mode == "best"

    def better(self, candidate: Fraction, incumbent: Fraction) -> bool:
        """Strict improvement test; ties keep the incumbent (first wins)."""
        return candidate > incumbent if self.maximize else candidate < incumbent

    def spec_string(self) -> str:
        """Canonical one-line form, used for cache keys and file headers."""
        return (
            f"gate={self.gate.name}:{self.gate.success_gain}:{self.gate.failure_loss}"
            f" p={format_rational(self.p)} mode={self.mode} halt={int(self.allow_halt)}"
        )


def resolve_table_guard(max_entries: int | None = None) -> int:
    """Effective entry cap: explicit argument, else env override, else default."""
    if max_entries is not None:
        if max_entries < 1:
            raise ModelError(f"max_entries must be positive, got {max_entries}")
        return max_entries
    raw = os.environ.get(TABLE_GUARD_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ModelError(f"{TABLE_GUARD_ENV} must be an integer, got {raw!r}") from None
        if value < 1:
            raise ModelError(f"{TABLE_GUARD_ENV} must be positive, got {raw!r}")
        return value
    return DEFAULT_MAX_TABLE_ENTRIES


@dataclass
class QualityTable:
    """Memoized map from configuration to (exact value, chosen action).

    Entries preserve build order, so exporting the same problem twice
    yields byte-identical JSON. Terminal configurations (one chain or
    none) carry no action.
    """

    spec: RunSpec
    n_pairs: int
    max_vertices: int
    reachable_only: bool
    _entries: dict[Configuration, tuple[Fraction, Action | None]] = field(repr=False)

    @property
    def initial(self) -> Configuration:
        """The configuration the table was built for: n_pairs fresh pairs."""
        return canonicalize([1] * self.n_pairs)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, config: Configuration) -> bool:
        return config in self._entries

    def configurations(self) -> Iterator[Configuration]:
        yield from self._entries

    def value(self, config: Configuration) -> Fraction:
        try:
            return self._entries[config][0]
        except KeyError:
            raise UnknownConfiguration(
                f"configuration '{config}' is not keyed by this table "
                f"({self.spec.spec_string()}, n_pairs={self.n_pairs})"
            ) from None

    def action(self, config: Configuration) -> Action:
        try:
            _, action = self._entries[config]
        except KeyError:
            raise UnknownConfiguration(
                f"configuration '{config}' is not keyed by this table "
                f"({self.spec.spec_string()}, n_pairs={self.n_pairs})"
            ) from None
        if action is None:
            raise ModelError(f"configuration '{config}' is terminal; no action applies")
        return action

    def to_json_dict(self) -> dict:
        entries = []
        for config, (value, action) in self._entries.items():
            entry: dict = {"config": str(config), "value": format_rational(value)}
            if action is not None:
                entry["action"] = action_to_string(action)
            entries.append(entry)
        return {
            "format": TABLE_FORMAT,
            "version": TABLE_FORMAT_VERSION,
            "gate": {
                "name": self.spec.gate.name,
                "success_gain": self.spec.gate.success_gain,
                "failure_loss": self.spec.gate.failure_loss,
            },
            "p": format_rational(self.spec.p),
            "mode": self.spec.mode,
            "allow_halt": self.spec.allow_halt,
            "n_pairs": self.n_pairs,
            "max_vertices": self.max_vertices,
            "reachable_only": self.reachable_only,
            "entries": entries,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), separators=(",", ":"))

    @classmethod
    def from_json_dict(cls, data: dict) -> QualityTable:
        if not isinstance(data, dict):
            raise ModelError("table document must be a JSON object")
        if data.get("format") != TABLE_FORMAT:
            raise ModelError(f"not a quality table document (format={data.get('format')!r})")
        if data.get("version") != TABLE_FORMAT_VERSION:
            raise ModelError(f"unsupported table version {data.get('version')!r}")
        try:
            gate_doc = data["gate"]
            gate = GateModel(
                str(gate_doc["name"]),
                int(gate_doc["success_gain"]),
                int(gate_doc["failure_loss"]),
            )
            spec = RunSpec(
                gate=gate,
                p=parse_rational(data["p"]),
                mode=data["mode"],
                allow_halt=bool(data["allow_halt"]),
            )
            n_pairs = int(data["n_pairs"])
            max_vertices = int(data["max_vertices"])
            reachable_only = bool(data["reachable_only"])
            raw_entries = data["entries"]
        except KeyError as exc:
            raise ModelError(f"table document missing field {exc.args[0]!r}") from None
        entries: dict[Configuration, tuple[Fraction, Action | None]] = {}
        for item in raw_entries:
            config = Configuration.parse(item["config"])
            value = parse_rational(item["value"])
            action = action_from_string(item["action"]) if "action" in item else None
            if config in entries:
                raise ModelError(f"duplicate table entry for '{config}'")
            entries[config] = (value, action)
        return cls(
            spec=spec,
            n_pairs=n_pairs,
            max_vertices=max_vertices,
            reachable_only=reachable_only,
            _entries=entries,
        )

    @classmethod
    def from_json(cls, text: str) -> QualityTable:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelError(f"table document is not valid JSON: {exc}") from None
        return cls.from_json_dict(data)


ProgressFn = Callable[[int, int, int, int], None]


def build_quality_table(
    n_pairs: int,
    spec: RunSpec,
    *,
    reachable_only: bool = False,
    max_entries: int | None = None,
    progress: ProgressFn | None = None,
) -> QualityTable:
    """Fill the quality table for n_pairs fresh entangled pairs.

    With reachable_only the key set is restricted to configurations
    actually reachable from the initial one under the given gate, which
    can be much smaller for lossy gates. Either way the entry count is
    checked against the memory guard (`max_entries` argument, else the
    CHAINFORGE_MAX_TABLE_ENTRIES environment variable, else one million)
    before values are computed.

    `progress`, when given, is called once per vertex level with
    (vertices, configs_at_level, entries_done, entries_expected).
    """
    if n_pairs < 1:
        raise ModelError(f"n_pairs must be at least 1, got {n_pairs}")
    if spec.gate.success_gain > 1:
        raise ModelError(
            f"gate {spec.gate.name!r} gains {spec.gate.success_gain} edges on success; "
            "the stratified build requires success_gain <= 1 (successes must not "
            "increase the vertex count)"
        )
    cap = resolve_table_guard(max_entries)
    max_vertices = 2 * n_pairs

    if reachable_only:
        strata = _reachable_strata(canonicalize([1] * n_pairs), spec, cap)
    else:
        expected = count_configs(max_vertices) + 1  # + empty
        if expected > cap:
            raise GuardExceeded(
                f"full table for n_pairs={n_pairs} needs {expected} entries, guard "
                f"allows {cap}; raise {TABLE_GUARD_ENV} or pass a higher max_entries"
            )
        strata = list(enumerate_strata(max_vertices))

    expected = sum(len(configs) for _, configs in strata) + 1
    entries: dict[Configuration, tuple[Fraction, Action | None]] = {}
    entries[EMPTY] = (Fraction(0), None)

    p = spec.p
    q = 1 - p
    gate = spec.gate
    current_level = None
    level_count = 0
    for (vertices, _chains), configs in strata:
        if progress is not None and vertices != current_level:
            if current_level is not None:
                progress(current_level, level_count, len(entries), expected)
            current_level = vertices
            level_count = 0
        level_count += len(configs)
        for config in configs:
            if config.is_terminal:
                entries[config] = (Fraction(config.longest), None)
                continue
            best_value: Fraction | None = None
            best_action: Action | None = None
            for action in legal_actions(config, spec.allow_halt):
                if isinstance(action, Halt):
                    value = Fraction(config.longest)
                else:
                    succ = apply_success(config, action, gate)
                    fail = apply_failure(config, action, gate)
                    # In reachable mode both outcomes are reachable too,
                    # so direct lookups are safe in either mode.
                    value = p * entries[succ][0] + q * entries[fail][0]
                if best_value is None or spec.better(value, best_value):
                    best_value = value
                    best_action = action
            entries[config] = (best_value, best_action)
    if progress is not None and current_level is not None:
        progress(current_level, level_count, len(entries), expected)

    return QualityTable(
        spec=spec,
        n_pairs=n_pairs,
        max_vertices=max_vertices,
        reachable_only=reachable_only,
        _entries=entries,
    )


def _reachable_strata(
    initial: Configuration, spec: RunSpec, cap: int
) -> list[tuple[tuple[int, int], list[Configuration]]]:
    """Strata of the configurations reachable from `initial`, build order."""
    seen = {initial}
    frontier = [initial]
    while frontier:
        config = frontier.pop()
        if config.is_terminal:
            continue
        for action in legal_actions(config):
            for child in (
                apply_success(config, action, spec.gate),
                apply_failure(config, action, spec.gate),
            ):
                if child and child not in seen:
                    seen.add(child)
                    if len(seen) + 1 > cap:
                        raise GuardExceeded(
                            f"reachable set from '{initial}' exceeds the {cap}-entry "
                            f"guard; raise {TABLE_GUARD_ENV} or pass a higher max_entries"
                        )
                    frontier.append(child)
    grouped: dict[tuple[int, int], list[Configuration]] = {}
    for config in seen:
        grouped.setdefault((config.total_vertices, config.num_chains), []).append(config)
    strata = []
    for key in sorted(grouped):
        strata.append((key, sorted(grouped[key], reverse=True)))
    return strata


def quality(config: Configuration, table: QualityTable) -> Fraction:
    """Exact expected final length for `config` under the table's spec."""
    return table.value(config)


def policy_action(config: Configuration, table: QualityTable) -> Action:
    """The action the table's objective prescribes in `config`."""
    return table.action(config)


def brute_force_value(
    config: Configuration, spec: RunSpec, *, max_vertices: int = 14
) -> Fraction:
    """Expected final length by direct expansion of the recursion.

    Deliberately memoization-free so it shares no code path with the
    table builder; use it as an independent cross-check on small
    configurations. Exponential in the vertex count, hence the guard.
    """
    if config.total_vertices > max_vertices:
        raise GuardExceeded(
            f"brute force is limited to {max_vertices} vertices, "
            f"'{config}' has {config.total_vertices}"
        )
    p = spec.p
    q = 1 - p
    gate = spec.gate

    def expand(c: Configuration) -> Fraction:
        if c.is_terminal:
            return Fraction(c.longest)
        best: Fraction | None = None
        for action in legal_actions(c, spec.allow_halt):
            if isinstance(action, Halt):
                value = Fraction(c.longest)
            else:
                value = p * expand(apply_success(c, action, gate)) + q * expand(
                    apply_failure(c, action, gate)
                )
            if best is None or spec.better(value, best):
                best = value
        return best

    return expand(config)


def symbolic_quality(
    config: Configuration,
    gate: GateModel,
    strategy: "Strategy",
    allow_halt: bool = False,
) -> Poly:
    """Expected final length as an exact polynomial in the success probability.

    Only defined for a fixed (deterministic) strategy: the choice of
    action must not depend on p, otherwise the expectation is not a
    single polynomial. Strategies in this package are deterministic by
    construction. The result's value at any rational p matches the
    numeric recursion exactly.
    """
    if gate.failure_loss < 1:
        raise ModelError(
            f"gate {gate.name!r} loses no edges on failure; the recursion never grounds out"
        )
    p = Poly.x()
    q = Poly.one() - p
    memo: dict = {}

    def expand(state) -> Poly:
        cached = memo.get(state)
        if cached is not None:
            return cached
        if strategy.finished(state):
            result = Poly.constant(strategy.final_length(state))
        else:
            action = strategy.decide(state)
            if isinstance(action, Halt):
                if not allow_halt:
                    raise ModelError(
                        f"strategy {strategy.name!r} halted but halting is not allowed here"
                    )
                result = Poly.constant(strategy.config_at(state).longest)
            else:
                succ = expand(strategy.advance(state, action, True, gate))
                fail = expand(strategy.advance(state, action, False, gate))
                result = p * succ + q * fail
        memo[state] = result
        return result

    return expand(strategy.initial_state(config))
