"""Chain configurations and two-chain probabilistic entangling gates.

The repository of partially assembled linear clusters is modeled as a
multiset of chain lengths, counted in edges: a fresh entangled pair is
one edge (two vertices), a chain of length l has l + 1 vertices. A gate
acts on two chains at a time. On success the pair merges into a single
chain whose length is the sum of the inputs plus the gate's
success_gain; on failure both inputs lose failure_loss edges each, and
any chain driven to length zero or below is lost entirely.

Because the gates are symmetric under relabeling, only the multiset of
lengths matters, which keeps the state space at the size of the set of
integer partitions rather than the set of sequences.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import ModelError


class Configuration(tuple):
    """Canonical multiset of chain lengths.

    Stored as ((length, multiplicity), ...) with lengths strictly
    descending, so configurations are hashable and compare by value.
    Build instances through `canonicalize` or `Configuration.parse`;
    the raw tuple constructor trusts its input.
    """

    __slots__ = ()

    @property
    def num_chains(self) -> int:
        return sum(m for _, m in self)

    @property
    def total_edges(self) -> int:
        return sum(l * m for l, m in self)

    @property
    def total_vertices(self) -> int:
        """Vertices held across all chains; each length-l chain has l + 1."""
        return sum((l + 1) * m for l, m in self)

    @property
    def longest(self) -> int:
        """Length of the longest chain, 0 for the empty configuration."""
        return self[0][0] if self else 0

    @property
    def is_terminal(self) -> bool:
        """True once no two chains remain to act on."""
        return self.num_chains <= 1

    def count_of(self, length: int) -> int:
        for l, m in self:
            if l == length:
                return m
        return 0

    def chain_lengths(self) -> list[int]:
        """Expanded list of lengths, longest first."""
        out: list[int] = []
        for l, m in self:
            out.extend([l] * m)
        return out

    def __str__(self) -> str:
        return " ".join(f"{l}^{m}" for l, m in self)

    def __repr__(self) -> str:
        return f"Configuration({str(self)!r})"

    @classmethod
    def parse(cls, text: str) -> Configuration:
        """Parse the canonical string form, e.g. "5^1 2^2 1^3".

        A bare "l" token means multiplicity one. The empty string is
        the empty configuration. Input tokens may arrive in any order;
        the result is always canonical.
        """
        if not isinstance(text, str):
            raise ModelError(f"expected a configuration string, got {type(text).__name__}")
        lengths: list[int] = []
        for token in text.split():
            length_part, sep, mult_part = token.partition("^")
            try:
                length = int(length_part)
                mult = int(mult_part) if sep else 1
            except ValueError:
                raise ModelError(f"bad configuration token {token!r} in {text!r}") from None
            if length < 1 or mult < 1:
                raise ModelError(f"bad configuration token {token!r} in {text!r}")
            lengths.extend([length] * mult)
        return canonicalize(lengths)


EMPTY = Configuration()


def canonicalize(lengths: Iterable[int]) -> Configuration:
    """Aggregate raw chain lengths into a canonical Configuration.

    Zeros are dropped (a zero-length chain is no chain); negative
    entries are rejected.
    """
    counts: dict[int, int] = {}
    for raw in lengths:
        length = int(raw)
        if length != raw:
            raise ModelError(f"chain lengths must be integers, got {raw!r}")
        if length < 0:
            raise ModelError(f"chain lengths must be non-negative, got {raw}")
        if length == 0:
            continue
        counts[length] = counts.get(length, 0) + 1
    return Configuration(sorted(counts.items(), reverse=True))


@dataclass(frozen=True)
class GateModel:
    """A two-chain entangling gate, reduced to its bookkeeping effect.

    success_gain: edges added to the merged chain on success, on top of
        the sum of the two input lengths.
    failure_loss: edges removed from each of the two inputs on failure.
    """

    name: str
    success_gain: int
    failure_loss: int

    def __post_init__(self):
        if self.success_gain < 0 or self.failure_loss < 0:
            raise ModelError(
                f"gate effects must be non-negative, got "
                f"({self.success_gain}, {self.failure_loss})"
            )


# Built-in gate models, keyed by name. The type-II fusion gate merges
# with no bonus edge and burns one edge per chain on failure; the two
# CZ-style gates gain an edge on success; the double-photon variants
# burn two edges per chain on failure.
FUSION = GateModel("fusion", success_gain=0, failure_loss=1)
KLM_CZ = GateModel("klm-cz", success_gain=1, failure_loss=1)
DPC = GateModel("dpc", success_gain=0, failure_loss=2)
CZ = GateModel("cz", success_gain=1, failure_loss=2)

GATES: dict[str, GateModel] = {g.name: g for g in (FUSION, KLM_CZ, DPC, CZ)}


def gate_from_name(name: str) -> GateModel:
    key = name.strip().lower().replace("_", "-")
    if key not in GATES:
        known = ", ".join(sorted(GATES))
        raise ModelError(f"unknown gate {name!r} (known gates: {known})")
    return GATES[key]


@dataclass(frozen=True)
class Fuse:
    """Attempt a gate on one chain of length i and one of length j.

    Lengths are unordered; the constructor normalizes to i <= j.
    """

    i: int
    j: int

    def __post_init__(self):
        if self.i < 1 or self.j < 1:
            raise ModelError(f"fuse lengths must be positive, got ({self.i}, {self.j})")
        if self.i > self.j:
            i, j = self.j, self.i
            object.__setattr__(self, "i", i)
            object.__setattr__(self, "j", j)


@dataclass(frozen=True)
class Halt:
    """Stop assembling and keep the longest chain currently held."""


HALT = Halt()

Action = Fuse | Halt


def action_to_string(action: Action) -> str:
    if isinstance(action, Fuse):
        return f"fuse {action.i} {action.j}"
    if isinstance(action, Halt):
        return "halt"
    raise ModelError(f"not an action: {action!r}")


def action_from_string(text: str) -> Action:
    parts = text.split()
    if parts == ["halt"]:
        return HALT
    if len(parts) == 3 and parts[0] == "fuse":
        try:
            return Fuse(int(parts[1]), int(parts[2]))
        except ValueError:
            pass
    raise ModelError(f"bad action string {text!r} (expected 'fuse I J' or 'halt')")


def _remove_pair(config: Configuration, i: int, j: int) -> dict[int, int]:
    """Counts of `config` minus one chain of length i and one of length j.

    Raises ModelError naming the first missing chain, which also covers
    the i == j case with multiplicity one.
    """
    counts = dict(config)
    for length in (i, j):
        have = counts.get(length, 0)
        if have <= 0:
            raise ModelError(
                f"cannot fuse ({i}, {j}) in '{config}': no chain of length {length} available"
            )
        counts[length] = have - 1
    return counts


def _rebuild(counts: dict[int, int]) -> Configuration:
    return Configuration(sorted(((l, m) for l, m in counts.items() if m > 0), reverse=True))


def apply_success(config: Configuration, action: Fuse, gate: GateModel) -> Configuration:
    """Resulting configuration when the attempted gate succeeds."""
    if not isinstance(action, Fuse):
        raise ModelError(f"apply_success needs a Fuse action, got {action!r}")
    counts = _remove_pair(config, action.i, action.j)
    merged = action.i + action.j + gate.success_gain
    counts[merged] = counts.get(merged, 0) + 1
    return _rebuild(counts)


def apply_failure(config: Configuration, action: Fuse, gate: GateModel) -> Configuration:
    """Resulting configuration when the attempted gate fails.

    Each participant loses failure_loss edges; a chain cut to length
    zero or below is discarded.
    """
    if not isinstance(action, Fuse):
        raise ModelError(f"apply_failure needs a Fuse action, got {action!r}")
    counts = _remove_pair(config, action.i, action.j)
    for length in (action.i, action.j):
        kept = length - gate.failure_loss
        if kept > 0:
            counts[kept] = counts.get(kept, 0) + 1
    return _rebuild(counts)


def legal_actions(config: Configuration, allow_halt: bool = False) -> list[Action]:
    """All distinct actions available in `config`, in deterministic order.

    Fuse pairs come first, ordered by ascending (i, j); Halt, when
    allowed and at least one chain is held, comes last. Ties between
    equally valued actions are broken by taking the earliest entry of
    this list, so the ordering here is part of the observable contract.
    """
    actions: list[Action] = []
    distinct = sorted(l for l, _ in config)
    for a_idx, i in enumerate(distinct):
        for j in distinct[a_idx:]:
            if i == j and config.count_of(i) < 2:
                continue
            actions.append(Fuse(i, j))
    if allow_halt and config.num_chains >= 1:
        actions.append(HALT)
    return actions


def _partitions(total: int, parts: int, max_part: int) -> Iterator[tuple[int, ...]]:
    """Partitions of `total` into exactly `parts` parts, each in [2, max_part].

    Yielded in descending lexicographic order; each partition is itself
    non-increasing. Parts are vertex counts per chain, hence >= 2.
    """
    if parts == 0:
        if total == 0:
            yield ()
        return
    if total < 2 * parts:
        return
    top = min(max_part, total - 2 * (parts - 1))
    for first in range(top, 1, -1):
        for rest in _partitions(total - first, parts - 1, first):
            yield (first,) + rest


def enumerate_strata(max_vertices: int) -> Iterator[tuple[tuple[int, int], list[Configuration]]]:
    """Yield ((vertices, chains), configs) strata in ascending build order.

    Ascending vertex count, then ascending chain count; within a
    stratum, configurations follow descending lexicographic partition
    order. Empty strata are skipped. The empty configuration is not
    produced; callers that need it key it explicitly.
    """
    if max_vertices < 2:
        raise ModelError(f"max_vertices must be at least 2, got {max_vertices}")
    for vertices in range(2, max_vertices + 1):
        for chains in range(1, vertices // 2 + 1):
            configs = [
                Configuration(sorted(_aggregate(parts), reverse=True))
                for parts in _partitions(vertices, chains, vertices)
            ]
            if configs:
                yield (vertices, chains), configs


def _aggregate(parts: tuple[int, ...]) -> list[tuple[int, int]]:
    counts: dict[int, int] = {}
    for p in parts:
        counts[p - 1] = counts.get(p - 1, 0) + 1
    return list(counts.items())


def enumerate_configs(max_vertices: int) -> Iterator[Configuration]:
    """All non-empty configurations using at most `max_vertices` vertices."""
    for _, configs in enumerate_strata(max_vertices):
        yield from configs


def count_configs(max_vertices: int) -> int:
    """Number of configurations `enumerate_configs(max_vertices)` yields.

    Computed from the partition-counting recurrence (parts >= 2), so
    table-size guards can be checked without materializing anything.
    """
    if max_vertices < 2:
        raise ModelError(f"max_vertices must be at least 2, got {max_vertices}")
    # ways[v] = partitions of v into parts >= 2, built by adding one
    # allowed part size at a time.
    ways = [0] * (max_vertices + 1)
    ways[0] = 1
    for part in range(2, max_vertices + 1):
        for v in range(part, max_vertices + 1):
            ways[v] += ways[v - part]
    return sum(ways[2:])
