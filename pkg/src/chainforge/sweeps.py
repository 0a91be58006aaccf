"""Parameter sweeps over pair counts, probabilities, gates, and control rules.

One sweep cell is a (n_pairs, p, gate, series) combination, where a
series is either an optimized mode ("best"/"worst", played through its
quality table) or a named fixed strategy. Every cell reports the exact
mean plus spread statistics of the final-length distribution. Cells fail
independently: a blown guard marks the cell and the sweep carries on,
so one oversized request does not void the rest of a grid.
"""
from __future__ import annotations

from fractions import Fraction

from .chains import GateModel, canonicalize
from .errors import ChainforgeError, ModelError
from .exact import as_probability, format_rational
from .quality import MODES, RunSpec, build_quality_table
from .strategies import Strategy, TablePolicy, exact_distribution, strategy_from_name

SWEEP_COLUMNS = ("N", "p", "gate", "strategy", "mean", "std", "rel_std")


def chain_sweep(
    n_values: list[int],
    p_values: list[Fraction],
    gates: list[GateModel],
    modes: list[str] = (),
    strategies: list[Strategy | str] = (),
    *,
    allow_halt: bool = False,
    max_entries: int | None = None,
    progress=None,
) -> tuple[list[dict], list[dict]]:
    """Evaluate the full grid; returns (rows, failures).

    Rows come out in deterministic order: N, then p, then gate, then
    modes in the order given, then strategies; an empty series list is
    an empty sweep, not an error. Mode cells share one table per
    (gate, p, mode), built once at the largest N. Failed cells appear
    in both lists: blank cells in `rows`, the error message in
    `failures`.
    """
    if not n_values:
        raise ModelError("sweep needs at least one N value")
    if not p_values:
        raise ModelError("sweep needs at least one probability")
    if not gates:
        raise ModelError("sweep needs at least one gate")
    for n in n_values:
        if n < 1:
            raise ModelError(f"n_pairs must be at least 1, got {n}")
    p_values = [as_probability(p) for p in p_values]
    for mode in modes:
        if mode not in MODES:
            raise ModelError(f"mode must be one of {MODES}, got {mode!r}")
    resolved = [strategy_from_name(s) if isinstance(s, str) else s for s in strategies]

    n_top = max(n_values)
    tables: dict[tuple, object] = {}

    def table_for(gate: GateModel, p: Fraction, mode: str):
        key = (gate.name, gate.success_gain, gate.failure_loss, p, mode)
        if key not in tables:
            try:
                spec = RunSpec(gate=gate, p=p, mode=mode, allow_halt=allow_halt and mode == "best")
                tables[key] = build_quality_table(
                    n_top, spec, max_entries=max_entries, progress=progress
                )
            except ChainforgeError as exc:
                tables[key] = exc
        cached = tables[key]
        if isinstance(cached, Exception):
            raise cached
        return cached

    rows: list[dict] = []
    failures: list[dict] = []

    def emit(n, p, gate, series, worker):
        row = {
            "N": n,
            "p": format_rational(p),
            "gate": gate.name,
            "strategy": series,
            "mean": None,
            "mean_exact": None,
            "std": None,
            "rel_std": None,
        }
        try:
            dist = worker()
        except ChainforgeError as exc:
            failures.append({**{k: row[k] for k in ("N", "p", "gate", "strategy")},
                             "error": str(exc)})
        else:
            row["mean"] = float(dist.mean)
            row["mean_exact"] = format_rational(dist.mean)
            row["std"] = dist.std
            row["rel_std"] = dist.rel_std
        rows.append(row)

    for n in n_values:
        config = canonicalize([1] * n)
        for p in p_values:
            for gate in gates:
                for mode in modes:
                    halt = allow_halt and mode == "best"
                    emit(
                        n, p, gate, mode,
                        lambda gate=gate, p=p, mode=mode, halt=halt: exact_distribution(
                            config,
                            gate,
                            p,
                            TablePolicy(table_for(gate, p, mode)),
                            allow_halt=halt,
                            max_vertices=2 * n_top,
                        ),
                    )
                for strategy in resolved:
                    emit(
                        n, p, gate, strategy.name,
                        lambda gate=gate, p=p, strategy=strategy: exact_distribution(
                            config,
                            gate,
                            p,
                            strategy,
                            allow_halt=False,
                            max_vertices=2 * n_top,
                        ),
                    )
    return rows, failures
