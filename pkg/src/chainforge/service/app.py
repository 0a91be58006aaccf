"""FastAPI application exposing tables, distributions, sweeps, and weaving.

Quality tables are expensive to build and immutable afterwards, so the
app keeps them in an in-process store keyed by a hash of the exact
problem statement (gate, p, mode, halting, pair count, key-set choice).
Posting the same problem twice returns the cached table; importing a
previously exported table files it under the same deterministic id.

Domain errors map onto statuses: invalid inputs 422, unknown
configurations or table ids 404, refused resource guards 507.
"""
from __future__ import annotations

import hashlib
import os
import sys
import threading
from fractions import Fraction

from fastapi import FastAPI, HTTPException, Query

from .. import __version__, weaving
from ..chains import Configuration, GATES, action_to_string
from ..errors import GuardExceeded, ModelError, UnknownConfiguration
from ..exact import format_rational, parse_probability, parse_rational
from ..quality import QualityTable, RunSpec, build_quality_table, symbolic_quality
from ..strategies import (
    DEFAULT_MAX_EXACT_VERTICES,
    TablePolicy,
    exact_distribution,
    simulate,
    strategy_from_name,
)
from ..sweeps import SWEEP_COLUMNS, chain_sweep
from .models import (
    DistributionRequest,
    DistributionResponse,
    EntryResponse,
    ImportRequest,
    SimulateRequest,
    SweepRequest,
    SweepResponse,
    SymbolicRequest,
    SymbolicResponse,
    TableListResponse,
    TableRequest,
    TableResponse,
    TableSummary,
    WeaveCostRequest,
    WeaveEvalRequest,
    WeaveEvalResponse,
    WeaveSolveRequest,
    WeaveSweepRequest,
    resolve_gate,
)

WEAVE_COLUMNS = ("n", "a", "p", "bound", "exact", "overhead")


def _stderr_progress(vertices: int, level_configs: int, done: int, expected: int):
    """Stratum progress for long builds; data outputs never touch stderr."""
    if expected >= 20_000 and os.environ.get("CHAINFORGE_PROGRESS", "1") != "0":
        print(
            f"[chainforge] building table: vertex level {vertices}, "
            f"{done}/{expected} entries",
            file=sys.stderr,
            flush=True,
        )


class TableStore:
    """In-memory table cache keyed by the exact problem statement."""

    def __init__(self):
        self._tables: dict[str, QualityTable] = {}
        self._lock = threading.Lock()

    @staticmethod
    def table_id(spec: RunSpec, n_pairs: int, reachable_only: bool) -> str:
        text = f"{spec.spec_string()} n_pairs={n_pairs} reachable={int(reachable_only)}"
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def get(self, table_id: str) -> QualityTable | None:
        with self._lock:
            return self._tables.get(table_id)

    def items(self) -> list[tuple[str, QualityTable]]:
        with self._lock:
            return list(self._tables.items())

    def put(self, table: QualityTable) -> str:
        table_id = self.table_id(table.spec, table.n_pairs, table.reachable_only)
        with self._lock:
            self._tables[table_id] = table
        return table_id

    def get_or_build(
        self,
        spec: RunSpec,
        n_pairs: int,
        reachable_only: bool = False,
        max_entries: int | None = None,
    ) -> tuple[str, QualityTable, bool]:
        table_id = self.table_id(spec, n_pairs, reachable_only)
        with self._lock:
            cached = self._tables.get(table_id)
        if cached is not None:
            return table_id, cached, True
        table = build_quality_table(
            n_pairs,
            spec,
            reachable_only=reachable_only,
            max_entries=max_entries,
            progress=_stderr_progress,
        )
        with self._lock:
            # identical spec means identical table, so either copy will do
            self._tables.setdefault(table_id, table)
        return table_id, table, False


def create_app() -> FastAPI:
    app = FastAPI(
        title="chainforge",
        version=__version__,
        description="Exact analysis of control strategies for probabilistic chain assembly.",
    )
    store = TableStore()

    def gate_doc(spec: RunSpec) -> dict:
        return {
            "name": spec.gate.name,
            "success_gain": spec.gate.success_gain,
            "failure_loss": spec.gate.failure_loss,
        }

    def summarize(table_id: str, table: QualityTable, cached: bool = False,
                  include_table: bool = False) -> TableResponse:
        initial = table.initial
        value = table.value(initial)
        return TableResponse(
            table_id=table_id,
            gate=gate_doc(table.spec),
            p=format_rational(table.spec.p),
            mode=table.spec.mode,
            allow_halt=table.spec.allow_halt,
            n_pairs=table.n_pairs,
            reachable_only=table.reachable_only,
            entries=len(table),
            initial_config=str(initial),
            value=format_rational(value),
            value_float=float(value),
            cached=cached,
            table=table.to_json_dict() if include_table else None,
        )

    def run(work):
        """Translate domain errors into HTTP statuses."""
        try:
            return work()
        except GuardExceeded as exc:
            raise HTTPException(status_code=507, detail=str(exc)) from None
        except UnknownConfiguration as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        except ModelError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None

    def fetch_table(table_id: str) -> QualityTable:
        table = store.get(table_id)
        if table is None:
            raise HTTPException(status_code=404, detail=f"no table with id {table_id!r}")
        return table

    def series_strategy(config, gate, p: Fraction, strategy: str | None, mode: str | None,
                        allow_halt: bool, max_entries: int | None):
        """Resolve a series selector into (strategy object, series label, table or None)."""
        if (strategy is None) == (mode is None):
            raise ModelError("select a series with exactly one of 'strategy' or 'mode'")
        if strategy is not None:
            return strategy_from_name(strategy), strategy, None
        spec = RunSpec(gate=gate, p=p, mode=mode, allow_halt=allow_halt)
        n_pairs = max(1, -(config.total_vertices // -2))
        _, table, _ = store.get_or_build(spec, n_pairs, max_entries=max_entries)
        return TablePolicy(table), mode, table

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/gates")
    def gates():
        return {
            "gates": [
                {"name": g.name, "success_gain": g.success_gain, "failure_loss": g.failure_loss}
                for g in GATES.values()
            ]
        }

    @app.post("/tables", response_model=TableResponse, response_model_exclude_none=True)
    def build_table(req: TableRequest):
        def work():
            gate = resolve_gate(req.gate)
            spec = RunSpec(gate=gate, p=parse_probability(req.p), mode=req.mode,
                           allow_halt=req.allow_halt)
            table_id, table, cached = store.get_or_build(
                spec, req.n_pairs, req.reachable_only, req.max_entries
            )
            return summarize(table_id, table, cached=cached, include_table=req.include_table)

        return run(work)

    @app.get("/tables", response_model=TableListResponse)
    def list_tables():
        summaries = [
            TableSummary(**summarize(tid, t).model_dump(exclude={"cached", "table"}))
            for tid, t in store.items()
        ]
        return TableListResponse(tables=summaries)

    @app.get("/tables/{table_id}", response_model=TableResponse,
             response_model_exclude_none=True)
    def get_table(table_id: str, include_table: bool = False):
        table = fetch_table(table_id)
        return run(lambda: summarize(table_id, table, cached=True, include_table=include_table))

    @app.get("/tables/{table_id}/entry", response_model=EntryResponse)
    def table_entry(table_id: str, config: str = Query(...)):
        table = fetch_table(table_id)

        def work():
            parsed = Configuration.parse(config)
            value = table.value(parsed)
            terminal = parsed.is_terminal
            action = None if terminal else action_to_string(table.action(parsed))
            return EntryResponse(
                table_id=table_id,
                config=str(parsed),
                value=format_rational(value),
                value_float=float(value),
                action=action,
                terminal=terminal,
            )

        return run(work)

    @app.post("/tables/import", response_model=TableResponse,
              response_model_exclude_none=True)
    def import_table(req: ImportRequest):
        def work():
            table = QualityTable.from_json_dict(req.table)
            if table.initial not in table:
                raise ModelError(
                    "table document does not key its own initial configuration"
                )
            table_id = store.put(table)
            return summarize(table_id, table)

        return run(work)

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest):
        def work():
            rows, failures = chain_sweep(
                req.n_values,
                [parse_probability(s) for s in req.p_values],
                [resolve_gate(g) for g in req.gates],
                req.modes,
                req.strategies,
                allow_halt=req.allow_halt,
                max_entries=req.max_entries,
                progress=_stderr_progress,
            )
            return SweepResponse(columns=list(SWEEP_COLUMNS), rows=rows, failures=failures)

        return run(work)

    @app.post("/distribution", response_model=DistributionResponse)
    def distribution(req: DistributionRequest):
        def work():
            config = Configuration.parse(req.config)
            gate = resolve_gate(req.gate)
            p = parse_probability(req.p)
            strategy, series, table = series_strategy(
                config, gate, p, req.strategy, req.mode, req.allow_halt, req.max_entries
            )
            cap = req.max_vertices
            if cap is None:
                cap = DEFAULT_MAX_EXACT_VERTICES
                if table is not None:
                    # the table guard already vetted this size
                    cap = max(cap, table.max_vertices)
            summary = exact_distribution(
                config, gate, p, strategy, allow_halt=req.allow_halt, max_vertices=cap
            )
            return DistributionResponse(
                config=str(config),
                gate={"name": gate.name, "success_gain": gate.success_gain,
                      "failure_loss": gate.failure_loss},
                p=format_rational(p),
                series=series,
                summary=summary.to_json_dict(),
            )

        return run(work)

    @app.post("/simulate", response_model=DistributionResponse)
    def simulate_endpoint(req: SimulateRequest):
        def work():
            config = Configuration.parse(req.config)
            gate = resolve_gate(req.gate)
            p = parse_probability(req.p)
            strategy, series, _ = series_strategy(
                config, gate, p, req.strategy, req.mode, req.allow_halt, req.max_entries
            )
            summary = simulate(
                config, gate, p, strategy, allow_halt=req.allow_halt,
                samples=req.samples, seed=req.seed,
            )
            return DistributionResponse(
                config=str(config),
                gate={"name": gate.name, "success_gain": gate.success_gain,
                      "failure_loss": gate.failure_loss},
                p=format_rational(p),
                series=series,
                summary=summary.to_json_dict(),
            )

        return run(work)

    @app.post("/symbolic", response_model=SymbolicResponse)
    def symbolic(req: SymbolicRequest):
        def work():
            config = Configuration.parse(req.config)
            gate = resolve_gate(req.gate)
            strategy, series, _ = series_strategy(
                config, gate, parse_probability(req.p_for_mode), req.strategy, req.mode,
                req.allow_halt, req.max_entries,
            )
            poly = symbolic_quality(config, gate, strategy, allow_halt=req.allow_halt)
            return SymbolicResponse(
                config=str(config),
                gate={"name": gate.name, "success_gain": gate.success_gain,
                      "failure_loss": gate.failure_loss},
                series=series,
                coefficients=poly.to_strings(),
                degree=poly.degree,
                pretty=str(poly),
            )

        return run(work)

    @app.post("/weave/eval", response_model=WeaveEvalResponse)
    def weave_eval(req: WeaveEvalRequest):
        def work():
            a = parse_rational(req.a)
            p = parse_probability(req.p)
            exact = weaving.exact_success(req.n, a, p)
            return WeaveEvalResponse(
                n=req.n,
                a=format_rational(a),
                p=format_rational(p),
                bound=weaving.success_bound(req.n, a, p),
                exact=format_rational(exact),
                exact_float=float(exact),
            )

        return run(work)

    @app.post("/weave/solve")
    def weave_solve(req: WeaveSolveRequest):
        def work():
            result = weaving.solve_overhead(
                req.n,
                parse_probability(req.p),
                parse_probability(req.target),
                req.model,
                resolution=req.resolution,
            )
            return result.to_json_dict()

        return run(work)

    @app.post("/weave/cost")
    def weave_cost(req: WeaveCostRequest):
        def work():
            p = parse_probability(req.p)
            parts = weaving.cost_breakdown(p)
            return {
                "p": format_rational(p),
                "total": format_rational(parts["total"]),
                "total_float": float(parts["total"]),
                "lattice_edges": format_rational(parts["lattice_edges"]),
                "trim_loss": format_rational(parts["trim_loss"]),
                "failure_loss": format_rational(parts["failure_loss"]),
                "note": parts["note"],
            }

        return run(work)

    @app.post("/weave/sweep")
    def weave_sweep(req: WeaveSweepRequest):
        def work():
            rows = weaving.weave_rows(
                req.n_values,
                [parse_probability(s) for s in req.p_values],
                [parse_rational(s) for s in req.a_values] if req.a_values is not None else None,
                target=parse_probability(req.target) if req.target is not None else None,
                model=req.model,
            )
            return {"columns": list(WEAVE_COLUMNS), "rows": rows}

        return run(work)

    return app


app = create_app()
