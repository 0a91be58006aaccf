"""Request and response schemas for the HTTP service.

Probabilities, budget coefficients, and targets travel as exact
rational strings ("1/2", "3"), never as JSON numbers: the engine is
exact and the wire format must not launder values through floats.
Floats appear in responses only as convenience companions.
"""
from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

from ..chains import GateModel, gate_from_name
from ..errors import ModelError


class GateBody(BaseModel):
    """A gate given explicitly; name alone refers to a preset."""

    name: str = ""
    success_gain: int | None = Field(default=None, ge=0)
    failure_loss: int | None = Field(default=None, ge=0)


def resolve_gate(gate: str | GateBody) -> GateModel:
    if isinstance(gate, str):
        return gate_from_name(gate)
    if gate.success_gain is None and gate.failure_loss is None:
        if gate.name:
            return gate_from_name(gate.name)
        raise ModelError("gate body needs a preset name or explicit effects")
    if gate.success_gain is None or gate.failure_loss is None:
        raise ModelError("custom gates need both success_gain and failure_loss")
    name = gate.name or f"custom-{gate.success_gain}-{gate.failure_loss}"
    return GateModel(name, gate.success_gain, gate.failure_loss)


class TableRequest(BaseModel):
    n_pairs: int = Field(ge=1)
    gate: str | GateBody = "fusion"
    p: str = "1/2"
    mode: Literal["best", "worst"] = "best"
    allow_halt: bool = False
    reachable_only: bool = False
    max_entries: int | None = Field(default=None, ge=1)
    include_table: bool = False


class TableSummary(BaseModel):
    table_id: str
    gate: dict
    p: str
    mode: str
    allow_halt: bool
    n_pairs: int
    reachable_only: bool
    entries: int
    initial_config: str
    value: str
    value_float: float


class TableResponse(TableSummary):
    cached: bool = False
    table: dict | None = None


class TableListResponse(BaseModel):
    tables: list[TableSummary]


class ImportRequest(BaseModel):
    table: dict


class EntryResponse(BaseModel):
    table_id: str
    config: str
    value: str
    value_float: float
    action: str | None
    terminal: bool


class SweepRequest(BaseModel):
    n_values: list[int] = Field(min_length=1)
    p_values: list[str] = Field(min_length=1)
    gates: list[str | GateBody] = Field(default=["fusion"], min_length=1)
    modes: list[Literal["best", "worst"]] = []
    strategies: list[str] = []
    allow_halt: bool = False
    max_entries: int | None = Field(default=None, ge=1)


class SweepResponse(BaseModel):
    columns: list[str]
    rows: list[dict]
    failures: list[dict]


class DistributionRequest(BaseModel):
    config: str
    gate: str | GateBody = "fusion"
    p: str = "1/2"
    strategy: str | None = None
    mode: Literal["best", "worst"] | None = None
    allow_halt: bool = False
    max_vertices: int | None = Field(default=None, ge=2)
    max_entries: int | None = Field(default=None, ge=1)


class SimulateRequest(BaseModel):
    config: str
    gate: str | GateBody = "fusion"
    p: str = "1/2"
    strategy: str | None = None
    mode: Literal["best", "worst"] | None = None
    allow_halt: bool = False
    samples: int = Field(ge=1, le=100_000_000)
    seed: int = Field(default=0, ge=0)
    max_entries: int | None = Field(default=None, ge=1)


class DistributionResponse(BaseModel):
    config: str
    gate: dict
    p: str
    series: str
    summary: dict


class SymbolicRequest(BaseModel):
    config: str
    gate: str | GateBody = "fusion"
    strategy: str | None = None
    mode: Literal["best", "worst"] | None = None
    p_for_mode: str = "1/2"
    allow_halt: bool = False
    max_entries: int | None = Field(default=None, ge=1)


class SymbolicResponse(BaseModel):
    config: str
    gate: dict
    series: str
    coefficients: list[str]
    degree: int
    pretty: str


class WeaveEvalRequest(BaseModel):
    n: int = Field(ge=2)
    a: str
    p: str


class WeaveEvalResponse(BaseModel):
    n: int
    a: str
    p: str
    bound: float
    exact: str
    exact_float: float


class WeaveSolveRequest(BaseModel):
    n: int = Field(ge=2)
    p: str
    target: str
    model: Literal["bound", "exact"] = "bound"
    resolution: float = Field(default=1e-6, gt=0)


class WeaveCostRequest(BaseModel):
    p: str


class WeaveSweepRequest(BaseModel):
    n_values: list[int] = Field(min_length=1)
    p_values: list[str] = Field(min_length=1)
    a_values: list[str] | None = None
    target: str | None = None
    model: Literal["bound", "exact"] = "bound"
