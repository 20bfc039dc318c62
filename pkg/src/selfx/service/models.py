"""Request/response models for the knowledge-base service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class LoadRequest(BaseModel):
    text: Optional[str] = None
    bundled: Optional[str] = None  # name of a shipped scenario document


class LoadResponse(BaseModel):
    classes_added: int
    instances_added: int
    links_added: int
    bindings: dict[str, str]


class InferRequest(BaseModel):
    trace: bool = False


class InferResponse(BaseModel):
    rounds: int
    facts_added: dict[str, int]
    retracted: int
    wall_time_s: float
    diagnostics: list[str]
    trace: Optional[list[dict]] = None


class ProcessingInfo(BaseModel):
    id: str
    rule: str
    executors: list[str]
    inputs: list[str]
    output: str
    output_class: str


class ProcessingResponse(BaseModel):
    processings: list[ProcessingInfo]


class ExplainResponse(BaseModel):
    fact_id: str
    rendered: str
    tree: dict


class ViolationInfo(BaseModel):
    rule: str
    message: str


class ValidateResponse(BaseModel):
    subject: str
    ok: bool
    violations: list[ViolationInfo]


class DumpResponse(BaseModel):
    text: str


class StatsResponse(BaseModel):
    classes: int
    instances: int
    links: int
    dirty: bool


class LedgerEntryInfo(BaseModel):
    provider: str
    committed_throughput: float
    throughput: Optional[float]
    capacity: Optional[float]
    remaining_time: Optional[float]


class LedgerResponse(BaseModel):
    entries: list[LedgerEntryInfo]


class BehaviorRequest(BaseModel):
    name: str
    effect_class: str
    featured_props: dict[str, dict] = Field(default_factory=dict)
    modality: Optional[str] = None


class BehaviorInfoModel(BaseModel):
    name: str
    effect_class: str
    modality: Optional[str]
    has_map: bool


class BehaviorsResponse(BaseModel):
    behaviors: list[BehaviorInfoModel]


class FeasibleResponse(BaseModel):
    behaviors: list[str]


class ConditionsMixin(BaseModel):
    conditions_text: Optional[str] = None  # an .sxdl environment document
    features: dict[str, float] = Field(default_factory=dict)


class AssessRequest(ConditionsMixin):
    behavior: str
    map_text: Optional[str] = None


class AssessResponse(BaseModel):
    behavior: str
    feasible: bool
    p_success: Optional[float]
    position_inaccuracy: Optional[float]
    supporting_processing: list[str]
    bmu: Optional[list[int]] = None


class CanRequest(ConditionsMixin):
    behavior: str
    min_performance: float
    map_text: Optional[str] = None


class CanResponse(BaseModel):
    answer: str  # "yes" | "no"
    result: AssessResponse


class SelectRequest(ConditionsMixin):
    min_performance: Optional[float] = None


class SelectResponse(BaseModel):
    behavior: Optional[str]


class BindMapRequest(BaseModel):
    map_text: str


class RecordModel(BaseModel):
    behavior: str
    features: dict[str, float]
    outcome: int


class TrainRequest(BaseModel):
    records: list[RecordModel]
    behavior: Optional[str] = None
    seed: int = 0
    rows: int = 4
    cols: int = 4
    epochs: int = 200


class TrainResponse(BaseModel):
    map_text: str
    behavior: str
    records_used: int
    nodes: int
