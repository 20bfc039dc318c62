"""FastAPI service holding named knowledge-base sessions in memory.

The knowledge base is meant to stay online while a robot operates: load
documents, run the fixpoint, then ask feasibility and performance
questions against the inferred state. Sessions are independent KBs keyed
by the `kb` query parameter; each holds its trained behavior maps.
"""

from __future__ import annotations

import dataclasses
import threading
from typing import Optional

from fastapi import FastAPI, HTTPException, Query

from .. import bundle
from ..assess.experience import ExperienceRecord
from ..assess.som import SomConfig, SomMap, parse_som, serialize_som, train_som
from ..inference import (explain, infer_to_fixpoint, render_explanation,
                         resource_ledger, trace_records)
from ..kb import KbError, KnowledgeBase, UnknownFact
from ..missions import (AssessmentFeatures, StaleKbError, assess_behavior,
                        behaviors_in, can_i_do_it, conditions_from_kb,
                        feasible_behaviors, register_behavior, select_behavior)
from ..schema import load_builtin_schema, validate_component
from ..sxdl import SxdlError, dump, load, parse
from . import models

DEFAULT_SESSION = "default"


class Session:
    def __init__(self):
        self.kb = KnowledgeBase()
        load_builtin_schema(self.kb)
        self.maps: dict[str, SomMap] = {}
        self.lock = threading.RLock()


class SessionStore:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def get(self, name: str, create: bool = False) -> Session:
        with self._lock:
            session = self._sessions.get(name)
            if session is None:
                if not create:
                    raise HTTPException(404, f"no knowledge base session {name!r}")
                session = self._sessions[name] = Session()
            return session

    def drop(self, name: str) -> bool:
        with self._lock:
            return self._sessions.pop(name, None) is not None


def _scratch_conditions(payload: models.ConditionsMixin) -> AssessmentFeatures:
    """Conditions from an environment document and/or explicit features."""
    features = AssessmentFeatures()
    if payload.conditions_text:
        scratch = KnowledgeBase()
        load_builtin_schema(scratch)
        load(parse(payload.conditions_text), scratch)
        features = conditions_from_kb(scratch)
    known = {f.name for f in dataclasses.fields(AssessmentFeatures)} - {"extras"}
    for key, value in payload.features.items():
        if key in known:
            setattr(features, key, float(value))
        else:
            features.extras[key] = float(value)
    return features


def _resolve_map(session: Session, behavior: str,
                 map_text: Optional[str]) -> Optional[SomMap]:
    if map_text:
        return parse_som(map_text)
    return session.maps.get(behavior)


def _assess_payload(result) -> models.AssessResponse:
    return models.AssessResponse(
        behavior=result.behavior,
        feasible=result.feasible,
        p_success=result.p_success,
        position_inaccuracy=result.position_inaccuracy,
        supporting_processing=result.supporting_processing,
        bmu=list(result.bmu) if result.bmu else None,
    )


def create_app(store: Optional[SessionStore] = None) -> FastAPI:
    app = FastAPI(title="selfx", version="0.1.0",
                  description="capability knowledge base service")
    sessions = store or SessionStore()
    app.state.sessions = sessions

    def session_for(kb_name: str, create: bool = False) -> Session:
        return sessions.get(kb_name, create=create)

    @app.exception_handler(SxdlError)
    async def _sxdl_error(_, exc: SxdlError):
        from fastapi.responses import JSONResponse
        return JSONResponse(status_code=422, content={
            "detail": exc.message, "line": exc.line, "col": exc.col,
            "token": exc.token})

    @app.exception_handler(StaleKbError)
    async def _stale(_, exc: StaleKbError):
        from fastapi.responses import JSONResponse
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(UnknownFact)
    async def _unknown(_, exc: UnknownFact):
        from fastapi.responses import JSONResponse
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(KbError)
    async def _kb_error(_, exc: KbError):
        from fastapi.responses import JSONResponse
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _value_error(_, exc: ValueError):
        from fastapi.responses import JSONResponse
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/kb/stats", response_model=models.StatsResponse)
    def stats(kb: str = Query(DEFAULT_SESSION)):
        session = session_for(kb)
        with session.lock:
            classes, instances, links = session.kb.counts()
            return models.StatsResponse(classes=classes, instances=instances,
                                        links=links, dirty=session.kb.dirty)

    @app.post("/kb/load", response_model=models.LoadResponse)
    def load_document(payload: models.LoadRequest, kb: str = Query(DEFAULT_SESSION)):
        if (payload.text is None) == (payload.bundled is None):
            raise HTTPException(400, "provide exactly one of text or bundled")
        text = payload.text
        if payload.bundled is not None:
            try:
                text = bundle.bundled_text(payload.bundled)
            except KeyError as exc:
                raise HTTPException(404, str(exc))
        session = session_for(kb, create=True)
        with session.lock:
            report = load(parse(text), session.kb)
        return models.LoadResponse(classes_added=report.classes_added,
                                   instances_added=report.instances_added,
                                   links_added=report.links_added,
                                   bindings=report.bindings)

    @app.post("/kb/infer", response_model=models.InferResponse)
    def infer(payload: models.InferRequest, kb: str = Query(DEFAULT_SESSION)):
        session = session_for(kb, create=True)
        with session.lock:
            stats = infer_to_fixpoint(session.kb)
            trace = trace_records(session.kb) if payload.trace else None
        return models.InferResponse(rounds=stats.rounds,
                                    facts_added=stats.facts_added,
                                    retracted=stats.retracted,
                                    wall_time_s=stats.wall_time,
                                    diagnostics=stats.diagnostics,
                                    trace=trace)

    @app.get("/kb/processing", response_model=models.ProcessingResponse)
    def processing(kb: str = Query(DEFAULT_SESSION),
                   output: Optional[str] = Query(None)):
        session = session_for(kb)
        with session.lock:
            store_kb = session.kb
            if output is not None and output not in store_kb.classes:
                raise HTTPException(404, f"unknown class: {output!r}")
            found = []
            for rel in sorted(store_kb.instances_of("Processing"),
                              key=lambda r: int(r.id[1:])):
                outputs = sorted(store_kb.query_role(rel.id, "output"),
                                 key=lambda i: i.id)
                if not outputs:
                    continue
                out_inst = outputs[0]
                if output is not None and not out_inst.cls.is_a(output):
                    continue
                deriv = store_kb.derivations.get(rel.id)

                def label(inst):
                    return store_kb.name_of(inst.id) or inst.id

                found.append(models.ProcessingInfo(
                    id=rel.id,
                    rule=deriv.rule if deriv else "asserted",
                    executors=sorted(label(i) for i in
                                     store_kb.query_role(rel.id, "executor")),
                    inputs=sorted(label(i) for i in
                                  store_kb.query_role(rel.id, "input")),
                    output=label(out_inst),
                    output_class=out_inst.class_name))
        return models.ProcessingResponse(processings=found)

    @app.get("/kb/explain/{fact_id}", response_model=models.ExplainResponse)
    def explain_fact(fact_id: str, kb: str = Query(DEFAULT_SESSION)):
        session = session_for(kb)
        with session.lock:
            node = explain(session.kb, fact_id)
            rendered = render_explanation(session.kb, node)
            tree = dataclasses.asdict(node)
        return models.ExplainResponse(fact_id=fact_id, rendered=rendered, tree=tree)

    @app.get("/kb/validate/{component}", response_model=models.ValidateResponse)
    def validate(component: str, kb: str = Query(DEFAULT_SESSION)):
        session = session_for(kb)
        with session.lock:
            instance_id = session.kb.bindings.get(component, component)
            report = validate_component(session.kb, instance_id)
        return models.ValidateResponse(
            subject=report.subject_name, ok=report.ok,
            violations=[models.ViolationInfo(rule=r, message=m)
                        for r, m in report.violations])

    @app.get("/kb/dump", response_model=models.DumpResponse)
    def dump_kb(kb: str = Query(DEFAULT_SESSION)):
        session = session_for(kb)
        with session.lock:
            return models.DumpResponse(text=dump(session.kb))

    @app.get("/kb/ledger", response_model=models.LedgerResponse)
    def ledger(kb: str = Query(DEFAULT_SESSION)):
        session = session_for(kb)
        with session.lock:
            entries = resource_ledger(session.kb)
        return models.LedgerResponse(entries=[
            models.LedgerEntryInfo(
                provider=e.provider_name,
                committed_throughput=e.committed_throughput,
                throughput=e.throughput, capacity=e.capacity,
                remaining_time=e.remaining_time)
            for e in entries])

    @app.delete("/kb")
    def drop(kb: str = Query(DEFAULT_SESSION)):
        return {"dropped": sessions.drop(kb)}

    @app.post("/kb/behaviors")
    def add_behavior(payload: models.BehaviorRequest, kb: str = Query(DEFAULT_SESSION)):
        session = session_for(kb, create=True)
        with session.lock:
            behavior_id = register_behavior(
                session.kb, payload.name, payload.effect_class,
                payload.featured_props, payload.modality)
        return {"behavior": payload.name, "instance": behavior_id}

    @app.get("/kb/behaviors", response_model=models.BehaviorsResponse)
    def list_behaviors(kb: str = Query(DEFAULT_SESSION)):
        session = session_for(kb)
        with session.lock:
            infos = behaviors_in(session.kb)
            return models.BehaviorsResponse(behaviors=[
                models.BehaviorInfoModel(name=i.name, effect_class=i.effect_class,
                                         modality=i.modality,
                                         has_map=name in session.maps)
                for name, i in sorted(infos.items())])

    @app.get("/kb/behaviors/feasible", response_model=models.FeasibleResponse)
    def feasible(kb: str = Query(DEFAULT_SESSION)):
        session = session_for(kb)
        with session.lock:
            names = sorted(feasible_behaviors(session.kb))
        return models.FeasibleResponse(behaviors=names)

    @app.put("/kb/behaviors/{name}/map")
    def bind_map(name: str, payload: models.BindMapRequest,
                 kb: str = Query(DEFAULT_SESSION)):
        session = session_for(kb)
        with session.lock:
            if name not in behaviors_in(session.kb):
                raise HTTPException(404, f"unknown behavior: {name!r}")
            session.maps[name] = parse_som(payload.map_text)
        return {"behavior": name, "bound": True}

    @app.post("/kb/assess", response_model=models.AssessResponse)
    def assess(payload: models.AssessRequest, kb: str = Query(DEFAULT_SESSION)):
        session = session_for(kb)
        conditions = _scratch_conditions(payload)
        with session.lock:
            som = _resolve_map(session, payload.behavior, payload.map_text)
            result = assess_behavior(session.kb, payload.behavior, conditions, som)
        return _assess_payload(result)

    @app.post("/kb/can", response_model=models.CanResponse)
    def can(payload: models.CanRequest, kb: str = Query(DEFAULT_SESSION)):
        session = session_for(kb)
        conditions = _scratch_conditions(payload)
        with session.lock:
            som = _resolve_map(session, payload.behavior, payload.map_text)
            answer, result = can_i_do_it(session.kb, payload.behavior,
                                         payload.min_performance, conditions, som)
        return models.CanResponse(answer="yes" if answer else "no",
                                  result=_assess_payload(result))

    @app.post("/kb/select", response_model=models.SelectResponse)
    def select(payload: models.SelectRequest, kb: str = Query(DEFAULT_SESSION)):
        session = session_for(kb)
        conditions = _scratch_conditions(payload)
        with session.lock:
            name = select_behavior(session.kb, conditions, session.maps,
                                   payload.min_performance)
        return models.SelectResponse(behavior=name)

    @app.post("/som/train", response_model=models.TrainResponse)
    def train(payload: models.TrainRequest):
        records = [ExperienceRecord(r.behavior,
                                    {k: r.features[k] for k in sorted(r.features)},
                                    r.outcome)
                   for r in payload.records]
        if payload.behavior is not None:
            records = [r for r in records if r.behavior == payload.behavior]
        if not records:
            raise HTTPException(400, "no records to train on")
        config = SomConfig(seed=payload.seed, rows=payload.rows,
                           cols=payload.cols, epochs=payload.epochs)
        som = train_som(records, config, behavior=payload.behavior)
        return models.TrainResponse(map_text=serialize_som(som),
                                    behavior=som.behavior,
                                    records_used=len(records),
                                    nodes=config.rows * config.cols)

    return app


_default_app: Optional[FastAPI] = None
_default_lock = threading.Lock()


def default_app() -> FastAPI:
    """Process-wide app instance, so CLI calls in one process share state."""
    global _default_app
    with _default_lock:
        if _default_app is None:
            _default_app = create_app()
        return _default_app
