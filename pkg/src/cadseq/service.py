"""HTTP facade over the toolkit plus multi-turn refinement sessions.

Sessions start from the empty model and evolve through instruction turns.
Each turn resolves an instruction into an edit script via the session
backend (manual scripts from the caller, canned scripted mappings, or an
external completion model gated by reasoning-trace validation), applies it,
pushes the exact inverse onto the undo stack, and returns the updated model,
mesh and per-op edited flags. Repeated undo walks the whole history back.

Sessions persist as append-only JSONL logs; reloading replays the history
deterministically.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field as dc_field

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import datagen, edit, formats, geom, metrics, reward
from .errors import (
    CadError,
    ClientTimeout,
    ClientUnavailable,
    EmptyGeometry,
    IndexOutOfBounds,
    InvalidModel,
    InvalidResult,
    InvalidTarget,
    MalformedResponse,
    ParseError,
    StaleOldValue,
)
from .model import CadModel, validate

DEFAULT_KIND = formats.ReprKind.DSL


@dataclass
class ServiceConfig:
    default_kind: formats.ReprKind = DEFAULT_KIND
    alpha: float = 5.0
    beta: float = 0.01
    default_backend: str = "manual"
    session_dir: str | None = None
    mesh_tolerance: float = 0.01
    external_client: object | None = None

    @classmethod
    def from_env(cls) -> "ServiceConfig":
        kind = os.environ.get("CADSEQ_DEFAULT_KIND", DEFAULT_KIND.value)
        cfg = cls(
            default_kind=formats.ReprKind(kind),
            alpha=float(os.environ.get("CADSEQ_REWARD_ALPHA", "5.0")),
            beta=float(os.environ.get("CADSEQ_REWARD_BETA", "0.01")),
            default_backend=os.environ.get("CADSEQ_BACKEND", "manual"),
            session_dir=os.environ.get("CADSEQ_SESSION_DIR"),
        )
        if os.environ.get("CADSEQ_MODEL_ENDPOINT"):
            cfg.external_client = datagen.HttpCompletionClient()
        return cfg


# --- wire schemas ------------------------------------------------------------


class ModelPayload(BaseModel):
    kind: str
    text: str


class ConvertRequest(BaseModel):
    text: str
    from_kind: str
    to_kind: str


class ValidateRequest(BaseModel):
    model_config = {"protected_namespaces": ()}
    model: ModelPayload


class ChamferRequest(BaseModel):
    a: ModelPayload
    b: ModelPayload
    n: int = 2048
    seed: int = 0
    normalize: bool = True


class RewardOptions(BaseModel):
    alpha: float | None = None
    beta: float | None = None
    length_unit: str = "primitives"
    n_points: int = 2048
    seed: int = 0


class RewardRequest(BaseModel):
    generated: str
    target: ModelPayload
    current: ModelPayload | None = None
    script: dict | None = None
    kind: str | None = None
    options: RewardOptions = Field(default_factory=RewardOptions)
    episode_id: str | None = None


class RewardBatchItem(BaseModel):
    generated: str
    target: ModelPayload
    current: ModelPayload | None = None
    script: dict | None = None
    episode_id: str | None = None


class RewardBatchRequest(BaseModel):
    items: list[RewardBatchItem]
    kind: str | None = None
    options: RewardOptions = Field(default_factory=RewardOptions)


class EditApplyRequest(BaseModel):
    model_config = {"protected_namespaces": ()}
    model: ModelPayload
    script: dict


class EditDiffRequest(BaseModel):
    a: ModelPayload
    b: ModelPayload


class MeshRequest(BaseModel):
    model_config = {"protected_namespaces": ()}
    model: ModelPayload
    tol: float = 0.01


class SessionCreateRequest(BaseModel):
    backend: str | None = None
    kind: str | None = None
    target: ModelPayload | None = None
    scripted: dict[str, str] = Field(default_factory=dict)


class TurnRequest(BaseModel):
    instruction: str = ""
    script: dict | None = None


# --- session state ------------------------------------------------------------


@dataclass
class SessionState:
    id: str
    backend: str
    kind: formats.ReprKind
    target: CadModel | None = None
    scripted: dict[str, str] = dc_field(default_factory=dict)
    history: list[dict] = dc_field(default_factory=list)
    current: CadModel = dc_field(default_factory=CadModel)
    undo_stack: list[edit.EditScript] = dc_field(default_factory=list)
    lock: threading.Lock = dc_field(default_factory=threading.Lock)


class DomainError(Exception):
    def __init__(self, status: int, detail, code: str = "domain_error"):
        self.status = status
        self.detail = detail
        self.code = code
        super().__init__(str(detail))


def _parse_payload(payload: ModelPayload, what: str) -> CadModel:
    try:
        kind = formats.ReprKind(payload.kind)
    except ValueError:
        raise DomainError(400, f"{what}: unknown kind {payload.kind!r}")
    try:
        return formats.parse(payload.text, kind)
    except ParseError as exc:
        raise DomainError(
            400,
            {"what": what, "message": exc.message, "line": exc.line,
             "column": exc.column, "kind": exc.kind},
            code="parse_error",
        )


def _script_from_wire(doc: dict) -> edit.EditScript:
    try:
        if "text" in doc and isinstance(doc["text"], str):
            return edit.script_from_text(doc["text"])
        return edit.script_from_record(doc)
    except (ValueError, KeyError, TypeError) as exc:
        raise DomainError(400, f"bad edit script: {exc}", code="bad_script")


def _mesh_payload(model: CadModel, tol: float) -> dict:
    if not model.ops:
        return {"vertices": [], "triangles": [], "triangle_op": []}
    try:
        return geom.tessellate(geom.compile_model(model), tol).to_payload()
    except EmptyGeometry:
        return {"vertices": [], "triangles": [], "triangle_op": []}


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="cadseq service", version="0.1.0")
    sessions: dict[str, SessionState] = {}
    app.state.config = config
    app.state.sessions = sessions

    @app.exception_handler(DomainError)
    async def domain_error_handler(_request: Request, exc: DomainError):
        return JSONResponse(
            status_code=exc.status, content={"error": exc.code, "detail": exc.detail}
        )

    @app.exception_handler(Exception)
    async def catch_all_handler(_request: Request, exc: Exception):
        return JSONResponse(
            status_code=500, content={"error": "internal", "detail": str(exc)}
        )

    def reward_config(kind: str | None, options: RewardOptions) -> reward.RewardConfig:
        try:
            return reward.RewardConfig(
                alpha=options.alpha if options.alpha is not None else config.alpha,
                beta=options.beta if options.beta is not None else config.beta,
                length_unit=options.length_unit,
                kind=formats.ReprKind(kind) if kind else config.default_kind,
                n_points=options.n_points,
                seed=options.seed,
            )
        except ValueError as exc:
            raise DomainError(400, f"bad reward options: {exc}")

    # --- stateless endpoints -------------------------------------------------

    @app.get("/health")
    async def health():
        return {"status": "ok"}

    @app.post("/convert")
    async def convert_endpoint(req: ConvertRequest):
        try:
            text = formats.convert(
                req.text, formats.ReprKind(req.from_kind), formats.ReprKind(req.to_kind)
            )
        except ValueError as exc:
            raise DomainError(400, str(exc))
        except ParseError as exc:
            raise DomainError(
                400,
                {"message": exc.message, "line": exc.line, "column": exc.column,
                 "kind": exc.kind},
                code="parse_error",
            )
        return {"text": text}

    @app.post("/validate")
    async def validate_endpoint(req: ValidateRequest):
        try:
            kind = formats.ReprKind(req.model.kind)
        except ValueError as exc:
            raise DomainError(400, str(exc))
        try:
            model = formats.parse(req.model.text, kind)
        except ParseError as exc:
            return {
                "valid": False,
                "violations": [
                    {"path": "", "message": f"{exc.kind} error at {exc.line}:{exc.column}: "
                                            f"{exc.message}"}
                ],
            }
        report = validate(model)
        return {
            "valid": report.ok,
            "violations": [{"path": v.path, "message": v.message} for v in report.violations],
        }

    @app.post("/chamfer")
    async def chamfer_endpoint(req: ChamferRequest):
        model_a = _parse_payload(req.a, "a")
        model_b = _parse_payload(req.b, "b")
        try:
            cloud_a = metrics.sample_model(model_a, req.n, req.seed)
            cloud_b = metrics.sample_model(model_b, req.n, req.seed)
            if req.normalize:
                result = metrics.chamfer_normalized(cloud_a, cloud_b)
            else:
                result = metrics.chamfer(cloud_a, cloud_b)
        except CadError as exc:
            raise DomainError(400, str(exc))
        return {"value": result.value, "scaled": result.scaled}

    @app.post("/reward")
    async def reward_endpoint(req: RewardRequest):
        cfg = reward_config(req.kind, req.options)
        target = _parse_payload(req.target, "target")
        current = _parse_payload(req.current, "current") if req.current else None
        script = _script_from_wire(req.script) if req.script else None
        try:
            breakdown = reward.score(
                req.generated, target, current=current, script=script, cfg=cfg,
                episode_id=req.episode_id,
            )
        except InvalidTarget as exc:
            raise DomainError(400, str(exc), code="invalid_target")
        return breakdown.to_record()

    @app.post("/reward/batch")
    async def reward_batch_endpoint(req: RewardBatchRequest):
        cfg = reward_config(req.kind, req.options)
        items = []
        for item in req.items:
            items.append(
                reward.RewardItem(
                    generated=item.generated,
                    target=_parse_payload(item.target, "target"),
                    current=_parse_payload(item.current, "current") if item.current else None,
                    script=_script_from_wire(item.script) if item.script else None,
                    episode_id=item.episode_id,
                )
            )
        results = reward.score_batch(items, cfg)
        return {"results": [b.to_record() for b in results]}

    @app.post("/edit/apply")
    async def edit_apply_endpoint(req: EditApplyRequest):
        model = _parse_payload(req.model, "model")
        script = _script_from_wire(req.script)
        try:
            result = edit.apply(model, script)
        except StaleOldValue as exc:
            raise DomainError(409, str(exc), code="stale_old_value")
        except (IndexOutOfBounds, InvalidResult, InvalidModel) as exc:
            raise DomainError(400, str(exc), code="apply_failed")
        return {"model": {"kind": req.model.kind, "text":
                          formats.print_model(result, formats.ReprKind(req.model.kind))}}

    @app.post("/edit/diff")
    async def edit_diff_endpoint(req: EditDiffRequest):
        model_a = _parse_payload(req.a, "a")
        model_b = _parse_payload(req.b, "b")
        script = edit.diff(model_a, model_b)
        return {"script": edit.script_to_record(script)}

    @app.post("/mesh")
    async def mesh_endpoint(req: MeshRequest):
        model = _parse_payload(req.model, "model")
        try:
            mesh = geom.tessellate(geom.compile_model(model), req.tol)
        except CadError as exc:
            raise DomainError(400, str(exc), code="empty_geometry")
        return mesh.to_payload()

    # --- sessions -------------------------------------------------------------

    def session_path(session_id: str) -> str | None:
        if not config.session_dir:
            return None
        return os.path.join(config.session_dir, f"{session_id}.jsonl")

    def persist_line(state: SessionState, doc: dict):
        path = session_path(state.id)
        if not path:
            return
        os.makedirs(config.session_dir, exist_ok=True)
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(doc, sort_keys=True) + "\n")

    def load_session(session_id: str) -> SessionState | None:
        path = session_path(session_id)
        if not path or not os.path.exists(path):
            return None
        state: SessionState | None = None
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                doc = json.loads(line)
                if doc["event"] == "create":
                    kind = formats.ReprKind(doc["kind"])
                    target = (
                        formats.parse(doc["target"], kind) if doc.get("target") else None
                    )
                    state = SessionState(
                        id=session_id, backend=doc["backend"], kind=kind, target=target,
                        scripted=doc.get("scripted", {}),
                    )
                elif doc["event"] == "turn" and state is not None:
                    script = edit.script_from_text(doc["script"])
                    state.undo_stack.append(edit.invert(script, state.current))
                    state.current = edit.apply(state.current, script)
                    state.history.append(
                        {"instruction": doc["instruction"], "script": doc["script"]}
                    )
                elif doc["event"] == "undo" and state is not None:
                    inverse = state.undo_stack.pop()
                    state.current = edit.apply(state.current, inverse)
                    state.history.pop()
        return state

    def get_session(session_id: str) -> SessionState:
        state = sessions.get(session_id)
        if state is None:
            state = load_session(session_id)
            if state is not None:
                sessions[session_id] = state
        if state is None:
            raise DomainError(404, f"unknown session {session_id!r}", code="unknown_session")
        return state

    def resolve_script(state: SessionState, req: TurnRequest) -> edit.EditScript:
        if state.backend == "manual":
            if req.script is None:
                raise DomainError(400, "manual backend requires an explicit script")
            return _script_from_wire(req.script)
        if state.backend == "scripted":
            text = state.scripted.get(req.instruction)
            if text is None:
                raise DomainError(400, f"no scripted edit for {req.instruction!r}")
            try:
                return edit.script_from_text(text)
            except ValueError as exc:
                raise DomainError(400, f"bad scripted edit: {exc}")
        if state.backend == "external":
            client = config.external_client
            if client is None:
                raise DomainError(503, "external model backend is not configured",
                                  code="backend_unavailable")
            payload = {
                "instruction": req.instruction,
                "current": formats.print_model(state.current, state.kind),
                "kind": state.kind.value,
            }
            try:
                trace_text = client.complete(
                    datagen.CompletionRequest(instruction_type="editing", payload=payload)
                )
            except (ClientUnavailable, ClientTimeout) as exc:
                raise DomainError(503, str(exc), code="backend_unavailable")
            except MalformedResponse as exc:
                raise DomainError(502, str(exc), code="malformed_response")
            trace, violations = datagen.validate_scot(trace_text, state.current)
            if trace is None:
                raise DomainError(
                    400, {"violations": violations}, code="invalid_reasoning_trace"
                )
            return trace.script
        raise DomainError(400, f"unknown backend {state.backend!r}")

    def turn_result(state: SessionState, applied: edit.EditScript, instruction: str) -> dict:
        edited = sorted(i for i in applied.edited_ops_b if 0 <= i < len(state.current.ops))
        flags = [i in applied.edited_ops_b for i in range(len(state.current.ops))]
        breakdown = None
        if state.target is not None:
            cfg = reward.RewardConfig(
                alpha=config.alpha, beta=config.beta, kind=state.kind,
            )
            try:
                breakdown = reward.score(
                    formats.print_model(state.current, state.kind), state.target, cfg=cfg
                ).to_record()
            except InvalidTarget as exc:
                breakdown = {"error": str(exc)}
        model_text = formats.print_model(state.current, state.kind)
        return {
            "turn_index": len(state.history) - 1,
            "instruction": instruction,
            "script": edit.script_to_record(applied),
            "model": {"kind": state.kind.value, "text": model_text},
            "mesh": _mesh_payload(state.current, config.mesh_tolerance),
            "edited_ops": edited,
            "edited_flags": flags,
            "reward": breakdown,
        }

    @app.post("/session")
    async def create_session(req: SessionCreateRequest):
        backend = req.backend or config.default_backend
        if backend not in ("manual", "scripted", "external"):
            raise DomainError(400, f"unknown backend {backend!r}")
        try:
            kind = formats.ReprKind(req.kind) if req.kind else config.default_kind
        except ValueError as exc:
            raise DomainError(400, str(exc))
        target = _parse_payload(req.target, "target") if req.target else None
        session_id = uuid.uuid4().hex[:12]
        state = SessionState(
            id=session_id, backend=backend, kind=kind, target=target,
            scripted=dict(req.scripted),
        )
        sessions[session_id] = state
        persist_line(
            state,
            {
                "event": "create", "backend": backend, "kind": kind.value,
                "target": formats.print_model(target, kind) if target else None,
                "scripted": dict(req.scripted),
            },
        )
        return {"id": session_id, "backend": backend, "kind": kind.value}

    @app.post("/session/{session_id}/turn")
    async def session_turn(session_id: str, req: TurnRequest):
        state = get_session(session_id)
        if not state.lock.acquire(blocking=False):
            raise DomainError(409, "another turn is in flight", code="busy")
        try:
            script = resolve_script(state, req)
            try:
                inverse = edit.invert(script, state.current)
                new_model = edit.apply(state.current, script)
            except StaleOldValue as exc:
                raise DomainError(409, str(exc), code="stale_old_value")
            except (IndexOutOfBounds, InvalidResult, CadError) as exc:
                raise DomainError(400, str(exc), code="apply_failed")
            state.current = new_model
            state.undo_stack.append(inverse)
            state.history.append(
                {"instruction": req.instruction, "script": edit.script_to_text(script)}
            )
            persist_line(
                state,
                {"event": "turn", "instruction": req.instruction,
                 "script": edit.script_to_text(script)},
            )
            return turn_result(state, script, req.instruction)
        finally:
            state.lock.release()

    @app.post("/session/{session_id}/undo")
    async def session_undo(session_id: str):
        state = get_session(session_id)
        if not state.lock.acquire(blocking=False):
            raise DomainError(409, "another turn is in flight", code="busy")
        try:
            if not state.undo_stack:
                raise DomainError(400, "nothing to undo", code="empty_history")
            inverse = state.undo_stack.pop()
            state.current = edit.apply(state.current, inverse)
            undone = state.history.pop()
            persist_line(state, {"event": "undo"})
            return turn_result(state, inverse, f"undo: {undone['instruction']}")
        finally:
            state.lock.release()

    @app.get("/session/{session_id}")
    async def session_get(session_id: str):
        state = get_session(session_id)
        return {
            "id": state.id,
            "backend": state.backend,
            "kind": state.kind.value,
            "turn_count": len(state.history),
            "model": {
                "kind": state.kind.value,
                "text": formats.print_model(state.current, state.kind),
            },
            "mesh": _mesh_payload(state.current, config.mesh_tolerance),
            "history": list(state.history),
        }

    return app


app = create_app(ServiceConfig.from_env())
