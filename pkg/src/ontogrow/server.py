"""JSON/HTTP session API consumed by the browser client.

Status codes: 201 on session creation, 200 otherwise, 404 for unknown
session ids, 409 when a commit loses the optimistic revision race, 422 for
illegal input (including answer kinds the pending question forbids).
"""
from __future__ import annotations

from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel

from .engine import Engine
from .errors import (
    DuplicateConceptError,
    IllegalAnswerError,
    SessionFinishedError,
    StaleRevisionError,
    UnknownMethodError,
)
from .insertion import Answer, transcript_text


class SessionRequest(BaseModel):
    concept: str
    method: int
    entity_type: str | None = None
    user_sentence: str | None = None
    user: str | None = None


class AnswerRequest(BaseModel):
    kind: str
    text: str | None = None


class TurnRequest(BaseModel):
    sentence: str
    user: str | None = None
    method: int | None = None


def create_app(engine: Engine) -> FastAPI:
    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        engine.flush()

    app = FastAPI(title="ontogrow", version="0.1.0", lifespan=lifespan)
    app.state.engine = engine

    @app.post("/sessions", status_code=201)
    def create_session(req: SessionRequest):
        try:
            session, _ = engine.start_session(
                req.concept,
                req.method,
                entity_type=req.entity_type,
                user_sentence=req.user_sentence,
                user=req.user,
            )
        except (DuplicateConceptError, UnknownMethodError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return engine.session_view(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = engine.store.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return engine.session_view(session)

    @app.post("/sessions/{session_id}/answer")
    def answer_session(session_id: str, req: AnswerRequest):
        try:
            answer = Answer(kind=req.kind, text=req.text)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=f"illegal-answer: {exc}") from exc
        try:
            return engine.answer_session(session_id, answer)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}") from exc
        except (IllegalAnswerError, SessionFinishedError) as exc:
            raise HTTPException(status_code=422, detail=f"illegal-answer: {exc}") from exc
        except StaleRevisionError as exc:
            raise HTTPException(status_code=409, detail=f"stale-revision: {exc}") from exc

    @app.get("/sessions/{session_id}/transcript")
    def get_transcript(session_id: str):
        session = engine.store.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return Response(content=transcript_text(session), media_type="application/json")

    @app.delete("/sessions/{session_id}")
    def purge_session(session_id: str):
        if not engine.store.purge(session_id):
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return {"purged": session_id}

    @app.post("/turn")
    def turn(req: TurnRequest):
        return engine.handle_user_turn(req.sentence, user=req.user, method_policy=req.method).to_dict()

    @app.get("/tree")
    def tree():
        # byte-identical to the dialogue-tree module export
        return Response(content=engine.tree_dump_text(), media_type="application/json")

    @app.get("/ontology/classes")
    def classes():
        return [
            {"name": c.name, "display_name": c.display_name, "parent": c.parent}
            for c in engine.ontology.classes.values()
        ]

    @app.post("/extract")
    def extract(body: dict):
        reply = body.get("reply", "")
        result = engine.extract(reply)
        return {
            "candidates": [
                {
                    "text": c.text,
                    "lemma": c.lemma,
                    "entity_type": c.entity_type,
                    "priority": c.priority,
                    "atomic_ordinal": c.atomic_ordinal,
                    "span": list(c.span),
                    "intent": c.intent,
                }
                for c in result.candidates
            ],
            "best": result.best.lemma if result.best else None,
        }

    return app
