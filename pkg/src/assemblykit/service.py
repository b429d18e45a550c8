"""HTTP facade over the session store.

All money on the wire is integer minor units; bodies are JSON. Clients
poll - there is no push transport. Configuration comes from the CLI
flags or the ASSEMBLYKIT_DATA_DIR / ASSEMBLYKIT_ADDRESS environment
variables.
"""

from __future__ import annotations

import os

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from .errors import (
    AssemblyKitError,
    BudgetOutOfRange,
    IncreaseNotAllowed,
    NotInFrozenSet,
    OutOfScaleScore,
    UnknownSession,
    ValidationError,
    WrongState,
)
from .session import SessionStore

_STATUS = {
    ValidationError: 422,
    BudgetOutOfRange: 422,
    OutOfScaleScore: 422,
    WrongState: 409,
    NotInFrozenSet: 404,
    IncreaseNotAllowed: 422,
    UnknownSession: 404,
}


def create_app(data_dir: str | None = None) -> FastAPI:
    data_dir = data_dir or os.environ.get("ASSEMBLYKIT_DATA_DIR")
    store = SessionStore(data_dir)
    app = FastAPI(title="assemblykit session service")
    app.state.store = store

    @app.exception_handler(AssemblyKitError)
    async def _domain_error(request: Request, exc: AssemblyKitError):
        status = _STATUS.get(type(exc), 400)
        return JSONResponse(status_code=status,
                            content={"error": type(exc).__name__, "detail": str(exc)})

    @app.post("/sessions", status_code=201)
    async def create_session(body: dict):
        if "election" not in body:
            raise HTTPException(422, "body must contain an 'election' object")
        sess = store.create(body["election"])
        return {"session_id": sess.state.id, "state": sess.state.state}

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        return store.get(session_id).snapshot()

    @app.get("/sessions/{session_id}/scenario")
    async def get_scenario(session_id: str, budget: int):
        return store.get(session_id).get_scenario(budget)

    @app.post("/sessions/{session_id}/commit")
    async def commit(session_id: str, body: dict):
        if "mes_budget" not in body:
            raise HTTPException(422, "body must contain mes_budget")
        return store.get(session_id).commit_ratio(int(body["mes_budget"]))

    @app.post("/sessions/{session_id}/veto")
    async def veto(session_id: str, body: dict):
        if "project_id" not in body:
            raise HTTPException(422, "body must contain project_id")
        return store.get(session_id).veto_project(body["project_id"],
                                                  body.get("decided_by", ""))

    @app.post("/sessions/{session_id}/adjust")
    async def adjust(session_id: str, body: dict):
        for key in ("project_id", "new_cost"):
            if key not in body:
                raise HTTPException(422, f"body must contain {key}")
        return store.get(session_id).adjust_project_budget(body["project_id"],
                                                           int(body["new_cost"]))

    @app.post("/sessions/{session_id}/rtr/votes")
    async def rtr_vote(session_id: str, body: dict):
        for key in ("statement_id", "participant_id", "phase", "score"):
            if key not in body:
                raise HTTPException(422, f"body must contain {key}")
        store.get(session_id).rtr_vote(body["statement_id"], body["participant_id"],
                                       body["phase"], int(body["score"]))
        return {"ok": True}

    @app.get("/sessions/{session_id}/rtr/report")
    async def rtr_report(session_id: str):
        return {"statements": store.get(session_id).rtr_report()}

    @app.post("/sessions/{session_id}/finalize")
    async def finalize(session_id: str, body: dict | None = None):
        selections = (body or {}).get("deliberation_selections")
        return store.get(session_id).finalize(selections)

    @app.get("/sessions/{session_id}/events")
    async def events(session_id: str, offset: int = 0, limit: int = 100):
        return store.get(session_id).events_page(offset, limit)

    return app


def serve(address: str = "127.0.0.1:8400", data_dir: str | None = None):
    """Run the service until terminated."""
    import uvicorn

    host, _, port = address.partition(":")
    app = create_app(data_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8400), log_level="info")
