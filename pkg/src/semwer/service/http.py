"""HTTP+JSON surface over the challenge service.

Endpoints:
    POST /v1/submissions              multipart (team_id + file) or JSON body
    GET  /v1/submissions/{id}
    GET  /v1/leaderboard/public       Test1 ranking
    GET  /v1/leaderboard/private      Test2 ranking (bearer admin token)
    POST /v1/admin/teams              register a team (admin)
    POST /v1/admin/conclude           close the challenge (admin)

Test2 numbers never appear in any response until the challenge concludes.
"""
from __future__ import annotations

from fastapi import FastAPI, File, Form, Header, Request, UploadFile
from fastapi.responses import JSONResponse

from ..errors import (
    AlreadyConcludedError,
    DuplicateUtterancesError,
    MissingUtterancesError,
    RateLimitedError,
    SemwerError,
    UnauthorizedError,
    UnknownTeamError,
)
from ..jsonl import MalformedLineError
from .core import ChallengeService, HalfScores, LeaderboardEntry, Submission

_ERROR_STATUS = {
    UnknownTeamError: 403,
    UnauthorizedError: 401,
    RateLimitedError: 429,
    AlreadyConcludedError: 409,
    MissingUtterancesError: 422,
    DuplicateUtterancesError: 422,
    MalformedLineError: 422,
}


def _error_payload(exc: SemwerError) -> dict:
    payload: dict = {"error": type(exc).__name__, "detail": str(exc)}
    if isinstance(exc, MissingUtterancesError):
        payload["missing"] = exc.missing[:50]
    if isinstance(exc, DuplicateUtterancesError):
        payload["duplicates"] = exc.duplicates[:50]
    if isinstance(exc, MalformedLineError):
        payload["line"] = exc.lineno
    return payload


def _bearer(header_value: str | None) -> str:
    if not header_value:
        return ""
    if header_value.lower().startswith("bearer "):
        return header_value[7:]
    return header_value


def _half_view(scores: HalfScores | None) -> dict | None:
    if scores is None:
        return None
    return {
        "wer": scores.wer,
        "semscore": scores.semscore,
        "total_n_star": scores.total_n_star,
    }


def _submission_view(submission: Submission, include_private: bool) -> dict:
    view = {
        "submission_id": submission.submission_id,
        "team_id": submission.team_id,
        "created_at": submission.created_at,
        "status": submission.status,
        "content_hash": submission.content_hash,
        "test1": _half_view(submission.test1),
    }
    if submission.failure_reason:
        view["failure_reason"] = submission.failure_reason
    view["test2"] = _half_view(submission.test2) if include_private else None
    return view


def _entry_view(entry: LeaderboardEntry, rank: int) -> dict:
    return {
        "rank": rank,
        "team_id": entry.team_id,
        "best_wer": entry.best_wer,
        "best_semscore": entry.best_semscore,
        "best_wer_submission_id": entry.best_wer_submission_id,
        "best_semscore_submission_id": entry.best_semscore_submission_id,
    }


def create_app(service: ChallengeService) -> FastAPI:
    app = FastAPI(title="semwer challenge service")

    @app.exception_handler(SemwerError)
    async def handle_semwer_error(request: Request, exc: SemwerError):
        status = _ERROR_STATUS.get(type(exc), 400)
        return JSONResponse(status_code=status, content=_error_payload(exc))

    @app.post("/v1/submissions")
    async def create_submission(
        request: Request,
        team_id: str | None = Form(default=None),
        file: UploadFile | None = File(default=None),
    ):
        if file is not None:
            content = (await file.read()).decode("utf-8")
            team = team_id or ""
        else:
            body = await request.json()
            team = body.get("team_id", "")
            content = body.get("hypotheses", "")
        submission_id = service.submit(team, content)
        return JSONResponse(
            status_code=202,
            content={"submission_id": submission_id, "status": "Queued"},
        )

    @app.get("/v1/submissions/{submission_id}")
    async def get_submission(submission_id: str):
        submission = service.get_submission(submission_id)
        if submission is None:
            return JSONResponse(
                status_code=404,
                content={"error": "NotFound", "detail": "unknown submission"},
            )
        return _submission_view(submission, include_private=service.concluded)

    @app.get("/v1/leaderboard/public")
    async def public_leaderboard():
        entries = service.public_leaderboard()
        return {
            "leaderboard": "public",
            "half": "Test1",
            "entries": [_entry_view(e, i + 1) for i, e in enumerate(entries)],
        }

    @app.get("/v1/leaderboard/private")
    async def private_leaderboard(authorization: str | None = Header(default=None)):
        entries = service.private_leaderboard(_bearer(authorization))
        return {
            "leaderboard": "private",
            "half": "Test2",
            "concluded": service.concluded,
            "entries": [_entry_view(e, i + 1) for i, e in enumerate(entries)],
        }

    @app.post("/v1/admin/teams")
    async def register_team(
        request: Request, authorization: str | None = Header(default=None)
    ):
        body = await request.json()
        service.register_team(body["team_id"], _bearer(authorization))
        return {"team_id": body["team_id"], "registered": True}

    @app.post("/v1/admin/conclude")
    async def conclude(authorization: str | None = Header(default=None)):
        service.conclude(_bearer(authorization))
        return {"concluded": True}

    return app
