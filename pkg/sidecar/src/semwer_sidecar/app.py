"""HTTP surface of the scorer sidecar.

    POST /v1/score   {"pairs": [{"id", "reference", "hypothesis"}]}
        -> {"scores": [{"id", "nli", "bert"}]}      (request order preserved)
    GET  /v1/health  -> {"status", "model_info"}

Answers 503 while models are still loading and 400 on malformed batches.
Large batches are processed in bounded micro-batches.
"""
from __future__ import annotations

import os
import threading
from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .scorers import create_scorer

ENV_PREFIX = "SIDECAR_"


@dataclass(frozen=True)
class SidecarConfig:
    scorer: str = "auto"            # auto | neural | heuristic
    nli_model_id: str | None = None
    embed_model_id: str | None = None
    max_batch: int = 32
    listen_host: str = "127.0.0.1"
    listen_port: int = 8090

    @classmethod
    def from_env(cls, env: dict | None = None) -> "SidecarConfig":
        env = dict(os.environ if env is None else env)

        def get(name: str, fallback):
            return env.get(ENV_PREFIX + name, fallback)

        return cls(
            scorer=get("SCORER", "auto"),
            nli_model_id=get("NLI_MODEL", None),
            embed_model_id=get("EMBED_MODEL", None),
            max_batch=int(get("MAX_BATCH", 32)),
            listen_host=get("HOST", "127.0.0.1"),
            listen_port=int(get("PORT", 8090)),
        )


def _bad_request(detail: str) -> JSONResponse:
    return JSONResponse(status_code=400, content={"error": "BadRequest", "detail": detail})


def _validate_pairs(body) -> list[tuple[str, str, str]] | str:
    """Return [(id, reference, hypothesis)] or an error message."""
    if not isinstance(body, dict) or "pairs" not in body:
        return "body must be an object with a 'pairs' list"
    pairs = body["pairs"]
    if not isinstance(pairs, list):
        return "'pairs' must be a list"
    out = []
    for index, pair in enumerate(pairs):
        if not isinstance(pair, dict):
            return f"pairs[{index}] is not an object"
        try:
            pair_id = pair["id"]
            reference = pair["reference"]
            hypothesis = pair["hypothesis"]
        except KeyError as exc:
            return f"pairs[{index}] is missing {exc.args[0]!r}"
        if not isinstance(pair_id, str) or not isinstance(reference, str) \
                or not isinstance(hypothesis, str):
            return f"pairs[{index}] fields must be strings"
        out.append((pair_id, reference, hypothesis))
    return out


def create_app(config: SidecarConfig | None = None, preloaded_scorer=None) -> FastAPI:
    config = config or SidecarConfig.from_env()
    app = FastAPI(title="semantic scorer sidecar")
    app.state.scorer = preloaded_scorer
    app.state.load_error = None

    kwargs = {}
    if config.nli_model_id:
        kwargs["nli_model_id"] = config.nli_model_id
    if config.embed_model_id:
        kwargs["embed_model_id"] = config.embed_model_id

    if preloaded_scorer is None:
        def load() -> None:
            try:
                app.state.scorer = create_scorer(config.scorer, **kwargs)
            except Exception as exc:  # surface the reason through /v1/health
                app.state.load_error = str(exc)

        threading.Thread(target=load, daemon=True).start()

    @app.get("/v1/health")
    async def health():
        scorer = app.state.scorer
        if scorer is None:
            status = "failed" if app.state.load_error else "loading"
            return JSONResponse(
                status_code=503,
                content={
                    "status": status,
                    "model_info": {"error": app.state.load_error},
                },
            )
        info = scorer.info
        return {
            "status": "ok",
            "model_info": {
                "scorer": info.kind,
                "nli_model_id": info.nli_model_id,
                "embed_model_id": info.embed_model_id,
                "device": info.device,
                "max_batch": config.max_batch,
            },
        }

    @app.post("/v1/score")
    async def score(request: Request):
        scorer = app.state.scorer
        if scorer is None:
            return JSONResponse(
                status_code=503,
                content={"error": "Loading", "detail": "models are not ready"},
            )
        try:
            body = await request.json()
        except Exception:
            return _bad_request("body is not valid JSON")
        validated = _validate_pairs(body)
        if isinstance(validated, str):
            return _bad_request(validated)

        scores = []
        for start in range(0, len(validated), config.max_batch):
            chunk = validated[start : start + config.max_batch]
            results = scorer.score_batch([(ref, hyp) for _, ref, hyp in chunk])
            for (pair_id, _, _), (nli, bert) in zip(chunk, results):
                scores.append({"id": pair_id, "nli": nli, "bert": bert})
        return {"scores": scores}

    return app


def main() -> None:
    import uvicorn

    config = SidecarConfig.from_env()
    uvicorn.run(create_app(config), host=config.listen_host, port=config.listen_port)


if __name__ == "__main__":
    main()
