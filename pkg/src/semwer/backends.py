"""Pluggable semantic-scorer backends.

The NLI entailment score and the embedding-similarity F1 score come from a
backend: either the in-process stub (deterministic token overlap, good for
tests and dry runs) or a remote sidecar speaking the HTTP+JSON wire protocol:

    POST {base_url}/v1/score   {"pairs": [{"id", "reference", "hypothesis"}]}
        -> {"scores": [{"id", "nli", "bert"}]}
    GET  {base_url}/v1/health  -> {"status", "model_info"}

The remote client batches pairs, bounds concurrent in-flight requests, and
retries transport failures (requests are idempotent).
"""
from __future__ import annotations

import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Protocol, Sequence

import httpx

from .errors import BackendMalformedResponseError, BackendUnavailableError


@dataclass(frozen=True)
class ScorePair:
    """One reference/hypothesis pair submitted for semantic scoring."""

    id: str
    reference: str
    hypothesis: str


class ScorerBackend(Protocol):
    """Anything that maps score pairs to per-pair (nli, bert) values."""

    def score_pairs(self, pairs: Sequence[ScorePair]) -> list[tuple[float, float]]:
        ...


def token_f1(reference: str, hypothesis: str) -> float:
    """Bag-of-tokens F1 overlap: 1.0 for identical, 0.0 for disjoint."""
    ref_tokens = reference.split()
    hyp_tokens = hypothesis.split()
    if not ref_tokens and not hyp_tokens:
        return 1.0
    if not ref_tokens or not hyp_tokens:
        return 0.0
    overlap = sum((Counter(ref_tokens) & Counter(hyp_tokens)).values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(hyp_tokens)
    recall = overlap / len(ref_tokens)
    return 2 * precision * recall / (precision + recall)


class StubBackend:
    """Deterministic local stand-in: nli = bert = token-level F1 overlap."""

    def score_pairs(self, pairs: Sequence[ScorePair]) -> list[tuple[float, float]]:
        out = []
        for pair in pairs:
            f1 = token_f1(pair.reference, pair.hypothesis)
            out.append((f1, f1))
        return out


class RemoteBackend:
    """HTTP client for a scorer sidecar.

    Splits work into batches of ``batch_size``, runs at most ``max_in_flight``
    batches concurrently, retries each batch up to ``retries`` extra times on
    transport errors and 5xx answers.
    """

    def __init__(
        self,
        base_url: str,
        timeout: float = 30.0,
        retries: int = 2,
        batch_size: int = 32,
        max_in_flight: int = 4,
        retry_backoff: float = 0.5,
        transport: httpx.BaseTransport | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self.batch_size = max(1, batch_size)
        self.max_in_flight = max(1, max_in_flight)
        self.retry_backoff = retry_backoff
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def close(self) -> None:
        self._client.close()

    def health(self) -> dict:
        try:
            response = self._client.get(self.base_url + "/v1/health")
        except httpx.HTTPError as exc:
            raise BackendUnavailableError(f"health check failed: {exc}") from exc
        if response.status_code != 200:
            raise BackendUnavailableError(
                f"health endpoint answered {response.status_code}"
            )
        payload = response.json()
        if "status" not in payload or "model_info" not in payload:
            raise BackendMalformedResponseError("health payload missing fields")
        return payload

    def score_pairs(self, pairs: Sequence[ScorePair]) -> list[tuple[float, float]]:
        if not pairs:
            return []
        batches = [
            list(pairs[i : i + self.batch_size])
            for i in range(0, len(pairs), self.batch_size)
        ]
        if len(batches) == 1:
            return self._score_batch(batches[0])
        results: list[list[tuple[float, float]]] = [[] for _ in batches]
        with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
            for index, scored in enumerate(pool.map(self._score_batch, batches)):
                results[index] = scored
        return [item for batch in results for item in batch]

    def _score_batch(self, batch: list[ScorePair]) -> list[tuple[float, float]]:
        body = {
            "pairs": [
                {"id": p.id, "reference": p.reference, "hypothesis": p.hypothesis}
                for p in batch
            ]
        }
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.retry_backoff * attempt)
            try:
                response = self._client.post(self.base_url + "/v1/score", json=body)
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if response.status_code >= 500:
                last_error = BackendUnavailableError(
                    f"scorer answered {response.status_code}"
                )
                continue
            if response.status_code != 200:
                raise BackendMalformedResponseError(
                    f"scorer rejected the request with {response.status_code}: "
                    f"{response.text[:200]}"
                )
            return self._parse_scores(response, batch)
        raise BackendUnavailableError(
            f"scorer unreachable after {self.retries + 1} attempts: {last_error}"
        )

    @staticmethod
    def _parse_scores(
        response: httpx.Response, batch: list[ScorePair]
    ) -> list[tuple[float, float]]:
        try:
            payload = response.json()
            scores = payload["scores"]
            by_id = {}
            for entry in scores:
                by_id[entry["id"]] = (float(entry["nli"]), float(entry["bert"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise BackendMalformedResponseError(f"bad score payload: {exc}") from exc
        if len(by_id) != len(scores):
            raise BackendMalformedResponseError("duplicate ids in score payload")
        missing = [p.id for p in batch if p.id not in by_id]
        if missing:
            raise BackendMalformedResponseError(
                f"scores missing for ids: {missing[:5]}"
            )
        return [by_id[p.id] for p in batch]
