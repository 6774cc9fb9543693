"""Service state machine, persistence, and scoring engine.

Persistence is an append-only JSON-lines event log plus a blob directory for
raw hypothesis files; the whole state is rebuilt by replaying the log at
startup, which keeps a competition auditable without a database. Submissions
are scored against both test halves by a bounded worker pool; Test2 numbers
stay private until the challenge is concluded.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..align import corpus_wer
from ..backends import RemoteBackend, ScorerBackend, StubBackend
from ..corpus import Etiology, Split
from ..errors import (
    AlreadyConcludedError,
    DuplicateUtterancesError,
    MissingUtterancesError,
    RateLimitedError,
    SemwerError,
    UnauthorizedError,
    UnknownTeamError,
)
from ..jsonl import MalformedLineError, iter_records
from ..normalize import ReferencePair, normalize_hypothesis
from ..scoring import ReferenceEntry, score_batch
from ..semantic import ScorerWeights, corpus_semscore

logger = logging.getLogger(__name__)

_DAY_SECONDS = 86400.0


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: str
    dataset_path: str
    admin_token: str = "change-me"
    scorer_backend: str = "stub"  # "stub" or a sidecar base URL
    rate_limit_per_day: int = 5
    workers: int = 2
    weights: ScorerWeights = field(default_factory=ScorerWeights)
    listen_host: str = "127.0.0.1"
    listen_port: int = 8080

    ENV_PREFIX = "SEMWER_"

    @classmethod
    def load(cls, path: str | Path | None = None, env: dict | None = None) -> "ServiceConfig":
        """Read a JSON config file, then apply SEMWER_* environment overrides."""
        raw: dict = {}
        if path is not None:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        env = dict(os.environ if env is None else env)
        for key in (
            "data_dir", "dataset_path", "admin_token", "scorer_backend",
            "rate_limit_per_day", "workers", "listen_host", "listen_port",
        ):
            value = env.get(cls.ENV_PREFIX + key.upper())
            if value is not None:
                raw[key] = value
        weights = raw.pop("weights", None)
        config = cls(
            data_dir=str(raw["data_dir"]),
            dataset_path=str(raw["dataset_path"]),
            admin_token=str(raw.get("admin_token", "change-me")),
            scorer_backend=str(raw.get("scorer_backend", "stub")),
            rate_limit_per_day=int(raw.get("rate_limit_per_day", 5)),
            workers=int(raw.get("workers", 2)),
            listen_host=str(raw.get("listen_host", "127.0.0.1")),
            listen_port=int(raw.get("listen_port", 8080)),
        )
        if weights is not None:
            config = replace(
                config,
                weights=ScorerWeights(
                    alpha=float(weights["alpha"]),
                    beta=float(weights["beta"]),
                    gamma=float(weights["gamma"]),
                ),
            )
        return config


@dataclass(frozen=True)
class HalfScores:
    """Corpus-level numbers for one test half."""

    wer: float
    semscore: float
    total_n_star: int


@dataclass
class Submission:
    submission_id: str
    team_id: str
    created_at: float
    content_hash: str
    blob_name: str
    status: str = "Queued"  # Queued | Scoring | Done | Failed
    failure_reason: str | None = None
    test1: HalfScores | None = None
    test2: HalfScores | None = None


@dataclass(frozen=True)
class LeaderboardEntry:
    team_id: str
    best_wer: float
    best_semscore: float
    best_wer_submission_id: str
    best_semscore_submission_id: str


class ChallengeDataset:
    """The scoring side of a challenge: references and split membership.

    Loaded from JSON-lines records {utterance_id, split, unshared, ref_with,
    ref_without, speaker_id?, etiology?}; only unshared Test1/Test2 rows are
    scored.
    """

    def __init__(self, entries: dict[Split, list[ReferenceEntry]]):
        self.entries = entries
        self.expected_ids = {
            e.utterance_id for half in (Split.TEST1, Split.TEST2) for e in entries[half]
        }

    @classmethod
    def load(cls, path: str | Path) -> "ChallengeDataset":
        entries: dict[Split, list[ReferenceEntry]] = {Split.TEST1: [], Split.TEST2: []}
        with open(path, encoding="utf-8") as handle:
            for lineno, row in iter_records(handle):
                try:
                    split = Split(row["split"])
                    if split not in (Split.TEST1, Split.TEST2) or not row.get("unshared"):
                        continue
                    entry = ReferenceEntry(
                        utterance_id=row["utterance_id"],
                        refs=ReferencePair(
                            tuple(row["ref_with"]), tuple(row["ref_without"])
                        ),
                        speaker_id=row.get("speaker_id", ""),
                        etiology=Etiology(row.get("etiology", "Unknown")),
                    )
                except (KeyError, TypeError, ValueError) as exc:
                    raise SemwerError(f"dataset line {lineno}: {exc}") from exc
                entries[split].append(entry)
        # a scorable challenge needs unshared utterances in both halves;
        # failing here beats failing inside every submission later
        for split in (Split.TEST1, Split.TEST2):
            if not entries[split]:
                raise SemwerError(
                    f"dataset has no unshared {split.value} utterances; "
                    "nothing to score"
                )
        return cls(entries)


def _parse_hypothesis_file(text: str) -> dict[str, str]:
    """Parse submission JSONL into {utterance_id: hypothesis text}."""
    out: dict[str, str] = {}
    duplicates: list[str] = []
    for lineno, row in iter_records(text.splitlines()):
        if "utterance_id" not in row or "text" not in row:
            raise MalformedLineError(lineno, "record needs utterance_id and text")
        utt_id = str(row["utterance_id"])
        if utt_id in out:
            duplicates.append(utt_id)
        out[utt_id] = str(row["text"])
    if duplicates:
        raise DuplicateUtterancesError(duplicates)
    return out


class ChallengeService:
    """Submission intake, asynchronous scoring, and the two leaderboards.

    All state mutations happen under one lock (single writer); reads build
    snapshots under the same lock and format them outside it. The scorer
    backend is fixed at construction so every submission is comparable.
    """

    def __init__(self, config: ServiceConfig, backend: ScorerBackend | None = None):
        self.config = config
        self.dataset = ChallengeDataset.load(config.dataset_path)
        if backend is not None:
            self.backend = backend
        elif config.scorer_backend == "stub":
            self.backend = StubBackend()
        else:
            self.backend = RemoteBackend(config.scorer_backend)

        self._lock = threading.Lock()
        self._teams: set[str] = set()
        self._submissions: dict[str, Submission] = {}
        self._concluded = False

        self._data_dir = Path(config.data_dir)
        self._blob_dir = self._data_dir / "blobs"
        self._blob_dir.mkdir(parents=True, exist_ok=True)
        self._log_path = self._data_dir / "events.jsonl"

        self._pool = ThreadPoolExecutor(
            max_workers=max(1, config.workers), thread_name_prefix="scorer"
        )
        self._pending: list = []

        self._replay()
        self._requeue_unfinished()

    # -- persistence --------------------------------------------------------

    def _append_event(self, event: dict) -> None:
        # caller holds the lock; fsync keeps the log authoritative on crash
        with open(self._log_path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(event, ensure_ascii=False) + "\n")
            handle.flush()
            os.fsync(handle.fileno())

    def _replay(self) -> None:
        if not self._log_path.exists():
            return
        with open(self._log_path, encoding="utf-8") as handle:
            for _, event in iter_records(handle):
                self._apply_event(event)

    def _apply_event(self, event: dict) -> None:
        kind = event["type"]
        if kind == "team_registered":
            self._teams.add(event["team_id"])
        elif kind == "submission_received":
            self._submissions[event["submission_id"]] = Submission(
                submission_id=event["submission_id"],
                team_id=event["team_id"],
                created_at=event["ts"],
                content_hash=event["content_hash"],
                blob_name=event["blob_name"],
            )
        elif kind == "submission_status":
            submission = self._submissions[event["submission_id"]]
            submission.status = event["status"]
            submission.failure_reason = event.get("reason")
        elif kind == "submission_scored":
            submission = self._submissions[event["submission_id"]]
            submission.status = "Done"
            submission.test1 = HalfScores(**event["test1"])
            submission.test2 = HalfScores(**event["test2"])
        elif kind == "concluded":
            self._concluded = True
        else:
            logger.warning("ignoring unknown event type %r", kind)

    def _requeue_unfinished(self) -> None:
        for submission in self._submissions.values():
            if submission.status in ("Queued", "Scoring"):
                submission.status = "Queued"
                self._enqueue(submission.submission_id)

    # -- team + submission intake -------------------------------------------

    def register_team(self, team_id: str, admin_token: str) -> None:
        self._require_admin(admin_token)
        with self._lock:
            if team_id not in self._teams:
                self._append_event(
                    {"type": "team_registered", "team_id": team_id, "ts": time.time()}
                )
                self._teams.add(team_id)

    def submit(self, team_id: str, hypothesis_text: str) -> str:
        """Validate and persist a submission; scoring runs asynchronously."""
        with self._lock:
            if self._concluded:
                raise AlreadyConcludedError("challenge concluded; submissions closed")
            if team_id not in self._teams:
                raise UnknownTeamError(f"team {team_id!r} is not registered")

        hypotheses = _parse_hypothesis_file(hypothesis_text)
        missing = sorted(self.dataset.expected_ids - hypotheses.keys())
        if missing:
            raise MissingUtterancesError(missing)
        # ids outside the unshared test halves (e.g. shared or dev utterances
        # from a full-corpus decode) are accepted and ignored

        now = time.time()
        with self._lock:
            if self._concluded:
                raise AlreadyConcludedError("challenge concluded; submissions closed")
            recent = [
                s for s in self._submissions.values()
                if s.team_id == team_id and now - s.created_at < _DAY_SECONDS
            ]
            if len(recent) >= self.config.rate_limit_per_day:
                raise RateLimitedError(
                    f"limit is {self.config.rate_limit_per_day} submissions per day"
                )

            submission_id = uuid.uuid4().hex
            content_hash = hashlib.sha256(hypothesis_text.encode("utf-8")).hexdigest()
            blob_name = f"{submission_id}.jsonl"
            (self._blob_dir / blob_name).write_text(hypothesis_text, encoding="utf-8")
            self._append_event(
                {
                    "type": "submission_received",
                    "submission_id": submission_id,
                    "team_id": team_id,
                    "ts": now,
                    "content_hash": content_hash,
                    "blob_name": blob_name,
                }
            )
            self._submissions[submission_id] = Submission(
                submission_id=submission_id,
                team_id=team_id,
                created_at=now,
                content_hash=content_hash,
                blob_name=blob_name,
            )
        self._enqueue(submission_id)
        return submission_id

    def _enqueue(self, submission_id: str) -> None:
        self._pending.append(self._pool.submit(self._score_submission, submission_id))

    # -- scoring -------------------------------------------------------------

    def _score_submission(self, submission_id: str) -> None:
        try:
            with self._lock:
                submission = self._submissions[submission_id]
                submission.status = "Scoring"
                self._append_event(
                    {
                        "type": "submission_status",
                        "submission_id": submission_id,
                        "status": "Scoring",
                        "ts": time.time(),
                    }
                )
                blob_name = submission.blob_name
            text = (self._blob_dir / blob_name).read_text(encoding="utf-8")
            hypotheses = {
                utt_id: normalize_hypothesis(raw)
                for utt_id, raw in _parse_hypothesis_file(text).items()
            }
            halves = {}
            per_utterance = {}
            for half in (Split.TEST1, Split.TEST2):
                scored = score_batch(
                    self.dataset.entries[half],
                    hypotheses,
                    self.config.weights,
                    self.backend,
                )
                overall = corpus_wer([s.wer for s in scored])
                halves[half] = HalfScores(
                    wer=overall.wer,
                    semscore=corpus_semscore([s.sem for s in scored]),
                    total_n_star=overall.total_n_star,
                )
                per_utterance[half.value] = [
                    {
                        "utterance_id": s.utterance_id,
                        "wer": s.wer.wer,
                        "n_star": s.wer.n_star,
                        "semscore": s.sem.semscore,
                    }
                    for s in scored
                ]
            with self._lock:
                self._append_event(
                    {
                        "type": "submission_scored",
                        "submission_id": submission_id,
                        "ts": time.time(),
                        "test1": halves[Split.TEST1].__dict__,
                        "test2": halves[Split.TEST2].__dict__,
                        "per_utterance": per_utterance,
                    }
                )
                submission = self._submissions[submission_id]
                submission.status = "Done"
                submission.test1 = halves[Split.TEST1]
                submission.test2 = halves[Split.TEST2]
        except Exception as exc:  # scoring must never take the service down
            logger.exception("scoring failed for %s", submission_id)
            with self._lock:
                self._append_event(
                    {
                        "type": "submission_status",
                        "submission_id": submission_id,
                        "status": "Failed",
                        "reason": str(exc),
                        "ts": time.time(),
                    }
                )
                submission = self._submissions[submission_id]
                submission.status = "Failed"
                submission.failure_reason = str(exc)

    def wait_idle(self, timeout: float = 60.0) -> None:
        """Block until every queued scoring job has finished (tests, shutdown)."""
        deadline = time.time() + timeout
        while self._pending:
            future = self._pending.pop(0)
            future.result(timeout=max(0.0, deadline - time.time()))

    def close(self) -> None:
        self._pool.shutdown(wait=True)

    # -- queries --------------------------------------------------------------

    def _require_admin(self, token: str) -> None:
        if token != self.config.admin_token:
            raise UnauthorizedError("admin credential required")

    @property
    def concluded(self) -> bool:
        with self._lock:
            return self._concluded

    def get_submission(self, submission_id: str) -> Submission | None:
        with self._lock:
            submission = self._submissions.get(submission_id)
            return _copy_submission(submission) if submission else None

    def conclude(self, admin_token: str) -> None:
        """Close submissions and make the private leaderboard public. One-way."""
        self._require_admin(admin_token)
        with self._lock:
            if self._concluded:
                raise AlreadyConcludedError("challenge already concluded")
            self._append_event({"type": "concluded", "ts": time.time()})
            self._concluded = True

    def _best_entries(self, half: str) -> list[LeaderboardEntry]:
        # caller holds the lock
        by_team: dict[str, list[Submission]] = {}
        for submission in self._submissions.values():
            if submission.status == "Done":
                by_team.setdefault(submission.team_id, []).append(submission)
        entries = []
        for team_id, submissions in by_team.items():
            def scores(s: Submission) -> HalfScores:
                return s.test1 if half == "test1" else s.test2

            best_wer = min(submissions, key=lambda s: (scores(s).wer, s.created_at))
            best_sem = max(submissions, key=lambda s: (scores(s).semscore, -s.created_at))
            entries.append(
                LeaderboardEntry(
                    team_id=team_id,
                    best_wer=scores(best_wer).wer,
                    best_semscore=scores(best_sem).semscore,
                    best_wer_submission_id=best_wer.submission_id,
                    best_semscore_submission_id=best_sem.submission_id,
                )
            )
        # ascending best WER; ties: higher SemScore, then earlier submission
        created = {s.submission_id: s.created_at for s in self._submissions.values()}
        entries.sort(
            key=lambda e: (
                e.best_wer,
                -e.best_semscore,
                created[e.best_wer_submission_id],
                e.team_id,
            )
        )
        return entries

    def public_leaderboard(self) -> list[LeaderboardEntry]:
        """Teams ranked by best Test1 WER."""
        with self._lock:
            return self._best_entries("test1")

    def private_leaderboard(self, admin_token: str | None = None) -> list[LeaderboardEntry]:
        """Test2 ranking; admin-only until the challenge concludes."""
        with self._lock:
            concluded = self._concluded
        if not concluded:
            self._require_admin(admin_token or "")
        with self._lock:
            return self._best_entries("test2")


def _copy_submission(submission: Submission) -> Submission:
    """Shallow copy so callers outside the lock see a stable snapshot."""
    return Submission(**submission.__dict__)
