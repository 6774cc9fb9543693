"""Weighted semantic score and regression-based weight fitting.

The utterance score is a weighted sum of three components in [0, 1]: an NLI
entailment score and an embedding-similarity F1 score (both from a scorer
backend) plus the native phonetic score. Both reference variants are scored
and the higher total wins. Weights default to (0.40, 0.28, 0.32) and can be
refit from human ratings by ordinary least squares with k-fold
cross-validation as a diagnostic.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .backends import ScorePair, ScorerBackend
from .errors import (
    BothReferencesEmptyError,
    EmptyBatchError,
    RankDeficientError,
    TooFewSamplesError,
)
from .normalize import ReferencePair, render
from .phonetic import score_soundex

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ComponentScores:
    """The three component scores, each clamped to [0, 1]."""

    nli: float
    bert: float
    soundex: float


@dataclass(frozen=True)
class ScorerWeights:
    """Mixing weights for (nli, bert, soundex)."""

    alpha: float = 0.40
    beta: float = 0.28
    gamma: float = 0.32

    def combine(self, components: ComponentScores) -> float:
        return (
            self.alpha * components.nli
            + self.beta * components.bert
            + self.gamma * components.soundex
        )


DEFAULT_WEIGHTS = ScorerWeights()


@dataclass(frozen=True)
class UtteranceSem:
    """One utterance's semantic score against its better reference variant."""

    semscore: float
    chosen_j: int
    components: ComponentScores
    sem_by_ref: tuple[float | None, float | None] = (None, None)


@dataclass(frozen=True)
class RatedPair:
    """A human-rated hypothesis/reference pair; rating rescaled to [0, 1]."""

    hyp: tuple[str, ...]
    ref: tuple[str, ...]
    rating: float


@dataclass(frozen=True)
class RatedComponents:
    """A rating attached to precomputed component scores."""

    components: ComponentScores
    rating: float


@dataclass(frozen=True)
class FitReport:
    """Full-data OLS weights plus per-fold cross-validation diagnostics."""

    weights: ScorerWeights
    fold_mse: tuple[float, ...]
    fold_r2: tuple[float, ...]
    n_samples: int
    folds: int
    seed: int


def _clamp(value: float) -> float:
    return 0.0 if value < 0.0 else 1.0 if value > 1.0 else value


def sem_components(
    ref: Sequence[str], hyp: Sequence[str], backend: ScorerBackend
) -> ComponentScores:
    """Score one pair: nli/bert from the backend, soundex natively."""
    scores = batch_components([(tuple(ref), tuple(hyp))], backend)
    return scores[0]


def batch_components(
    pairs: Sequence[tuple[tuple[str, ...], tuple[str, ...]]],
    backend: ScorerBackend,
) -> list[ComponentScores]:
    """Score many (ref tokens, hyp tokens) pairs with one backend round trip."""
    requests = [
        ScorePair(id=str(i), reference=render(ref), hypothesis=render(hyp))
        for i, (ref, hyp) in enumerate(pairs)
    ]
    raw = backend.score_pairs(requests)
    clamped = 0
    out = []
    for (ref, hyp), (nli, bert) in zip(pairs, raw):
        if not (0.0 <= nli <= 1.0) or not (0.0 <= bert <= 1.0):
            clamped += 1
        out.append(
            ComponentScores(
                nli=_clamp(nli),
                bert=_clamp(bert),
                soundex=_clamp(score_soundex(ref, hyp)),
            )
        )
    if clamped:
        logger.warning(
            "clamped backend scores outside [0,1] for %d/%d pairs", clamped, len(pairs)
        )
    return out


def utterance_semscore(
    refs: ReferencePair,
    hyp: Sequence[str],
    weights: ScorerWeights = DEFAULT_WEIGHTS,
    backend: ScorerBackend | None = None,
) -> UtteranceSem:
    """Weighted score against both reference variants; the higher total wins.

    Ties go to j=1 (without disfluencies). Raises BothReferencesEmptyError
    when neither variant has tokens.
    """
    if backend is None:
        raise ValueError("a scorer backend is required")
    return batch_semscore([(refs, tuple(hyp))], weights, backend)[0]


def batch_semscore(
    items: Sequence[tuple[ReferencePair, tuple[str, ...]]],
    weights: ScorerWeights,
    backend: ScorerBackend,
) -> list[UtteranceSem]:
    """Score a batch of (references, hypothesis) items in one backend call."""
    requests: list[tuple[tuple[str, ...], tuple[str, ...]]] = []
    slots: list[tuple[int | None, int | None]] = []
    for refs, hyp in items:
        if not refs.with_disfluencies and not refs.without_disfluencies:
            raise BothReferencesEmptyError("both reference variants are empty")
        indices: list[int | None] = [None, None]
        for j in (0, 1):
            variant = refs.variant(j)
            if variant:
                indices[j] = len(requests)
                requests.append((variant, hyp))
        slots.append((indices[0], indices[1]))
    component_rows = batch_components(requests, backend)

    results = []
    for (refs, hyp), (slot0, slot1) in zip(items, slots):
        per_ref: list[float | None] = [None, None]
        per_components: list[ComponentScores | None] = [None, None]
        for j, slot in ((0, slot0), (1, slot1)):
            if slot is not None:
                per_components[j] = component_rows[slot]
                per_ref[j] = weights.combine(component_rows[slot])
        if per_ref[1] is not None and (per_ref[0] is None or per_ref[1] >= per_ref[0]):
            chosen = 1
        else:
            chosen = 0
        results.append(
            UtteranceSem(
                semscore=per_ref[chosen],
                chosen_j=chosen,
                components=per_components[chosen],
                sem_by_ref=(per_ref[0], per_ref[1]),
            )
        )
    return results


def corpus_semscore(items: Iterable[UtteranceSem]) -> float:
    """Unweighted mean of utterance scores (semantics is utterance-level)."""
    scores = [item.semscore for item in items]
    if not scores:
        raise EmptyBatchError("no utterances to aggregate")
    return float(np.mean(scores))


def fit_weights(
    data: Sequence[RatedComponents],
    folds: int = 5,
    seed: int = 0,
) -> FitReport:
    """Fit (alpha, beta, gamma) by OLS of ratings on the component scores.

    No intercept, unconstrained signs. The returned weights come from the
    full-data solve; the k-fold split (shuffled by ``seed``) only produces
    the held-out MSE / R-squared diagnostics.
    """
    if len(data) < folds:
        raise TooFewSamplesError(
            f"{len(data)} samples cannot support {folds}-fold cross-validation"
        )
    X = np.array(
        [[row.components.nli, row.components.bert, row.components.soundex] for row in data]
    )
    y = np.array([row.rating for row in data])
    if np.linalg.matrix_rank(X) < 3:
        raise RankDeficientError("component matrix has rank < 3")

    coef, *_ = np.linalg.lstsq(X, y, rcond=None)

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(data))
    fold_indices = np.array_split(order, folds)
    fold_mse = []
    fold_r2 = []
    for held_out in fold_indices:
        train = np.setdiff1d(order, held_out, assume_unique=True)
        w, *_ = np.linalg.lstsq(X[train], y[train], rcond=None)
        pred = X[held_out] @ w
        residuals = y[held_out] - pred
        mse = float(np.mean(residuals**2))
        ss_tot = float(np.sum((y[held_out] - np.mean(y[held_out])) ** 2))
        ss_res = float(np.sum(residuals**2))
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else float("nan")
        fold_mse.append(mse)
        fold_r2.append(r2)

    return FitReport(
        weights=ScorerWeights(alpha=float(coef[0]), beta=float(coef[1]), gamma=float(coef[2])),
        fold_mse=tuple(fold_mse),
        fold_r2=tuple(fold_r2),
        n_samples=len(data),
        folds=folds,
        seed=seed,
    )
