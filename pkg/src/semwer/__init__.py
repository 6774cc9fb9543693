"""Evaluation stack for impaired-speech ASR challenges.

Normalizes annotated transcripts into dual references, scores hypotheses
with capped dual-reference WER and a weighted semantic score, fits the
semantic weights from human ratings, manages speaker-disjoint corpus splits
with unshared filtering, and hosts a public/private leaderboard service.
"""
from .align import (
    AlignmentCounts,
    CorpusWer,
    UtteranceWer,
    align_words,
    corpus_wer,
    utterance_wer,
)
from .backends import RemoteBackend, ScorePair, ScorerBackend, StubBackend, token_f1
from .corpus import (
    Etiology,
    Split,
    SplitAssignment,
    UtteranceRecord,
    load_manifest,
    mark_unshared,
    split_manifest,
)
from .normalize import (
    NormalizeOptions,
    RawTranscript,
    ReferencePair,
    normalize,
    normalize_hypothesis,
    render,
)
from .phonetic import jaro, jaro_winkler, score_soundex, soundex
from .report import (
    EvaluationReport,
    PreferenceBreakdown,
    ScoredUtterance,
    SystemComparison,
    build_report,
    compare_metric_pairs,
    compare_systems,
    pearson,
)
from .scoring import ReferenceEntry, check_id_alignment, score_batch
from .semantic import (
    ComponentScores,
    DEFAULT_WEIGHTS,
    FitReport,
    RatedComponents,
    RatedPair,
    ScorerWeights,
    UtteranceSem,
    batch_semscore,
    corpus_semscore,
    fit_weights,
    sem_components,
    utterance_semscore,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentCounts",
    "ComponentScores",
    "CorpusWer",
    "DEFAULT_WEIGHTS",
    "Etiology",
    "EvaluationReport",
    "FitReport",
    "NormalizeOptions",
    "PreferenceBreakdown",
    "RatedComponents",
    "RatedPair",
    "RawTranscript",
    "ReferenceEntry",
    "ReferencePair",
    "RemoteBackend",
    "ScorePair",
    "ScoredUtterance",
    "ScorerBackend",
    "ScorerWeights",
    "Split",
    "SplitAssignment",
    "StubBackend",
    "SystemComparison",
    "UtteranceRecord",
    "UtteranceSem",
    "UtteranceWer",
    "align_words",
    "batch_semscore",
    "build_report",
    "check_id_alignment",
    "compare_metric_pairs",
    "compare_systems",
    "corpus_semscore",
    "corpus_wer",
    "fit_weights",
    "jaro",
    "jaro_winkler",
    "load_manifest",
    "mark_unshared",
    "normalize",
    "normalize_hypothesis",
    "pearson",
    "render",
    "score_batch",
    "score_soundex",
    "sem_components",
    "soundex",
    "split_manifest",
    "token_f1",
    "utterance_semscore",
    "utterance_wer",
]
