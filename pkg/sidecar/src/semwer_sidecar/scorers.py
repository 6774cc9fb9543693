"""Scorer implementations behind the wire protocol.

Two interchangeable scorers produce the (nli, bert) pair for a
reference/hypothesis:

* ``NeuralScorer`` — a sequence-classification NLI model (entailment
  probability with the reference as premise) plus token-level greedy
  matching of contextual embeddings (BERTScore-style F1). Needs pretrained
  checkpoints.
* ``HeuristicScorer`` — a deterministic, dependency-free equivalent for
  environments without model weights: content-weighted soft token matching,
  where closed-class function words carry little weight and near-miss tokens
  get partial credit from character-bigram overlap.

Both clamp to [0, 1] and are deterministic for a fixed configuration.
"""
from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from typing import Sequence

logger = logging.getLogger(__name__)

DEFAULT_NLI_MODEL = "roberta-large-mnli"
DEFAULT_EMBED_MODEL = "sentence-transformers/all-MiniLM-L6-v2"

# closed-class words: cheap to enumerate, stable across domains
FUNCTION_WORDS = frozenset(
    """
    a an the this that these those my your his her its our their
    i you he she it we they me him us them
    am is are was were be been being do does did done
    have has had having can could will would shall should may might must
    to of in on at by for with from about as into over after under
    and or but nor so yet if then than because while
    not no yes um uh oh ah well just like really very
    what when where who whom whose why how which
    """.split()
)


def _clamp(value: float) -> float:
    return 0.0 if value < 0.0 else 1.0 if value > 1.0 else value


@dataclass(frozen=True)
class ScorerInfo:
    kind: str
    nli_model_id: str
    embed_model_id: str
    device: str  # "cpu" or "accelerator"


class HeuristicScorer:
    """Deterministic lexical-semantic stand-in, no pretrained weights.

    The entailment score asks how much of the reference content survives in
    the hypothesis (weighted soft recall); the similarity score is the
    weighted soft F1 of the two token bags.
    """

    info = ScorerInfo(
        kind="heuristic",
        nli_model_id="heuristic-content-entailment-v1",
        embed_model_id="heuristic-bigram-similarity-v1",
        device="cpu",
    )

    @staticmethod
    def _weight(token: str) -> float:
        return 0.2 if token.lower() in FUNCTION_WORDS else 1.0

    @staticmethod
    def _bigrams(token: str) -> set[str]:
        padded = f"^{token.lower()}$"
        return {padded[i : i + 2] for i in range(len(padded) - 1)}

    @classmethod
    def _token_similarity(cls, a: str, b: str) -> float:
        if a.lower() == b.lower():
            return 1.0
        ab, bb = cls._bigrams(a), cls._bigrams(b)
        union = len(ab | bb)
        if union == 0:
            return 0.0
        # partial credit stays strictly below an exact match
        return 0.8 * len(ab & bb) / union

    @classmethod
    def _coverage(cls, covered: Sequence[str], by: Sequence[str]) -> float:
        """Weighted soft recall of ``covered`` tokens inside ``by``."""
        if not covered:
            return 1.0 if not by else 0.0
        if not by:
            return 0.0
        total = sum(cls._weight(t) for t in covered)
        hit = sum(
            cls._weight(t) * max(cls._token_similarity(t, o) for o in by)
            for t in covered
        )
        return hit / total

    def score_pair(self, reference: str, hypothesis: str) -> tuple[float, float]:
        ref = reference.split()
        hyp = hypothesis.split()
        if not ref and not hyp:
            return 1.0, 1.0
        recall = self._coverage(ref, hyp)      # reference content kept?
        precision = self._coverage(hyp, ref)   # hypothesis invented content?
        nli = recall * (0.5 + 0.5 * precision)  # entailment tolerates omissions
        bert = (
            2 * precision * recall / (precision + recall)
            if precision + recall > 0
            else 0.0
        )
        return _clamp(nli), _clamp(bert)

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[tuple[float, float]]:
        return [self.score_pair(ref, hyp) for ref, hyp in pairs]


class NeuralScorer:
    """Transformers-backed scorer: NLI entailment + BERTScore-style F1.

    Inference runs under a lock (serialized per device) in no-grad mode so
    repeated identical requests score identically.
    """

    def __init__(
        self,
        nli_model_id: str = DEFAULT_NLI_MODEL,
        embed_model_id: str = DEFAULT_EMBED_MODEL,
    ):
        import torch
        from transformers import (
            AutoModel,
            AutoModelForSequenceClassification,
            AutoTokenizer,
        )

        self._torch = torch
        self._lock = threading.Lock()
        self._nli_tokenizer = AutoTokenizer.from_pretrained(nli_model_id)
        self._nli_model = AutoModelForSequenceClassification.from_pretrained(nli_model_id)
        self._nli_model.eval()
        self._embed_tokenizer = AutoTokenizer.from_pretrained(embed_model_id)
        self._embed_model = AutoModel.from_pretrained(embed_model_id)
        self._embed_model.eval()

        labels = {
            label.lower(): index
            for index, label in self._nli_model.config.id2label.items()
        }
        self._entail_index = next(
            (index for name, index in labels.items() if "entail" in name), None
        )
        if self._entail_index is None:
            raise ValueError(f"{nli_model_id} exposes no entailment label")

        device = "accelerator" if torch.cuda.is_available() else "cpu"
        self.info = ScorerInfo(
            kind="neural",
            nli_model_id=nli_model_id,
            embed_model_id=embed_model_id,
            device=device,
        )

    def _entailment(self, reference: str, hypothesis: str) -> float:
        encoded = self._nli_tokenizer(
            reference, hypothesis, return_tensors="pt", truncation=True
        )
        logits = self._nli_model(**encoded).logits[0]
        probs = self._torch.softmax(logits, dim=-1)
        return float(probs[self._entail_index])

    def _token_embeddings(self, text: str):
        encoded = self._embed_tokenizer(text, return_tensors="pt", truncation=True)
        hidden = self._embed_model(**encoded).last_hidden_state[0]
        normalized = hidden / hidden.norm(dim=-1, keepdim=True).clamp(min=1e-9)
        return normalized

    def _bertscore_f1(self, reference: str, hypothesis: str) -> float:
        if not reference.strip() or not hypothesis.strip():
            return 1.0 if reference.strip() == hypothesis.strip() else 0.0
        ref_vectors = self._token_embeddings(reference)
        hyp_vectors = self._token_embeddings(hypothesis)
        similarity = ref_vectors @ hyp_vectors.T
        recall = float(similarity.max(dim=1).values.mean())
        precision = float(similarity.max(dim=0).values.mean())
        if precision + recall <= 0:
            return 0.0
        return 2 * precision * recall / (precision + recall)

    def score_pair(self, reference: str, hypothesis: str) -> tuple[float, float]:
        with self._lock, self._torch.no_grad():
            nli = self._entailment(reference, hypothesis)
            bert = self._bertscore_f1(reference, hypothesis)
        return _clamp(nli), _clamp(bert)

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[tuple[float, float]]:
        return [self.score_pair(ref, hyp) for ref, hyp in pairs]


def create_scorer(
    mode: str = "auto",
    nli_model_id: str = DEFAULT_NLI_MODEL,
    embed_model_id: str = DEFAULT_EMBED_MODEL,
):
    """Build the configured scorer; ``auto`` falls back to the heuristic."""
    if mode == "heuristic":
        return HeuristicScorer()
    if mode == "neural":
        return NeuralScorer(nli_model_id, embed_model_id)
    if mode != "auto":
        raise ValueError(f"unknown scorer mode {mode!r}")
    try:
        return NeuralScorer(nli_model_id, embed_model_id)
    except Exception as exc:  # missing weights, no network, no torch
        logger.warning("neural scorer unavailable (%s); using heuristic", exc)
        return HeuristicScorer()
