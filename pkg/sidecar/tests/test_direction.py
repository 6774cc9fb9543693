"""The canonical example pair must rank correctly through the sidecar.

Reference "how do you spell exercise": the word-preserving hypothesis loses
the meaning, the word-dropping one keeps it. Combined with the native
phonetic score under the default weights, the semantic score must prefer
"how to spell exercise" even though its WER is worse.
"""
from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from semwer import ScorerWeights, score_soundex
from semwer_sidecar import HeuristicScorer, SidecarConfig, create_app
from semwer_sidecar.scorers import create_scorer

REFERENCE = "HOW DO YOU SPELL EXERCISE"
HYP_WORDY = "HOW DO YOU FEEL EXERCISE"     # WER 20%, meaning lost
HYP_MEANING = "HOW TO SPELL EXERCISE"      # WER 40%, meaning kept


def semscore_via(client: TestClient, hypothesis: str) -> float:
    response = client.post(
        "/v1/score",
        json={"pairs": [
            {"id": "x", "reference": REFERENCE, "hypothesis": hypothesis}
        ]},
    )
    assert response.status_code == 200
    entry = response.json()["scores"][0]
    weights = ScorerWeights()
    phonetic = score_soundex(REFERENCE.split(), hypothesis.split())
    return (
        weights.alpha * entry["nli"]
        + weights.beta * entry["bert"]
        + weights.gamma * phonetic
    )


def test_direction_with_served_scorer():
    """Whatever scorer the sidecar hosts must rank the pair correctly."""
    client = TestClient(
        create_app(SidecarConfig(), preloaded_scorer=create_scorer("auto"))
    )
    info = client.get("/v1/health").json()["model_info"]
    wordy = semscore_via(client, HYP_WORDY)
    meaningful = semscore_via(client, HYP_MEANING)
    print(f"scorer={info['scorer']}: "
          f"SemScore(meaning kept)={meaningful:.4f} > SemScore(words kept)={wordy:.4f}")
    assert meaningful > wordy


def test_direction_with_heuristic_scorer():
    client = TestClient(
        create_app(SidecarConfig(scorer="heuristic"),
                   preloaded_scorer=HeuristicScorer())
    )
    assert semscore_via(client, HYP_MEANING) > semscore_via(client, HYP_WORDY)


@pytest.mark.neural
def test_direction_with_neural_scorer():
    """Strict neural variant; needs downloadable pretrained checkpoints."""
    try:
        scorer = create_scorer("neural")
    except Exception as exc:
        pytest.skip(f"neural checkpoints unavailable in this environment: {exc}")
    client = TestClient(create_app(SidecarConfig(scorer="neural"),
                                   preloaded_scorer=scorer))
    assert semscore_via(client, HYP_MEANING) > semscore_via(client, HYP_WORDY)
