#!/usr/bin/env python3
"""Score the canonical example pair: lower WER does not mean better meaning.

Against the reference "how do you spell exercise", one hypothesis keeps more
words but loses the meaning; the other drops words but keeps it. WER prefers
the first. A semantic backend that understands meaning prefers the second;
the in-process stub used here is plain token overlap, so it tracks WER --
run the scorer sidecar and point RemoteBackend at it to see the flip.
"""
from semwer import (
    ReferencePair,
    ScorerWeights,
    StubBackend,
    normalize_hypothesis,
    score_soundex,
    utterance_semscore,
    utterance_wer,
)

REFERENCE = "how do you spell exercise"
HYPOTHESES = [
    "how do you feel exercise",    # 1 substitution, meaning lost
    "how to spell exercise",       # 2 edits, meaning kept
]


def main() -> None:
    ref_tokens = normalize_hypothesis(REFERENCE)
    refs = ReferencePair(ref_tokens, ref_tokens)
    weights = ScorerWeights()           # (0.40, 0.28, 0.32)
    backend = StubBackend()             # token-overlap stand-in; a neural
                                        # sidecar plugs in via RemoteBackend

    print(f"reference: {REFERENCE}")
    print(f"weights  : alpha={weights.alpha} beta={weights.beta} gamma={weights.gamma}\n")
    for hyp_text in HYPOTHESES:
        hyp = normalize_hypothesis(hyp_text)
        wer = utterance_wer(refs, hyp)
        sem = utterance_semscore(refs, hyp, weights, backend)
        phonetic = score_soundex(ref_tokens, hyp)
        print(f"hypothesis: {hyp_text}")
        print(f"  WER      : {wer.wer * 100:.2f}%  (N* = {wer.n_star})")
        print(f"  SemScore : {sem.semscore * 100:.2f}%  (stub backend)")
        print(f"  phonetic : {phonetic:.4f}")
        print()

    print("capping: a hypothesis four times too long still reports 100%")
    runaway = utterance_wer(ReferencePair(("A",), ("A",)), ("A", "B", "C", "D"))
    print(f"  raw 300% -> reported {runaway.wer * 100:.0f}%, N* stays {runaway.n_star}")


if __name__ == "__main__":
    main()
