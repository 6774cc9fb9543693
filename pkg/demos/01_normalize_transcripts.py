#!/usr/bin/env python3
"""Walk through the transcript normalization rules on annotated examples.

Raw annotator transcripts carry several markup layers; each example below
shows what survives into the two reference variants.
"""
from semwer import NormalizeOptions, normalize
from semwer.errors import EmptyResultError, UnbalancedMarkupError

EXAMPLES = [
    "[coughs] hello there.",          # bracketed events vanish (no audio)
    "{g:world} says don't",           # annotator guesses unwrap
    "(um) I (want) need it",          # disfluencies drive the two variants
    "he said xxx loudly",             # unknown-word symbols become UNK
    "the FBI has 42 agents",          # abbreviations split, numbers verbalize
    "a well-known (uh) place",        # hyphens split; apostrophes survive
    "[laughs] (um)",                  # can normalize to nothing at all
    "unbalanced [markup",             # and malformed markup is an error
]


def main() -> None:
    for raw in EXAMPLES:
        print(f"raw : {raw!r}")
        try:
            pair = normalize(raw)
        except EmptyResultError:
            print("      -> both variants empty (utterance would be excluded)\n")
            continue
        except UnbalancedMarkupError as exc:
            print(f"      -> parse error at column {exc.position}\n")
            continue
        print(f"  j=0 (with disfluencies)   : {' '.join(pair.with_disfluencies)}")
        print(f"  j=1 (without disfluencies): {' '.join(pair.without_disfluencies) or '<empty>'}")
        print()

    print("verbalization is optional:")
    options = NormalizeOptions(verbalize=False)
    pair = normalize("the FBI has 42 agents", options)
    print(f"  verbalize=False: {' '.join(pair.with_disfluencies)}")


if __name__ == "__main__":
    main()
