"""Phonetic similarity: Soundex codes compared with Jaro-Winkler.

Each token is reduced to a classic four-character Soundex code; the code
sequences of reference and hypothesis are joined into single strings and
compared with Jaro-Winkler similarity, which keeps the score order-sensitive
and lets it degrade gracefully under insertions and deletions.
"""
from __future__ import annotations

from typing import Sequence

from .errors import EmptyReferenceError, NonAlphabeticError

_SOUNDEX_DIGITS = {}
for _letters, _digit in (
    ("BFPV", "1"),
    ("CGJKQSXZ", "2"),
    ("DT", "3"),
    ("L", "4"),
    ("MN", "5"),
    ("R", "6"),
):
    for _ch in _letters:
        _SOUNDEX_DIGITS[_ch] = _digit

SENTINEL_CODE = "Z000"
_CODE_SEPARATOR = " "


def soundex(word: str) -> str:
    """Classic American Soundex code: first letter plus three digits.

    Vowels and Y separate equal digit classes (coded twice); H and W do not
    (coded once). The first letter takes part in the collapsing rule.
    Apostrophes and digits are ignored; a token with no letters at all
    raises NonAlphabeticError.
    """
    letters = [c for c in word.upper() if "A" <= c <= "Z"]
    if not letters:
        raise NonAlphabeticError(f"no encodable letter in token {word!r}")
    first = letters[0]
    digits: list[str] = []
    prev = _SOUNDEX_DIGITS.get(first)
    for ch in letters[1:]:
        if ch in "AEIOUY":
            prev = None
            continue
        if ch in "HW":
            continue
        code = _SOUNDEX_DIGITS[ch]
        if code != prev:
            digits.append(code)
            prev = code
        if len(digits) >= 3:
            break
    return first + "".join(digits).ljust(3, "0")


def jaro(a: str, b: str) -> float:
    """Jaro similarity with the standard match window and transposition count."""
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    window = max(len(a), len(b)) // 2 - 1
    if window < 0:
        window = 0
    b_used = [False] * len(b)
    a_matched: list[str] = []
    for i, ch in enumerate(a):
        lo = max(0, i - window)
        hi = min(len(b), i + window + 1)
        for j in range(lo, hi):
            if not b_used[j] and b[j] == ch:
                b_used[j] = True
                a_matched.append(ch)
                break
    m = len(a_matched)
    if m == 0:
        return 0.0
    b_matched = [b[j] for j in range(len(b)) if b_used[j]]
    transpositions = sum(x != y for x, y in zip(a_matched, b_matched)) / 2
    return (m / len(a) + m / len(b) + (m - transpositions) / m) / 3


def jaro_winkler(a: str, b: str, prefix_scale: float = 0.1, max_prefix: int = 4) -> float:
    """Jaro similarity with the Winkler common-prefix bonus."""
    base = jaro(a, b)
    prefix = 0
    for ca, cb in zip(a, b):
        if ca != cb or prefix == max_prefix:
            break
        prefix += 1
    return base + prefix * prefix_scale * (1.0 - base)


def _encode_tokens(tokens: Sequence[str]) -> str:
    codes = []
    for token in tokens:
        try:
            codes.append(soundex(token))
        except NonAlphabeticError:
            continue  # skip unencodable tokens rather than poisoning the string
    if not codes and tokens:
        codes = [SENTINEL_CODE]  # the whole utterance had no encodable letter
    return _CODE_SEPARATOR.join(codes)


def score_soundex(ref: Sequence[str], hyp: Sequence[str]) -> float:
    """Phonetic similarity of two token sequences in [0, 1]."""
    if not ref:
        raise EmptyReferenceError("cannot score against an empty reference")
    return jaro_winkler(_encode_tokens(ref), _encode_tokens(hyp))
