"""Transcript-markup normalization into dual references.

Raw annotated transcripts carry square-bracketed non-speech events, ``{g:word}``
guess markup, unknown-word symbols, and parenthesized disfluency/reparandum
spans. Normalization turns one raw transcript into two uppercase token lists:
one that keeps the parenthesized spans (``with_disfluencies``) and one that
deletes them (``without_disfluencies``).

Rules are applied in a fixed order:

1. delete ``[...]`` spans entirely (no audio exists for them)
2. rewrite ``{g:w}`` to ``w``
3. map unknown-word symbols to the literal token ``UNK``
4. verbalize digit runs and space-split all-caps abbreviations (optional,
   default on; a deliberately minimal stand-in for a full verbalizer)
5. build the two variants from the parenthesized spans
6. strip punctuation except intra-word apostrophes; hyphens split words
7. uppercase
8. collapse whitespace into single-space token boundaries
"""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

from .errors import EmptyResultError, UnbalancedMarkupError

_OPENERS = "[{("
_CLOSERS = "]})"
_MATCHING = {"]": "[", "}": "{", ")": "("}

_GUESS_RE = re.compile(r"\{g:([^{}]*)\}", re.IGNORECASE)
_DIGIT_RUN_RE = re.compile(r"[0-9]+")
_WORD_RUN_RE = re.compile(r"[A-Za-z']+")

_ONES = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen",
]
_TENS = ["", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy",
         "eighty", "ninety"]

DEFAULT_UNKNOWN_SYMBOLS = ("xxx", "<unk>", "???")


@dataclass(frozen=True)
class NormalizeOptions:
    """Knobs for the normalization pipeline.

    verbalize: convert digit runs to English words and space-split all-caps
        abbreviations. When off, digits pass through unchanged.
    unknown_symbols: standalone symbols rewritten to the ``UNK`` token,
        matched case-insensitively.
    """

    verbalize: bool = True
    unknown_symbols: tuple[str, ...] = DEFAULT_UNKNOWN_SYMBOLS


DEFAULT_OPTIONS = NormalizeOptions()


@dataclass(frozen=True)
class RawTranscript:
    """One utterance's annotator transcript, markup included."""

    text: str


@dataclass(frozen=True)
class ReferencePair:
    """The two normalized references for one utterance.

    ``with_disfluencies`` keeps the words of every parenthesized span;
    ``without_disfluencies`` deletes those spans, so it is never longer.
    """

    with_disfluencies: tuple[str, ...]
    without_disfluencies: tuple[str, ...]

    def variant(self, j: int) -> tuple[str, ...]:
        """Reference variant by index: j=0 with, j=1 without disfluencies."""
        if j == 0:
            return self.with_disfluencies
        if j == 1:
            return self.without_disfluencies
        raise IndexError(f"reference variant must be 0 or 1, got {j}")


def check_balanced(text: str) -> None:
    """Raise UnbalancedMarkupError unless every bracket nests properly."""
    stack: list[tuple[str, int]] = []
    for pos, ch in enumerate(text):
        if ch in _OPENERS:
            stack.append((ch, pos))
        elif ch in _CLOSERS:
            if not stack or stack[-1][0] != _MATCHING[ch]:
                raise UnbalancedMarkupError(pos)
            stack.pop()
    if stack:
        raise UnbalancedMarkupError(stack[-1][1])


def _ascii_fold(text: str) -> str:
    # Decompose accents, unify quote/dash variants, drop what is left of
    # non-ASCII so the output alphabet stays [A-Z0-9'].
    text = text.replace("’", "'").replace("‘", "'")
    text = text.replace("–", "-").replace("—", "-")
    text = unicodedata.normalize("NFKD", text)
    return text.encode("ascii", "ignore").decode("ascii")


def _delete_bracket_spans(text: str) -> str:
    out = []
    depth = 0
    for ch in text:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        elif depth == 0:
            out.append(ch)
    return "".join(out)


def _unwrap_guess_markup(text: str) -> str:
    # Inside-out so nested guesses unwrap completely.
    while True:
        text, n = _GUESS_RE.subn(r"\1", text)
        if not n:
            return text


def _map_unknown_symbols(text: str, symbols: tuple[str, ...]) -> str:
    for sym in symbols:
        if not sym:
            continue
        pattern = re.compile(
            r"(?<![A-Za-z0-9'])" + re.escape(sym) + r"(?![A-Za-z0-9'])",
            re.IGNORECASE,
        )
        text = pattern.sub("UNK", text)
    return text


def _number_words(run: str) -> str:
    # Composed reading up to six digits; otherwise digit by digit. A run with
    # a leading zero is read digit by digit so "007" keeps its zeros.
    if len(run) > 6 or (len(run) > 1 and run[0] == "0"):
        return " ".join(_ONES[int(d)] for d in run)
    return _small_number_words(int(run))


def _small_number_words(n: int) -> str:
    if n < 20:
        return _ONES[n]
    if n < 100:
        tens, ones = divmod(n, 10)
        return _TENS[tens] + (" " + _ONES[ones] if ones else "")
    if n < 1000:
        hundreds, rest = divmod(n, 100)
        words = _ONES[hundreds] + " hundred"
        return words + (" " + _small_number_words(rest) if rest else "")
    thousands, rest = divmod(n, 1000)
    words = _small_number_words(thousands) + " thousand"
    return words + (" " + _small_number_words(rest) if rest else "")


def _verbalize(text: str) -> str:
    # Abbreviation splitting only applies to annotator text (mixed case); an
    # all-uppercase input is indistinguishable from already-normalized output
    # and must stay a fixed point.
    had_lower = any(c.islower() for c in text)
    text = _DIGIT_RUN_RE.sub(lambda m: " " + _number_words(m.group()) + " ", text)
    if not had_lower:
        return text

    def split_caps(m: re.Match) -> str:
        word = m.group()
        if re.fullmatch(r"[A-Z]{2,}", word) and word != "UNK":
            return " ".join(word)
        return word

    return _WORD_RUN_RE.sub(split_caps, text)


def _strip_paren_markup(text: str, drop_spans: bool) -> str:
    if not drop_spans:
        return text.replace("(", " ").replace(")", " ")
    out = []
    depth = 0
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0:
            out.append(ch)
    return "".join(out)


def _strip_punctuation(text: str) -> str:
    # Callers ASCII-fold first, so isalnum() only ever admits [A-Za-z0-9].
    text = text.replace("-", " ")
    out = []
    for i, ch in enumerate(text):
        if ch.isalnum() or ch.isspace():
            out.append(ch)
        elif ch == "'":
            intra = (
                i > 0 and text[i - 1].isalnum()
                and i + 1 < len(text) and text[i + 1].isalnum()
            )
            if intra:
                out.append(ch)
    return "".join(out)


def _finalize(text: str) -> tuple[str, ...]:
    return tuple(_strip_punctuation(text).upper().split())


def normalize(
    raw: RawTranscript | str,
    options: NormalizeOptions = DEFAULT_OPTIONS,
) -> ReferencePair:
    """Normalize one raw annotated transcript into its dual references.

    Raises UnbalancedMarkupError on malformed markup and EmptyResultError
    when both variants come out empty (caller decides whether to exclude
    the utterance).
    """
    text = raw.text if isinstance(raw, RawTranscript) else raw
    check_balanced(text)
    text = _ascii_fold(text)
    text = _delete_bracket_spans(text)
    text = _unwrap_guess_markup(text)
    text = _map_unknown_symbols(text, options.unknown_symbols)
    if options.verbalize:
        text = _verbalize(text)
    with_disfl = _finalize(_strip_paren_markup(text, drop_spans=False))
    without_disfl = _finalize(_strip_paren_markup(text, drop_spans=True))
    if not with_disfl and not without_disfl:
        raise EmptyResultError("transcript normalized to zero tokens")
    return ReferencePair(with_disfl, without_disfl)


def normalize_hypothesis(text: str) -> tuple[str, ...]:
    """Normalize an ASR hypothesis: punctuation strip, uppercase, tokenize.

    Hypotheses carry no annotator markup, so only the final cleanup steps
    apply. May return an empty tuple.
    """
    return _finalize(_ascii_fold(text))


def render(tokens: tuple[str, ...] | list[str]) -> str:
    """Join normalized tokens back into a single-space text line."""
    return " ".join(tokens)
