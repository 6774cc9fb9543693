"""Line-oriented JSON helpers used by the file interfaces."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable, Iterator

from .errors import SemwerError


class MalformedLineError(SemwerError):
    """A JSON-lines record failed to parse; carries the 1-based line number."""

    def __init__(self, lineno: int, reason: str):
        self.lineno = lineno
        self.reason = reason
        super().__init__(f"line {lineno}: {reason}")


def iter_records(lines: Iterable[str]) -> Iterator[tuple[int, dict]]:
    """Yield (lineno, record) for non-blank lines; raise on bad JSON."""
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            record = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise MalformedLineError(lineno, f"invalid JSON ({exc.msg})") from exc
        if not isinstance(record, dict):
            raise MalformedLineError(lineno, "record is not a JSON object")
        yield lineno, record


def read_jsonl(path: str | Path) -> list[dict]:
    with open(path, encoding="utf-8") as handle:
        return [record for _, record in iter_records(handle)]


def write_jsonl(path: str | Path, records: Iterable[dict[str, Any]]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def dump_line(record: dict[str, Any]) -> str:
    return json.dumps(record, ensure_ascii=False)
