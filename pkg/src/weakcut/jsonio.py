"""Canonical JSON helpers and file loading with located parse errors."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .errors import ParseError


def canonical_dumps(obj) -> str:
    """Deterministic JSON text: sorted keys, no whitespace, ASCII only."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def pretty_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def digest(obj) -> str:
    return hashlib.sha256(canonical_dumps(obj).encode("ascii")).hexdigest()


def read_json(path):
    """Return ``(data, text)``; malformed JSON raises ParseError with its line."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", str(path)) from exc
    try:
        return json.loads(text), text
    except json.JSONDecodeError as exc:
        snippet = exc.doc[exc.pos:exc.pos + 20] if exc.doc else ""
        raise ParseError(exc.msg, str(path), exc.lineno, snippet) from exc
