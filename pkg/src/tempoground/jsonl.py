"""JSON Lines helpers with fixed-precision number rendering.

The stdlib encoder prints ``12.0`` for a float; manifests need ``12.00``.
Wrap a value in :class:`Fixed` to control its fractional digits.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Union

from .errors import DataError


class Fixed(float):
    """A float rendered with a fixed number of fractional digits."""

    digits = 2

    def __new__(cls, value: float, digits: int = 2):
        obj = super().__new__(cls, value)
        obj.digits = digits
        return obj


def seconds(value: float) -> Fixed:
    return Fixed(round(float(value), 2), 2)


def encode(value: Any) -> str:
    if isinstance(value, Fixed):
        text = f"{float(value):.{value.digits}f}"
        return "0." + "0" * value.digits if text.startswith("-") and float(text) == 0 else text
    if isinstance(value, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {encode(v)}" for k, v in value.items()) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(encode(v) for v in value) + "]"
    return json.dumps(value, ensure_ascii=False)


def write_jsonl(path: Union[str, Path], rows: Iterable[Dict[str, Any]]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(encode(row) + "\n")
            n += 1
    return n


def iter_jsonl(path: Union[str, Path]) -> Iterator[Dict[str, Any]]:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from exc


def read_jsonl(path: Union[str, Path]) -> List[Dict[str, Any]]:
    return list(iter_jsonl(path))
