"""Timestamp-interleaved prompt layout.

An audio clip becomes an ordered run of ``timestamp: t seconds`` markers,
each followed by a placeholder for the audio-encoder frames that start
inside that marker's span, and finally the instruction carrying the query::

    timestamp: 0 seconds ⟨AUDIO:0:25⟩
    timestamp: 1 seconds ⟨AUDIO:1:25⟩
    This is a sequence of audio stream. Your task is ... The query is: dog barks.

Placeholders carry explicit frame counts so a downstream encoder can check
alignment without touching audio. Long inputs are encoded in fixed chunks
(30 s by default); every chunk restarts its own frame grid but marker times
stay global.

All arithmetic is done on an integer microsecond lattice, so counts such
as ``ceil(2.0 / 0.04)`` are exact.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError
from .intervals import TimeWindow

DEFAULT_GRANULARITY_S = 1.0
DEFAULT_FRAME_MS = 40.0
DEFAULT_CHUNK_S = 30.0

SYSTEM_PROMPT = "You are a helpful assistant."
_PREAMBLE = "This is a sequence of audio stream. "
INSTRUCTIONS = {
    "existence": _PREAMBLE + "Your task is to identify whether the sound event in the query occurs. "
                             "The query is: {query}.",
    "grounding": _PREAMBLE + "Your task is to identify the temporal window (start and end timestamps) "
                             "when the given query appears. The query is: {query}.",
}
YES, NO = "Yes.", "No."


class InstructionKind(str, enum.Enum):
    EXISTENCE = "existence"
    GROUNDING = "grounding"


def _us(seconds: float) -> int:
    return int(round(seconds * 1_000_000))


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def _is_integral(x: float) -> bool:
    return _us(x) % 1_000_000 == 0


def format_timestamp(t: float, style: str = "answer", granularity_s: float = DEFAULT_GRANULARITY_S) -> str:
    """Render a time either as a prompt marker or as an answer value.

    >>> format_timestamp(1.0, "marker")
    'timestamp: 1 seconds'
    >>> format_timestamp(3.2)
    '3.20'
    """
    if not t >= 0:
        raise DomainError(f"timestamp must be non-negative, got {t}")
    if style == "answer":
        return f"{t:.2f}"
    if style == "marker":
        if _is_integral(granularity_s) and _is_integral(t):
            value = str(_us(t) // 1_000_000)
        else:
            value = f"{t:.2f}"
        return f"timestamp: {value} seconds"
    raise DomainError(f"unknown timestamp style {style!r}")


def window_phrase(window: TimeWindow) -> str:
    return f"From {format_timestamp(window.start_s)} seconds to {format_timestamp(window.end_s)} seconds"


def answer_phrase(windows: Iterable[TimeWindow]) -> str:
    """Grounding answer text; several windows are ordered by start and joined with ', and '."""
    windows = sorted(windows)
    if not windows:
        raise DomainError("a grounding answer needs at least one window")
    return ", and ".join(window_phrase(w) for w in windows)


def chunk_boundaries(duration_s: float, chunk_s: float = DEFAULT_CHUNK_S) -> List[TimeWindow]:
    """Contiguous encoder chunks ``[0, c), [c, 2c), ...`` with a partial tail."""
    if not chunk_s > 0:
        raise DomainError(f"chunk_s must be positive, got {chunk_s}")
    if not duration_s > 0:
        raise DomainError(f"duration must be positive, got {duration_s}")
    d, c = _us(duration_s), _us(chunk_s)
    return [TimeWindow(s / 1e6, min(s + c, d) / 1e6) for s in range(0, d, c)]


@dataclass(frozen=True)
class SequenceTemplate:
    duration_s: float
    granularity_s: float
    frame_ms: float
    blocks: Tuple[Tuple[str, int], ...]
    marker_times: Tuple[float, ...]
    chunking: Tuple[TimeWindow, ...]
    instruction_text: str = ""
    query_text: str = ""

    @property
    def total_frames(self) -> int:
        return sum(n for _, n in self.blocks)

    @property
    def frame_counts(self) -> List[int]:
        return [n for _, n in self.blocks]


def layout(duration_s: float, granularity_s: float = DEFAULT_GRANULARITY_S,
           frame_ms: float = DEFAULT_FRAME_MS, chunk_s: Optional[float] = None) -> SequenceTemplate:
    """Lay out markers and frame blocks for a clip of ``duration_s`` seconds.

    Block ``i`` holds every encoder frame whose start time falls in
    ``[i*g, (i+1)*g)``. With ``chunk_s`` set, each chunk contributes
    ``ceil(chunk_len / frame)`` frames on its own grid; without it the whole
    clip is one chunk.
    """
    if not (duration_s > 0 and granularity_s > 0 and frame_ms > 0):
        raise DomainError(
            f"duration, granularity and frame size must be positive "
            f"(got {duration_s}, {granularity_s}, {frame_ms})"
        )
    d, g, f = _us(duration_s), _us(granularity_s), int(round(frame_ms * 1000))
    if g <= 0 or f <= 0 or d <= 0:
        raise DomainError("parameters fall below the microsecond lattice")
    chunks = chunk_boundaries(duration_s, chunk_s) if chunk_s else [TimeWindow(0.0, d / 1e6)]

    starts = []
    for ch in chunks:
        c0, c1 = _us(ch.start_s), _us(ch.end_s)
        starts.append(c0 + f * np.arange(_ceil_div(c1 - c0, f), dtype=np.int64))
    starts = np.concatenate(starts)

    n_markers = _ceil_div(d, g)
    counts = np.bincount(starts // g, minlength=n_markers)
    times = tuple(i * g / 1e6 for i in range(n_markers))
    blocks = tuple(
        (format_timestamp(t, "marker", granularity_s), int(n)) for t, n in zip(times, counts)
    )
    return SequenceTemplate(
        duration_s=d / 1e6, granularity_s=g / 1e6, frame_ms=f / 1000,
        blocks=blocks, marker_times=times, chunking=tuple(chunks),
    )


def audio_placeholder(index: int, frame_count: int) -> str:
    return f"⟨AUDIO:{index}:{frame_count}⟩"


def instruction(kind: InstructionKind | str, query: str) -> str:
    kind = InstructionKind(kind)
    if not query or not query.strip():
        raise DomainError("query must be non-empty")
    return INSTRUCTIONS[kind.value].format(query=query)


def render(template: SequenceTemplate, kind: InstructionKind | str, query: str) -> str:
    """Prompt text: marker/placeholder lines in time order, then the instruction."""
    text = instruction(kind, query)
    lines = [f"{marker} {audio_placeholder(i, n)}" for i, (marker, n) in enumerate(template.blocks)]
    lines.append(text)
    return "\n".join(lines)


@dataclass(frozen=True)
class LossMask:
    """Loss is taken on target positions only; every prompt position is masked.

    Lengths are in whatever unit the caller tokenises into. The defaults
    recorded on a :class:`TrainingRecord` count characters.
    """
    prompt_length: int
    target_length: int

    @property
    def masked_count(self) -> int:
        return self.prompt_length

    def as_array(self) -> np.ndarray:
        return np.concatenate([np.zeros(self.prompt_length, bool), np.ones(self.target_length, bool)])

    @classmethod
    def for_tokens(cls, prompt_tokens: Sequence, target_tokens: Sequence) -> "LossMask":
        return cls(len(prompt_tokens), len(target_tokens))


@dataclass(frozen=True)
class TrainingRecord:
    id: str
    kind: InstructionKind
    query: str
    prompt: str
    target: str
    template: SequenceTemplate = field(repr=False)

    @property
    def loss_mask(self) -> LossMask:
        return LossMask(len(self.prompt), len(self.target))

    def to_json(self) -> dict:
        from .jsonl import Fixed, seconds

        return {
            "id": self.id,
            "kind": self.kind.value,
            "prompt": self.prompt,
            "target": self.target,
            "frames": self.template.frame_counts,
            "granularity": Fixed(self.template.granularity_s, 2),
            "chunking": [[seconds(w.start_s), seconds(w.end_s)] for w in self.template.chunking],
        }


def training_record(sample, kind: InstructionKind | str, granularity_s: float = DEFAULT_GRANULARITY_S, *,
                    polarity: str = "positive", frame_ms: float = DEFAULT_FRAME_MS,
                    chunk_s: Optional[float] = DEFAULT_CHUNK_S, record_id: Optional[str] = None) -> TrainingRecord:
    """Build one prompt/target pair for ``sample`` (a GroundingSample).

    Existence records answer ``Yes.`` for the positive query and ``No.`` for
    the negative one; grounding records answer with the window phrase.
    """
    kind = InstructionKind(kind)
    if polarity not in ("positive", "negative"):
        raise DomainError(f"polarity must be 'positive' or 'negative', got {polarity!r}")
    if polarity == "negative":
        if not sample.negative_query:
            raise DomainError(f"sample {sample.id} has no negative query")
        query = sample.negative_query
    else:
        query = sample.positive_query

    if kind is InstructionKind.EXISTENCE:
        target = YES if polarity == "positive" else NO
    elif polarity == "negative":
        target = NO
    else:
        if not sample.windows:
            raise DomainError(f"sample {sample.id} has no windows to ground")
        target = answer_phrase(sample.windows)

    template = layout(sample.duration_s, granularity_s, frame_ms, chunk_s)
    prompt = render(template, kind, query)
    template = replace(template, instruction_text=instruction(kind, query), query_text=query)
    rid = record_id or f"{sample.id}:{kind.value}:{polarity[:3]}"
    return TrainingRecord(rid, kind, query, prompt, target, template)


def quadruplet_records(sample, granularity_s: float = DEFAULT_GRANULARITY_S, *, frame_ms: float = DEFAULT_FRAME_MS,
                       chunk_s: Optional[float] = DEFAULT_CHUNK_S,
                       negative_grounding: bool = False) -> List[TrainingRecord]:
    """The three (optionally four) training records derived from one sample."""
    if not sample.negative_query:
        raise DomainError(f"sample {sample.id} has no negative query")
    kw = dict(frame_ms=frame_ms, chunk_s=chunk_s)
    out = [
        training_record(sample, InstructionKind.EXISTENCE, granularity_s, polarity="positive", **kw),
        training_record(sample, InstructionKind.EXISTENCE, granularity_s, polarity="negative", **kw),
        training_record(sample, InstructionKind.GROUNDING, granularity_s, polarity="positive", **kw),
    ]
    if negative_grounding:
        out.append(training_record(sample, InstructionKind.GROUNDING, granularity_s, polarity="negative", **kw))
    return out
