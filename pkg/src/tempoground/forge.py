"""Synthetic grounding-corpus forge.

A forged sample is a short, trimmed foreground event dropped at a random
offset into a long background ambience. Because the insertion point and the
trimmed foreground length are chosen by us, the ground-truth window is
exact.

Source manifests are JSON Lines. Foreground entries::

    {"audio": "fg/0001.wav", "caption": "a dog barks twice", "query_type": "caption",
     "events": [[0.4, 1.1], [2.0, 2.6]], "source": "assl"}

``events`` (strong labels) selects interval-merge trimming; without it the
foreground is energy-trimmed. ``source`` defaults to the manifest file
stem. Background entries need only ``audio``. Relative paths resolve
against the manifest's directory.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import re
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from . import audio as ac
from .errors import DataError, DomainError, PoolExhaustedError
from .intervals import TimeWindow, measure
from .jsonl import Fixed, iter_jsonl, read_jsonl, seconds, write_jsonl
from .sequencer import NO, YES, answer_phrase

log = logging.getLogger(__name__)

PathLike = Union[str, Path]


# --- data model --------------------------------------------------------------

@dataclass(frozen=True)
class MixRecipe:
    insertion_offset_s: float
    fg_jitter_db: float
    bg_rel_db: float
    bg_subclip: TimeWindow
    trim_lead_s: float = 0.0
    seed: int = 0

    def to_json(self) -> dict:
        return {
            "seed": int(self.seed),
            "offset": seconds(self.insertion_offset_s),
            "fg_jitter_db": Fixed(self.fg_jitter_db, 4),
            "bg_rel_db": Fixed(self.bg_rel_db, 4),
            "bg_subclip": [seconds(self.bg_subclip.start_s), seconds(self.bg_subclip.end_s)],
            "trim_lead": seconds(self.trim_lead_s),
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "MixRecipe":
        return cls(
            insertion_offset_s=float(d["offset"]),
            fg_jitter_db=float(d["fg_jitter_db"]),
            bg_rel_db=float(d["bg_rel_db"]),
            bg_subclip=TimeWindow.from_pair(d["bg_subclip"]),
            trim_lead_s=float(d.get("trim_lead", 0.0)),
            seed=int(d["seed"]),
        )


@dataclass(frozen=True)
class GroundingSample:
    id: str
    audio_ref: str
    duration_s: float
    positive_query: str
    windows: Tuple[TimeWindow, ...] = ()
    negative_query: Optional[str] = None
    provenance: Optional[MixRecipe] = None
    query_type: str = "caption"

    def __post_init__(self):
        object.__setattr__(self, "windows", tuple(self.windows))
        if self.query_type not in ("caption", "label"):
            raise DomainError(f"query_type must be 'caption' or 'label', got {self.query_type!r}")
        for w in self.windows:
            if w.end_s > self.duration_s + 1e-9:
                raise DomainError(f"window {w.as_pair()} exceeds clip duration {self.duration_s}")

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "audio": self.audio_ref,
            "duration": seconds(self.duration_s),
            "query": self.positive_query,
            "query_type": self.query_type,
            "windows": [[seconds(w.start_s), seconds(w.end_s)] for w in self.windows],
            "negative_query": self.negative_query,
            "provenance": self.provenance.to_json() if self.provenance else None,
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "GroundingSample":
        prov = d.get("provenance")
        return cls(
            id=str(d["id"]),
            audio_ref=str(d["audio"]),
            duration_s=float(d["duration"]),
            positive_query=str(d["query"]),
            windows=tuple(TimeWindow.from_pair(w) for w in d.get("windows") or ()),
            negative_query=d.get("negative_query"),
            provenance=MixRecipe.from_json(prov) if prov else None,
            query_type=d.get("query_type", "caption"),
        )


@dataclass(frozen=True)
class CorpusStats:
    clip_count: int
    query_count: int
    mean_duration_s: float
    mean_window_s: float
    temporal_density: float
    zero_window_count: int = 0

    def to_json(self) -> dict:
        return {
            "clips": self.clip_count,
            "queries": self.query_count,
            "mean_duration_s": round(self.mean_duration_s, 4),
            "mean_window_s": round(self.mean_window_s, 4),
            "temporal_density": round(self.temporal_density, 6),
            "zero_window_samples": self.zero_window_count,
        }

    def table_row(self, name: str = "corpus") -> str:
        return (f"{name} | {self.clip_count} | {self.query_count} | "
                f"{self.mean_duration_s:.1f}s | {self.mean_window_s:.1f}s | {100 * self.temporal_density:.1f}%")


def write_manifest(path: PathLike, samples: Iterable[GroundingSample]) -> int:
    return write_jsonl(path, (s.to_json() for s in samples))


def read_manifest(path: PathLike) -> List[GroundingSample]:
    out = []
    for i, row in enumerate(iter_jsonl(path), 1):
        try:
            out.append(GroundingSample.from_json(row))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"{path}: line {i}: bad sample ({exc})") from exc
    return out


# --- seeds -------------------------------------------------------------------

def derive_seed(*parts) -> int:
    """Stable 64-bit seed from arbitrary printable parts (process-independent)."""
    h = hashlib.blake2b(repr(tuple(parts)).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


# --- trimming and recipes ----------------------------------------------------

def merge_strong_labels(intervals: Sequence[TimeWindow]) -> TimeWindow:
    """Span from the earliest onset to the latest offset of a clip's events."""
    if not intervals:
        raise DomainError("cannot merge an empty list of intervals")
    return TimeWindow(min(w.start_s for w in intervals), max(w.end_s for w in intervals))


def trim_foreground(buf: ac.AudioBuffer, events: Optional[Sequence[TimeWindow]] = None,
                    threshold_db: float = 20.0) -> Tuple[ac.AudioBuffer, float]:
    """Strong-label crop when events are known, energy trim otherwise."""
    if events:
        span = merge_strong_labels(events)
        end = min(span.end_s, buf.duration_s)
        if span.start_s >= end:
            raise DomainError(f"labelled span {span.as_pair()} lies outside {buf.duration_s:.2f}s clip")
        i = int(round(span.start_s * buf.sample_rate))
        j = int(round(end * buf.sample_rate))
        return ac.AudioBuffer(buf.samples[i:j], buf.sample_rate), i / buf.sample_rate
    return ac.energy_trim(buf, threshold_db)


def sample_recipe(rng_seed: int, bg_duration_s: float, fg_duration_s: float, *,
                  fg_jitter_db: float = 5.0, bg_rel_db: Tuple[float, float] = (-15.0, -5.0),
                  bg_subclip: Optional[TimeWindow] = None, trim_lead_s: float = 0.0) -> MixRecipe:
    """Draw the random mixing parameters for one sample.

    The insertion offset is uniform over ``[0, bg - fg]`` (so the foreground
    always fits) and floored onto the centisecond grid used for labels.
    """
    if not 0 < fg_duration_s <= bg_duration_s + 1e-9:
        raise DomainError(f"foreground ({fg_duration_s}s) must fit inside background ({bg_duration_s}s)")
    rng = np.random.default_rng(rng_seed)
    u, jitter, rel = rng.random(), rng.uniform(-fg_jitter_db, fg_jitter_db), rng.uniform(*bg_rel_db)
    span = max(bg_duration_s - fg_duration_s, 0.0)
    offset = math.floor(u * span * 100.0) / 100.0
    return MixRecipe(
        insertion_offset_s=offset,
        fg_jitter_db=float(jitter),
        bg_rel_db=float(rel),
        bg_subclip=bg_subclip or TimeWindow(0.0, bg_duration_s),
        trim_lead_s=trim_lead_s,
        seed=int(rng_seed),
    )


def mix_gains(fg: ac.AudioBuffer, bg: ac.AudioBuffer, recipe: MixRecipe) -> Tuple[float, float]:
    """(fg_gain_db, bg_gain_db) for a recipe.

    The foreground keeps its native level plus jitter. The background is set
    ``bg_rel_db`` below the jittered foreground's RMS level, so the realised
    SNR is ``-bg_rel_db``. If either side is silent the levels cannot be
    matched and plain gains are used.
    """
    fg_gain = recipe.fg_jitter_db
    lf, lb = ac.rms_db(fg), ac.rms_db(bg)
    level_shift = lf - lb if math.isfinite(lf) and math.isfinite(lb) else 0.0
    return fg_gain, fg_gain + recipe.bg_rel_db + level_shift


def synthesize(bg: ac.AudioBuffer, fg: ac.AudioBuffer, fg_caption: str, recipe: MixRecipe, *,
               sample_id: str = "", audio_ref: str = "", query_type: str = "caption"
               ) -> Tuple[ac.AudioBuffer, GroundingSample]:
    """Insert an already trimmed ``fg`` into ``bg`` per ``recipe``.

    ``bg`` is the background subclip itself; the mixture has its length.
    """
    fg_gain, bg_gain = mix_gains(fg, bg, recipe)
    mix, _ = ac.mix_at(bg, fg, recipe.insertion_offset_s, fg_gain, bg_gain)
    start = recipe.insertion_offset_s
    window = TimeWindow(round(start, 2), round(start + fg.duration_s, 2))
    sample = GroundingSample(
        id=sample_id,
        audio_ref=audio_ref,
        duration_s=round(mix.duration_s, 2),
        positive_query=fg_caption,
        windows=(window,),
        provenance=recipe,
        query_type=query_type,
    )
    return mix, sample


# --- corpus forging ----------------------------------------------------------

@dataclass
class ForgeConfig:
    sample_count: int = 0
    sample_rate: int = 16000
    bg_subclip_s: Tuple[float, float] = (40.0, 60.0)
    fg_jitter_db: float = 5.0
    bg_rel_db: Tuple[float, float] = (-15.0, -5.0)
    trim_threshold_db: float = 20.0
    max_skip_fraction: float = 0.10
    id_prefix: str = "forge-"
    min_fg_s: float = 0.05


@dataclass
class ForgeResult:
    samples: List[GroundingSample]
    manifest_path: Optional[Path]
    skipped: int
    considered: int
    composition: Dict[str, int] = field(default_factory=dict)

    @property
    def stats(self) -> Optional[CorpusStats]:
        return corpus_stats(self.samples) if self.samples else None


@dataclass(frozen=True)
class _Fg:
    key: str
    path: str
    caption: str
    query_type: str
    source: str
    events: Tuple[TimeWindow, ...]
    duration_s: float
    trim_lead_s: float


@dataclass(frozen=True)
class _Bg:
    path: str
    duration_s: float


def _resolve(base: Path, ref: str) -> str:
    p = Path(ref)
    return str(p if p.is_absolute() else (base / p))


def _load(path: str, rate: int) -> ac.AudioBuffer:
    return ac.resample(ac.read_wav(path), rate)


def _read_entries(manifest: PathLike) -> List[dict]:
    manifest = Path(manifest)
    if not manifest.is_file():
        raise DataError(f"manifest not found: {manifest}")
    rows = read_jsonl(manifest)
    for r in rows:
        r["_base"] = manifest.parent
        r.setdefault("source", manifest.stem)
    return rows


def _validate_fg(rows: List[dict], cfg: ForgeConfig) -> Tuple[List[_Fg], int]:
    good, bad = [], 0
    max_fg = cfg.bg_subclip_s[0]
    for i, r in enumerate(rows):
        try:
            path = _resolve(r["_base"], r["audio"])
            events = tuple(TimeWindow.from_pair(e) for e in r.get("events") or ())
            buf, lead = trim_foreground(_load(path, cfg.sample_rate), events, cfg.trim_threshold_db)
            if not cfg.min_fg_s <= buf.duration_s <= max_fg:
                raise DomainError(f"trimmed duration {buf.duration_s:.2f}s outside [{cfg.min_fg_s}, {max_fg}]")
            good.append(_Fg(
                key=str(r.get("id", f"{r['source']}:{i}")), path=path, caption=str(r["caption"]),
                query_type=r.get("query_type", "caption"), source=str(r["source"]), events=events,
                duration_s=buf.duration_s, trim_lead_s=lead,
            ))
        except Exception as exc:  # any unusable entry is a skip, not a crash
            bad += 1
            log.warning("skipping foreground %s: %s", r.get("audio"), exc)
    return good, bad


def _validate_bg(rows: List[dict], cfg: ForgeConfig) -> Tuple[List[_Bg], int]:
    good, bad = [], 0
    for r in rows:
        try:
            path = _resolve(r["_base"], r["audio"])
            dur, _ = ac.wav_duration(path)
            if dur < cfg.bg_subclip_s[0]:
                raise DomainError(f"{dur:.2f}s is shorter than the {cfg.bg_subclip_s[0]}s minimum subclip")
            good.append(_Bg(path, dur))
        except Exception as exc:
            bad += 1
            log.warning("skipping background %s: %s", r.get("audio"), exc)
    return good, bad


def _forge_one(task) -> dict:
    index, seed, fg, bgs, cfg, out_dir = task
    rng = np.random.default_rng(derive_seed(seed, "background"))
    bg_meta = bgs[int(rng.integers(len(bgs)))]
    lo, hi = cfg.bg_subclip_s
    sub_len = min(round(float(rng.uniform(lo, hi)), 2), math.floor(bg_meta.duration_s * 100) / 100)
    sub_start = math.floor(float(rng.uniform(0.0, bg_meta.duration_s - sub_len)) * 100) / 100
    sub = TimeWindow(sub_start, round(sub_start + sub_len, 2))

    bg_full = _load(bg_meta.path, cfg.sample_rate)
    i0 = int(round(sub.start_s * cfg.sample_rate))
    bg = ac.AudioBuffer(bg_full.samples[i0:i0 + int(round(sub_len * cfg.sample_rate))], cfg.sample_rate)
    fg_buf, lead = trim_foreground(_load(fg.path, cfg.sample_rate), fg.events, cfg.trim_threshold_db)

    recipe = sample_recipe(seed, bg.duration_s, fg_buf.duration_s, fg_jitter_db=cfg.fg_jitter_db,
                           bg_rel_db=cfg.bg_rel_db, bg_subclip=sub, trim_lead_s=lead)
    sample_id = f"{cfg.id_prefix}{index:06d}"
    audio_ref = f"audio/{sample_id}.wav"
    mix, sample = synthesize(bg, fg_buf, fg.caption, recipe, sample_id=sample_id,
                             audio_ref=audio_ref, query_type=fg.query_type)
    ac.write_wav(Path(out_dir) / audio_ref, mix)
    ac.write_wav(Path(out_dir) / foreground_ref(sample_id), fg_buf)
    return {"sample": sample.to_json(), "source": fg.source, "fg": fg.key, "bg": bg_meta.path}


def foreground_ref(sample_id: str) -> str:
    """Relative path of the trimmed foreground written next to each mixture."""
    return f"foregrounds/{sample_id}.wav"


def forge_corpus(fg_manifests: Union[PathLike, Sequence[PathLike]], bg_manifest: PathLike,
                 config: ForgeConfig, global_seed: int, out_dir: Optional[PathLike] = None,
                 jobs: int = 1) -> ForgeResult:
    """Forge ``config.sample_count`` samples and write them under ``out_dir``.

    Output layout: ``manifest.jsonl``, ``manifest.meta.json`` (composition,
    skips, per-sample sources), ``audio/<id>.wav`` mixtures and
    ``foregrounds/<id>.wav`` trimmed foregrounds. Every sample depends only on
    ``(global_seed, index)`` and the sources, so ``jobs`` never changes the
    output.
    """
    if isinstance(fg_manifests, (str, Path)):
        fg_manifests = [fg_manifests]
    fg_rows = [r for m in fg_manifests for r in _read_entries(m)]
    bg_rows = _read_entries(bg_manifest)
    n = int(config.sample_count)
    if n < 0:
        raise DomainError(f"sample_count must be >= 0, got {n}")

    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        (out / "audio").mkdir(parents=True, exist_ok=True)
        (out / "foregrounds").mkdir(parents=True, exist_ok=True)

    if n == 0:
        if out is not None:
            write_manifest(out / "manifest.jsonl", [])
            _write_meta(out, global_seed, 0, 0, {}, [])
        return ForgeResult([], out / "manifest.jsonl" if out else None, 0, 0)
    if not fg_rows or not bg_rows:
        raise DataError("foreground and background manifests must be non-empty")
    if out is None:
        raise DomainError("out_dir is required when sample_count > 0")

    fgs, fg_bad = _validate_fg(fg_rows, config)
    bgs, bg_bad = _validate_bg(bg_rows, config)
    skipped, considered = fg_bad + bg_bad, len(fg_rows) + len(bg_rows)
    log.info("validated sources: %d usable, %d skipped", considered - skipped, skipped)
    if skipped > config.max_skip_fraction * considered or not fgs or not bgs:
        raise DataError(f"{skipped} of {considered} source entries unusable "
                        f"(limit {config.max_skip_fraction:.0%}); see warnings above")

    order = np.random.default_rng(derive_seed(global_seed, "fg-order")).permutation(len(fgs))
    tasks = [(i, derive_seed(global_seed, i), fgs[order[i % len(fgs)]], bgs, config, str(out)) for i in range(n)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_forge_one, tasks, chunksize=max(1, n // (4 * jobs))))
    else:
        results = [_forge_one(t) for t in tasks]

    samples = [GroundingSample.from_json(r["sample"]) for r in results]
    write_manifest(out / "manifest.jsonl", samples)
    composition = dict(sorted(Counter(r["source"] for r in results).items()))
    _write_meta(out, global_seed, skipped, considered, composition, results)
    return ForgeResult(samples, out / "manifest.jsonl", skipped, considered, composition)


def _write_meta(out: Path, seed: int, skipped: int, considered: int, composition: dict, results: list):
    meta = {
        "global_seed": int(seed),
        "sample_count": len(results),
        "skipped_sources": skipped,
        "considered_sources": considered,
        "composition": composition,
        "samples": [{"id": r["sample"]["id"], "source": r["source"], "foreground": r["fg"],
                     "foreground_audio": foreground_ref(r["sample"]["id"]),
                     "background": os.path.basename(r["bg"])} for r in results],
    }
    (out / "manifest.meta.json").write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")


# --- SED re-segmentation -----------------------------------------------------

def segment_for_sed(audio: ac.AudioBuffer, events: Sequence[Tuple[str, TimeWindow]],
                    chunk_s: float = 60.0) -> List[Tuple[ac.AudioBuffer, List[Tuple[str, TimeWindow]]]]:
    """Cut a long recording and its strong labels into ``chunk_s`` pieces.

    Events crossing a boundary are clipped into every chunk they touch, with
    times re-based to the chunk start.
    """
    if not chunk_s > 0:
        raise DomainError(f"chunk_s must be positive, got {chunk_s}")
    sr = audio.sample_rate
    step = int(round(chunk_s * sr))
    out = []
    for i0 in range(0, len(audio), step):
        i1 = min(i0 + step, len(audio))
        span = TimeWindow(i0 / sr, i1 / sr)
        local = []
        for label, w in events:
            cut = w.intersect(span)
            if cut is not None:
                local.append((label, TimeWindow(cut.start_s - span.start_s, cut.end_s - span.start_s)))
        out.append((ac.AudioBuffer(audio.samples[i0:i1], sr), local))
    return out


# --- statistics --------------------------------------------------------------

def corpus_stats(samples: Sequence[GroundingSample]) -> CorpusStats:
    """Table-style statistics; density is the mean per-sample window/clip ratio.

    Samples without windows count towards clips, queries and mean duration
    but are excluded from the window and density means.
    """
    if not samples:
        raise DomainError("corpus_stats needs at least one sample")
    with_windows = [s for s in samples if s.windows]
    win_len = [measure(s.windows) for s in with_windows]
    dens = [measure(s.windows) / s.duration_s for s in with_windows]
    return CorpusStats(
        clip_count=len({s.audio_ref for s in samples}),
        query_count=len(samples),
        mean_duration_s=float(np.mean([s.duration_s for s in samples])),
        mean_window_s=float(np.mean(win_len)) if win_len else 0.0,
        temporal_density=float(np.mean(dens)) if dens else 0.0,
        zero_window_count=len(samples) - len(with_windows),
    )


# --- negatives ---------------------------------------------------------------

STOPWORDS = frozenset("""
a an the and or but nor of in on at to for from by with without into onto over under
is are was were be been being its it this that these those as while then than
sound sounds audio
""".split())

_TOKEN = re.compile(r"[^0-9a-z]+")


def content_tokens(text: str, stopwords: Iterable[str] = STOPWORDS) -> frozenset:
    stop = stopwords if isinstance(stopwords, (set, frozenset)) else frozenset(stopwords)
    return frozenset(t for t in _TOKEN.split(text.lower()) if t and t not in stop)


def lexical_overlap(q1: str, q2: str, stopwords: Iterable[str] = STOPWORDS) -> bool:
    return bool(content_tokens(q1, stopwords) & content_tokens(q2, stopwords))


def normalize_query(text: str) -> str:
    return " ".join(text.lower().split()).rstrip(".!?")


@dataclass(frozen=True)
class QueryPool:
    entries: Tuple[Tuple[str, frozenset], ...]

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def queries(self) -> List[str]:
        return [q for q, _ in self.entries]


def build_query_pool(manifests: Sequence) -> QueryPool:
    """Deduplicated global query set with the sources each query came from.

    Each manifest is a path (tagged by its stem) or a ``(tag, samples)`` pair.
    """
    tags: Dict[str, set] = {}
    for k, m in enumerate(manifests):
        if isinstance(m, (str, Path)):
            tag, samples = Path(m).stem, read_manifest(m)
        elif isinstance(m, tuple) and len(m) == 2 and isinstance(m[0], str):
            tag, samples = m
        else:
            tag, samples = f"manifest{k}", m
        for s in samples:
            q = s.positive_query.strip()
            if q:
                tags.setdefault(q, set()).add(tag)
    return QueryPool(tuple((q, frozenset(t)) for q, t in sorted(tags.items())))


def annotation_sets(samples: Iterable[GroundingSample]) -> Dict[str, frozenset]:
    """Normalised queries attached to each audio across a manifest."""
    acc: Dict[str, set] = {}
    for s in samples:
        acc.setdefault(s.audio_ref, set()).add(normalize_query(s.positive_query))
    return {k: frozenset(v) for k, v in acc.items()}


def is_admissible(candidate: str, positive: str, annotations: Iterable[str] = (),
                  stopwords: Iterable[str] = STOPWORDS) -> bool:
    ann = {normalize_query(a) for a in annotations} | {normalize_query(positive)}
    return normalize_query(candidate) not in ann and not lexical_overlap(candidate, positive, stopwords)


def sample_negative(sample: GroundingSample, pool: QueryPool, rng_seed: int,
                    annotations: Iterable[str] = (), stopwords: Iterable[str] = STOPWORDS) -> str:
    """Uniform draw among pool queries absent from the clip and lexically disjoint from its query."""
    if not len(pool):
        raise PoolExhaustedError("query pool is empty")
    ann = list(annotations)
    ok = [q for q in pool.queries if is_admissible(q, sample.positive_query, ann, stopwords)]
    if not ok:
        raise PoolExhaustedError(f"pool exhausted: no admissible negative for sample {sample.id!r}")
    return ok[int(np.random.default_rng(rng_seed).integers(len(ok)))]


def add_negatives(samples: Sequence[GroundingSample], pool: QueryPool, seed: int,
                  stopwords: Iterable[str] = STOPWORDS) -> List[GroundingSample]:
    """Attach one negative query to every sample; seeds are per sample index."""
    ann = annotation_sets(samples)
    out = []
    for i, s in enumerate(samples):
        neg = sample_negative(s, pool, derive_seed(seed, "negative", i), ann.get(s.audio_ref, ()), stopwords)
        out.append(replace(s, negative_query=neg))
    return out


def audit_negatives(samples: Sequence[GroundingSample], stopwords: Iterable[str] = STOPWORDS) -> List[str]:
    """Re-check every negative against the manifest alone; returns violation messages."""
    ann = annotation_sets(samples)
    problems = []
    for s in samples:
        neg = s.negative_query
        if not neg:
            problems.append(f"{s.id}: missing negative query")
            continue
        if lexical_overlap(neg, s.positive_query, stopwords):
            problems.append(f"{s.id}: negative {neg!r} overlaps positive {s.positive_query!r}")
        if normalize_query(neg) in ann.get(s.audio_ref, ()):
            problems.append(f"{s.id}: negative {neg!r} is annotated on {s.audio_ref}")
    return problems


# --- instruction records -----------------------------------------------------

def emit_quadruplet(sample: GroundingSample, negative_grounding: bool = False) -> List[dict]:
    """Existence(+), existence(-) and grounding(+) instruction records.

    ``negative_grounding`` adds a fourth record asking to ground the negative
    query, answered ``No.``.
    """
    if not sample.negative_query:
        raise DomainError(f"sample {sample.id!r} has no negative query")
    if not sample.windows:
        raise DomainError(f"sample {sample.id!r} has no ground-truth windows")
    records = [
        {"id": f"{sample.id}:existence:pos", "kind": "existence", "query": sample.positive_query, "target": YES},
        {"id": f"{sample.id}:existence:neg", "kind": "existence", "query": sample.negative_query, "target": NO},
        {"id": f"{sample.id}:grounding:pos", "kind": "grounding", "query": sample.positive_query,
         "target": answer_phrase(sample.windows)},
    ]
    if negative_grounding:
        records.append({"id": f"{sample.id}:grounding:neg", "kind": "grounding",
                        "query": sample.negative_query, "target": NO})
    return records
