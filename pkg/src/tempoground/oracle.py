"""Model-free reference locator for forged mixtures.

Given the exact foreground that was inserted, the insertion offset is
recovered by sliding the foreground's RMS envelope along the mixture's
envelope and taking the lag with the highest Pearson correlation. The
template is padded with a short stretch of silence on each side so that the
onset/offset edges take part in the match (a flat-envelope foreground would
otherwise have zero variance).

This is the independent check on forge ground truth; it never reads the
manifest's windows.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from scipy.signal import correlate

from . import audio as ac
from .errors import DomainError
from .forge import foreground_ref, read_manifest
from .sequencer import answer_phrase
from .intervals import TimeWindow

log = logging.getLogger(__name__)

DEFAULT_HOP_S = 0.01
MIN_CONFIDENCE = 0.3


@dataclass(frozen=True, eq=False)
class Envelope:
    values: np.ndarray
    hop_s: float

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def degenerate(self) -> bool:
        """True when the envelope has no variation to correlate against."""
        return not np.ptp(self.values) > 0 if len(self) else True

    def normalized(self) -> np.ndarray:
        centered = self.values - self.values.mean()
        norm = np.linalg.norm(centered)
        if norm == 0:
            raise DomainError("envelope is constant; normalisation is undefined")
        return centered / norm


def envelope(buf: ac.AudioBuffer, hop_s: float = DEFAULT_HOP_S) -> Envelope:
    """RMS magnitude over consecutive non-overlapping ``hop_s`` windows."""
    hop = int(round(hop_s * buf.sample_rate))
    if hop < 1 or len(buf) < hop:
        raise DomainError(f"buffer of {buf.duration_s:.4f}s is shorter than one {hop_s}s hop")
    n = len(buf) // hop
    frames = buf.samples[: n * hop].reshape(n, hop)
    return Envelope(np.sqrt(np.mean(frames * frames, axis=1)), hop_s)


@dataclass(frozen=True)
class Location:
    offset_s: Optional[float]
    confidence: float
    best_lag_s: float

    @property
    def reliable(self) -> bool:
        return self.offset_s is not None


def locate(fg: ac.AudioBuffer, mix: ac.AudioBuffer, hop_s: float = DEFAULT_HOP_S,
           margin_s: float = 0.5, min_confidence: float = MIN_CONFIDENCE) -> Location:
    """Estimate where ``fg`` starts inside ``mix``.

    Returns the best lag as ``offset_s`` when its correlation reaches
    ``min_confidence``; below that the offset is ``None`` (no reliable
    detection) and only ``best_lag_s`` is kept for diagnostics.
    """
    if fg.sample_rate != mix.sample_rate:
        raise DomainError(f"sample-rate mismatch: {fg.sample_rate} vs {mix.sample_rate}")
    if len(fg) > len(mix):
        raise DomainError(f"foreground ({fg.duration_s:.2f}s) is longer than mixture ({mix.duration_s:.2f}s)")
    if not np.any(fg.samples):
        raise DomainError("foreground has zero energy")
    t = envelope(fg, hop_s).values
    m = envelope(mix, hop_s).values
    if not t.any():
        raise DomainError("foreground has zero energy at envelope resolution")

    pad = int(round(margin_s / hop_s))
    template = np.concatenate([np.zeros(pad), t, np.zeros(pad)])
    padded = np.concatenate([np.zeros(pad), m, np.zeros(pad)])
    real = np.concatenate([np.zeros(pad), np.ones(m.size), np.zeros(pad)])

    # Pearson correlation per lag over the positions that hold real mixture;
    # template margins hanging past either edge are left out, so the edges
    # of the mixture never read as an onset.
    def xc(a, b):
        return correlate(a, b, mode="valid", method="direct")

    ones = np.ones(template.size)
    n = xc(real, ones)
    sx, sxx = xc(padded, ones), xc(padded * padded, ones)
    st, stt = xc(real, template), xc(real, template * template)
    sxt = xc(padded, template)
    cov = sxt - sx * st / n
    var = np.maximum(sxx - sx * sx / n, 0.0) * np.maximum(stt - st * st / n, 0.0)
    den = np.sqrt(var)
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.where(den > 1e-12 * max(float(np.max(den, initial=0.0)), 1e-300), cov / den, 0.0)
    corr = np.clip(corr, -1.0, 1.0)

    lag = int(np.argmax(corr))
    conf = float(corr[lag])
    best = round(lag * hop_s, 6)
    return Location(best if conf >= min_confidence else None, conf, best)


def _check_one(task) -> dict:
    sample, root, tolerance, hop_s = task
    gt = sample.provenance.insertion_offset_s
    row = {"id": sample.id, "gt": gt, "est": None, "err": None, "confidence": None, "hit": False}
    try:
        fg = ac.read_wav(root / foreground_ref(sample.id))
        mix = ac.read_wav(root / sample.audio_ref)
        loc = locate(fg, mix, hop_s)
        row["confidence"] = round(loc.confidence, 6)
        row["fg_duration"] = fg.duration_s
        if loc.reliable:
            row["est"] = loc.offset_s
            row["err"] = round(abs(loc.offset_s - gt), 6)
            row["hit"] = row["err"] <= tolerance + 1e-9
        else:
            row["reason"] = "no reliable detection"
    except (DomainError, OSError, EOFError) as exc:
        row["reason"] = str(exc)
    return row


def oracle_check(manifest: Union[str, Path], tolerance_s: float = 0.2, hop_s: float = DEFAULT_HOP_S,
                 jobs: int = 1) -> dict:
    """Locate every forged foreground and compare with its recorded offset.

    Trimmed foregrounds are read from ``foregrounds/<id>.wav`` beside the
    manifest. Samples without provenance are skipped with a warning.
    """
    manifest = Path(manifest)
    root = manifest.parent
    samples = read_manifest(manifest)
    usable, skipped = [], []
    for s in samples:
        if s.provenance is None:
            log.warning("sample %s has no provenance; skipped", s.id)
            skipped.append(s.id)
        else:
            usable.append(s)
    tasks = [(s, root, tolerance_s, hop_s) for s in usable]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_check_one, tasks))
    else:
        rows = [_check_one(t) for t in tasks]

    hits = sum(r["hit"] for r in rows)
    errs = [r["err"] for r in rows if r["err"] is not None]
    return {
        "n": len(rows),
        "hits": hits,
        "hit_rate": hits / len(rows) if rows else None,
        "tolerance": tolerance_s,
        "worst_error": max(errs) if errs else None,
        "skipped": skipped,
        "per_sample": rows,
    }


def predictions_from_report(report: dict) -> List[dict]:
    """Prediction rows (``id``, ``stage1_text``, ``stage2_text``) for the positives the oracle saw.

    The oracle never reads queries, so it says nothing about negatives.
    """
    out = []
    for r in report["per_sample"]:
        if r["est"] is None:
            out.append({"id": r["id"], "stage1_text": "No.", "stage2_text": ""})
            continue
        end = r["est"] + r["fg_duration"]
        phrase = answer_phrase([TimeWindow(round(r["est"], 2), round(end, 2))])
        out.append({"id": r["id"], "stage1_text": "Yes.", "stage2_text": phrase})
    return out
