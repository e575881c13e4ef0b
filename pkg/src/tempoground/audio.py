"""Deterministic mono-audio primitives.

Everything here is a pure function of its inputs. Buffers hold float64
samples; WAV I/O is 16-bit PCM little-endian, and multi-channel files are
averaged down to mono on read.
"""
from __future__ import annotations

import math
import wave
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from scipy.signal import resample_poly

from .errors import DomainError

PathLike = Union[str, Path]

# Fixed polyphase anti-aliasing design so resampled output is reproducible.
RESAMPLE_WINDOW = ("kaiser", 5.0)


@dataclass(frozen=True, eq=False)
class AudioBuffer:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        x = np.ascontiguousarray(self.samples, dtype=np.float64)
        if x.ndim != 1:
            raise DomainError(f"AudioBuffer must be mono, got shape {x.shape}")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise DomainError(f"sample_rate must be a positive integer, got {self.sample_rate}")
        if not np.all(np.isfinite(x)):
            raise DomainError("AudioBuffer samples must be finite")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate

    def slice_s(self, start_s: float, end_s: float) -> "AudioBuffer":
        i = int(round(start_s * self.sample_rate))
        j = int(round(end_s * self.sample_rate))
        return AudioBuffer(self.samples[max(i, 0):min(j, len(self))], self.sample_rate)

    def scaled(self, factor: float) -> "AudioBuffer":
        return AudioBuffer(self.samples * factor, self.sample_rate)

    @classmethod
    def silence(cls, duration_s: float, sample_rate: int) -> "AudioBuffer":
        return cls(np.zeros(int(round(duration_s * sample_rate))), sample_rate)


@dataclass(frozen=True)
class FrameGrid:
    window_s: float = 0.025
    hop_s: float = 0.010

    def __post_init__(self):
        if not (self.hop_s > 0 and self.window_s >= self.hop_s):
            raise DomainError(f"need window_s >= hop_s > 0, got {self.window_s}, {self.hop_s}")

    def in_samples(self, sample_rate: int) -> Tuple[int, int]:
        win = int(round(self.window_s * sample_rate))
        hop = int(round(self.hop_s * sample_rate))
        if hop < 1:
            raise DomainError(f"hop of {self.hop_s}s is below one sample at {sample_rate} Hz")
        return win, hop


# --- WAV I/O -----------------------------------------------------------------

def read_wav(path: PathLike) -> AudioBuffer:
    """Read a PCM WAV file as a mono float buffer in [-1, 1]."""
    with wave.open(str(path), "rb") as wf:
        n_channels = wf.getnchannels()
        width = wf.getsampwidth()
        rate = wf.getframerate()
        raw = wf.readframes(wf.getnframes())
    if width == 1:
        data = (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    elif width == 2:
        data = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    elif width == 3:
        b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        ints = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints)
        data = ints.astype(np.float64) / float(1 << 23)
    elif width == 4:
        data = np.frombuffer(raw, dtype="<i4").astype(np.float64) / float(1 << 31)
    else:
        raise DomainError(f"unsupported sample width {width} in {path}")
    if n_channels > 1:
        data = data.reshape(-1, n_channels).mean(axis=1)
    return AudioBuffer(data, rate)


def to_pcm16(buf: AudioBuffer) -> bytes:
    ints = np.round(np.clip(buf.samples, -1.0, 1.0) * 32767.0).astype("<i2")
    return ints.tobytes()


def write_wav(path: PathLike, buf: AudioBuffer) -> None:
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(buf.sample_rate)
        wf.writeframes(to_pcm16(buf))


def wav_duration(path: PathLike) -> Tuple[float, int]:
    """Header-only duration lookup; returns (seconds, sample_rate)."""
    with wave.open(str(path), "rb") as wf:
        return wf.getnframes() / wf.getframerate(), wf.getframerate()


# --- DSP ---------------------------------------------------------------------

def resample(buf: AudioBuffer, target_rate: int) -> AudioBuffer:
    """Band-limited polyphase resampling to ``target_rate``."""
    if target_rate <= 0 or int(target_rate) != target_rate:
        raise DomainError(f"target_rate must be a positive integer, got {target_rate}")
    if len(buf) == 0:
        raise DomainError("cannot resample an empty buffer")
    if target_rate == buf.sample_rate:
        return buf
    ratio = Fraction(int(target_rate), buf.sample_rate)
    y = resample_poly(buf.samples, ratio.numerator, ratio.denominator, window=RESAMPLE_WINDOW)
    return AudioBuffer(y, int(target_rate))


def db_to_linear(gain_db: float) -> float:
    if not math.isfinite(gain_db):
        raise DomainError(f"gain must be finite, got {gain_db}")
    return 10.0 ** (gain_db / 20.0)


def rms_db(buf: AudioBuffer) -> float:
    """RMS level in dBFS; ``-inf`` for digital silence."""
    if len(buf) == 0:
        return -math.inf
    ms = float(np.mean(buf.samples ** 2))
    return 10.0 * math.log10(ms) if ms > 0 else -math.inf


def frame_power(buf: AudioBuffer, grid: FrameGrid = FrameGrid()) -> np.ndarray:
    """Mean-square power of each analysis frame.

    Frame ``i`` covers samples ``[i*hop, i*hop + window)``; only whole frames
    are produced, so the count is ``floor((n - window) / hop) + 1``.
    """
    win, hop = grid.in_samples(buf.sample_rate)
    n = len(buf)
    if n < win or win < 1:
        raise DomainError(f"buffer of {buf.duration_s:.4f}s is shorter than one {grid.window_s}s window")
    frames = np.lib.stride_tricks.sliding_window_view(buf.samples, win)[::hop]
    return np.mean(frames * frames, axis=1)


def _kept_frame_range(powers: np.ndarray, threshold_db: float) -> Tuple[int, int]:
    # Frames strictly more than threshold_db below the mean are dropped.
    threshold = float(np.mean(powers)) / 10.0 ** (threshold_db / 10.0)
    kept = np.flatnonzero(powers >= threshold)
    assert kept.size, "at least one frame must reach the mean-relative threshold"
    return int(kept[0]), int(kept[-1])


def energy_trim(buf: AudioBuffer, threshold_db: float = 20.0,
                grid: FrameGrid = FrameGrid()) -> Tuple[AudioBuffer, float]:
    """Strip leading/trailing frames more than ``threshold_db`` below mean power.

    Returns the retained contiguous segment and the number of seconds removed
    from the front. The cut points sit where the adjacent dropped frame ends
    (head) or begins (tail), so the true onset is bounded to within one hop.
    Interior quiet frames are never removed.
    """
    if not threshold_db > 0:
        raise DomainError(f"threshold_db must be positive, got {threshold_db}")
    powers = frame_power(buf, grid)
    if powers.size == 1:
        return buf, 0.0
    win, hop = grid.in_samples(buf.sample_rate)
    first, last = _kept_frame_range(powers, threshold_db)

    start = 0 if first == 0 else (first - 1) * hop + win
    end = len(buf) if last == powers.size - 1 else (last + 1) * hop
    if start >= end:
        start, end = first * hop, min(len(buf), last * hop + win)
    trimmed = AudioBuffer(buf.samples[start:end], buf.sample_rate)
    return trimmed, start / buf.sample_rate


def mix_at(bg: AudioBuffer, fg: AudioBuffer, offset_s: float,
           fg_gain_db: float = 0.0, bg_gain_db: float = 0.0) -> Tuple[AudioBuffer, float]:
    """Overlay ``fg`` onto ``bg`` starting ``offset_s`` seconds in.

    If the sum peaks above full scale the whole mixture is rescaled to a
    peak of 1.0; the applied factor (1.0 when untouched) is returned with
    the mixture.
    """
    if bg.sample_rate != fg.sample_rate:
        raise DomainError(f"sample-rate mismatch: bg {bg.sample_rate} Hz vs fg {fg.sample_rate} Hz")
    if offset_s < 0:
        raise DomainError(f"offset must be non-negative, got {offset_s}")
    start = int(round(offset_s * bg.sample_rate))
    stop = start + len(fg)
    if stop > len(bg):
        raise DomainError(
            f"foreground ({fg.duration_s:.3f}s at {offset_s:.3f}s) overruns background ({bg.duration_s:.3f}s)"
        )
    out = bg.samples * db_to_linear(bg_gain_db)
    out[start:stop] += fg.samples * db_to_linear(fg_gain_db)
    peak = float(np.max(np.abs(out))) if out.size else 0.0
    scale = 1.0
    if peak > 1.0:
        scale = 1.0 / peak
        out *= scale
    return AudioBuffer(out, bg.sample_rate), scale
