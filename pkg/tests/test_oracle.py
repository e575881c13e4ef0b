import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synth import background, burst_event
from tempoground.audio import AudioBuffer, mix_at, write_wav
from tempoground.errors import DomainError
from tempoground.forge import ForgeConfig, forge_corpus
from tempoground.oracle import envelope, locate, oracle_check, predictions_from_report

SR = 16000


class TestEnvelope:
    def test_length(self):
        assert len(envelope(AudioBuffer(np.ones(SR), SR), 0.01)) == 100

    def test_silence_is_degenerate(self):
        env = envelope(AudioBuffer(np.zeros(SR), SR))
        assert not env.values.any() and env.degenerate
        with pytest.raises(DomainError):
            env.normalized()

    def test_constant_tone(self):
        t = np.arange(SR) / SR
        env = envelope(AudioBuffer(0.5 * np.sin(2 * np.pi * 500 * t), SR))
        assert np.allclose(env.values, 0.5 / np.sqrt(2), rtol=1e-6)

    def test_too_short(self):
        with pytest.raises(DomainError):
            envelope(AudioBuffer(np.ones(10), SR))


class TestLocate:
    def test_self_similarity(self):
        fg = burst_event(3.0, seed=1)
        loc = locate(fg, fg)
        assert loc.offset_s == 0.0 and loc.confidence == pytest.approx(1.0, abs=1e-9)

    def test_known_insertion(self):
        fg = burst_event(4.5, seed=3)
        mix, _ = mix_at(background(52.9, seed=2), fg, 12.0, 0.0, -10.0)
        loc = locate(fg, mix)
        assert loc.reliable and abs(loc.offset_s - 12.0) <= 0.2

    def test_buried_fg_is_not_reported(self):
        # mixture edges must not pass for an onset when the foreground is inaudible
        fg = burst_event(3.0, seed=3)
        mix, _ = mix_at(background(50.0, seed=2), fg, 20.0, 0.0, 40.0)
        loc = locate(fg, mix)
        assert not loc.reliable and loc.confidence < 0.3

    def test_silent_fg(self):
        with pytest.raises(DomainError):
            locate(AudioBuffer(np.zeros(SR), SR), background(10.0))

    def test_longer_fg(self):
        with pytest.raises(DomainError):
            locate(background(5.0), background(4.0))

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 3000), st.integers(1, 200))
    def test_shift_equivariance(self, off_cs, shift_cs):
        fg = burst_event(2.0, seed=5)
        bg = background(40.0, seed=6)
        a, _ = mix_at(bg, fg, off_cs / 100, 0.0, -10.0)
        b, _ = mix_at(bg, fg, (off_cs + shift_cs) / 100, 0.0, -10.0)
        la, lb = locate(fg, a), locate(fg, b)
        assert la.reliable and lb.reliable
        assert lb.offset_s - la.offset_s == pytest.approx(shift_cs / 100, abs=0.01 + 1e-9)

    @pytest.mark.parametrize("gain", [0.25, 1.0, 3.0])
    def test_gain_invariance(self, gain):
        fg = burst_event(2.0, seed=7)
        mix, _ = mix_at(background(30.0, seed=8), fg, 9.37, 0.0, -10.0)
        base = locate(fg, mix)
        scaled = locate(fg.scaled(gain), mix.scaled(gain))
        assert scaled.offset_s == base.offset_s
        assert scaled.confidence == pytest.approx(base.confidence, abs=1e-9)


class TestOracleCheck:
    def test_empty_manifest(self, tmp_path):
        (tmp_path / "m.jsonl").write_text("")
        rep = oracle_check(tmp_path / "m.jsonl")
        assert rep["n"] == 0 and rep["hit_rate"] is None

    def test_forged_corpus(self, sources, tmp_path):
        fgs, bg = sources
        forge_corpus(fgs, bg, ForgeConfig(sample_count=10), 3, tmp_path)
        rep = oracle_check(tmp_path / "manifest.jsonl")
        assert rep["n"] == 10 and rep["hit_rate"] >= 0.9
        preds = predictions_from_report(rep)
        assert len(preds) == 10 and all(p["stage1_text"] == "Yes." for p in preds if p["stage2_text"])

    def test_silent_control_fails(self, sources, tmp_path):
        fgs, bg = sources
        res = forge_corpus(fgs, bg, ForgeConfig(sample_count=2), 3, tmp_path)
        victim = res.samples[0].id
        write_wav(tmp_path / "foregrounds" / f"{victim}.wav", AudioBuffer(np.zeros(SR), SR))
        rows = {r["id"]: r for r in oracle_check(tmp_path / "manifest.jsonl")["per_sample"]}
        assert rows[victim]["hit"] is False and "zero energy" in rows[victim]["reason"]

    def test_missing_provenance_skipped(self, sources, tmp_path):
        fgs, bg = sources
        forge_corpus(fgs, bg, ForgeConfig(sample_count=2), 3, tmp_path)
        lines = (tmp_path / "manifest.jsonl").read_text().splitlines()
        row = json.loads(lines[0])
        row["provenance"] = None
        lines[0] = json.dumps(row)
        (tmp_path / "manifest.jsonl").write_text("\n".join(lines) + "\n")
        rep = oracle_check(tmp_path / "manifest.jsonl")
        assert rep["skipped"] == [row["id"]] and rep["n"] == 1
