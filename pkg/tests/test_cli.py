import json
import subprocess
import sys

import numpy as np
import pytest

from tempoground.audio import AudioBuffer, write_wav
from tempoground.cli import main
from tempoground.forge import read_manifest
from tempoground.jsonl import read_jsonl, write_jsonl


def run(*argv):
    try:
        return main([str(a) for a in argv])
    except SystemExit as exc:
        return exc.code


def forge(sources, out, n=10, seed=1, *extra):
    fgs, bg = sources
    args = ["forge", "--bg", bg, "-n", n, "--seed", seed, "--out", out, *extra]
    for f in fgs:
        args += ["--fg", f]
    return run(*args)


@pytest.fixture
def corpus(sources, tmp_path):
    assert forge(sources, tmp_path / "c") == 0
    assert run("negatives", tmp_path / "c/manifest.jsonl", "--seed", 3) == 0
    return tmp_path / "c/manifest.neg.jsonl"


class TestExitCodes:
    def test_no_command(self):
        assert run() == 1

    def test_unknown_flag(self):
        assert run("stats", "x.jsonl", "--bogus") == 1

    def test_unknown_config_key(self, tmp_path):
        (tmp_path / "c.yaml").write_text("not_a_key: 3\n")
        assert run("stats", "x.jsonl", "--config", tmp_path / "c.yaml") == 1

    def test_missing_data(self, tmp_path, capsys):
        assert run("stats", tmp_path / "nope.jsonl") == 2
        assert "nope.jsonl" in capsys.readouterr().err

    def test_module_entry(self, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "tempoground.cli", "stats", str(tmp_path / "x.jsonl")],
                              capture_output=True, text=True)
        assert proc.returncode == 2


class TestForge:
    def test_outputs(self, sources, tmp_path):
        assert forge(sources, tmp_path / "a") == 0
        assert len((tmp_path / "a/manifest.jsonl").read_text().splitlines()) == 10
        assert len(list((tmp_path / "a/audio").glob("*.wav"))) == 10

    def test_byte_identical_rerun(self, sources, tmp_path):
        forge(sources, tmp_path / "a", 4)
        forge(sources, tmp_path / "b", 4)
        for rel in ["manifest.jsonl", "manifest.meta.json", *[f"audio/forge-{i:06d}.wav" for i in range(4)]]:
            assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes(), rel

    def test_missing_bg(self, sources, tmp_path, capsys):
        fgs, _ = sources
        code = run("forge", "--fg", fgs[0], "--bg", tmp_path / "gone.jsonl", "-n", 2, "--out", tmp_path / "o")
        assert code == 2 and "gone.jsonl" in capsys.readouterr().err

    def test_missing_out(self, sources):
        fgs, bg = sources
        assert run("forge", "--fg", fgs[0], "--bg", bg, "-n", 2) == 1

    def test_config_file(self, sources, tmp_path):
        fgs, bg = sources
        (tmp_path / "run.yaml").write_text(
            f"fg_manifests: [{fgs[0]}, {fgs[1]}]\nbg_manifest: {bg}\nsample_count: 3\nglobal_seed: 1\n")
        assert run("forge", "--config", tmp_path / "run.yaml", "--out", tmp_path / "o") == 0
        assert len(read_manifest(tmp_path / "o/manifest.jsonl")) == 3


class TestNegatives:
    def test_every_line_augmented(self, corpus):
        samples = read_manifest(corpus)
        assert len(samples) == 10 and all(s.negative_query for s in samples)

    def test_reproducible(self, corpus, tmp_path):
        src = corpus.parent / "manifest.jsonl"
        run("negatives", src, "--seed", 3, "--out", tmp_path / "again.jsonl")
        assert (tmp_path / "again.jsonl").read_bytes() == corpus.read_bytes()

    def test_exhausted(self, tmp_path, capsys):
        rows = [{"id": "a", "audio": "a.wav", "duration": 10.0, "query": "dog barks", "windows": [[1.0, 2.0]]},
                {"id": "b", "audio": "b.wav", "duration": 10.0, "query": "small dog", "windows": [[1.0, 2.0]]}]
        write_jsonl(tmp_path / "m.jsonl", rows)
        assert run("negatives", tmp_path / "m.jsonl") == 2
        assert "exhausted" in capsys.readouterr().err


class TestSequence:
    def test_three_records_each(self, corpus, tmp_path):
        lines = corpus.read_text().splitlines()[:3]
        (tmp_path / "three.jsonl").write_text("\n".join(lines) + "\n")
        assert run("sequence", tmp_path / "three.jsonl", "--out", tmp_path / "r.jsonl") == 0
        assert len(read_jsonl(tmp_path / "r.jsonl")) == 9
        assert run("sequence", tmp_path / "three.jsonl", "--negative-grounding", "--out", tmp_path / "r4.jsonl") == 0
        assert len(read_jsonl(tmp_path / "r4.jsonl")) == 12

    def test_granularity_multiplies_markers(self, corpus, tmp_path):
        run("sequence", corpus, "--granularity", 1, "--out", tmp_path / "g1.jsonl")
        run("sequence", corpus, "--granularity", 0.2, "--out", tmp_path / "g02.jsonl")
        for a, b in zip(read_jsonl(tmp_path / "g1.jsonl"), read_jsonl(tmp_path / "g02.jsonl")):
            assert len(b["frames"]) in (5 * len(a["frames"]) - k for k in range(5))
            assert sum(a["frames"]) == sum(b["frames"])

    def test_empty_manifest(self, tmp_path):
        (tmp_path / "e.jsonl").write_text("")
        assert run("sequence", tmp_path / "e.jsonl") == 0
        assert (tmp_path / "e.records.jsonl").read_text() == ""


class TestEval:
    def echo(self, manifest, path, blank=False):
        rows = []
        for s in read_manifest(manifest):
            phrase = "" if blank else "From {:.2f} seconds to {:.2f} seconds".format(*s.windows[0].as_pair())
            rows.append({"id": s.id, "stage1_text": "" if blank else "Yes.", "stage2_text": phrase})
            rows.append({"id": s.id + ":neg", "stage1_text": "" if blank else "No.", "stage2_text": ""})
        write_jsonl(path, rows)

    def test_echo(self, corpus, tmp_path):
        self.echo(corpus, tmp_path / "p.jsonl")
        assert run("eval", corpus, tmp_path / "p.jsonl", "--out", tmp_path / "r.json", "--table") == 0
        rep = json.loads((tmp_path / "r.json").read_text())
        assert rep["miou"] == 1.0 and rep["f1"] == 1.0 and rep["missing_predictions"] == []

    def test_blank(self, corpus, tmp_path):
        self.echo(corpus, tmp_path / "p.jsonl", blank=True)
        run("eval", corpus, tmp_path / "p.jsonl", "--out", tmp_path / "r.json")
        rep = json.loads((tmp_path / "r.json").read_text())
        assert rep["miou"] == 0.0 and rep["f1"] == 0.0

    def test_oracle_predictions(self, corpus, tmp_path):
        assert run("oracle-check", corpus, "--out", tmp_path / "o.json", "--predictions", tmp_path / "p.jsonl") == 0
        assert json.loads((tmp_path / "o.json").read_text())["hit_rate"] >= 0.9
        run("eval", corpus, tmp_path / "p.jsonl", "--out", tmp_path / "r.json", "--thresholds", "0.3,0.5,0.7")
        rep = json.loads((tmp_path / "r.json").read_text())
        assert rep["r1"]["0.5"] >= 0.9

    def test_missing_predictions_file(self, corpus, tmp_path):
        assert run("eval", corpus, tmp_path / "none.jsonl") == 2


class TestStatsAndSegment:
    def test_stats(self, corpus, tmp_path):
        assert run("stats", corpus, "--out", tmp_path / "s.json") == 0
        stats = json.loads((tmp_path / "s.json").read_text())
        assert stats["clips"] == 10 and 0 < stats["temporal_density"] < 0.2

    def test_segment(self, tmp_path):
        write_wav(tmp_path / "long.wav", AudioBuffer(np.zeros(150 * 1000), 1000))
        (tmp_path / "ev.tsv").write_text("55\t65\tspeech\n100.5\t101\tdog\n")
        assert run("segment", tmp_path / "long.wav", tmp_path / "ev.tsv", "--out", tmp_path / "seg") == 0
        rows = read_jsonl(tmp_path / "seg/segments.jsonl")
        assert [r["duration"] for r in rows] == [60.0, 60.0, 30.0]
        assert rows[0]["events"] == [["speech", 55.0, 60.0]] and rows[1]["events"][0] == ["speech", 0.0, 5.0]
        total = sum(e - s for r in rows for _, s, e in r["events"])
        assert total == pytest.approx(10.5, abs=0.01)

    def test_segment_bad_tsv(self, tmp_path):
        write_wav(tmp_path / "a.wav", AudioBuffer(np.zeros(1000), 1000))
        (tmp_path / "ev.tsv").write_text("oops\n")
        assert run("segment", tmp_path / "a.wav", tmp_path / "ev.tsv", "--out", tmp_path / "seg") == 2
