import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tempoground.errors import DomainError
from tempoground.evaluation import parse_windows
from tempoground.forge import GroundingSample
from tempoground.intervals import TimeWindow
from tempoground.sequencer import (InstructionKind, answer_phrase, chunk_boundaries, format_timestamp, layout,
                                   quadruplet_records, render, training_record)

GROUNDING_SENTENCE = ("Your task is to identify the temporal window (start and end timestamps) "
                      "when the given query appears.")


def sample(duration=52.9, windows=((12.0, 16.5),), neg="engine idles"):
    return GroundingSample("s", "a.wav", duration, "a dog barks", tuple(TimeWindow(*w) for w in windows),
                           negative_query=neg)


class TestFormat:
    def test_marker(self):
        assert format_timestamp(1.0, "marker", 1.0) == "timestamp: 1 seconds"

    def test_fractional_marker(self):
        assert format_timestamp(0.4, "marker", 0.2) == "timestamp: 0.40 seconds"

    def test_integral_time_fractional_granularity(self):
        assert format_timestamp(1.0, "marker", 0.2) == "timestamp: 1.00 seconds"

    def test_answer(self):
        assert format_timestamp(3.2) == "3.20"
        assert format_timestamp(0.0) == "0.00"

    def test_negative(self):
        with pytest.raises(DomainError):
            format_timestamp(-0.5)


class TestLayout:
    def test_two_seconds(self):
        t = layout(2.0, 1.0, 40)
        assert t.blocks == (("timestamp: 0 seconds", 25), ("timestamp: 1 seconds", 25))

    def test_half_second(self):
        t = layout(0.5, 1.0)
        assert len(t.blocks) == 1 and t.total_frames == 13

    def test_coarse_granularity(self):
        t = layout(60.0, 2.0)
        assert len(t.blocks) == 30 and set(t.frame_counts) == {50}

    def test_partial_final_block(self):
        t = layout(2.5, 1.0)
        assert t.frame_counts == [25, 25, 13]

    @pytest.mark.parametrize("args", [(0, 1, 40), (1, 0, 40), (1, 1, 0), (-1, 1, 40)])
    def test_bad_params(self, args):
        with pytest.raises(DomainError):
            layout(*args)

    @settings(max_examples=200)
    @given(st.integers(1, 12000))
    def test_frame_conservation_on_10ms_lattice(self, cs):
        d = cs / 100
        assert layout(d).total_frames == math.ceil(round(d / 0.04, 9))

    @settings(max_examples=100)
    @given(st.integers(1, 12000), st.sampled_from([0.2, 0.5, 1.0, 2.0]))
    def test_markers_strictly_increase(self, cs, g):
        t = layout(cs / 100, g, chunk_s=30.0)
        assert all(a < b for a, b in zip(t.marker_times, t.marker_times[1:]))

    @settings(max_examples=100)
    @given(st.integers(1, 6000), st.sampled_from([0.4, 1.0, 2.0]))
    def test_granularity_refinement(self, cs, g):
        d = cs / 100
        coarse, fine = layout(d, g), layout(d, g / 2)
        assert fine.total_frames == coarse.total_frames
        assert len(fine.blocks) in (2 * len(coarse.blocks), 2 * len(coarse.blocks) - 1)


class TestChunking:
    def test_45s(self):
        chunks = chunk_boundaries(45.0)
        assert [c.as_pair() for c in chunks] == [(0.0, 30.0), (30.0, 45.0)]
        t = layout(45.0, 1.0, chunk_s=30.0)
        assert t.blocks[30][0] == "timestamp: 30 seconds"

    def test_single(self):
        assert [c.as_pair() for c in chunk_boundaries(30.0)] == [(0.0, 30.0)]
        assert [c.as_pair() for c in chunk_boundaries(0.1)] == [(0.0, 0.1)]

    def test_chunk_grids_restart(self):
        # 30.02 s chunks are not a frame multiple, so the second chunk's grid starts fresh
        t = layout(60.04, 1.0, chunk_s=30.02)
        assert t.total_frames == 2 * math.ceil(30.02 / 0.04)


class TestRender:
    def test_grounding_sentence(self):
        prompt = render(layout(3.0), InstructionKind.GROUNDING, "dog barks")
        assert GROUNDING_SENTENCE in prompt
        assert prompt.endswith("The query is: dog barks.")

    def test_existence_sentence(self):
        prompt = render(layout(3.0), "existence", "dog barks")
        assert "identify whether the sound event in the query occurs" in prompt

    def test_markers_then_instruction(self):
        lines = render(layout(2.0), "grounding", "q").splitlines()
        assert lines[0] == "timestamp: 0 seconds ⟨AUDIO:0:25⟩"
        assert lines[1] == "timestamp: 1 seconds ⟨AUDIO:1:25⟩"
        assert lines[2].startswith("This is a sequence of audio stream.")

    def test_byte_stable(self):
        t = layout(47.3, 1.0, chunk_s=30)
        assert render(t, "grounding", "x").encode() == render(t, "grounding", "x").encode()

    def test_empty_query(self):
        with pytest.raises(DomainError):
            render(layout(1.0), "grounding", "  ")


class TestTrainingRecord:
    def test_existence_negative(self):
        assert training_record(sample(), "existence", polarity="negative").target == "No."

    def test_existence_positive(self):
        assert training_record(sample(), "existence").target == "Yes."

    def test_grounding_target(self):
        assert training_record(sample(), "grounding").target == "From 12.00 seconds to 16.50 seconds"

    def test_loss_mask(self):
        rec = training_record(sample(), "grounding")
        mask = rec.loss_mask
        assert mask.masked_count == len(rec.prompt)
        arr = mask.as_array()
        assert (~arr).sum() == len(rec.prompt) and arr.sum() == len(rec.target)

    def test_grounding_without_windows(self):
        with pytest.raises(DomainError):
            training_record(sample(windows=()), "grounding")

    def test_record_json(self):
        rec = training_record(sample(45.0), "grounding").to_json()
        assert set(rec) == {"id", "kind", "prompt", "target", "frames", "granularity", "chunking"}
        assert sum(rec["frames"]) == 1125
        assert [list(map(float, c)) for c in rec["chunking"]] == [[0.0, 30.0], [30.0, 45.0]]

    def test_quadruplet(self):
        recs = quadruplet_records(sample())
        assert [(r.kind.value, r.target) for r in recs][:2] == [("existence", "Yes."), ("existence", "No.")]
        assert len(recs) == 3
        assert len(quadruplet_records(sample(), negative_grounding=True)) == 4

    @settings(max_examples=100)
    @given(st.lists(st.tuples(st.integers(0, 5000), st.integers(1, 300)), min_size=1, max_size=4))
    def test_render_parse_closure(self, raw):
        windows = tuple(TimeWindow(s / 100, (s + d) / 100) for s, d in raw)
        s = GroundingSample("x", "a.wav", 60.0, "q", windows, negative_query="z")
        parsed, _ = parse_windows(training_record(s, "grounding").target)
        assert [(round(w.start_s, 2), round(w.end_s, 2)) for w in parsed] == \
               [(round(w.start_s, 2), round(w.end_s, 2)) for w in sorted(windows)]

    def test_multi_window_phrase(self):
        text = answer_phrase([TimeWindow(4, 5), TimeWindow(1, 2)])
        assert text == "From 1.00 seconds to 2.00 seconds, and From 4.00 seconds to 5.00 seconds"
