"""Needle-in-a-haystack audio temporal grounding toolkit.

Forge synthetic grounding corpora, compile timestamp-interleaved prompts
and training records, and score free-text grounding predictions.
"""
from .audio import AudioBuffer, FrameGrid, db_to_linear, energy_trim, frame_power, mix_at, read_wav, resample, write_wav
from .errors import DataError, DomainError, PoolExhaustedError
from .evaluation import (EvalRecord, MetricsReport, ParsedResponse, evaluate, interval_set_iou, parse_existence,
                         parse_windows, score_existence, score_grounding, two_stage_f1)
from .forge import (CorpusStats, ForgeConfig, GroundingSample, MixRecipe, build_query_pool, corpus_stats,
                    emit_quadruplet, forge_corpus, lexical_overlap, merge_strong_labels, sample_negative,
                    sample_recipe, segment_for_sed, synthesize)
from .intervals import TimeWindow
from .oracle import envelope, locate, oracle_check
from .sequencer import (InstructionKind, SequenceTemplate, TrainingRecord, chunk_boundaries, format_timestamp,
                        layout, render, training_record)

__version__ = "0.1.0"
