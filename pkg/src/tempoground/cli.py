"""``tempoground`` command line.

Exit codes: 0 success, 1 usage or configuration error, 2 data error.
Verbosity comes from the ``TEMPOGROUND_LOG`` environment variable
(``DEBUG``, ``INFO``, ``WARNING``...; default ``WARNING``).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from . import audio as ac
from .config import ConfigError, RunConfig, load_config
from .errors import DataError, DomainError
from .evaluation import build_records, evaluate
from .forge import (add_negatives, audit_negatives, build_query_pool, corpus_stats, forge_corpus,
                    read_manifest, segment_for_sed, write_manifest)
from .intervals import TimeWindow
from .jsonl import iter_jsonl, seconds, write_jsonl
from .oracle import oracle_check, predictions_from_report
from .sequencer import quadruplet_records

log = logging.getLogger("tempoground")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _thresholds(text: str):
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML/JSON run configuration")
    common.add_argument("--seed", type=int, help="global seed (overrides config)")
    common.add_argument("--out", help="output path (file or directory, per command)")
    common.add_argument("--jobs", type=int, help="worker processes")

    p = _Parser(prog="tempoground", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    f = sub.add_parser("forge", parents=[common], help="synthesise a grounding corpus")
    f.add_argument("--fg", action="append", help="foreground manifest (repeatable)")
    f.add_argument("--bg", help="background manifest")
    f.add_argument("-n", "--count", type=int, help="number of samples")

    n = sub.add_parser("negatives", parents=[common], help="attach audited negative queries")
    n.add_argument("manifest")
    n.add_argument("--pool", action="append", help="manifest(s) feeding the query pool (default: the input)")

    s = sub.add_parser("sequence", parents=[common], help="compile interleaved training records")
    s.add_argument("manifest")
    s.add_argument("--granularity", type=float)
    s.add_argument("--chunk", type=float)
    s.add_argument("--frame-ms", type=float)
    s.add_argument("--negative-grounding", action="store_true", default=None,
                   help="also emit a grounding record for the negative query")

    e = sub.add_parser("eval", parents=[common], help="score predictions against a benchmark manifest")
    e.add_argument("manifest")
    e.add_argument("predictions")
    e.add_argument("--thresholds", type=_thresholds)
    e.add_argument("--iou-cutoff", type=float)
    e.add_argument("--table", action="store_true", help="also print an R1/mIoU table")

    st = sub.add_parser("stats", parents=[common], help="corpus statistics")
    st.add_argument("manifest")

    o = sub.add_parser("oracle-check", parents=[common], help="verify forged offsets with the reference locator")
    o.add_argument("manifest")
    o.add_argument("--tolerance", type=float)
    o.add_argument("--predictions", help="also write oracle predictions (JSONL) for `eval`")

    g = sub.add_parser("segment", parents=[common], help="cut a long SED recording into fixed chunks")
    g.add_argument("audio")
    g.add_argument("events", help="TSV of onset, offset, label")
    g.add_argument("--chunk", type=float)
    return p


def _config(args) -> RunConfig:
    cfg = load_config(args.config)
    return cfg.with_overrides(
        global_seed=args.seed, out=args.out, jobs=args.jobs,
        granularity_s=getattr(args, "granularity", None),
        chunk_s=getattr(args, "chunk", None) if args.command == "sequence" else None,
        sed_chunk_s=getattr(args, "chunk", None) if args.command == "segment" else None,
        frame_ms=getattr(args, "frame_ms", None),
        thresholds=getattr(args, "thresholds", None),
        iou_cutoff=getattr(args, "iou_cutoff", None),
        oracle_tolerance_s=getattr(args, "tolerance", None),
        negative_grounding=getattr(args, "negative_grounding", None),
        fg_manifests=getattr(args, "fg", None),
        bg_manifest=getattr(args, "bg", None),
        sample_count=getattr(args, "count", None),
    )


def _emit_json(obj, out: Optional[str]):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_forge(cfg: RunConfig) -> int:
    if not cfg.fg_manifests or not cfg.bg_manifest or not cfg.out:
        raise ConfigError("forge needs foreground manifest(s), a background manifest and --out")
    result = forge_corpus(cfg.fg_manifests, cfg.bg_manifest, cfg.forge_config(), cfg.global_seed,
                          cfg.out, jobs=cfg.jobs)
    stats = result.stats
    density = f"{stats.temporal_density:.4f}" if stats else "n/a"
    print(f"forged {len(result.samples)} samples -> {result.manifest_path}")
    print(f"temporal density {density}; skipped sources {result.skipped}/{result.considered}")
    if result.composition:
        print("composition: " + ", ".join(f"{k}={v}" for k, v in result.composition.items()))
    return EXIT_OK


def cmd_negatives(cfg: RunConfig, manifest: str, pool_sources: Optional[List[str]]) -> int:
    samples = read_manifest(manifest)
    pool = build_query_pool(pool_sources or [manifest])
    stop = cfg.stopwords()
    augmented = add_negatives(samples, pool, cfg.global_seed, stop)
    problems = audit_negatives(augmented, stop)
    if problems:
        raise DataError("negative audit failed:\n  " + "\n  ".join(problems[:20]))
    out = cfg.out or str(Path(manifest).with_suffix(".neg.jsonl"))
    write_manifest(out, augmented)
    print(f"{len(augmented)} negatives from a pool of {len(pool)} -> {out} (audit clean)")
    return EXIT_OK


def cmd_sequence(cfg: RunConfig, manifest: str) -> int:
    samples = read_manifest(manifest)
    rows = []
    for s in samples:
        for rec in quadruplet_records(s, cfg.granularity_s, frame_ms=cfg.frame_ms, chunk_s=cfg.chunk_s,
                                      negative_grounding=cfg.negative_grounding):
            rows.append(rec.to_json())
    out = cfg.out or str(Path(manifest).with_suffix(".records.jsonl"))
    write_jsonl(out, rows)
    print(f"{len(rows)} training records -> {out}")
    return EXIT_OK


def cmd_eval(cfg: RunConfig, manifest: str, predictions: str, table: bool) -> int:
    samples = read_manifest(manifest)
    preds = {str(r["id"]): r for r in iter_jsonl(predictions)}
    records, missing = build_records(samples, preds)
    if not records:
        raise DataError(f"{manifest} holds no samples to evaluate")
    metrics = evaluate(records, cfg.thresholds, cfg.iou_cutoff)
    report = metrics.to_json()
    report["missing_predictions"] = missing
    report["thresholds"] = list(cfg.thresholds)
    report["iou_cutoff"] = cfg.iou_cutoff
    _emit_json(report, cfg.out)
    if table:
        print(metrics.table(), file=sys.stderr)
    return EXIT_OK


def cmd_stats(cfg: RunConfig, manifest: str) -> int:
    samples = read_manifest(manifest)
    if not samples:
        raise DataError(f"{manifest} is empty")
    stats = corpus_stats(samples)
    _emit_json(stats.to_json(), cfg.out)
    print("name | clips | queries | duration | window | density", file=sys.stderr)
    print(stats.table_row(Path(manifest).stem), file=sys.stderr)
    return EXIT_OK


def cmd_oracle_check(cfg: RunConfig, manifest: str, predictions: Optional[str]) -> int:
    report = oracle_check(manifest, cfg.oracle_tolerance_s, jobs=cfg.jobs)
    _emit_json(report, cfg.out)
    if predictions:
        write_jsonl(predictions, predictions_from_report(report))
    rate = report["hit_rate"]
    print(f"oracle hits {report['hits']}/{report['n']}"
          + (f" ({rate:.1%})" if rate is not None else ""), file=sys.stderr)
    return EXIT_OK


def _read_events(path: str):
    events = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.rstrip("\n").split("\t")
            if not line.strip():
                continue
            try:
                events.append((parts[2] if len(parts) > 2 else "", TimeWindow(float(parts[0]), float(parts[1]))))
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}:{lineno}: bad event line ({exc})") from exc
    return events


def cmd_segment(cfg: RunConfig, audio_path: str, events_path: str) -> int:
    if not Path(audio_path).is_file():
        raise DataError(f"audio not found: {audio_path}")
    buf = ac.read_wav(audio_path)
    chunks = segment_for_sed(buf, _read_events(events_path), cfg.sed_chunk_s)
    out = Path(cfg.out or Path(audio_path).with_suffix(""))
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(audio_path).stem
    rows = []
    for k, (chunk, evs) in enumerate(chunks):
        name = f"{stem}_{k:03d}.wav"
        ac.write_wav(out / name, chunk)
        rows.append({"audio": name, "duration": seconds(chunk.duration_s),
                     "events": [[lab, seconds(w.start_s), seconds(w.end_s)] for lab, w in evs]})
    write_jsonl(out / "segments.jsonl", rows)
    print(f"{len(chunks)} segments -> {out}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=os.environ.get("TEMPOGROUND_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        if args.command == "forge":
            return cmd_forge(cfg)
        if args.command == "negatives":
            return cmd_negatives(cfg, args.manifest, args.pool)
        if args.command == "sequence":
            return cmd_sequence(cfg, args.manifest)
        if args.command == "eval":
            return cmd_eval(cfg, args.manifest, args.predictions, args.table)
        if args.command == "stats":
            return cmd_stats(cfg, args.manifest)
        if args.command == "oracle-check":
            return cmd_oracle_check(cfg, args.manifest, args.predictions)
        if args.command == "segment":
            return cmd_segment(cfg, args.audio, args.events)
    except ConfigError as exc:
        print(f"tempoground: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, DomainError) as exc:
        print(f"tempoground: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
