"""Free-text response parsing and grounding metrics.

Responses come in two stages: a yes/no existence verdict and, for
positives, a list of ``From A seconds to B seconds`` windows. Metrics:

* ``R1@θ``  fraction of positive queries with IoU >= θ
* ``mIoU``  mean IoU over positive queries
* existence accuracy on positives and on negatives
* two-stage F1, where a true positive needs a "yes" *and* IoU > 0.3

IoU is taken between the unions of the predicted and ground-truth window
sets, which reduces to the usual single-window IoU.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError
from .intervals import TimeWindow, intersection_measure, measure

YES, NO, UNPARSEABLE = "yes", "no", "unparseable"
DEFAULT_THRESHOLDS = (0.3, 0.5)
DEFAULT_IOU_CUTOFF = 0.3

_VERDICT = re.compile(r"^[\W_]*(yes|no)\b", re.IGNORECASE)

_NUM = r"(\d+(?:\.\d+)?)"
_UNIT = r"(?:seconds?|secs?|s)\b"
_RANGE = r"(?:to|until|till|through|and|-|–|—)"
# "[From] A [seconds] to B seconds" or a lone "A seconds".
_TIME_SPAN = re.compile(
    rf"(?:\bfrom\s+)?{_NUM}\s*(?:{_UNIT})?\s*{_RANGE}\s*{_NUM}\s*{_UNIT}|{_NUM}\s*{_UNIT}",
    re.IGNORECASE,
)


@dataclass(frozen=True)
class ParsedResponse:
    verdict: str = UNPARSEABLE
    windows: Tuple[TimeWindow, ...] = ()
    raw_text: str = ""
    warnings: Tuple[str, ...] = ()


def parse_existence(text: Optional[str]) -> str:
    """``yes``/``no`` from the leading token of a reply, else ``unparseable``."""
    m = _VERDICT.match(text or "")
    return m.group(1).lower() if m else UNPARSEABLE


def parse_windows(text: Optional[str]) -> Tuple[List[TimeWindow], List[str]]:
    """Extract second-valued numbers and pair them, in order, into windows.

    Never raises. Inverted or empty pairs and a dangling odd number are
    dropped and reported in the returned warnings.
    """
    numbers: List[float] = []
    for m in _TIME_SPAN.finditer(text or ""):
        numbers.extend(float(g) for g in m.groups() if g is not None)
    warnings = []
    if len(numbers) % 2:
        warnings.append(f"dropped unpaired trailing value {numbers[-1]:g}")
        numbers = numbers[:-1]
    windows = []
    for s, e in zip(numbers[::2], numbers[1::2]):
        if e <= s:
            warnings.append(f"dropped inverted window ({s:g}, {e:g})")
            continue
        windows.append(TimeWindow(s, e))
    return windows, warnings


def parse_response(text: Optional[str], stage: str = "grounding") -> ParsedResponse:
    verdict = parse_existence(text)
    if stage == "existence":
        return ParsedResponse(verdict, (), text or "", ())
    windows, warnings = parse_windows(text)
    return ParsedResponse(verdict, tuple(windows), text or "", tuple(warnings))


def interval_set_iou(a: Sequence[TimeWindow], b: Sequence[TimeWindow]) -> float:
    """IoU of two window sets measured on the real line; ``b`` may be empty."""
    if not a:
        raise DomainError("ground-truth window set must be non-empty")
    if not b:
        return 0.0
    inter = intersection_measure(a, b)
    return inter / (measure(a) + measure(b) - inter)


@dataclass(frozen=True)
class EvalRecord:
    sample_id: str
    polarity: str
    gt_windows: Tuple[TimeWindow, ...] = ()
    stage1: ParsedResponse = ParsedResponse()
    stage2: Optional[ParsedResponse] = None

    def __post_init__(self):
        if self.polarity not in ("positive", "negative"):
            raise DomainError(f"polarity must be positive/negative, got {self.polarity!r}")
        if self.polarity == "negative" and self.gt_windows:
            raise DomainError(f"negative record {self.sample_id} carries ground-truth windows")
        object.__setattr__(self, "gt_windows", tuple(self.gt_windows))

    @property
    def iou(self) -> float:
        predicted = self.stage2.windows if self.stage2 else ()
        return interval_set_iou(self.gt_windows, predicted)


@dataclass
class MetricsReport:
    n: int = 0
    r1: Dict[float, float] = field(default_factory=dict)
    miou: Optional[float] = None
    pos_acc: Optional[float] = None
    neg_acc: Optional[float] = None
    unparseable: int = 0
    f1: Optional[float] = None
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0
    per_sample: List[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "r1": {f"{k:g}": v for k, v in sorted(self.r1.items())},
            "miou": self.miou,
            "pos_acc": self.pos_acc,
            "neg_acc": self.neg_acc,
            "unparseable": self.unparseable,
            "f1": self.f1,
            "tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn,
            "per_sample": self.per_sample,
        }

    def table(self) -> str:
        """R1/mIoU columns in percent, one header row and one value row."""
        ths = sorted(self.r1)
        head = [f"R1@{str(t).lstrip('0') or '0'}" for t in ths] + ["mIoU"]
        vals = [f"{100 * self.r1[t]:.1f}" for t in ths]
        vals.append("-" if self.miou is None else f"{100 * self.miou:.1f}")
        widths = [max(len(h), len(v)) for h, v in zip(head, vals)]
        return "\n".join([
            " | ".join(h.rjust(w) for h, w in zip(head, widths)),
            " | ".join(v.rjust(w) for v, w in zip(vals, widths)),
        ])


def score_grounding(records: Sequence[EvalRecord], thresholds: Iterable[float] = DEFAULT_THRESHOLDS) -> MetricsReport:
    positives = [r for r in records if r.polarity == "positive"]
    if not positives:
        raise DomainError("score_grounding needs at least one positive record")
    ious = np.array([r.iou for r in positives])
    r1 = {float(t): float(np.mean(ious >= t)) for t in sorted(set(thresholds))}
    per = [{"id": r.sample_id, "iou": float(v)} for r, v in zip(positives, ious)]
    return MetricsReport(n=len(positives), r1=r1, miou=float(ious.mean()), per_sample=per)


@dataclass(frozen=True)
class ExistenceScore:
    pos_acc: Optional[float]
    neg_acc: Optional[float]
    unparseable: int


def score_existence(records: Sequence[EvalRecord]) -> ExistenceScore:
    """Accuracy of stage-1 verdicts; unparseable replies count as wrong and are tallied."""
    pos = [r.stage1.verdict for r in records if r.polarity == "positive"]
    neg = [r.stage1.verdict for r in records if r.polarity == "negative"]
    pos_acc = sum(v == YES for v in pos) / len(pos) if pos else None
    neg_acc = sum(v == NO for v in neg) / len(neg) if neg else None
    return ExistenceScore(pos_acc, neg_acc, sum(v == UNPARSEABLE for v in pos + neg))


def classify(record: EvalRecord, iou_cutoff: float = DEFAULT_IOU_CUTOFF) -> str:
    """The single confusion outcome of one record under the two-stage protocol."""
    verdict = record.stage1.verdict
    if record.polarity == "negative":
        return "tn" if verdict == NO else "fp"
    if verdict != YES:
        return "fn"
    return "tp" if record.iou > iou_cutoff else "fp"


def f1_score(tp: int, fp: int, fn: int) -> float:
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def two_stage_f1(records: Sequence[EvalRecord], iou_threshold: float = DEFAULT_IOU_CUTOFF) -> MetricsReport:
    if not records:
        raise DomainError("two_stage_f1 needs at least one record")
    counts = {"tp": 0, "fp": 0, "fn": 0, "tn": 0}
    per = []
    for r in records:
        outcome = classify(r, iou_threshold)
        counts[outcome] += 1
        per.append({"id": r.sample_id, "polarity": r.polarity, "outcome": outcome})
    return MetricsReport(n=len(records), f1=f1_score(counts["tp"], counts["fp"], counts["fn"]),
                         per_sample=per, **counts)


def evaluate(records: Sequence[EvalRecord], thresholds: Iterable[float] = DEFAULT_THRESHOLDS,
             iou_cutoff: float = DEFAULT_IOU_CUTOFF) -> MetricsReport:
    """All metrics in one report, with per-sample diagnostics merged by record."""
    if not records:
        raise DomainError("nothing to evaluate")
    has_pos = any(r.polarity == "positive" for r in records)
    grounding = score_grounding(records, thresholds) if has_pos else MetricsReport()
    existence = score_existence(records)
    confusion = two_stage_f1(records, iou_cutoff)

    iou_by_id = {d["id"]: d["iou"] for d in grounding.per_sample}
    per = []
    for r, c in zip(records, confusion.per_sample):
        per.append({
            "id": r.sample_id, "polarity": r.polarity, "verdict": r.stage1.verdict,
            "iou": iou_by_id.get(r.sample_id) if r.polarity == "positive" else None,
            "outcome": c["outcome"],
            "predicted": [list(w.as_pair()) for w in (r.stage2.windows if r.stage2 else ())],
            "warnings": list(r.stage2.warnings) if r.stage2 else [],
        })
    return MetricsReport(
        n=len(records), r1=grounding.r1, miou=grounding.miou,
        pos_acc=existence.pos_acc, neg_acc=existence.neg_acc, unparseable=existence.unparseable,
        f1=confusion.f1, tp=confusion.tp, fp=confusion.fp, fn=confusion.fn, tn=confusion.tn,
        per_sample=per,
    )


NEGATIVE_SUFFIX = ":neg"


def build_records(samples, predictions: Mapping[str, Mapping]) -> Tuple[List[EvalRecord], List[str]]:
    """Pair benchmark samples with prediction rows keyed by id.

    A sample yields a positive record under its own id and, when it carries a
    negative query, a negative record under ``<id>:neg``. Missing predictions
    are scored as empty (unparseable) replies and listed in the second
    return value.
    """
    records, missing = [], []

    def texts(key):
        row = predictions.get(key)
        if row is None:
            missing.append(key)
            return "", ""
        return row.get("stage1_text") or "", row.get("stage2_text") or ""

    for s in samples:
        t1, t2 = texts(s.id)
        records.append(EvalRecord(s.id, "positive", tuple(s.windows),
                                  parse_response(t1, "existence"), parse_response(t2)))
        if s.negative_query:
            key = s.id + NEGATIVE_SUFFIX
            t1, t2 = texts(key)
            records.append(EvalRecord(key, "negative", (), parse_response(t1, "existence"),
                                      parse_response(t2) if t2 else None))
    return records, missing
