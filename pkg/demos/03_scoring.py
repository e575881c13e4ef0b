# %% [markdown]
# # Scoring free-text answers
#
# Model outputs are plain text. Verdicts are read from the leading word,
# windows from "A to B seconds"-style spans.

# %%
from tempoground.evaluation import build_records, evaluate, interval_set_iou, parse_existence, parse_windows
from tempoground.forge import GroundingSample
from tempoground.intervals import TimeWindow as W

for text in ["Yes.", "no, it does not occur", "The clip has rain"]:
    print(repr(text), "->", parse_existence(text))

for text in ["From 3.20 seconds to 5.70 seconds", "between 10 and 12 seconds", "3.5s - 7s",
             "From 5 seconds to 3 seconds"]:
    print(repr(text), "->", parse_windows(text))

# %% [markdown]
# IoU is computed on the union of each window set.

# %%
print(interval_set_iou([W(2, 6)], [W(4, 8)]))
print(interval_set_iou([W(0, 1), W(2, 3)], [W(0, 3)]))

# %% [markdown]
# Two-stage scoring: a positive counts as a true positive only when the
# model says yes and the predicted windows reach IoU above 0.3. An IoU of
# exactly 0.3 is a false positive.

# %%
gts = [GroundingSample(f"s{i}", f"s{i}.wav", 50.0, "dog barks", (W(10, 20),), "engine idles") for i in range(4)]
preds = {
    "s0": {"stage1_text": "Yes.", "stage2_text": "From 10 seconds to 20 seconds"},
    "s1": {"stage1_text": "Yes.", "stage2_text": "From 10 seconds to 13 seconds"},   # IoU 0.3
    "s2": {"stage1_text": "No.", "stage2_text": ""},
    "s3": {"stage1_text": "Yes.", "stage2_text": "From 12 seconds to 20 seconds"},
    "s0:neg": {"stage1_text": "No."}, "s1:neg": {"stage1_text": "No."},
    "s2:neg": {"stage1_text": "Yes."}, "s3:neg": {"stage1_text": "No."},
}
records, missing = build_records(gts, preds)
report = evaluate(records)
print((report.tp, report.fp, report.fn, report.tn), f"F1 {report.f1:.4f}")
print(report.table())
