# %% [markdown]
# # Forging a needle-in-a-haystack grounding corpus
#
# Short foreground events are dropped into long ambient backgrounds. The
# insertion offset is drawn by the forger, so the ground-truth window is
# known exactly. Everything below runs on synthetic audio written to a
# temporary directory.

# %%
import json
import tempfile
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from tempoground import audio as ac
from tempoground.forge import (ForgeConfig, add_negatives, audit_negatives, build_query_pool, corpus_stats,
                               forge_corpus, read_manifest)

work = Path(tempfile.mkdtemp(prefix="forge-demo-"))
rng = np.random.default_rng(0)
SR = 16000

# %% [markdown]
# Backgrounds: brown-ish noise, 65 s each, one of them at 32 kHz to show
# resampling on load.

# %%
(work / "wav").mkdir()
bg_rows = []
for i, sr in enumerate([16000, 32000, 16000]):
    white = rng.standard_normal(65 * sr)
    x = lfilter([1.0], [1.0, -0.95], white)
    ac.write_wav(work / f"wav/bg{i}.wav", ac.AudioBuffer(0.05 * x / x.std(), sr))
    bg_rows.append({"audio": f"wav/bg{i}.wav"})

# %% [markdown]
# Foregrounds: tone bursts with silent padding. The first source carries
# strong labels (onset/offset), the second relies on the energy trim.

# %%
captions = ["a dog barks", "glass shatters", "church bell rings", "car horn honks", "door slams shut",
            "baby cries", "thunder rumbles", "whistle blows"]
strong, weak = [], []
for i, cap in enumerate(captions):
    d = float(rng.uniform(1.5, 5.0))
    t = np.arange(int(d * SR)) / SR
    burst = 0.3 * np.sin(2 * np.pi * rng.uniform(300, 2000) * t) * (np.sin(np.pi * t / d) ** 0.5)
    clip = np.concatenate([np.zeros(SR), burst, np.zeros(SR)])
    ac.write_wav(work / f"wav/fg{i}.wav", ac.AudioBuffer(clip, SR))
    row = {"audio": f"wav/fg{i}.wav", "caption": cap}
    if i % 2 == 0:
        strong.append({**row, "events": [[1.0, round(1.0 + d, 3)]]})
    else:
        weak.append(row)
for name, rows in (("strong", strong), ("weak", weak), ("bg", bg_rows)):
    (work / f"{name}.jsonl").write_text("".join(json.dumps(r) + "\n" for r in rows))

# %% [markdown]
# Forge 16 samples. Background subclips are 40-60 s, the foreground gets
# +-5 dB jitter and the background sits 10 +- 5 dB below it.

# %%
res = forge_corpus([work / "strong.jsonl", work / "weak.jsonl"], work / "bg.jsonl",
                   ForgeConfig(sample_count=16), global_seed=7, out_dir=work / "corpus")
print(res.composition, "skipped", res.skipped)
for s in res.samples[:4]:
    print(s.id, s.positive_query, s.windows[0].as_pair(), f"{s.duration_s:.2f}s",
          f"rel {s.provenance.bg_rel_db:+.1f} dB")

# %%
stats = corpus_stats(res.samples)
print("name | clips | queries | duration | window | density")
print(stats.table_row("demo"))

# %% [markdown]
# Negatives come from the pooled query set. A candidate is rejected if it
# is annotated on the same audio or shares a content word with the
# positive query.

# %%
samples = read_manifest(work / "corpus/manifest.jsonl")
pool = build_query_pool([("demo", samples)])
with_neg = add_negatives(samples, pool, seed=3)
for s in with_neg[:4]:
    print(f"{s.positive_query!r:24} -> negative {s.negative_query!r}")
print("audit violations:", audit_negatives(with_neg))
