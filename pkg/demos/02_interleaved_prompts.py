# %% [markdown]
# # Timestamp-interleaved prompts
#
# The encoder emits one frame per 40 ms. The prompt interleaves a text
# marker every `g` seconds with the block of frames that falls under it.

# %%
from tempoground.forge import GroundingSample
from tempoground.intervals import TimeWindow
from tempoground.sequencer import chunk_boundaries, layout, quadruplet_records, render

t = layout(3.5, granularity_s=1.0)
print(t.blocks)
print(t.total_frames, "frames")

# %%
print(render(t, "grounding", "a dog barks"))

# %% [markdown]
# Long inputs are cut into 30 s encoder chunks. Each chunk gets its own
# frame grid, but markers keep counting in global time.

# %%
t45 = layout(45.0, 1.0, chunk_s=30.0)
print([c.as_pair() for c in chunk_boundaries(45.0)])
print(t45.blocks[29:32])

# %% [markdown]
# Finer granularity means more markers over the same frames.

# %%
for g in (2.0, 1.0, 0.2):
    lt = layout(60.0, g)
    print(f"g={g}: {len(lt.blocks)} markers, {lt.total_frames} frames")

# %% [markdown]
# A quadruplet yields existence(+), existence(-) and grounding(+) records.
# Loss is only taken on the target text.

# %%
s = GroundingSample("demo", "demo.wav", 52.9, "a dog barks", (TimeWindow(12.0, 16.5),),
                    negative_query="engine idles")
for rec in quadruplet_records(s):
    print(rec.kind.value, repr(rec.query), "->", rec.target, "| masked", rec.loss_mask.masked_count)
