# %% [markdown]
# # Sum capacity against interference strength
#
# Normalized by 2n, the no-feedback sum capacity traces the W-shaped curve
# and the feedback capacity the V-shaped one.  They meet on
# 2/3 <= alpha <= 2 and at alpha = 0.

# %%
import numpy as np

from dicfb.capacity import fb_sum_capacity, feedback_gain, no_fb_sum_capacity
from dicfb.channel import OperatingPoint

n = 12
alpha = np.arange(3 * n + 1) / n
fb = np.array([fb_sum_capacity(OperatingPoint(n, m)).lower / (2 * n) for m in range(3 * n + 1)],
              dtype=float)
nf = np.array([no_fb_sum_capacity(OperatingPoint(n, m)).lower / (2 * n) for m in range(3 * n + 1)],
              dtype=float)

for a, f, w in zip(alpha, fb, nf):
    bar = "#" * int(round(40 * f))
    print(f"{a:5.3f}  fb {f:5.3f}  no-fb {w:5.3f}  {bar}")

# %% [markdown]
# Where the curves differ, the gain is the gap in bits per slot.

# %%
gain = np.array([int(feedback_gain(OperatingPoint(n, m))) for m in range(3 * n + 1)])
print("alpha with positive gain:", alpha[gain > 0].round(3))
print("largest gain", gain.max(), "bits at alpha", alpha[gain.argmax()])

# %% [markdown]
# The no-feedback values are not taken on trust: the exhaustive allocation
# search reaches them on small channels.

# %%
from dicfb.oracle.allocations import search_level_allocations

for m in range(7):
    op = OperatingPoint(3, m)
    a = search_level_allocations(op, 1)
    print(op, "search", a.rate, "formula", no_fb_sum_capacity(op), "witness", a.witness())
