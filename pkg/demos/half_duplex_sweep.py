# %% [markdown]
# # Half-duplex feedback: spending slots on the reverse link
#
# With half-duplex feedback a frame of L slots is split into f forward
# slots and L - f reverse slots.  Feedback has to travel over the same
# interference channel, so every reverse slot is a slot without data.
# Once 3m >= 2n no split beats running forward all the time.

# %%
from fractions import Fraction

from dicfb.capacity import half_duplex_sum_capacity, no_fb_sum_capacity
from dicfb.channel import OperatingPoint
from dicfb.sessions import sweep_t

for n, m in [(3, 2), (1, 2), (2, 5), (2, 1), (4, 1)]:
    op = OperatingPoint(n, m)
    res = sweep_t(op, L=6, T_frames=6)
    f, strategy, rate = res.best
    print(f"{op}: best f={f}/6 {strategy} rate {rate}  "
          f"no-feedback {no_fb_sum_capacity(op)}  capacity {half_duplex_sum_capacity(op)}")

# %% [markdown]
# Below alpha = 2/3 the true half-duplex capacity is only bracketed.  The
# implemented chained strategy helps user 1 only for the forward slots
# whose feedback fits in the reverse slots, and that never pays for the
# lost forward time.

# %%
op = OperatingPoint(4, 1)
for f, strategy, rate in sweep_t(op, L=6, T_frames=20).rows:
    print(f"f={f} t={Fraction(f, 6)} {strategy:20s} {float(rate):.3f}")
