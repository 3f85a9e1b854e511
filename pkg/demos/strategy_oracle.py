# %% [markdown]
# # Exhaustive feedback strategies on tiny channels
#
# For q <= 2 and two slots, every encoder pair can be searched.  A strategy
# maps a message and whatever the transmitter heard over feedback to the
# next input.  The search asks for the largest message-set product that
# both receivers decode with certainty, and checks it against C * T.

# %%
from dicfb.channel import FOUR_LINK, NO_FEEDBACK, ONE_LINK, TWO_LINK, OperatingPoint
from dicfb.oracle.strategies import StrategySpace, exhaustive_feedback_search

for op in (OperatingPoint(1, 2), OperatingPoint(2, 1)):
    for topo in (NO_FEEDBACK, ONE_LINK, TWO_LINK, FOUR_LINK):
        res = exhaustive_feedback_search(StrategySpace(op, 2, topo))
        print(f"{op} {str(topo):10s} M1={res.M1:2d} M2={res.M2:2d} "
              f"bits={res.sum_bits:.3f} bound={res.capacity_bits}")

# %% [markdown]
# At (1, 2) feedback adds nothing to the sum: 4 bits in two slots with or
# without it.  The one-link witness spends them unevenly, 1 bit for user 1
# and 3 for user 2.  Receiver 2 tells all 8 of user 2's messages apart.

# %%
res = exhaustive_feedback_search(StrategySpace(OperatingPoint(1, 2), 2, ONE_LINK))
w = res.witness
for w2 in range(res.M2):
    y1, y2 = w.outputs(0, w2)
    print(f"message {w2:03b}: receiver 2 sees {[format(v, '02b') for v in y2]}")
