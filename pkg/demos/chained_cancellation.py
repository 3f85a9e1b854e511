# %% [markdown]
# # Chained interference cancellation with one feedback link
#
# At (n, m) = (3, 1) transmitter 2 sends three fresh bits per slot.  Its
# top level also lands on receiver 1's bottom level, where it corrupts
# one of user 1's bits.  Transmitter 1 hears y1 over
# feedback, learns that bit and repeats it on its own top level in the
# next slot.  Receiver 1 sees the repeat clean, strips the interference
# from the previous slot and recovers the buried bit one slot late.

# %%
from dicfb.channel import OperatingPoint
from dicfb.sessions import decode_check, one_link_session

op = OperatingPoint(3, 1)
trace, report = one_link_session(op, T=6, seed=1)

print("slot|dir|x1|x2|y1|y2|fb1|fb2")
print(trace.export())

# %% [markdown]
# Every bit has a ledger entry: the slot it was sent in and the slot its
# value was pinned down.  User 2 never waits.  User 1's lowest level waits
# one slot for the repeat.

# %%
for user in (1, 2):
    delays = {}
    for rec in trace.ledger[user]:
        delays.setdefault(rec.level, set()).add(rec.delay)
    print(f"user {user}: delay by level {dict(sorted(delays.items()))}")

# %%
print(f"delivered u1={report.delivered_u1} u2={report.delivered_u2} "
      f"rate={report.finite_sum_rate} (limit {report.asymptotic_rate})")
check = decode_check(trace)
print("independent replay:", "clean" if check.ok else check.failures)

# %% [markdown]
# The finite-horizon rate climbs towards 2n - m = 5 as the horizon grows;
# only the last slot's buried bit is lost.

# %%
for T in (10, 40, 160):
    _, rep = one_link_session(op, T)
    print(T, rep.delivered, float(rep.finite_sum_rate))
