"""
Slot-by-slot session engine.

Every transmitted level carries the XOR of a set of payload bits, named by
ids ``(user, index)``.  The engine computes the numeric signals through
the channel law, records them, and feeds each receiver the equations
"these bit ids XOR to this observed value", which it resolves by
back-substitution.  Transmitter 1 keeps its own solver fed by feedback;
it may only place another user's bit on the air once that solver has
recovered it.
"""

from .channel import (FeedbackTopology, LevelVector, OperatingPoint, Variant,
                      feedback_view, forward_transmit, reverse_transmit)
from .payload import PayloadSource
from .trace import BitRecord, SlotRecord, TransmissionTrace


class PlanError(RuntimeError):
    """A transmitter was scheduled to send a bit it does not know."""


class DecodingConflict(RuntimeError):
    """Observations contradict each other; the channel law was violated."""


class PeelingSolver:
    """Resolve XOR equations by repeatedly solving those with one unknown.

    ``resolved[id]`` is ``(value, slot)`` where ``slot`` is the time the
    equation completing the chain arrived.
    """

    def __init__(self):
        self.resolved = {}
        self._pending = {}
        self._watch = {}
        self._next = 0

    def know(self, bit_id, value: int, slot: int):
        if bit_id in self.resolved:
            if self.resolved[bit_id][0] != value:
                raise DecodingConflict(f"bit {bit_id} resolved twice with different values")
            return
        self._resolve(bit_id, value, slot)

    def add(self, ids, value: int, slot: int):
        """Add the equation ``XOR(ids) == value`` observed at ``slot``."""
        unknown = set()
        for i in ids:
            if i in self.resolved:
                value ^= self.resolved[i][0]
            else:
                unknown.add(i)
        self._settle(unknown, value, slot)

    def _settle(self, unknown, value, slot):
        if not unknown:
            if value:
                raise DecodingConflict(f"inconsistent observation at slot {slot}")
            return
        if len(unknown) == 1:
            self._resolve(next(iter(unknown)), value, slot)
            return
        key = self._next
        self._next += 1
        self._pending[key] = [unknown, value]
        for i in unknown:
            self._watch.setdefault(i, set()).add(key)

    def _resolve(self, bit_id, value, slot):
        stack = [(bit_id, value)]
        while stack:
            bid, val = stack.pop()
            if bid in self.resolved:
                if self.resolved[bid][0] != val:
                    raise DecodingConflict(f"bit {bid} resolved twice with different values")
                continue
            self.resolved[bid] = (val, slot)
            for key in self._watch.pop(bid, ()):
                eq = self._pending.get(key)
                if eq is None:
                    continue
                eq[0].discard(bid)
                eq[1] ^= val
                if len(eq[0]) == 1:
                    del self._pending[key]
                    (other,) = eq[0]
                    stack.append((other, eq[1]))
                elif not eq[0]:
                    del self._pending[key]
                    if eq[1]:
                        raise DecodingConflict(f"inconsistent observation at slot {slot}")

    def value(self, bit_id):
        r = self.resolved.get(bit_id)
        return None if r is None else r[0]


def received_structure(x1_syms, x2_syms, op: OperatingPoint):
    """Bit-id sets seen at each receiver level, following the channel law."""
    q = op.q
    out = []
    for own, cross, k_own, k_cross in ((x1_syms, x2_syms, op.n, op.m),
                                       (x2_syms, x1_syms, op.n, op.m)):
        row = []
        for p in range(1, q + 1):
            s = set()
            j = p - (q - k_own)
            if j >= 1:
                s ^= own[j - 1]
            j = p - (q - k_cross)
            if j >= 1:
                s ^= cross[j - 1]
            row.append(frozenset(s))
        out.append(row)
    return out[0], out[1]


class Engine:
    """Mutable state of one running session.

    Parameters
    ----------
    receivers : tuple of bool
        Whether each receiver runs a peeling solver (block decoders are
        driven by the session instead).
    """

    def __init__(self, op: OperatingPoint, topology: FeedbackTopology, horizon: int,
                 scheme: str, seed: int, receivers=(True, True)):
        self.op = op
        self.q = op.q
        self.payload = PayloadSource(seed)
        self.trace = TransmissionTrace(op, topology, horizon, scheme, seed)
        self.rx = tuple(PeelingSolver() if r else None for r in receivers)
        self.tx1 = PeelingSolver()
        self.slot = 0
        self.received = {}

    def fresh(self, user: int, level: int, slot: int):
        """Draw one payload bit for ``user`` and register it in the ledger."""
        (bit,) = self.payload.draw(user)
        idx = self.payload.drawn[user - 1] - 1
        bid = (user, idx)
        self.trace.ledger[user].append(BitRecord(user, idx, slot, level))
        if user == 1:
            self.tx1.know(bid, bit, slot)
        return bid

    def _bit_at_tx(self, tx: int, bid) -> int:
        user, idx = bid
        if user == tx:
            return self.payload.bit(user, idx)
        if tx == 1:
            v = self.tx1.value(bid)
            if v is None:
                raise PlanError(f"slot {self.slot}: transmitter 1 has not learned bit {bid}")
            return v
        raise PlanError(f"slot {self.slot}: transmitter 2 cannot send bit {bid}")

    def _vector(self, tx: int, syms) -> LevelVector:
        bits = []
        for s in syms:
            b = 0
            for bid in s:
                b ^= self._bit_at_tx(tx, bid)
            bits.append(b)
        return LevelVector.from_bits(bits)

    def forward(self, x1_syms, x2_syms, tx1_learns: bool = False):
        """Run one forward slot; ``tx1_learns`` feeds Y1 to transmitter 1's solver."""
        self.slot += 1
        s = self.slot
        x1_syms = [frozenset(v) for v in x1_syms]
        x2_syms = [frozenset(v) for v in x2_syms]
        x1 = self._vector(1, x1_syms)
        x2 = self._vector(2, x2_syms)
        y1, y2 = forward_transmit(x1, x2, self.op)
        topo = self.trace.topology
        fb = ((), ()) if topo.variant is Variant.HALF_DUPLEX else feedback_view(topo, y1, y2)
        self.trace.records.append(SlotRecord(s, "F", x1, x2, y1, y2, *fb))
        self.trace.layout[s] = (tuple(x1_syms), tuple(x2_syms))
        struct = received_structure(x1_syms, x2_syms, self.op)
        self.received[s] = struct
        for j, (y, rows) in enumerate(((y1, struct[0]), (y2, struct[1]))):
            if self.rx[j] is not None:
                for p, ids in enumerate(rows, 1):
                    self.rx[j].add(ids, y.level(p), s)
        if tx1_learns:
            for p, ids in enumerate(struct[0], 1):
                self.tx1.add(ids, y1.level(p), s)
        return y1, y2

    def reverse(self, r1_bits):
        """Reverse slot with receiver 1 sending ``r1_bits`` on its top levels.

        Receiver 2 stays silent.  Returns what transmitter 1 hears.
        """
        self.slot += 1
        q = self.q
        bits = list(r1_bits) + [0] * (q - len(r1_bits))
        r1 = LevelVector.from_bits(bits)
        r2 = LevelVector.zeros(q)
        z1, z2 = reverse_transmit(r1, r2, self.op)
        self.trace.records.append(SlotRecord(self.slot, "R", r1, r2, z1, z2))
        return z1

    def finish(self):
        """Copy receiver resolutions of own bits into the ledger."""
        for user in (1, 2):
            solver = self.rx[user - 1]
            if solver is None:
                continue
            for rec in self.trace.ledger[user]:
                r = solver.resolved.get((user, rec.index))
                if r is not None:
                    rec.value, rec.resolved_slot = r
        return self.trace
