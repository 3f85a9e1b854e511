"""
Full transmission sessions: encoders, decoders and delivered-bit accounting.

All sessions return ``(TransmissionTrace, RateReport)``.  Delivered bits are
counted from the receivers' ledgers, never from a formula.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .baseline import allocation_for
from .capacity import (CapacityValue, fb_sum_capacity, half_duplex_sum_capacity,
                       no_fb_sum_capacity)
from .channel import (NO_FEEDBACK, ONE_LINK, FeedbackTopology, LevelVector,
                      OperatingPoint, Variant, feedback_view, forward_transmit,
                      reverse_transmit)
from .engine import DecodingConflict, Engine, PeelingSolver, received_structure
from .gf2 import XorBasis, left_inverse_rows, parity
from .payload import PayloadSource
from .trace import RateReport, TransmissionTrace


class RegimeError(ValueError):
    """The requested scheme does not apply at this operating point."""


STRATEGIES = ("no-feedback", "chained-one-link-hd", "relay-hd")


def _report(engine: Engine, asymptotic, capacity: CapacityValue) -> RateReport:
    trace = engine.trace
    delivered = [sum(1 for r in trace.ledger[u] if r.resolved_slot is not None)
                 for u in (1, 2)]
    delays = [r.delay for u in (1, 2) for r in trace.ledger[u] if r.delay is not None]
    fwd = sum(1 for r in trace.records if r.direction == "F")
    return RateReport(
        delivered_u1=delivered[0], delivered_u2=delivered[1],
        forward_slots=fwd, reverse_slots=len(trace.records) - fwd,
        asymptotic_rate=Fraction(asymptotic), formula_capacity=capacity,
        max_decoding_delay=max(delays, default=0),
        drawn_u1=engine.payload.drawn[0], drawn_u2=engine.payload.drawn[1])


def _check_dedicated(topology: FeedbackTopology):
    if not topology.dedicated:
        raise RegimeError(f"{topology} is not a dedicated feedback topology")


def _check_horizon(T, minimum):
    if not isinstance(T, int) or T < minimum:
        raise ValueError(f"horizon must be an integer >= {minimum}, got {T!r}")


# --- one-link chained cancellation -------------------------------------------------

def one_link_session(op: OperatingPoint, T: int, seed: int = 0,
                     topology: FeedbackTopology = ONE_LINK):
    """Chained interference cancellation with feedback of Y1 to transmitter 1.

    Transmitter 2 sends n fresh bits per slot.  Transmitter 1 repeats the
    top m levels of transmitter 2's previous input (learned from feedback)
    on its own top m levels and sends n - m fresh bits below them.

    m = n is handed to :func:`no_feedback_session`, where feedback gains
    nothing and the chain would never terminate.

    Raises
    ------
    RegimeError
        If m > n or the topology is not dedicated feedback.
    """
    _check_dedicated(topology)
    if op.m > op.n:
        raise RegimeError(f"one-link chained scheme needs m <= n, got {op}; "
                          "use relay_session or no_feedback_session")
    if op.m == op.n:
        return no_feedback_session(op, T, seed, topology=topology)
    _check_horizon(T, 2)
    n, m = op.n, op.m
    eng = Engine(op, topology, T, "one-link-chained", seed)
    prev = [frozenset()] * m
    for s in range(1, T + 1):
        x2 = [frozenset({eng.fresh(2, l, s)}) for l in range(1, n + 1)]
        x1 = list(prev) + [frozenset({eng.fresh(1, l, s)}) for l in range(m + 1, n + 1)]
        eng.forward(x1, x2, tx1_learns=True)
        prev = x2[:m]
    eng.finish()
    return eng.trace, _report(eng, 2 * n - m, fb_sum_capacity(op, topology.variant))


# --- virtual relay -----------------------------------------------------------------

def relay_session(op: OperatingPoint, T: int, seed: int = 0,
                  topology: FeedbackTopology = ONE_LINK):
    """User 1 idles; its pair forwards user 2's surplus cross-link bits.

    Transmitter 2 sends m fresh bits per slot.  Its top n arrive directly;
    levels n+1..m reach receiver 1, come back over feedback and are sent
    by transmitter 1 one slot later on its top m - n levels, which land
    above receiver 2's direct signal.

    Raises
    ------
    RegimeError
        If m < 2n or the topology is not dedicated feedback.
    """
    _check_dedicated(topology)
    if op.m < 2 * op.n:
        raise RegimeError(f"relay scheme needs m >= 2n, got {op}")
    _check_horizon(T, 2)
    n, m = op.n, op.m
    e = m - n
    eng = Engine(op, topology, T, "relay", seed)
    prev = [frozenset()] * e
    for s in range(1, T + 1):
        x2 = [frozenset({eng.fresh(2, l, s)}) for l in range(1, m + 1)]
        x1 = list(prev) + [frozenset()] * n
        eng.forward(x1, x2, tx1_learns=True)
        prev = x2[n:]
    eng.finish()
    return eng.trace, _report(eng, m, fb_sum_capacity(op, topology.variant))


# --- no feedback -------------------------------------------------------------------

class BlockDecoder:
    """Receiver for a block allocation: a left inverse restricted to own bits."""

    def __init__(self, alloc, receiver: int):
        own = alloc.images(receiver, receiver)
        other = XorBasis(alloc.images(3 - receiver, receiver)).rows
        rows = left_inverse_rows(own + other, alloc.op.q * alloc.block_len)
        self.rows = rows[:len(own)]
        self.q = alloc.op.q

    def decode(self, outputs) -> list:
        """Own bits from the list of received LevelVectors of one block."""
        y = 0
        for s, v in enumerate(outputs):
            y |= v.value << (s * self.q)
        return [parity(r & y) for r in self.rows]


def _block_layout(alloc, ids):
    """Per-slot level contents for one block given each generator's bit id."""
    q, B = alloc.op.q, alloc.block_len
    slots = []
    for s in range(B):
        per_tx = []
        for k in range(2):
            levels = []
            for lvl in range(1, q + 1):
                pos = s * q + (q - lvl)
                levels.append(frozenset(i for g, i in zip(alloc.generators[k], ids[k])
                                        if g >> pos & 1))
            per_tx.append(levels)
        slots.append(per_tx)
    return slots


def _first_position(g: int, q: int, B: int):
    """(slot offset, level) of the first slot and top level a generator touches."""
    for s in range(B):
        blk = (g >> (s * q)) & ((1 << q) - 1)
        if blk:
            return s, q - blk.bit_length() + 1
    raise ValueError("empty generator")


def _run_allocation(eng: Engine, alloc, forward_slots):
    """Send fresh bits with ``alloc`` over the given global slot numbers."""
    q, B = alloc.op.q, alloc.block_len
    decoders = (BlockDecoder(alloc, 1), BlockDecoder(alloc, 2))
    nblocks = len(forward_slots) // B
    for b in range(nblocks):
        slots = forward_slots[b * B:(b + 1) * B]
        ids = ([], [])
        for k in range(2):
            for g in alloc.generators[k]:
                off, lvl = _first_position(g, q, B)
                ids[k].append(eng.fresh(k + 1, lvl, slots[off]))
        outs = ([], [])
        for x1, x2 in _block_layout(alloc, ids):
            y1, y2 = eng.forward(x1, x2)
            outs[0].append(y1)
            outs[1].append(y2)
        for k in range(2):
            bits = decoders[k].decode(outs[k])
            recs = eng.trace.ledger[k + 1][-len(ids[k]):] if ids[k] else []
            for rec, bit in zip(recs, bits):
                rec.value, rec.resolved_slot = bit, slots[-1]
    for _ in forward_slots[nblocks * B:]:
        eng.forward([frozenset()] * q, [frozenset()] * q)


def no_feedback_session(op: OperatingPoint, T: int, seed: int = 0,
                        topology: FeedbackTopology = NO_FEEDBACK, cache=None):
    """Fixed linear allocation reaching the no-feedback sum capacity.

    Trailing slots that do not fill a whole block stay silent.  Feedback
    links, if any, are recorded in the trace but unused.

    Raises
    ------
    AllocationError
        If no allocation matching the formula is available.
    """
    if op.n == 0:
        raise RegimeError("no-feedback baseline needs n > 0")
    _check_horizon(T, 1)
    alloc = allocation_for(op, cache)
    eng = Engine(op, topology, T, "no-feedback", seed, receivers=(False, False))
    eng.trace.decoders = ("block", "block")
    eng.trace.allocation = alloc
    _run_allocation(eng, alloc, list(range(1, T + 1)))
    cap = (no_fb_sum_capacity(op) if topology.variant is Variant.NONE
           else fb_sum_capacity(op, topology.variant))
    return eng.trace, _report(eng, alloc.rate, cap)


def feedback_session(op: OperatingPoint, T: int, seed: int = 0,
                     topology: FeedbackTopology = ONE_LINK):
    """Best implemented scheme for a dedicated feedback topology or none.

    m < n runs the chained scheme, m >= 2n the relay, and the remaining
    points (where feedback brings no gain) the no-feedback allocation.
    """
    if topology.variant is Variant.NONE:
        return no_feedback_session(op, T, seed)
    _check_dedicated(topology)
    if op.m < op.n:
        return one_link_session(op, T, seed, topology)
    if op.m >= 2 * op.n:
        return relay_session(op, T, seed, topology)
    return no_feedback_session(op, T, seed, topology=topology)


# --- half duplex -------------------------------------------------------------------

def active_slots(op: OperatingPoint, L: int, f: int, strategy: str) -> int:
    """Forward slots per frame whose feedback fits in the frame's reverse slots."""
    n, m = op.n, op.m
    if strategy == "chained-one-link-hd":
        return min(f, n * (L - f) // m)
    if strategy == "relay-hd":
        return min(f, n * (L - f) // (m - n))
    return 0


def designed_rate(op: OperatingPoint, L: int, f: int, strategy: str) -> Fraction:
    """Long-run sum rate per channel use of a half-duplex strategy."""
    n, m = op.n, op.m
    a = active_slots(op, L, f, strategy)
    if strategy == "no-feedback":
        return no_fb_sum_capacity(op).bits_per_forward_slot
    if strategy == "chained-one-link-hd":
        d = n - m
        return Fraction(n * f + a * d + (f - a) * max(0, d - m), L)
    return Fraction(n * f + a * (m - n), L)


def admissible(op: OperatingPoint, L: int, f: int, strategy: str) -> bool:
    if op.n == 0:
        return False
    if strategy == "no-feedback":
        return f == L
    if strategy == "chained-one-link-hd":
        return 0 < op.m < op.n
    if strategy == "relay-hd":
        return op.m >= 2 * op.n
    raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")


def half_duplex_session(op: OperatingPoint, L: int, f: int, T_frames: int,
                        strategy: str, seed: int = 0):
    """Frames of f forward slots followed by L - f reverse slots.

    In reverse slots receiver 1 sends the Y1 levels transmitter 1 needs,
    n per slot on its top levels, and receiver 2 is silent.  Only the
    first ``active_slots`` forward slots of a frame use feedback; they
    get their repeat or relay in the same position of the next frame.
    The sum rate divides by every slot, forward and reverse.

    Raises
    ------
    RegimeError
        If the strategy does not fit the operating point or schedule.
    """
    topology = FeedbackTopology.half_duplex(L, f)
    _check_horizon(T_frames, 1)
    if not admissible(op, L, f, strategy):
        raise RegimeError(f"strategy {strategy} is not admissible at {op} with "
                          f"L={L}, f={f}")
    cap = half_duplex_sum_capacity(op)
    if strategy == "no-feedback":
        alloc = allocation_for(op)
        eng = Engine(op, topology, T_frames, strategy, seed, receivers=(False, False))
        eng.trace.decoders = ("block", "block")
        eng.trace.allocation = alloc
        _run_allocation(eng, alloc, list(range(1, L * T_frames + 1)))
        return eng.trace, _report(eng, alloc.rate, cap)

    n, m, q = op.n, op.m, op.q
    a = active_slots(op, L, f, strategy)
    eng = Engine(op, topology, T_frames, strategy, seed)
    prev = {}
    for _ in range(T_frames):
        queue = []
        cur = {}
        for i in range(f):
            s = eng.slot + 1
            active = i < a
            if strategy == "chained-one-link-hd":
                d = n - m
                x2 = [frozenset({eng.fresh(2, l, s)}) for l in range(1, n + 1)]
                if active:
                    x1 = list(prev.get(i, [frozenset()] * m))
                    x1 += [frozenset({eng.fresh(1, l, s)}) for l in range(m + 1, n + 1)]
                    cur[i] = x2[:m]
                    needed = range(d + 1, n + 1)
                else:
                    x1 = [frozenset()] * q
                    for l in range(m + 1, min(n, d) + 1):
                        x1[l - 1] = frozenset({eng.fresh(1, l, s)})
                    needed = ()
            else:
                e = m - n
                x1 = list(prev.get(i, [frozenset()] * e)) + [frozenset()] * n
                top = m if active else n
                x2 = [frozenset({eng.fresh(2, l, s)}) for l in range(1, top + 1)]
                x2 += [frozenset()] * (q - top)
                if active:
                    cur[i] = x2[n:m]
                    needed = range(n + 1, m + 1)
                else:
                    needed = ()
            y1, _ = eng.forward(x1, x2)
            queue.extend((s, p, y1.level(p)) for p in needed)
        for _ in range(L - f):
            chunk, queue = queue[:n], queue[n:]
            z1 = eng.reverse([v for _, _, v in chunk])
            for k, (s, p, _) in enumerate(chunk, 1):
                heard = z1.level(q - n + k)
                eng.tx1.add(eng.received[s][0][p - 1], heard, eng.slot)
        if queue:
            raise AssertionError("feedback queue overflow; active slot count is wrong")
        prev = cur
    eng.finish()
    return eng.trace, _report(eng, designed_rate(op, L, f, strategy), cap)


@dataclass
class SweepResult:
    op: OperatingPoint
    L: int
    rows: list = field(default_factory=list)

    @property
    def best(self):
        """Highest rate; ties go to more forward slots, then to the simpler strategy."""
        return max(self.rows, key=lambda r: (r[2], r[0], -STRATEGIES.index(r[1])))


def sweep_t(op: OperatingPoint, L: int, T_frames: int, seed: int = 0, threads: int = 1):
    """Simulate every admissible (f, strategy) and rank by delivered rate.

    Rows are ``(f, strategy, finite_sum_rate)`` sorted by f and strategy,
    independent of ``threads``.
    """
    if op.n == 0:
        raise RegimeError("half-duplex sweep needs n > 0")
    if L < 1:
        raise ValueError("frame length must be positive")
    cells = [(f, s) for f in range(L + 1) for s in STRATEGIES if admissible(op, L, f, s)]

    def run(cell):
        f, s = cell
        _, rep = half_duplex_session(op, L, f, T_frames, s, seed)
        return (f, s, rep.finite_sum_rate)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run, cells))
    else:
        rows = [run(c) for c in cells]
    rows.sort(key=lambda r: (r[0], STRATEGIES.index(r[1])))
    return SweepResult(op, L, rows)


# --- verification ------------------------------------------------------------------

@dataclass
class CheckFailure:
    kind: str
    slot: int
    user: int
    level: int
    message: str

    def __str__(self):
        return f"{self.kind} at slot {self.slot}, user {self.user}, level {self.level}: {self.message}"


@dataclass
class CheckReport:
    failures: list = field(default_factory=list)
    bits_checked: int = 0
    max_delay: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures


def _first_diff(a: LevelVector, b: LevelVector) -> int:
    for j in range(1, a.width + 1):
        if a.level(j) != b.level(j):
            return j
    return 0


def _replay_peeling(trace, user: int):
    solver = PeelingSolver()
    for rec in trace.records:
        if rec.direction != "F":
            continue
        x1s, x2s = trace.layout[rec.slot]
        rows = received_structure(x1s, x2s, trace.op)[user - 1]
        y = rec.y1 if user == 1 else rec.y2
        for p, ids in enumerate(rows, 1):
            solver.add(ids, y.level(p), rec.slot)
    return {bid[1]: r for bid, r in solver.resolved.items() if bid[0] == user}


def _replay_blocks(trace, user: int):
    alloc = trace.allocation
    dec = BlockDecoder(alloc, user)
    B = alloc.block_len
    fwd = [r for r in trace.records if r.direction == "F"]
    # Bits are numbered in block order, so block b owns a contiguous index range.
    per_block = len(alloc.generators[user - 1])
    out = {}
    for b in range(len(fwd) // B):
        blk = fwd[b * B:(b + 1) * B]
        ys = [r.y1 if user == 1 else r.y2 for r in blk]
        for i, bit in enumerate(dec.decode(ys)):
            out[b * per_block + i] = (bit, blk[-1].slot)
    return out


def decode_check(trace: TransmissionTrace) -> CheckReport:
    """Independently re-verify a finished trace.

    Recomputes every output through the channel law, replays both
    receivers from their recorded outputs and the code layout only, and
    compares the replayed decisions with the payload and the ledger.
    """
    rep = CheckReport()
    op = trace.op
    for rec in trace.records:
        if rec.direction == "F":
            y1, y2 = forward_transmit(rec.x1, rec.x2, op)
        else:
            y1, y2 = reverse_transmit(rec.x1, rec.x2, op)
        for user, want, got in ((1, y1, rec.y1), (2, y2, rec.y2)):
            if want != got:
                rep.failures.append(CheckFailure(
                    "channel-law", rec.slot, user, _first_diff(want, got),
                    f"recorded {got}, channel gives {want}"))
        if rec.direction == "F" and trace.topology.dedicated:
            if (rec.fb1, rec.fb2) != feedback_view(trace.topology, rec.y1, rec.y2):
                rep.failures.append(CheckFailure("feedback", rec.slot, 0, 0,
                                                 "feedback contents do not match outputs"))
    payload = PayloadSource(trace.seed)
    for user in (1, 2):
        try:
            if trace.decoders[user - 1] == "block":
                replay = _replay_blocks(trace, user)
            else:
                replay = _replay_peeling(trace, user)
        except DecodingConflict as exc:
            rep.failures.append(CheckFailure("replay", 0, user, 0, str(exc)))
            continue
        for rec in trace.ledger[user]:
            got = replay.get(rec.index)
            if rec.resolved_slot is None:
                if got is not None:
                    rep.failures.append(CheckFailure(
                        "ledger", got[1], user, rec.level,
                        f"bit {rec.index} resolves on replay but is unresolved in the ledger"))
                continue
            rep.bits_checked += 1
            if got is None or got[1] != rec.resolved_slot:
                rep.failures.append(CheckFailure(
                    "ledger", rec.resolved_slot, user, rec.level,
                    f"bit {rec.index}: ledger slot {rec.resolved_slot}, replay {got}"))
                continue
            truth = payload.bit(user, rec.index)
            if got[0] != truth or rec.value != truth:
                rep.failures.append(CheckFailure(
                    "decode", rec.resolved_slot, user, rec.level,
                    f"bit {rec.index} decoded {got[0]}, payload {truth}"))
            if rec.resolved_slot < rec.emitted_slot:
                rep.failures.append(CheckFailure(
                    "ledger", rec.resolved_slot, user, rec.level,
                    f"bit {rec.index} resolved before it was sent"))
            rep.max_delay = max(rep.max_delay, rec.delay)
    return rep
