"""Transmission traces, per-bit ledgers, rate reports and the text export."""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .capacity import CapacityValue
from .channel import FeedbackTopology, LevelVector, OperatingPoint


@dataclass(frozen=True)
class SlotRecord:
    """One channel use.

    Forward slots (``direction == 'F'``) hold transmitter inputs in ``x``
    and receiver outputs in ``y``.  Reverse slots (``'R'``) hold what the
    receivers send in ``x`` and what the transmitters hear in ``y``.
    ``fb1``/``fb2`` list the outputs delivered over dedicated feedback.
    """
    slot: int
    direction: str
    x1: LevelVector
    x2: LevelVector
    y1: LevelVector
    y2: LevelVector
    fb1: tuple = ()
    fb2: tuple = ()

    def export(self) -> str:
        fb = [",".join(str(v) for v in f) for f in (self.fb1, self.fb2)]
        return "|".join([str(self.slot), self.direction, str(self.x1), str(self.x2),
                         str(self.y1), str(self.y2), fb[0], fb[1]])


@dataclass
class BitRecord:
    """Ledger entry for one fresh payload bit."""
    user: int
    index: int
    emitted_slot: int
    level: int
    resolved_slot: Optional[int] = None
    value: Optional[int] = None

    @property
    def delay(self) -> Optional[int]:
        if self.resolved_slot is None:
            return None
        return self.resolved_slot - self.emitted_slot


@dataclass
class RateReport:
    delivered_u1: int
    delivered_u2: int
    forward_slots: int
    reverse_slots: int
    asymptotic_rate: Fraction
    formula_capacity: CapacityValue
    max_decoding_delay: int
    drawn_u1: int
    drawn_u2: int

    @property
    def delivered(self) -> int:
        return self.delivered_u1 + self.delivered_u2

    @property
    def finite_sum_rate(self) -> Fraction:
        """Delivered bits over every channel use, forward and reverse."""
        return Fraction(self.delivered, self.forward_slots + self.reverse_slots)

    @property
    def undelivered(self) -> int:
        return self.drawn_u1 + self.drawn_u2 - self.delivered


@dataclass
class TransmissionTrace:
    """Complete record of a session.

    ``layout`` keeps the code structure of every forward slot: for each
    transmitter, one set of payload-bit ids per level (their XOR is the
    level's value).  Receivers are allowed to know this structure; it is
    what lets :func:`dicfb.sessions.decode_check` replay them.
    """
    op: OperatingPoint
    topology: FeedbackTopology
    horizon: int
    scheme: str
    seed: int
    records: list = field(default_factory=list)
    layout: dict = field(default_factory=dict)
    ledger: dict = field(default_factory=lambda: {1: [], 2: []})
    decoders: tuple = ("peeling", "peeling")
    allocation: object = None

    def export(self) -> str:
        """Line-oriented text: one ``slot|dir|x1|x2|y1|y2|fb1|fb2`` line per slot."""
        return "".join(r.export() + "\n" for r in self.records)


def parse_trace_lines(text: str) -> list:
    """Inverse of :meth:`TransmissionTrace.export` (records only)."""
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line:
            continue
        parts = line.split("|")
        if len(parts) != 8:
            raise ValueError(f"line {lineno}: expected 8 fields, got {len(parts)}")
        slot, direction = int(parts[0]), parts[1]
        if direction not in ("F", "R"):
            raise ValueError(f"line {lineno}: direction must be F or R")
        vecs = [LevelVector.from_string(p) for p in parts[2:6]]
        fbs = [tuple(LevelVector.from_string(v) for v in p.split(",")) if p else ()
               for p in parts[6:8]]
        out.append(SlotRecord(slot, direction, *vecs, *fbs))
    return out
