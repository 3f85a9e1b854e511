"""
Linear deterministic model of the two-user symmetric interference channel.

A transmit or receive signal is a column of ``q`` binary levels, level 1
being the most significant.  Each link of capacity ``k`` passes the top
``k`` levels of its input, pushed down by ``q - k`` positions, and the two
contributions arriving at a receiver are added over GF(2).

Level vectors are stored as Python integers: level ``j`` of a width-``q``
vector sits at bit ``q - j``.  A downshift is therefore a right shift.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence


class WidthMismatchError(ValueError):
    """Raised when level vectors of different widths are combined."""


@dataclass(frozen=True)
class OperatingPoint:
    """Direct-link levels ``n`` and cross-link levels ``m``.

    Parameters
    ----------
    n : int
        Number of bit levels carried by each direct link.
    m : int
        Number of bit levels carried by each cross link.
    """
    n: int
    m: int

    def __post_init__(self):
        if not isinstance(self.n, int) or not isinstance(self.m, int):
            raise TypeError("n and m must be integers")
        if self.n < 0 or self.m < 0:
            raise ValueError(f"negative link levels: n={self.n}, m={self.m}")
        if self.n == 0 and self.m == 0:
            raise ValueError("n = m = 0 leaves the channel without signal levels")

    @property
    def q(self) -> int:
        return max(self.n, self.m)

    @property
    def alpha(self) -> Fraction:
        """Interference strength m/n as an exact fraction."""
        if self.n == 0:
            raise ValueError("alpha = m/n is undefined for n = 0")
        return Fraction(self.m, self.n)

    def __str__(self):
        return f"(n={self.n}, m={self.m})"


def make_operating_point(n: int, m: int) -> OperatingPoint:
    return OperatingPoint(n, m)


@dataclass(frozen=True)
class LevelVector:
    """Fixed-width binary signal, level 1 most significant.

    ``value`` holds the levels as an integer; use :attr:`bits` or
    :meth:`level` for the 1-based MSB-first view.
    """
    width: int
    value: int = 0

    def __post_init__(self):
        if self.width < 0:
            raise ValueError("width must be non-negative")
        if not 0 <= self.value < (1 << self.width):
            raise ValueError(f"value {self.value} does not fit in {self.width} levels")

    @classmethod
    def zeros(cls, width: int) -> "LevelVector":
        return cls(width, 0)

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "LevelVector":
        """Build from an MSB-first sequence (``bits[0]`` is level 1)."""
        value = 0
        for b in bits:
            if b not in (0, 1):
                raise ValueError(f"not a binary symbol: {b!r}")
            value = (value << 1) | b
        return cls(len(bits), value)

    @classmethod
    def from_string(cls, text: str) -> "LevelVector":
        return cls.from_bits([int(c) for c in text])

    @property
    def bits(self) -> tuple:
        return tuple((self.value >> (self.width - j)) & 1
                     for j in range(1, self.width + 1))

    def level(self, j: int) -> int:
        """Bit at 1-based level ``j``."""
        if not 1 <= j <= self.width:
            raise IndexError(f"level {j} outside 1..{self.width}")
        return (self.value >> (self.width - j)) & 1

    def __xor__(self, other: "LevelVector") -> "LevelVector":
        if self.width != other.width:
            raise WidthMismatchError(
                f"cannot XOR widths {self.width} and {other.width}")
        return LevelVector(self.width, self.value ^ other.value)

    def __str__(self):
        return "".join(str(b) for b in self.bits)

    def __len__(self):
        return self.width


@dataclass(frozen=True)
class ShiftOperator:
    """q x q shift matrix pushing every level down by ``drop`` positions."""
    width: int
    drop: int

    def __post_init__(self):
        if not 0 <= self.drop <= self.width:
            raise ValueError(f"drop {self.drop} outside 0..{self.width}")

    def __call__(self, x: LevelVector) -> LevelVector:
        if x.width != self.width:
            raise WidthMismatchError(
                f"operator width {self.width} applied to vector of width {x.width}")
        return LevelVector(self.width, x.value >> self.drop)


def downshift(x: LevelVector, link_levels: int, q: int) -> LevelVector:
    """Signal seen through a link that carries ``link_levels`` of ``q`` levels.

    Output level ``j`` equals input level ``j - (q - link_levels)`` when that
    index is positive, and 0 otherwise.
    """
    if x.width != q:
        raise WidthMismatchError(f"expected width {q}, got {x.width}")
    if not 0 <= link_levels <= q:
        raise ValueError(f"link_levels {link_levels} outside 0..{q}")
    return ShiftOperator(q, q - link_levels)(x)


def forward_transmit(x1: LevelVector, x2: LevelVector, op: OperatingPoint):
    """Receiver outputs ``(y1, y2)`` for transmitter inputs ``x1``, ``x2``."""
    q = op.q
    y1 = downshift(x1, op.n, q) ^ downshift(x2, op.m, q)
    y2 = downshift(x1, op.m, q) ^ downshift(x2, op.n, q)
    return y1, y2


def reverse_transmit(r1: LevelVector, r2: LevelVector, op: OperatingPoint):
    """What the transmitters hear ``(z1, z2)`` when the receivers send ``r1``, ``r2``.

    The reverse channel has the same operating point as the forward one:
    receiver k reaches transmitter k over a direct link of ``n`` levels and
    the other transmitter over a cross link of ``m`` levels.
    """
    q = op.q
    z1 = downshift(r1, op.n, q) ^ downshift(r2, op.m, q)
    z2 = downshift(r1, op.m, q) ^ downshift(r2, op.n, q)
    return z1, z2


class Variant(Enum):
    NONE = "none"
    ONE_LINK = "one-link"
    TWO_LINK = "two-link"
    FOUR_LINK = "four-link"
    HALF_DUPLEX = "half-duplex"


@dataclass(frozen=True)
class FeedbackTopology:
    """Which receiver outputs reach which transmitters.

    For :attr:`Variant.HALF_DUPLEX` each frame of ``frame_length`` slots
    starts with ``forward_slots`` forward uses followed by reverse uses of
    the same channel.
    """
    variant: Variant
    frame_length: int = None
    forward_slots: int = None

    def __post_init__(self):
        if self.variant is Variant.HALF_DUPLEX:
            L, f = self.frame_length, self.forward_slots
            if not isinstance(L, int) or L < 1:
                raise ValueError(f"frame length must be a positive integer, got {L!r}")
            if not isinstance(f, int) or not 0 <= f <= L:
                raise ValueError(f"forward slots must lie in 0..{L}, got {f!r}")
        elif self.frame_length is not None or self.forward_slots is not None:
            raise ValueError(f"{self.variant.value} topology takes no frame schedule")

    @classmethod
    def half_duplex(cls, frame_length: int, forward_slots: int) -> "FeedbackTopology":
        return cls(Variant.HALF_DUPLEX, frame_length, forward_slots)

    @property
    def dedicated(self) -> bool:
        return self.variant in (Variant.ONE_LINK, Variant.TWO_LINK, Variant.FOUR_LINK)

    @property
    def t(self) -> Fraction:
        """Fraction of channel uses spent in the forward direction."""
        if self.variant is Variant.HALF_DUPLEX:
            return Fraction(self.forward_slots, self.frame_length)
        return Fraction(1)

    @property
    def reverse_slots(self) -> int:
        if self.variant is Variant.HALF_DUPLEX:
            return self.frame_length - self.forward_slots
        return 0

    def __str__(self):
        if self.variant is Variant.HALF_DUPLEX:
            return f"half-duplex(L={self.frame_length}, f={self.forward_slots})"
        return self.variant.value


NO_FEEDBACK = FeedbackTopology(Variant.NONE)
ONE_LINK = FeedbackTopology(Variant.ONE_LINK)
TWO_LINK = FeedbackTopology(Variant.TWO_LINK)
FOUR_LINK = FeedbackTopology(Variant.FOUR_LINK)


def topology_from_name(name: str, frame_length: int = None,
                       forward_slots: int = None) -> FeedbackTopology:
    variant = Variant(name)
    if variant is Variant.HALF_DUPLEX:
        return FeedbackTopology.half_duplex(frame_length, forward_slots)
    return FeedbackTopology(variant)


def feedback_view(topology: FeedbackTopology, y1: LevelVector, y2: LevelVector):
    """Outputs delivered to each transmitter over dedicated feedback links.

    Returns a pair of tuples: the observations of transmitter 1 and of
    transmitter 2 for one slot.
    """
    v = topology.variant
    if v is Variant.HALF_DUPLEX:
        raise ValueError("half-duplex feedback travels over reverse_transmit, "
                         "not a dedicated view")
    if v is Variant.NONE:
        return (), ()
    if v is Variant.ONE_LINK:
        return (y1,), ()
    if v is Variant.TWO_LINK:
        return (y1,), (y2,)
    return (y1, y2), (y1, y2)

