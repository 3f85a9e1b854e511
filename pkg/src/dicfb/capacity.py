"""Closed-form sum capacities of the symmetric deterministic interference channel.

All arithmetic is integer or :class:`fractions.Fraction`; regime
boundaries such as alpha = 2/3 are decided by cross-multiplication.
"""

from dataclasses import dataclass
from fractions import Fraction

from .channel import OperatingPoint, Variant

DEDICATED = (Variant.ONE_LINK, Variant.TWO_LINK, Variant.FOUR_LINK)


@dataclass(frozen=True)
class CapacityValue:
    """Sum capacity in bits per forward slot, exact or bracketed.

    ``lower == upper`` for an exactly known value; otherwise the true
    capacity is only known to lie in ``[lower, upper]``.
    """
    model: Variant
    lower: Fraction
    upper: Fraction

    def __post_init__(self):
        if self.lower < 0 or self.lower > self.upper:
            raise ValueError(f"bad capacity bounds [{self.lower}, {self.upper}]")

    @classmethod
    def exact(cls, model, value) -> "CapacityValue":
        v = Fraction(value)
        return cls(model, v, v)

    @property
    def bound_kind(self) -> str:
        return "exact" if self.lower == self.upper else "interval"

    @property
    def bits_per_forward_slot(self) -> Fraction:
        if self.bound_kind != "exact":
            raise ValueError(f"{self.model.value} capacity is only bracketed: {self}")
        return self.lower

    def __str__(self):
        if self.bound_kind == "exact":
            return _fmt(self.lower)
        return f"[{_fmt(self.lower)},{_fmt(self.upper)}]"


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class SchemeConstants:
    l_min: int
    l_max: int


def scheme_constants(op: OperatingPoint) -> SchemeConstants:
    n, m = op.n, op.m
    return SchemeConstants(l_min=min(n, n - m), l_max=max(n, n - m))


def fb_sum_capacity(op: OperatingPoint, model: Variant = Variant.ONE_LINK) -> CapacityValue:
    """max(n, m) + (n - m)^+ for one, two or four dedicated feedback links."""
    if model not in DEDICATED:
        raise ValueError(f"{model.value} is not a dedicated feedback model")
    n, m = op.n, op.m
    return CapacityValue.exact(model, max(n, m) + max(n - m, 0))


def _no_fb_branches(n: int, m: int) -> list:
    """Values of every piece of the W-curve whose closed alpha range contains m/n."""
    out = []
    if 2 * m <= n:
        out.append(2 * (n - m))
    if n <= 2 * m and 3 * m <= 2 * n:
        out.append(2 * m)
    if 2 * n <= 3 * m and m <= n:
        out.append(2 * n - m)
    if n <= m <= 2 * n:
        out.append(m)
    if m >= 2 * n:
        out.append(2 * n)
    return out


def no_fb_sum_capacity(op: OperatingPoint) -> CapacityValue:
    """Sum capacity without feedback (the W-curve scaled by n).

    Raises
    ------
    ValueError
        If ``n == 0``: the curve is parametrised by alpha = m/n.
    AssertionError
        If two pieces of the curve disagree at a boundary point.
    """
    n, m = op.n, op.m
    if n == 0:
        raise ValueError("no-feedback capacity is parametrised by alpha and needs n > 0")
    values = _no_fb_branches(n, m)
    assert values and len(set(values)) == 1, f"W-curve pieces disagree at {op}: {values}"
    return CapacityValue.exact(Variant.NONE, values[0])


def in_no_gain_region(op: OperatingPoint) -> bool:
    """True when 2/3 <= alpha <= 2, where feedback leaves the sum capacity unchanged."""
    return 3 * op.m >= 2 * op.n and op.m <= 2 * op.n


def feedback_gain(op: OperatingPoint) -> Fraction:
    """Dedicated-feedback minus no-feedback sum capacity.

    Zero exactly inside :func:`in_no_gain_region` and on the decoupled
    channel m = 0, where both capacities equal 2n.
    """
    gain = (fb_sum_capacity(op).bits_per_forward_slot
            - no_fb_sum_capacity(op).bits_per_forward_slot)
    assert gain >= 0
    return gain


def half_duplex_sum_capacity(op: OperatingPoint) -> CapacityValue:
    """Sum capacity with time-shared feedback over the reverse channel.

    Exact (equal to the no-feedback value) for 3m >= 2n.  Below that only
    the interval between the no-feedback and dedicated-feedback values is
    known.
    """
    lo = no_fb_sum_capacity(op).lower
    if 3 * op.m >= 2 * op.n:
        return CapacityValue(Variant.HALF_DUPLEX, lo, lo)
    hi = fb_sum_capacity(op).lower
    return CapacityValue(Variant.HALF_DUPLEX, lo, hi)


def appendix_bits_formula(op: OperatingPoint, T: int) -> int:
    """Total data bits of the staged one-link construction after ``T`` slots.

    (T-1)(max(n-m, m) + min(n, 2(n-m))) + max(n-m, m) + (n-m), valid for m <= n.
    """
    n, m = op.n, op.m
    if m > n:
        raise ValueError(f"bit count is only defined for m <= n, got {op}")
    if T < 1:
        raise ValueError("T must be positive")
    per_slot = max(n - m, m) + min(n, 2 * (n - m))
    return (T - 1) * per_slot + max(n - m, m) + (n - m)


def appendix_rate_limit(op: OperatingPoint) -> int:
    """Per-slot rate the staged construction approaches as T grows."""
    n, m = op.n, op.m
    if m > n:
        raise ValueError(f"defined only for m <= n, got {op}")
    return max(n - m, m) + min(n, 2 * (n - m))
