"""
Zero-error allocations achieving the no-feedback sum capacity at any point.

A symmetric channel splits into independent chains of levels.  For m < n
with d = n - m, the levels congruent to r mod d interfere only with each
other: a level's cross image lands exactly d positions lower.  Each chain
of length L behaves like the channel (L, L-1).  For m > n with e = m - n
the same holds modulo e with chains behaving like (L-1, L).  The sum
capacity is additive over the chains, so a per-chain allocation of the
right size assembles into an allocation for the whole channel.
"""

from functools import lru_cache
from importlib import resources

from .capacity import no_fb_sum_capacity
from .channel import OperatingPoint
from .oracle.allocations import Allocation, parse_cache


class AllocationError(RuntimeError):
    """No allocation matching the no-feedback capacity could be produced."""


def _lv(q: int, *levels) -> int:
    """Block-1 generator with ones on the given 1-based levels."""
    g = 0
    for l in levels:
        g |= 1 << (q - l)
    return g


def chain_allocation(L: int, cross_stronger: bool) -> Allocation:
    """Closed-form allocation for the chain channel.

    ``cross_stronger=False`` gives (L, L-1); ``True`` gives (L-1, L).
    """
    if L < 1:
        raise ValueError("chain length must be positive")
    if cross_stronger:
        op = OperatingPoint(L - 1, L)
        if L == 1:
            gens = ((), ())
        elif L == 2:
            gens = ((_lv(2, 1),), (_lv(2, 1),))
        else:
            gens = (tuple(_lv(L, l) for l in range(1, L)), (_lv(L, 1, L - 1),))
    else:
        op = OperatingPoint(L, L - 1)
        if L == 1:
            gens = ((_lv(1, 1),), (_lv(1, 1),))
        elif L == 2:
            gens = ((_lv(2, 1), _lv(2, 2)), ())
        elif L == 3:
            gens = ((_lv(3, 1), _lv(3, 3)), (_lv(3, 1), _lv(3, 3)))
        else:
            gens = (tuple(_lv(L, l) for l in range(1, L + 1) if l != L - 1),
                    (_lv(L, L), _lv(L, 1, L - 2)))
    return Allocation(op, 1, gens)


def chains(op: OperatingPoint) -> list:
    """Chains as ``(levels, chain operating point)``; levels are 1-based, top first."""
    n, m, q = op.n, op.m, op.q
    if m == n:
        return [((l,), OperatingPoint(1, 1)) for l in range(1, q + 1)]
    if m == 0:
        return [((l,), OperatingPoint(1, 0)) for l in range(1, q + 1)]
    step = abs(n - m)
    out = []
    for r in range(1, min(step, q) + 1):
        levels = tuple(range(r, q + 1, step))
        L = len(levels)
        cop = OperatingPoint(L, L - 1) if m < n else OperatingPoint(L - 1, L)
        out.append((levels, cop))
    return out


def compose(op: OperatingPoint, parts: list) -> Allocation:
    """Embed per-chain block-1 allocations into one allocation for ``op``."""
    q = op.q
    gens = ([], [])
    for levels, alloc in parts:
        if alloc.block_len != 1:
            raise AllocationError("chain composition needs block-1 chain allocations")
        cq = alloc.op.q
        for k in range(2):
            for g in alloc.generators[k]:
                out = 0
                for i, lvl in enumerate(levels, 1):
                    if g >> (cq - i) & 1:
                        out |= 1 << (q - lvl)
                gens[k].append(out)
    return Allocation(op, 1, (tuple(gens[0]), tuple(gens[1])))


@lru_cache(maxsize=1)
def packaged_cache() -> dict:
    """Allocations shipped with the package, produced by the exhaustive search."""
    text = resources.files("dicfb.oracle").joinpath("data/allocations.txt").read_text()
    return parse_cache(text)


def allocation_for(op: OperatingPoint, cache=None) -> Allocation:
    """Decodable allocation whose rate equals the no-feedback sum capacity.

    Looks ``op`` up in ``cache`` (default: the packaged cache); otherwise
    assembles chain allocations, taking each chain from the cache when
    present and from the closed form when not.

    Raises
    ------
    AllocationError
        If the result is undecodable or its rate differs from the formula.
    """
    if cache is None:
        cache = packaged_cache()
    target = no_fb_sum_capacity(op).bits_per_forward_slot
    alloc = cache.get((op.n, op.m))
    if alloc is None:
        parts = []
        for levels, cop in chains(op):
            sub = cache.get((cop.n, cop.m))
            if sub is None or sub.block_len != 1:
                if cop.n == cop.m:
                    sub = Allocation(cop, 1, ((1,), ()))
                else:
                    sub = chain_allocation(len(levels), cop.m > cop.n)
            parts.append((levels, sub))
        alloc = compose(op, parts)
    if not alloc.is_decodable():
        raise AllocationError(f"allocation for {op} is not decodable")
    if alloc.rate != target:
        raise AllocationError(
            f"allocation for {op} reaches {alloc.rate} bits/slot, formula says {target}")
    return alloc
