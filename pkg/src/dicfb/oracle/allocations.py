"""
Exhaustive search for zero-error linear transmission without feedback.

A user's code over a block of ``B`` slots is the span of a few generator
vectors in GF(2)^(q*B); every payload bit multiplies one generator.  The
search family is every code whose generators each touch at most two
(slot, level) positions: plain level subsets plus pairwise combinations,
within a slot or across the two slots of a block.

Block vector layout: slot ``s`` (0-based), level ``l`` (1-based) is bit
``s*q + (q - l)``.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Optional

from ..capacity import no_fb_sum_capacity
from ..channel import OperatingPoint
from ..gf2 import XorBasis, rank

MAX_Q_BLOCK1 = 8
MAX_Q_BLOCK2 = 4
MAX_CERTIFY_BITS = 16


class SearchGuardError(ValueError):
    """Raised when an instance exceeds the declared search-space guard."""


def block_shift(v: int, keep: int, q: int, B: int) -> int:
    """Apply a ``keep``-level link to every slot of a block vector."""
    drop = q - keep
    full = (1 << q) - 1
    out = 0
    for s in range(B):
        out |= (((v >> (s * q)) & full) >> drop) << (s * q)
    return out


def _check_guard(op: OperatingPoint, B: int):
    if B not in (1, 2):
        raise SearchGuardError(f"block length must be 1 or 2, got {B}")
    limit = MAX_Q_BLOCK1 if B == 1 else MAX_Q_BLOCK2
    if op.q > limit:
        raise SearchGuardError(
            f"q={op.q} exceeds the block-{B} search guard q <= {limit} at {op}")


@dataclass(frozen=True)
class Allocation:
    """Linear zero-error code pair for one block of ``block_len`` slots.

    ``generators[k]`` lists user k+1's generator vectors; user k+1 sends
    ``len(generators[k])`` fresh bits per block.
    """
    op: OperatingPoint
    block_len: int
    generators: tuple

    @property
    def bits(self) -> tuple:
        return len(self.generators[0]), len(self.generators[1])

    @property
    def sum_bits(self) -> int:
        """Total bits of both users per block."""
        return sum(self.bits)

    @property
    def rate(self) -> Fraction:
        return Fraction(self.sum_bits, self.block_len)

    def images(self, user: int, receiver: int) -> list:
        """Generators of ``user`` as seen at ``receiver`` (both 1 or 2)."""
        op = self.op
        keep = op.n if user == receiver else op.m
        return [block_shift(g, keep, op.q, self.block_len)
                for g in self.generators[user - 1]]

    def is_decodable(self) -> bool:
        """Rank test: each receiver separates its own image from interference."""
        for j in (1, 2):
            own = self.images(j, j)
            other = self.images(3 - j, j)
            if rank(own) != len(own):
                return False
            if rank(own + other) != len(own) + rank(other):
                return False
        return True

    def certify(self) -> bool:
        """Exhaustive decodability certificate over all payload pairs.

        Every receiver's map from received block to own payload must be
        well defined.  Independent of :meth:`is_decodable`.
        """
        b1, b2 = self.bits
        if b1 + b2 > MAX_CERTIFY_BITS:
            raise SearchGuardError(
                f"certificate needs 2^{b1 + b2} payload pairs; limit is 2^{MAX_CERTIFY_BITS}")
        g1, g2 = self.generators
        x1s = [_combine(g1, w) for w in range(1 << b1)]
        x2s = [_combine(g2, w) for w in range(1 << b2)]
        op, B = self.op, self.block_len
        seen = ({}, {})
        for w1, x1 in enumerate(x1s):
            for w2, x2 in enumerate(x2s):
                y1 = (block_shift(x1, op.n, op.q, B) ^ block_shift(x2, op.m, op.q, B))
                y2 = (block_shift(x1, op.m, op.q, B) ^ block_shift(x2, op.n, op.q, B))
                if seen[0].setdefault(y1, w1) != w1:
                    return False
                if seen[1].setdefault(y2, w2) != w2:
                    return False
        return True

    def witness(self) -> str:
        """Compact text form: generators of user 1 and 2 separated by ';'.

        Each generator is written slot by slot as MSB-first level strings
        joined by '.'; an empty code is '-'.
        """
        return ";".join(
            ",".join(_gen_str(g, self.op.q, self.block_len) for g in gens) or "-"
            for gens in self.generators)

    @classmethod
    def from_witness(cls, op: OperatingPoint, block_len: int, text: str) -> "Allocation":
        parts = text.split(";")
        if len(parts) != 2:
            raise ValueError(f"malformed witness {text!r}")
        gens = []
        for part in parts:
            if part == "-":
                gens.append(())
                continue
            gens.append(tuple(_parse_gen(g, op.q, block_len) for g in part.split(",")))
        return cls(op, block_len, tuple(gens))


def _combine(gens, w: int) -> int:
    x = 0
    for i, g in enumerate(gens):
        if w >> i & 1:
            x ^= g
    return x


def _gen_str(g: int, q: int, B: int) -> str:
    slots = []
    for s in range(B):
        blk = (g >> (s * q)) & ((1 << q) - 1)
        slots.append(format(blk, f"0{q}b") if q else "")
    return ".".join(slots)


def _parse_gen(text: str, q: int, B: int) -> int:
    slots = text.split(".")
    if len(slots) != B or any(len(s) != q or set(s) - {"0", "1"} for s in slots):
        raise ValueError(f"generator {text!r} does not match q={q}, block={B}")
    g = 0
    for s, blk in enumerate(slots):
        g |= int(blk, 2) << (s * q)
    return g


def _candidates(op: OperatingPoint, B: int) -> list:
    N = op.q * B
    units = [1 << i for i in range(N)]
    pairs = [(1 << i) | (1 << j) for i, j in combinations(range(N), 2)]
    # A generator invisible at its own receiver can never carry a decodable bit.
    return [v for v in units + pairs if block_shift(v, op.n, op.q, B)]


def _own_codes(cands, own):
    """Every span of candidates that stays injective at the own receiver.

    Decodability depends only on the spans of the two codes, so spans are
    enumerated once each (keyed by reduced basis) instead of generator
    sets.  Each entry is ``(generators, own-image basis)``.
    """
    out = [((), XorBasis())]
    seen = {()}
    layer = [((), XorBasis(), XorBasis())]
    while layer:
        nxt = []
        for gens, span, img in layer:
            for c in cands:
                if span.contains(c):
                    continue
                ns = span.copy()
                ns.add(c)
                key = ns.canonical()
                if key in seen:
                    continue
                seen.add(key)
                ni = img.copy()
                if not ni.add(own[c]):
                    continue
                entry = (gens + (c,), ns, ni)
                nxt.append(entry)
                out.append((entry[0], ni))
        layer = nxt
    return out


def _search_block(op: OperatingPoint, B: int, floor: int = 0) -> Optional[Allocation]:
    """Best allocation with more than ``floor`` bits per block, or None."""
    _check_guard(op, B)
    q, n, m = op.q, op.n, op.m
    cands = _candidates(op, B)
    own = {v: block_shift(v, n, q, B) for v in cands}
    cross = {v: block_shift(v, m, q, B) for v in cands}
    codes = _own_codes(cands, own)
    codes.sort(key=lambda c: -len(c[0]))

    best = [floor, Allocation(op, B, ((), ())) if floor == 0 else None]
    for u1, own1 in codes:
        d1 = len(u1)
        # The channel is symmetric under swapping the users, so every pair
        # has a mirror with the larger code on user 1; restricting to
        # len(u2) <= len(u1) loses nothing.  Codes are sorted by size, so
        # once this bound fails it fails for every remaining u1.
        if d1 + min(d1, n * B) <= best[0]:
            break
        int2 = XorBasis(cross[v] for v in u1)
        if d1 + _u2_room(op, B, d1, int2, 0) <= best[0]:
            continue
        state = (u1, d1, own1, set())
        _grow_u2(op, B, cands, own, cross, state, (), XorBasis(), XorBasis(), own1.copy(),
                 int2.copy(), best)
    return best[1]


def _u2_room(op, B, d1, joint2, d2) -> int:
    """Upper bound on the final size of user 2's code.

    Receiver 2 sees everything inside q*B dimensions, and each new user-2
    generator must raise the rank of what it sees.  At receiver 1 the
    interference span stays clear of user 1's d1 dimensions, so it has
    at most q*B - d1 dimensions; generators that add nothing there lie in
    the kernel of the cross link, which has (q - m)*B dimensions.
    """
    qB = op.q * B
    room2 = d2 + qB - len(joint2)
    room1 = (qB - d1) + (op.q - op.m) * B
    return min(d1, op.n * B, room2, room1)


def _grow_u2(op, B, cands, own, cross, state, chosen, span, int1, joint1, joint2, best):
    u1, d1, own1, seen = state
    if d1 + len(chosen) > best[0]:
        best[0] = d1 + len(chosen)
        best[1] = Allocation(op, B, (tuple(u1), chosen))
    if d1 + _u2_room(op, B, d1, joint2, len(chosen)) <= best[0]:
        return
    for v in cands:
        if span.contains(v):
            continue
        ns = span.copy()
        ns.add(v)
        key = ns.canonical()
        if key in seen:
            continue
        seen.add(key)
        # Receiver 2: the new own image must be independent of everything so far.
        j2 = joint2.copy()
        if not j2.add(own[v]):
            continue
        # Receiver 1: interference may grow, but never into user 1's image.
        c = cross[v]
        i1 = int1.copy()
        grew = i1.add(c)
        j1 = joint1.copy()
        if j1.add(c) != grew:
            continue
        _grow_u2(op, B, cands, own, cross, state, chosen + (v,), ns, i1, j1, j2, best)
        if d1 + _u2_room(op, B, d1, joint2, len(chosen)) <= best[0]:
            return


def search_level_allocations(op: OperatingPoint, max_block: int = 1) -> Allocation:
    """Best zero-error allocation of block length up to ``max_block``.

    Returns the allocation with the largest sum rate per slot; on ties the
    shorter block wins.  The result is a certified lower bound on the
    no-feedback sum capacity.

    Raises
    ------
    SearchGuardError
        If q exceeds the guard of the block length being searched.
    """
    if max_block not in (1, 2):
        raise SearchGuardError(f"max_block must be 1 or 2, got {max_block}")
    best = _search_block(op, 1)
    if max_block == 2:
        # Only a strictly higher rate than block 1 can change the answer.
        alt = _search_block(op, 2, floor=2 * best.sum_bits)
        if alt is not None:
            best = alt
    if not best.certify():
        raise AssertionError(f"search returned an undecodable allocation at {op}")
    return best


@dataclass
class WCurveReport:
    """Outcome of checking the no-feedback formula against the search."""
    results: list = field(default_factory=list)
    excluded: list = field(default_factory=list)

    @property
    def mismatches(self) -> list:
        return [r for r in self.results if r[2] != r[3]]

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def lines(self) -> list:
        out = []
        for op, block, found, formula in self.results:
            flag = "ok" if found == formula else "MISMATCH"
            out.append(f"{flag} n={op.n} m={op.m} block={block} "
                       f"oracle={found} formula={formula}")
        for op, reason in self.excluded:
            out.append(f"EXCLUDED n={op.n} m={op.m}: {reason}")
        return out


def _needs_block2(op: OperatingPoint) -> bool:
    return op.n < op.m < 2 * op.n and op.m % 2 == 1


def verify_w_curve(grid: Iterable[OperatingPoint],
                   allocations: Optional[dict] = None) -> WCurveReport:
    """Compare the searched no-feedback sum rate with the closed form on ``grid``.

    Block length 2 is tried for odd m with 1 < alpha < 2 when block 1 falls
    short and q permits.  If ``allocations`` maps ``(n, m)`` to a cached
    :class:`Allocation`, that entry is certified and used instead of
    searching.
    """
    report = WCurveReport()
    for op in grid:
        formula = no_fb_sum_capacity(op).bits_per_forward_slot
        cached = (allocations or {}).get((op.n, op.m))
        if cached is not None:
            ok = cached.is_decodable() and cached.certify()
            rate = cached.rate if ok else Fraction(-1)
            report.results.append((op, cached.block_len, rate, formula))
            continue
        alloc = search_level_allocations(op, 1)
        if alloc.rate != formula and _needs_block2(op):
            if op.q <= MAX_Q_BLOCK2:
                alloc = search_level_allocations(op, 2)
            else:
                report.excluded.append((op, f"block 2 needed but q={op.q} > {MAX_Q_BLOCK2}"))
        report.results.append((op, alloc.block_len, alloc.rate, formula))
    return report


def format_cache_line(alloc: Allocation) -> str:
    """One result-cache line: ``n m block sum_bits witness``."""
    return (f"{alloc.op.n} {alloc.op.m} {alloc.block_len} "
            f"{alloc.sum_bits} {alloc.witness()}")


def parse_cache(text: str) -> dict:
    """Read cache lines into ``{(n, m): Allocation}``; '#' starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 5:
            raise ValueError(f"cache line {lineno}: expected 5 fields, got {len(fields)}")
        n, m, block, sum_bits = (int(f) for f in fields[:4])
        alloc = Allocation.from_witness(OperatingPoint(n, m), block, fields[4])
        if alloc.sum_bits != sum_bits:
            raise ValueError(f"cache line {lineno}: witness carries {alloc.sum_bits} "
                             f"bits, line claims {sum_bits}")
        out[(n, m)] = alloc
    return out


def enumerate_subset_allocations(op: OperatingPoint):
    """Every block-1 pair of plain level subsets (used for cross-checks)."""
    q = op.q
    for a, b in product(range(1 << q), repeat=2):
        gens = (tuple(1 << i for i in range(q) if a >> i & 1),
                tuple(1 << i for i in range(q) if b >> i & 1))
        yield Allocation(op, 1, gens)
