"""
Exhaustive zero-error feedback-strategy search on tiny instances.

For message-set sizes ``(M1, M2)`` the question "does some pair of
encoders, possibly using feedback, let both receivers decode with
certainty?" is a finite constraint problem.  It is encoded in CNF and
settled by a complete SAT solver, so an UNSAT answer is a proof that no
strategy exists for that pair.  Feasible pairs form a down-set (drop
messages from a working code and it still works), so the maximal product
is found by a staircase walk over ``M1``.

Every SAT answer is turned into explicit encoder tables and re-checked by
direct simulation of the channel before it is reported.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
import math
from typing import Optional

from pysat.card import CardEnc, EncType
from pysat.solvers import Solver

from ..capacity import fb_sum_capacity
from ..channel import (FeedbackTopology, LevelVector, OperatingPoint, Variant,
                       feedback_view, forward_transmit)
from .allocations import SearchGuardError

MAX_Q = 2
MAX_T = 2
MAX_PRODUCT = 256


@dataclass(frozen=True)
class StrategySpace:
    """Search domain: operating point, horizon, topology and message caps.

    ``cap1``/``cap2`` default to ``2**(q*T)``, the number of distinct
    output sequences a receiver can see, which makes the search complete.
    """
    op: OperatingPoint
    T: int
    topology: FeedbackTopology
    cap1: Optional[int] = None
    cap2: Optional[int] = None
    product_cap: int = MAX_PRODUCT

    def __post_init__(self):
        if self.op.q > MAX_Q:
            raise SearchGuardError(f"q={self.op.q} exceeds the strategy guard q <= {MAX_Q}")
        if not 1 <= self.T <= MAX_T:
            raise SearchGuardError(f"T={self.T} outside 1..{MAX_T}")
        if not 1 <= self.product_cap <= MAX_PRODUCT:
            raise SearchGuardError(f"product cap must lie in 1..{MAX_PRODUCT}")
        if self.topology.variant is Variant.HALF_DUPLEX:
            raise SearchGuardError("strategy search covers dedicated or absent feedback only")
        full = 1 << (self.op.q * self.T)
        for name in ("cap1", "cap2"):
            v = getattr(self, name)
            if v is None:
                object.__setattr__(self, name, full)
            elif v < 1:
                raise SearchGuardError(f"{name} must be positive")

    def describe(self) -> str:
        return (f"{self.op} T={self.T} topology={self.topology} "
                f"caps=({self.cap1},{self.cap2}) product<={self.product_cap}")


@dataclass(frozen=True)
class Strategy:
    """Explicit encoder tables.

    ``slot1[k][w]`` is transmitter k+1's first symbol for message w.
    ``slot2[k][(w, obs)]`` is its second symbol given its feedback
    observation packed into an integer (absent when T = 1).
    """
    op: OperatingPoint
    T: int
    topology: FeedbackTopology
    sizes: tuple
    slot1: tuple
    slot2: tuple

    def outputs(self, w1: int, w2: int):
        """Concatenated receiver outputs ``(y1_seq, y2_seq)`` as integers."""
        q = self.op.q
        x1 = LevelVector(q, self.slot1[0][w1])
        x2 = LevelVector(q, self.slot1[1][w2])
        y1, y2 = forward_transmit(x1, x2, self.op)
        seq = [y1.value], [y2.value]
        if self.T == 2:
            obs = feedback_view(self.topology, y1, y2)
            keys = [_pack(o, q) for o in obs]
            x1 = LevelVector(q, self.slot2[0][(w1, keys[0])])
            x2 = LevelVector(q, self.slot2[1][(w2, keys[1])])
            y1, y2 = forward_transmit(x1, x2, self.op)
            seq[0].append(y1.value)
            seq[1].append(y2.value)
        return tuple(seq[0]), tuple(seq[1])

    def is_zero_error(self) -> bool:
        """Both receivers decode their own message for every message pair."""
        seen = ({}, {})
        for w1, w2 in product(range(self.sizes[0]), range(self.sizes[1])):
            ys = self.outputs(w1, w2)
            for j, w in ((0, w1), (1, w2)):
                if seen[j].setdefault(ys[j], w) != w:
                    return False
        return True


def _pack(obs, q: int) -> int:
    key = 0
    for i, y in enumerate(obs):
        key |= y.value << (i * q)
    return key


class _Cnf:
    def __init__(self):
        self.top = 0
        self.clauses = []
        self.true = self.new()
        self.clauses.append([self.true])

    def new(self) -> int:
        self.top += 1
        return self.top

    def xor(self, lits) -> int:
        lits = [l for l in lits if l is not None]
        if not lits:
            return -self.true
        acc = lits[0]
        for b in lits[1:]:
            z = self.new()
            a = acc
            self.clauses += [[-z, a, b], [-z, -a, -b], [z, -a, b], [z, a, -b]]
            acc = z
        return acc

    @staticmethod
    def differs(lits, value: int) -> list:
        """Clause fragment that is true unless ``lits`` spell ``value``."""
        return [-l if value >> i & 1 else l for i, l in enumerate(lits)]


def _encode(space: StrategySpace, M1: int, M2: int):
    op, T, q = space.op, space.T, space.op.q
    cnf = _Cnf()
    sizes = (M1, M2)
    # Bit lists are LSB-first: index b is bit b of the integer symbol.
    slot1 = [[[cnf.new() for _ in range(q)] for _ in range(sizes[k])] for k in range(2)]

    def shift(x, keep):
        d = q - keep
        return [x[b + d] if b + d < q else None for b in range(q)]

    def chan(x1, x2):
        y1 = [cnf.xor(p) for p in zip(shift(x1, op.n), shift(x2, op.m))]
        y2 = [cnf.xor(p) for p in zip(shift(x1, op.m), shift(x2, op.n))]
        return y1, y2

    pairs = list(product(range(M1), range(M2)))
    received = {}
    first = {}
    for p in pairs:
        y1, y2 = chan(slot1[0][p[0]], slot1[1][p[1]])
        first[p] = (y1, y2)
        received[p] = (list(y1), list(y2))

    tables = ({}, {})
    if T == 2:
        variant = space.topology.variant

        def view(y1, y2):
            if variant is Variant.NONE:
                return [], []
            if variant is Variant.ONE_LINK:
                return y1, []
            if variant is Variant.TWO_LINK:
                return y1, y2
            return y1 + y2, y1 + y2

        def table_entry(k, w, o):
            key = (w, o)
            if key not in tables[k]:
                tables[k][key] = [cnf.new() for _ in range(q)]
            return tables[k][key]

        for p in pairs:
            obs = view(*first[p])
            xs = []
            for k in range(2):
                ob = obs[k]
                if not ob:
                    xs.append(table_entry(k, p[k], 0))
                    continue
                # x equals the table row selected by the observed bits.
                x = [cnf.new() for _ in range(q)]
                for o in range(1 << len(ob)):
                    row = table_entry(k, p[k], o)
                    guard = cnf.differs(ob, o)
                    for b in range(q):
                        cnf.clauses.append(guard + [-x[b], row[b]])
                        cnf.clauses.append(guard + [x[b], -row[b]])
                xs.append(x)
            y1, y2 = chan(*xs)
            received[p][0].extend(y1)
            received[p][1].extend(y2)

    # Decoder: D[v][w] says output sequence v decodes to message w; each v
    # names at most one message, and every pair forces its own message.
    width = q * T
    for j in range(2):
        D = [[cnf.new() for _ in range(sizes[j])] for _ in range(1 << width)]
        for p in pairs:
            y = received[p][j]
            for v in range(1 << width):
                cnf.clauses.append(cnf.differs(y, v) + [D[v][p[j]]])
        enc = EncType.pairwise if sizes[j] <= 6 else EncType.seqcounter
        for v in range(1 << width):
            am = CardEnc.atmost(D[v], 1, top_id=cnf.top, encoding=enc)
            cnf.top = max(cnf.top, am.nv)
            cnf.clauses += am.clauses

    # Relabeling messages maps strategies to strategies, so requiring the
    # first-slot symbols to be nondecreasing in the message index keeps at
    # least one representative of every solution.
    S = 1 << q
    for k in range(2):
        for w in range(sizes[k] - 1):
            for a in range(S):
                for b in range(a):
                    cnf.clauses.append(cnf.differs(slot1[k][w], a)
                                       + cnf.differs(slot1[k][w + 1], b))
    return cnf, slot1, tables


def _value(model: set, lits) -> int:
    return sum(1 << i for i, l in enumerate(lits) if l in model)


def find_strategy(space: StrategySpace, M1: int, M2: int) -> Optional[Strategy]:
    """A verified zero-error strategy with message sizes ``(M1, M2)``, or None."""
    if M1 * M2 > space.product_cap:
        raise SearchGuardError(f"M1*M2={M1 * M2} exceeds cap {space.product_cap}")
    cnf, slot1, tables = _encode(space, M1, M2)
    with Solver(name="cadical153", bootstrap_with=cnf.clauses) as solver:
        if not solver.solve():
            return None
        model = {l for l in solver.get_model() if l > 0}
    s1 = tuple(tuple(_value(model, x) for x in slot1[k]) for k in range(2))
    s2 = tuple({key: _value(model, x) for key, x in tables[k].items()} for k in range(2))
    strat = Strategy(space.op, space.T, space.topology, (M1, M2), s1, s2)
    if not strat.is_zero_error():
        raise AssertionError(f"solver model fails direct simulation: {space.describe()}")
    return strat


@dataclass(frozen=True)
class StrategySearchResult:
    space: StrategySpace
    M1: int
    M2: int
    witness: Strategy
    capacity_bits: int

    @property
    def sum_bits(self) -> float:
        return math.log2(self.M1 * self.M2)

    @property
    def within_capacity(self) -> bool:
        """Exact test M1*M2 <= 2**(C*T)."""
        return self.M1 * self.M2 <= 1 << self.capacity_bits

    @property
    def sum_bits_exact(self) -> Optional[Fraction]:
        """log2(M1*M2) when it is an integer, else None."""
        prod = self.M1 * self.M2
        if prod & (prod - 1) == 0:
            return Fraction(prod.bit_length() - 1)
        return None

    def __str__(self):
        return (f"{self.space.describe()}: best (M1,M2)=({self.M1},{self.M2}) "
                f"sum_bits={self.sum_bits:.4g} bound={self.capacity_bits}")


def exhaustive_feedback_search(space: StrategySpace) -> StrategySearchResult:
    """Largest ``M1*M2`` admitting a zero-error strategy within the caps.

    The reported bound is the dedicated-feedback sum capacity times T
    (the feedback formula also bounds the no-feedback case).
    """
    cap1, cap2, pc = space.cap1, space.cap2, space.product_cap
    best = (1, 1, find_strategy(space, 1, 1))
    M2 = 1
    for M1 in range(1, min(cap1, pc) + 1):
        w1 = find_strategy(space, M1, 1)
        if w1 is None:
            break
        # Feasible pairs form a down-set, so the best M2 for this M1 is at
        # most the best M2 for M1 - 1: walk down, then up.
        M2 = min(M2, pc // M1)
        while True:
            cur = w1 if M2 == 1 else find_strategy(space, M1, M2)
            if cur is not None:
                break
            M2 -= 1
        while M2 < cap2 and M1 * (M2 + 1) <= pc:
            w = find_strategy(space, M1, M2 + 1)
            if w is None:
                break
            M2, cur = M2 + 1, w
        if M1 * M2 > best[0] * best[1]:
            best = (M1, M2, cur)
    bound = int(fb_sum_capacity(space.op).bits_per_forward_slot) * space.T
    return StrategySearchResult(space, best[0], best[1], best[2], bound)


def tiny_instances():
    """Every guarded instance: q <= 2, T <= 2, all topologies without half-duplex.

    At T = 1 feedback cannot act, so only the no-feedback topology is listed.
    """
    from ..channel import FOUR_LINK, NO_FEEDBACK, ONE_LINK, TWO_LINK
    points = [OperatingPoint(n, m) for n in range(3) for m in range(3) if n + m]
    out = []
    for op in points:
        out.append(StrategySpace(op, 1, NO_FEEDBACK))
        for topo in (NO_FEEDBACK, ONE_LINK, TWO_LINK, FOUR_LINK):
            out.append(StrategySpace(op, 2, topo))
    return out
