import dataclasses
from fractions import Fraction
from math import ceil

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dicfb.baseline import allocation_for
from dicfb.capacity import fb_sum_capacity, no_fb_sum_capacity
from dicfb.channel import (FOUR_LINK, NO_FEEDBACK, ONE_LINK, TWO_LINK, LevelVector,
                           OperatingPoint, forward_transmit)
from dicfb.engine import Engine, PlanError
from dicfb.oracle.allocations import Allocation
from dicfb.payload import PayloadSource
from dicfb.sessions import (RegimeError, decode_check, feedback_session,
                            no_feedback_session, one_link_session, relay_session)
from dicfb.trace import parse_trace_lines

from gf2_oracle import eliminate

CHAINED = [OperatingPoint(n, m) for n in range(2, 9) for m in range(1, n)]


def resolved(trace, user):
    return {r.index: (r.value, r.resolved_slot) for r in trace.ledger[user]
            if r.resolved_slot is not None}


def flip(v: LevelVector, level: int) -> LevelVector:
    return LevelVector(v.width, v.value ^ (1 << (v.width - level)))


class TestPayload:
    def test_reproducible(self):
        a, b = PayloadSource(5), PayloadSource(5)
        assert a.draw(1, 3000) == b.draw(1, 3000)

    def test_users_independent_of_interleaving(self):
        a, b = PayloadSource(5), PayloadSource(5)
        a.draw(2, 700)
        assert a.draw(1, 50) == b.draw(1, 50)
        assert a.drawn == [50, 700]

    def test_bit_and_peek_agree_with_draw(self):
        p = PayloadSource(11)
        bits = p.draw(2, 2100)
        q = PayloadSource(11)
        assert q.peek(2, 2100) == bits
        assert [q.bit(2, i) for i in (0, 1023, 1024, 2099)] == [bits[i] for i in (0, 1023, 1024, 2099)]
        assert q.drawn == [0, 0]

    def test_seeds_differ(self):
        assert PayloadSource(1).peek(1, 64) != PayloadSource(2).peek(1, 64)

    @pytest.mark.parametrize("seed", [-1, 1.5, "3"])
    def test_bad_seed(self, seed):
        with pytest.raises(ValueError):
            PayloadSource(seed)


class TestOneLinkExamples:
    def test_2_1(self):
        _, rep = one_link_session(OperatingPoint(2, 1), 10, seed=7)
        assert (rep.delivered_u1, rep.delivered_u2) == (9, 20)
        assert rep.finite_sum_rate == Fraction(29, 10)
        assert rep.asymptotic_rate == 3

    def test_3_2(self):
        trace, rep = one_link_session(OperatingPoint(3, 2), 5)
        assert (rep.delivered_u1, rep.delivered_u2) == (3, 15)
        assert rep.max_decoding_delay == 2
        assert rep.asymptotic_rate == 4
        assert decode_check(trace).max_delay == 2

    def test_3_1_long_horizon(self):
        trace, rep = one_link_session(OperatingPoint(3, 1), 100)
        assert rep.delivered_u2 == 300
        assert rep.delivered_u1 == 199
        assert rep.delivered == 499 >= 99 * 5
        # Full elimination pins down no more of user 1's bits than peeling.
        assert len(eliminate(trace, 1)) == 199
        assert rep.undelivered == 1


class TestOneLinkProperties:
    @pytest.mark.parametrize("op", CHAINED, ids=str)
    def test_zero_error_over_seeds(self, op):
        n, m, T = op.n, op.m, 50
        D = ceil(m / (n - m))
        for seed in range(20):
            trace, rep = one_link_session(op, T, seed)
            check = decode_check(trace)
            assert check.ok, check.failures[:3]
            assert rep.delivered_u2 == n * T
            assert rep.delivered_u1 >= (T - D) * (n - m)
            assert rep.max_decoding_delay == D
            assert check.bits_checked == rep.delivered

    @pytest.mark.parametrize("op", [o for o in CHAINED if o.n <= 6], ids=str)
    def test_peeling_matches_full_elimination(self, op):
        trace, _ = one_link_session(op, 30, seed=3)
        for user in (1, 2):
            assert resolved(trace, user) == eliminate(trace, user)

    @pytest.mark.parametrize("op", CHAINED, ids=str)
    def test_per_level_delay(self, op):
        # User 2 is never delayed: what interferes with it at receiver 2 is
        # its own earlier bits.  User 1's bit on level l waits for the user-2
        # bit on level k = l - (n - m) under it, cleared after ceil(k / (n - m)).
        d = op.n - op.m
        trace, _ = one_link_session(op, 30)
        assert all(r.delay == 0 for r in trace.ledger[2])
        for r in trace.ledger[1]:
            if r.resolved_slot is not None:
                assert r.delay == ceil(max(0, r.level - d) / d)
            else:
                assert r.emitted_slot + ceil(max(0, r.level - d) / d) > 30

    @pytest.mark.parametrize("n, m", [(n, m) for n in range(2, 10) for m in range(0, 2 * n // 3 + 1)])
    def test_convergence(self, n, m):
        c = 2 * n - m
        rates = []
        for T in (10, 20, 40, 80):
            _, rep = one_link_session(OperatingPoint(n, m), T)
            rates.append(rep.finite_sum_rate)
            assert c - rep.finite_sum_rate <= Fraction(c, T)
        assert rates == sorted(rates)

    def test_rejects_strong_interference(self):
        with pytest.raises(RegimeError):
            one_link_session(OperatingPoint(2, 3), 10)

    def test_rejects_short_horizon(self):
        with pytest.raises(ValueError):
            one_link_session(OperatingPoint(2, 1), 1)

    def test_rejects_half_duplex_topology(self):
        from dicfb.channel import FeedbackTopology
        with pytest.raises(RegimeError):
            one_link_session(OperatingPoint(2, 1), 5, topology=FeedbackTopology.half_duplex(2, 1))

    def test_equal_links_use_no_feedback_baseline(self):
        trace, rep = one_link_session(OperatingPoint(1, 1), 10)
        assert trace.scheme == "no-feedback"
        assert rep.finite_sum_rate == 1


class TestRelay:
    @pytest.mark.parametrize("n, m, u2", [(1, 2, 19), (1, 3, 28)])
    def test_examples(self, n, m, u2):
        trace, rep = relay_session(OperatingPoint(n, m), 10)
        assert (rep.delivered_u1, rep.delivered_u2) == (0, u2)
        assert rep.asymptotic_rate == m

    def test_relayed_bits_arrive_one_slot_late(self):
        trace, rep = relay_session(OperatingPoint(1, 2), 10)
        check = decode_check(trace)
        assert check.ok and check.max_delay == 1
        delays = {r.level: r.delay for r in trace.ledger[2] if r.delay is not None}
        assert delays == {1: 0, 2: 1}

    @pytest.mark.parametrize("n, m", [(n, m) for n in range(1, 5) for m in range(2 * n, 11)])
    def test_grid(self, n, m):
        T = 50
        trace, rep = relay_session(OperatingPoint(n, m), T, seed=n * m)
        assert decode_check(trace).ok
        assert (rep.delivered_u1, rep.delivered_u2) == (0, n * T + (m - n) * (T - 1))

    @pytest.mark.parametrize("n, m", [(1, 1), (2, 3), (3, 5)])
    def test_rejects_below_twice_direct(self, n, m):
        with pytest.raises(RegimeError):
            relay_session(OperatingPoint(n, m), 10)


class TestNoFeedback:
    @pytest.mark.parametrize("n, m, T, total", [(2, 1, 10, 20), (3, 2, 4, 16), (1, 2, 6, 12)])
    def test_examples(self, n, m, T, total):
        trace, rep = no_feedback_session(OperatingPoint(n, m), T)
        assert rep.delivered == total
        assert decode_check(trace).ok

    @pytest.mark.parametrize("op", [OperatingPoint(n, m) for n in range(1, 9) for m in range(0, 17)],
                             ids=str)
    def test_rate_equals_formula(self, op):
        trace, rep = no_feedback_session(op, 6, seed=1)
        assert rep.finite_sum_rate == no_fb_sum_capacity(op).bits_per_forward_slot
        assert decode_check(trace).ok

    def test_block_two_allocation_and_trailing_slot(self):
        op = OperatingPoint(2, 1)
        base = allocation_for(op)
        shift = lambda g: g << op.q  # same generator in the second slot of the block
        gens = tuple(tuple(base.generators[k]) + tuple(shift(g) for g in base.generators[k])
                     for k in range(2))
        alloc = Allocation(op, 2, gens)
        trace, rep = no_feedback_session(op, 5, cache={(2, 1): alloc})
        assert rep.delivered == 2 * 4
        assert trace.records[-1].x1.value == trace.records[-1].x2.value == 0
        assert decode_check(trace).ok

    def test_rejects_n_zero(self):
        with pytest.raises(RegimeError):
            no_feedback_session(OperatingPoint(0, 2), 4)


class TestRouting:
    @pytest.mark.parametrize("topo", [ONE_LINK, TWO_LINK, FOUR_LINK], ids=str)
    @pytest.mark.parametrize("op", [OperatingPoint(n, m) for n in range(1, 7) for m in range(0, 13)],
                             ids=str)
    def test_rate_ceiling_and_clean_decoding(self, op, topo):
        trace, rep = feedback_session(op, 12, seed=2, topology=topo)
        assert decode_check(trace).ok
        assert rep.finite_sum_rate <= rep.asymptotic_rate <= fb_sum_capacity(op).lower
        assert rep.formula_capacity.lower == fb_sum_capacity(op).lower

    def test_no_feedback_topology(self):
        trace, rep = feedback_session(OperatingPoint(2, 1), 5, topology=NO_FEEDBACK)
        assert trace.scheme == "no-feedback" and rep.finite_sum_rate == 2

    @pytest.mark.parametrize("n, m, scheme", [(3, 1, "one-link-chained"), (2, 4, "relay"),
                                              (2, 3, "no-feedback"), (2, 2, "no-feedback")])
    def test_scheme_choice(self, n, m, scheme):
        trace, _ = feedback_session(OperatingPoint(n, m), 4)
        assert trace.scheme == scheme


class TestDecodeCheckMutations:
    @pytest.mark.parametrize("user", [1, 2])
    @pytest.mark.parametrize("slot, level", [(1, 1), (4, 2), (7, 3)])
    def test_flipped_output_is_located(self, user, slot, level):
        trace, _ = one_link_session(OperatingPoint(3, 1), 8)
        rec = trace.records[slot - 1]
        field = "y1" if user == 1 else "y2"
        trace.records[slot - 1] = dataclasses.replace(rec, **{field: flip(getattr(rec, field), level)})
        check = decode_check(trace)
        assert not check.ok
        first = check.failures[0]
        assert (first.kind, first.slot, first.user, first.level) == ("channel-law", slot, user, level)

    def test_consistent_input_flip_is_caught_by_payload_comparison(self):
        op = OperatingPoint(2, 1)
        trace, _ = one_link_session(op, 6)
        rec = trace.records[2]
        x2 = flip(rec.x2, 2)
        y1, y2 = forward_transmit(rec.x1, x2, op)
        trace.records[2] = dataclasses.replace(rec, x2=x2, y1=y1, y2=y2, fb1=(y1,))
        check = decode_check(trace)
        assert {f.kind for f in check.failures} == {"decode"}
        assert any(f.user == 2 and f.level == 2 and f.slot == 3 for f in check.failures)

    def test_feedback_tamper(self):
        trace, _ = one_link_session(OperatingPoint(2, 1), 4)
        rec = trace.records[1]
        trace.records[1] = dataclasses.replace(rec, fb1=(flip(rec.y1, 1),))
        kinds = [(f.kind, f.slot) for f in decode_check(trace).failures]
        assert kinds == [("feedback", 2)]

    def test_ledger_tamper(self):
        trace, _ = one_link_session(OperatingPoint(2, 1), 4)
        r = trace.ledger[1][0]
        r.value ^= 1
        fails = decode_check(trace).failures
        assert [(f.kind, f.user, f.level) for f in fails] == [("decode", 1, r.level)]

    def test_ledger_slot_tamper(self):
        trace, _ = one_link_session(OperatingPoint(2, 1), 4)
        trace.ledger[2][0].resolved_slot += 1
        assert [f.kind for f in decode_check(trace).failures] == ["ledger"]

    def test_block_decoder_output_flip(self):
        trace, _ = no_feedback_session(OperatingPoint(3, 2), 4)
        rec = trace.records[0]
        trace.records[0] = dataclasses.replace(rec, y2=flip(rec.y2, 3))
        first = decode_check(trace).failures[0]
        assert (first.kind, first.slot, first.user, first.level) == ("channel-law", 1, 2, 3)


class TestTraceFormat:
    @settings(max_examples=25)
    @given(st.sampled_from(CHAINED + [OperatingPoint(1, 3), OperatingPoint(3, 3)]),
           st.integers(2, 12), st.integers(0, 2**32))
    def test_export_parse_round_trip(self, op, T, seed):
        trace, _ = feedback_session(op, T, seed)
        text = trace.export()
        assert parse_trace_lines(text) == trace.records
        assert all(len(line.split("|")) == 8 for line in text.splitlines())

    def test_line_layout(self):
        trace, _ = one_link_session(OperatingPoint(2, 1), 3, seed=7)
        first = trace.export().splitlines()[0].split("|")
        assert first[:2] == ["1", "F"]
        assert all(set(f) <= {"0", "1"} and len(f) == 2 for f in first[2:6])
        assert first[6] == first[4] and first[7] == ""

    @pytest.mark.parametrize("bad", ["1|F|10|10|10|10|", "1|X|10|10|10|10||", "1|F|12|10|10|10||"])
    def test_parse_rejects(self, bad):
        with pytest.raises(ValueError):
            parse_trace_lines(bad)

    @pytest.mark.parametrize("op", [OperatingPoint(5, 2), OperatingPoint(2, 5), OperatingPoint(4, 6)],
                             ids=str)
    def test_replay_is_byte_identical(self, op):
        a, _ = feedback_session(op, 40, seed=9)
        b, _ = feedback_session(op, 40, seed=9)
        c, _ = feedback_session(op, 40, seed=10)
        assert a.export() == b.export()
        assert a.export() != c.export()


class TestEngine:
    def test_unlearned_bit_is_a_plan_error(self):
        eng = Engine(OperatingPoint(2, 1), ONE_LINK, 3, "probe", 0)
        later = eng.fresh(2, 1, 2)
        with pytest.raises(PlanError):
            eng.forward([frozenset({later}), frozenset()], [frozenset(), frozenset()])

    def test_transmitter_two_never_relays(self):
        eng = Engine(OperatingPoint(2, 1), ONE_LINK, 3, "probe", 0)
        b = eng.fresh(1, 1, 1)
        with pytest.raises(PlanError):
            eng.forward([frozenset(), frozenset()], [frozenset({b}), frozenset()])

    def test_feedback_teaches_transmitter_one(self):
        eng = Engine(OperatingPoint(2, 1), ONE_LINK, 3, "probe", 0)
        b = eng.fresh(2, 1, 1)
        eng.forward([frozenset(), frozenset()], [frozenset({b}), frozenset()], tx1_learns=True)
        assert eng.tx1.value(b) == eng.payload.bit(2, 0)
