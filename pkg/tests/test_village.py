import math
from fractions import Fraction

import pytest

from stobon.checker import extension, holds, info_content, subjective_probability
from stobon.errors import DomainError, TruthfulnessViolation, UnsupportedScenario
from stobon.formula import Atom, Common, Knows, nest_everyone, render
from stobon.kripke import accessible, validate
from stobon.village import (
    DayEvent,
    OutcomeKind,
    ProtocolState,
    ScenarioSpec,
    Trace,
    announce,
    at_least_one,
    build_village,
    check_S,
    check_T,
    from_mask,
    initial_state,
    knows_own,
    run_protocol,
    run_protocol_fast,
    step_morning,
    to_mask,
)

from naive import holds_at

EMPTY = frozenset()


def post_oracle_state(n, unfaithful):
    return announce(initial_state(n, unfaithful), at_least_one(n))


def test_build_village():
    pm = build_village(2, ())
    m = pm.model
    assert len(m.worlds) == 4
    assert set(m.relations[0]) == {frozenset({0, 1}), frozenset({2, 3})}
    assert validate(m).ok
    pm = build_village(1, {1})
    assert len(pm.model.worlds) == 2 and pm.actual == to_mask({1})
    m3 = build_village(3, ()).model
    assert accessible(m3, to_mask({1, 2, 3}), "w1") == {to_mask({1, 2, 3}), to_mask({2, 3})}
    assert m3.true_atoms(to_mask({1, 3})) == {"u1", "u3"}


@pytest.mark.parametrize("n, men", [(0, ()), (3, {4}), (3, {0})])
def test_build_village_rejects(n, men):
    with pytest.raises(DomainError):
        build_village(n, men)


def test_masks():
    assert from_mask(to_mask({1, 3, 4})) == {1, 3, 4}
    assert to_mask(()) == 0


def test_at_least_one():
    assert at_least_one(1) == Atom("u1")
    assert render(at_least_one(3)) == "u1 | u2 | u3"
    m = build_village(2, ()).model
    assert len(extension(m, at_least_one(2))) == 3
    with pytest.raises(DomainError):
        at_least_one(0)


def test_announce():
    state = post_oracle_state(2, {1})
    assert len(state.model.worlds) == 3 and 0 not in state.model.worlds
    assert state.history == (at_least_one(2),)
    s1 = announce(initial_state(1, {1}), Atom("u1"))
    assert len(s1.model.worlds) == 1
    assert holds(s1.pointed, knows_own(1))
    with pytest.raises(TruthfulnessViolation):
        announce(initial_state(2, ()), at_least_one(2))


def test_step_morning_basis():
    state, event = step_morning(post_oracle_state(1, {1}))
    assert event == DayEvent(1, frozenset({1}), 1)
    assert state.morning == 1 and state.history[-1] == event


def test_step_morning_two_betrayed():
    state = post_oracle_state(2, {1, 2})
    m = state.model
    # brute force over the three surviving worlds: who would know their own bit
    predicted = {
        w: frozenset(i for i in (1, 2) if holds_at(m, w, Knows(f"w{i}", Atom(f"u{i}"))))
        for w in m.worlds
    }
    assert predicted == {to_mask({1}): {1}, to_mask({2}): {2}, to_mask({1, 2}): EMPTY}
    after, event = step_morning(state)
    assert event.killed == EMPTY
    assert after.model.worlds == (to_mask({1, 2}),)


def test_step_morning_deviant_collapse():
    state, event = step_morning(post_oracle_state(1, {1}), deviants={1})
    assert event == DayEvent(1, EMPTY, 0)
    assert state.collapsed
    with pytest.raises(DomainError):
        step_morning(state)


def test_run_protocol_examples():
    assert run_protocol(ScenarioSpec(1, {1})).events == (DayEvent(1, frozenset({1}), 1),)
    t = run_protocol(ScenarioSpec(5, {1, 3, 4}))
    assert [e.killed for e in t.events] == [EMPTY, EMPTY, {1, 3, 4}]
    assert t.outcome.kind is OutcomeKind.COMPLETED
    assert t == run_protocol_fast(ScenarioSpec(5, {1, 3, 4}))
    t = run_protocol(ScenarioSpec(2, {1, 2}))
    assert [e.killed for e in t.events] == [EMPTY, {1, 2}]


def test_run_protocol_needs_an_unfaithful_man():
    with pytest.raises(TruthfulnessViolation):
        run_protocol(ScenarioSpec(3, ()))
    with pytest.raises(TruthfulnessViolation):
        run_protocol_fast(ScenarioSpec(3, ()))


def test_world_counts_closed_form():
    for n in range(1, 9):
        for k in range(1, n + 1):
            t = run_protocol(ScenarioSpec(n, frozenset(range(n - k + 1, n + 1))))
            for e in t.events[:-1]:
                assert e.model_size_after == sum(math.comb(n, j) for j in range(e.morning + 1, n + 1))
            assert t.events[-1].model_size_after == 1


def test_fast_engine_examples():
    t = run_protocol_fast(ScenarioSpec(100, frozenset(range(1, 101))))
    assert [e.morning for e in t.events] == list(range(1, 101))
    assert all(not e.killed for e in t.events[:99])
    assert t.events[99].killed == set(range(1, 101))
    assert run_protocol_fast(ScenarioSpec(7, {4})).events == (DayEvent(1, frozenset({4}), 1),)
    with pytest.raises(UnsupportedScenario):
        run_protocol_fast(ScenarioSpec(3, {1}, deviants={1}))


def test_fast_engine_million_men():
    t = run_protocol_fast(ScenarioSpec(10**6, frozenset(range(1, 6))))
    assert [len(e.killed) for e in t.events] == [0, 0, 0, 0, 5]
    assert t.events[0].model_size_after == (1 << 10**6) - 1 - 10**6


def test_morning_limit():
    spec = ScenarioSpec(4, {1, 2, 3}, max_mornings=2)
    for engine in (run_protocol, run_protocol_fast):
        t = engine(spec)
        assert t.outcome.kind is OutcomeKind.MORNING_LIMIT_REACHED
        assert len(t.events) == 2
    assert run_protocol(spec) == run_protocol_fast(spec)


def test_deviants():
    t = run_protocol(ScenarioSpec(1, {1}, deviants={1}))
    assert t.outcome.kind is OutcomeKind.COLLAPSED and t.outcome.morning == 1
    # a rebel among the betrayed: her partner still kills, and the public is baffled
    t = run_protocol(ScenarioSpec(2, {1, 2}, deviants={1}))
    assert [e.killed for e in t.events] == [EMPTY, {2}]
    assert t.outcome.kind is OutcomeKind.COLLAPSED and t.outcome.morning == 2
    # a rebel with a faithful husband changes nothing
    assert run_protocol(ScenarioSpec(2, {1}, deviants={2})).events == run_protocol(ScenarioSpec(2, {1})).events


def test_scenario_spec_validation():
    assert ScenarioSpec(3, {1}).max_mornings == 5
    with pytest.raises(DomainError):
        ScenarioSpec(3, {5})
    with pytest.raises(DomainError):
        ScenarioSpec(3, {1}, deviants={9})
    with pytest.raises(DomainError):
        ScenarioSpec(3, {1}, max_mornings=0)


def test_trace_serialization():
    t = run_protocol(ScenarioSpec(5, {1, 3, 4}, deviants={2}))
    assert Trace.from_json(t.to_json()) == t
    t = run_protocol(ScenarioSpec(1, {1}, deviants={1}))
    assert Trace.from_json(t.to_json()) == t
    table = run_protocol(ScenarioSpec(5, {1, 2, 3})).table().splitlines()
    assert "no killings" in table[1] and "no killings" in table[2]
    assert "killed: 1,2,3" in table[3]
    assert table[-1] == "outcome: completed"


@pytest.mark.parametrize("n, k", [(1, 1), (8, 5), (4, 4), (3, 2)])
def test_check_S(n, k):
    report = check_S(n, k)
    assert report.holds, report.details


@pytest.mark.parametrize("n, k", [(2, 1), (2, 2), (8, 5), (5, 1)])
def test_check_T(n, k):
    report = check_T(n, k)
    assert report.holds, report.details
    assert "symmetry" in report.details[0]


def test_check_guards():
    for bad in [(3, 0), (3, 4)]:
        with pytest.raises(DomainError):
            check_S(*bad)
        with pytest.raises(DomainError):
            check_T(*bad)
    with pytest.raises(DomainError):
        check_T(13, 1)


def test_T_is_tight():
    # one more level of E fails at the actual world, so the bound in T is sharp
    for n in range(1, 6):
        for k in range(1, n + 1):
            pm = build_village(n, range(1, k + 1))
            assert not holds(pm, nest_everyone(at_least_one(n), k))


def test_common_knowledge_flip_small():
    for n in range(1, 5):
        for k in range(1, n + 1):
            state = initial_state(n, range(1, k + 1))
            c = Common(None, at_least_one(n))
            assert not holds(state.pointed, c)
            assert holds(announce(state, at_least_one(n)).pointed, c)


def test_oracle_tells_nobody_anything_when_two_cheat():
    pm = build_village(2, {1, 2})
    for i in (1, 2):
        p = subjective_probability(pm, f"w{i}", at_least_one(2))
        assert p == 1 and info_content(p).bits == 0
        nested = subjective_probability(pm, f"w{i}", nest_everyone(at_least_one(2), 1))
        assert nested == Fraction(1, 2)
