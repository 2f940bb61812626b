"""The village: puzzle model, day-by-day protocol and assertion verifiers.

Worlds of a village with ``n`` men are ``n``-bit masks; bit ``i - 1`` is set
when man ``i`` is unfaithful. Wife ``i`` (agent ``w{i}``) cannot see bit
``i - 1``. Men and wives are numbered from 1 throughout this module.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .checker import extension, holds
from .errors import DomainError, TruthfulnessViolation, UnsupportedScenario
from .formula import Atom, Formula, Knows, disjoin, nest_everyone, render
from .kripke import KripkeModel, PointedModel, max_worlds, restrict

# n <= 12 keeps the nested-E check at 4096 worlds
CHECK_T_MAX_N = 12


def wife(i: int) -> str:
    return f"w{i}"


def unfaithful_atom(i: int) -> Atom:
    return Atom(f"u{i}")


def to_mask(men: Iterable[int]) -> int:
    mask = 0
    for i in men:
        mask |= 1 << (i - 1)
    return mask


def from_mask(mask: int) -> frozenset[int]:
    return frozenset(i + 1 for i in range(mask.bit_length()) if mask >> i & 1)


def _check_men(n: int, men: Iterable[int], what: str) -> frozenset[int]:
    men = frozenset(men)
    bad = sorted(i for i in men if not 1 <= i <= n)
    if bad:
        raise DomainError(f"{what} must lie in 1..{n}, got {bad}")
    return men


def build_village(n: int, unfaithful: Iterable[int]) -> PointedModel:
    """All ``2**n`` possible villages, pointed at the actual one."""
    if n < 1:
        raise DomainError("a village needs at least one man")
    limit = max_worlds()
    if n >= 64 or 1 << n > limit:
        raise DomainError(
            f"{n} men need 2**{n} worlds, above the limit of {limit}; "
            "use the fast engine for large villages"
        )
    unfaithful = _check_men(n, unfaithful, "unfaithful men")
    worlds = tuple(range(1 << n))
    relations = []
    for i in range(n):
        bit = 1 << i
        relations.append(tuple(frozenset((w, w | bit)) for w in worlds if not w & bit))
    model = KripkeModel(
        agents=tuple(wife(i) for i in range(1, n + 1)),
        atoms=tuple(f"u{i}" for i in range(1, n + 1)),
        worlds=worlds,
        valuation={w: w for w in worlds},
        relations=tuple(relations),
    )
    return PointedModel(model, to_mask(unfaithful))


def at_least_one(n: int) -> Formula:
    """``u1 | u2 | ... | un``: the oracle's proclamation."""
    if n < 1:
        raise DomainError("need at least one man")
    return disjoin(*(unfaithful_atom(i) for i in range(1, n + 1)))


def knows_own(i: int) -> Formula:
    """Wife ``i`` knows her husband is unfaithful."""
    return Knows(wife(i), unfaithful_atom(i))


# ---------------------------------------------------------------------------
# scenarios and traces


@dataclass(frozen=True)
class ScenarioSpec:
    n_men: int
    unfaithful: frozenset[int]
    deviants: frozenset[int] = frozenset()
    max_mornings: Optional[int] = None

    def __post_init__(self):
        if self.n_men < 1:
            raise DomainError("a village needs at least one man")
        object.__setattr__(self, "unfaithful", _check_men(self.n_men, self.unfaithful, "unfaithful men"))
        object.__setattr__(self, "deviants", _check_men(self.n_men, self.deviants, "deviant wives"))
        if self.max_mornings is None:
            object.__setattr__(self, "max_mornings", self.n_men + 2)
        elif self.max_mornings < 1:
            raise DomainError("max_mornings must be positive")

    def to_dict(self) -> dict:
        return {
            "n_men": self.n_men,
            "unfaithful": sorted(self.unfaithful),
            "deviants": sorted(self.deviants),
            "max_mornings": self.max_mornings,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        return cls(d["n_men"], frozenset(d["unfaithful"]), frozenset(d.get("deviants", ())), d.get("max_mornings"))


@dataclass(frozen=True)
class DayEvent:
    morning: int
    killed: frozenset[int]
    model_size_after: int

    def to_dict(self) -> dict:
        return {"morning": self.morning, "killed": sorted(self.killed), "model_size_after": self.model_size_after}

    @classmethod
    def from_dict(cls, d: dict) -> "DayEvent":
        return cls(d["morning"], frozenset(d["killed"]), d["model_size_after"])


class OutcomeKind(enum.Enum):
    COMPLETED = "completed"
    COLLAPSED = "collapsed"
    MORNING_LIMIT_REACHED = "morning_limit_reached"


@dataclass(frozen=True)
class Outcome:
    kind: OutcomeKind
    morning: Optional[int] = None  # set for collapses

    def __str__(self):
        if self.kind is OutcomeKind.COLLAPSED:
            return f"collapsed at morning {self.morning}"
        return self.kind.value.replace("_", " ")

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "morning": self.morning}

    @classmethod
    def from_dict(cls, d: dict) -> "Outcome":
        return cls(OutcomeKind(d["kind"]), d.get("morning"))


@dataclass(frozen=True)
class Trace:
    spec: ScenarioSpec
    events: tuple[DayEvent, ...]
    outcome: Outcome

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "events": [e.to_dict() for e in self.events],
            "outcome": self.outcome.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Trace":
        return cls(
            ScenarioSpec.from_dict(d["spec"]),
            tuple(DayEvent.from_dict(e) for e in d["events"]),
            Outcome.from_dict(d["outcome"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Trace":
        return cls.from_dict(json.loads(text))

    def table(self) -> str:
        rows = [f"{'morning':>7}  {'event':<30}  {'worlds left':>12}"]
        for e in self.events:
            what = "killed: " + ",".join(map(str, sorted(e.killed))) if e.killed else "no killings"
            rows.append(f"{e.morning:>7}  {what:<30}  {e.model_size_after:>12}")
        rows.append(f"outcome: {self.outcome}")
        return "\n".join(rows)


# ---------------------------------------------------------------------------
# exact engine


@dataclass(frozen=True)
class ProtocolState:
    pointed: PointedModel
    morning: int = 0
    history: tuple[Union[Formula, DayEvent], ...] = field(default=())

    @property
    def collapsed(self) -> bool:
        return self.pointed.model.collapsed

    @property
    def model(self) -> KripkeModel:
        return self.pointed.model


def initial_state(n: int, unfaithful: Iterable[int]) -> ProtocolState:
    return ProtocolState(build_village(n, unfaithful))


def announce(state: ProtocolState, f: Formula) -> ProtocolState:
    """Publicly and truthfully announce ``f``: drop every world where it fails."""
    if not holds(state.pointed, f):
        raise TruthfulnessViolation(f"announcement {render(f)!r} is false at the actual world")
    model = restrict(state.model, extension(state.model, f))
    return ProtocolState(PointedModel(model, state.pointed.actual), state.morning, state.history + (f,))


def _killers_by_world(model: KripkeModel) -> dict:
    """Per world, the wives who would kill that morning if every wife complied."""
    n = len(model.agents)
    out = {w: 0 for w in model.worlds}
    for i in range(1, n + 1):
        for w in extension(model, knows_own(i)):
            out[w] |= 1 << (i - 1)
    return out


def step_morning(state: ProtocolState, deviants: Iterable[int] = ()) -> tuple[ProtocolState, DayEvent]:
    """One morning: wives who know act, then everyone observes who died.

    The public prediction for each world assumes every wife complies; a
    deviant wife's silence is observed like any other absence of a killing.
    """
    if state.collapsed:
        raise DomainError("cannot advance a collapsed protocol")
    model = state.model
    predicted = _killers_by_world(model)
    deviant_mask = to_mask(deviants)
    observed = predicted[state.pointed.actual] & ~deviant_mask
    keep = [w for w in model.worlds if predicted[w] == observed]
    morning = state.morning + 1
    event = DayEvent(morning, from_mask(observed), len(keep))
    new_model = restrict(model, keep)
    new_state = ProtocolState(PointedModel(new_model, state.pointed.actual), morning, state.history + (event,))
    return new_state, event


def run_protocol(spec: ScenarioSpec) -> Trace:
    if not spec.unfaithful:
        raise TruthfulnessViolation("the oracle cannot truthfully announce that someone is unfaithful")
    state = announce(initial_state(spec.n_men, spec.unfaithful), at_least_one(spec.n_men))
    events = []
    outcome = Outcome(OutcomeKind.MORNING_LIMIT_REACHED)
    for _ in range(spec.max_mornings):
        state, event = step_morning(state, spec.deviants)
        events.append(event)
        if state.collapsed:
            outcome = Outcome(OutcomeKind.COLLAPSED, event.morning)
            break
        if event.killed:
            outcome = Outcome(OutcomeKind.COMPLETED)
            break
    return Trace(spec, tuple(events), outcome)


# ---------------------------------------------------------------------------
# fast engine


@dataclass
class FastState:
    n: int
    k: int
    lower_bound: int = 1  # publicly known minimum number of unfaithful men

    def observed(self, wife_betrayed: bool) -> int:
        return self.k - 1 if wife_betrayed else self.k


def run_protocol_fast(spec: ScenarioSpec) -> Trace:
    """Counting simulation of the compliant protocol; no worlds are built.

    Betrayed wives see ``k - 1`` unfaithful men and kill once that count falls
    below the public lower bound; every quiet morning raises the bound by one.
    World counts are reported in closed form: after a quiet morning ``m`` the
    survivors are exactly the subsets with more than ``m`` members.
    """
    if spec.deviants:
        raise UnsupportedScenario("the fast engine only simulates compliant wives")
    if not spec.unfaithful:
        raise TruthfulnessViolation("the oracle cannot truthfully announce that someone is unfaithful")
    n = spec.n_men
    state = FastState(n, len(spec.unfaithful))
    remaining = (1 << n) - 1  # subsets of size >= 1
    binom = 1  # C(n, m) for the current morning m
    events = []
    outcome = Outcome(OutcomeKind.MORNING_LIMIT_REACHED)
    for morning in range(1, spec.max_mornings + 1):
        if state.observed(True) < state.lower_bound:
            events.append(DayEvent(morning, spec.unfaithful, 1))
            outcome = Outcome(OutcomeKind.COMPLETED)
            break
        binom = binom * (n - morning + 1) // morning
        remaining -= binom
        state.lower_bound += 1
        events.append(DayEvent(morning, frozenset(), remaining))
    return Trace(spec, tuple(events), outcome)


# ---------------------------------------------------------------------------
# verifiers


@dataclass
class Report:
    holds: bool
    details: list[str] = field(default_factory=list)

    def fail(self, msg: str) -> None:
        self.holds = False
        self.details.append(msg)


def _guard(n: int, k: int, max_n: Optional[int] = None) -> None:
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got n={n}, k={k}")
    if max_n is not None and n > max_n:
        raise DomainError(f"n={n} exceeds the limit of {max_n} for this check")


def check_S(n: int, k: int) -> Report:
    """Betrayed wives learn the truth exactly k-1 mornings after the oracle.

    The unfaithful men are taken to be 1..k; the village is symmetric under
    relabelling so this loses no generality.
    """
    _guard(n, k)
    unfaithful = frozenset(range(1, k + 1))
    report = Report(True)

    state = announce(initial_state(n, unfaithful), at_least_one(n))
    for m in range(k):
        # m mornings have passed since the proclamation
        pm = state.pointed
        knowing = {i for i in range(1, n + 1) if holds(pm, knows_own(i))}
        if knowing - unfaithful:
            report.fail(f"after {m} mornings faithful wives {sorted(knowing - unfaithful)} know")
        if m < k - 1 and knowing:
            report.fail(f"after {m} mornings wives {sorted(knowing)} already know")
        if m == k - 1 and knowing != unfaithful:
            report.fail(f"after {m} mornings the knowing wives are {sorted(knowing)}, not {sorted(unfaithful)}")
        state, event = step_morning(state)
        expected = unfaithful if m == k - 1 else frozenset()
        if event.killed != expected:
            report.fail(f"morning {event.morning} killed {sorted(event.killed)}, expected {sorted(expected)}")

    trace = run_protocol(ScenarioSpec(n, unfaithful))
    expected_events = [frozenset()] * (k - 1) + [unfaithful]
    if [e.killed for e in trace.events] != expected_events or trace.outcome.kind is not OutcomeKind.COMPLETED:
        report.fail(f"run_protocol gave {[sorted(e.killed) for e in trace.events]} ({trace.outcome})")
    if report.holds:
        report.details.append(f"n={n}, k={k}: {k - 1} quiet mornings, wives of 1..{k} know after {k - 1} mornings")
    return report


def check_T(n: int, k: int) -> Report:
    """Before the oracle, betrayed wives do not know E^(k-1) of at_least_one."""
    _guard(n, k, CHECK_T_MAX_N)
    unfaithful = frozenset(range(1, k + 1))
    pm = build_village(n, unfaithful)
    nested = nest_everyone(at_least_one(n), k - 1)
    report = Report(True)
    memo: dict = {}
    ext = extension(pm.model, nested, memo)
    if pm.actual not in ext:
        report.fail(f"n={n}, k={k}: E^{k - 1}(at_least_one) is false at the actual world")
    for i in sorted(unfaithful):
        knows = extension(pm.model, Knows(wife(i), nested), memo)
        if pm.actual in knows:
            report.fail(f"n={n}, k={k}: wife {i} knows E^{k - 1}(at_least_one)")
    if report.holds:
        report.details.append(
            f"n={n}, k={k}: E^{k - 1}(at_least_one) holds; none of the {k} betrayed wives knows it "
            "(all are checked; by symmetry 'some' and 'all' coincide)"
        )
    return report
