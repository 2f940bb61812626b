"""Truth evaluation, subjective probability and information content."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import CollapsedModelError, DomainError
from .formula import (
    And,
    Announce,
    Atom,
    Bottom,
    Common,
    Everyone,
    Formula,
    Iff,
    Implies,
    Knows,
    Not,
    Or,
    Top,
    subformulas,
)
from .kripke import AgentRef, KripkeModel, PointedModel, accessible, components, restrict

Extension = frozenset


def _group_ids(model: KripkeModel, group) -> list[int]:
    if group is None:
        return list(range(len(model.agents)))
    return [model.agent(a).id for a in group]


def _knowers(model: KripkeModel, agent: int, ext: frozenset) -> set:
    out = set()
    for block in model.relations[agent]:
        if block <= ext:
            out |= block
    return out


def extension(model: KripkeModel, f: Formula, memo: Optional[dict] = None) -> Extension:
    """Set of worlds of ``model`` where ``f`` holds.

    Subformulas are evaluated once each, children first; ``memo`` maps
    already-evaluated subformulas to their extensions in this model.
    """
    memo = {} if memo is None else memo
    everything = model.world_set
    for g in subformulas(f):
        if g in memo:
            continue
        if isinstance(g, Atom):
            bit = model.atom_bit(g.name)
            ext = frozenset(w for w in model.worlds if model.valuation[w] & bit)
        elif isinstance(g, Top):
            ext = everything
        elif isinstance(g, Bottom):
            ext = frozenset()
        elif isinstance(g, Not):
            ext = everything - memo[g.sub]
        elif isinstance(g, And):
            ext = memo[g.left] & memo[g.right]
        elif isinstance(g, Or):
            ext = memo[g.left] | memo[g.right]
        elif isinstance(g, Implies):
            ext = (everything - memo[g.left]) | memo[g.right]
        elif isinstance(g, Iff):
            ext = everything - (memo[g.left] ^ memo[g.right])
        elif isinstance(g, Knows):
            ext = frozenset(_knowers(model, model.agent(g.agent).id, memo[g.sub]))
        elif isinstance(g, Everyone):
            ext = everything
            for a in _group_ids(model, g.group):
                ext = ext & _knowers(model, a, memo[g.sub])
            ext = frozenset(ext)
        elif isinstance(g, Common):
            ids = _group_ids(model, g.group)
            inner = memo[g.sub]
            if not ids:
                ext = inner
            else:
                ext = frozenset().union(*(c for c in components(model, ids) if c <= inner))
        elif isinstance(g, Announce):
            said = memo[g.announcement]
            after = extension(restrict(model, said), g.body)
            ext = (everything - said) | (said & after)
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[g] = ext
    return memo[f]


def _require_worlds(pm: PointedModel) -> None:
    if pm.model.collapsed:
        raise CollapsedModelError("no worlds: the model has collapsed")


def holds(pm: PointedModel, f: Formula) -> bool:
    _require_worlds(pm)
    return pm.actual in extension(pm.model, f)


def subjective_probability(pm: PointedModel, a: AgentRef, f: Formula) -> Fraction:
    """Share of the agent's indistinguishable worlds where ``f`` holds."""
    _require_worlds(pm)
    block = accessible(pm.model, pm.actual, a)
    ext = extension(pm.model, f)
    return Fraction(len(block & ext), len(block))


@dataclass(frozen=True, order=True)
class Surprisal:
    """Information content in bits; ``bits is None`` marks an impossible event."""

    # sorts impossible events after every finite value
    impossible: bool
    bits: Optional[float]

    def __str__(self):
        if self.impossible:
            return "impossible"
        return format(self.bits, ".12g")

    def to_json(self):
        return "impossible" if self.impossible else self.bits


IMPOSSIBLE = Surprisal(True, None)


def info_content(p: Fraction) -> Surprisal:
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise DomainError(f"probability {p} outside [0, 1]")
    if p == 0:
        return IMPOSSIBLE
    if p == 1:
        return Surprisal(False, 0.0)
    # log of numerator and denominator separately keeps big rationals exact-ish
    return Surprisal(False, math.log2(p.denominator) - math.log2(p.numerator))


def format_probability(p: Fraction) -> str:
    return str(Fraction(p))

