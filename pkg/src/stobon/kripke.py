"""Finite S5 Kripke models.

Each agent's accessibility relation is stored as a partition of the world set
into blocks of mutually indistinguishable worlds. World ids are any hashable
value; the village builder uses integer bitmasks, file-loaded models use the
string ids found in the file.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Mapping, NamedTuple, Sequence, Union

import jsonschema

from .errors import DomainError

World = Hashable
AgentRef = Union[int, str]

DEFAULT_MAX_WORLDS = 1 << 24
MAX_WORLDS_ENV = "STOBON_MAX_WORLDS"


class Agent(NamedTuple):
    id: int
    name: str


@dataclass(frozen=True)
class KripkeModel:
    agents: tuple[str, ...]
    atoms: tuple[str, ...]
    worlds: tuple[World, ...]
    # per world, bit j set <=> atoms[j] is true there
    valuation: Mapping[World, int]
    # relations[a] is agent a's partition of the worlds
    relations: tuple[tuple[frozenset, ...], ...]

    def __post_init__(self):
        if len(self.relations) != len(self.agents):
            raise DomainError(
                f"{len(self.relations)} relations given for {len(self.agents)} agents"
            )

    @property
    def collapsed(self) -> bool:
        return not self.worlds

    @cached_property
    def world_set(self) -> frozenset:
        return frozenset(self.worlds)

    @cached_property
    def _block_of(self) -> tuple[dict, ...]:
        index = []
        for blocks in self.relations:
            lookup = {}
            for block in blocks:
                for w in block:
                    lookup.setdefault(w, block)
            index.append(lookup)
        return tuple(index)

    @cached_property
    def _agent_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.agents)}

    @cached_property
    def _atom_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.atoms)}

    def agent(self, ref: AgentRef) -> Agent:
        """Resolve an agent given by index or display name."""
        if isinstance(ref, int) and not isinstance(ref, bool):
            if 0 <= ref < len(self.agents):
                return Agent(ref, self.agents[ref])
        elif ref in self._agent_index:
            i = self._agent_index[ref]
            return Agent(i, self.agents[i])
        raise DomainError(f"unknown agent {ref!r}")

    def atom_bit(self, name: str) -> int:
        try:
            return 1 << self._atom_index[name]
        except KeyError:
            raise DomainError(f"unknown atom {name!r}") from None

    def true_atoms(self, w: World) -> frozenset[str]:
        bits = self.valuation[w]
        return frozenset(a for i, a in enumerate(self.atoms) if bits >> i & 1)

    def check_world(self, w: World) -> None:
        if w not in self.world_set:
            raise DomainError(f"unknown world {w!r}")


@dataclass(frozen=True)
class PointedModel:
    model: KripkeModel
    actual: World

    def __post_init__(self):
        # a collapsed model keeps the original actual world for reporting only
        if not self.model.collapsed:
            self.model.check_world(self.actual)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        return "ok" if self.ok else "; ".join(self.violations)


def validate(model: KripkeModel) -> ValidationReport:
    report = ValidationReport()
    problems = report.violations
    seen = set()
    for w in model.worlds:
        if w in seen:
            problems.append(f"duplicate world {w!r}")
        seen.add(w)
        if w not in model.valuation:
            problems.append(f"world {w!r} has no valuation")
        elif model.valuation[w] >> len(model.atoms):
            problems.append(f"dangling atom: world {w!r} sets a bit outside the atom table")
    for w in model.valuation:
        if w not in seen:
            problems.append(f"valuation for unknown world {w!r}")
    for a, (name, blocks) in enumerate(zip(model.agents, model.relations)):
        owner: dict = {}
        for b, block in enumerate(blocks):
            if not block:
                problems.append(f"agent {name}: empty block {b}")
            for w in sorted(block, key=repr):
                if w not in seen:
                    problems.append(f"agent {name}: block {b} mentions unknown world {w!r}")
                elif w in owner:
                    problems.append(
                        f"agent {name}: overlapping blocks {owner[w]} and {b} share world {w!r}"
                    )
                else:
                    owner[w] = b
        for w in model.worlds:
            if w not in owner:
                problems.append(f"agent {name}: uncovered world {w!r}")
    return report


def accessible(model: KripkeModel, w: World, a: AgentRef) -> frozenset:
    agent = model.agent(a)
    model.check_world(w)
    try:
        return model._block_of[agent.id][w]
    except KeyError:
        raise DomainError(f"world {w!r} lies in no block of agent {agent.name}") from None


def restrict(model: KripkeModel, keep: Iterable[World]) -> KripkeModel:
    keep = frozenset(keep)
    unknown = keep - model.world_set
    if unknown:
        raise DomainError(f"cannot keep unknown worlds {sorted(unknown, key=repr)!r}")
    relations = tuple(
        tuple(nb for nb in (block & keep for block in blocks) if nb)
        for blocks in model.relations
    )
    return KripkeModel(
        agents=model.agents,
        atoms=model.atoms,
        worlds=tuple(w for w in model.worlds if w in keep),
        valuation={w: v for w, v in model.valuation.items() if w in keep},
        relations=relations,
    )


def reachable(model: KripkeModel, w: World, group: Iterable[AgentRef]) -> frozenset:
    """Worlds reachable from ``w`` through any chain of the group's relations."""
    model.check_world(w)
    ids = [model.agent(a).id for a in group]
    seen = {w}
    frontier = [w]
    while frontier:
        v = frontier.pop()
        for a in ids:
            for u in model._block_of[a].get(v, ()):
                if u not in seen:
                    seen.add(u)
                    frontier.append(u)
    return frozenset(seen)


def components(model: KripkeModel, group: Iterable[AgentRef]) -> list[frozenset]:
    """Partition of the worlds into classes of the group's reachability closure."""
    parent = {w: w for w in model.worlds}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a in {model.agent(a).id for a in group}:
        for block in model.relations[a]:
            it = iter(block)
            root = find(next(it))
            for w in it:
                r = find(w)
                if r != root:
                    parent[r] = root
    classes: dict = {}
    for w in model.worlds:
        classes.setdefault(find(w), set()).add(w)
    return [frozenset(c) for c in classes.values()]


def max_worlds() -> int:
    raw = os.environ.get(MAX_WORLDS_ENV)
    if not raw:
        return DEFAULT_MAX_WORLDS
    try:
        value = int(raw)
    except ValueError:
        raise DomainError(f"{MAX_WORLDS_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise DomainError(f"{MAX_WORLDS_ENV} must be positive")
    return value


# ---------------------------------------------------------------------------
# model files

MODEL_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Kripke model",
    "type": "object",
    "required": ["agents", "atoms", "worlds", "relations", "actual"],
    "additionalProperties": False,
    "properties": {
        "agents": {"type": "array", "items": {"type": "string"}, "uniqueItems": True},
        "atoms": {"type": "array", "items": {"type": "string"}, "uniqueItems": True},
        "worlds": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "atoms"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string"},
                    "atoms": {"type": "array", "items": {"type": "string"}},
                },
            },
        },
        "relations": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "items": {"type": "array", "items": {"type": "string"}},
            },
        },
        "actual": {"type": "string"},
    },
}


def model_from_dict(doc: Mapping) -> PointedModel:
    """Build and validate a pointed model from its JSON document form."""
    try:
        jsonschema.validate(doc, MODEL_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise DomainError(f"invalid model document: {exc.message}") from None
    agents = tuple(doc["agents"])
    atoms = tuple(doc["atoms"])
    atom_index = {a: i for i, a in enumerate(atoms)}
    valuation = {}
    for entry in doc["worlds"]:
        bits = 0
        for name in entry["atoms"]:
            if name not in atom_index:
                raise DomainError(f"dangling atom {name!r} in world {entry['id']!r}")
            bits |= 1 << atom_index[name]
        if entry["id"] in valuation:
            raise DomainError(f"duplicate world {entry['id']!r}")
        valuation[entry["id"]] = bits
    extra = set(doc["relations"]) - set(agents)
    if extra:
        raise DomainError(f"relations given for undeclared agents {sorted(extra)}")
    relations = tuple(
        tuple(frozenset(block) for block in doc["relations"].get(name, ()))
        for name in agents
    )
    model = KripkeModel(agents, atoms, tuple(valuation), valuation, relations)
    report = validate(model)
    if not report.ok:
        raise DomainError(f"invalid model: {report}")
    return PointedModel(model, doc["actual"])


def model_to_dict(pm: PointedModel) -> dict:
    m = pm.model
    return {
        "agents": list(m.agents),
        "atoms": list(m.atoms),
        "worlds": [
            {"id": str(w), "atoms": sorted(m.true_atoms(w), key=m.atoms.index)}
            for w in m.worlds
        ],
        "relations": {
            name: [sorted(map(str, block)) for block in blocks]
            for name, blocks in zip(m.agents, m.relations)
        },
        "actual": str(pm.actual),
    }


def load_model(path: Union[str, os.PathLike]) -> PointedModel:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DomainError(f"{path}: not valid JSON ({exc})") from None
    return model_from_dict(doc)


def partition_model(
    agents: Sequence[str],
    atoms: Sequence[str],
    valuation: Mapping[World, int],
    relations: Sequence[Sequence[Iterable[World]]],
) -> KripkeModel:
    """Convenience constructor taking plain iterables for the blocks."""
    return KripkeModel(
        tuple(agents),
        tuple(atoms),
        tuple(valuation),
        dict(valuation),
        tuple(tuple(frozenset(b) for b in blocks) for blocks in relations),
    )
