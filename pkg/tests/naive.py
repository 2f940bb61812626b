"""Per-world recursive evaluator, written straight from the truth conditions.

It never calls the library's extension, restrict or reachable code, so it can
serve as an independent oracle. Announcements shrink an explicit ``domain``.
"""

from stobon.formula import (
    And, Announce, Atom, Bottom, Common, Everyone, Iff, Implies, Knows, Not, Or, Top,
)


def _cell(model, domain, agent, w):
    a = model.agents.index(agent)
    for block in model.relations[a]:
        if w in block:
            return [v for v in block if v in domain]
    raise AssertionError("world in no block")


def _group(model, group):
    return list(model.agents) if group is None else list(group)


def holds_at(model, w, f, domain=None):
    domain = set(model.worlds) if domain is None else domain
    rec = lambda g, v=w: holds_at(model, v, g, domain)  # noqa: E731
    if isinstance(f, Atom):
        return bool(model.valuation[w] >> model.atoms.index(f.name) & 1)
    if isinstance(f, Top):
        return True
    if isinstance(f, Bottom):
        return False
    if isinstance(f, Not):
        return not rec(f.sub)
    if isinstance(f, And):
        return rec(f.left) and rec(f.right)
    if isinstance(f, Or):
        return rec(f.left) or rec(f.right)
    if isinstance(f, Implies):
        return (not rec(f.left)) or rec(f.right)
    if isinstance(f, Iff):
        return rec(f.left) == rec(f.right)
    if isinstance(f, Knows):
        return all(rec(f.sub, v) for v in _cell(model, domain, f.agent, w))
    if isinstance(f, Everyone):
        return all(
            all(rec(f.sub, v) for v in _cell(model, domain, a, w))
            for a in _group(model, f.group)
        )
    if isinstance(f, Common):
        seen, todo = {w}, [w]
        while todo:
            u = todo.pop()
            for a in _group(model, f.group):
                for v in _cell(model, domain, a, u):
                    if v not in seen:
                        seen.add(v)
                        todo.append(v)
        return all(rec(f.sub, v) for v in seen)
    if isinstance(f, Announce):
        if not rec(f.announcement):
            return True
        kept = {v for v in domain if holds_at(model, v, f.announcement, domain)}
        return holds_at(model, w, f.body, kept)
    raise TypeError(f)


def naive_extension(model, f):
    return frozenset(w for w in model.worlds if holds_at(model, w, f))
