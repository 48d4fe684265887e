"""Model checking: the coalition-free engine and the strategic extension.

`check` evaluates the coalition-free fragment by direct recursion on the
formula, materialising updated mechanisms along diffusion operators.
`check_strategic` additionally handles coalition operators by quantifying
over per-seller choices drawn from the mechanism's buyers plus SKIP."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import auction
from .errors import (
    ActionError,
    CoalitionOperatorError,
    UnknownAgentError,
    UnknownNominalError,
)
from .formula import (
    SELF,
    And,
    Box,
    CoalitionBox,
    Diffuse,
    Formula,
    Heart,
    LinearGeq,
    Nominal,
    Not,
    contains_coalition,
    desugar,
    names_of,
)
from .model import (
    SELLER,
    SKIP,
    AgentId,
    JointAction,
    Mechanism,
    action_precondition,
    apply_joint_action,
    joint_action,
    resolve_name,
)


@dataclass
class CheckStats:
    """Counters a query fills in: mechanism size, distinct states built."""

    agents: int = 0
    states_explored: int = 0
    elapsed_ms: float = 0.0


@dataclass(frozen=True)
class CheckQuery:
    mechanism: Mechanism
    at: AgentId
    formula: Formula


def action_from_bindings(mechanism: Mechanism, bindings) -> JointAction:
    """JointAction for formula-level bindings; unlisted sellers SKIP."""
    partial: dict[AgentId, object] = {}
    for nominal, target in bindings:
        agent = resolve_name(mechanism, nominal)
        if agent.kind != SELLER:
            raise ActionError(f"{nominal!r} does not name a seller")
        if agent in partial:
            raise ActionError(f"seller {agent.id!r} bound twice in one action")
        partial[agent] = target
    return joint_action(mechanism.network, partial)


def cached_update(
    mechanism: Mechanism, action: JointAction, stats: CheckStats | None = None
) -> Mechanism:
    """Apply an action, reusing the result for repeated actions on the same
    immutable mechanism instance."""
    cache = mechanism.__dict__.setdefault("_updates", {})
    result = cache.get(action)
    if result is None:
        result = apply_joint_action(mechanism, action)
        cache[action] = result
        if stats is not None:
            stats.states_explored += 1
    return result


def _validate_query(query: CheckQuery) -> Formula:
    mech = query.mechanism
    if query.at not in set(mech.network.agents()):
        raise UnknownAgentError(f"{query.at.id!r} is not an agent of the mechanism")
    body = desugar(query.formula)
    missing = names_of(body) - set(mech.network.names)
    if missing:
        raise UnknownNominalError(
            "formula uses names absent from the mechanism: "
            + ", ".join(sorted(missing))
        )
    return body


def check(query: CheckQuery, stats: CheckStats | None = None) -> bool:
    """Truth of a coalition-free formula at an agent of a mechanism."""
    body = _validate_query(query)
    if contains_coalition(body):
        raise CoalitionOperatorError(
            "formula contains coalition operators; use check_strategic"
        )
    if stats is not None:
        stats.agents = len(query.mechanism.network.agents())
    return _eval(query.mechanism, query.at, body, stats)


def check_strategic(query: CheckQuery, stats: CheckStats | None = None) -> bool:
    """Truth of a formula that may contain coalition operators."""
    body = _validate_query(query)
    if stats is not None:
        stats.agents = len(query.mechanism.network.agents())
    return _eval(query.mechanism, query.at, body, stats)


def _eval(m: Mechanism, at: AgentId, node, stats) -> bool:
    kind = type(node)
    if kind is Nominal:
        return resolve_name(m, node.name) == at
    if kind is Not:
        return not _eval(m, at, node.child, stats)
    if kind is And:
        return _eval(m, at, node.left, stats) and _eval(m, at, node.right, stats)
    if kind is Box:
        return all(
            _eval(m, b, node.child, stats) for b in m.network.friends_of(at)
        )
    if kind is Heart:
        alloc = auction.evaluate(m)
        who = at if node.target is SELF else resolve_name(m, node.target)
        return alloc.placement[who] == 1
    if kind is LinearGeq:
        alloc = auction.evaluate(m)
        total = 0
        for coeff, term in node.terms:
            who = at if term.subject is SELF else resolve_name(m, term.subject)
            total += coeff * alloc.utility[who]
        return total >= node.bound
    if kind is Diffuse:
        action = action_from_bindings(m, node.bindings)
        if not action_precondition(m, action):
            return True
        return _eval(cached_update(m, action, stats), at, node.child, stats)
    if kind is CoalitionBox:
        return _eval_coalition(m, at, node, stats)
    raise TypeError(f"cannot evaluate node {node!r}")


def _eval_coalition(m: Mechanism, at: AgentId, node, stats) -> bool:
    """For every feasible coalition choice there is a counter-choice of the
    remaining sellers whose combined action realises the body."""
    net = m.network
    members: set[AgentId] = set()
    for nominal in node.coalition:
        agent = resolve_name(m, nominal)
        if agent.kind != SELLER:
            raise ActionError(f"coalition member {nominal!r} does not name a seller")
        members.add(agent)
    coalition = sorted(members)
    others = [s for s in sorted(net.sellers) if s not in members]
    choices: list[object] = [net.canonical_name(b) for b in net.buyers]
    choices.append(SKIP)

    for picked in itertools.product(choices, repeat=len(coalition)):
        c_action = joint_action(net, dict(zip(coalition, picked)))
        if not action_precondition(m, c_action):
            continue  # infeasible coalition choice: the implication is vacuous
        answered = False
        for counter in itertools.product(choices, repeat=len(others)):
            assignment = dict(zip(coalition, picked))
            assignment.update(zip(others, counter))
            full = joint_action(net, assignment)
            if not action_precondition(m, full):
                continue
            if _eval(cached_update(m, full, stats), at, node.child, stats):
                answered = True
                break
        if not answered:
            return False
    return True
