"""Auction rules: placement, payments, and utilities for a network state.

Ships the single-item multiple-unit first-price rule ("smf") behind a
registry keyed by rule name, so mechanisms can plug in other evaluators."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

from .errors import NotASellerError, UnknownRuleError
from .model import BUYER, SELLER, AgentId, MarketNetwork, Mechanism


@dataclass(frozen=True)
class AllocationResult:
    """Placement bit per agent, payment per buyer, utility per agent."""

    placement: Mapping[AgentId, int]
    payment: Mapping[AgentId, Fraction]
    utility: Mapping[AgentId, Fraction]


RuleFn = Callable[[MarketNetwork], AllocationResult]

_RULES: dict[str, RuleFn] = {}


def register_rule(name: str, evaluator: RuleFn) -> None:
    _RULES[name] = evaluator


def has_rule(name: str) -> bool:
    return name in _RULES


def get_rule(name: str) -> RuleFn:
    try:
        return _RULES[name]
    except KeyError:
        raise UnknownRuleError(f"no auction rule registered as {name!r}") from None


def ranked_bidders(net: MarketNetwork, sell: AgentId) -> list[AgentId]:
    """The seller's buyer-neighbours, best valuation first, ties by buyer id."""
    if sell.kind != SELLER:
        raise NotASellerError(f"{sell.id!r} is not a seller")
    nbrs = [a for a in net.friends_of(sell) if a.kind == BUYER]
    return sorted(nbrs, key=lambda b: (-net.valuation[b], b.id))


def smf_evaluate(net: MarketNetwork) -> AllocationResult:
    """First-price allocation: sellers are processed in ascending id order;
    each sells to the best-ranked bidder not already holding an item, keeping
    her own item when none remains. Winners pay their valuation."""
    placement: dict[AgentId, int] = {a: 0 for a in net.agents()}
    sold_to: dict[AgentId, AgentId] = {}
    allocated: set[AgentId] = set()
    for sell in sorted(net.sellers, key=lambda s: s.id):
        refinement = [b for b in ranked_bidders(net, sell) if b not in allocated]
        if refinement:
            head = refinement[0]
            placement[head] = 1
            allocated.add(head)
            sold_to[sell] = head
        else:
            placement[sell] = 1

    payment = {
        b: net.valuation[b] if placement[b] else Fraction(0) for b in net.buyers
    }
    utility: dict[AgentId, Fraction] = {}
    for b in net.buyers:
        utility[b] = net.budget[b] - net.valuation[b] * placement[b]
    for sell in net.sellers:
        head = sold_to.get(sell)
        utility[sell] = net.budget[sell] + (
            net.valuation[head] if head is not None else Fraction(0)
        )
    return AllocationResult(placement=placement, payment=payment, utility=utility)


register_rule("smf", smf_evaluate)


def evaluate(mechanism: Mechanism) -> AllocationResult:
    """Allocation for the mechanism's current network, cached per instance.

    Mechanisms are immutable values, so the cache never goes stale; updates
    produce new instances with their own cache slot."""
    cached = mechanism.__dict__.get("_allocation")
    if cached is None:
        cached = get_rule(mechanism.rule)(mechanism.network)
        mechanism.__dict__["_allocation"] = cached
    return cached
