"""Mechanism files: the on-disk JSON schema, loading, and saving.

Schema (rationals are integers or "p/q" strings; floats are rejected):

    { "sellers": [ {"id": str, "names": [str, ...], "budget": rat} ],
      "buyers":  [ {"id": str, "names": [str, ...], "budget": rat,
                    "valuation": rat, "incentives": {sellerId: rat, ...}} ],
      "edges":   [ [idA, idB], ... ],
      "rule":    "smf" }

Edges are undirected; duplicates and reversed pairs are rejected. Missing
incentive entries default to 0. Loading refuses invalid mechanisms."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .errors import MechanismError
from .model import (
    AgentId,
    MarketNetwork,
    Mechanism,
    buyer,
    seller,
    validate_mechanism,
)


def parse_rational(value: Any, where: str = "value") -> Fraction:
    """Exact rational from an int or a "p/q" / "p" string."""
    if isinstance(value, bool):
        raise MechanismError(f"{where}: booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise MechanismError(f"{where}: cannot parse rational {value!r}") from None
    raise MechanismError(
        f"{where}: rationals must be integers or 'p/q' strings, got {value!r}"
    )


def format_rational(value: Fraction) -> int | str:
    if value.denominator == 1:
        return int(value)
    return f"{value.numerator}/{value.denominator}"


def mechanism_from_dict(doc: dict) -> Mechanism:
    """Build and validate a Mechanism from the schema dictionary."""
    if not isinstance(doc, dict):
        raise MechanismError("mechanism document must be a JSON object")

    sellers: list[AgentId] = []
    buyers: list[AgentId] = []
    budget: dict[AgentId, Fraction] = {}
    valuation: dict[AgentId, Fraction] = {}
    incentive: dict[tuple[AgentId, AgentId], Fraction] = {}
    names: dict[str, AgentId] = {}

    def add_names(agent: AgentId, noms: Any) -> None:
        if not isinstance(noms, list) or not all(isinstance(n, str) for n in noms):
            raise MechanismError(f"names of {agent.id!r} must be a list of strings")
        for nom in noms:
            if nom in names:
                raise MechanismError(f"nominal {nom!r} names two agents")
            names[nom] = agent

    def agent_id_of(entry: Any, section: str) -> str:
        if not isinstance(entry, dict) or "id" not in entry:
            raise MechanismError(f"every {section} entry needs an 'id' field")
        return str(entry["id"])

    for entry in doc.get("sellers", []):
        agent = seller(agent_id_of(entry, "seller"))
        sellers.append(agent)
        budget[agent] = parse_rational(entry.get("budget", 0), f"budget of {agent.id}")
        add_names(agent, entry.get("names", []))

    seller_by_id = {s.id: s for s in sellers}
    for entry in doc.get("buyers", []):
        agent = buyer(agent_id_of(entry, "buyer"))
        buyers.append(agent)
        budget[agent] = parse_rational(entry.get("budget", 0), f"budget of {agent.id}")
        valuation[agent] = parse_rational(
            entry.get("valuation", 0), f"valuation of {agent.id}"
        )
        add_names(agent, entry.get("names", []))
        incentives = entry.get("incentives", {})
        if not isinstance(incentives, dict):
            raise MechanismError(f"incentives of {agent.id!r} must be an object")
        for sid, amount in incentives.items():
            sell = seller_by_id.get(str(sid))
            if sell is None:
                raise MechanismError(
                    f"incentives of {agent.id!r} mention unknown seller {sid!r}"
                )
            value = parse_rational(amount, f"incentive of ({agent.id}, {sid})")
            if value != 0:  # zero is the default; keep the map canonical
                incentive[(agent, sell)] = value

    by_id = {a.id: a for a in sellers + buyers}
    if len(by_id) != len(sellers) + len(buyers):
        raise MechanismError("duplicate agent ids")

    friends: dict[AgentId, frozenset[AgentId]] = {a: frozenset() for a in by_id.values()}
    seen_pairs: set[frozenset[AgentId]] = set()
    for pair in doc.get("edges", []):
        if not isinstance(pair, list) or len(pair) != 2:
            raise MechanismError(f"edge {pair!r} is not a two-element list")
        try:
            a, b = by_id[str(pair[0])], by_id[str(pair[1])]
        except KeyError as exc:
            raise MechanismError(f"edge {pair!r} mentions unknown agent {exc}") from None
        key = frozenset((a, b))
        if key in seen_pairs:
            raise MechanismError(f"duplicate or reversed edge {pair!r}")
        seen_pairs.add(key)
        friends[a] = friends[a] | {b}
        friends[b] = friends[b] | {a}

    mechanism = Mechanism(
        network=MarketNetwork(
            sellers=tuple(sellers),
            buyers=tuple(buyers),
            friends=friends,
            budget=budget,
            valuation=valuation,
            incentive=incentive,
            names=names,
        ),
        rule=str(doc.get("rule", "smf")),
    )
    violations = validate_mechanism(mechanism)
    if violations:
        raise MechanismError("invalid mechanism: " + "; ".join(violations))
    return mechanism


def mechanism_to_dict(mechanism: Mechanism) -> dict:
    net = mechanism.network
    names_of: dict[AgentId, list[str]] = {a: [] for a in net.agents()}
    for nom, agent in net.names.items():
        names_of[agent].append(nom)
    for noms in names_of.values():
        noms.sort()

    sellers = [
        {
            "id": s.id,
            "names": names_of[s],
            "budget": format_rational(net.budget[s]),
        }
        for s in net.sellers
    ]
    buyers = []
    for b in net.buyers:
        incentives = {
            s.id: format_rational(net.incentive_for(b, s))
            for s in net.sellers
            if net.incentive_for(b, s) != 0
        }
        buyers.append(
            {
                "id": b.id,
                "names": names_of[b],
                "budget": format_rational(net.budget[b]),
                "valuation": format_rational(net.valuation[b]),
                "incentives": incentives,
            }
        )
    edges = sorted(
        sorted((a.id, b.id)) for a, b in _undirected_edges(net)
    )
    return {
        "sellers": sellers,
        "buyers": buyers,
        "edges": [list(e) for e in edges],
        "rule": mechanism.rule,
    }


def _undirected_edges(net: MarketNetwork):
    seen = set()
    for agent, nbrs in net.friends.items():
        for other in nbrs:
            key = frozenset((agent, other))
            if key not in seen:
                seen.add(key)
                yield agent, other


def load_mechanism(path: str | Path) -> Mechanism:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise MechanismError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise MechanismError(f"{path} is not valid JSON: {exc}") from None
    return mechanism_from_dict(doc)


def save_mechanism(mechanism: Mechanism, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(mechanism_to_dict(mechanism), indent=2) + "\n", encoding="utf-8"
    )
