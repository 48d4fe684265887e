"""Reduction gadgets against their brute-force oracles."""

import random

import pytest

from damcheck import (
    CnfInstance,
    QbfInstance,
    check,
    check_strategic,
    expressivity_pair,
    gen_qbf_gadget,
    gen_sat_gadget,
    qbf_oracle,
    read_dimacs,
    read_qdimacs,
    sat_oracle,
    strategy_exists,
)
from damcheck.analysis import StrategyQuery
from damcheck.checker import CheckQuery
from damcheck.errors import MechanismError, OracleLimitError
from damcheck.gadgets import (
    EXISTS,
    FORALL,
    PAnd,
    PConst,
    PIff,
    PImplies,
    PNot,
    POr,
    PVar,
    prop_eval,
)
from damcheck.model import action_precondition, apply_joint_action, joint_action

WORKED_CNF = CnfInstance(num_vars=4, clauses=((1, 2, 3), (-1, 3, -4)))


def seller_of(mechanism):
    return mechanism.network.sellers[0]


# --- oracles -----------------------------------------------------------------------


def test_sat_oracle_basics():
    assert sat_oracle(CnfInstance(1, ((1, 1, 1),)))
    assert not sat_oracle(CnfInstance(1, ((1, 1, 1), (-1, -1, -1))))
    assert sat_oracle(CnfInstance(0, ()))
    assert sat_oracle(WORKED_CNF)
    with pytest.raises(OracleLimitError):
        sat_oracle(CnfInstance(21, ()))


def test_cnf_validation():
    with pytest.raises(MechanismError):
        CnfInstance(1, ((1, 2, 3),))  # variable out of range
    with pytest.raises(MechanismError):
        CnfInstance(1, ((1, 0, 1),))  # zero literal


def test_qbf_oracle_basics():
    p, q = PVar(1), PVar(2)
    assert qbf_oracle(QbfInstance((EXISTS,), PVar(1)))
    assert not qbf_oracle(QbfInstance((FORALL,), PVar(1)))
    assert qbf_oracle(QbfInstance((EXISTS, FORALL), POr(p, q)))
    assert qbf_oracle(QbfInstance((FORALL, EXISTS), PIff(p, q)))
    assert not qbf_oracle(QbfInstance((FORALL, EXISTS), PAnd(p, PNot(p))))
    with pytest.raises(MechanismError):
        QbfInstance((EXISTS,), PVar(2))  # free variable


def test_prop_eval_operators():
    env = {1: True, 2: False}
    assert prop_eval(PImplies(PVar(2), PVar(1)), env)
    assert not prop_eval(PImplies(PVar(1), PVar(2)), env)
    assert prop_eval(PConst(True), env)


# --- the 3-SAT gadget -----------------------------------------------------------------


def test_sat_gadget_shape_matches_layer_counts():
    mech, goal = gen_sat_gadget(WORKED_CNF)
    k, n = 2, 4
    assert len(mech.network.agents()) == 1 + 4 * k + 5 * n
    rng = random.Random(5)
    for _ in range(10):
        nv = rng.randint(1, 4)
        nc = rng.randint(1, 4)
        clauses = tuple(
            tuple(rng.choice([-1, 1]) * rng.randint(1, nv) for _ in range(3))
            for _ in range(nc)
        )
        m, _ = gen_sat_gadget(CnfInstance(nv, clauses))
        assert len(m.network.agents()) == 1 + 4 * nc + 5 * nv


def test_sat_gadget_worked_instance_and_known_witness():
    mech, goal = gen_sat_gadget(WORKED_CNF)
    outcome = strategy_exists(StrategyQuery(mech, goal))
    assert outcome.found
    # replay the returned witness independently
    state = mech
    for action in outcome.witness:
        assert action_precondition(state, action)
        state = apply_joint_action(state, action)
    assert check(CheckQuery(state, seller_of(state), goal))

    # the four-step referral chain that sets atom 3 true also works
    state = mech
    for target in ("beta1", "gamma1_3_3", "delta3", "epsilon3_1"):
        action = joint_action(state.network, {"s": target})
        assert action_precondition(state, action)
        state = apply_joint_action(state, action)
    assert check(CheckQuery(state, seller_of(state), goal))


def test_generated_goal_survives_print_parse_roundtrip():
    from damcheck import format_formula, parse_formula

    _, goal = gen_sat_gadget(WORKED_CNF)
    assert parse_formula(format_formula(goal)) == goal
    _, form = gen_qbf_gadget(QbfInstance((FORALL, EXISTS), PIff(PVar(1), PVar(2))))
    assert parse_formula(format_formula(form)) == form


def test_sat_gadget_unsatisfiable_padded_contradiction():
    instance = CnfInstance(1, ((1, 1, 1), (-1, -1, -1)))
    assert not sat_oracle(instance)
    mech, goal = gen_sat_gadget(instance)
    assert not strategy_exists(StrategyQuery(mech, goal)).found


def test_sat_gadget_oracle_equivalence_small_random():
    rng = random.Random(99)
    for _ in range(12):
        nv = rng.randint(1, 3)
        nc = rng.randint(1, 3)
        clauses = tuple(
            tuple(rng.choice([-1, 1]) * rng.randint(1, nv) for _ in range(3))
            for _ in range(nc)
        )
        instance = CnfInstance(nv, clauses)
        mech, goal = gen_sat_gadget(instance)
        assert strategy_exists(StrategyQuery(mech, goal)).found == sat_oracle(instance)


# --- the QBF gadget ---------------------------------------------------------------------


def test_qbf_gadget_shape_and_simple_instances():
    mech, form = gen_qbf_gadget(QbfInstance((EXISTS,), PVar(1)))
    assert len(mech.network.agents()) == 1 + 4 * 1
    assert check_strategic(CheckQuery(mech, seller_of(mech), form))

    mech, form = gen_qbf_gadget(QbfInstance((FORALL,), PVar(1)))
    assert not check_strategic(CheckQuery(mech, seller_of(mech), form))

    mech, form = gen_qbf_gadget(
        QbfInstance((FORALL, EXISTS), PIff(PVar(1), PVar(2)))
    )
    assert check_strategic(CheckQuery(mech, seller_of(mech), form))

    mech, form = gen_qbf_gadget(
        QbfInstance((EXISTS, FORALL), PIff(PVar(1), PVar(2)))
    )
    assert not check_strategic(CheckQuery(mech, seller_of(mech), form))


def test_qbf_gadget_oracle_equivalence_random():
    rng = random.Random(7)

    def random_prop(depth, n):
        if depth == 0 or rng.random() < 0.3:
            return PVar(rng.randint(1, n))
        ctor = rng.choice([PAnd, POr, PImplies, PIff])
        if rng.random() < 0.25:
            return PNot(random_prop(depth - 1, n))
        return ctor(random_prop(depth - 1, n), random_prop(depth - 1, n))

    for _ in range(15):
        n = rng.randint(1, 2)
        prefix = tuple(rng.choice([FORALL, EXISTS]) for _ in range(n))
        instance = QbfInstance(prefix, random_prop(2, n))
        mech, form = gen_qbf_gadget(instance)
        got = check_strategic(CheckQuery(mech, seller_of(mech), form))
        assert got == qbf_oracle(instance)


# --- the expressivity pair ---------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3])
def test_expressivity_pair_tells_models_apart(n):
    m1, m2, form = expressivity_pair(n)
    assert not check_strategic(CheckQuery(m1, seller_of(m1), form))
    assert check_strategic(CheckQuery(m2, seller_of(m2), form))


def test_expressivity_pair_leaf_budgets_zero_and_valid():
    m1, m2, _ = expressivity_pair(2)
    for mech in (m1, m2):
        net = mech.network
        for b in net.buyers:
            assert net.budget[b] == 0 and net.valuation[b] == 0


# --- file formats -----------------------------------------------------------------------


def test_read_dimacs_with_comments_and_padding():
    text = """c sample instance
p cnf 4 2
1 2 3 0
-1 3
-4 0
"""
    instance = read_dimacs(text)
    assert instance == WORKED_CNF
    unit = read_dimacs("p cnf 1 1\n1 0\n")
    assert unit.clauses == ((1, 1, 1),)
    with pytest.raises(MechanismError):
        read_dimacs("p cnf 4 1\n1 2 3 4 0\n")
    with pytest.raises(MechanismError):
        read_dimacs("1 0\n")  # missing header


def test_read_qdimacs_renumbers_by_prefix_order():
    text = """c toy
p cnf 2 2
e 2 0
a 1 0
2 0
-1 2 0
"""
    instance = read_qdimacs(text)
    assert instance.prefix == (EXISTS, FORALL)
    # old variable 2 is now p1 (existential), old 1 is p2 (universal)
    assert qbf_oracle(instance) == qbf_oracle(
        QbfInstance((EXISTS, FORALL), PAnd(PVar(1), POr(PNot(PVar(2)), PVar(1))))
    )


def test_read_qdimacs_rejects_free_variables():
    with pytest.raises(MechanismError):
        read_qdimacs("p cnf 2 1\ne 1 0\n1 2 0\n")


def test_readers_reject_garbage_tokens():
    with pytest.raises(MechanismError):
        read_dimacs("p cnf 2 1\n1 two 0\n")
    with pytest.raises(MechanismError):
        read_qdimacs("p cnf 1 1\ne x 0\n1 0\n")
    with pytest.raises(MechanismError):
        read_qdimacs("p cnf 2 2\ne 1 0\n1 0\na 2 0\n-2 0\n")  # prefix after matrix
