"""Command-line interface: subcommands, exit codes, file round trips."""

import json

import pytest

from damcheck import load_mechanism, sat_oracle, save_mechanism
from damcheck.cli import main
from damcheck.gadgets import read_dimacs

from helpers import referral_chain, two_seller_market


@pytest.fixture()
def chain_path(tmp_path):
    path = tmp_path / "referral_chain.json"
    save_mechanism(referral_chain(), path)
    return str(path)


@pytest.fixture()
def market_path(tmp_path):
    path = tmp_path / "two_seller_market.json"
    save_mechanism(two_seller_market(), path)
    return str(path)


def test_shipped_samples_load_and_answer():
    from pathlib import Path

    base = Path(__file__).resolve().parent.parent / "samples"
    chain = base / "referral-chain.json"
    pair = base / "two-sellers.json"
    assert main(["check", "--model", str(chain), "--at", "a",
                 "--formula", "<sigma:alpha> wins(gamma)"]) == 0
    assert main(["ne", "--model", str(pair), "--profile", "s1:d,s2:c"]) == 1


def test_check_true_exit_zero(chain_path, capsys):
    rc = main(["check", "--model", chain_path, "--at", "a", "--formula", "ut[sigma]=7"])
    assert rc == 0
    assert capsys.readouterr().out.strip() == "true"


def test_check_false_exit_one(chain_path, capsys):
    rc = main(["check", "--model", chain_path, "--at", "a", "--formula", "ut[sigma]=8"])
    assert rc == 1
    assert capsys.readouterr().out.strip() == "false"


def test_check_formula_from_file(chain_path, tmp_path, capsys):
    spec = tmp_path / "query.txt"
    spec.write_text("<sigma:alpha> wins(gamma)\n", encoding="utf-8")
    rc = main(["check", "--model", chain_path, "--at", "a", "--formula", f"@{spec}"])
    assert rc == 0


def test_check_strategic_flag_and_json(chain_path, capsys):
    rc = main(
        ["check", "--model", chain_path, "--at", "a",
         "--formula", "<[sigma]> wins(gamma)", "--strategic", "--json"]
    )
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["result"] is True
    assert doc["stats"]["agents"] == 5
    assert "elapsed_ms" in doc["stats"]


def test_check_coalition_without_strategic_is_data_error(chain_path, capsys):
    rc = main(
        ["check", "--model", chain_path, "--at", "a", "--formula", "<[sigma]> true"]
    )
    assert rc == 2


def test_check_unknown_agent_and_missing_file(chain_path, capsys):
    assert main(["check", "--model", chain_path, "--at", "zz", "--formula", "true"]) == 2
    assert main(["check", "--model", "/nope.json", "--at", "a", "--formula", "true"]) == 2
    assert main(["check", "--model", chain_path, "--at", "a", "--formula", "wins("]) == 2


def test_strategy_witness_and_exit_codes(chain_path, capsys):
    rc = main(["strategy", "--model", chain_path, "--goal", "wins(gamma)"])
    assert rc == 0
    steps = json.loads(capsys.readouterr().out)
    assert steps == [{"s": "a"}] or steps == [{"s": "alpha"}]

    rc = main(["strategy", "--model", chain_path, "--goal", "wins(delta)", "--max-depth", "4"])
    assert rc == 1
    assert capsys.readouterr().out.strip() == "false"


def test_strategy_json_report(chain_path, capsys):
    rc = main(["strategy", "--model", chain_path, "--goal", "wins(gamma)", "--json"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["result"] is True
    assert doc["witness"] == [{"s": "alpha"}]
    assert doc["stats"]["states_explored"] >= 1


def test_ne_subcommand(market_path, capsys):
    rc = main(["ne", "--model", market_path, "--profile", "s1:d,s2:c"])
    assert rc == 1
    witness = json.loads(capsys.readouterr().out)
    assert witness["seller"] == "s1" and witness["target"] == "a"

    rc = main(["ne", "--model", market_path, "--profile", "s1:skip,s2:skip;s1:d"])
    assert rc in (0, 1)  # multi-step profiles parse and run


def test_ne_emit_formula(market_path, capsys):
    rc = main(["ne", "--model", market_path, "--profile", "s1:d,s2:c", "--emit-formula"])
    assert rc == 0
    text = capsys.readouterr().out
    assert "sigma1" in text and "<=" not in text  # desugared output
    from damcheck import parse_formula

    parse_formula(text)  # the emitted schema is valid concrete syntax


def test_translate_prints_formula(chain_path, capsys):
    rc = main(["translate", "--model", chain_path, "--formula", "<[sigma]> wins(gamma)"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "sigma:" in out  # unfolded into concrete actions


def test_gen_sat_roundtrip(tmp_path, capsys):
    cnf = tmp_path / "phi.cnf"
    cnf.write_text("p cnf 2 2\n1 2 0\n-1 -2 0\n", encoding="utf-8")
    model = tmp_path / "m.json"
    goal = tmp_path / "g.txt"
    rc = main(["gen", "sat", "--dimacs", str(cnf), "--out-model", str(model),
               "--out-goal", str(goal)])
    assert rc == 0
    load_mechanism(model)  # reloads without validation errors

    rc = main(["strategy", "--model", str(model), "--goal", f"@{goal}"])
    expected = sat_oracle(read_dimacs(cnf.read_text(encoding="utf-8")))
    assert (rc == 0) == expected


def test_gen_qbf_roundtrip(tmp_path, capsys):
    qdimacs = tmp_path / "psi.qdimacs"
    qdimacs.write_text("p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 -2 0\n", encoding="utf-8")
    model = tmp_path / "m.json"
    formula = tmp_path / "f.txt"
    rc = main(["gen", "qbf", "--qdimacs", str(qdimacs), "--out-model", str(model),
               "--out-formula", str(formula)])
    assert rc == 0
    load_mechanism(model)
    rc = main(["check", "--model", str(model), "--at", "s",
               "--formula", f"@{formula}", "--strategic"])
    assert rc == 0  # forall p exists q: (p or q) and (!p or !q) is true


def test_exit_code_contract_randomized(tmp_path, capsys):
    import random

    from damcheck import format_formula
    from damcheck.formula import desugar

    from helpers import random_formula, random_mechanism

    rng = random.Random(321)
    for index in range(25):
        mech = random_mechanism(rng)
        path = tmp_path / f"m{index}.json"
        save_mechanism(mech, path)
        anyone = rng.choice(mech.network.agents())
        form = format_formula(desugar(random_formula(rng, mech, depth=1)))
        rc = main(["check", "--model", str(path), "--at", anyone.id,
                   "--formula", form])
        out = capsys.readouterr().out.strip()
        assert (rc, out) in ((0, "true"), (1, "false"))
        # invalid inputs of three different kinds all exit 2
        assert main(["check", "--model", str(path), "--at", anyone.id,
                     "--formula", form + " &"]) == 2
        assert main(["check", "--model", str(path), "--at", "no_such_agent",
                     "--formula", form]) == 2
        assert main(["strategy", "--model", str(path) + ".missing",
                     "--goal", "true"]) == 2
        capsys.readouterr()


def test_gen_expressivity(tmp_path, capsys):
    out = tmp_path / "pair"
    rc = main(["gen", "expressivity", "--n", "2", "--out-dir", str(out)])
    assert rc == 0
    m1 = load_mechanism(out / "m1.json")
    m2 = load_mechanism(out / "m2.json")
    formula = (out / "formula.txt").read_text(encoding="utf-8").strip()
    assert main(["check", "--model", str(out / "m1.json"), "--at", "s",
                 "--formula", formula, "--strategic"]) == 1
    assert main(["check", "--model", str(out / "m2.json"), "--at", "s",
                 "--formula", formula, "--strategic"]) == 0
