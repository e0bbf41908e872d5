"""Smoke test for the Python bindings.

Build first with `maturin develop -m crates/py/Cargo.toml` (or install the
wheel from `maturin build`), then run `python python/smoke_test.py`.
"""

import json

import pairwise_topk_py as pt


def main():
    inst = pt.PreferenceInstance.equal_gap(8, 0.75)
    assert inst.n == 8
    assert inst.ranking() == list(range(8))
    assert inst.true_best_k(3) == [0, 1, 2]
    assert pt.validate_sst(inst)["pass"]
    assert pt.validate_sti(inst)["pass"]

    oracle = pt.MatrixOracle(inst, seed=7)
    r = pt.tournament_k_select(oracle, k=2, epsilon=0.1, delta=0.1, seed=1)
    assert pt.is_eps_k_optimal(inst, r.selected, 0.1)["pass"], r
    assert r.comparisons == oracle.comparisons

    r = pt.seeks(pt.MatrixOracle(inst, seed=3), k=2, delta=0.1, seed=3)
    assert r.selected == [0, 1], r
    r = pt.seebs(pt.MatrixOracle(inst, seed=4), delta=0.1, seed=4)
    assert r.selected == [0], r

    thurstone = pt.PreferenceInstance.thurstone([0.1, 0.9, 0.4])
    assert thurstone.ranking() == [1, 2, 0]
    assert pt.validate_gamma(thurstone, 1.0)["pass"]

    doc = pt.parse_pwg("2\n1,Alpha\n2,Beta\n40,40,2\n30,1,2\n10,2,1\n")
    assert doc["labels"] == ["Alpha", "Beta"]
    assert abs(doc["p"][0][1] - 0.75) < 1e-12

    rows = pt.growth_table(0.1, 0.01, 1, [10, 100])
    assert abs(rows[0][1] - 4606.0) < 0.5

    config = {
        "instance": {"model": "equal_gap", "p_win": 1.0, "n": 4},
        "algorithm": "tks",
        "params": {"k": 1, "epsilon": 0.1, "delta": 0.1},
        "trials": 3,
        "master_seed": 1,
    }
    csv = pt.run_experiment(json.dumps(config), threads=2)
    lines = csv.strip().splitlines()
    assert len(lines) == 5 and lines[-1].startswith(",AGG,")

    try:
        pt.PreferenceInstance([[0.5, 0.7], [0.7, 0.5]])
    except ValueError:
        pass
    else:
        raise AssertionError("non-antisymmetric matrix accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
