"""Smoke test for the freedesc Python module.

Build first, e.g. `maturin develop -m crates/python/Cargo.toml`, then run
`python python/smoke_test.py`.
"""

import sys

import freedesc

LAMBERT = "forall x. ((the y. (Q(y)) = x) <-> forall z. (Q(z) <-> z = x))"


def main():
    for logic in ["pfl", "nfl", "pqfl", "nqfl", "nqflm"]:
        r = freedesc.prove(LAMBERT, logic=logic)
        assert r["verdict"] == "proved", (logic, r["verdict"])
        assert r["steps"] > 0

    r = freedesc.prove("b = b", logic="nfl")
    assert r["verdict"] == "refuted"
    assert r["model"]["assignment"]["b"] not in r["model"]["DE"]

    r = freedesc.sat("forall x. (a = the y. (F(x, y)))", logic="pqfl")
    assert r["verdict"] == "refuted"
    assert len(r["model"]["DE"]) == 1

    v = freedesc.oracle("a = a", logic="nfl", bound=2)
    assert v["verdict"] == "countermodel"
    v = freedesc.oracle("a = a", logic="pqfl", bound=3)
    assert v == {"verdict": "valid-up-to-bound", "bound": 3}

    assert freedesc.normalize("~(P(a) & ~Q(a))") == "P(a) -> Q(a)"

    try:
        freedesc.prove("E!(a)", logic="nqflm")
    except ValueError:
        pass
    else:
        raise AssertionError("E! accepted in nqflm")

    print("ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
