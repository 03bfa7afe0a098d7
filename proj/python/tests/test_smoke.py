import math

import pytest

import detergo


def test_thue_morse_values():
    vals = detergo.values("thue_morse", [0, 1, 2, 3])
    assert [round(v.real) for v in vals] == [1, -1, -1, 1]


def test_sup_norm_n4():
    r = detergo.sup_norm("thue_morse", 4, certified=True, tol=1e-6)
    assert r["lower"] == pytest.approx(16 / (3 * math.sqrt(3)), rel=1e-9)
    assert r["upper"] >= r["lower"]


def test_block_sum_matches_direct():
    tm = detergo.spec({"type": "qmult", "q": 2, "r": 2, "skeleton": {"period": [[0, 1]]}})
    x = 0.2718
    assert detergo.block_sum(tm, 6, x) == pytest.approx(detergo.weighted_sum(tm, 64, x), abs=1e-12)


def test_delta_fit():
    fit = detergo.delta_fit("thue_morse", [2**k for k in range(8, 14)])
    assert fit["slope"] == pytest.approx(math.log(3) / math.log(4), abs=0.05)


def test_resonance():
    r = detergo.resonance("thue_morse")
    assert r["alpha_hat"] == 0.0
    assert r["s"] == pytest.approx(4 / 3**0.75, rel=1e-6)


def test_rotation():
    assert detergo.diophantine_type("golden") == pytest.approx(1.0, abs=0.01)
    assert abs(detergo.birkhoff("thue_morse", "golden", 100000)) < 0.01
    assert abs(detergo.squares_average("thue_morse", "golden", 100000)) < 0.02


def test_errors():
    with pytest.raises(ValueError):
        detergo.values("no_such_sequence", [0])
    with pytest.raises(RuntimeError):
        detergo.run("expsum", "sup", "--seq", "thue_morse")


def test_cli_roundtrip():
    doc = detergo.run("cond", "report", "--seq", "thue_morse", "--horizon", "8")
    assert doc["result"]["I"] == []
