"""Cross-check of the k'-reduction behind keune_tate_rank against PARI, on K = Q(sqrt delta, sqrt -3)."""

import importlib.util
from pathlib import Path

import pytest

pytest.importorskip("cypari2")

from wildtame.galmod import STANDARD_CHI, coinvariants, reduce_mod, tate_twist  # noqa: E402
from wildtame.kernelctl import a_prime, keune_tate_rank, kprime_radicand, delta_set  # noqa: E402
from wildtame.nfengine.records import ClassGroupRecord, NumberFieldDesc  # noqa: E402

TOOL = Path(__file__).resolve().parents[1] / "tools" / "gen_records.py"


@pytest.fixture(scope="module")
def gen():
    spec = importlib.util.spec_from_file_location("gen_records", TOOL)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def _sample():
    named = [717, 42, 4227, 4974, -11217]
    nontrivial = [d for d in delta_set(1, 3000) if not a_prime(kprime_radicand(d)).is_trivial()]
    return named + [d for d in nontrivial if d not in named][:5]


def twisted_delta_coinvariants(gen, delta):
    pari = gen.pari
    nf0 = pari.nfinit(pari(f"y^2 - ({delta})"))
    rnf, R, a, b = pari("wt_next")(nf0, pari("x^2 + 3"))
    bnf = pari.bnfinit(pari.substpol(R, pari("x"), pari("y")), 1)
    L = gen.Level(bnf)
    w = pari("wt_toR")(pari.rnfeltreltoabs(rnf, pari("x")), a, R)
    s = pari("wt_toR")(pari.rnfeltup(rnf, pari("y")), a, R)
    tau = pari("wt_findaut")(bnf, [s], [[w, -w]])
    rec = ClassGroupRecord(NumberFieldDesc("K", (1, 0, 1)), L.A, {"delta": L.action(tau)}, None, "ingested pari")
    M = tate_twist(reduce_mod(rec.module(["delta"]), 3), 1, STANDARD_CHI)
    return coinvariants(M, ["delta"])[0]


@pytest.mark.parametrize("delta", _sample())
def test_keune_tate_reduction(gen, delta):
    C = twisted_delta_coinvariants(gen, delta)
    A = a_prime(kprime_radicand(delta))
    assert C.p_rank(3) == A.p_rank(3)
    assert keune_tate_rank(delta) == C.p_rank(3) + 1


def test_minus_11217_count(gen):
    # the coinvariant group itself has order 3 here
    assert twisted_delta_coinvariants(gen, -11217).order == 3
