import logging
import shutil

import pytest
from sympy import Poly, discriminant, factorint, symbols

from wildtame.exactalg import FiniteAbelianGroup, sylow
from wildtame.kernelctl import wk_from_level_one
from wildtame.lvalues import is_fundamental
from wildtame.nfengine import (
    CacheStore,
    EngineError,
    RecordSource,
    bundled_records_dir,
    class_group_generic,
    layer_field,
)
from wildtame.nfengine.polys import coeffs_low_high, quadratic_order_poly
from wildtame.nfengine.records import (
    ClassGroupRecord,
    NumberFieldDesc,
    RecordError,
    format_record,
    ingest_record,
    parse_record,
)
from wildtame.quadclass import class_group, fundamental_discriminant

x = symbols("x")
BUNDLED = bundled_records_dir()


def quad_desc(D):
    return NumberFieldDesc(f"disc{D}", coeffs_low_high(quadratic_order_poly(D)))


def test_layer_zero_is_base():
    q = fundamental_discriminant(-14)
    assert layer_field(q, 0).coefficients == (14, 0, 1)


def test_layer_one_over_q():
    assert layer_field(None, 1).coefficients == (-1, -3, 0, 1)


def test_layer_one_over_minus14():
    f = layer_field(fundamental_discriminant(-14), 1)
    assert f.degree == 6
    d = int(discriminant(f.poly().as_expr(), x))
    # outside 2, 3, 7 only squared index primes may appear
    assert d != 0 and all(e % 2 == 0 for q, e in factorint(abs(d)).items() if q not in (2, 3, 7))
    assert f.poly().is_irreducible


def test_layer_one_field_discriminant():
    cypari2 = pytest.importorskip("cypari2")
    pari = cypari2.Pari()
    f = layer_field(fundamental_discriminant(-14), 1)
    dk = int(pari.nfdisc(pari.Pol(list(reversed(f.coefficients)))))
    assert set(factorint(abs(dk))) == {2, 3, 7}
    assert dk == -1152216576


def test_layer_level_guard():
    with pytest.raises(ValueError):
        layer_field(None, 2)


def test_engine_cubic_conductor_9():
    res = class_group_generic(layer_field(None, 1))
    assert res.class_group.is_trivial()
    assert res.assurance == "pinned"


def test_engine_minus_23():
    res = class_group_generic(quad_desc(-23))
    assert res.class_group.invariant_factors == (3,)


def test_engine_matches_forms_up_to_500():
    for D in range(-500, 501):
        if D in (0, 1) or not is_fundamental(D):
            continue
        res = class_group_generic(quad_desc(D))
        want = class_group(D).group
        assert res.class_group.invariant_factors == want.invariant_factors, D
        assert res.assurance == "pinned"
        assert sylow(res.s_class_group, 3) == sylow(class_group(D).s_class_group(3)[0], 3), D


def test_engine_disc_bound():
    with pytest.raises(EngineError, match="exceeds bound"):
        class_group_generic(quad_desc(-4 * 10 ** 6 - 4), max_disc=10 ** 6)


def test_engine_degree_guard():
    f = NumberFieldDesc("deg7", (2, 0, 0, 0, 0, 0, 0, 1))
    with pytest.raises(EngineError, match="degree"):
        class_group_generic(f)


# --- records -----------------------------------------------------------------


def _rec_text(group="3 3", actions=("delta 2 0 0 2", "gamma 1 0 0 1")):
    lines = ["WTREC 1", "field Q_sqrt-239_L0 2 239 0 1", f"group {group}"]
    lines += [f"action {a}" for a in actions]
    lines.append("provenance ingested test")
    return "\n".join(lines) + "\n"


def test_record_roundtrip(tmp_path):
    rec = ingest_record(BUNDLED / "Q_sqrt4227_mu9.wtrec")
    again = parse_record(format_record(rec))
    assert again == rec and format_record(again) == format_record(rec)
    assert rec.assurance == "ingested-trusted"


def test_ingest_4227_gives_wk():
    rec = ingest_record(BUNDLED / "Q_sqrt4227_mu9.wtrec")
    assert wk_from_level_one(rec).invariant_factors == (3, 3)
    rec = ingest_record(BUNDLED / "Q_sqrt4974_mu9.wtrec")
    assert wk_from_level_one(rec).invariant_factors == (9,)


def test_ingest_rejects_noncommuting(tmp_path):
    p = tmp_path / "bad.wtrec"
    p.write_text(_rec_text(actions=("delta 0 1 1 0", "gamma 1 1 0 1")))
    with pytest.raises(RecordError, match="commute"):
        ingest_record(p)


def test_ingest_empty_group(tmp_path):
    p = tmp_path / "empty.wtrec"
    p.write_text(_rec_text(group="", actions=()))
    rec = ingest_record(p)
    assert rec.s_class_group.is_trivial() and rec.kind == "ingested"


def test_ingest_rejects_non_3_factor(tmp_path):
    p = tmp_path / "bad.wtrec"
    p.write_text(_rec_text(group="5", actions=()))
    with pytest.raises(RecordError, match="power of 3"):
        ingest_record(p)


def test_bundled_norms_are_equivariant():
    src = RecordSource()
    for d in (-239, -14, 3739, -1409, -1658):
        up, dn = src.get(f"Q_sqrt{d}_L1"), src.get(f"Q_sqrt{d}_L0")
        up.validate_norm(dn)


# --- cache -------------------------------------------------------------------


def _computed(label="Q_sqrt-23_L0", prov="computed heuristic", group=(3,)):
    return ClassGroupRecord(NumberFieldDesc(label, (6, -1, 1)), FiniteAbelianGroup.from_orders(group),
                            {}, None, prov)


def test_cache_put_get(tmp_path):
    c = CacheStore(tmp_path)
    assert c.get("Q_sqrt-23_L0") is None
    rec = _computed()
    assert c.put(rec) == "stored"
    assert c.get("Q_sqrt-23_L0") == rec
    assert c.put(rec) == "already cached"
    assert c.labels() == ["Q_sqrt-23_L0"]
    assert c.get("Q_sqrt-23_L0", {"bound": 7}) is None


def test_cache_precedence(tmp_path):
    c = CacheStore(tmp_path)
    c.put(_computed())
    ing = _computed(prov="ingested oracle")
    assert c.put(ing) == "stored"
    assert c.put(_computed(prov="computed heuristic", group=(9,))) == "kept existing"
    pinned = _computed(prov="computed pinned")
    assert c.put(pinned) == "stored"
    assert c.put(ing) == "kept existing"
    assert c.get("Q_sqrt-23_L0") == pinned


def test_cache_corrupt_entry(tmp_path, caplog):
    c = CacheStore(tmp_path)
    c.put(_computed())
    for f in tmp_path.glob("*.wtrec"):
        f.write_text("WTREC 1\ngarbage\n")
    with caplog.at_level(logging.WARNING):
        assert c.get("Q_sqrt-23_L0") is None
    assert "corrupt" in caplog.text
    assert c.put(_computed()) == "stored"


def test_cache_clear(tmp_path):
    c = CacheStore(tmp_path)
    c.put(_computed())
    assert c.clear() == 1 and c.labels() == []


def test_source_prefers_higher_assurance(tmp_path):
    d = tmp_path / "data"
    d.mkdir()
    shutil.copy(BUNDLED / "Q_sqrt-239_L0.wtrec", d)
    c = CacheStore(tmp_path / "cache")
    rec = ingest_record(d / "Q_sqrt-239_L0.wtrec")
    pinned = ClassGroupRecord(rec.field, rec.s_class_group, rec.galois_actions, None, "computed pinned")
    c.put(pinned)
    assert RecordSource([d], c).get("Q_sqrt-239_L0").assurance == "pinned"
    assert RecordSource([d]).get("Q_sqrt-239_L0").assurance == "ingested-trusted"


def test_poly_helper():
    assert quadratic_order_poly(-23) == Poly(x ** 2 - x + 6, x)
