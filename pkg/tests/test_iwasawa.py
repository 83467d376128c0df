import pytest
from hypothesis import given, settings, strategies as st

from helpers import _rec, check_psi_level_independence, check_psi_zero_kills_criterion
from wildtame.exactalg import FiniteAbelianGroup, identity
from wildtame.galmod import FiniteGaloisModule
from wildtame.iwasawa import (
    NotStabilizedError,
    TowerInvariantError,
    TowerData,
    UnsupportedRamificationError,
    criterion_kernel_m1,
    detect_stabilization,
    psi,
    psi_lower_bound,
    psi_twisted_delta,
    x_prime_finite_level,
)
from wildtame.kernelctl import DataSources, kprime_radicand, delta_set

G = FiniteAbelianGroup.from_orders
SRC = DataSources()


def trivial_tower(levels=3, **kw):
    T = G([])
    recs = [_rec("T_L0", T, [])]
    recs += [_rec(f"T_L{n}", T, [], (f"T_L{n - 1}", [])) for n in range(1, levels)]
    return TowerData("T", recs, **kw)


def constant_tower(orders=(3, 9), levels=3):
    A = G(list(orders))
    I = identity(A.rank)
    recs = [_rec("T_L0", A, I)] + [_rec(f"T_L{n}", A, I, (f"T_L{n - 1}", I)) for n in range(1, levels)]
    return TowerData("T", recs)


def test_stabilization_trivial():
    assert detect_stabilization(trivial_tower()) == 0


def test_stabilization_constant():
    T = constant_tower()
    assert detect_stabilization(T) == 0
    X = x_prime_finite_level(T, 0)
    assert X.underlying.invariant_factors == (3, 9)
    assert X.action("gamma").equals(FiniteGaloisModule.trivial_action(X.underlying, ["gamma"]).action("gamma"))
    assert psi(T).group.is_trivial()


def test_minus_14_not_stable_at_zero():
    T = SRC.tower(-14)
    assert T.group(0).is_trivial() and not T.group(1).is_trivial()
    assert detect_stabilization(T) is None
    with pytest.raises(NotStabilizedError):
        x_prime_finite_level(T, None)


def test_psi_minus_14():
    r = psi(SRC.tower(-14))
    assert r.group.invariant_factors == (3,)
    assert not psi_lower_bound(SRC.tower(-14)).group.is_trivial()


def test_psi_minus_239():
    T = SRC.tower(-239)
    assert T.primes_above_p == 2
    assert psi(T).group.is_trivial()


def test_psi_sources_agree_on_3739():
    T = SRC.tower(3739)
    assert psi(T, prefer="tower").group == psi(T, prefer="ray").group


def test_one_prime_shortcut():
    T = trivial_tower(levels=1, primes_above_p=1)
    T.xg = None
    r = psi(T)
    assert r.group.is_trivial()


def test_three_splits_in_every_kprime():
    # delta/3 = 2 mod 3, so -delta/3 = 1 mod 3 and the shortcut never applies in the scan
    for delta in delta_set(1, 5000):
        assert SRC.tower(kprime_radicand(delta)).primes_above_p == 2, delta


def test_shortcut_contradiction_detected():
    # A'_0 = 0 and A'_1 = A'_2 = Z/3 give Psi = Z/3, impossible with one prime above 3
    Z, A = G([]), G([3])
    recs = [_rec("T_L0", Z, []), _rec("T_L1", A, [[1]], ("T_L0", [[]])), _rec("T_L2", A, [[1]], ("T_L1", [[1]]))]
    with pytest.raises(TowerInvariantError):
        psi(TowerData("T", recs, primes_above_p=1))
    assert psi(TowerData("T", recs)).group.invariant_factors == (3,)


def test_unramified_rejected():
    with pytest.raises(UnsupportedRamificationError, match="n0 > 0 unsupported"):
        psi(trivial_tower(ramified=False))


def test_twisted_delta():
    assert psi_twisted_delta(SRC.tower(-14), 1) == psi(SRC.tower(-14)).group
    M = FiniteGaloisModule.trivial_action(G([]), ["delta"])
    for j in range(4):
        assert psi_twisted_delta(psi_module=M, j=j).is_trivial()
    N = FiniteGaloisModule(G([3, 3]), {"delta": [[1, 0], [0, 2]]})
    orders = [psi_twisted_delta(psi_module=N, j=j).order for j in (0, 1)]
    assert orders[0] * orders[1] == 9


def test_criterion_kernel_examples():
    assert criterion_kernel_m1(SRC.tower(-239)).is_trivial()
    k = criterion_kernel_m1(SRC.tower(-14))
    # A'_{k'} = 0, so the kernel is all of (X')_Gamma / 3
    assert k.invariant_factors == (3,)
    assert criterion_kernel_m1(trivial_tower()).is_trivial()


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_psi_level_independence(rnd):
    check_psi_level_independence(rnd)


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_psi_zero_kills_criterion(rnd):
    check_psi_zero_kills_criterion(rnd)
