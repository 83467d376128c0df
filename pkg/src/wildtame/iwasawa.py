"""Cyclotomic Z_3-towers: stabilization, finite-level X', and Psi.

A :class:`TowerData` holds the A'-records of the layers k_0, ..., k_n of the
cyclotomic Z_3-extension of a base field, linked by norm maps, plus (when
available) a record ``XG`` giving the Gamma-coinvariants of X' with its map
to A'_{k_0} directly.  Psi(k) is the kernel of (X')_Gamma -> A'_k.

Two routes to (X')_Gamma:

* from the tower, once the norms A'_{n+1} -> A'_n become isomorphisms;
* from an ``XG`` record (computed externally via ray class groups of k of
  growing 3-power conductor).

When both are present they must agree.  Without either, only the level-n
lower bound ker((A'_n)_Gamma -> A'_0) is available, which is a quotient of
Psi: a nonzero bound proves Psi != 0 but a zero bound proves nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .exactalg import (
    FiniteAbelianGroup,
    GroupHom,
    hom_kernel,
    identity_hom,
    iso_type_equal,
    mod_n,
)
from .galmod import (
    CyclotomicCharacterTable,
    FiniteGaloisModule,
    STANDARD_CHI,
    coinvariants,
    eigenspace,
    reduce_mod,
    tate_twist,
)
from .nfengine.labels import tower_label, xg_label
from .nfengine.records import ClassGroupRecord, RecordError, min_assurance


class NotStabilizedError(ValueError):
    def __init__(self, msg: str, lower_bound: "PsiResult | None" = None):
        super().__init__(msg)
        self.lower_bound = lower_bound


class UnsupportedRamificationError(ValueError):
    pass


class TowerInvariantError(AssertionError):
    """Two computations that must agree did not."""


@dataclass
class TowerData:
    base: str
    records: list[ClassGroupRecord]
    ramified: bool = True  # n_0 = 0: every 3-adic prime totally ramified in k_inf/k
    xg: ClassGroupRecord | None = None
    primes_above_p: int | None = None
    totally_real: bool | None = None

    def __post_init__(self):
        if not self.records:
            raise RecordError("a tower needs at least its level-0 record")
        for n in range(1, len(self.records)):
            rec, below = self.records[n], self.records[n - 1]
            if rec.norm_to is None or rec.norm_to[0] != below.label:
                raise RecordError(f"level {n} ({rec.label}) has no norm map to {below.label}")
            rec.validate_norm(below)
        if self.xg is not None:
            self.xg.norm_hom(self.records[0])

    @property
    def n_max(self) -> int:
        return len(self.records) - 1

    def group(self, n: int) -> FiniteAbelianGroup:
        return self.records[n].s_class_group

    def gamma(self, n: int) -> GroupHom:
        rec = self.records[n]
        G = rec.s_class_group
        if "gamma" in rec.galois_actions:
            return GroupHom(G, G, rec.galois_actions["gamma"])
        if n == 0 or G.is_trivial():
            return identity_hom(G)
        raise RecordError(f"{rec.label}: no gamma action")

    def norm(self, n: int, m: int = 0) -> GroupHom:
        """Composite norm A'_n -> A'_m."""
        f = identity_hom(self.group(n))
        for k in range(n, m, -1):
            f = f.compose(self.records[k].norm_hom(self.records[k - 1]))
        return f

    @property
    def assurance(self) -> str:
        recs = self.records + ([self.xg] if self.xg is not None else [])
        return min_assurance(*(r.assurance for r in recs))


def load_tower(source, d: int, max_level: int = 1, **flags) -> TowerData | None:
    """Assemble the tower of Q(sqrt d) from a record source (``get(label)``)."""
    recs = []
    for n in range(max_level + 1):
        r = source.get(tower_label(d, n))
        if r is None:
            break
        recs.append(r)
    if not recs:
        return None
    return TowerData(f"Q_sqrt{d}", recs, xg=source.get(xg_label(d)), **flags)


@dataclass
class PsiResult:
    group: FiniteAbelianGroup
    level: str  # "tower level n", "ray class" or "lower bound level n"
    assurance: str
    exact: bool = True
    coinvariants: FiniteAbelianGroup | None = field(default=None, repr=False)
    to_base: GroupHom | None = field(default=None, repr=False)

    def __post_init__(self):
        if any(_not_3power(d) for d in self.group.invariant_factors):
            raise ValueError(f"Psi must be a 3-group, got {self.group}")


def _not_3power(d: int) -> bool:
    while d % 3 == 0:
        d //= 3
    return d != 1


def detect_stabilization(tower: TowerData) -> int | None:
    """Smallest n with the norm A'_{n+1} -> A'_n an isomorphism, else None."""
    if all(tower.group(n).is_trivial() for n in range(tower.n_max + 1)):
        return 0
    for n in range(tower.n_max):
        N = tower.records[n + 1].norm_hom(tower.records[n])
        if N.is_isomorphism():
            return n
    return None


def x_prime_finite_level(tower: TowerData, n_stab: int | None) -> FiniteGaloisModule:
    if n_stab is None or n_stab > tower.n_max:
        raise NotStabilizedError(f"{tower.base}: not stabilized at n_max = {tower.n_max}")
    rec = tower.records[n_stab]
    G = rec.s_class_group
    actors = {"gamma": tower.gamma(n_stab)}
    if "delta" in rec.galois_actions:
        actors["delta"] = GroupHom(G, G, rec.galois_actions["delta"])
    return FiniteGaloisModule(G, actors)


def _induced(proj_target: FiniteAbelianGroup, f: GroupHom) -> GroupHom:
    """Map from a quotient Q of f.source (given by Q.from_invariant lifts) through f."""
    rows = [list(f(lift)) for lift in (proj_target.from_invariant or [])]
    return GroupHom(proj_target, f.target, rows)


def _gamma_coinvariants_to_base(tower: TowerData, n: int) -> tuple[FiniteAbelianGroup, GroupHom]:
    M = FiniteGaloisModule(tower.group(n), {"gamma": tower.gamma(n)})
    Q, _ = coinvariants(M, ["gamma"])
    return Q, _induced(Q, tower.norm(n, 0))


def psi_lower_bound(tower: TowerData, n: int | None = None) -> PsiResult:
    """ker((A'_n)_Gamma -> A'_0); a quotient of Psi when the tower is ramified."""
    n = tower.n_max if n is None else n
    Q, f = _gamma_coinvariants_to_base(tower, n)
    K, _ = hom_kernel(f)
    return PsiResult(K, f"lower bound level {n}", tower.assurance, exact=False, coinvariants=Q, to_base=f)


def one_prime_shortcut(tower: TowerData) -> bool:
    """True when there is a single prime above 3 in k_inf, which forces Psi = 0."""
    return bool(tower.ramified and tower.primes_above_p == 1)


def psi_infinity_vanishes(tower: TowerData) -> bool | None:
    """Psi(k_inf) = 0 by the one-prime rule or, for totally real k, Greenberg's conjecture."""
    if one_prime_shortcut(tower) or tower.totally_real:
        return True
    return None


def _check_surjective(f: GroupHom, what: str) -> None:
    if not f.is_surjective():
        raise TowerInvariantError(f"{what}: (X')_Gamma -> A'_0 is not surjective")


def psi(tower: TowerData, prefer: str = "tower") -> PsiResult:
    if not tower.ramified:
        raise UnsupportedRamificationError("n0 > 0 unsupported")
    results = []
    n = detect_stabilization(tower)
    if n is not None:
        Q, f = _gamma_coinvariants_to_base(tower, n)
        _check_surjective(f, f"{tower.base} level {n}")
        K, _ = hom_kernel(f)
        results.append(PsiResult(K, f"tower level {n}", min_assurance(*(r.assurance for r in tower.records)),
                                 coinvariants=Q, to_base=f))
    if tower.xg is not None:
        f = tower.xg.norm_hom(tower.records[0])
        _check_surjective(f, tower.xg.label)
        K, _ = hom_kernel(f)
        xg = PsiResult(K, "ray class", min_assurance(tower.xg.assurance, tower.records[0].assurance),
                       coinvariants=f.source, to_base=f)
        lb = psi_lower_bound(tower)
        if lb.group.order > K.order or lb.coinvariants.order > f.source.order:
            raise TowerInvariantError(f"{tower.base}: level-{tower.n_max} data exceed the ray-class X'_Gamma")
        results.append(xg)
    if len(results) == 2 and not iso_type_equal(results[0].group, results[1].group):
        raise TowerInvariantError(f"{tower.base}: Psi from the tower ({results[0].group}) and from "
                                  f"ray classes ({results[1].group}) differ")
    if results:
        res = results[0] if prefer == "tower" or len(results) == 1 else results[1]
    elif one_prime_shortcut(tower):
        res = PsiResult(FiniteAbelianGroup(()), "one prime above 3", tower.assurance)
    else:
        raise NotStabilizedError(f"{tower.base}: not stabilized at n_max = {tower.n_max}", psi_lower_bound(tower))
    if one_prime_shortcut(tower) and not res.group.is_trivial():
        raise TowerInvariantError(f"{tower.base}: one prime above 3 but Psi = {res.group}")
    if res.coinvariants is not None and res.group.order * tower.group(0).order != res.coinvariants.order:
        raise TowerInvariantError(f"{tower.base}: |Psi| |A'_0| != |(X')_Gamma|")
    return res


def psi_twisted_delta(kprime_tower: TowerData | None = None, j: int = 1,
                      psi_module: FiniteGaloisModule | None = None) -> FiniteAbelianGroup:
    """Psi(K)(j)^Delta for K = k(mu_3), Delta = Gal(K/k) of order 2.

    With the Delta-module Psi(K) given, this is its omega^{-j}-eigenspace,
    omega(tau) = -1.  For quadratic k and odd j it is Psi(k'), computed from
    the k'-tower.
    """
    if psi_module is not None:
        return eigenspace(psi_module, "delta", 2, (-1) ** j).underlying
    if kprime_tower is None:
        raise ValueError("need either the k'-tower or the Delta-module Psi(K)")
    if j % 2 == 0:
        raise ValueError("even twists need Psi(K) with its Delta-action")
    return psi(kprime_tower).group


def kernel_mod(f: GroupHom, q: int) -> FiniteAbelianGroup:
    """Kernel of the induced map G/q -> H/q."""
    Gq, _ = mod_n(f.source, q)
    Hq, pH = mod_n(f.target, q)
    g = _induced(Gq, f.compose(pH))
    return hom_kernel(g)[0]


def criterion_kernel_m1(kprime_tower: TowerData, j: int = 1) -> FiniteAbelianGroup:
    """ker((X'/3(j))_G -> (A'_K/3(j))_{Gal(K/k)}) at m = 1, via the k'-tower.

    Mod 3 the cyclotomic character is trivial on Gamma and is omega on Delta,
    so for odd j the twisted Delta-coinvariants pick out the omega^{-1}-part,
    which is the k'-part: the kernel is that of (X'_{k'})_Gamma/3 -> A'_{k'}/3.
    """
    if j % 2 == 0:
        raise ValueError("only odd j is supported by the k'-reduction")
    r = psi(kprime_tower)
    return kernel_mod(r.to_base, 3)


def criterion_kernel_module(X: FiniteGaloisModule, A: FiniteGaloisModule, norm: GroupHom, j: int,
                            chi: CyclotomicCharacterTable = STANDARD_CHI,
                            x_actors: Sequence[str] = ("gamma", "delta"),
                            a_actors: Sequence[str] = ("delta",)) -> FiniteAbelianGroup:
    """The same kernel computed directly from modules over K: twist, coinvariants, norm."""
    X3 = tate_twist(reduce_mod(X, 3), j, chi)
    A3 = tate_twist(reduce_mod(A.with_actors(list(a_actors)), 3), j, chi)
    QX, _ = coinvariants(X3, list(x_actors))
    QA, pA = coinvariants(A3, list(a_actors))
    rows = [list(pA(norm(lift))) for lift in QX.from_invariant or []]
    return hom_kernel(GroupHom(QX, QA, rows))[0]


__all__ = [
    "NotStabilizedError", "UnsupportedRamificationError", "TowerInvariantError", "TowerData", "PsiResult",
    "load_tower", "detect_stabilization", "x_prime_finite_level", "psi", "psi_lower_bound",
    "psi_twisted_delta", "criterion_kernel_m1", "criterion_kernel_module", "kernel_mod",
    "one_prime_shortcut", "psi_infinity_vanishes",
]
