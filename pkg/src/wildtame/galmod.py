"""Finite Galois modules: commuting automorphisms of a finite abelian group.

Every actor is stored as a hom matrix on the invariant-factor generators
(row convention, see :mod:`wildtame.exactalg`).  Equivariance questions are
turned into integer congruence systems and settled by one SNF.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Mapping, Sequence

from .exactalg import (
    FiniteAbelianGroup,
    GroupHom,
    Matrix,
    Subquotient,
    group_from_relations,
    hom_kernel,
    identity,
    identity_hom,
    kernel_lattice,
    matmul,
    mod_n,
    relation_rows,
    solve_congruences,
    vecmat,
)


class EquivarianceError(ValueError):
    pass


def _as_hom(G: FiniteAbelianGroup, M) -> GroupHom:
    return M if isinstance(M, GroupHom) else GroupHom(G, G, M)


@dataclass(frozen=True)
class FiniteGaloisModule:
    underlying: FiniteAbelianGroup
    actors: Mapping[str, GroupHom] = field(default_factory=dict)
    modulus: int | None = None

    def __post_init__(self):
        G = self.underlying
        acts = {name: _as_hom(G, M) for name, M in dict(self.actors).items()}
        object.__setattr__(self, "actors", acts)
        for name, A in acts.items():
            if A.source != G or A.target != G:
                raise EquivarianceError(f"action {name!r} is not an endomorphism of the module")
            if not A.is_injective():
                raise EquivarianceError(f"action {name!r} is not invertible")
        names = sorted(acts)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                if not acts[a].compose(acts[b]).equals(acts[b].compose(acts[a])):
                    raise EquivarianceError(f"actions {a!r} and {b!r} do not commute")
        if self.modulus is not None and G.exponent and self.modulus % G.exponent:
            raise ValueError(f"group exponent {G.exponent} does not divide the modulus {self.modulus}")

    @classmethod
    def trivial_action(cls, G: FiniteAbelianGroup, names: Sequence[str] = (), modulus: int | None = None):
        return cls(G, {n: identity_hom(G) for n in names}, modulus)

    def action(self, name: str) -> GroupHom:
        try:
            return self.actors[name]
        except KeyError:
            raise KeyError(f"module has no actor {name!r}") from None

    def with_actors(self, names: Sequence[str]) -> "FiniteGaloisModule":
        return FiniteGaloisModule(self.underlying, {n: self.actors[n] for n in names}, self.modulus)


def action_order(A: GroupHom, limit: int = 100000) -> int:
    I = identity_hom(A.source)
    P = A
    for k in range(1, limit + 1):
        if P.equals(I):
            return k
        P = P.compose(A)
    raise ValueError("action order exceeds limit")


def action_power(A: GroupHom, e: int) -> GroupHom:
    if e < 0:
        e %= action_order(A)
    R = identity_hom(A.source)
    B = A
    while e:
        if e & 1:
            R = R.compose(B)
        B = B.compose(B)
        e >>= 1
    return R


def induced_module(M: FiniteGaloisModule, sq: Subquotient, names: Sequence[str] | None = None,
                   modulus: int | None = None) -> FiniteGaloisModule:
    """Actions induced on a stable subquotient of M (given inside Z^rank)."""
    names = list(M.actors) if names is None else list(names)
    acts = {}
    vecs = sq.generator_vectors()
    for n in names:
        A = M.actors[n].matrix
        acts[n] = GroupHom(sq.group, sq.group, [sq.locate(vecmat(v, A, M.underlying.rank)) for v in vecs])
    return FiniteGaloisModule(sq.group, acts, modulus if modulus is not None else M.modulus)


@dataclass(frozen=True)
class CyclotomicCharacterTable:
    """chi(g) for each actor g: an integer such that g acts on mu_{p^m} by zeta -> zeta^chi(g)."""

    p: int
    values: Mapping[str, int]
    max_level: int = 8

    def __post_init__(self):
        for g, v in self.values.items():
            if v % self.p == 0:
                raise ValueError(f"chi({g}) = {v} is not a unit")

    def at_level(self, g: str, m: int) -> int:
        if m > self.max_level:
            raise ValueError(f"character known only up to level {self.max_level}")
        return self.values[g] % self.p ** m


# the pipeline's convention for p = 3: gamma acts on mu_{3^inf} by 4, delta by -1
STANDARD_CHI = CyclotomicCharacterTable(3, {"gamma": 4, "delta": -1})


def _level(modulus: int, p: int) -> int:
    m = 0
    while modulus % p == 0:
        modulus //= p
        m += 1
    return m


def tate_twist(M: FiniteGaloisModule, j: int, chi: CyclotomicCharacterTable) -> FiniteGaloisModule:
    if M.modulus is None:
        raise ValueError("tate_twist needs a module with a modulus p^m")
    m = _level(M.modulus, chi.p)
    q = chi.p ** m
    G = M.underlying
    acts = {}
    for name, A in M.actors.items():
        c = pow(chi.at_level(name, m), j, q) if name in chi.values else 1
        acts[name] = GroupHom(G, G, [[c * x for x in row] for row in A.matrix])
    return FiniteGaloisModule(G, acts, M.modulus)


def reduce_mod(M: FiniteGaloisModule, q: int) -> FiniteGaloisModule:
    """M / qM, carrying the actions, with modulus q."""
    G = M.underlying
    gens = identity(G.rank)
    rels = relation_rows(G) + [[q * x for x in row] for row in gens]
    return induced_module(M, Subquotient(gens + rels, rels, G.rank), modulus=q)


def _coinvariant_rels(M: FiniteGaloisModule, names: Sequence[str]) -> Matrix:
    G = M.underlying
    rels = relation_rows(G)
    for n in names:
        A = M.action(n).matrix
        rels += [[a - int(i == j) for j, a in enumerate(row)] for i, row in enumerate(A)]
    return rels


def coinvariants(M: FiniteGaloisModule, actor_names: Sequence[str]) -> tuple[FiniteAbelianGroup, GroupHom]:
    G = M.underlying
    Q = group_from_relations(G.rank, _coinvariant_rels(M, actor_names))
    return Q, GroupHom(G, Q, Q.to_invariant or [[] for _ in range(G.rank)])


def coinvariant_module(M: FiniteGaloisModule, actor_names: Sequence[str]) -> tuple[FiniteGaloisModule, GroupHom]:
    """Coinvariants as a module for the remaining actors, plus the projection."""
    G = M.underlying
    rels = _coinvariant_rels(M, actor_names)
    sq = Subquotient(identity(G.rank) + rels, rels, G.rank)
    rest = [n for n in M.actors if n not in actor_names]
    Q = induced_module(M, sq, rest)
    proj = GroupHom(G, Q.underlying, [sq.locate(e) for e in identity(G.rank)])
    return Q, proj


def _joint_kernel_lattice(M: FiniteGaloisModule, names: Sequence[str]) -> Matrix:
    G = M.underlying
    r = G.rank
    if not names:
        return identity(r) + relation_rows(G)
    cols = []
    tgt = []
    for n in names:
        A = M.action(n).matrix
        B = [[a - int(i == j) for j, a in enumerate(row)] for i, row in enumerate(A)]
        cols.append(B)
        tgt += list(G.invariant_factors)
    stacked = [sum((B[i] for B in cols), []) for i in range(r)]
    return kernel_lattice(stacked, G.invariant_factors, tgt)


def invariants(M: FiniteGaloisModule, actor_names: Sequence[str]) -> tuple[FiniteAbelianGroup, GroupHom]:
    G = M.underlying
    sq = Subquotient(_joint_kernel_lattice(M, actor_names), relation_rows(G), G.rank)
    return sq.group, GroupHom(sq.group, G, sq.generator_vectors())


def invariant_module(M: FiniteGaloisModule, actor_names: Sequence[str]) -> tuple[FiniteGaloisModule, GroupHom]:
    G = M.underlying
    sq = Subquotient(_joint_kernel_lattice(M, actor_names), relation_rows(G), G.rank)
    sub = induced_module(M, sq)
    return sub, GroupHom(sub.underlying, G, sq.generator_vectors())


def eigenspace(M: FiniteGaloisModule, actor: str, order: int, zeta: int) -> FiniteGaloisModule:
    """Image of e = (1/d) sum_k zeta^{-k} g^k, the part where ``actor`` acts by ``zeta``.

    ``order`` is the order d of the acting group (coprime to the exponent of
    M); ``zeta`` must satisfy zeta^d = 1 modulo the exponent.
    """
    G = M.underlying
    N = G.exponent
    if gcd(order, N) != 1:
        raise ValueError(f"actor order {order} is not coprime to the module exponent {N}")
    if pow(zeta, order, N) != 1 % N:
        raise ValueError(f"{zeta} is not a {order}-th root of unity mod {N}")
    A = M.action(actor)
    if not action_power(A, order).equals(identity_hom(G)):
        raise ValueError(f"{actor!r} does not have order dividing {order}")
    inv_d = pow(order, -1, N) if N > 1 else 0
    zinv = pow(zeta, -1, N) if N > 1 else 0
    r = G.rank
    E = [[0] * r for _ in range(r)]
    P = identity(r)
    for k in range(order):
        c = pow(zinv, k, N) if N > 1 else 0
        for i in range(r):
            for j in range(r):
                E[i][j] += c * P[i][j]
        P = matmul(P, A.matrix)
    E = [[(inv_d * x) % N for x in row] for row in E]
    sq = Subquotient(E + relation_rows(G), relation_rows(G), r)
    return induced_module(M, sq)


def eigenspace_inclusion(M: FiniteGaloisModule, actor: str, order: int, zeta: int) -> tuple[FiniteGaloisModule, GroupHom]:
    G = M.underlying
    N = G.exponent
    E_mod = eigenspace(M, actor, order, zeta)
    # recompute the embedding: the eigenspace is {x : x g = zeta x}
    sub, incl = invariant_module(
        FiniteGaloisModule(G, {"_t": GroupHom(G, G, [[(pow(zeta, -1, N) if N > 1 else 0) * x for x in row]
                                                      for row in M.action(actor).matrix])}), ["_t"])
    if sub.underlying != E_mod.underlying:
        raise AssertionError("eigenspace image and eigen-kernel disagree")
    return E_mod, incl


# ---------------------------------------------------------------------------
# splitting


def _check_equivariant(f: GroupHom, src_actions: Mapping[str, GroupHom], tgt_actions: Mapping[str, GroupHom]):
    for name, A in src_actions.items():
        if name not in tgt_actions:
            raise EquivarianceError(f"target lacks actor {name!r}")
        if not A.compose(f).equals(f.compose(tgt_actions[name])):
            raise EquivarianceError(f"map is not equivariant for {name!r}")


def equivariant_section_exists(
    pi: GroupHom,
    src_actions: Mapping[str, GroupHom] | None = None,
    tgt_actions: Mapping[str, GroupHom] | None = None,
) -> tuple[bool, GroupHom | None]:
    """Is there an equivariant s with pi o s = id?  Returns (answer, witness)."""
    src_actions = dict(src_actions or {})
    tgt_actions = dict(tgt_actions or {})
    G, H = pi.source, pi.target
    if not pi.is_surjective():
        raise ValueError("pi is not surjective")
    _check_equivariant(pi, src_actions, tgt_actions)
    g, h = G.invariant_factors, H.invariant_factors
    rh, rg = H.rank, G.rank
    # S[i][j] = scale[i][j] * t_ij makes S a hom H -> G automatically
    scale = [[g[j] // gcd(g[j], h[i]) for j in range(rg)] for i in range(rh)]
    nv = rh * rg

    def var(i, j):
        return i * rg + j

    C, rhs, mods = [], [], []
    P = pi.matrix
    for i in range(rh):
        for k in range(rh):
            row = [0] * nv
            for j in range(rg):
                row[var(i, j)] += scale[i][j] * P[j][k]
            C.append(row)
            rhs.append(int(i == k))
            mods.append(h[k])
    for name, B in tgt_actions.items():
        A = src_actions[name].matrix
        Bm = B.matrix
        # (B S)[i][j] - (S A)[i][j] == 0 mod g[j]
        for i in range(rh):
            for j in range(rg):
                row = [0] * nv
                for l in range(rh):
                    row[var(l, j)] += Bm[i][l] * scale[l][j]
                for l in range(rg):
                    row[var(i, l)] -= scale[i][l] * A[l][j]
                C.append(row)
                rhs.append(0)
                mods.append(g[j])
    x = solve_congruences(C, rhs, mods, nv)
    if x is None:
        return False, None
    S = GroupHom(H, G, [[scale[i][j] * x[var(i, j)] for j in range(rg)] for i in range(rh)])
    if not S.compose(pi).equals(identity_hom(H)):
        raise AssertionError("section solver returned a non-section")
    _check_equivariant(S, tgt_actions, src_actions)
    return True, S


def purity_split_check(inclusion: GroupHom) -> bool:
    """Does H = image(inclusion) split off G?  Tested as purity: H/n -> G/n injective."""
    if not inclusion.is_injective():
        raise ValueError("map is not injective")
    H, G = inclusion.source, inclusion.target
    from sympy import factorint

    for p, e in factorint(G.exponent).items():
        for m in range(1, e + 1):
            n = p ** m
            Hn, _ = mod_n(H, n)
            Gn, pG = mod_n(G, n)
            # H/n -> G/n: lift H/n generators to H, include, project
            rows = []
            for v in (Hn.from_invariant or ()):
                rows.append(pG(inclusion(v)))
            f = GroupHom(Hn, Gn, rows)
            if not f.is_injective():
                return False
    return True


def hom_module(M3: FiniteGaloisModule, M1: FiniteGaloisModule, actor: str) -> tuple[Subquotient, GroupHom]:
    """Hom(M3, M1) with (g f)(m) = g f(g^-1 m), as a subquotient of Z^(r3*r1)."""
    a, b = M3.underlying.invariant_factors, M1.underlying.invariant_factors
    r3, r1 = len(a), len(b)
    dim = r3 * r1
    gens, rels = [], []
    for i in range(r3):
        for j in range(r1):
            e = [0] * dim
            e[i * r1 + j] = b[j] // gcd(a[i], b[j])
            gens.append(e)
            e2 = [0] * dim
            e2[i * r1 + j] = b[j]
            rels.append(e2)
    sq = Subquotient(gens, rels, dim)
    A3inv = action_power(M3.action(actor), -1).matrix
    A1 = M1.action(actor).matrix
    rows = []
    for v in sq.generator_vectors():
        F = [v[i * r1:(i + 1) * r1] for i in range(r3)]
        GF = matmul(matmul(A3inv, F, r1), A1, r1)
        rows.append(sq.locate([x for row in GF for x in row]))
    act = GroupHom(sq.group, sq.group, rows)
    return sq, act


def lemma_pavia_obstruction(
    iota: GroupHom,
    pi: GroupHom,
    actions: Sequence[Mapping[str, GroupHom]],
    actor: str = "gamma",
) -> FiniteAbelianGroup:
    """ker( Hom(M3, M1)_gamma -> Hom(M3, M2)_gamma ) for 0 -> M1 -> M2 -> M3 -> 0."""
    M1g, M2g, M3g = iota.source, iota.target, pi.target
    if pi.source != M2g:
        raise ValueError("iota and pi are not composable")
    if not iota.is_injective():
        raise ValueError("sequence not exact: iota not injective")
    if not pi.is_surjective():
        raise ValueError("sequence not exact: pi not surjective")
    if not iota.compose(pi).equals(GroupHom(M1g, M3g, [[0] * M3g.rank for _ in range(M1g.rank)])):
        raise ValueError("sequence not exact: pi o iota != 0")
    if hom_kernel(pi)[0].order != M1g.order:
        raise ValueError("sequence not exact at the middle term")
    if not purity_split_check(iota):
        raise ValueError("sequence does not split as abelian groups")
    a1, a2, a3 = (dict(a) for a in actions)
    for acts, G in ((a1, M1g), (a2, M2g), (a3, M3g)):
        acts.setdefault(actor, identity_hom(G))
    _check_equivariant(iota, {actor: a1[actor]}, {actor: a2[actor]})
    _check_equivariant(pi, {actor: a2[actor]}, {actor: a3[actor]})
    M1 = FiniteGaloisModule(M1g, {actor: a1[actor]})
    M2 = FiniteGaloisModule(M2g, {actor: a2[actor]})
    M3 = FiniteGaloisModule(M3g, {actor: a3[actor]})
    sq31, act31 = hom_module(M3, M1, actor)
    sq32, act32 = hom_module(M3, M2, actor)
    r3, r1, r2 = M3g.rank, M1g.rank, M2g.rank
    I = iota.matrix
    rows = []
    for v in sq31.generator_vectors():
        F = [v[i * r1:(i + 1) * r1] for i in range(r3)]
        FI = matmul(F, I, r2)
        rows.append(sq32.locate([x for row in FI for x in row]))
    H31 = FiniteGaloisModule(sq31.group, {actor: act31})
    H32 = FiniteGaloisModule(sq32.group, {actor: act32})
    comp = GroupHom(sq31.group, sq32.group, rows)
    C31, p31 = coinvariants(H31, [actor])
    C32, p32 = coinvariants(H32, [actor])
    induced = GroupHom(C31, C32, [p32(comp(v)) for v in (C31.from_invariant or ())])
    return hom_kernel(induced)[0]


# ---------------------------------------------------------------------------
# Lemma-casa style diagrams


@dataclass
class CasaDiagram:
    """Two short exact rows A1->A2->A3, B1->B2->B3, vertical maps iota_k,
    cokernels pi2: B2->T2, pi3: B3->T3 and tau2: T2->T3.  Actions (optional)
    are dicts per object, keyed by actor name."""

    alpha1: GroupHom
    alpha2: GroupHom
    beta1: GroupHom
    beta2: GroupHom
    iota1: GroupHom
    iota2: GroupHom
    iota3: GroupHom
    pi2: GroupHom
    pi3: GroupHom
    tau2: GroupHom
    actions: dict[str, dict[str, GroupHom]] = field(default_factory=dict)


def _short_exact(f: GroupHom, g: GroupHom, what: str):
    if not f.is_injective():
        raise ValueError(f"{what}: first map not injective")
    if not g.is_surjective():
        raise ValueError(f"{what}: second map not surjective")
    if hom_kernel(g)[0].order != f.source.order or not f.compose(g).equals(
            GroupHom(f.source, g.target, [[0] * g.target.rank for _ in range(f.source.rank)])):
        raise ValueError(f"{what}: not exact in the middle")


def casa_check(d: CasaDiagram) -> tuple[bool, bool]:
    _short_exact(d.alpha1, d.alpha2, "row A")
    _short_exact(d.beta1, d.beta2, "row B")
    _short_exact(d.iota2, d.pi2, "column 2")
    _short_exact(d.iota3, d.pi3, "column 3")
    if not d.iota1.is_injective():
        raise ValueError("column 1: iota1 not injective")
    checks = [
        ("square A1-B2", d.alpha1.compose(d.iota2), d.iota1.compose(d.beta1)),
        ("square A2-B3", d.alpha2.compose(d.iota3), d.iota2.compose(d.beta2)),
        ("square B2-T3", d.pi2.compose(d.tau2), d.beta2.compose(d.pi3)),
    ]
    for name, x, y in checks:
        if not x.equals(y):
            raise ValueError(f"{name} does not commute")
    if not d.tau2.is_isomorphism():
        raise ValueError("tau2 is not an isomorphism")
    acts = d.actions

    def split(f: GroupHom, src: str, tgt: str) -> bool:
        return equivariant_section_exists(f, acts.get(src, {}), acts.get(tgt, {}))[0]

    cond_i = split(d.alpha2, "A2", "A3") and split(d.pi2, "B2", "T2")
    cond_ii = split(d.beta2, "B2", "B3") and split(d.pi3, "B3", "T3")
    return cond_i, cond_ii
