"""Random small instances shared by the property tests and the acceptance run."""

from __future__ import annotations

import itertools
import random

from wildtame.exactalg import (
    FiniteAbelianGroup,
    GroupHom,
    Subquotient,
    det,
    group_from_relations,
    hnf,
    identity,
    identity_hom,
    matmul,
    quotient,
    relation_rows,
    snf,
    subgroup,
)
from wildtame.galmod import (
    CasaDiagram,
    CyclotomicCharacterTable,
    FiniteGaloisModule,
    casa_check,
    eigenspace,
    equivariant_section_exists,
    lemma_pavia_obstruction,
    purity_split_check,
    tate_twist,
)


def rand_matrix(rnd: random.Random, rows: int, cols: int, lo: int = -50, hi: int = 50):
    return [[rnd.randint(lo, hi) for _ in range(cols)] for _ in range(rows)]


def rand_3group(rnd: random.Random, max_rank: int = 3, max_exp: int = 3) -> FiniteAbelianGroup:
    r = rnd.randint(0, max_rank)
    return FiniteAbelianGroup.from_orders([3 ** rnd.randint(1, max_exp) for _ in range(r)])


def rand_element(rnd: random.Random, G: FiniteAbelianGroup):
    return [rnd.randrange(d) for d in G.invariant_factors]


def rand_hom(rnd: random.Random, G: FiniteAbelianGroup, H: FiniteAbelianGroup) -> GroupHom:
    rows = []
    for d in G.invariant_factors:
        row = []
        for e in H.invariant_factors:
            step = e // _gcd(d, e)
            row.append(step * rnd.randrange(e // step))
        rows.append(row)
    return GroupHom(G, H, rows)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def brute_order(G: FiniteAbelianGroup, v) -> int:
    k, cur = 1, G.reduce(v)
    z = G.zero()
    while cur != z:
        cur = G.add(cur, v)
        k += 1
    return k


# --- exact algebra -----------------------------------------------------------


def check_snf(rnd: random.Random) -> None:
    m, n = rnd.randint(1, 6), rnd.randint(1, 6)
    A = rand_matrix(rnd, m, n)
    D, U, V = snf(A)
    assert matmul(matmul(U, A, n), V, n) == D
    assert abs(det(U)) == 1 and abs(det(V)) == 1
    diag = [D[i][i] for i in range(min(m, n))]
    assert all(D[i][j] == 0 for i in range(m) for j in range(n) if i != j)
    assert all(x >= 0 for x in diag)
    for a, b in zip(diag, diag[1:]):
        assert (b == 0) if a == 0 else b % a == 0


def check_hnf(rnd: random.Random) -> None:
    m, n = rnd.randint(1, 6), rnd.randint(1, 6)
    A = rand_matrix(rnd, m, n)
    H, U = hnf(A)
    assert matmul(U, A, n) == H
    assert abs(det(U)) == 1
    last = -1
    for row in H:
        nz = [j for j, x in enumerate(row) if x]
        if not nz:
            last = n
            continue
        p = nz[0]
        assert p > last and row[p] > 0
        last = p
    for i, row in enumerate(H):
        nz = [j for j, x in enumerate(row) if x]
        if nz:
            p = nz[0]
            assert all(0 <= H[k][p] < row[p] for k in range(i))


def check_presentation_invariance(rnd: random.Random) -> None:
    n = rnd.randint(1, 4)
    rels = [[rnd.choice([2, 3, 4, 6, 9]) if i == j else 0 for j in range(n)] for i in range(n)]
    rels += rand_matrix(rnd, rnd.randint(0, 3), n, -9, 9)
    G = group_from_relations(n, rels)
    perm_rows = rels[:]
    rnd.shuffle(perm_rows)
    cols = list(range(n))
    rnd.shuffle(cols)
    permuted = [[row[c] for c in cols] for row in perm_rows]
    i, j = rnd.randrange(len(rels)), rnd.randrange(len(rels))
    k = rnd.randint(-5, 5)
    added = [row[:] for row in rels]
    if i != j:
        added[i] = [a + k * b for a, b in zip(added[i], added[j])]
    assert group_from_relations(n, permuted).invariant_factors == G.invariant_factors
    assert group_from_relations(n, added).invariant_factors == G.invariant_factors


# --- Galois modules -----------------------------------------------------------


def rand_module_with_actor(rnd: random.Random, name: str = "gamma"):
    """A 3-group with an automorphism: a scalar unit, or a unitriangular map on a homocyclic group."""
    if rnd.random() < 0.5:
        G = rand_3group(rnd)
        N = G.exponent if G.invariant_factors else 1
        c = rnd.choice([u for u in range(1, max(N, 2)) if u % 3]) if N > 1 else 1
        A = [[c * x for x in row] for row in identity(G.rank)]
    else:
        r, a = rnd.randint(1, 3), rnd.randint(1, 2)
        G = FiniteAbelianGroup((3 ** a,) * r)
        A = [[(1 if i == j else (rnd.randrange(3 ** a) if j > i else 0)) for j in range(r)] for i in range(r)]
    return FiniteGaloisModule(G, {name: GroupHom(G, G, A)}, G.exponent if G.invariant_factors else None)


def check_twist_functoriality(rnd: random.Random) -> None:
    m = rnd.randint(1, 3)
    q = 3 ** m
    r = rnd.randint(1, 3)
    G = FiniteAbelianGroup.from_orders([3 ** rnd.randint(1, m) for _ in range(r)])
    c = rnd.choice([u for u in range(1, q) if u % 3])
    M = FiniteGaloisModule(G, {"gamma": GroupHom(G, G, [[c * x for x in row] for row in identity(G.rank)])}, q)
    chi = CyclotomicCharacterTable(3, {"gamma": rnd.choice([2, 4, 5, 7, -1])})
    a, b = rnd.randint(-4, 4), rnd.randint(-4, 4)
    lhs = tate_twist(tate_twist(M, a, chi), b, chi)
    rhs = tate_twist(M, a + b, chi)
    assert lhs.action("gamma").equals(rhs.action("gamma"))
    assert tate_twist(tate_twist(M, a, chi), -a, chi).action("gamma").equals(M.action("gamma"))


def check_eigenspace_cardinality(rnd: random.Random) -> None:
    """Delta of order 2 acting by a random involution on a homocyclic 3-group."""
    r, a = rnd.randint(1, 4), rnd.randint(1, 2)
    q = 3 ** a
    G = FiniteAbelianGroup((q,) * r)
    signs = [rnd.choice([1, -1]) for _ in range(r)]
    # conjugate diag(signs) by a random unitriangular matrix
    P = [[(1 if i == j else (rnd.randrange(q) if j > i else 0)) for j in range(r)] for i in range(r)]
    Pinv = _unitriangular_inverse(P, q)
    Dm = [[signs[i] if i == j else 0 for j in range(r)] for i in range(r)]
    A = [[x % q for x in row] for row in matmul(matmul(Pinv, Dm, r), P, r)]
    M = FiniteGaloisModule(G, {"delta": GroupHom(G, G, A)})
    plus = eigenspace(M, "delta", 2, 1).underlying
    minus = eigenspace(M, "delta", 2, -1).underlying
    assert plus.order * minus.order == G.order
    assert plus.order == q ** signs.count(1)


def _unitriangular_inverse(P, q):
    r = len(P)
    inv = identity(r)
    # solve X P = I for upper unitriangular P (row convention), mod q
    for i in range(r):
        row = [int(i == j) for j in range(r)]
        x = [0] * r
        for j in range(r):
            s = row[j] - sum(x[k] * P[k][j] for k in range(j))
            x[j] = s % q
        inv[i] = x
    return inv


def rand_subgroup_inclusion(rnd: random.Random):
    G = rand_3group(rnd, 3, 3)
    gens = [rand_element(rnd, G) for _ in range(rnd.randint(0, 2))]
    H, incl = subgroup(G, gens)
    return G, gens, H, incl


def check_purity_vs_section(rnd: random.Random) -> bool:
    G, gens, H, incl = rand_subgroup_inclusion(rnd)
    Q, proj = quotient(G, gens)
    pure = purity_split_check(incl)
    sect, _ = equivariant_section_exists(proj)
    assert pure == sect, (G, gens)
    return pure


def rand_casa(rnd: random.Random) -> CasaDiagram:
    """B1 <= A2 <= B2 inside a random 3-group B2; every other object is a subquotient."""
    B2 = rand_3group(rnd, 3, 2)
    r = B2.rank
    rels = relation_rows(B2)
    a_gens = [rand_element(rnd, B2) for _ in range(rnd.randint(0, 3))]
    b1_gens = []
    for _ in range(rnd.randint(0, 2) if a_gens else 0):
        cs = [rnd.randint(0, 8) for _ in a_gens]
        b1_gens.append([sum(c * g[i] for c, g in zip(cs, a_gens)) for i in range(r)])
    sqA2 = Subquotient(a_gens + rels, rels, r)
    sqB1 = Subquotient(b1_gens + rels, rels, r)
    A2, B1 = sqA2.group, sqB1.group
    iota2 = GroupHom(A2, B2, [list(B2.reduce(v)) for v in sqA2.generator_vectors()])
    beta1 = GroupHom(B1, B2, [list(B2.reduce(v)) for v in sqB1.generator_vectors()])
    alpha1 = GroupHom(B1, A2, [list(sqA2.locate(v)) for v in sqB1.generator_vectors()])
    B3, beta2 = quotient(B2, b1_gens)
    A3, alpha2 = quotient(A2, [list(alpha1(e)) for e in identity(B1.rank)])
    iota3 = GroupHom(A3, B3, [list(beta2(iota2(lift))) for lift in (A3.from_invariant or [])])
    T2, pi2 = quotient(B2, a_gens)
    T3, pi3 = quotient(B3, [list(iota3(e)) for e in identity(A3.rank)])
    tau2 = GroupHom(T2, T3, [list(pi3(beta2(lift))) for lift in (T2.from_invariant or [])])
    return CasaDiagram(alpha1, alpha2, beta1, beta2, identity_hom(B1), iota2, iota3, pi2, pi3, tau2)


def check_casa(rnd: random.Random) -> tuple[bool, bool]:
    d = rand_casa(rnd)
    i, ii = casa_check(d)
    assert i == ii
    return i, ii


def rand_extension(rnd: random.Random):
    """0 -> M1 -> M1 + M3 -> M3 -> 0 with gamma block upper triangular."""
    G1, G3 = rand_3group(rnd, 2, 2), rand_3group(rnd, 2, 2)
    units1 = [u for u in range(1, 9) if u % 3]
    c1, c3 = rnd.choice([1, 1] + units1), rnd.choice([1, 1] + units1)
    A1 = [[c1 * x for x in row] for row in identity(G1.rank)]
    A3 = [[c3 * x for x in row] for row in identity(G3.rank)]
    C = []
    for d in G3.invariant_factors:
        C.append([(e // _gcd(d, e)) * rnd.randrange(_gcd(d, e)) for e in G1.invariant_factors])
    # M2 presented on generators of M1 then M3, orders preserved
    orders = list(G1.invariant_factors) + list(G3.invariant_factors)
    M2 = group_from_relations(len(orders), [[o if i == j else 0 for j in range(len(orders))]
                                            for i, o in enumerate(orders)])
    n1, n3 = G1.rank, G3.rank
    raw = [A1[i] + [0] * n3 for i in range(n1)] + [C[i] + A3[i] for i in range(n3)]
    n = n1 + n3
    T = M2.to_invariant or identity(n)
    Tinv = M2.from_invariant or identity(n)
    g2 = [list(M2.reduce(row)) for row in matmul(matmul(Tinv, raw, n), T, M2.rank)]
    gamma2 = GroupHom(M2, M2, g2)
    iota = GroupHom(G1, M2, [list(M2.reduce(T[i])) for i in range(n1)])
    pi = GroupHom(M2, G3, [list(G3.reduce(row[n1:])) for row in Tinv])
    acts = [{"gamma": GroupHom(G1, G1, A1)}, {"gamma": gamma2}, {"gamma": GroupHom(G3, G3, A3)}]
    return iota, pi, acts


def check_pavia(rnd: random.Random) -> bool:
    iota, pi, acts = rand_extension(rnd)
    obs = lemma_pavia_obstruction(iota, pi, acts)
    sect, _ = equivariant_section_exists(pi, acts[1], acts[2])
    assert obs.is_trivial() == sect
    return sect


def all_elements(G: FiniteAbelianGroup):
    return itertools.product(*(range(d) for d in G.invariant_factors))


# --- towers -------------------------------------------------------------------


def _rec(label, G, gamma, norm_to=None):
    from wildtame.nfengine.records import ClassGroupRecord, NumberFieldDesc

    acts = {"gamma": [list(r) for r in gamma]} if G.rank else {}
    return ClassGroupRecord(NumberFieldDesc(label, (1, 0, 1)), G, acts, norm_to, "computed pinned")


def rand_tower(rnd: random.Random, levels: int = 3):
    """Levels 0..levels-1: A1 homocyclic with unitriangular gamma, A0 a quotient of its
    coinvariants, and every higher level isomorphic to A1 through a random automorphism."""
    from wildtame.galmod import coinvariants
    from wildtame.iwasawa import TowerData

    r, a = rnd.randint(1, 3), rnd.randint(1, 2)
    q = 3 ** a
    A1 = FiniteAbelianGroup((q,) * r)
    g1 = [[(1 if i == j else (rnd.randrange(q) if j > i else 0)) for j in range(r)] for i in range(r)]
    M1 = FiniteGaloisModule(A1, {"gamma": GroupHom(A1, A1, g1)})
    Q, proj = coinvariants(M1, ["gamma"])
    A0, p2 = quotient(Q, [rand_element(rnd, Q) for _ in range(rnd.randint(0, 1))])
    N1 = proj.compose(p2)
    recs = [_rec("T_L0", A0, identity(A0.rank)), _rec("T_L1", A1, g1, ("T_L0", N1.matrix))]
    gam = g1
    for n in range(2, levels):
        P = [[(1 if i == j else (rnd.randrange(q) if j > i else 0)) for j in range(r)] for i in range(r)]
        if rnd.random() < 0.5:
            P = [row[::-1] for row in P[::-1]]  # lower unitriangular
        Pinv = _inverse_mod(P, q)
        # rows: gamma_n = P gamma_{n-1} P^-1 makes P : A_n -> A_{n-1} equivariant
        gam = [[x % q for x in row] for row in matmul(matmul(P, gam, r), Pinv, r)]
        recs.append(_rec(f"T_L{n}", A1, gam, (f"T_L{n - 1}", P)))
    return TowerData("T", recs)


def _inverse_mod(P, q):
    from sympy import Matrix

    return [[int(x) % q for x in row] for row in Matrix(P).inv_mod(q).tolist()]


def check_psi_level_independence(rnd: random.Random) -> bool:
    from wildtame.iwasawa import detect_stabilization, psi, psi_lower_bound

    T = rand_tower(rnd)
    n = detect_stabilization(T)
    assert n is not None and n <= 1
    a = psi_lower_bound(T, n).group
    b = psi_lower_bound(T, n + 1).group
    assert a.invariant_factors == b.invariant_factors
    p = psi(T)
    assert p.group.invariant_factors == a.invariant_factors
    assert p.group.order * T.group(0).order == p.coinvariants.order
    return p.group.is_trivial()


def check_psi_zero_kills_criterion(rnd: random.Random) -> bool:
    from wildtame.iwasawa import criterion_kernel_m1, psi

    T = rand_tower(rnd)
    zero = psi(T).group.is_trivial()
    if zero:
        assert criterion_kernel_m1(T).is_trivial()
    return zero
