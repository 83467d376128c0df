"""Exact integer linear algebra and finite abelian groups.

Matrices are lists of rows of Python ints.  Group elements are row vectors
and homomorphisms act on the right: the image of ``x`` under a hom with
matrix ``M`` is ``x @ M``, so row ``i`` of ``M`` is the image of the
``i``-th generator of the source.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce
from math import gcd, prod
from typing import Iterable, Iterator, Sequence

from sympy import factorint, isprime

Matrix = list[list[int]]


class NotFiniteError(ValueError):
    """Raised when a presentation describes an infinite group."""


# ---------------------------------------------------------------------------
# plain matrix helpers


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def zeros(r: int, c: int) -> Matrix:
    return [[0] * c for _ in range(r)]


def copy_matrix(A: Sequence[Sequence[int]]) -> Matrix:
    return [list(map(int, row)) for row in A]


def transpose(A: Sequence[Sequence[int]], ncols: int | None = None) -> Matrix:
    if not A:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*A)]


def matmul(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]], ncols: int | None = None) -> Matrix:
    if not A:
        return []
    if not B:
        n = ncols if ncols is not None else 0
        return [[0] * n for _ in A]
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def vecmat(v: Sequence[int], B: Sequence[Sequence[int]], ncols: int) -> list[int]:
    out = [0] * ncols
    for a, row in zip(v, B):
        if a:
            for j, b in enumerate(row):
                out[j] += a * b
    return out


def det(A: Sequence[Sequence[int]]) -> int:
    """Bareiss fraction-free determinant."""
    n = len(A)
    if n == 0:
        return 1
    M = copy_matrix(A)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k]:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


# ---------------------------------------------------------------------------
# normal forms


def hnf(A: Sequence[Sequence[int]], ncols: int | None = None) -> tuple[Matrix, Matrix]:
    """Row Hermite normal form.

    Returns ``(H, U)`` with ``U`` unimodular and ``U @ A == H``.  Pivots are
    positive, entries above a pivot lie in ``[0, pivot)``, zero rows are at
    the bottom.
    """
    H = copy_matrix(A)
    m = len(H)
    n = len(H[0]) if m else (ncols or 0)
    U = identity(m)
    row = 0
    for col in range(n):
        if row >= m:
            break
        # gcd-combine every row below into the pivot row
        for i in range(row + 1, m):
            b = H[i][col]
            if b == 0:
                continue
            a = H[row][col]
            g, s, t = xgcd(a, b)
            ag, bg = a // g, b // g
            r1, r2 = H[row], H[i]
            H[row] = [s * x + t * y for x, y in zip(r1, r2)]
            H[i] = [-bg * x + ag * y for x, y in zip(r1, r2)]
            u1, u2 = U[row], U[i]
            U[row] = [s * x + t * y for x, y in zip(u1, u2)]
            U[i] = [-bg * x + ag * y for x, y in zip(u1, u2)]
        piv = H[row][col]
        if piv == 0:
            continue
        if piv < 0:
            H[row] = [-x for x in H[row]]
            U[row] = [-x for x in U[row]]
            piv = -piv
        for i in range(row):
            q = H[i][col] // piv
            if q:
                H[i] = [x - q * y for x, y in zip(H[i], H[row])]
                U[i] = [x - q * y for x, y in zip(U[i], U[row])]
        row += 1
    return H, U


def hnf_basis(rows: Sequence[Sequence[int]], ncols: int) -> Matrix:
    """Nonzero rows of the HNF: an echelon basis of the row lattice."""
    if not rows:
        return []
    H, _ = hnf(rows, ncols)
    return [r for r in H if any(r)]


def snf(A: Sequence[Sequence[int]], ncols: int | None = None) -> tuple[Matrix, Matrix, Matrix]:
    """Smith normal form ``(D, U, V)`` with ``U @ A @ V == D``.

    Pivoting picks the smallest nonzero entry of the remaining block and
    clears its row and column; divisibility of the diagonal is then forced
    by folding offending entries back into the pivot row.
    """
    D = copy_matrix(A)
    m = len(D)
    n = len(D[0]) if m else (ncols or 0)
    U = identity(m)
    V = identity(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for M in (D, V):
            for r in M:
                r[i], r[j] = r[j], r[i]

    def add_row(dst, src, q):  # row_dst += q * row_src
        D[dst] = [x + q * y for x, y in zip(D[dst], D[src])]
        U[dst] = [x + q * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        for M in (D, V):
            for r in M:
                r[dst] += q * r[src]

    for t in range(min(m, n)):
        while True:
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    v = D[i][j]
                    if v and (best is None or abs(v) < abs(D[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                return D, U, V
            i, j = best
            if i != t:
                swap_rows(i, t)
            if j != t:
                swap_cols(j, t)
            p = D[t][t]
            clean = True
            for i in range(t + 1, m):
                if D[i][t]:
                    add_row(i, t, -(D[i][t] // p))
                    if D[i][t]:
                        clean = False
            for j in range(t + 1, n):
                if D[t][j]:
                    add_col(j, t, -(D[t][j] // p))
                    if D[t][j]:
                        clean = False
            if not clean:
                continue
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if D[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, 1)
        if D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]
    return D, U, V


def solve_echelon(B: Sequence[Sequence[int]], v: Sequence[int]) -> list[int] | None:
    """Integer ``c`` with ``c @ B == v`` for an HNF basis ``B``; None if none exists."""
    v = list(v)
    coeffs = []
    for row in B:
        p = next(j for j, x in enumerate(row) if x)
        q, r = divmod(v[p], row[p])
        if r:
            return None
        coeffs.append(q)
        if q:
            v = [a - q * b for a, b in zip(v, row)]
    if any(v):
        return None
    return coeffs


def left_kernel(A: Sequence[Sequence[int]], ncols: int) -> Matrix:
    """Basis of ``{x in Z^m : x @ A == 0}``."""
    if not A:
        return []
    H, U = hnf(A, ncols)
    return [U[i] for i, r in enumerate(H) if not any(r)]


def solve_congruences(C: Sequence[Sequence[int]], rhs: Sequence[int], moduli: Sequence[int],
                      nvars: int) -> list[int] | None:
    """Integer ``x`` with ``C[t] . x == rhs[t] (mod moduli[t])`` for all t.

    A zero modulus means exact equality.  One SNF of the augmented system
    ``[C | diag(moduli)]`` decides solvability.
    """
    nc = len(C)
    if nc == 0:
        return [0] * nvars
    A = [list(C[t]) + [moduli[t] if s == t else 0 for s in range(nc)] for t in range(nc)]
    D, U, V = snf(A)
    b = [sum(u * r for u, r in zip(Urow, rhs)) for Urow in U]
    z = [0] * (nvars + nc)
    for i in range(nc):
        d = D[i][i] if i < nvars + nc else 0
        if d == 0:
            if b[i]:
                return None
        else:
            q, r = divmod(b[i], d)
            if r:
                return None
            z[i] = q
    x = [sum(V[k][i] * z[i] for i in range(nvars + nc)) for k in range(nvars)]
    return x


# ---------------------------------------------------------------------------
# finite abelian groups


def _normalize_orders(orders: Iterable[int]) -> tuple[int, ...]:
    """Invariant factors of a direct sum of cyclic groups of the given orders."""
    orders = [abs(int(o)) for o in orders]
    if any(o == 0 for o in orders):
        raise NotFiniteError("group is not finite")
    primes: dict[int, list[int]] = {}
    for o in orders:
        for p, e in factorint(o).items():
            primes.setdefault(p, []).append(p ** e)
    r = max((len(v) for v in primes.values()), default=0)
    out = [1] * r
    for p, powers in primes.items():
        powers.sort(reverse=True)
        for i, q in enumerate(powers):
            out[r - 1 - i] *= q
    return tuple(out)


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """Finite abelian group Z/d1 + ... + Z/dr with d1 | d2 | ... and di >= 2.

    ``to_invariant`` (n x r) and ``from_invariant`` (r x n) record how the
    invariant generators relate to the generators of the presentation the
    group was built from, when there was one.
    """

    invariant_factors: tuple[int, ...] = ()
    to_invariant: tuple[tuple[int, ...], ...] | None = field(default=None, compare=False, repr=False)
    from_invariant: tuple[tuple[int, ...], ...] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        d = tuple(int(x) for x in self.invariant_factors)
        object.__setattr__(self, "invariant_factors", d)
        for a in d:
            if a < 2:
                raise ValueError(f"invariant factor {a} < 2")
        for a, b in zip(d, d[1:]):
            if b % a:
                raise ValueError(f"invariant factors {d} do not form a divisor chain")

    @classmethod
    def from_orders(cls, orders: Iterable[int]) -> "FiniteAbelianGroup":
        return cls(_normalize_orders(orders))

    @classmethod
    def trivial(cls) -> "FiniteAbelianGroup":
        return cls(())

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    @property
    def order(self) -> int:
        return prod(self.invariant_factors)

    @property
    def exponent(self) -> int:
        return self.invariant_factors[-1] if self.invariant_factors else 1

    def is_trivial(self) -> bool:
        return not self.invariant_factors

    def p_rank(self, p: int) -> int:
        return sum(1 for d in self.invariant_factors if d % p == 0)

    def elementary_divisors(self) -> tuple[int, ...]:
        out = []
        for d in self.invariant_factors:
            out.extend(p ** e for p, e in factorint(d).items())
        return tuple(sorted(out))

    def reduce(self, v: Sequence[int]) -> tuple[int, ...]:
        return tuple(x % d for x, d in zip(v, self.invariant_factors))

    def elements(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(d) for d in self.invariant_factors))

    def add(self, x, y):
        return self.reduce([a + b for a, b in zip(x, y)])

    def zero(self) -> tuple[int, ...]:
        return (0,) * self.rank

    def label(self) -> str:
        if not self.invariant_factors:
            return "0"
        return " + ".join(f"Z/{d}" for d in self.invariant_factors)

    def __str__(self) -> str:
        return self.label()


def iso_type_equal(G: FiniteAbelianGroup, H: FiniteAbelianGroup) -> bool:
    return G.invariant_factors == H.invariant_factors


def direct_sum(*groups: FiniteAbelianGroup) -> FiniteAbelianGroup:
    return FiniteAbelianGroup.from_orders(d for G in groups for d in G.invariant_factors)


def sylow(G: FiniteAbelianGroup, p: int) -> FiniteAbelianGroup:
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    return FiniteAbelianGroup(tuple(q for q in (_ppart(d, p) for d in G.invariant_factors) if q > 1))


def _ppart(n: int, p: int) -> int:
    q = 1
    while n % p == 0:
        n //= p
        q *= p
    return q


def group_from_relations(n_generators: int, relations: Sequence[Sequence[int]]) -> FiniteAbelianGroup:
    """The group Z^n / rowspace(relations), in invariant-factor form."""
    n = n_generators
    rels = [list(r) for r in relations if any(r)]
    if n == 0:
        return FiniteAbelianGroup(())
    if not rels:
        raise NotFiniteError("not finite: no relations")
    D, _, V = snf(rels, n)
    diag = [D[i][i] if i < len(D) else 0 for i in range(n)]
    if any(d == 0 for d in diag):
        raise NotFiniteError("not finite: relation lattice has rank < %d" % n)
    Vinv = _unimodular_inverse(V)
    keep = [i for i, d in enumerate(diag) if d != 1]
    factors = tuple(diag[i] for i in keep)
    to_inv = tuple(tuple(V[r][i] % diag[i] for i in keep) for r in range(n))
    from_inv = tuple(tuple(Vinv[i]) for i in keep)
    return FiniteAbelianGroup(factors, to_inv, from_inv)


def _unimodular_inverse(V: Matrix) -> Matrix:
    n = len(V)
    aug = [list(V[i]) + identity(n)[i] for i in range(n)]
    H, _ = hnf(aug)
    # H = [I | V^-1] once V is unimodular
    for i in range(n):
        if H[i][i] != 1:
            raise ValueError("matrix is not unimodular")
    return [row[n:] for row in H[:n]]


# ---------------------------------------------------------------------------
# homomorphisms


@dataclass(frozen=True)
class GroupHom:
    source: FiniteAbelianGroup
    target: FiniteAbelianGroup
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        M = tuple(tuple(int(x) % d for x, d in zip(row, self.target.invariant_factors))
                  for row in self.matrix)
        if len(M) != self.source.rank or any(len(r) != self.target.rank for r in self.matrix):
            raise ValueError("hom matrix has wrong shape")
        object.__setattr__(self, "matrix", M)
        for d, row in zip(self.source.invariant_factors, M):
            if any((d * x) % e for x, e in zip(row, self.target.invariant_factors)):
                raise ValueError("hom matrix does not respect generator orders")

    def __call__(self, x: Sequence[int]) -> tuple[int, ...]:
        return self.target.reduce(vecmat(x, self.matrix, self.target.rank))

    def compose(self, after: "GroupHom") -> "GroupHom":
        """``after`` o ``self``."""
        if after.source != self.source and after.source.invariant_factors != self.target.invariant_factors:
            raise ValueError("cannot compose: target/source mismatch")
        return GroupHom(self.source, after.target, matmul(self.matrix, after.matrix, after.target.rank))

    def equals(self, other: "GroupHom") -> bool:
        return self.matrix == other.matrix

    def is_injective(self) -> bool:
        return hom_kernel(self)[0].is_trivial()

    def is_surjective(self) -> bool:
        return hom_cokernel(self)[0].is_trivial()

    def is_isomorphism(self) -> bool:
        return self.source.order == self.target.order and self.is_injective()


def identity_hom(G: FiniteAbelianGroup) -> GroupHom:
    return GroupHom(G, G, identity(G.rank))


def zero_hom(G: FiniteAbelianGroup, H: FiniteAbelianGroup) -> GroupHom:
    return GroupHom(G, H, zeros(G.rank, H.rank))


def scalar_hom(G: FiniteAbelianGroup, c: int) -> GroupHom:
    return GroupHom(G, G, [[c * int(i == j) for j in range(G.rank)] for i in range(G.rank)])


class Subquotient:
    """The group span(gens) / span(rels) inside Z^dim, with rels in span(gens).

    ``embed`` lifts invariant coordinates to Z^dim; ``locate`` maps a vector
    of span(gens) to invariant coordinates.
    """

    def __init__(self, gens: Sequence[Sequence[int]], rels: Sequence[Sequence[int]], dim: int):
        self.dim = dim
        self.basis = hnf_basis([list(g) for g in gens] + [list(r) for r in rels], dim)
        k = len(self.basis)
        rel_coords = []
        for r in rels:
            c = solve_echelon(self.basis, r)
            if c is None:
                raise ValueError("relation outside generator lattice")
            rel_coords.append(c)
        self.group = group_from_relations(k, rel_coords)
        self._to_inv = self.group.to_invariant or ()
        self._from_inv = self.group.from_invariant or ()

    def embed(self, coords: Sequence[int]) -> list[int]:
        b = vecmat(coords, self._from_inv, len(self.basis))
        return vecmat(b, self.basis, self.dim)

    def generator_vectors(self) -> Matrix:
        return [self.embed([int(i == j) for j in range(self.group.rank)]) for i in range(self.group.rank)]

    def contains(self, v: Sequence[int]) -> bool:
        return solve_echelon(self.basis, v) is not None

    def locate(self, v: Sequence[int]) -> tuple[int, ...]:
        c = solve_echelon(self.basis, v)
        if c is None:
            raise ValueError("vector not in generator lattice")
        return self.group.reduce(vecmat(c, self._to_inv, self.group.rank))


def relation_rows(G: FiniteAbelianGroup) -> Matrix:
    r = G.rank
    return [[d if i == j else 0 for j in range(r)] for i, d in enumerate(G.invariant_factors)]


def kernel_lattice(M: Sequence[Sequence[int]], src_orders: Sequence[int], tgt_orders: Sequence[int]) -> Matrix:
    """Generators of ``{x in Z^r : x @ M == 0 mod tgt_orders}``; contains diag(src_orders)."""
    r, s = len(src_orders), len(tgt_orders)
    if s == 0:
        return identity(r)
    stacked = [list(row) for row in M] + [[-e if i == j else 0 for j in range(s)] for i, e in enumerate(tgt_orders)]
    K = left_kernel(stacked, s)
    gens = [k[:r] for k in K]
    gens += [[d if i == j else 0 for j in range(r)] for i, d in enumerate(src_orders)]
    return gens


def hom_kernel(f: GroupHom) -> tuple[FiniteAbelianGroup, GroupHom]:
    G = f.source
    gens = kernel_lattice(f.matrix, G.invariant_factors, f.target.invariant_factors)
    sq = Subquotient(gens, relation_rows(G), G.rank)
    K = sq.group
    incl = GroupHom(K, G, sq.generator_vectors())
    return K, incl


def hom_image(f: GroupHom) -> tuple[FiniteAbelianGroup, GroupHom]:
    H = f.target
    sq = Subquotient([list(r) for r in f.matrix] + relation_rows(H), relation_rows(H), H.rank)
    return sq.group, GroupHom(sq.group, H, sq.generator_vectors())


def hom_cokernel(f: GroupHom) -> tuple[FiniteAbelianGroup, GroupHom]:
    H = f.target
    Q = group_from_relations(H.rank, [list(r) for r in f.matrix] + relation_rows(H))
    proj = GroupHom(H, Q, Q.to_invariant or [[] for _ in range(H.rank)])
    return Q, proj


def quotient(G: FiniteAbelianGroup, subgroup_gens: Sequence[Sequence[int]]) -> tuple[FiniteAbelianGroup, GroupHom]:
    """G / <subgroup_gens> with its projection."""
    Q = group_from_relations(G.rank, [list(v) for v in subgroup_gens] + relation_rows(G))
    return Q, GroupHom(G, Q, Q.to_invariant or [[] for _ in range(G.rank)])


def subgroup(G: FiniteAbelianGroup, gens: Sequence[Sequence[int]]) -> tuple[FiniteAbelianGroup, GroupHom]:
    """<gens> <= G with its inclusion."""
    sq = Subquotient([list(v) for v in gens] + relation_rows(G), relation_rows(G), G.rank)
    return sq.group, GroupHom(sq.group, G, sq.generator_vectors())


def sylow_inclusion(G: FiniteAbelianGroup, p: int) -> GroupHom:
    P = sylow(G, p)
    rows = []
    for i, d in enumerate(G.invariant_factors):
        q = _ppart(d, p)
        if q > 1:
            rows.append([d // q if j == i else 0 for j in range(G.rank)])
    return GroupHom(P, G, rows)


def sylow_projection(G: FiniteAbelianGroup, p: int) -> GroupHom:
    P = sylow(G, p)
    rows = []
    k = 0
    for d in G.invariant_factors:
        q = _ppart(d, p)
        row = [0] * P.rank
        if q > 1:
            row[k] = pow(d // q, -1, q)
            k += 1
        rows.append(row)
    return GroupHom(G, P, rows)


def mod_n(G: FiniteAbelianGroup, n: int) -> tuple[FiniteAbelianGroup, GroupHom]:
    """G / nG with its projection."""
    return quotient(G, [[n * x for x in row] for row in identity(G.rank)])


def hom_order_lcm(orders: Iterable[int]) -> int:
    return reduce(lambda a, b: a * b // gcd(a, b), orders, 1)
