"""A toy Buchmann-style class-group engine for small monogenic fields.

The ring Z[theta] must be the maximal order (checked with Dedekind's
criterion), which covers quadratic fields with the standard generator and the
real cyclotomic fields Q(zeta_{3^k})^+.  Prime ideals come from factoring the
polynomial mod p; relations are found by factoring norms of small elements
over a factor base containing every prime of norm up to the Minkowski bound.

The relation lattice found is contained in the true one, so the group it
defines surjects onto the class group.  The answer is ``pinned`` when its
order matches an exact analytic class number (quadratic fields) or when it is
trivial; otherwise it is ``heuristic``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from sympy import GF, Poly, Symbol, discriminant, factorint, primerange
from sympy.polys.galoistools import gf_gcd

from ..exactalg import (
    FiniteAbelianGroup,
    NotFiniteError,
    det,
    group_from_relations,
    hnf_basis,
    identity,
    quotient,
    solve_echelon,
    sylow,
    vecmat,
)
from .records import ClassGroupRecord, NumberFieldDesc

x = Symbol("x")

MAX_GENERIC_DEGREE = 6
MAX_GENERIC_DISC = 10 ** 8


class EngineError(ArithmeticError):
    pass


class InsufficientRelationsError(EngineError):
    pass


class NotMaximalError(EngineError):
    pass


# ---------------------------------------------------------------------------
# arithmetic in Z[x]/(f)


class MonogenicOrder:
    def __init__(self, coeffs):
        self.f = tuple(int(c) for c in coeffs)  # low to high, monic
        if self.f[-1] != 1:
            raise ValueError("polynomial must be monic")
        self.n = len(self.f) - 1

    def mul(self, a, b) -> list[int]:
        n = self.n
        prod = [0] * (2 * n - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] += ai * bj
        for k in range(2 * n - 2, n - 1, -1):
            c = prod[k]
            if c:
                for j in range(n):
                    prod[k - n + j] -= c * self.f[j]
        return prod[:n]

    def theta_power(self, k: int) -> list[int]:
        v = [0] * self.n
        if k < self.n:
            v[k] = 1
            return v
        v[0] = 1
        t = self.theta_power(1)
        for _ in range(k):
            v = self.mul(v, t)
        return v

    def mult_matrix(self, a) -> list[list[int]]:
        rows = []
        cur = list(a)
        t = self.theta_power(1)
        for _ in range(self.n):
            rows.append(cur)
            cur = self.mul(cur, t)
        return rows

    def norm(self, a) -> int:
        return det(self.mult_matrix(a))

    def poly_at_theta(self, g_coeffs) -> list[int]:
        """g(theta) for g given low to high."""
        out = [0] * self.n
        pw = [1] + [0] * (self.n - 1)
        t = self.theta_power(1)
        for c in g_coeffs:
            out = [o + c * p for o, p in zip(out, pw)]
            pw = self.mul(pw, t)
        return out


# ---------------------------------------------------------------------------
# ideals as Z-lattices in Z^n


@dataclass(frozen=True)
class Ideal:
    basis: tuple[tuple[int, ...], ...]  # HNF rows

    @property
    def norm(self) -> int:
        return abs(math.prod(self.basis[i][i] for i in range(len(self.basis))))

    def contains(self, v) -> bool:
        return solve_echelon([list(r) for r in self.basis], list(v)) is not None


def ideal_from_gens(O: MonogenicOrder, gens) -> Ideal:
    rows = []
    t = O.theta_power(1)
    for g in gens:
        cur = list(g)
        for _ in range(O.n):
            rows.append(cur)
            cur = O.mul(cur, t)
    H = hnf_basis(rows, O.n)
    if len(H) != O.n:
        raise EngineError("ideal generators do not span a full lattice")
    return Ideal(tuple(tuple(r) for r in H))


def ideal_mul(O: MonogenicOrder, I: Ideal, J: Ideal) -> Ideal:
    rows = [O.mul(a, b) for a in I.basis for b in J.basis]
    return Ideal(tuple(tuple(r) for r in hnf_basis(rows, O.n)))


@dataclass
class PrimeIdeal:
    p: int
    residue_degree: int
    ramification: int
    generator: tuple[int, ...]  # g(theta), with P = (p, g(theta))
    lattice: Ideal
    powers: list = field(default_factory=list, repr=False)

    @property
    def norm(self) -> int:
        return self.p ** self.residue_degree

    def label(self) -> str:
        return f"P({self.p},{','.join(map(str, self.generator))})"


def _factor_mod_p(f_coeffs, p: int):
    P = Poly(list(reversed(f_coeffs)), x, modulus=p)
    _, facs = P.factor_list()
    out = []
    for g, e in facs:
        c = [int(v) % p for v in reversed(g.all_coeffs())]
        out.append((c, e))
    out.sort()
    return out


def prime_ideals_above(O: MonogenicOrder, p: int) -> list[PrimeIdeal]:
    out = []
    for g, e in _factor_mod_p(O.f, p):
        gen = O.poly_at_theta(g)
        pv = [p] + [0] * (O.n - 1)
        lat = ideal_from_gens(O, [pv, gen])
        P = PrimeIdeal(p, len(g) - 1, e, tuple(gen), lat)
        P.powers = [lat]
        out.append(P)
    return out


def _power(O: MonogenicOrder, P: PrimeIdeal, k: int) -> Ideal:
    while len(P.powers) < k:
        P.powers.append(ideal_mul(O, P.powers[-1], P.lattice))
    return P.powers[k - 1]


def valuation(O: MonogenicOrder, P: PrimeIdeal, a, bound: int) -> int:
    k = 0
    while k < bound and _power(O, P, k + 1).contains(a):
        k += 1
    return k


def is_p_maximal(f_coeffs, p: int) -> bool:
    """Dedekind's criterion for Z[x]/(f) at p."""
    dom = GF(p)
    F = Poly(list(reversed(f_coeffs)), x)
    facs = _factor_mod_p(f_coeffs, p)
    G = Poly(1, x)
    H = Poly(1, x)
    for g, e in facs:
        gp = Poly(list(reversed(g)), x)
        G *= gp
        H *= gp ** (e - 1)
    Fq = (G * H - F)
    if any(int(c) % p for c in Fq.all_coeffs()):
        raise EngineError("Dedekind lift is not divisible by p")
    Fq = Poly([int(c) // p for c in Fq.all_coeffs()], x)

    def red(P):
        return [int(c) % p for c in P.all_coeffs()]

    g1 = gf_gcd(red(Fq), red(G), p, dom)
    g2 = gf_gcd(g1, red(H), p, dom)
    return len(g2) <= 1


def check_maximal(f_coeffs) -> int:
    """Return disc(f) after checking that Z[theta] is maximal."""
    d = int(discriminant(Poly(list(reversed(f_coeffs)), x).as_expr(), x))
    for p, e in factorint(abs(d)).items():
        if e >= 2 and not is_p_maximal(f_coeffs, p):
            raise NotMaximalError(f"Z[theta] is not maximal at {p}; only monogenic maximal orders are supported")
    return d


def signature_of(f_coeffs) -> tuple[int, int]:
    P = Poly(list(reversed(f_coeffs)), x)
    r1 = P.count_roots()
    return r1, (P.degree() - r1) // 2


def minkowski_bound(n: int, r2: int, disc: int) -> float:
    return (4 / math.pi) ** r2 * math.factorial(n) / n ** n * math.sqrt(abs(disc))


# ---------------------------------------------------------------------------
# analytic class numbers used for pinning


def analytic_class_number(f_coeffs, disc: int) -> int | None:
    n = len(f_coeffs) - 1
    if n == 1:
        return 1
    if n == 2:
        from ..lvalues import class_number_imaginary_analytic
        from ..quadclass import class_number_real

        return class_number_imaginary_analytic(disc) if disc < 0 else class_number_real(disc)[0]
    return None


# ---------------------------------------------------------------------------


@dataclass
class EngineResult:
    field: NumberFieldDesc
    class_group: FiniteAbelianGroup
    s_class_group: FiniteAbelianGroup  # full S-class group, S = primes above s_prime
    assurance: str
    factor_base: list[str]
    relations: int

    def record(self) -> ClassGroupRecord:
        A = sylow(self.s_class_group, 3)
        return ClassGroupRecord(self.field, A, {}, None, f"computed {self.assurance} generic-engine")


def _small_elements(n: int, radius: int):
    rng = range(-radius, radius + 1)
    for v in itertools.product(rng, repeat=n):
        if max(map(abs, v)) == radius and any(v[1:]):
            yield list(v)


def class_group_generic(fdesc: NumberFieldDesc, factor_base_bound: float | None = None,
                        s_prime: int = 3, max_radius: int = 60, max_disc: int = MAX_GENERIC_DISC,
                        extra_rounds: int = 3) -> EngineResult:
    f = fdesc.coefficients
    n = len(f) - 1
    if n > MAX_GENERIC_DEGREE:
        raise EngineError(f"degree {n} exceeds the generic engine limit {MAX_GENERIC_DEGREE}")
    if not Poly(list(reversed(f)), x).is_irreducible:
        raise EngineError("polynomial is reducible")
    disc = int(discriminant(Poly(list(reversed(f)), x).as_expr(), x))
    if abs(disc) > max_disc:
        raise EngineError(f"|disc| = {abs(disc)} exceeds bound {max_disc}")
    check_maximal(f)
    O = MonogenicOrder(f)
    r1, r2 = signature_of(f)
    mb = minkowski_bound(n, r2, disc)
    bound = max(mb, factor_base_bound or 0)
    fb: list[PrimeIdeal] = []
    for p in primerange(2, int(bound) + 1):
        for P in prime_ideals_above(O, p):
            if P.norm <= bound:
                fb.append(P)
    s_primes = prime_ideals_above(O, s_prime)
    for P in s_primes:
        if all((Q.p, Q.generator) != (P.p, P.generator) for Q in fb):
            fb.append(P)
    by_p: dict[int, list[int]] = {}
    for i, P in enumerate(fb):
        by_p.setdefault(P.p, []).append(i)
    complete_p = {p for p, idx in by_p.items()
                  if sum(fb[i].residue_degree * fb[i].ramification for i in idx) == n}
    s_idx = [i for i, P in enumerate(fb) if P.p == s_prime]
    h_exact = analytic_class_number(f, disc)
    k = len(fb)

    def factor(a) -> list[int] | None:
        N = O.norm(a)
        if N == 0:
            return None
        vec = [0] * k
        for p, e in factorint(abs(N)).items():
            if p not in by_p:
                return None
            used = 0
            for i in by_p[p]:
                P = fb[i]
                v = valuation(O, P, a, e // P.residue_degree)
                vec[i] = v
                used += v * P.residue_degree
            if used != e:
                return None
        return vec

    rels: list[list[int]] = []
    if k:
        for p in sorted(by_p):
            if p in complete_p:
                rels.append(factor([p] + [0] * (n - 1)))
    group = None
    stable = 0
    last = None
    for radius in range(1, max_radius + 1):
        if k == 0:
            group = FiniteAbelianGroup(())
            break
        for a in _small_elements(n, radius):
            r = factor(a)
            if r is not None and any(r):
                rels.append(r)
        try:
            group = group_from_relations(k, rels)
        except NotFiniteError:
            continue
        if h_exact is not None:
            if group.order == h_exact:
                break
            if group.order < h_exact:
                raise EngineError(f"relation lattice too large: order {group.order} < h = {h_exact}")
            continue
        if group.order == 1:
            break
        stable = stable + 1 if group == last else 0
        last = group
        if stable >= extra_rounds:
            break
    else:
        raise InsufficientRelationsError(
            f"insufficient relations: {len(rels)} relations on {k} primes up to radius {max_radius}"
            + (f", current order {group.order} vs h = {h_exact}" if group is not None else ""))
    if h_exact is not None:
        assurance = "pinned"
    else:
        assurance = "pinned" if group.order == 1 else "heuristic"
    if k:
        sgroup, _ = quotient(group, [group.reduce(vecmat(e, group.to_invariant, group.rank))
                                     for e in (identity(k)[i] for i in s_idx)])
    else:
        sgroup = group
    return EngineResult(fdesc, FiniteAbelianGroup(group.invariant_factors), FiniteAbelianGroup(sgroup.invariant_factors),
                        assurance, [P.label() for P in fb], len(rels))
