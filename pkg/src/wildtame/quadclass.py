"""Class groups of quadratic fields via binary quadratic forms.

Imaginary discriminants: enumerate reduced forms.  Real discriminants: the
class number comes from Dirichlet's finite log-sine formula with the
fundamental unit from a continued fraction; the structure is then built by
composing small prime forms until the subgroup they generate has that order.
For D > 0 the returned group is the wide (ideal) class group; the narrow
group differs from it only in its 2-part.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd, isqrt
from typing import Callable, Iterable

import mpmath
from sympy import factorint, primerange

from .exactalg import FiniteAbelianGroup, GroupHom, group_from_relations, quotient, vecmat
from .lvalues import DirichletCharacter, is_fundamental, kronecker

MAX_IMAGINARY = 10 ** 7
MAX_REAL = 10 ** 6


class TooLargeError(ValueError):
    pass


class PrecisionError(ArithmeticError):
    pass


@dataclass(frozen=True)
class QuadDiscriminant:
    delta: int
    D: int

    @property
    def is_real(self) -> bool:
        return self.D > 0


def fundamental_discriminant(delta: int) -> QuadDiscriminant:
    if delta in (0, 1):
        raise ValueError("delta must differ from 0 and 1")
    if any(e > 1 for e in factorint(abs(delta)).values()):
        raise ValueError(f"{delta} is not square-free")
    D = delta if delta % 4 == 1 else 4 * delta
    return QuadDiscriminant(delta, D)


def squarefree_kernel(n: int) -> int:
    """The square-free integer m with n = m * square."""
    s = -1 if n < 0 else 1
    m = 1
    for p, e in factorint(abs(n)).items():
        if e % 2:
            m *= p
    return s * m


# ---------------------------------------------------------------------------
# forms


@dataclass(frozen=True, order=True)
class BQF:
    a: int
    b: int
    c: int

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def is_primitive(self) -> bool:
        return gcd(gcd(self.a, self.b), self.c) == 1

    def inverse(self) -> "BQF":
        return BQF(self.a, -self.b, self.c)

    def __str__(self):
        return f"({self.a},{self.b},{self.c})"


def principal_form(D: int) -> BQF:
    b = D % 2
    return BQF(1, b, (b * b - D) // 4)


def _xgcd3(a: int, b: int, c: int) -> tuple[int, int, int, int]:
    from .exactalg import xgcd

    g1, x1, y1 = xgcd(a, b)
    g, u, z = xgcd(g1, c)
    return g, u * x1, u * y1, z


def compose(f: BQF, g: BQF) -> BQF:
    """Dirichlet composition, followed by reduction."""
    D = f.discriminant
    if g.discriminant != D:
        raise ValueError("forms have different discriminants")
    a1, b1, _ = f.a, f.b, f.c
    a2, b2, _ = g.a, g.b, g.c
    beta = (b1 + b2) // 2
    e, x, y, z = _xgcd3(a1, a2, beta)
    A = a1 * a2 // (e * e)
    B = (x * a1 * b2 + y * a2 * b1 + z * (b1 * b2 + D) // 2) // e
    B %= 2 * abs(A)
    C = (B * B - D) // (4 * A)
    return reduce(BQF(A, B, C))


def _normalize_definite(f: BQF) -> BQF:
    a, b = f.a, f.b
    r = (a - b) // (2 * a)
    b2 = b + 2 * r * a
    return BQF(a, b2, (b2 * b2 - f.discriminant) // (4 * a))


def _reduce_definite(f: BQF) -> BQF:
    if f.a < 0:
        raise ValueError("negative definite form")
    f = _normalize_definite(f)
    while f.a > f.c or (f.a == f.c and f.b < 0):
        f = _normalize_definite(BQF(f.c, -f.b, f.a))
    if f.a == f.c or f.a == f.b:
        f = BQF(f.a, abs(f.b), f.c)
    return f


def _lt_sqrt(x: int, D: int) -> bool:
    """x < sqrt(D) for non-square D > 0."""
    return x < 0 or x * x < D


def rho(f: BQF) -> BQF:
    """One step of the reduction operator for indefinite forms."""
    D = f.discriminant
    b, c = f.b, f.c
    cc = abs(c)
    s = isqrt(D)
    r0 = (-b) % (2 * cc)
    if _lt_sqrt(cc, D):
        # largest r = -b mod 2|c| with r < sqrt(D)
        r = r0 + 2 * cc * ((s - r0) // (2 * cc))
    else:
        r = r0 if r0 <= cc else r0 - 2 * cc
    return BQF(c, r, (r * r - D) // (4 * c))


def _reduce_indefinite(f: BQF) -> BQF:
    for _ in range(10 ** 6):
        if is_reduced_indefinite(f):
            return f
        f = rho(f)
    raise RuntimeError("indefinite reduction did not terminate")


def is_reduced_indefinite(f: BQF) -> bool:
    # |sqrt(D) - 2|a|| < b < sqrt(D)
    D = f.discriminant
    b, a2 = f.b, 2 * abs(f.a)
    if b <= 0 or not _lt_sqrt(b, D):
        return False
    # sqrt(D) - 2|a| < b  and  2|a| - sqrt(D) < b
    return (a2 + b) * (a2 + b) > D and _lt_sqrt(a2 - b, D)


def reduce(f: BQF) -> BQF:
    D = f.discriminant
    if D < 0:
        return _reduce_definite(f)
    return _reduce_indefinite(f)


def cycle(f: BQF) -> list[BQF]:
    """The rho-cycle of a reduced indefinite form."""
    f = _reduce_indefinite(f)
    out = [f]
    g = rho(f)
    while g != f:
        out.append(g)
        g = rho(g)
        if len(out) > 10 ** 6:
            raise RuntimeError("cycle too long")
    return out


def negative_principal_form(D: int) -> BQF:
    b = D % 2
    return BQF(-1, b, (D - b * b) // 4)


def narrow_canonical(f: BQF) -> BQF:
    if f.discriminant < 0:
        return _reduce_definite(f)
    return min(cycle(f))


# ---------------------------------------------------------------------------
# group structure from a generator stream


@dataclass
class _Enumerated:
    factors: FiniteAbelianGroup
    dlog: dict
    generators: list


def _build_structure(candidates: Iterable[BQF], op: Callable[[BQF, BQF], BQF], one: BQF,
                     canon: Callable[[BQF], BQF], order: int) -> _Enumerated:
    """Discover the group generated by candidates, stopping once it has ``order`` elements."""
    elems: dict[BQF, tuple[int, ...]] = {canon(one): ()}
    gens: list[BQF] = []
    rels: list[list[int]] = []
    for g in candidates:
        if len(elems) >= order:
            break
        cg = canon(g)
        if cg in elems:
            continue
        k = len(gens)
        power = g
        e = 1
        while canon(power) not in elems:
            power = op(power, g)
            e += 1
        prev = elems[canon(power)]
        rels = [r + [0] for r in rels]
        rels.append([-x for x in prev] + [e])
        new = {}
        stepper = one
        for i in range(e):
            for h, v in elems.items():
                new[canon(op(h, stepper)) if i else h] = v + (i,)
            stepper = op(stepper, g)
        elems = new
        gens.append(g)
        assert len(elems) == len(set(elems)) and k + 1 == len(gens)
    if len(elems) != order:
        raise ArithmeticError(f"generated subgroup has order {len(elems)}, expected {order}")
    n = len(gens)
    G = group_from_relations(n, rels) if n else FiniteAbelianGroup(())
    to_inv = G.to_invariant or [[] for _ in range(n)]
    dlog = {f: G.reduce(vecmat(v, to_inv, G.rank)) for f, v in elems.items()}
    inv_gens = []
    inv_of = {v: f for f, v in dlog.items()}
    for j in range(G.rank):
        inv_gens.append(inv_of[tuple(int(i == j) for i in range(G.rank))])
    return _Enumerated(G, dlog, inv_gens)


@dataclass
class FormClassGroup:
    discriminant: int
    group: FiniteAbelianGroup
    generator_forms: list[BQF]
    class_number: int
    narrow: bool = False
    _dlog: dict = field(default_factory=dict, repr=False)
    _canon: Callable[[BQF], BQF] | None = field(default=None, repr=False)
    fundamental_unit: tuple[int, int] | None = None

    def dlog(self, f: BQF) -> tuple[int, ...]:
        return self._dlog[self._canon(f)]

    def prime_forms(self, p: int) -> list[BQF]:
        return prime_forms(self.discriminant, p)

    def s_class_group(self, p: int) -> tuple[FiniteAbelianGroup, GroupHom]:
        """Quotient by the classes of the primes above p, with its projection."""
        return quotient(self.group, [self.dlog(f) for f in self.prime_forms(p)])


def prime_forms(D: int, p: int) -> list[BQF]:
    """Forms (p, b, c) for the primes above p (empty when p is inert)."""
    k = kronecker(D, p)
    if k == -1:
        return []
    out = []
    for b in range(0, 2 * p):
        if (b * b - D) % (4 * p) == 0:
            out.append(BQF(p, b, (b * b - D) // (4 * p)))
            if k == 0 or len(out) == 2:
                break
    return out[:1] if k == 0 else out


def reduced_forms_imaginary(D: int) -> list[BQF]:
    out = []
    amax = isqrt(-D // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            f = BQF(a, b, c)
            if f.is_primitive():
                out.append(f)
    return out


def class_group_imaginary(D: int) -> FormClassGroup:
    if D >= 0 or not is_fundamental(D):
        raise ValueError(f"{D} is not a negative fundamental discriminant")
    if -D > MAX_IMAGINARY:
        raise TooLargeError(f"|D| = {-D} is too large for form enumeration")
    forms = reduced_forms_imaginary(D)
    h = len(forms)
    one = principal_form(D)
    E = _build_structure(forms, compose, one, _reduce_definite, h)
    return FormClassGroup(D, E.factors, E.generators, h, False, E.dlog, _reduce_definite)


# ---------------------------------------------------------------------------
# real quadratic: unit, analytic class number, structure


def fundamental_unit(D: int) -> tuple[int, int, int]:
    """(x, y, n) with eps = (x + y sqrt(D)) / 2 the fundamental unit and n = N(eps)."""
    if D <= 0 or not is_fundamental(D):
        raise ValueError(f"{D} is not a positive fundamental discriminant")
    if D % 4 == 1:
        # omega = (1 + sqrt D)/2 ; element p - q*conj(omega) = (p - q) + q*omega
        P, Q = 1, 2
    else:
        P, Q = 0, 2
    s = isqrt(D)
    p0, p1 = 0, 1
    q0, q1 = 1, 0
    for _ in range(10 ** 6):
        a = (P + s) // Q
        p0, p1 = p1, a * p1 + p0
        q0, q1 = q1, a * q1 + q0
        p, q = p1, q1
        if D % 4 == 1:
            n = p * p - p * q + q * q * (1 - D) // 4
            x, y = 2 * p - q, q
        else:
            n = p * p - q * q * (D // 4)
            x, y = 2 * p, q
        if n in (1, -1):
            assert x * x - D * y * y == 4 * n
            return x, y, n
        P = a * Q - P
        Q = (D - P * P) // Q
    raise RuntimeError("continued fraction did not find a unit")


def log_unit(x: int, y: int, D: int, dps: int) -> mpmath.mpf:
    with mpmath.workdps(dps):
        return mpmath.log((x + y * mpmath.sqrt(D)) / 2)


def l1_times_sqrtD_real(D: int, dps: int) -> mpmath.mpf:
    """sqrt(D) * L(1, chi_D) = -sum_{a<D} chi(a) log sin(pi a / D) for D > 0 (finite, exact formula)."""
    chi = DirichletCharacter(D)
    tab = chi.table()
    with mpmath.workdps(dps):
        s = mpmath.mpf(0)
        for a in range(1, (D + 1) // 2):
            c = tab[a]
            if c:
                s += c * mpmath.log(mpmath.sin(mpmath.pi * a / D))
        # chi is even, so the sum is symmetric around D/2
        return -2 * s


def class_number_real(D: int, dps: int | None = None) -> tuple[int, tuple[int, int, int]]:
    """h(D) for D > 0 from h log(eps) = sqrt(D) L(1, chi)/2, and the unit."""
    x, y, n = fundamental_unit(D)
    dps = dps or 30 + len(str(D))
    with mpmath.workdps(dps):
        num = l1_times_sqrtD_real(D, dps) / 2
        h_est = num / log_unit(x, y, D, dps)
        h = int(mpmath.nint(h_est))
        # rounding error of each log-sine term is below 10^-(dps-2); D terms in all
        err = mpmath.mpf(D) * mpmath.mpf(10) ** (-(dps - 5))
        if h < 1 or abs(h_est - h) > mpmath.mpf("0.25") or abs(h_est - h) > 10 * err + mpmath.mpf(10) ** (-(dps // 2)):
            raise PrecisionError(f"raise precision: class number estimate {h_est} does not isolate an integer")
    return h, (x, y, n)


def minkowski_bound_real(D: int) -> int:
    return isqrt(D // 4) + 1


def class_group_real(D: int, narrow: bool = False) -> FormClassGroup:
    if D <= 0 or not is_fundamental(D):
        raise ValueError(f"{D} is not a positive fundamental discriminant")
    if D > MAX_REAL:
        raise TooLargeError(f"D = {D} is too large")
    h, unit = class_number_real(D)
    one = principal_form(D)
    neg = negative_principal_form(D)
    norm_neg = unit[2] == -1

    if narrow:
        canon = narrow_canonical
        order = h if norm_neg else 2 * h
    else:
        def canon(f: BQF) -> BQF:
            c1 = narrow_canonical(f)
            if norm_neg:
                return c1
            return min(c1, narrow_canonical(compose(f, neg)))
        order = h

    def candidates():
        if narrow and not norm_neg:
            yield neg
        for p in primerange(2, max(3, minkowski_bound_real(D) + 1)):
            for f in prime_forms(D, p):
                yield reduce(f)

    E = _build_structure(candidates(), compose, one, canon, order)
    return FormClassGroup(D, E.factors, E.generators, order, narrow, E.dlog, canon, unit[:2])


def class_group(D: int) -> FormClassGroup:
    return class_group_imaginary(D) if D < 0 else class_group_real(D)


def s_class_group(q: QuadDiscriminant, p: int) -> FiniteAbelianGroup:
    """Class group of the ring of p-integers (full quotient; apply sylow for A')."""
    return class_group(q.D).s_class_group(p)[0]


def kprime_delta(delta: int) -> int:
    """Square-free radicand of k' = Q(sqrt(-3 delta))."""
    return squarefree_kernel(-3 * delta)
