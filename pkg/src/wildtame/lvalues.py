"""Kronecker characters, B_{2,chi}, zeta_k(-1) and the Birch-Tate 3-part."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from sympy import factorint


def jacobi(a: int, n: int) -> int:
    if n <= 0 or n % 2 == 0:
        raise ValueError("jacobi needs odd positive n")
    a %= n
    s = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                s = -s
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            s = -s
        a %= n
    return s if n == 1 else 0


def kronecker(D: int, n: int) -> int:
    """Kronecker symbol (D|n)."""
    if n == 0:
        return 1 if D in (1, -1) else 0
    s = 1
    if n < 0:
        n = -n
        if D < 0:
            s = -s
    while n % 2 == 0:
        n //= 2
        if D % 2 == 0:
            return 0
        if D % 8 in (3, 5):
            s = -s
    return s * jacobi(D, n) if n > 1 else s


def is_fundamental(D: int) -> bool:
    if D in (0, 1):
        return False
    if D % 4 == 1:
        return _squarefree(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and _squarefree(m)
    return False


def _squarefree(n: int) -> bool:
    return all(e == 1 for e in factorint(abs(n)).values())


@dataclass(frozen=True)
class DirichletCharacter:
    """The Kronecker character a -> (D|a) of a fundamental discriminant D (D = 1 is trivial)."""

    D: int

    def __post_init__(self):
        if self.D != 1 and not is_fundamental(self.D):
            raise ValueError(f"{self.D} is not a fundamental discriminant")

    @property
    def conductor(self) -> int:
        return abs(self.D)

    @property
    def is_odd(self) -> bool:
        return self.D < 0

    def __call__(self, a: int) -> int:
        return kronecker(self.D, a)

    def table(self) -> tuple[int, ...]:
        return _table(self.D)


@lru_cache(maxsize=64)
def _table(D: int) -> tuple[int, ...]:
    f = abs(D)
    return tuple(kronecker(D, a) for a in range(f))


def bernoulli_b2_chi(chi: DirichletCharacter) -> Fraction:
    """B_{2,chi} = f * sum_{a=1}^{f} chi(a) B_2(a/f), with B_2(x) = x^2 - x + 1/6."""
    f = chi.conductor
    tab = chi.table()
    s2 = s1 = s0 = 0
    for a in range(1, f + 1):
        c = tab[a % f]
        if c:
            s2 += c * a * a
            s1 += c * a
            s0 += c
    return Fraction(s2, f) - s1 + Fraction(f * s0, 6)


def zeta_k_minus1(D: int) -> Fraction:
    """zeta_k(-1) for the real quadratic field of discriminant D: zeta(-1) L(-1, chi_D) = B_{2,chi}/24."""
    if D <= 0:
        raise ValueError("Birch-Tate order path requires totally real k")
    return bernoulli_b2_chi(DirichletCharacter(D)) / 24


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of zero")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def in_delta_set(delta: int) -> bool:
    """delta square-free, delta = -3 mod 9, delta != -3."""
    return delta not in (0, 1, -3) and delta % 9 == 6 and _squarefree(delta)


def fundamental_discriminant_of(delta: int) -> int:
    return delta if delta % 4 == 1 else 4 * delta


def k2_order_3part(delta: int) -> int:
    """v_3 of #K_2(o_k){3} for k = Q(sqrt(delta)), delta > 0 in the set D.

    For these k, mu_3 is not in k, so v_3(w_2(k)) = 1 = v_3(24) and the
    3-part of #K_2(o_k) is the 3-part of 24 * zeta_k(-1) = B_{2,chi}.
    """
    if delta <= 0 or not in_delta_set(delta):
        raise ValueError(f"delta = {delta} is not a positive element of the set D")
    z24 = abs(zeta_k_minus1(fundamental_discriminant_of(delta)) * 24)
    if z24.denominator % 3 == 0:
        raise ArithmeticError(f"denominator of 24*zeta_k(-1) divisible by 3 for delta = {delta}")
    v = valuation(z24.numerator, 3)
    return v


def class_number_imaginary_analytic(D: int) -> int:
    """h(D) = -(w / 2|D|) * sum_{a=1}^{|D|} chi(a) a  for D < 0."""
    if D >= 0:
        raise ValueError("needs D < 0")
    w = {-3: 6, -4: 4}.get(D, 2)
    chi = DirichletCharacter(D)
    f = chi.conductor
    tab = chi.table()
    s = sum(tab[a % f] * a for a in range(1, f + 1))
    h = Fraction(-w * s, 2 * f)
    if h.denominator != 1 or h <= 0:
        raise ArithmeticError(f"analytic class number formula gave {h} for D = {D}")
    return int(h)
