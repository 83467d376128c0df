"""Defining polynomials: quadratic fields, cyclotomic Z_3-layers, composita."""

from __future__ import annotations

from itertools import combinations, product

from sympy import Matrix, Poly, Symbol, discriminant, eye, zeros
from sympy.physics.quantum import TensorProduct

from ..quadclass import QuadDiscriminant
from .records import NumberFieldDesc

x = Symbol("x")
y = Symbol("y")


class DegenerateCompositumError(ArithmeticError):
    pass


def coeffs_low_high(p: Poly) -> tuple[int, ...]:
    return tuple(int(c) for c in reversed(p.all_coeffs()))


def poly_from_coeffs(coeffs, var=x) -> Poly:
    return Poly(list(reversed([int(c) for c in coeffs])), var)


def quadratic_order_poly(D: int) -> Poly:
    """Monic generator of the maximal order of discriminant D."""
    if D % 4 == 1:
        return Poly(x ** 2 - x + (1 - D) // 4, x)
    if D % 4 == 0:
        return Poly(x ** 2 - D // 4, x)
    raise ValueError(f"{D} is not a discriminant")


def real_cyclotomic_layer_poly(n: int, p: int = 3) -> Poly:
    """Minimal polynomial of zeta + zeta^-1 for zeta of order 3^(n+1)."""
    if p != 3:
        raise ValueError("only p = 3 is supported")
    f = Poly(x + 1, x)
    for _ in range(n):
        f = Poly(f.as_expr().subs(x, x ** 3 - 3 * x), x)
    return f


def canonical(f: Poly) -> Poly:
    """Pick between f(x) and +-f(-x): the lexicographically smaller list of coefficients from the top."""
    g = Poly(f.as_expr().subs(x, -x), x)
    if g.LC() < 0:
        g = -g
    return min(f, g, key=lambda h: [int(c) for c in h.all_coeffs()])


def _companion(f: Poly) -> Matrix:
    """Matrix of multiplication by the root on the power basis (row convention)."""
    c = [int(v) for v in reversed(f.all_coeffs())]
    n = len(c) - 1
    M = zeros(n, n)
    for i in range(n - 1):
        M[i, i + 1] = 1
    for j in range(n):
        M[n - 1, j] = -c[j]
    return M


def compositum_poly(f: Poly, g: Poly, max_terms: int = 2) -> Poly:
    """A small defining polynomial for Q[a]/f (x) Q[b]/g, assumed to be a field.

    Candidates are elements sum c_ij a^i b^j with at most ``max_terms`` nonzero
    coefficients in {-1, 1}; among those of full degree we keep the one of
    least |discriminant|, ties broken by the coefficient list.
    """
    Ma, Mb = _companion(f), _companion(g)
    m, n = f.degree(), g.degree()
    Ia, Ib = eye(m), eye(n)
    A = TensorProduct(Ma, Ib)
    B = TensorProduct(Ia, Mb)
    basis = {}
    for i in range(m):
        for j in range(n):
            if i or j:
                basis[(i, j)] = A ** i * B ** j
    best = None
    keys = sorted(basis)
    for k in range(1, max_terms + 1):
        for combo in combinations(keys, k):
            for signs in product((1, -1), repeat=k):
                M = sum((s * basis[key] for s, key in zip(signs, combo)), zeros(m * n, m * n))
                h = Poly(M.charpoly(x).as_expr(), x)
                dsc = int(discriminant(h.as_expr(), x))
                if dsc == 0:
                    continue
                key = (abs(dsc), [int(c) for c in canonical(h).all_coeffs()])
                if best is None or key < best[0]:
                    best = (key, canonical(h))
    if best is None or not best[1].is_irreducible:
        raise DegenerateCompositumError("no primitive element among the small candidates")
    return best[1]


def layer_field(base, n: int, p: int = 3, max_level: int = 1) -> NumberFieldDesc:
    """The n-th layer k_n = k B_n of the cyclotomic Z_p-extension of ``base``.

    ``base`` is a QuadDiscriminant, a NumberFieldDesc or None for Q.
    """
    if n < 0 or n > max_level:
        raise ValueError(f"level {n} outside 0..{max_level}")
    if base is None:
        bpoly, blabel = Poly(x, x), "Q"
    elif isinstance(base, QuadDiscriminant):
        bpoly, blabel = Poly(x ** 2 - base.delta, x), f"Q_sqrt{base.delta}"
    else:
        bpoly, blabel = poly_from_coeffs(base.coefficients), base.label
    if n == 0:
        return NumberFieldDesc(f"{blabel}_L0", coeffs_low_high(bpoly))
    t = real_cyclotomic_layer_poly(n, p)
    f = t if bpoly.degree() == 1 else compositum_poly(bpoly, t)
    return NumberFieldDesc(f"{blabel}_L{n}", coeffs_low_high(canonical(f)))
