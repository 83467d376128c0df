#!/usr/bin/env python3
"""Produce WTREC class-group records with PARI/GP (via cypari2).

This is an offline oracle; the wildtame package never imports PARI.  Class
groups come from bnfinit (GRH-conditional, as usual for PARI).  The S-class
group, its 3-part, Galois actions and norm maps are then expressed in the
invariant bases chosen by wildtame.exactalg so that the records are
self-consistent.

    python3 tools/gen_records.py tower -239 --levels 1 --out src/wildtame/data/records
    python3 tools/gen_records.py kmu9 4227 --out src/wildtame/data/records
    python3 tools/gen_records.py scan 1 5000 --levels 1 --out src/wildtame/data/records
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import cypari2

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from wildtame.exactalg import (  # noqa: E402
    FiniteAbelianGroup,
    GroupHom,
    Subquotient,
    group_from_relations,
    hom_kernel,
    quotient,
    relation_rows,
    subgroup,
    sylow_inclusion,
    sylow_projection,
    vecmat,
)
from wildtame.lvalues import in_delta_set  # noqa: E402
from wildtame.nfengine.records import ClassGroupRecord, NumberFieldDesc, write_record  # noqa: E402
from wildtame.nfengine.labels import kmu9_label, tower_label, xg_label  # noqa: E402
from wildtame.quadclass import squarefree_kernel  # noqa: E402

pari = cypari2.Pari()
pari.allocatemem(2 * 10 ** 9, silent=True)

GP = r"""
wt_next(nfb, relpol) = {
  my(rnf = rnfinit(nfb, relpol), Q = rnf.polabs, rb = polredbest(Q, 1), R = rb[1], a = rb[2]);
  [rnf, R, a, modreverse(a)];
}

wt_toR(e, a, R) = Mod(subst(lift(subst(lift(e), x, a)), x, y), subst(R, x, y));

wt_toQ(e, b) = subst(lift(e), y, b);

wt_findaut(bnf, fixes, moves) = {
  my(G = nfgaloisconj(bnf), ok);
  for (i = 1, #G,
    ok = 1;
    for (j = 1, #fixes, if (nfgaloisapply(bnf, G[i], fixes[j]) != fixes[j], ok = 0; break));
    if (ok, for (j = 1, #moves,
      if (nfgaloisapply(bnf, G[i], moves[j][1]) != moves[j][2], ok = 0; break)));
    if (ok, return(G[i])));
  error("automorphism not found");
}

wt_actmat(bnf, s) = {
  my(g = bnf.gen);
  matconcat(vector(#g, i, bnfisprincipal(bnf, nfgaloisapply(bnf, s, g[i]), 0)))~;
}

wt_sdlogs(bnf, p) = {
  my(P = idealprimedec(bnf, p));
  matconcat(vector(#P, i, bnfisprincipal(bnf, P[i], 0)))~;
}

wt_norm(bnf_up, rnf, b, bnf_dn, v) = {
  my(I = idealfactorback(bnf_up, bnf_up.gen, v, 1), H = idealhnf(bnf_up, I), Z, rel, J);
  Z = vector(#H, i, wt_toQ(nfbasistoalg(bnf_up, H[, i]), b));
  rel = rnfidealabstorel(rnf, Z);
  J = rnfidealnormrel(rnf, rel);
  bnfisprincipal(bnf_dn, J, 0)~;
}

wt_crt(bnf, P, m, i, u, extra) = {
  my(fa = matrix(#P, 2), y = vector(#P, j, if (j == i, u, 1)));
  for (j = 1, #P, fa[j, 1] = P[j]; fa[j, 2] = P[j].e * m + if (j == i, extra, 0));
  idealchinese(bnf, fa, y);
}

wt_raydata(bnf, m) = {
  my(bnr = bnrinit(bnf, 3^m, 1), P = idealprimedec(bnf, 3), loc = List(), a, gens);
  for (i = 1, #P,
    if (P[i].e != 1, error("ramified prime above 3"));
    for (j = 1, #bnf.zk,
      a = wt_crt(bnf, P, m, i, 1 + 3 * bnf.zk[j], 0);
      listput(loc, [i, -bnrisprincipal(bnr, a, 0)~]));
    a = wt_crt(bnf, P, m, i, 3, 1);
    listput(loc, [i, -bnrisprincipal(bnr, idealdiv(bnf, a, P[i]), 0)~]));
  gens = bnr.gen;
  [bnr.cyc, Vec(loc), vector(#gens, i, lift(Mod(idealnorm(bnf, gens[i]), 3^m)^2)),
   vector(#gens, i, bnfisprincipal(bnf, gens[i], 0)~)];
}
"""
for _def in GP.strip().split("\n\n"):
    pari(" ".join(_def.split()))


def ints(v) -> list[int]:
    return [int(t) for t in v]


def mat_rows(M, ncols: int) -> list[list[int]]:
    """PARI matrix -> list of rows (handles empty matrices)."""
    if ncols == 0:
        return []
    return [[int(M[i, j]) for j in range(ncols)] for i in range(int(pari.matsize(M)[0]))]


class Level:
    """A PARI bnf together with its 3-part S-class group in exactalg bases."""

    def __init__(self, bnf):
        self.bnf = bnf
        self.cyc = ints(bnf.bnf_get_cyc())
        r = len(self.cyc)
        self.r = r
        S = mat_rows(pari("wt_sdlogs")(bnf, 3), r)
        rels = [[c if i == j else 0 for j in range(r)] for i, c in enumerate(self.cyc)] + S
        if r == 0:
            self.GS = FiniteAbelianGroup(())
        else:
            self.GS = group_from_relations(r, rels)
        self.to_inv = [list(row) for row in (self.GS.to_invariant or [[] for _ in range(r)])]
        self.from_inv = [list(row) for row in (self.GS.from_invariant or [])]
        self.proj = sylow_projection(self.GS, 3)
        self.incl = sylow_inclusion(self.GS, 3)
        self.A = self.proj.target

    def lift(self, coords) -> list[int]:
        """A' coordinates -> exponent vector on bnf.gen."""
        g = self.incl(coords)
        v = vecmat(g, self.from_inv, self.r)
        return [x % c for x, c in zip(v, self.cyc)]

    def locate(self, v) -> tuple[int, ...]:
        """Exponent vector on bnf.gen -> A' coordinates."""
        g = self.GS.reduce(vecmat(v, self.to_inv, self.GS.rank))
        return self.proj(g)

    def action(self, s) -> list[list[int]]:
        M = mat_rows(pari("wt_actmat")(self.bnf, s), self.r) if self.r else []
        out = []
        for j in range(self.A.rank):
            e = [int(i == j) for i in range(self.A.rank)]
            v = self.lift(e)
            w = vecmat(v, M, self.r) if self.r else []
            out.append(list(self.locate(w)))
        GroupHom(self.A, self.A, out)
        return out

def _dlog4(a: int, m: int) -> int:
    q = 3 ** m
    x = 1
    for e in range(3 ** (m - 1)):
        if x == a % q:
            return e
        x = x * 4 % q
    raise ValueError(f"{a} is not in 1 + 3Z mod 3^{m}")


def _intersect(G, gens_a, gens_b):
    A, ia = subgroup(G, gens_a)
    _, q = quotient(G, gens_b)
    K, inc = hom_kernel(ia.compose(q))
    return [list(ia(inc([int(i == j) for j in range(K.rank)]))) for i in range(K.rank)]


def codescent_at(base: Level, m: int):
    """(X'_Gamma, map to A'_0, Psi) from the 3-part of the ray class group mod 3^m."""
    cyc, loc, norm2, cl = pari("wt_raydata")(base.bnf, m)
    cyc = ints(cyc)
    r = len(cyc)
    G = group_from_relations(r, [[c if i == j else 0 for j in range(r)] for i, c in enumerate(cyc)])
    to_inv = [list(row) for row in G.to_invariant]
    from_inv = [list(row) for row in G.from_invariant]
    p3 = sylow_projection(G, 3)
    i3 = sylow_inclusion(G, 3)
    G3 = p3.target

    def in_g3(v):
        return list(p3(G.reduce(vecmat(ints(v), to_inv, G.rank))))

    gamma_m = FiniteAbelianGroup((3 ** (m - 1),))
    pi_gens = [[_dlog4(int(a), m)] for a in norm2]
    pi = GroupHom(G, gamma_m, [vecmat(row, pi_gens, 1) for row in from_inv])
    pi3 = i3.compose(pi)
    W, iw = hom_kernel(pi3)
    w_gens = [list(iw([int(i == j) for j in range(W.rank)])) for i in range(W.rank)]
    places = sorted({int(v[0]) for v in loc})
    dv = {i: [in_g3(v[1]) for v in loc if int(v[0]) == i] for i in places}
    s_gens = []
    for i in places:
        s_gens += _intersect(G3, w_gens, dv[i])
    rel3 = relation_rows(G3)
    sq = Subquotient(w_gens + rel3, s_gens + rel3, G3.rank)
    # G3 -> bnf class-group exponents -> A'_0 coordinates
    cl_rows = [ints(c) for c in cl]
    to_a = []
    for e in range(G3.rank):
        g = vecmat(i3([int(i == e) for i in range(G3.rank)]), from_inv, r)
        to_a.append(list(base.locate(vecmat(g, cl_rows, base.r) if base.r else [])))
    XG = sq.group
    rows = [list(GroupHom(G3, base.A, to_a)(v)) for v in sq.generator_vectors()]
    N = GroupHom(XG, base.A, rows)
    A0, _ = quotient(G3, [v for i in places for v in dv[i]])
    if A0.invariant_factors != base.A.invariant_factors:
        raise ArithmeticError(f"ray class data gives A'_0 = {A0}, bnf gives {base.A}")
    Psi, _ = hom_kernel(N)
    return XG, N, Psi


def codescent(base: Level, m_start: int = 2, m_max: int = 14, agree: int = 3):
    hist = []
    for m in range(m_start, m_max + 1):
        XG, N, Psi = codescent_at(base, m)
        hist.append((XG.invariant_factors, Psi.invariant_factors))
        if len(hist) >= agree and len(set(hist[-agree:])) == 1:
            return XG, N, Psi, m
    raise ArithmeticError(f"codescent data did not stabilize up to m = {m_max}: {hist}")


def desc_of(bnf, label: str) -> NumberFieldDesc:
    pol = pari.substpol(bnf.nf_get_pol(), pari("y"), pari("x"))
    coeffs = [int(c) for c in pari.Vecrev(pol)]
    return NumberFieldDesc.from_coefficients(coeffs, label)


def tower(d: int, levels: int, out: Path, prov: str) -> list[ClassGroupRecord]:
    """Records for the cyclotomic Z_3-tower of Q(sqrt d), levels 0..levels."""
    recs = []
    t0 = time.time()
    R0 = pari(f"y^2 - ({d})")
    bnf = pari.bnfinit(R0, 1)
    cur = Level(bnf)
    sqrt_d = pari(f"Mod(y, y^2 - ({d}))")
    theta = None
    label0 = tower_label(d, 0)
    recs.append(ClassGroupRecord(desc_of(bnf, label0), cur.A, {"gamma": _identity(cur.A.rank)}, None, prov))
    XG, N, Psi, m = codescent(cur)
    recs.append(ClassGroupRecord(desc_of(bnf, xg_label(d)), XG, {}, (label0, N.matrix),
                                 f"{prov} ray-class-mod-3^{m}"))
    print(f"  {xg_label(d)}: X'_G = {XG}, Psi = {FiniteAbelianGroup(Psi.invariant_factors)} (m = {m})", flush=True)
    relpol = pari("x^3 - 3*x + 1")
    for n in range(1, levels + 1):
        if theta is not None:
            relpol = pari(f"x^3 - 3*x - ({pari.lift(theta)})")
        rnf, R, a, b = pari("wt_next")(cur.bnf, relpol)
        bnf_up = pari.bnfinit(pari.substpol(R, pari("x"), pari("y")), 1)
        up = Level(bnf_up)
        th_abs = pari.rnfeltreltoabs(rnf, pari("x"))
        theta_up = pari("wt_toR")(th_abs, a, R)
        sqrt_up = pari("wt_toR")(pari.rnfeltup(rnf, pari.lift(sqrt_d)), a, R)
        T4 = theta_up ** 4 - 4 * theta_up ** 2 + 2
        gamma = pari("wt_findaut")(bnf_up, [sqrt_up], [[theta_up, T4]])
        act = up.action(gamma)
        norm = []
        for j in range(up.A.rank):
            v = up.lift([int(i == j) for i in range(up.A.rank)])
            w = ints(pari("wt_norm")(bnf_up, rnf, b, cur.bnf, v)) if cur.r else []
            norm.append(list(cur.locate(w)) if cur.r else [])
        GroupHom(up.A, cur.A, norm)
        lab = tower_label(d, n)
        recs.append(ClassGroupRecord(desc_of(bnf_up, lab), up.A, {"gamma": act},
                                     (tower_label(d, n - 1), norm), prov))
        cur, sqrt_d, theta = up, sqrt_up, theta_up
        print(f"  {lab}: A' = {up.A}  ({time.time() - t0:.1f}s)", flush=True)
    for r in recs:
        write_record(r, out / f"{r.field.label}.wtrec")
    return recs


def _identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def kmu9(delta: int, out: Path, prov: str) -> ClassGroupRecord:
    """A'_{K_1} for K_1 = Q(sqrt delta, zeta_9) with gamma = sigma_4, delta = sigma_{-1}."""
    nf0 = pari.nfinit(pari(f"y^2 - ({delta})"))
    rnf, R, a, b = pari("wt_next")(nf0, pari("polcyclo(9, x)"))
    bnf = pari.bnfinit(pari.substpol(R, pari("x"), pari("y")), 1)
    L = Level(bnf)
    z = pari("wt_toR")(pari.rnfeltreltoabs(rnf, pari("x")), a, R)
    s = pari("wt_toR")(pari.rnfeltup(rnf, pari("y")), a, R)
    g = pari("wt_findaut")(bnf, [s], [[z, z ** 4]])
    dl = pari("wt_findaut")(bnf, [s], [[z, z ** 8]])
    rec = ClassGroupRecord(desc_of(bnf, kmu9_label(delta)), L.A,
                           {"gamma": L.action(g), "delta": L.action(dl)}, None, prov)
    write_record(rec, out / f"{rec.field.label}.wtrec")
    print(f"  {rec.field.label}: A' = {L.A}", flush=True)
    return rec


def kprime_radicand(delta: int) -> int:
    return squarefree_kernel(-3 * delta)


def main(argv=None):
    ap = argparse.ArgumentParser()
    sub = ap.add_subparsers(dest="cmd", required=True)
    t = sub.add_parser("tower")
    t.add_argument("d", type=int)
    t.add_argument("--levels", type=int, default=1)
    k = sub.add_parser("kmu9")
    k.add_argument("delta", type=int)
    s = sub.add_parser("scan")
    s.add_argument("lo", type=int)
    s.add_argument("hi", type=int)
    s.add_argument("--levels", type=int, default=1)
    for p in (t, k, s):
        p.add_argument("--out", type=Path, required=True)
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    ver = ".".join(str(int(v)) for v in pari.version()[:3])
    prov = f"ingested pari-{ver} bnfinit GRH"
    if args.cmd == "tower":
        tower(args.d, args.levels, args.out, prov)
    elif args.cmd == "kmu9":
        kmu9(args.delta, args.out, prov)
    else:
        for delta in range(args.lo, args.hi + 1):
            if not in_delta_set(delta):
                continue
            d = kprime_radicand(delta)
            if (args.out / f"{tower_label(d, args.levels)}.wtrec").exists():
                continue
            print(f"delta={delta} k'=Q(sqrt {d})", flush=True)
            tower(d, args.levels, args.out, prov)


if __name__ == "__main__":
    main()
