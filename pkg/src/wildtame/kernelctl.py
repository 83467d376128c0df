"""Wild and tame kernels of k = Q(sqrt(delta)) at p = 3, i = 2.

For delta in D (square-free, delta = -3 mod 9, delta != -3) we have
K = k(mu_3), k' = Q(sqrt(-delta/3)) and the local index
[K_2(o_k){3} : WK_2(k){3}] = 3.  The pipeline:

* order of K_2(o_k){3}: Birch-Tate for delta > 0, an ingested H^2 order
  for delta < 0;
* 3-rank: rk_3 A'_{k'} + 1 (Keune-Tate sequence, the (A'_K/3(1))_Delta term
  being the odd part of A'_K that comes from k');
* Psi(k') from tower or ray-class records;
* rules R0-R3 deciding whether WK_2(k){3} -> K_2(o_k){3} splits;
* iso types where (order, rank, verdict) force them.

Derived lemma used by keune_tate_rank.  Gal(K/Q) = {1, s, t, st} with
K^s = k, K^t = k', K^{st} = Q(sqrt(-3)).  Since 2 is prime to 3,
A'_K = sum over the four characters of Gal(K/Q), and the part on which
Delta = <s> acts by omega(s) = -1 is A'_K^{s=-1} = A'_{k'} + A'_{Q(sqrt -3)}
(the two characters nontrivial on s).  A'_{Q(sqrt -3)} = 0.  Twisting by one
multiplies the s-action by -1 mod 3, so (A'_K/3(1))_Delta = (A'_K)^{s=-1}/3
= A'_{k'}/3.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .exactalg import FiniteAbelianGroup, direct_sum, iso_type_equal, sylow
from .galmod import STANDARD_CHI, coinvariants, reduce_mod, tate_twist
from .iwasawa import (
    NotStabilizedError,
    TowerData,
    TowerInvariantError,
    criterion_kernel_m1,
    load_tower,
    psi_infinity_vanishes,
    psi,
    psi_lower_bound,
)
from .lvalues import in_delta_set, k2_order_3part, kronecker
from .nfengine.labels import kmu9_label
from .nfengine.records import ClassGroupRecord, RecordError, min_assurance
from .nfengine.sources import RecordSource
from .quadclass import fundamental_discriminant, s_class_group, squarefree_kernel

log = logging.getLogger(__name__)

BANNER = ("Assumes Leopoldt's and Gross's conjectures for the fields involved, and Greenberg's "
          "conjecture where Psi of a totally real Z_3-extension is used; class groups of "
          "non-quadratic fields come from GRH-conditional records.")

ANCHORS = {
    "LI": "local index [K2(o_k){3} : WK2(k){3}] is 3 iff delta = -3 mod 9 and delta != -3",
    "BT": "Birch-Tate: v3 #K2(o_k) = v3(24 zeta_k(-1)) = v3(B_2,chi) for these real k",
    "H2": "ingested order of H^2_et(o'_k, Z_3(2)) = K2(o_k){3}",
    "AK": "A'_{k'}: 3-part of the class group of the 3-integers of k'",
    "KT": "Keune-Tate: rk3 K2(o_k) = rk3 (A'_K/3(1))_Delta + 1 = rk3 A'_{k'} + 1",
    "PSI": "Psi(k') = ker((X'_{k'_inf})_Gamma -> A'_{k'}) = Psi(K)(1)^Delta",
    "CK": "m = 1 criterion kernel ker((X'/3(1))_G -> (A'_K/3(1))_Gal(K/k)); nonzero forbids splitting",
    "L1": "WK2(k){3} = (A'_{K_1} (x) mu_9)_Gal(K_1/k)",
    "ST": "structure synthesis from order, 3-rank and verdict",
    "DS": "H^2 of exponent 3: the descent surjection H^2 -> H^2_inf^Gamma splits",
    "R0": "WK2(k){3} = 0 iff Psi(k') = 0 and A'_{k'} = 0; the inclusion splits trivially",
    "R1": "Psi(k') = 0 implies WK2(k){3} -> K2(o_k){3} splits",
    "R2": "Psi(k') != 0 and A'_{k'} = 0 imply X'_{k'} != 0 and the inclusion does not split",
    "R3": "Psi(k') != 0 and A'_{k'} != 0: split iff K2(o_k){3} = WK2(k){3} + Z/3",
    "N0": "local index 1: WK2(k){3} = K2(o_k){3}",
    "ERR": "data error; no verdict",
}

VERDICTS = ("Split", "NonSplit", "TriviallySplit", "NeedsLevelOneData", "Unknown")


class InvariantViolation(AssertionError):
    """Internal consistency failure; always a bug or corrupt data."""


# ---------------------------------------------------------------------------
# small decision procedures


def local_mu_index(delta: int) -> int:
    return 3 if delta % 9 == 6 and delta != -3 else 1


def kprime_radicand(delta: int) -> int:
    return squarefree_kernel(-3 * delta)


def a_prime(d: int) -> FiniteAbelianGroup:
    """A' of Q(sqrt d): 3-part of the class group of the 3-integers."""
    return sylow(s_class_group(fundamental_discriminant(d), 3), 3)


def keune_tate_rank(delta: int, a_kprime: FiniteAbelianGroup | None = None) -> int:
    if not in_delta_set(delta):
        raise ValueError(f"delta = {delta} is not in D")
    A = a_prime(kprime_radicand(delta)) if a_kprime is None else a_kprime
    return A.p_rank(3) + 1


def wild_triviality(psi_group: FiniteAbelianGroup | None, a_kprime: FiniteAbelianGroup,
                    psi_exact: bool = True) -> str:
    """'trivial', 'nontrivial' or 'unknown' for WK2(k){3}.

    ``psi_exact = False`` means psi_group is only a lower bound (a quotient).
    """
    if not a_kprime.is_trivial():
        return "nontrivial"
    if psi_group is None:
        return "unknown"
    if not psi_group.is_trivial():
        return "nontrivial"
    return "trivial" if psi_exact else "unknown"


def abelian_split_decision(k2: FiniteAbelianGroup, wk: FiniteAbelianGroup,
                           quotient: FiniteAbelianGroup = FiniteAbelianGroup((3,))) -> str:
    if k2.order != wk.order * quotient.order:
        raise ValueError(f"|K2| = {k2.order} is not |WK| |Q| = {wk.order} * {quotient.order}")
    return "Split" if iso_type_equal(k2, direct_sum(wk, quotient)) else "NonSplit"


def wk_from_level_one(rec: ClassGroupRecord) -> FiniteAbelianGroup:
    """(A'_{K_1} (x) mu_9)_{Gal(K_1/k)}, Gal(K_1/k) generated by gamma and delta."""
    missing = {"gamma", "delta"} - set(rec.galois_actions)
    if missing:
        raise RecordError(f"{rec.label}: missing action data for {', '.join(sorted(missing))}")
    M = tate_twist(reduce_mod(rec.module(["gamma", "delta"]), 9), 1, STANDARD_CHI)
    return coinvariants(M, ["gamma", "delta"])[0]


def k2_from_order_rank(v3: int, rank: int) -> FiniteAbelianGroup | None:
    """The unique 3-group of order 3^v3 and rank <= 2, if forced."""
    if rank > v3 or rank < 0:
        raise InvariantViolation(f"3-rank {rank} exceeds v3 = {v3}")
    if rank == 0:
        return FiniteAbelianGroup(())
    if rank == 1:
        return FiniteAbelianGroup((3 ** v3,))
    if rank == 2:
        return FiniteAbelianGroup((3, 3 ** (v3 - 1)))
    if rank == v3:
        return FiniteAbelianGroup((3,) * rank)
    return None


def wk_forced(k2: FiniteAbelianGroup, verdict: str) -> FiniteAbelianGroup | None:
    """WK as an index-3 subgroup of k2, when k2 and the verdict determine it."""
    f = list(k2.invariant_factors)
    if verdict in ("Split", "TriviallySplit"):
        if 3 not in f:
            raise InvariantViolation(f"split verdict but {k2} has no Z/3 summand")
        f.remove(3)
        return FiniteAbelianGroup(tuple(f))
    if verdict == "NonSplit":
        if len(f) == 1:
            return FiniteAbelianGroup((f[0] // 3,))
        if len(f) == 2 and f[0] == 3 and f[1] >= 9:
            return FiniteAbelianGroup((3, f[1] // 3))
    if all(d == 3 for d in f) and f:  # every subgroup is a summand
        return FiniteAbelianGroup((3,) * (len(f) - 1))
    return None


# ---------------------------------------------------------------------------
# data sources


def load_h2_orders(paths: Iterable[Path]) -> dict[int, tuple[int, str]]:
    out: dict[int, tuple[int, str]] = {}
    for p in paths:
        if not p.is_file():
            continue
        for ln in p.read_text().splitlines():
            if not ln.strip() or ln.startswith("#"):
                continue
            parts = ln.split("\t")
            try:
                delta, v3 = int(parts[0]), int(parts[1])
            except (ValueError, IndexError):
                log.warning("%s: bad line %r", p, ln)
                continue
            out.setdefault(delta, (v3, parts[2].strip() if len(parts) > 2 else "ingested"))
    return out


class DataSources:
    def __init__(self, records: RecordSource | None = None, h2_paths: Iterable[Path] | None = None,
                 max_level: int = 1):
        self.records = records or RecordSource()
        if h2_paths is None:
            h2_paths = [Path(d) / "h2_orders.tsv" for d in self.records.dirs[:-1]] if self.records.dirs else []
            from importlib.resources import files
            h2_paths = list(h2_paths) + [Path(str(files("wildtame") / "data" / "h2_orders.tsv"))]
        self.h2 = load_h2_orders(h2_paths)
        self.max_level = max_level

    def tower(self, d: int) -> TowerData | None:
        D = fundamental_discriminant(d).D
        k3 = kronecker(D, 3)
        return load_tower(self.records, d, self.max_level, ramified=True,
                          primes_above_p=2 if k3 == 1 else 1, totally_real=d > 0)


# ---------------------------------------------------------------------------
# the report


@dataclass
class Evidence:
    rule: str
    inputs: dict[str, str]

    @property
    def anchor(self) -> str:
        return ANCHORS[self.rule]


@dataclass
class KernelReport:
    delta: int
    k: dict[str, str]
    k_prime: dict[str, str] | None
    local_index: int
    v3_order: int | None
    rank3: int | None
    wk_structure: FiniteAbelianGroup | None  # None = undetermined
    k2_structure: FiniteAbelianGroup | None
    verdict: str
    evidence: list[Evidence] = field(default_factory=list)
    assurance: str = "pinned"
    banner: str = BANNER

    def check(self) -> None:
        if self.verdict not in VERDICTS:
            raise InvariantViolation(f"unknown verdict {self.verdict}")
        if self.verdict in ("Split", "NonSplit") and self.assurance == "heuristic":
            raise InvariantViolation("a definite verdict rests on heuristic data")
        if self.wk_structure is not None and self.k2_structure is not None:
            if self.wk_structure.order * self.local_index != self.k2_structure.order:
                raise InvariantViolation(f"|WK| {self.local_index} != |K2| for delta = {self.delta}")
        if self.v3_order is not None and self.rank3 is not None and self.rank3 > self.v3_order:
            raise InvariantViolation(f"rank {self.rank3} > v3 {self.v3_order} for delta = {self.delta}")
        if self.k2_structure is not None and self.v3_order is not None \
                and self.k2_structure.order != 3 ** self.v3_order:
            raise InvariantViolation(f"K2 structure {self.k2_structure} has wrong order")
        fired = [e.rule for e in self.evidence if e.rule in ("R0", "R1", "R2", "R3")]
        if len(fired) > 1:
            raise InvariantViolation(f"rules {fired} fired together")


def _g(G: FiniteAbelianGroup | None) -> str:
    return "undetermined" if G is None else G.label()


def _field(d: int) -> dict[str, str]:
    return {"label": f"Q(sqrt({d}))", "discriminant": str(fundamental_discriminant(d).D)}


def analyze(delta: int, sources: DataSources | None = None) -> KernelReport:
    if delta in (0, 1) or squarefree_kernel(delta) != delta:
        raise ValueError(f"delta = {delta} must be a square-free integer other than 0 and 1")
    sources = sources or DataSources()
    idx = local_mu_index(delta)
    ev: list[Evidence] = [Evidence("LI", {"delta": str(delta), "index": str(idx)})]
    levels = ["pinned"]
    v3 = None
    if delta > 0 and in_delta_set(delta):
        v3 = k2_order_3part(delta)
        ev.append(Evidence("BT", {"v3": str(v3)}))
    elif delta in sources.h2:
        v3, prov = sources.h2[delta]
        ev.append(Evidence("H2", {"v3": str(v3), "provenance": prov}))
        levels.append("ingested-trusted")

    if not in_delta_set(delta):
        rep = KernelReport(delta, _field(delta), None, idx, v3, None, None, None, "TriviallySplit" if idx == 1
                           else "Unknown", ev, min_assurance(*levels))
        if idx == 1:
            ev.append(Evidence("N0", {}))
        rep.check()
        return rep

    dp = kprime_radicand(delta)
    A = a_prime(dp)
    ev.append(Evidence("AK", {"group": A.label()}))
    rank = keune_tate_rank(delta, A)
    ev.append(Evidence("KT", {"rank3": str(rank)}))
    if v3 is not None and rank > v3:
        raise InvariantViolation(f"delta = {delta}: rank {rank} > v3 {v3}")

    tower = sources.tower(dp)
    psi_group, psi_exact, ck = None, False, None
    if tower is not None:
        if not iso_type_equal(tower.group(0), A):
            raise InvariantViolation(f"delta = {delta}: record {tower.records[0].label} has A' = "
                                     f"{tower.group(0)}, forms give {A}")
        levels.append(tower.assurance)
        try:
            r = psi(tower)  # = Psi(K)(1)^Delta for quadratic k
            psi_group, psi_exact = r.group, True
            ck = criterion_kernel_m1(tower, 1)
            ev.append(Evidence("PSI", {"psi": psi_group.label(), "method": r.level}))
            ev.append(Evidence("CK", {"kernel": ck.label()}))
        except NotStabilizedError as e:
            lb = e.lower_bound or psi_lower_bound(tower)
            psi_group = lb.group if not lb.group.is_trivial() else None
            ev.append(Evidence("PSI", {"psi": "undetermined", "lower_bound": lb.group.label(),
                                       "method": lb.level}))
        except TowerInvariantError as e:
            raise InvariantViolation(str(e)) from None
    wt = wild_triviality(psi_group, A, psi_exact)

    verdict, wk, rule = "Unknown", None, None
    k2 = k2_from_order_rank(v3, rank) if v3 is not None else None
    if wt == "trivial":
        rule, verdict, wk = "R0", "TriviallySplit", FiniteAbelianGroup(())
    elif psi_group is not None and psi_exact and psi_group.is_trivial():
        rule, verdict = "R1", "Split"
    elif psi_group is not None and not psi_group.is_trivial() and A.is_trivial():
        rule, verdict = "R2", "NonSplit"
    elif psi_group is not None and not psi_group.is_trivial():
        rule = "R3"
        mu9 = sources.records.get(kmu9_label(delta))
        inputs = {}
        if mu9 is not None:
            wk = wk_from_level_one(mu9)
            levels.append(mu9.assurance)
            ev.append(Evidence("L1", {"record": mu9.label, "wk": wk.label()}))
            inputs["wk_from"] = "level one"
        elif k2 is not None and (wkf := wk_forced(k2, "Unknown")) is not None:
            wk = wkf
            inputs["wk_from"] = "forced by K2 of exponent 3"
        if wk is not None and k2 is not None:
            verdict = abelian_split_decision(k2, wk)
            inputs.update({"k2": k2.label(), "wk": wk.label()})
        else:
            verdict = "NeedsLevelOneData"
        ev.append(Evidence("R3", inputs))
    if rule in ("R0", "R1", "R2"):
        ev.append(Evidence(rule, {"psi": _g(psi_group) if psi_exact else "nonzero", "a_kprime": A.label()}))

    if ck is not None:
        if psi_group is not None and psi_exact and psi_group.is_trivial() and not ck.is_trivial():
            raise InvariantViolation(f"delta = {delta}: Psi = 0 but criterion kernel {ck}")
        if not ck.is_trivial() and verdict in ("Split", "TriviallySplit"):
            raise InvariantViolation(f"delta = {delta}: criterion kernel {ck} but verdict {verdict}")

    if k2 is not None and wk is None:
        wk = wk_forced(k2, verdict)
    if k2 is None and wk is not None and verdict in ("Split", "TriviallySplit"):
        k2 = direct_sum(wk, FiniteAbelianGroup((3,)))
    if wk is not None and k2 is not None and verdict in ("Split", "NonSplit", "TriviallySplit"):
        if abelian_split_decision(k2, wk) != ("NonSplit" if verdict == "NonSplit" else "Split"):
            raise InvariantViolation(f"delta = {delta}: {k2} vs {wk} contradicts verdict {verdict}")
    if k2 is not None or wk is not None:
        ev.append(Evidence("ST", {"k2": _g(k2), "wk": _g(wk)}))
    if k2 is not None and k2.invariant_factors and k2.exponent == 3:
        inf = psi_infinity_vanishes(tower) if tower is not None else None
        ev.append(Evidence("DS", {"h2": k2.label(), "psi_kprime_inf": "0" if inf else "undetermined"}))

    assurance = min_assurance(*levels)
    if verdict in ("Split", "NonSplit") and assurance == "heuristic":
        verdict = "Unknown"
    rep = KernelReport(delta, _field(delta), _field(dp), idx, v3, rank, wk, k2, verdict, ev, assurance)
    rep.check()
    return rep


def error_report(delta: int, err: Exception) -> KernelReport:
    k = _field(delta) if delta not in (0, 1) else {"label": f"Q(sqrt({delta}))", "discriminant": "undefined"}
    return KernelReport(delta, k, None, local_mu_index(delta), None, None, None, None, "Unknown",
                        [Evidence("ERR", {"error": f"{type(err).__name__}: {err}"})], "heuristic")


def delta_set(lo: int, hi: int) -> list[int]:
    return [d for d in range(lo, hi + 1) if in_delta_set(d)]


def scan(lo: int, hi: int, sources: DataSources | None = None) -> list[KernelReport]:
    sources = sources or DataSources()
    out = []
    for d in delta_set(lo, hi):
        try:
            out.append(analyze(d, sources))
        except (RecordError, ValueError, ArithmeticError) as e:
            out.append(error_report(d, e))
    return out
