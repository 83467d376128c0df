"""Field descriptions, class-group records and the WTREC text format.

A record file looks like::

    WTREC 1
    field Q_sqrt-239_L1 6 <coefficients low to high>
    group 3
    action gamma 1
    norm_to Q_sqrt-239_L0 1
    provenance ingested pari-2.15 bnfinit GRH

``group`` lists the invariant factors of the 3-part of the class group of
the ring of 3-integers (possibly none).  Matrices are row-major in the row
convention of :mod:`wildtame.exactalg`.  Lines starting with ``#`` are
comments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Mapping

from sympy import Poly, Symbol

from ..exactalg import FiniteAbelianGroup, GroupHom
from ..galmod import EquivarianceError, FiniteGaloisModule

MAX_DEGREE = 12
ASSURANCE_ORDER = {"heuristic": 0, "ingested-trusted": 1, "pinned": 2}

_x = Symbol("x")


class RecordError(ValueError):
    """A record violates one of the documented invariants."""


def min_assurance(*levels: str) -> str:
    return min(levels, key=ASSURANCE_ORDER.__getitem__) if levels else "pinned"


@dataclass(frozen=True)
class NumberFieldDesc:
    label: str
    coefficients: tuple[int, ...]  # low to high, monic

    @classmethod
    def from_coefficients(cls, coeffs, label: str) -> "NumberFieldDesc":
        return cls(label, tuple(int(c) for c in coeffs))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def poly(self) -> Poly:
        return Poly(list(reversed(self.coefficients)), _x)

    @cached_property
    def signature(self) -> tuple[int, int]:
        r1 = self.poly().count_roots()
        return r1, (self.degree - r1) // 2

    def validate(self, max_degree: int = MAX_DEGREE) -> None:
        if self.degree < 1:
            raise RecordError(f"field {self.label}: degree must be positive")
        if self.coefficients[-1] != 1:
            raise RecordError(f"field {self.label}: polynomial is not monic")
        if self.degree > max_degree:
            raise RecordError(f"field {self.label}: degree {self.degree} exceeds {max_degree}")
        if not self.poly().is_irreducible:
            raise RecordError(f"field {self.label}: polynomial is reducible")


def _provenance_kind(provenance: str) -> tuple[str, str]:
    words = provenance.split()
    if not words or words[0] not in ("computed", "ingested"):
        raise RecordError(f"provenance must start with 'computed' or 'ingested', got {provenance!r}")
    if words[0] == "ingested":
        return "ingested", "ingested-trusted"
    level = words[1] if len(words) > 1 else "heuristic"
    if level not in ("heuristic", "pinned"):
        raise RecordError(f"computed provenance needs an assurance of heuristic or pinned, got {level!r}")
    return "computed", level


@dataclass(frozen=True)
class ClassGroupRecord:
    field: NumberFieldDesc
    s_class_group: FiniteAbelianGroup
    galois_actions: Mapping[str, tuple[tuple[int, ...], ...]] = field(default_factory=dict)
    norm_to: tuple[str, tuple[tuple[int, ...], ...]] | None = None
    provenance: str = "computed heuristic"
    generator_ideals: tuple[str, ...] = ()

    def __post_init__(self):
        acts = {k: tuple(tuple(int(x) for x in row) for row in v) for k, v in dict(self.galois_actions).items()}
        object.__setattr__(self, "galois_actions", dict(sorted(acts.items())))
        if self.norm_to is not None:
            lab, M = self.norm_to
            object.__setattr__(self, "norm_to", (lab, tuple(tuple(int(x) for x in row) for row in M)))

    @property
    def label(self) -> str:
        return self.field.label

    @property
    def kind(self) -> str:
        return _provenance_kind(self.provenance)[0]

    @property
    def assurance(self) -> str:
        return _provenance_kind(self.provenance)[1]

    def module(self, names=None) -> FiniteGaloisModule:
        names = list(self.galois_actions) if names is None else list(names)
        G = self.s_class_group
        return FiniteGaloisModule(G, {n: GroupHom(G, G, self.galois_actions[n]) for n in names})

    def norm_hom(self, target: "ClassGroupRecord") -> GroupHom:
        if self.norm_to is None or self.norm_to[0] != target.label:
            raise RecordError(f"{self.label} has no norm map to {target.label}")
        return GroupHom(self.s_class_group, target.s_class_group, self.norm_to[1])

    def validate(self, max_degree: int = MAX_DEGREE) -> None:
        self.field.validate(max_degree)
        _provenance_kind(self.provenance)
        G = self.s_class_group
        for d in G.invariant_factors:
            if not _is_power_of(d, 3):
                raise RecordError(f"{self.label}: invariant factor {d} is not a power of 3")
        for name, M in self.galois_actions.items():
            if len(M) != G.rank or any(len(r) != G.rank for r in M):
                raise RecordError(f"{self.label}: action {name} has wrong shape")
            try:
                GroupHom(G, G, M)
            except ValueError as e:
                raise RecordError(f"{self.label}: action {name}: {e}") from None
        try:
            self.module()
        except EquivarianceError as e:
            raise RecordError(f"{self.label}: {e}") from None
        if self.norm_to is not None:
            lab, M = self.norm_to
            if len(M) != G.rank or len({len(r) for r in M}) > 1:
                raise RecordError(f"{self.label}: norm_to matrix has wrong shape")

    def validate_norm(self, target: "ClassGroupRecord") -> None:
        """Check that norm_to is a hom to ``target`` commuting with shared actions."""
        try:
            N = self.norm_hom(target)
        except ValueError as e:
            raise RecordError(f"{self.label}: norm_to: {e}") from None
        for name in set(self.galois_actions) & set(target.galois_actions):
            up = GroupHom(self.s_class_group, self.s_class_group, self.galois_actions[name])
            dn = GroupHom(target.s_class_group, target.s_class_group, target.galois_actions[name])
            if not up.compose(N).equals(N.compose(dn)):
                raise RecordError(f"{self.label}: norm_to is not equivariant for {name}")


def _is_power_of(d: int, p: int) -> bool:
    while d % p == 0:
        d //= p
    return d == 1


def _flat(M) -> list[str]:
    return [str(x) for row in M for x in row]


def format_record(rec: ClassGroupRecord) -> str:
    f = rec.field
    lines = ["WTREC 1",
             " ".join(["field", f.label, str(f.degree)] + [str(c) for c in f.coefficients]),
             " ".join(["group"] + [str(d) for d in rec.s_class_group.invariant_factors])]
    for name, M in rec.galois_actions.items():
        lines.append(" ".join(["action", name] + _flat(M)))
    if rec.norm_to is not None:
        lines.append(" ".join(["norm_to", rec.norm_to[0]] + _flat(rec.norm_to[1])))
    for g in rec.generator_ideals:
        lines.append(f"ideal {g}")
    lines.append(f"provenance {rec.provenance}")
    return "\n".join(lines) + "\n"


def _matrix(tokens: list[str], rows: int, what: str) -> tuple[tuple[int, ...], ...]:
    try:
        vals = [int(t) for t in tokens]
    except ValueError:
        raise RecordError(f"{what}: non-integer entry") from None
    if rows == 0:
        if vals:
            raise RecordError(f"{what}: entries given for an empty group")
        return ()
    if len(vals) % rows:
        raise RecordError(f"{what}: {len(vals)} entries do not fill {rows} rows")
    c = len(vals) // rows
    return tuple(tuple(vals[i * c:(i + 1) * c]) for i in range(rows))


def parse_record(text: str) -> ClassGroupRecord:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0].split() != ["WTREC", "1"]:
        raise RecordError("missing header 'WTREC 1'")
    fdesc = group = prov = norm = None
    actions: dict[str, tuple] = {}
    ideals = []
    pending_actions = []
    for ln in lines[1:]:
        key, _, rest = ln.partition(" ")
        tok = rest.split()
        if key == "field":
            if len(tok) < 3:
                raise RecordError("field line too short")
            label, deg = tok[0], int(tok[1])
            coeffs = [int(t) for t in tok[2:]]
            if len(coeffs) != deg + 1:
                raise RecordError(f"field {label}: degree {deg} needs {deg + 1} coefficients")
            fdesc = NumberFieldDesc(label, tuple(coeffs))
        elif key == "group":
            try:
                group = FiniteAbelianGroup(tuple(int(t) for t in tok))
            except ValueError as e:
                raise RecordError(f"group: {e}") from None
        elif key == "action":
            if not tok:
                raise RecordError("action line without a name")
            pending_actions.append((tok[0], tok[1:]))
        elif key == "norm_to":
            if not tok:
                raise RecordError("norm_to line without a label")
            norm = (tok[0], tok[1:])
        elif key == "ideal":
            ideals.append(rest)
        elif key == "provenance":
            prov = rest.strip()
        else:
            raise RecordError(f"unknown line type {key!r}")
    if fdesc is None or group is None or prov is None:
        raise RecordError("record needs field, group and provenance lines")
    for name, toks in pending_actions:
        if name in actions:
            raise RecordError(f"action {name} given twice")
        actions[name] = _matrix(toks, group.rank, f"action {name}")
    norm_to = None
    if norm is not None:
        norm_to = (norm[0], _matrix(norm[1], group.rank, "norm_to"))
    return ClassGroupRecord(fdesc, group, actions, norm_to, prov, tuple(ideals))


def read_record(path: str | Path) -> ClassGroupRecord:
    return parse_record(Path(path).read_text())


def write_record(rec: ClassGroupRecord, path: str | Path) -> None:
    Path(path).write_text(format_record(rec))


def ingest_record(path: str | Path, max_degree: int = MAX_DEGREE) -> ClassGroupRecord:
    """Read and validate a record; its provenance is marked as ingested."""
    rec = read_record(path)
    if not rec.provenance.startswith("ingested"):
        rec = ClassGroupRecord(rec.field, rec.s_class_group, rec.galois_actions, rec.norm_to,
                               "ingested " + rec.provenance, rec.generator_ideals)
    rec.validate(max_degree)
    return rec
