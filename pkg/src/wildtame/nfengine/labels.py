"""Canonical field labels used by records and towers.

``Q_sqrt<d>_L<n>``   level n of the cyclotomic Z_3-tower over Q(sqrt d)
``Q_sqrt<d>_mu9``    the field Q(sqrt d, zeta_9)
``Q_sqrt<d>_XG``     Gamma-coinvariants of X' over Q(sqrt d), with its map to level 0
"""

from __future__ import annotations

import re

_TOWER = re.compile(r"^Q_sqrt(-?\d+)_L(\d+)$")


def tower_label(d: int, n: int) -> str:
    return f"Q_sqrt{d}_L{n}"


def kmu9_label(delta: int) -> str:
    return f"Q_sqrt{delta}_mu9"


def xg_label(d: int) -> str:
    return f"Q_sqrt{d}_XG"


def parse_tower_label(label: str) -> tuple[int, int] | None:
    m = _TOWER.match(label)
    return (int(m.group(1)), int(m.group(2))) if m else None
