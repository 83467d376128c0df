"""Look up records by label across data directories and the cache."""

from __future__ import annotations

import logging
from importlib.resources import files
from pathlib import Path

from .cache import CacheStore
from .records import ASSURANCE_ORDER, MAX_DEGREE, ClassGroupRecord, RecordError, ingest_record

log = logging.getLogger(__name__)


def bundled_records_dir() -> Path:
    return Path(str(files("wildtame") / "data" / "records"))


class RecordSource:
    """Directories are searched in order; the record of highest assurance wins,
    ties going to the earlier directory.  A cache, if given, is consulted last
    and follows the same rule."""

    def __init__(self, dirs=(), cache: CacheStore | None = None, bundled: bool = True,
                 max_degree: int = MAX_DEGREE):
        self.dirs = [Path(d) for d in dirs]
        if bundled:
            self.dirs.append(bundled_records_dir())
        self.cache = cache
        self.max_degree = max_degree
        self._memo: dict[str, ClassGroupRecord | None] = {}

    def _candidates(self, label: str):
        for d in self.dirs:
            p = d / f"{label}.wtrec"
            if p.is_file():
                try:
                    yield ingest_record(p, self.max_degree)
                except (RecordError, ValueError) as e:
                    log.warning("record %s rejected: %s", p, e)
        if self.cache is not None:
            rec = self.cache.get(label)
            if rec is not None:
                yield rec

    def get(self, label: str) -> ClassGroupRecord | None:
        if label not in self._memo:
            best = None
            for rec in self._candidates(label):
                if rec.label != label:
                    log.warning("file for %s holds %s; ignored", label, rec.label)
                    continue
                if best is None or ASSURANCE_ORDER[rec.assurance] > ASSURANCE_ORDER[best.assurance]:
                    best = rec
            self._memo[label] = best
        return self._memo[label]
