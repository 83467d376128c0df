"""On-disk record cache.

Layout: ``<dir>/index.tsv`` with lines ``label<TAB>params-hash<TAB>file`` and
one WTREC file per entry.  Writers take an advisory lock on ``index.lock``;
readers only need the index to be written atomically, which it is (write to
a temporary file, then rename).

Precedence: a record already in the cache is replaced only by one of strictly
higher assurance, or of equal assurance and the same kind (computed or
ingested).  So an ingested record shadows a heuristic computation but never a
pinned one.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path

from filelock import FileLock

from .records import ASSURANCE_ORDER, ClassGroupRecord, RecordError, format_record, parse_record

log = logging.getLogger(__name__)


def params_hash(params: dict | None) -> str:
    blob = json.dumps(params or {}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _filename(label: str, h: str) -> str:
    safe = "".join(c if c.isalnum() or c in "-_" else "_" for c in label)
    return f"{safe}.{h}.wtrec"


class CacheStore:
    def __init__(self, directory: str | Path):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self._index_path = self.dir / "index.tsv"
        self._lock = FileLock(str(self.dir / "index.lock"))

    def _read_index(self) -> dict[tuple[str, str], str]:
        out = {}
        if not self._index_path.exists():
            return out
        for ln in self._index_path.read_text().splitlines():
            parts = ln.split("\t")
            if len(parts) == 3:
                out[(parts[0], parts[1])] = parts[2]
            elif ln.strip():
                log.warning("cache index line ignored: %r", ln)
        return out

    def _write_index(self, index: dict[tuple[str, str], str]) -> None:
        text = "".join(f"{lab}\t{h}\t{fn}\n" for (lab, h), fn in sorted(index.items()))
        fd, tmp = tempfile.mkstemp(dir=self.dir, prefix=".index.")
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, self._index_path)

    def get(self, label: str, params: dict | None = None) -> ClassGroupRecord | None:
        fn = self._read_index().get((label, params_hash(params)))
        if fn is None:
            return None
        try:
            rec = parse_record((self.dir / fn).read_text())
            rec.validate()
        except (OSError, RecordError, ValueError) as e:
            log.warning("corrupt cache entry %s ignored: %s", fn, e)
            return None
        if rec.label != label:
            log.warning("cache entry %s holds %s, expected %s; ignored", fn, rec.label, label)
            return None
        return rec

    def put(self, rec: ClassGroupRecord, params: dict | None = None) -> str:
        """Store ``rec``; returns "stored", "already cached" or "kept existing"."""
        h = params_hash(params)
        with self._lock:
            index = self._read_index()
            old = None
            if (rec.label, h) in index:
                old = self.get(rec.label, params)
            if old is not None:
                if format_record(old) == format_record(rec):
                    return "already cached"
                a, b = ASSURANCE_ORDER[rec.assurance], ASSURANCE_ORDER[old.assurance]
                if a < b or (a == b and rec.kind != old.kind):
                    return "kept existing"
            fn = _filename(rec.label, h)
            (self.dir / fn).write_text(format_record(rec))
            index[(rec.label, h)] = fn
            self._write_index(index)
            return "stored"

    def labels(self) -> list[str]:
        return sorted({lab for lab, _ in self._read_index()})

    def clear(self) -> int:
        with self._lock:
            index = self._read_index()
            for fn in index.values():
                (self.dir / fn).unlink(missing_ok=True)
            self._index_path.unlink(missing_ok=True)
            return len(index)
