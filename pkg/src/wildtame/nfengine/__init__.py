"""Class-group data for small number fields: records, cache, generic engine."""

from .records import (
    ClassGroupRecord,
    NumberFieldDesc,
    RecordError,
    format_record,
    ingest_record,
    min_assurance,
    parse_record,
    read_record,
    write_record,
)
from .labels import kmu9_label, parse_tower_label, tower_label, xg_label
from .cache import CacheStore
from .engine import EngineError, InsufficientRelationsError, class_group_generic
from .polys import layer_field
from .sources import RecordSource, bundled_records_dir

__all__ = [
    "CacheStore",
    "EngineError",
    "InsufficientRelationsError",
    "RecordSource",
    "bundled_records_dir",
    "class_group_generic",
    "layer_field",
    "ClassGroupRecord",
    "NumberFieldDesc",
    "RecordError",
    "format_record",
    "ingest_record",
    "kmu9_label",
    "min_assurance",
    "parse_record",
    "parse_tower_label",
    "read_record",
    "tower_label",
    "write_record",
    "xg_label",
]
