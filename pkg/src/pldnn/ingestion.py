"""Attribute-value tables (CSV with a header row) to training transitions.

Each row becomes one transition: its feature cells form the first event and
its target cells the next one. A schema file (JSON) says which column plays
which role::

    {"columns": [
        {"name": "hair", "role": "feature", "kind": "boolean"},
        {"name": "legs", "role": "feature", "kind": "categorical"},
        {"name": "animal", "role": "target", "kind": "categorical"}],
     "missing": ["?", ""], "strict": false}

Columns present in the file but absent from the schema are ignored.
"""

from __future__ import annotations

import csv
import json
import os
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Any

from pldnn.errors import InvalidArgument, PLDNNError
from pldnn.events import Event, Lit, Transition
from pldnn.persistence import save_event_log

ROLES = ("feature", "target", "ignore")
KINDS = ("boolean", "categorical")
TRUE_VALUES = frozenset({"1", "true", "t", "yes", "y"})
FALSE_VALUES = frozenset({"0", "false", "f", "no", "n"})


class SchemaError(PLDNNError, ValueError):
    pass


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    role: str = "feature"
    kind: str = "boolean"
    domain: tuple[str, ...] | None = None
    label: str | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise SchemaError("column name must not be empty")
        if self.role not in ROLES:
            raise SchemaError(f"column {self.name!r}: role must be one of {ROLES}")
        if self.kind not in KINDS:
            raise SchemaError(f"column {self.name!r}: kind must be one of {KINDS}")
        if self.domain is not None:
            object.__setattr__(self, "domain", tuple(str(v) for v in self.domain))

    @property
    def thing(self) -> str:
        """Label prefix for this column's neurons."""
        return self.label or self.name

    def value_label(self, value: str) -> str:
        return f"{self.thing}={value}"


@dataclass(frozen=True)
class DatasetSchema:
    columns: tuple[ColumnSpec, ...]
    missing: frozenset[str] = frozenset({"?", ""})
    strict: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "missing", frozenset(self.missing))
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate column in schema")
        if not self.features or not self.targets:
            raise SchemaError("schema needs at least one feature and one target column")

    @property
    def features(self) -> tuple[ColumnSpec, ...]:
        return tuple(c for c in self.columns if c.role == "feature")

    @property
    def targets(self) -> tuple[ColumnSpec, ...]:
        return tuple(c for c in self.columns if c.role == "target")

    def column(self, name: str) -> ColumnSpec:
        for c in self.columns:
            if c.name == name:
                return c
        raise SchemaError(f"no column {name!r} in schema")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> DatasetSchema:
        raw = data.get("columns")
        if isinstance(raw, Mapping):
            raw = [{"name": k, **v} for k, v in raw.items()]
        if not isinstance(raw, list):
            raise SchemaError("schema needs a 'columns' list")
        try:
            columns = tuple(ColumnSpec(**c) for c in raw)
        except TypeError as exc:
            raise SchemaError(f"bad column entry: {exc}") from None
        return cls(
            columns,
            frozenset(data.get("missing", ("?", ""))),
            bool(data.get("strict", False)),
        )

    @classmethod
    def load(cls, path: str | os.PathLike) -> DatasetSchema:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        cols = []
        for c in self.columns:
            entry: dict[str, Any] = {"name": c.name, "role": c.role, "kind": c.kind}
            if c.domain is not None:
                entry["domain"] = list(c.domain)
            if c.label is not None:
                entry["label"] = c.label
            cols.append(entry)
        return {"columns": cols, "missing": sorted(self.missing), "strict": self.strict}


def parse_boolean(value: str) -> bool:
    v = value.strip().lower()
    if v in TRUE_VALUES:
        return True
    if v in FALSE_VALUES:
        return False
    raise InvalidArgument(f"not a boolean: {value!r}")


def _value_key(value: str) -> tuple:
    # numeric values sort numerically so "legs=10" follows "legs=8"
    try:
        return (0, float(value), value)
    except ValueError:
        return (1, 0.0, value)


def expand_attribute(
    column: ColumnSpec | str,
    value: str,
    schema: DatasetSchema | None = None,
    domain: Sequence[str] | None = None,
) -> set[Lit]:
    """Literals one cell contributes to a feature event.

    Boolean: one literal, positive iff true. Categorical: ``+col=value`` and a
    negative literal for every other value of the column's domain.
    """
    if isinstance(column, str):
        if schema is None:
            raise InvalidArgument("a column name needs a schema")
        column = schema.column(column)
    value = value.strip()
    if column.kind == "boolean":
        return {Lit(column.thing, parse_boolean(value))}
    values = column.domain if column.domain is not None else domain
    if values is None:
        values = (value,)
    if value not in values:
        raise InvalidArgument(f"column {column.name!r}: {value!r} is outside the domain")
    return {Lit(column.value_label(value), True)} | {
        Lit(column.value_label(v), False) for v in values if v != value
    }


def target_literals(column: ColumnSpec, value: str) -> set[Lit]:
    """Targets name what happens: only the observed value, never its siblings."""
    value = value.strip()
    if column.kind == "boolean":
        return {Lit(column.thing, parse_boolean(value))}
    if column.domain is not None and value not in column.domain:
        raise InvalidArgument(f"column {column.name!r}: {value!r} is outside the domain")
    return {Lit(column.value_label(value), True)}


@dataclass(frozen=True)
class RecordTransition:
    transition: Transition
    row: int

    @property
    def pre(self) -> Event:
        return self.transition.pre

    @property
    def post(self) -> Event:
        return self.transition.post


@dataclass(frozen=True)
class RowError:
    row: int
    message: str


@dataclass
class LoadResult(Sequence[RecordTransition]):
    """Loaded rows; indexes like a list of :class:`RecordTransition`."""

    records: list[RecordTransition]
    errors: list[RowError] = field(default_factory=list)
    columns: tuple[str, ...] = ()

    def __getitem__(self, index):  # type: ignore[override]
        return self.records[index]

    def __len__(self) -> int:
        return len(self.records)

    def transitions(self) -> list[Transition]:
        return [r.transition for r in self.records]


def _observed_domains(
    rows: list[tuple[int, dict[str, str]]], schema: DatasetSchema
) -> dict[str, tuple[str, ...]]:
    seen: dict[str, set[str]] = {
        c.name: set() for c in schema.columns if c.kind == "categorical" and c.domain is None
    }
    for _, row in rows:
        for name, values in seen.items():
            cell = (row.get(name) or "").strip()
            if cell not in schema.missing:
                values.add(cell)
    return {name: tuple(sorted(v, key=_value_key)) for name, v in seen.items()}


def _row_transition(
    row: Mapping[str, str],
    schema: DatasetSchema,
    domains: Mapping[str, tuple[str, ...]],
) -> Transition:
    pre: set[Lit] = set()
    post: set[Lit] = set()
    for col in schema.columns:
        if col.role == "ignore":
            continue
        cell = (row.get(col.name) or "").strip()
        if cell in schema.missing:
            raise InvalidArgument(f"missing value in column {col.name!r}")
        if col.role == "feature":
            pre |= expand_attribute(col, cell, domain=domains.get(col.name))
        else:
            post |= target_literals(col, cell)
    return Transition(Event.from_literals(pre), Event.from_literals(post))


def read_records(
    stream: IO[str], schema: DatasetSchema, source: str = "<data>"
) -> LoadResult:
    reader = csv.DictReader(stream)
    header = tuple(h.strip() for h in reader.fieldnames or ())
    if not header:
        return LoadResult([], [], ())
    reader.fieldnames = list(header)
    absent = [c.name for c in schema.columns if c.name not in header]
    if absent:
        raise SchemaError(f"{source}: column(s) {absent} not in header")

    rows = list(enumerate(reader))
    domains = _observed_domains(rows, schema)
    records, errors = [], []
    for index, row in rows:
        try:
            records.append(RecordTransition(_row_transition(row, schema, domains), index))
        except InvalidArgument as exc:
            if schema.strict and "outside the domain" in str(exc):
                raise InvalidArgument(f"{source} row {index}: {exc}") from None
            errors.append(RowError(index, str(exc)))
    return LoadResult(records, errors, header)


def load_records(path: str | os.PathLike, schema: DatasetSchema) -> LoadResult:
    """Read a CSV file into one transition per usable row, in file order.

    Unusable rows (missing or unparseable cells) are skipped and listed in
    ``errors`` with their 0-based data-row index.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        return read_records(fh, schema, str(path))


# -- conflicting duplicates ---------------------------------------------------


def find_conflicts(records: Iterable[RecordTransition]) -> dict[Event, list[RecordTransition]]:
    """Groups of rows with the same first event but different next events."""
    groups: dict[Event, list[RecordTransition]] = {}
    for r in records:
        groups.setdefault(r.pre, []).append(r)
    return {
        pre: rows
        for pre, rows in groups.items()
        if len({r.post for r in rows}) > 1
    }


@dataclass(frozen=True)
class DedupeResult:
    records: list[RecordTransition]
    conflicts: int
    removed: int


def dedupe_conflicts(records: Sequence[RecordTransition]) -> DedupeResult:
    """Drop every row of every conflicting group; order of the rest is kept."""
    conflicts = find_conflicts(records)
    kept = [r for r in records if r.pre not in conflicts]
    return DedupeResult(kept, len(conflicts), len(records) - len(kept))


def first_distinct(records: Iterable[RecordTransition], n: int) -> list[RecordTransition]:
    """The first ``n`` rows, in file order, whose first events are pairwise distinct."""
    out, seen = [], set()
    for r in records:
        if r.pre in seen:
            continue
        seen.add(r.pre)
        out.append(r)
        if len(out) == n:
            break
    return out


def write_transitions(
    records: Iterable[RecordTransition | Transition], sink: str | os.PathLike | IO[str]
) -> None:
    """Write rows in the event-log format so they can be replayed later."""
    save_event_log(
        (r.transition if isinstance(r, RecordTransition) else r for r in records), sink
    )
