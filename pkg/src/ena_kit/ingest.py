"""Coded-utterance tables: parsing, validation and the analysis configuration.

Everything downstream of this module consumes the immutable structures
defined here (:class:`Codebook`, :class:`CodedTable`, :class:`AnalysisConfig`)
and never touches raw CSV text.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from importlib import resources
from itertools import combinations
from pathlib import Path
from typing import Any, Iterable, Mapping, NamedTuple, Sequence

import jsonschema

#: Joins the values of several key columns into one composite key.
KEY_SEP = "::"

ERROR = "error"
WARNING = "warning"


class SchemaError(ValueError):
    """The input does not have the expected shape (columns, encoding, config keys)."""


class CodeValueError(ValueError):
    """A code (or rating) cell holds something other than the literal 0 or 1."""

    def __init__(self, message: str, row: int):
        super().__init__(message)
        self.row = row


class ValidationError(Exception):
    """Raised when error-severity diagnostics block a computation."""

    def __init__(self, diagnostics: "Diagnostics"):
        self.diagnostics = diagnostics
        lines = [d.format() for d in diagnostics.errors]
        super().__init__("; ".join(lines) or "validation failed")


@dataclass(frozen=True)
class Codebook:
    """Ordered code names; the order fixes every pair-indexed vector."""

    codes: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "codes", tuple(self.codes))
        if len(self.codes) < 2:
            raise SchemaError("a codebook needs at least two codes")
        if any(not isinstance(c, str) or not c for c in self.codes):
            raise SchemaError("code names must be non-empty strings")
        if len(set(self.codes)) != len(self.codes):
            raise SchemaError(f"duplicate code names in {list(self.codes)}")

    @property
    def k(self) -> int:
        return len(self.codes)

    @property
    def n_pairs(self) -> int:
        return self.k * (self.k - 1) // 2

    @property
    def pair_order(self) -> tuple[tuple[str, str], ...]:
        # combinations() walks the upper triangle row by row
        return tuple(combinations(self.codes, 2))

    @property
    def pair_indices(self) -> tuple[tuple[int, int], ...]:
        return tuple(combinations(range(self.k), 2))

    def pair_names(self) -> list[str]:
        return [f"{a} & {b}" for a, b in self.pair_order]


@dataclass(frozen=True)
class AnalysisConfig:
    code_columns: tuple[str, ...]
    unit_columns: tuple[str, ...]
    stanza_columns: tuple[str, ...]
    group_column: str
    groups: tuple[str, str]
    dimensions: int = 2
    out_dir: str = "ena_out"
    rater_columns: tuple[str, str] | None = None
    style: Mapping[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        for name in ("code_columns", "unit_columns", "stanza_columns", "groups"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.rater_columns is not None:
            object.__setattr__(self, "rater_columns", tuple(self.rater_columns))
            if len(self.rater_columns) != 2:
                raise SchemaError("rater_columns must name exactly two columns")
        if not self.unit_columns or not self.stanza_columns:
            raise SchemaError("unit_columns and stanza_columns must be non-empty")
        if len(self.groups) != 2 or self.groups[0] == self.groups[1]:
            raise SchemaError(f"groups must be two distinct labels, got {list(self.groups)}")
        book = self.codebook
        if isinstance(self.dimensions, bool) or not isinstance(self.dimensions, int):
            raise SchemaError("dimensions must be an integer")
        if not 1 <= self.dimensions <= book.n_pairs:
            raise SchemaError(
                f"dimensions must be between 1 and {book.n_pairs}, got {self.dimensions}"
            )

    @property
    def codebook(self) -> Codebook:
        return Codebook(self.code_columns)


def _schema() -> dict:
    text = resources.files("ena_kit").joinpath("config.schema.json").read_text("utf-8")
    return json.loads(text)


def config_from_mapping(doc: Mapping[str, Any]) -> AnalysisConfig:
    """Build an :class:`AnalysisConfig` from a decoded JSON document."""
    try:
        jsonschema.validate(doc, _schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"config {where}: {exc.message}") from None
    return AnalysisConfig(
        code_columns=doc["code_columns"],
        unit_columns=doc["unit_columns"],
        stanza_columns=doc["stanza_columns"],
        group_column=doc["group_column"],
        groups=doc["groups"],
        dimensions=doc.get("dimensions", 2),
        out_dir=doc.get("out_dir", "ena_out"),
        rater_columns=doc.get("rater_columns"),
        style=doc.get("style", {}),
    )


def load_config(path: str | Path) -> AnalysisConfig:
    raw = Path(path).read_bytes()
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"config is not valid UTF-8 JSON: {exc}") from None
    return config_from_mapping(doc)


@dataclass(frozen=True)
class Utterance:
    unit_key: str
    stanza_key: str
    group: str
    code_flags: tuple[int, ...]
    # every non-code column, in header order, values verbatim
    raw_metadata: tuple[tuple[str, str], ...] = ()

    def metadata(self, column: str) -> str:
        return dict(self.raw_metadata)[column]


@dataclass(frozen=True)
class CodedTable:
    rows: tuple[Utterance, ...]
    header: tuple[str, ...]
    codebook: Codebook
    unit_columns: tuple[str, ...]
    stanza_columns: tuple[str, ...]
    group_column: str

    def __len__(self) -> int:
        return len(self.rows)

    def unit_keys(self) -> list[str]:
        """Distinct unit keys in order of first appearance."""
        return list(dict.fromkeys(r.unit_key for r in self.rows))


def _decode(csv_bytes: bytes) -> str:
    try:
        return csv_bytes.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise SchemaError(f"input is not UTF-8: {exc}") from None


def parse_table(csv_bytes: bytes | io.BufferedIOBase, config: AnalysisConfig) -> CodedTable:
    """Parse a UTF-8 CSV of coded utterances.

    Code columns accept only the literals ``"0"`` and ``"1"``. Row numbers in
    error messages count data rows from 1 (the header is not counted).
    """
    if not isinstance(csv_bytes, (bytes, bytearray)):
        csv_bytes = csv_bytes.read()
    text = _decode(bytes(csv_bytes))
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = tuple(next(reader))
    except StopIteration:
        raise SchemaError("empty file: no header row") from None
    if len(set(header)) != len(header):
        raise SchemaError(f"duplicate column names in header {list(header)}")

    required = [
        *config.code_columns,
        *config.unit_columns,
        *config.stanza_columns,
        config.group_column,
        *(config.rater_columns or ()),
    ]
    for col in required:
        if col not in header:
            raise SchemaError(f"missing column {col!r}")

    pos = {name: i for i, name in enumerate(header)}
    code_pos = [pos[c] for c in config.code_columns]
    code_set = set(config.code_columns)
    meta_cols = [c for c in header if c not in code_set]

    rows = []
    for n, record in enumerate(reader, start=1):
        if not record:
            continue
        if len(record) != len(header):
            raise SchemaError(f"row {n}: expected {len(header)} fields, found {len(record)}")
        flags = []
        for col, i in zip(config.code_columns, code_pos):
            value = record[i]
            if value not in ("0", "1"):
                raise CodeValueError(f"row {n}: column {col!r} has non-binary value {value!r}", n)
            flags.append(int(value))
        rows.append(
            Utterance(
                unit_key=KEY_SEP.join(record[pos[c]] for c in config.unit_columns),
                stanza_key=KEY_SEP.join(record[pos[c]] for c in config.stanza_columns),
                group=record[pos[config.group_column]],
                code_flags=tuple(flags),
                raw_metadata=tuple((c, record[pos[c]]) for c in meta_cols),
            )
        )
    return CodedTable(
        rows=tuple(rows),
        header=header,
        codebook=config.codebook,
        unit_columns=config.unit_columns,
        stanza_columns=config.stanza_columns,
        group_column=config.group_column,
    )


def serialize_table(table: CodedTable) -> bytes:
    """Write a table back to CSV bytes; the inverse of :func:`parse_table`."""
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(table.header)
    code_index = {c: i for i, c in enumerate(table.codebook.codes)}
    for row in table.rows:
        meta = dict(row.raw_metadata)
        writer.writerow(
            [str(row.code_flags[code_index[c]]) if c in code_index else meta[c] for c in table.header]
        )
    return buf.getvalue().encode("utf-8")


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    row: int | str
    message: str

    def format(self) -> str:
        return f"{self.severity}\trow {self.row}\t{self.message}"

    def to_dict(self) -> dict:
        return {"severity": self.severity, "row": self.row, "message": self.message}


@dataclass(frozen=True)
class Diagnostics:
    entries: tuple[Diagnostic, ...] = ()

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.entries if d.severity == ERROR]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.entries if d.severity == WARNING]

    @property
    def has_errors(self) -> bool:
        return any(d.severity == ERROR for d in self.entries)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(d.to_dict(), sort_keys=True) + "\n" for d in self.entries)

    def raise_for_errors(self) -> None:
        if self.has_errors:
            raise ValidationError(self)


def _stanza_has_cooccurrence(rows: Iterable[Utterance], k: int) -> bool:
    present = [0] * k
    for r in rows:
        present = [p | f for p, f in zip(present, r.code_flags)]
    return sum(present) >= 2


def validate(table: CodedTable, config: AnalysisConfig) -> Diagnostics:
    """Check structural rules that parsing alone cannot enforce."""
    out: list[Diagnostic] = []
    if not table.rows:
        out.append(Diagnostic(ERROR, "-", "table has no data rows"))
        return Diagnostics(tuple(out))

    key_cols = [*table.unit_columns, *table.stanza_columns]
    stanza_unit: dict[str, str] = {}
    unit_group: dict[str, str] = {}
    unit_first_row: dict[str, int] = {}
    stanzas: dict[str, list[Utterance]] = {}
    reported_spans: set[str] = set()
    reported_groups: set[str] = set()
    seen_labels: dict[str, int] = {}

    for n, row in enumerate(table.rows, start=1):
        meta = dict(row.raw_metadata)
        if len(row.code_flags) != table.codebook.k:
            out.append(Diagnostic(ERROR, n, f"expected {table.codebook.k} code flags, found {len(row.code_flags)}"))
        for col in dict.fromkeys(key_cols):
            value = meta.get(col, "")
            if not value.strip():
                out.append(Diagnostic(ERROR, n, f"empty key column {col!r}"))
            elif KEY_SEP in value:
                out.append(Diagnostic(ERROR, n, f"key column {col!r} contains reserved separator {KEY_SEP!r}"))

        unit_first_row.setdefault(row.unit_key, n)
        seen_labels.setdefault(row.group, n)

        owner = stanza_unit.setdefault(row.stanza_key, row.unit_key)
        if owner != row.unit_key and row.stanza_key not in reported_spans:
            reported_spans.add(row.stanza_key)
            out.append(
                Diagnostic(ERROR, n, f"stanza {row.stanza_key!r} spans units {owner!r} and {row.unit_key!r}")
            )
        group = unit_group.setdefault(row.unit_key, row.group)
        if group != row.group and row.unit_key not in reported_groups:
            reported_groups.add(row.unit_key)
            out.append(
                Diagnostic(ERROR, n, f"unit {row.unit_key!r} has rows in groups {group!r} and {row.group!r}")
            )
        stanzas.setdefault(row.stanza_key, []).append(row)

    for label in config.groups:
        if label not in seen_labels:
            out.append(Diagnostic(ERROR, "-", f"group label {label!r} does not occur in column {config.group_column!r}"))
    for label, n in seen_labels.items():
        if label not in config.groups:
            out.append(Diagnostic(WARNING, n, f"group label {label!r} is not one of the compared groups"))

    cooccurring_units = {
        rows[0].unit_key for rows in stanzas.values() if _stanza_has_cooccurrence(rows, table.codebook.k)
    }
    for unit, n in unit_first_row.items():
        if unit not in cooccurring_units:
            out.append(Diagnostic(WARNING, n, f"unit {unit!r} has no code co-occurrence; its network is empty"))
    return Diagnostics(tuple(out))


class AgreementCounts(NamedTuple):
    """2x2 contingency counts for two binary raters."""

    both: int
    a_only: int
    b_only: int
    neither: int

    @property
    def total(self) -> int:
        return self.both + self.a_only + self.b_only + self.neither


def _binary_list(values: Sequence[Any], name: str) -> list[int]:
    out = []
    for i, v in enumerate(values, start=1):
        if isinstance(v, str):
            v = v.strip()
            if v not in ("0", "1"):
                raise CodeValueError(f"{name}[{i}]: non-binary rating {v!r}", i)
            v = int(v)
        elif v not in (0, 1):
            raise CodeValueError(f"{name}[{i}]: non-binary rating {v!r}", i)
        out.append(int(v))
    return out


def rater_agreement_table(ratings_a: Sequence[Any], ratings_b: Sequence[Any]) -> AgreementCounts:
    if len(ratings_a) != len(ratings_b):
        raise ValueError(f"rating vectors differ in length ({len(ratings_a)} vs {len(ratings_b)})")
    if not ratings_a:
        raise ValueError("rating vectors are empty")
    a = _binary_list(ratings_a, "ratings_a")
    b = _binary_list(ratings_b, "ratings_b")
    both = sum(1 for x, y in zip(a, b) if x and y)
    a_only = sum(1 for x, y in zip(a, b) if x and not y)
    b_only = sum(1 for x, y in zip(a, b) if y and not x)
    return AgreementCounts(both, a_only, b_only, len(a) - both - a_only - b_only)


def rater_column(table: CodedTable, column: str) -> list[int]:
    """Strict 0/1 values of a non-code column, e.g. a second rater's coding."""
    if column in table.codebook.codes:
        i = table.codebook.codes.index(column)
        return [row.code_flags[i] for row in table.rows]
    values = [row.metadata(column) for row in table.rows]
    return _binary_list(values, column)
