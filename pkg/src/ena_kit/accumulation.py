"""Per-stanza co-occurrence, per-unit accumulation and spherical normalization."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ingest import AnalysisConfig, Codebook, CodedTable, Utterance, validate


@dataclass(frozen=True)
class StanzaAdjacency:
    stanza_key: str
    unit_key: str
    group: str
    pair_flags: tuple[int, ...]


@dataclass(frozen=True)
class CumulativeAdjacency:
    unit_key: str
    group: str
    pair_counts: tuple[int, ...]
    stanza_count: int


@dataclass(frozen=True)
class NormalizedVector:
    unit_key: str
    group: str
    values: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __eq__(self, other):
        if not isinstance(other, NormalizedVector):
            return NotImplemented
        return (
            self.unit_key == other.unit_key
            and self.group == other.group
            and self.degenerate == other.degenerate
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


def stanza_adjacency(rows: Sequence[Utterance], codebook: Codebook) -> StanzaAdjacency:
    """Binary co-occurrence flags for one stanza.

    A code counts as present if any line of the stanza carries it; a pair is
    flagged when both of its codes are present.
    """
    if not rows:
        raise ValueError("a stanza needs at least one row")
    first = rows[0]
    for r in rows[1:]:
        if r.stanza_key != first.stanza_key or r.unit_key != first.unit_key:
            raise ValueError(
                f"rows mix stanzas/units: {first.stanza_key!r}/{first.unit_key!r} "
                f"vs {r.stanza_key!r}/{r.unit_key!r}"
            )
    present = [any(r.code_flags[i] for r in rows) for i in range(codebook.k)]
    flags = tuple(int(present[i] and present[j]) for i, j in codebook.pair_indices)
    return StanzaAdjacency(first.stanza_key, first.unit_key, first.group, flags)


def accumulate_unit(stanzas: Sequence[StanzaAdjacency]) -> CumulativeAdjacency:
    if not stanzas:
        raise ValueError("a unit needs at least one stanza")
    unit = stanzas[0].unit_key
    if any(s.unit_key != unit for s in stanzas):
        keys = sorted({s.unit_key for s in stanzas})
        raise ValueError(f"stanzas belong to several units: {keys}")
    counts = [sum(col) for col in zip(*(s.pair_flags for s in stanzas))]
    return CumulativeAdjacency(unit, stanzas[0].group, tuple(counts), len(stanzas))


def normalize(vec: CumulativeAdjacency) -> NormalizedVector:
    counts = np.asarray(vec.pair_counts, dtype=float)
    norm = np.linalg.norm(counts)
    if norm == 0:
        return NormalizedVector(vec.unit_key, vec.group, np.zeros_like(counts), degenerate=True)
    return NormalizedVector(vec.unit_key, vec.group, counts / norm)


def cumulative_vectors(table: CodedTable) -> list[CumulativeAdjacency]:
    """Cumulative pair counts per unit, ordered by first appearance of the unit."""
    stanza_rows: dict[str, list[Utterance]] = {}
    unit_stanzas: dict[str, list[str]] = {}
    for row in table.rows:
        if row.stanza_key not in stanza_rows:
            unit_stanzas.setdefault(row.unit_key, []).append(row.stanza_key)
        stanza_rows.setdefault(row.stanza_key, []).append(row)
    out = []
    for unit, keys in unit_stanzas.items():
        stanzas = [stanza_adjacency(stanza_rows[key], table.codebook) for key in keys]
        out.append(accumulate_unit(stanzas))
    return out


def accumulate_table(table: CodedTable, config: AnalysisConfig) -> list[NormalizedVector]:
    """Normalized adjacency vector for every unit in ``table``.

    Raises :class:`~ena_kit.ingest.ValidationError` when the table has
    error-severity diagnostics. An empty table yields an empty list.
    """
    if not table.rows:
        return []
    validate(table, config).raise_for_errors()
    return [normalize(c) for c in cumulative_vectors(table)]


def cumulative_csv(vectors: Sequence[CumulativeAdjacency], codebook: Codebook) -> str:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["unit", "group", "stanza_count", *codebook.pair_names()])
    for v in vectors:
        writer.writerow([v.unit_key, v.group, v.stanza_count, *v.pair_counts])
    return buf.getvalue()
