"""Project normalized vectors into a shared low-dimensional space.

:func:`fit_space` centres the unit vectors on their pooled mean and rotates
them with an SVD; :func:`place_nodes` then fixes one position per code so that
each unit's weighted network centroid lands as close as possible to its score.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .accumulation import NormalizedVector
from .ingest import Codebook

log = logging.getLogger(__name__)


class LayoutError(ValueError):
    """Node positions cannot be fitted (no unit has a non-empty network)."""


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class EnaSpace:
    grand_mean: np.ndarray
    basis: np.ndarray  # (n_pairs, d), orthonormal columns
    singular_values: np.ndarray
    variance_fraction: np.ndarray
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("grand_mean", "basis", "singular_values", "variance_fraction"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def dimensions(self) -> int:
        return self.basis.shape[1]

    def project(self, values) -> np.ndarray:
        return (np.asarray(values, dtype=float) - self.grand_mean) @ self.basis


@dataclass(frozen=True, eq=False)
class UnitScore:
    unit_key: str
    group: str
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", _frozen(self.coords))


@dataclass(frozen=True, eq=False)
class NodeLayout:
    codes: tuple[str, ...]
    node_coords: np.ndarray  # (k, d)
    fit_correlation: np.ndarray
    residual_rms: np.ndarray
    rank: int
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("node_coords", "fit_correlation", "residual_rms"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))


@dataclass(frozen=True, eq=False)
class GroupNetwork:
    label: str
    edge_weights: np.ndarray
    pair_order: tuple[str, ...] | None = None
    # set on subtraction networks: positive weights belong to `minuend`
    minuend: str | None = None
    subtrahend: str | None = None
    units: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "edge_weights", _frozen(self.edge_weights))

    @property
    def is_subtraction(self) -> bool:
        return self.minuend is not None


def canonicalize_signs(basis: np.ndarray) -> np.ndarray:
    """Flip columns so each one's largest-magnitude loading is positive.

    ``np.argmax`` returns the first maximum, so exact ties go to the earliest
    pair index.
    """
    basis = np.array(basis, dtype=float)
    for j in range(basis.shape[1]):
        i = int(np.argmax(np.abs(basis[:, j])))
        if basis[i, j] < 0:
            basis[:, j] = -basis[:, j]
    return basis


def fit_space(vectors: Sequence[NormalizedVector], d: int = 2) -> tuple[EnaSpace, list[UnitScore]]:
    """Centre on the grand mean of all units and project onto the top ``d``
    right singular vectors.

    Degenerate (all-zero) units take part in centring and are scored like any
    other unit.
    """
    n = len(vectors)
    if n < 2:
        raise ValueError(f"need at least 2 units to fit a space, got {n}")
    X = np.vstack([v.values for v in vectors])
    n_pairs = X.shape[1]
    max_d = min(n - 1, n_pairs)
    if not 1 <= d <= max_d:
        raise ValueError(f"d must be between 1 and {max_d} for {n} units and {n_pairs} pairs, got {d}")

    # exact for constant data, where X.mean() can be off by an ulp
    mean = X[0].copy() if np.all(X == X[0]) else X.mean(axis=0)
    centered = X - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    basis = canonicalize_signs(vt[:d].T)

    total = float(np.sum(s**2))
    warnings = []
    if total > 0:
        fraction = s[:d] ** 2 / total
    else:
        fraction = np.zeros(d)
        warnings.append("centred data are all zero: every unit has the same vector")
    tol = max(n, n_pairs) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    if total > 0 and rank < d:
        warnings.append(f"centred data have rank {rank} < {d} requested dimensions")
    for w in warnings:
        log.warning(w)

    space = EnaSpace(mean, basis, s[:d], fraction, tuple(warnings))
    scores = [UnitScore(v.unit_key, v.group, row) for v, row in zip(vectors, centered @ basis)]
    return space, scores


def _infer_k(n_pairs: int) -> int:
    k = (1 + math.isqrt(1 + 8 * n_pairs)) // 2
    if k * (k - 1) // 2 != n_pairs:
        raise ValueError(f"{n_pairs} is not a triangular number of code pairs")
    return k


def midpoint_matrix(k: int) -> np.ndarray:
    """(n_pairs, k) map from pair weights to node-coordinate coefficients."""
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    M = np.zeros((len(pairs), k))
    for p, (i, j) in enumerate(pairs):
        M[p, i] = M[p, j] = 0.5
    return M


def centroid_design(weights: np.ndarray, k: int) -> np.ndarray:
    """Rows map node coordinates to a unit's network centroid.

    Weights are rescaled to sum to one per row, so each centroid is a convex
    combination of edge midpoints.
    """
    weights = np.atleast_2d(np.asarray(weights, dtype=float))
    convex = weights / weights.sum(axis=1, keepdims=True)
    return convex @ midpoint_matrix(k)


def network_centroid(weights, node_coords) -> np.ndarray:
    node_coords = np.asarray(node_coords, dtype=float)
    return (centroid_design(weights, node_coords.shape[0]) @ node_coords)[0]


def _pearson(a: np.ndarray, b: np.ndarray) -> float | None:
    a = a - a.mean()
    b = b - b.mean()
    scale_a = np.sqrt(a @ a)
    scale_b = np.sqrt(b @ b)
    if scale_a <= 1e-12 * max(1.0, len(a)) or scale_b <= 1e-12 * max(1.0, len(b)):
        return None
    return float(np.clip((a @ b) / (scale_a * scale_b), -1.0, 1.0))


def place_nodes(
    space: EnaSpace,
    scores: Sequence[UnitScore],
    vectors: Sequence[NormalizedVector],
    codes: Sequence[str] | None = None,
) -> NodeLayout:
    """Least-squares node positions that co-register network centroids with scores.

    Solved independently per dimension; ``np.linalg.lstsq`` returns the
    minimum-norm solution when the design is rank deficient. Degenerate units
    are left out of the fit.
    """
    if len(scores) != len(vectors):
        raise ValueError(f"{len(scores)} scores but {len(vectors)} vectors")
    for s, v in zip(scores, vectors):
        if s.unit_key != v.unit_key:
            raise ValueError(f"scores and vectors are not aligned: {s.unit_key!r} vs {v.unit_key!r}")
    n_pairs = space.grand_mean.shape[0]
    k = _infer_k(n_pairs)
    if codes is None:
        codes = [f"code{i + 1}" for i in range(k)]
    codes = tuple(codes)
    if len(codes) != k:
        raise ValueError(f"{len(codes)} code names for {k} codes")

    keep = [i for i, v in enumerate(vectors) if not v.degenerate and v.values.sum() > 0]
    if not keep:
        raise LayoutError("every unit has an empty network; node positions are undetermined")
    W = np.vstack([vectors[i].values for i in keep])
    P = np.vstack([scores[i].coords for i in keep])
    A = centroid_design(W, k)

    x, _, rank, _ = np.linalg.lstsq(A, P, rcond=None)
    predicted = A @ x
    residual_rms = np.sqrt(np.mean((P - predicted) ** 2, axis=0))

    warnings = []
    if rank < k:
        warnings.append(f"node regression is rank deficient (rank {rank} < {k} codes); minimum-norm solution used")
    corr = []
    for j in range(P.shape[1]):
        r = _pearson(P[:, j], predicted[:, j])
        if r is None:
            warnings.append(f"fit correlation on dimension {j + 1} is undefined (constant centroids or scores); reported as 0")
            r = 0.0
        corr.append(r)
    for w in warnings:
        log.warning(w)
    return NodeLayout(codes, x, np.array(corr), residual_rms, int(rank), tuple(warnings))


def group_mean_network(
    vectors: Sequence[NormalizedVector],
    group: str,
    codebook: Codebook | None = None,
) -> GroupNetwork:
    members = [v for v in vectors if v.group == group]
    if not members:
        raise ValueError(f"group {group!r} has no units")
    weights = np.mean(np.vstack([v.values for v in members]), axis=0)
    pair_order = tuple(codebook.pair_names()) if codebook is not None else None
    return GroupNetwork(group, weights, pair_order, units=tuple(v.unit_key for v in members))


def subtract_networks(a: GroupNetwork, b: GroupNetwork) -> GroupNetwork:
    if a.edge_weights.shape != b.edge_weights.shape:
        raise ValueError(f"networks have {a.edge_weights.size} and {b.edge_weights.size} edges")
    if a.pair_order is not None and b.pair_order is not None and a.pair_order != b.pair_order:
        raise ValueError("networks use different code-pair orders")
    return GroupNetwork(
        f"{a.label}-{b.label}",
        a.edge_weights - b.edge_weights,
        a.pair_order or b.pair_order,
        minuend=a.label,
        subtrahend=b.label,
    )


def _num(x: float) -> float:
    # repr of a float round-trips; -0.0 is folded to keep exports stable
    return 0.0 if x == 0 else float(x)


def scores_csv(scores: Sequence[UnitScore]) -> str:
    d = scores[0].coords.size if scores else 0
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["unit", "group", *[f"dim{j + 1}" for j in range(d)]])
    for s in scores:
        writer.writerow([s.unit_key, s.group, *[repr(_num(c)) for c in s.coords]])
    return buf.getvalue()


def space_json(space: EnaSpace, layout: NodeLayout | None = None) -> str:
    doc = {
        "grand_mean": [_num(v) for v in space.grand_mean],
        # column-major: one list per dimension
        "basis": [[_num(v) for v in col] for col in space.basis.T],
        "singular_values": [_num(v) for v in space.singular_values],
        "variance_fraction": [_num(v) for v in space.variance_fraction],
        "warnings": list(space.warnings),
    }
    if layout is not None:
        doc["codes"] = list(layout.codes)
        doc["node_coords"] = [[_num(v) for v in row] for row in layout.node_coords]
        doc["fit_correlation"] = [_num(v) for v in layout.fit_correlation]
        doc["layout_warnings"] = list(layout.warnings)
    return json.dumps(doc, indent=2) + "\n"


def network_csv(net: GroupNetwork) -> str:
    names = net.pair_order or [f"pair{i + 1}" for i in range(net.edge_weights.size)]
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["pair", "weight"])
    for name, w in zip(names, net.edge_weights):
        writer.writerow([name, repr(_num(w))])
    return buf.getvalue()
