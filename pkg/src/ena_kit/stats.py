"""Group comparison and rater reliability statistics."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import betainc, betaincinv

from .ingest import AgreementCounts


class DegenerateTestError(ValueError):
    """The statistic is undefined for the given data (zero variance, n too small)."""


def student_t_cdf(t: float, df: float) -> float:
    """CDF of Student's t with (possibly fractional) ``df``.

    Uses ``P(|T| > |t|) = I_x(df/2, 1/2)`` with ``x = df / (df + t^2)``.
    """
    if df <= 0:
        raise ValueError(f"df must be positive, got {df}")
    if t == 0:
        return 0.5
    tail = 0.5 * float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return 1.0 - tail if t > 0 else tail


def student_t_two_sided_p(t: float, df: float) -> float:
    if df <= 0:
        raise ValueError(f"df must be positive, got {df}")
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


def student_t_quantile(p: float, df: float) -> float:
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -student_t_quantile(1.0 - p, df)
    x = float(betaincinv(df / 2.0, 0.5, 2.0 * (1.0 - p)))
    return math.sqrt(df * (1.0 - x) / x)


@dataclass(frozen=True)
class CentroidSummary:
    group: str
    mean: tuple[float, ...]
    sd: tuple[float, ...]
    half_width: tuple[float, ...]
    n: int

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "n": self.n,
            "mean": list(self.mean),
            "sd": list(self.sd),
            "ci95_half_width": list(self.half_width),
        }


def centroid_summary(values, group: str = "", level: float = 0.95) -> CentroidSummary:
    """Mean, sample sd and t-based CI half-width per column.

    ``values`` is either one axis (shape ``(n,)``) or ``(n, d)`` scores.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    n = arr.shape[0]
    if n < 2:
        raise ValueError(f"a confidence interval needs n >= 2, got {n}")
    mean = arr.mean(axis=0)
    sd = arr.std(axis=0, ddof=1)
    q = student_t_quantile(0.5 + level / 2.0, n - 1)
    half = q * sd / math.sqrt(n)
    return CentroidSummary(group, tuple(map(float, mean)), tuple(map(float, sd)), tuple(map(float, half)), n)


class WelchResult(NamedTuple):
    t: float
    df: float
    p: float


def welch_t_from_summary(mean_a, sd_a, n_a, mean_b, sd_b, n_b) -> WelchResult:
    if n_a < 2 or n_b < 2:
        raise DegenerateTestError(f"each group needs n >= 2 (got {n_a}, {n_b})")
    va = sd_a**2 / n_a
    vb = sd_b**2 / n_b
    if va == 0 and vb == 0:
        raise DegenerateTestError("both groups have zero variance")
    t = (mean_a - mean_b) / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va**2 / (n_a - 1) + vb**2 / (n_b - 1))
    return WelchResult(t, df, student_t_two_sided_p(t, df))


def welch_t(a: Sequence[float], b: Sequence[float]) -> WelchResult:
    """Two-sample t-test without the equal-variance assumption (two-tailed)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise DegenerateTestError(f"each group needs n >= 2 (got {a.size}, {b.size})")
    return welch_t_from_summary(a.mean(), a.std(ddof=1), a.size, b.mean(), b.std(ddof=1), b.size)


def cohens_d_from_summary(mean_a, sd_a, n_a, mean_b, sd_b, n_b) -> float:
    if n_a < 2 or n_b < 2:
        raise DegenerateTestError(f"each group needs n >= 2 (got {n_a}, {n_b})")
    pooled = ((n_a - 1) * sd_a**2 + (n_b - 1) * sd_b**2) / (n_a + n_b - 2)
    if pooled <= 0:
        raise DegenerateTestError("pooled variance is zero")
    return (mean_a - mean_b) / math.sqrt(pooled)


def cohens_d(a: Sequence[float], b: Sequence[float]) -> float:
    """Standardized mean difference using the pooled standard deviation."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise DegenerateTestError(f"each group needs n >= 2 (got {a.size}, {b.size})")
    return cohens_d_from_summary(a.mean(), a.std(ddof=1), a.size, b.mean(), b.std(ddof=1), b.size)


@dataclass(frozen=True)
class KappaResult:
    kappa: float
    percent_agreement: float
    observed: float
    expected: float
    table: AgreementCounts

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "percent_agreement": self.percent_agreement,
            "observed_agreement": self.observed,
            "expected_agreement": self.expected,
            "table": self.table._asdict(),
        }


def cohens_kappa(counts) -> KappaResult:
    """Cohen's kappa for two binary raters.

    ``counts`` is ``(both, a_only, b_only, neither)``. Arithmetic is exact
    (rational) and only converted to float at the end.
    """
    counts = AgreementCounts(*(int(c) for c in counts))
    if any(c < 0 for c in counts):
        raise ValueError(f"counts must be non-negative, got {tuple(counts)}")
    total = counts.total
    if total == 0:
        raise ValueError("contingency table is empty")
    a_yes = counts.both + counts.a_only
    b_yes = counts.both + counts.b_only
    p_o = Fraction(counts.both + counts.neither, total)
    p_e = Fraction(a_yes * b_yes + (total - a_yes) * (total - b_yes), total * total)
    kappa = Fraction(1) if p_e == 1 else (p_o - p_e) / (1 - p_e)
    return KappaResult(float(kappa), float(p_o), float(p_o), float(p_e), counts)


@dataclass(frozen=True)
class GroupComparison:
    dimension: int  # 1-based
    t: float
    df: float
    p: float
    d: float
    significant: bool
    summaries: tuple[CentroidSummary, CentroidSummary]

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "t": self.t,
            "df": self.df,
            "p": self.p,
            "d": self.d,
            "significant": self.significant,
            "groups": [s.to_dict() for s in self.summaries],
        }


def compare_groups(scores, groups: Sequence[str], alpha: float = 0.05) -> list[GroupComparison]:
    """Welch test, Cohen's d and centroid summaries on every projected axis.

    ``scores`` are :class:`~ena_kit.projection.UnitScore` objects; the first
    label in ``groups`` is the minuend of every difference.
    """
    label_a, label_b = groups
    a = np.array([s.coords for s in scores if s.group == label_a], dtype=float)
    b = np.array([s.coords for s in scores if s.group == label_b], dtype=float)
    for label, arr in ((label_a, a), (label_b, b)):
        if arr.size == 0:
            raise ValueError(f"group {label!r} has no scored units")
        if arr.shape[0] < 2:
            raise DegenerateTestError(f"group {label!r} has {arr.shape[0]} unit(s); at least 2 are needed")
    out = []
    for j in range(a.shape[1]):
        res = welch_t(a[:, j], b[:, j])
        d = cohens_d(a[:, j], b[:, j])
        out.append(
            GroupComparison(
                dimension=j + 1,
                t=res.t,
                df=res.df,
                p=res.p,
                d=d,
                significant=res.p < alpha,
                summaries=(centroid_summary(a[:, j], label_a), centroid_summary(b[:, j], label_b)),
            )
        )
    return out


def comparison_json(comparisons: Sequence[GroupComparison], alpha: float = 0.05) -> str:
    doc = {"alpha": alpha, "dimensions": [c.to_dict() for c in comparisons]}
    return json.dumps(doc, indent=2) + "\n"


def kappa_json(result: KappaResult) -> str:
    return json.dumps(result.to_dict(), indent=2) + "\n"
