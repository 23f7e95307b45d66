"""Fixture data and corpus builders shared by the tests."""

import csv
import io

import numpy as np

from ena_kit.ingest import AnalysisConfig

CODES = ["Communication", "Empathy", "Flexibility", "Critical Thinking"]

# Four coded interview lines: two caregivers, one question per stanza.
EXCERPT_ROWS = [
    ["RH", "Real experience", "For residents 80 up to 90, do they have trouble with hearing?", "1", "0", "1", "0"],
    ["RH", "Real experience", "What makes a patient/resident easy to work with?", "1", "1", "0", "0"],
    ["CM", "Training", "In previous training, how much of the scenario would focus on activities versus communication?", "0", "0", "0", "1"],
    ["CM", "Training", "What types of activities did you participate during your training?", "1", "0", "0", "1"],
]
EXCERPT_HEADER = ["PID", "Category", "Questions", *CODES]

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def to_csv(header, rows) -> bytes:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


def random_corpus(rng: np.random.Generator, k: int, n_units: int, max_stanzas: int = 8, p: float = 0.45):
    """Raw rows (dicts) for a random coded corpus plus a matching config.

    Units alternate between groups "A" and "B"; each stanza has 1-3 lines.
    """
    codes = [f"c{i}" for i in range(k)]
    rows = []
    for u in range(n_units):
        group = "A" if u % 2 == 0 else "B"
        for s in range(int(rng.integers(1, max_stanzas + 1))):
            for _ in range(int(rng.integers(1, 4))):
                row = {"unit": f"u{u}", "stanza": f"u{u}-s{s}", "group": group}
                row.update({c: str(int(rng.random() < p)) for c in codes})
                rows.append(row)
    config = AnalysisConfig(
        code_columns=codes,
        unit_columns=["unit"],
        stanza_columns=["stanza"],
        group_column="group",
        groups=["A", "B"],
        dimensions=1,
    )
    return rows, config


def rows_to_csv(rows) -> bytes:
    header = list(rows[0])
    return to_csv(header, [[r[h] for h in header] for r in rows])
