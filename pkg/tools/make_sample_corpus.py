"""Regenerate the bundled synthetic sample corpus.

Ten caregivers answer eight "Real" and eight "Training" questions. Real
answers lean on Communication with Empathy; Training answers lean on
Communication with Critical Thinking. A second rater's Empathy coding
disagrees on a few lines so that kappa has something to measure.

    python tools/make_sample_corpus.py
"""

import csv
import json
from pathlib import Path

import numpy as np

CODES = ["Communication", "Empathy", "Flexibility", "Critical Thinking"]
PROBS = {
    "Real": [0.80, 0.45, 0.30, 0.35],
    "Training": [0.80, 0.25, 0.30, 0.50],
}
DATA = Path(__file__).resolve().parents[1] / "src" / "ena_kit" / "data"


def main(seed: int = 20240611) -> None:
    rng = np.random.default_rng(seed)
    rows = []
    line = 0
    for p in range(1, 11):
        pid = f"P{p:02d}"
        for category in ("Real", "Training"):
            for q in range(1, 9):
                n_lines = 1 + int(rng.random() < 0.3)
                for part in range(n_lines):
                    line += 1
                    flags = [int(rng.random() < pr) for pr in PROBS[category]]
                    second = flags[1] if rng.random() > 0.06 else 1 - flags[1]
                    rows.append(
                        [line, pid, category, f"{category[0]}Q{q}", f"{pid} answer to {category[0]}Q{q} part {part + 1}",
                         *flags, second]
                    )
    DATA.mkdir(parents=True, exist_ok=True)
    with open(DATA / "sample_corpus.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["Line", "PID", "Category", "Question", "Response", *CODES, "Empathy (rater 2)"])
        writer.writerows(rows)
    config = {
        "code_columns": CODES,
        "unit_columns": ["PID", "Category"],
        "stanza_columns": ["PID", "Question"],
        "group_column": "Category",
        "groups": ["Real", "Training"],
        "dimensions": 2,
        "out_dir": "ena_out",
        "rater_columns": ["Empathy", "Empathy (rater 2)"],
    }
    (DATA / "sample_config.json").write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
