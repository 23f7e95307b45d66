"""Epistemic network analysis of coded utterance tables."""

__version__ = "0.1.0"

from pathlib import Path

from .accumulation import (
    CumulativeAdjacency,
    NormalizedVector,
    StanzaAdjacency,
    accumulate_table,
    accumulate_unit,
    normalize,
    stanza_adjacency,
)
from .ingest import (
    AnalysisConfig,
    Codebook,
    CodedTable,
    Diagnostics,
    Utterance,
    load_config,
    parse_table,
    rater_agreement_table,
    validate,
)
from .projection import (
    EnaSpace,
    GroupNetwork,
    NodeLayout,
    UnitScore,
    fit_space,
    group_mean_network,
    place_nodes,
    subtract_networks,
)
from .stats import centroid_summary, cohens_d, cohens_kappa, compare_groups, welch_t


def sample_corpus_paths() -> tuple[Path, Path]:
    """(config, csv) paths of the bundled 20-unit synthetic corpus."""
    data = Path(__file__).parent / "data"
    return data / "sample_config.json", data / "sample_corpus.csv"
