"""melic: information-theoretic analysis of melodic corpora."""

from .corpus import (
    Corpus,
    CorpusMeta,
    Melody,
    NoteEvent,
    parse_canonical,
    parse_kern_subset,
    serialize_canonical,
    write_table,
)
from .infotheory import (
    Distribution,
    distribution_of,
    entropy,
    entropy_lower_bound,
    entropy_of,
    entropy_ratio_bounds,
    gini,
    mutual_information_excess,
    powerlaw_entropy_gini,
    solve_powerlaw_H,
)
from .repetition import remove_repetition, repetition_fraction, total_information
from .seqmodel import (
    information_content,
    predict_distribution,
    train_ppm,
    within_corpus_repetition,
)
from .viewpoints import (
    ViewpointKind,
    ViewpointSequence,
    estimate_tonic,
    extract_viewpoint,
    recover_octaves,
)

__version__ = "0.1.0"
