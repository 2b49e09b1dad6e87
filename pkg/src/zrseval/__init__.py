"""Batch evaluation toolkit for unsupervised speech-unit embeddings.

Validates submissions, computes the symbol-entropy bitrate, scores phone
discriminability over minimal-pair triples, and aggregates human-judgment
statistics (CER, MOS, speaker similarity) into a reproducible leaderboard.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .abx import AbxCell, AbxResult, Triphone, aggregate, build_abx_task, evaluate_abx, score_cell
from .bitrate import BitrateResult, SymbolInventory, build_symbol_inventory, entropy
from .distance import (
    DTW_COSINE,
    DTW_KL,
    LEVENSHTEIN,
    FrameMetric,
    SequenceDistance,
    cosine_divergence,
    distance_from_flag,
    dtw_distance,
    kl_divergence,
    levenshtein,
    normalized_levenshtein,
)
from .errors import ZrsEvalError
from .formats import (
    EmbeddingSequence,
    ItemManifest,
    JudgmentSet,
    TranscriptionTable,
    ValidationReport,
    parse_embedding_file,
    parse_item_manifest,
    parse_judgment_table,
    parse_transcription_table,
    validate_submission,
)
from .humaneval import (
    bootstrap_ci,
    build_leaderboard,
    character_error_rate,
    correlation_report,
    filter_participants,
    pearson_r,
)
from .synth import SynthConfig, collapse_runs, generate_corpus, gold_onehot_encoding

__version__ = "0.1.0"
