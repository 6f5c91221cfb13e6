"""Audio-caption evaluation with fluency-gated multimodal similarity.

Library layout:

* metric          - score arithmetic over embeddings
* audio           - WAV decode/encode, resampling, chunking, aggregation
* archive         - bit-exact keyed embedding store
* backends        - backend contract and the archive backend
* model_backend   - exported-graph backend (ONNX subset runtime)
* dataset/harness - pairwise benchmark loading and pair accuracy
* sweep/reports   - ablation grid search and result serialization
* cli             - the mace-eval command
"""

from .archive import EmbeddingArchive, write_archive
from .audio import (
    AudioBuffer,
    Chunk,
    ChunkPlan,
    aggregate_chunk_embeddings,
    decode_wav,
    encode_wav,
    iter_chunk_windows,
    plan_chunks,
    resample,
)
from .backends import ArchiveBackend, Backend
from .dataset import Category, EvalPair, load_dataset, load_score_table
from .harness import (
    AccuracyReport,
    CategoryStats,
    accuracy_from_scores,
    pair_accuracy,
    score_pair,
)
from .metric import (
    MaceBreakdown,
    MaceConfig,
    Variant,
    cosine,
    fluency_gate,
    mace_from_embeddings,
    mace_score,
    s_audio_text,
    s_text_text,
)
from .model_backend import ModelBackend, ModelManifest, load_model_backend
from .reports import emit_report
from .sweep import SweepResult, inclusive_range, sweep, validation_split

__all__ = [
    "AccuracyReport",
    "ArchiveBackend",
    "AudioBuffer",
    "Backend",
    "Category",
    "CategoryStats",
    "Chunk",
    "ChunkPlan",
    "EmbeddingArchive",
    "EvalPair",
    "MaceBreakdown",
    "MaceConfig",
    "ModelBackend",
    "ModelManifest",
    "SweepResult",
    "Variant",
    "accuracy_from_scores",
    "aggregate_chunk_embeddings",
    "cosine",
    "decode_wav",
    "emit_report",
    "encode_wav",
    "fluency_gate",
    "inclusive_range",
    "iter_chunk_windows",
    "load_dataset",
    "load_model_backend",
    "load_score_table",
    "mace_from_embeddings",
    "mace_score",
    "pair_accuracy",
    "plan_chunks",
    "resample",
    "s_audio_text",
    "s_text_text",
    "score_pair",
    "sweep",
    "validation_split",
    "write_archive",
]

__version__ = "0.1.0"
