"""Core score arithmetic for the MACE audio-caption metric.

All functions here operate on already-computed embeddings and fluency
probabilities; nothing in this module touches audio, files, or models.
Every function is pure, so concurrent callers need no coordination.

The score combines three ingredients:

* an audio-text cosine similarity between the audio embedding and the
  candidate-caption embedding,
* a text-text similarity, the mean cosine between the candidate and each
  reference caption,
* a binary fluency penalty that scales the combined score by (1 - alpha)
  when a classifier's error probability exceeds a threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DegenerateVectorError,
    DimensionError,
    InvalidEmbeddingError,
    MissingReferenceError,
    RangeError,
    VariantInputError,
)

DEFAULT_ALPHA = 0.3
DEFAULT_FLUENCY_THRESHOLD = 0.97
DEFAULT_AUDIO_TEXT_WEIGHT = 0.5


class Variant(str, Enum):
    """Which similarity components feed the combined score.

    FULL uses both components, AT is the reference-free variant (audio-text
    only), TT uses reference captions only.
    """

    FULL = "full"
    AT = "at"
    TT = "tt"


@dataclass(frozen=True)
class MaceConfig:
    """Knobs of the metric: penalty weight, gate threshold, component mix."""

    alpha: float = DEFAULT_ALPHA
    fluency_threshold: float = DEFAULT_FLUENCY_THRESHOLD
    audio_text_weight: float = DEFAULT_AUDIO_TEXT_WEIGHT
    variant: Variant = Variant.FULL

    def __post_init__(self) -> None:
        for name in ("alpha", "fluency_threshold", "audio_text_weight"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise RangeError(f"{name} must be a finite number, got {value!r}")
            if not 0.0 <= value <= 1.0:
                raise RangeError(f"{name} must lie in [0, 1], got {value}")
        object.__setattr__(self, "variant", Variant(self.variant))

    def replace(self, **changes) -> "MaceConfig":
        """Return a copy with the given fields overridden."""
        import dataclasses

        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "fluency_threshold": self.fluency_threshold,
            "audio_text_weight": self.audio_text_weight,
            "variant": self.variant.value,
        }


@dataclass(frozen=True)
class MaceBreakdown:
    """Every intermediate of one scored (audio, candidate, references) triple.

    ``s_audio_text`` is None under the TT variant and ``s_text_text`` is None
    under AT; ``final`` is always ``s_audio * (1 - alpha * fp)``.
    """

    s_audio_text: Optional[float]
    s_text_text: Optional[float]
    s_audio: float
    fluency_prob: float
    fp: int
    final: float

    def to_dict(self) -> dict:
        return {
            "s_audio_text": self.s_audio_text,
            "s_text_text": self.s_text_text,
            "s_audio": self.s_audio,
            "fluency_prob": self.fluency_prob,
            "fp": self.fp,
            "final": self.final,
        }


def as_embedding(values) -> np.ndarray:
    """Validate and return ``values`` as a 1-D float64 vector.

    Raises DimensionError for anything that is not a nonempty 1-D vector and
    InvalidEmbeddingError when values are NaN or infinite.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(
            f"embedding must be a nonempty 1-D vector, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidEmbeddingError("embedding contains NaN or infinite values")
    return arr


def cosine(a, b) -> float:
    """Cosine similarity between two vectors of equal dimension.

    Symmetric and invariant to positive rescaling of either argument.  The
    result is clamped to [-1, 1] to absorb float rounding on near-parallel
    inputs.
    """
    va = as_embedding(a)
    vb = as_embedding(b)
    if va.shape[0] != vb.shape[0]:
        raise DimensionError(f"dimension mismatch: {va.shape[0]} vs {vb.shape[0]}")
    norm_a = float(np.linalg.norm(va))
    norm_b = float(np.linalg.norm(vb))
    if norm_a == 0.0 or norm_b == 0.0:
        raise DegenerateVectorError("cosine undefined for an all-zero vector")
    value = float(np.dot(va, vb)) / (norm_a * norm_b)
    return min(1.0, max(-1.0, value))


def s_audio_text(audio_emb, cand_emb) -> float:
    """Similarity of the candidate caption to the audio content."""
    return cosine(audio_emb, cand_emb)


def s_text_text(cand_emb, ref_embs: Sequence) -> float:
    """Mean cosine similarity of the candidate to each reference caption.

    ``ref_embs`` must be nonempty.  math.fsum keeps the mean exactly
    invariant under permutation of the reference list.
    """
    refs = list(ref_embs)
    if not refs:
        raise MissingReferenceError("at least one reference embedding is required")
    sims = [cosine(cand_emb, ref) for ref in refs]
    return math.fsum(sims) / len(sims)


def fluency_gate(fluency_prob: float, threshold: float) -> int:
    """1 when the error probability strictly exceeds the threshold, else 0.

    Boundary equality does not trigger the penalty.
    """
    for name, value in (("fluency_prob", fluency_prob), ("threshold", threshold)):
        if not (isinstance(value, (int, float)) and math.isfinite(value)):
            raise RangeError(f"{name} must be a finite number, got {value!r}")
        if not 0.0 <= value <= 1.0:
            raise RangeError(f"{name} must lie in [0, 1], got {value}")
    return 1 if fluency_prob > threshold else 0


def _check_similarity(name: str, value: float) -> float:
    if not (isinstance(value, (int, float)) and math.isfinite(value)):
        raise RangeError(f"{name} must be a finite number, got {value!r}")
    if not -1.0 <= value <= 1.0:
        raise RangeError(f"{name} must lie in [-1, 1], got {value}")
    return float(value)


def mace_score(
    s_at: Optional[float],
    s_tt: Optional[float],
    fluency_prob: float,
    config: MaceConfig = MaceConfig(),
) -> MaceBreakdown:
    """Combine the component similarities into a final gated score.

    The FULL variant mixes the two components with ``audio_text_weight``;
    AT and TT pass a single component through.  Components required by the
    variant must be present, otherwise VariantInputError is raised.
    """
    if s_at is not None:
        s_at = _check_similarity("s_at", s_at)
    if s_tt is not None:
        s_tt = _check_similarity("s_tt", s_tt)

    variant = config.variant
    if variant is Variant.FULL:
        if s_at is None or s_tt is None:
            raise VariantInputError("full variant needs both s_at and s_tt")
        w = config.audio_text_weight
        s_audio = w * s_at + (1.0 - w) * s_tt
    elif variant is Variant.AT:
        if s_at is None:
            raise VariantInputError("at variant needs s_at")
        s_audio = s_at
    else:
        if s_tt is None:
            raise VariantInputError("tt variant needs s_tt")
        s_audio = s_tt

    fp = fluency_gate(fluency_prob, config.fluency_threshold)
    final = s_audio * (1.0 - config.alpha * fp)
    return MaceBreakdown(
        s_audio_text=s_at,
        s_text_text=s_tt,
        s_audio=float(s_audio),
        fluency_prob=float(fluency_prob),
        fp=fp,
        final=float(final),
    )


def mace_from_embeddings(
    audio_emb,
    cand_emb,
    ref_embs: Optional[Sequence],
    fluency_prob: float,
    config: MaceConfig = MaceConfig(),
) -> MaceBreakdown:
    """Score one triple straight from embeddings.

    Skips the component the variant does not need: AT never touches the
    references, TT never touches the audio embedding.
    """
    s_at = None
    s_tt = None
    if config.variant is not Variant.TT:
        s_at = s_audio_text(audio_emb, cand_emb)
    if config.variant is not Variant.AT:
        s_tt = s_text_text(cand_emb, ref_embs or [])
    return mace_score(s_at, s_tt, fluency_prob, config)
