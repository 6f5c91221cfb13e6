"""Straight-line, loop-based reference scorer for golden breakdowns.

No vectorized shortcuts and no imports from the evaluator: this is the
independent oracle the golden fixtures are computed with.
"""

from __future__ import annotations

import math
from typing import Dict, List, Optional, Sequence


def naive_cosine(a: Sequence[float], b: Sequence[float]) -> float:
    dot = 0.0
    norm_a = 0.0
    norm_b = 0.0
    for x, y in zip(a, b):
        dot += x * y
        norm_a += x * x
        norm_b += y * y
    return dot / math.sqrt(norm_a) / math.sqrt(norm_b)


def naive_breakdown(
    audio: Optional[Sequence[float]],
    candidate: Sequence[float],
    references: List[Sequence[float]],
    fluency_prob: float,
    alpha: float = 0.3,
    threshold: float = 0.97,
    weight: float = 0.5,
    variant: str = "full",
) -> Dict[str, Optional[float]]:
    s_at = None
    s_tt = None
    if variant != "tt":
        s_at = naive_cosine(audio, candidate)
    if variant != "at":
        total = 0.0
        for ref in references:
            total += naive_cosine(candidate, ref)
        s_tt = total / len(references)
    if variant == "full":
        s_audio = weight * s_at + (1.0 - weight) * s_tt
    elif variant == "at":
        s_audio = s_at
    else:
        s_audio = s_tt
    fp = 1 if fluency_prob > threshold else 0
    return {
        "s_audio_text": s_at,
        "s_text_text": s_tt,
        "s_audio": s_audio,
        "fluency_prob": fluency_prob,
        "fp": fp,
        "final": s_audio * (1.0 - alpha * fp),
    }
