"""Pair scoring and pair-accuracy aggregation.

A scorer is correct on a pair when it assigns the human-preferred caption
a strictly higher final score; ties never count as correct and are
reported separately.  Scoring individual pairs is embarrassingly parallel
and the aggregation is a plain commutative reduction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from .backends import Backend
from .dataset import Category, EvalPair
from .errors import KeyNotFoundError, RangeError, VariantInputError
from .metric import MaceBreakdown, MaceConfig, Variant, mace_from_embeddings


@dataclass(frozen=True)
class CategoryStats:
    num_pairs: int
    num_correct: int

    @property
    def accuracy(self) -> float:
        return self.num_correct / self.num_pairs

    def to_dict(self) -> dict:
        return {
            "num_pairs": self.num_pairs,
            "num_correct": self.num_correct,
            "accuracy": self.accuracy,
        }


@dataclass(frozen=True)
class AccuracyReport:
    """Per-category and overall pair accuracy plus the tie count."""

    per_category: Mapping[Category, CategoryStats]
    overall: CategoryStats
    tie_count: int
    config: Optional[MaceConfig] = None

    def to_dict(self) -> dict:
        return {
            "overall": self.overall.to_dict(),
            "per_category": {
                cat.value: stats.to_dict() for cat, stats in self.per_category.items()
            },
            "tie_count": self.tie_count,
            "config": self.config.to_dict() if self.config is not None else None,
        }


def score_pair(
    pair: EvalPair, backend: Backend, config: MaceConfig = MaceConfig()
) -> Tuple[MaceBreakdown, MaceBreakdown]:
    """Score both candidates of a pair with shared audio and references.

    Only the candidate caption differs between the two breakdowns; the
    audio embedding and reference embeddings are computed once.
    """
    if config.variant is not Variant.AT and not pair.references:
        raise VariantInputError(
            f"pair {pair.pair_id}: variant {config.variant.value} needs reference captions"
        )
    try:
        audio_emb = (
            backend.embed_audio_id(pair.audio_id) if config.variant is not Variant.TT else None
        )
        ref_embs = (
            [backend.embed_text(ref) for ref in pair.references]
            if config.variant is not Variant.AT
            else None
        )
        breakdowns = []
        for caption in (pair.caption_0, pair.caption_1):
            cand_emb = backend.embed_text(caption)
            prob = backend.fluency_prob(caption)
            breakdowns.append(
                _from_components(audio_emb, cand_emb, ref_embs, prob, config)
            )
    except KeyNotFoundError as exc:
        raise KeyNotFoundError(f"pair {pair.pair_id}: {exc}") from exc
    return breakdowns[0], breakdowns[1]


def _from_components(audio_emb, cand_emb, ref_embs, prob, config) -> MaceBreakdown:
    return mace_from_embeddings(audio_emb, cand_emb, ref_embs, prob, config)


def _tally(
    scored: Iterable[Tuple[EvalPair, float, float]],
    config: Optional[MaceConfig],
) -> AccuracyReport:
    per_cat: Dict[Category, List[int]] = {}
    ties = 0
    for pair, score_0, score_1 in scored:
        chosen, other = (
            (score_0, score_1) if pair.human_choice == 0 else (score_1, score_0)
        )
        if chosen == other:
            ties += 1
            correct = False
        else:
            correct = chosen > other
        bucket = per_cat.setdefault(pair.category, [0, 0])
        bucket[0] += 1
        bucket[1] += int(correct)

    if not per_cat:
        raise RangeError("cannot compute accuracy over zero pairs")
    per_category = {
        cat: CategoryStats(num_pairs=counts[0], num_correct=counts[1])
        for cat, counts in sorted(per_cat.items(), key=lambda item: item[0].value)
    }
    overall = CategoryStats(
        num_pairs=sum(s.num_pairs for s in per_category.values()),
        num_correct=sum(s.num_correct for s in per_category.values()),
    )
    return AccuracyReport(
        per_category=per_category, overall=overall, tie_count=ties, config=config
    )


def pair_accuracy(
    pairs: Iterable[EvalPair],
    backend: Backend,
    config: MaceConfig = MaceConfig(),
    jobs: int = 1,
) -> AccuracyReport:
    """Score every pair and report per-category and overall accuracy."""
    pairs = list(pairs)
    if not pairs:
        raise RangeError("cannot compute accuracy over zero pairs")
    finals = score_pairs_finals(pairs, backend, config, jobs=jobs)
    return _tally(
        ((pair, s0, s1) for pair, (s0, s1) in zip(pairs, finals)), config
    )


def score_pairs_finals(
    pairs: List[EvalPair],
    backend: Backend,
    config: MaceConfig,
    jobs: int = 1,
) -> List[Tuple[float, float]]:
    """Final scores for each pair, in input order."""

    def one(pair: EvalPair) -> Tuple[float, float]:
        b0, b1 = score_pair(pair, backend, config)
        return b0.final, b1.final

    if jobs > 1 and len(pairs) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, pairs))
    return [one(pair) for pair in pairs]


def accuracy_from_scores(
    pairs: Iterable[EvalPair],
    score_table: Mapping[str, Tuple[float, float]],
) -> AccuracyReport:
    """Rank an external scorer's per-pair score table with the same semantics."""
    pairs = list(pairs)
    if not pairs:
        raise RangeError("cannot compute accuracy over zero pairs")

    def scored():
        for pair in pairs:
            if pair.pair_id not in score_table:
                raise KeyNotFoundError(f"score table has no entry for pair {pair.pair_id!r}")
            score_0, score_1 = score_table[pair.pair_id]
            yield pair, float(score_0), float(score_1)

    return _tally(scored(), None)
