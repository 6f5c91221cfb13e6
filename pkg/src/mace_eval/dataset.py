"""Pairwise human-judgment datasets and external score tables.

Datasets are JSON-lines: one object per line with fields pair_id,
category (HC|HI|HM|MM), audio_id, caption_0, caption_1, references
(list, possibly empty), human_choice (0|1).  Score tables are a single
JSON object mapping pair_id to [score_0, score_1].
"""

from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, List, Tuple, Union

from .errors import DatasetFormatError

logger = logging.getLogger(__name__)


class Category(str, Enum):
    """Pair taxonomy: human-human (correct/incorrect), human-machine, machine-machine."""

    HC = "HC"
    HI = "HI"
    HM = "HM"
    MM = "MM"


@dataclass(frozen=True)
class EvalPair:
    """One annotated comparison: two candidates over shared audio and references."""

    pair_id: str
    category: Category
    audio_id: str
    caption_0: str
    caption_1: str
    references: Tuple[str, ...]
    human_choice: int

    def __post_init__(self) -> None:
        if not self.pair_id:
            raise DatasetFormatError("pair_id must be nonempty")
        try:
            object.__setattr__(self, "category", Category(self.category))
        except ValueError:
            raise DatasetFormatError(
                f"unknown category {self.category!r}; expected one of HC, HI, HM, MM"
            ) from None
        for name in ("audio_id", "caption_0", "caption_1"):
            value = getattr(self, name)
            if not isinstance(value, str) or not value:
                raise DatasetFormatError(f"{name} must be a nonempty string")
        if self.caption_0 == self.caption_1:
            raise DatasetFormatError(f"pair {self.pair_id}: captions must differ")
        refs = tuple(self.references)
        if not all(isinstance(r, str) and r for r in refs):
            raise DatasetFormatError(f"pair {self.pair_id}: references must be nonempty strings")
        object.__setattr__(self, "references", refs)
        if self.human_choice not in (0, 1):
            raise DatasetFormatError(
                f"pair {self.pair_id}: human_choice must be 0 or 1, got {self.human_choice!r}"
            )

    def caption(self, index: int) -> str:
        return self.caption_0 if index == 0 else self.caption_1


_REQUIRED_FIELDS = (
    "pair_id",
    "category",
    "audio_id",
    "caption_0",
    "caption_1",
    "references",
    "human_choice",
)


def load_dataset(path: Union[str, Path]) -> List[EvalPair]:
    """Read and validate a JSON-lines dataset; blank lines are skipped."""
    pairs: List[EvalPair] = []
    seen_ids = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(f"{path}:{line_no}: invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise DatasetFormatError(f"{path}:{line_no}: expected a JSON object")
            missing = [f for f in _REQUIRED_FIELDS if f not in record]
            if missing:
                raise DatasetFormatError(
                    f"{path}:{line_no}: missing fields {', '.join(missing)}"
                )
            if not isinstance(record["references"], list):
                raise DatasetFormatError(f"{path}:{line_no}: references must be a list")
            try:
                pair = EvalPair(
                    pair_id=str(record["pair_id"]),
                    category=record["category"],
                    audio_id=record["audio_id"],
                    caption_0=record["caption_0"],
                    caption_1=record["caption_1"],
                    references=tuple(record["references"]),
                    human_choice=record["human_choice"],
                )
            except DatasetFormatError as exc:
                raise DatasetFormatError(f"{path}:{line_no}: {exc}") from exc
            if pair.pair_id in seen_ids:
                raise DatasetFormatError(f"{path}:{line_no}: duplicate pair_id {pair.pair_id!r}")
            seen_ids.add(pair.pair_id)
            pairs.append(pair)

    distribution = Counter(p.category.value for p in pairs)
    logger.info(
        "loaded %d pairs from %s (%s)",
        len(pairs),
        path,
        ", ".join(f"{cat}={distribution.get(cat, 0)}" for cat in ("HC", "HI", "HM", "MM")),
    )
    return pairs


def load_score_table(path: Union[str, Path]) -> Dict[str, Tuple[float, float]]:
    """Read an external per-pair score table: {pair_id: [score_0, score_1]}."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DatasetFormatError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise DatasetFormatError(f"{path}: expected a JSON object keyed by pair_id")
    table: Dict[str, Tuple[float, float]] = {}
    for pair_id, scores in raw.items():
        if (
            not isinstance(scores, (list, tuple))
            or len(scores) != 2
            or not all(isinstance(s, (int, float)) and math.isfinite(s) for s in scores)
        ):
            raise DatasetFormatError(
                f"{path}: entry {pair_id!r} must be a pair of finite numbers"
            )
        table[pair_id] = (float(scores[0]), float(scores[1]))
    return table
