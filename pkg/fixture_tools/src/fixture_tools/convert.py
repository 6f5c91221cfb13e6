"""Convert upstream pairwise-annotation CSV files to the dataset schema.

Expected upstream layout, one directory per benchmark:

    <dir>/hc.csv  <dir>/hi.csv  <dir>/hm.csv  <dir>/mm.csv
    <dir>/references.csv        (optional)

Each category file holds one comparison per row.  Column names are
matched case-insensitively against aliases:

    audio id    : file_name | filename | audio_id | sound_id
    caption 0   : caption_0 | caption_a | caption1 | cap1
    caption 1   : caption_1 | caption_b | caption2 | cap2
    preference  : human_choice | label | preferred  (0-based index)
    references  : references   ('||'-separated)     (optional inline)

When a row has no inline references, references.csv supplies them by
audio id (columns: audio id alias + ref_1..ref_N or a 'references'
column).  References equal to either candidate caption are dropped, the
usual leave-out for human-caption pairs drawn from the reference pool.
Pair counts are validated against the expected benchmark size and the
conversion aborts on mismatch.
"""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

logger = logging.getLogger(__name__)

CLOTHO_EVAL_PAIRS = 1671
AUDIOCAPS_EVAL_PAIRS = 1750

CATEGORY_FILES = {"HC": "hc.csv", "HI": "hi.csv", "HM": "hm.csv", "MM": "mm.csv"}

_AUDIO_ALIASES = ("file_name", "filename", "audio_id", "sound_id")
_CAPTION_0_ALIASES = ("caption_0", "caption_a", "caption1", "cap1")
_CAPTION_1_ALIASES = ("caption_1", "caption_b", "caption2", "cap2")
_CHOICE_ALIASES = ("human_choice", "label", "preferred")
_REFS_COLUMN = "references"
_REFS_SEPARATOR = "||"


class ConversionError(Exception):
    pass


def _pick(row: Dict[str, str], aliases: Sequence[str], context: str) -> str:
    for alias in aliases:
        if alias in row and row[alias] not in (None, ""):
            return row[alias]
    raise ConversionError(f"{context}: no column among {aliases}")


def _normalize_row(row: Dict[str, str]) -> Dict[str, str]:
    return {(key or "").strip().lower(): (value or "").strip() for key, value in row.items()}


def _audio_stem(raw: str) -> str:
    return Path(raw).stem if "." in Path(raw).name else raw


def _load_reference_pool(path: Path) -> Dict[str, List[str]]:
    pool: Dict[str, List[str]] = {}
    if not path.exists():
        return pool
    with open(path, newline="", encoding="utf-8") as fh:
        for line_no, row in enumerate(csv.DictReader(fh), start=2):
            row = _normalize_row(row)
            audio = _audio_stem(_pick(row, _AUDIO_ALIASES, f"{path}:{line_no}"))
            refs: List[str] = []
            if row.get(_REFS_COLUMN):
                refs = [r.strip() for r in row[_REFS_COLUMN].split(_REFS_SEPARATOR) if r.strip()]
            else:
                for key in sorted(row):
                    if key.startswith("ref") and row[key]:
                        refs.append(row[key])
            pool[audio] = refs
    return pool


def _parse_choice(raw: str, context: str) -> int:
    if raw in ("0", "1"):
        return int(raw)
    raise ConversionError(f"{context}: preference must be 0 or 1, got {raw!r}")


def convert_dataset(
    upstream_dir: Union[str, Path],
    dataset_tag: str,
    expected_count: int,
    out_path: Union[str, Path],
) -> Dict[str, int]:
    """Convert one benchmark directory; returns per-category counts.

    Aborts (ConversionError) when the emitted pair total differs from
    ``expected_count`` or any row fails validation.
    """
    upstream = Path(upstream_dir)
    reference_pool = _load_reference_pool(upstream / "references.csv")

    records = []
    counts: Dict[str, int] = {}
    for category, filename in CATEGORY_FILES.items():
        path = upstream / filename
        if not path.exists():
            raise ConversionError(f"missing upstream file {path}")
        with open(path, newline="", encoding="utf-8") as fh:
            for line_no, row in enumerate(csv.DictReader(fh), start=2):
                context = f"{path}:{line_no}"
                row = _normalize_row(row)
                audio_id = _audio_stem(_pick(row, _AUDIO_ALIASES, context))
                caption_0 = _pick(row, _CAPTION_0_ALIASES, context)
                caption_1 = _pick(row, _CAPTION_1_ALIASES, context)
                if caption_0 == caption_1:
                    raise ConversionError(f"{context}: candidate captions are identical")
                choice = _parse_choice(_pick(row, _CHOICE_ALIASES, context), context)
                if row.get(_REFS_COLUMN):
                    references = [
                        r.strip() for r in row[_REFS_COLUMN].split(_REFS_SEPARATOR) if r.strip()
                    ]
                else:
                    references = list(reference_pool.get(audio_id, []))
                references = [r for r in references if r not in (caption_0, caption_1)]
                index = counts.get(category, 0)
                counts[category] = index + 1
                records.append(
                    {
                        "pair_id": f"{dataset_tag}-{category.lower()}-{index:04d}",
                        "category": category,
                        "audio_id": audio_id,
                        "caption_0": caption_0,
                        "caption_1": caption_1,
                        "references": references,
                        "human_choice": choice,
                    }
                )

    total = len(records)
    if total != expected_count:
        raise ConversionError(
            f"{upstream}: expected {expected_count} pairs, converted {total}; "
            f"per category {counts}"
        )

    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")
    logger.info("converted %s: %d pairs (%s)", dataset_tag, total, counts)
    return counts
