"""The shipped synthetic 4-pair benchmark fixture with hand-set embeddings.

One pair per category, dim-4 embeddings chosen so that under default
settings (alpha 0.3, threshold 0.97, weight 0.5, full variant) the scorer
picks the human-preferred caption for HC, HI, and HM but not MM:

* HC  correct: finals ~0.80 vs ~0.60, no gating anywhere on the grid.
* HI  correct: the bad caption is heavily disfluent (prob 0.99) and loses
  regardless of the gate.
* HM  correct: the machine caption is both less similar and disfluent.
* MM  wrong:  the metric prefers caption 0 (s_audio ~0.70 vs ~0.60) while
  humans chose caption 1; caption 0 carries fluency prob 0.95, so grid
  cells with threshold <= 0.94 and alpha >= 0.2 flip this pair to correct.

Expected report at defaults: overall 3/4 = 0.75, per category
HC 1/1, HI 1/1, HM 1/1, MM 0/1, no ties.
"""

import json
from pathlib import Path

from mace_eval.archive import write_archive
from mace_eval.backends import EMBEDDINGS_FILENAME, FLUENCY_FILENAME, ArchiveBackend

EXPECTED_OVERALL = 0.75
EXPECTED_PER_CATEGORY = {"HC": (1, 1), "HI": (1, 1), "HM": (1, 1), "MM": (1, 0)}

_HC0 = "rain patters steadily on a tin roof"
_HC1 = "soft rain falls on a rooftop"
_HC_REF = "rain falls on a metal roof"
_HI0 = "a dog dog barks barks distant"
_HI1 = "a dog barks in the distance"
_HI_REF = "a dog barking outside"
_HM0 = "water drips into a metal sink"
_HM1 = "liquid sounds occur occur"
_HM_REF1 = "water drops fall into a basin"
_HM_REF2 = "dripping water echoes in a sink"
_MM0 = "an engine hums hums loudly"
_MM1 = "a motor runs in a garage"
_MM_REF = "an engine idles steadily"

PAIRS = [
    {
        "pair_id": "hc-1",
        "category": "HC",
        "audio_id": "clip_hc",
        "caption_0": _HC0,
        "caption_1": _HC1,
        "references": [_HC_REF],
        "human_choice": 0,
    },
    {
        "pair_id": "hi-1",
        "category": "HI",
        "audio_id": "clip_hi",
        "caption_0": _HI0,
        "caption_1": _HI1,
        "references": [_HI_REF],
        "human_choice": 1,
    },
    {
        "pair_id": "hm-1",
        "category": "HM",
        "audio_id": "clip_hm",
        "caption_0": _HM0,
        "caption_1": _HM1,
        "references": [_HM_REF1, _HM_REF2],
        "human_choice": 0,
    },
    {
        "pair_id": "mm-1",
        "category": "MM",
        "audio_id": "clip_mm",
        "caption_0": _MM0,
        "caption_1": _MM1,
        "references": [_MM_REF],
        "human_choice": 1,
    },
]

EMBEDDINGS = {
    "clip_hc": [1.0, 0.0, 0.0, 0.0],
    "clip_hi": [0.0, 1.0, 0.0, 0.0],
    "clip_hm": [0.0, 0.0, 1.0, 0.0],
    "clip_mm": [0.0, 0.0, 0.0, 1.0],
    # HC: s_at 0.8 / 0.6, s_tt 0.8 / 0.6
    _HC0: [0.8, 0.6, 0.0, 0.0],
    _HC1: [0.6, 0.8, 0.0, 0.0],
    _HC_REF: [1.0, 0.0, 0.0, 0.0],
    # HI: s_at ~0.316 / ~0.949, shared s_tt ~0.894
    _HI0: [3.0, 1.0, 0.0, 0.0],
    _HI1: [1.0, 3.0, 0.0, 0.0],
    _HI_REF: [1.0, 1.0, 0.0, 0.0],
    # HM: s_at 0.85 / 0.40, s_tt ~0.985 / ~0.740
    _HM0: [0.0, 0.526783, 0.85, 0.0],
    _HM1: [0.0, 0.916515, 0.4, 0.0],
    _HM_REF1: [0.0, 0.3, 0.953939, 0.0],
    _HM_REF2: [0.0, 0.5268, 0.85, 0.0],
    # MM: s_at 0.8 / 0.5, s_tt 0.6 / 0.7 (s_audio 0.70 vs 0.60)
    _MM0: [0.6, 0.0, 0.0, 0.8],
    _MM1: [0.866025, 0.0, 0.0, 0.5],
    _MM_REF: [0.66188, 0.0, 0.705412, 0.25359],
}

FLUENCY = {
    _HC0: 0.10,
    _HC1: 0.20,
    _HI0: 0.99,
    _HI1: 0.05,
    _HM0: 0.00,
    _HM1: 0.99,
    _MM0: 0.95,
    _MM1: 0.10,
}


def write_dataset(path: Path, pairs) -> Path:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair) + "\n")
    return path


def write_fixture_files(root: Path):
    """Materialize the 4-pair dataset plus its archive pair under ``root``."""
    root.mkdir(parents=True, exist_ok=True)
    dataset_path = write_dataset(root / "fixture_pairs.jsonl", PAIRS)
    archive_dir = root / "archives"
    archive_dir.mkdir(exist_ok=True)
    write_archive(archive_dir / EMBEDDINGS_FILENAME, sorted(EMBEDDINGS.items()))
    write_archive(
        archive_dir / FLUENCY_FILENAME, sorted((k, [v]) for k, v in FLUENCY.items())
    )
    return dataset_path, archive_dir


def fixture_backend(root: Path) -> ArchiveBackend:
    _, archive_dir = write_fixture_files(root)
    return ArchiveBackend.from_dir(archive_dir)


def write_tie_fixture(root: Path):
    """Every pair's captions share one embedding and fluency value: all ties."""
    root.mkdir(parents=True, exist_ok=True)
    pairs = []
    embeddings = {"clip_tie": [1.0, 0.0]}
    fluency = {}
    for idx, category in enumerate(("HC", "HI", "HM", "MM")):
        cap_0 = f"tied caption {category} zero"
        cap_1 = f"tied caption {category} one"
        ref = f"tied reference {category}"
        pairs.append(
            {
                "pair_id": f"tie-{idx}",
                "category": category,
                "audio_id": "clip_tie",
                "caption_0": cap_0,
                "caption_1": cap_1,
                "references": [ref],
                "human_choice": idx % 2,
            }
        )
        shared = [0.6, 0.8]
        embeddings[cap_0] = shared
        embeddings[cap_1] = shared
        embeddings[ref] = [0.8, 0.6]
        fluency[cap_0] = 0.5
        fluency[cap_1] = 0.5
    dataset_path = write_dataset(root / "tie_pairs.jsonl", pairs)
    archive_dir = root / "archives"
    archive_dir.mkdir(exist_ok=True)
    write_archive(archive_dir / EMBEDDINGS_FILENAME, sorted(embeddings.items()))
    write_archive(archive_dir / FLUENCY_FILENAME, sorted((k, [v]) for k, v in fluency.items()))
    return dataset_path, archive_dir
