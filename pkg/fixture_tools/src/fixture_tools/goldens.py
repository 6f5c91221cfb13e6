"""Golden fixtures: archives plus independently computed score breakdowns.

Generates a small redistributable synthetic-audio set, embeds everything
with the native bundle, writes the archives, and records breakdowns
computed by the naive loop-based scorer from the exact float32 values the
archives hold.  Configurations vary across goldens so both gate branches
and all three variants are covered.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import List, Union

import numpy as np

from . import archive_io
from .naive_metric import naive_breakdown
from .tiny_models import WORDS, ModelBundle
from .wav_io import write_wav

GOLDEN_FILENAME = "goldens.json"
EMBEDDINGS_FILENAME = "embeddings.arc"
FLUENCY_FILENAME = "fluency.arc"

_DURATIONS = (3.5, 7.0, 9.25, 12.0, 16.5, 21.0)
_CONFIGS = (
    {"alpha": 0.3, "fluency_threshold": 0.97, "audio_text_weight": 0.5, "variant": "full"},
    {"alpha": 0.3, "fluency_threshold": 0.2, "audio_text_weight": 0.5, "variant": "full"},
    {"alpha": 0.9, "fluency_threshold": 0.5, "audio_text_weight": 0.7, "variant": "full"},
    {"alpha": 0.3, "fluency_threshold": 0.97, "audio_text_weight": 0.5, "variant": "at"},
    {"alpha": 0.5, "fluency_threshold": 0.3, "audio_text_weight": 0.5, "variant": "tt"},
)


def _synth_clip(rng: np.random.Generator, seconds: float, rate: int) -> np.ndarray:
    t = np.arange(int(round(seconds * rate))) / rate
    freq = float(rng.uniform(150.0, 2000.0))
    wave = 0.5 * np.sin(2 * np.pi * freq * t) + 0.25 * rng.uniform(-1, 1, size=t.size)
    return wave.astype(np.float32)


def _caption(rng: np.random.Generator, n_words: int) -> str:
    return " ".join(rng.choice(WORDS, size=n_words))


def _native_audio_embedding(bundle: ModelBundle, samples: np.ndarray) -> np.ndarray:
    """Window, embed, and duration-weight with plain loops."""
    window = bundle.window_samples
    rate = bundle.sample_rate_hz
    embeddings = []
    durations = []
    for start in range(0, samples.size, window):
        chunk = samples[start : start + window]
        duration = chunk.size / rate
        if chunk.size < window:
            padded = np.zeros(window, dtype=np.float32)
            padded[: chunk.size] = chunk
            chunk = padded
        embeddings.append(bundle.encode_window_native(chunk).astype(np.float64))
        durations.append(duration)
    total = sum(durations)
    merged = np.zeros(bundle.embedding_dim, dtype=np.float64)
    for emb, dur in zip(embeddings, durations):
        merged += dur * emb
    return (merged / total).astype(np.float32)


def build_goldens(
    bundle: ModelBundle,
    out_dir: Union[str, Path],
    count: int = 12,
    seed: int = 7,
) -> Path:
    """Write audio clips, archives, and the golden-breakdown JSON.

    Returns the path of the golden JSON.  Deterministic for fixed inputs:
    rebuilding produces identical bytes.
    """
    if count < 10:
        raise ValueError("at least 10 golden triples are required")
    out = Path(out_dir)
    audio_dir = out / "audio"
    archive_dir = out / "archives"
    audio_dir.mkdir(parents=True, exist_ok=True)
    archive_dir.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(seed)
    triples = []
    embeddings = {}
    fluency = {}
    for index in range(count):
        audio_id = f"golden_{index:02d}"
        clip = _synth_clip(rng, _DURATIONS[index % len(_DURATIONS)], bundle.sample_rate_hz)
        write_wav(audio_dir / f"{audio_id}.wav", clip, bundle.sample_rate_hz, fmt="float32")
        embeddings[audio_id] = _native_audio_embedding(bundle, clip)

        candidate = _caption(rng, int(rng.integers(3, 9)))
        config = dict(_CONFIGS[index % len(_CONFIGS)])
        n_refs = 0 if config["variant"] == "at" else int(rng.integers(1, 4))
        references = []
        while len(references) < n_refs:
            ref = _caption(rng, int(rng.integers(3, 9)))
            if ref != candidate and ref not in references:
                references.append(ref)
        for caption in (candidate, *references):
            embeddings.setdefault(caption, bundle.encode_text_native(caption))
        fluency.setdefault(candidate, np.asarray([bundle.fluency_native(candidate)], dtype=np.float32))
        triples.append(
            {
                "golden_id": f"g{index:02d}",
                "audio_id": audio_id,
                "audio_path": f"audio/{audio_id}.wav",
                "candidate": candidate,
                "references": references,
                "config": config,
            }
        )

    archive_io.write(archive_dir / EMBEDDINGS_FILENAME, sorted(embeddings.items()))
    archive_io.write(archive_dir / FLUENCY_FILENAME, sorted(fluency.items()))

    # expected values come from the archived float32 numbers, so an
    # evaluator reading the same archives sees bit-identical inputs
    _, stored = archive_io.read(archive_dir / EMBEDDINGS_FILENAME)
    _, stored_fluency = archive_io.read(archive_dir / FLUENCY_FILENAME)

    def stored_vector(key: str) -> List[float]:
        return [float(v) for v in stored[archive_io.digest(key)]]

    goldens = []
    for triple in triples:
        config = triple["config"]
        prob = float(stored_fluency[archive_io.digest(triple["candidate"])][0])
        expected = naive_breakdown(
            stored_vector(triple["audio_id"]) if config["variant"] != "tt" else None,
            stored_vector(triple["candidate"]),
            [stored_vector(ref) for ref in triple["references"]],
            prob,
            alpha=config["alpha"],
            threshold=config["fluency_threshold"],
            weight=config["audio_text_weight"],
            variant=config["variant"],
        )
        goldens.append({**triple, "expected": expected})

    payload = {
        "schema_version": 1,
        "kind": "golden_breakdowns",
        "provenance": {
            "bundle": bundle.name,
            "seed": seed,
            "count": count,
            "embedding_dim": bundle.embedding_dim,
            "sample_rate_hz": bundle.sample_rate_hz,
            "window_seconds": bundle.window_seconds,
            "tool": "fixture-tools 0.1.0",
        },
        "goldens": goldens,
    }
    golden_path = out / GOLDEN_FILENAME
    golden_path.write_text(json.dumps(payload, indent=2) + "\n")
    return golden_path
