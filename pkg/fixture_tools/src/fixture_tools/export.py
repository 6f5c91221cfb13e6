"""Export a model bundle to the evaluator's model-directory layout.

After writing graphs, tokenizers, and the manifest, the exporter runs a
self-check: one caption and one audio window go through the native torch
modules and, via the evaluator's own CLI (`mace-eval embed`), through the
exported graphs.  Export aborts if the embeddings drift apart by more
than the tolerance in cosine distance.  Driving the evaluator through its
command line keeps this tooling independent of its internals.
"""

from __future__ import annotations

import json
import subprocess
import tempfile
from pathlib import Path
from typing import Union

import numpy as np

from . import archive_io
from .naive_metric import naive_cosine
from .onnx_export import export_audio_encoder, export_fluency_classifier, export_text_encoder
from .tiny_models import ModelBundle
from .wav_io import write_wav

SELF_CHECK_CAPTION = "a dog barks in the distance"
SELF_CHECK_TOLERANCE = 1e-4
PROVENANCE_FILENAME = "provenance.json"


class ExportError(Exception):
    pass


def write_model_dir(bundle: ModelBundle, out_dir: Union[str, Path]) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "text_encoder.onnx").write_bytes(export_text_encoder(bundle))
    (out / "audio_encoder.onnx").write_bytes(export_audio_encoder(bundle))
    (out / "fluency_classifier.onnx").write_bytes(export_fluency_classifier(bundle))
    bundle.text_tokenizer.save(str(out / "text_tokenizer.json"))
    bundle.fluency_tokenizer.save(str(out / "fluency_tokenizer.json"))
    manifest = {
        "embedding_dim": bundle.embedding_dim,
        "sample_rate_hz": bundle.sample_rate_hz,
        "window_seconds": bundle.window_seconds,
        "text_token_limit": bundle.text_token_limit,
        "graphs": {
            "text_encoder": "text_encoder.onnx",
            "audio_encoder": "audio_encoder.onnx",
            "fluency_classifier": "fluency_classifier.onnx",
        },
        "tokenizers": {
            "text": "text_tokenizer.json",
            "fluency": "fluency_tokenizer.json",
        },
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    (out / PROVENANCE_FILENAME).write_text(
        json.dumps({"bundle": bundle.name, "tool": "fixture-tools 0.1.0"}, indent=2) + "\n"
    )
    return out


def _self_check_window(bundle: ModelBundle, seed: int = 123) -> np.ndarray:
    rng = np.random.default_rng(seed)
    t = np.arange(bundle.window_samples) / bundle.sample_rate_hz
    wave = 0.4 * np.sin(2 * np.pi * 440.0 * t) + 0.2 * rng.uniform(-1, 1, size=t.size)
    return wave.astype(np.float32)


def run_self_check(
    bundle: ModelBundle,
    model_dir: Union[str, Path],
    mace_eval: str = "mace-eval",
    tolerance: float = SELF_CHECK_TOLERANCE,
) -> dict:
    """Compare native vs exported outputs; raise ExportError on divergence."""
    with tempfile.TemporaryDirectory(prefix="ft-selfcheck-") as tmp:
        tmp_path = Path(tmp)
        window = _self_check_window(bundle)
        wav_path = tmp_path / "selfcheck_window.wav"
        write_wav(wav_path, window, bundle.sample_rate_hz, fmt="float32")

        manifest_path = tmp_path / "manifest.jsonl"
        manifest_path.write_text(
            json.dumps({"kind": "text", "key": SELF_CHECK_CAPTION})
            + "\n"
            + json.dumps({"kind": "audio_path", "path": str(wav_path)})
            + "\n"
            + json.dumps({"kind": "fluency", "key": SELF_CHECK_CAPTION})
            + "\n"
        )
        out_dir = tmp_path / "archives"
        proc = subprocess.run(
            [mace_eval, "embed", str(manifest_path), "--model", str(model_dir), "--out", str(out_dir)],
            capture_output=True,
            text=True,
        )
        if proc.returncode != 0:
            raise ExportError(
                f"evaluator could not run the exported graphs (exit {proc.returncode}): "
                f"{proc.stderr.strip()}"
            )

        exported_text = archive_io.lookup(out_dir / "embeddings.arc", SELF_CHECK_CAPTION)
        exported_audio = archive_io.lookup(out_dir / "embeddings.arc", wav_path.stem)
        exported_prob = float(archive_io.lookup(out_dir / "fluency.arc", SELF_CHECK_CAPTION)[0])

    native_text = bundle.encode_text_native(SELF_CHECK_CAPTION)
    native_audio = bundle.encode_window_native(window)
    native_prob = bundle.fluency_native(SELF_CHECK_CAPTION)

    text_distance = 1.0 - naive_cosine(native_text.tolist(), exported_text.tolist())
    audio_distance = 1.0 - naive_cosine(native_audio.tolist(), exported_audio.tolist())
    prob_error = abs(native_prob - exported_prob)
    report = {
        "caption_cosine_distance": text_distance,
        "audio_window_cosine_distance": audio_distance,
        "fluency_prob_abs_error": prob_error,
        "tolerance": tolerance,
    }
    if text_distance >= tolerance or audio_distance >= tolerance or prob_error >= tolerance:
        raise ExportError(f"export self-check diverged: {report}")
    return report


def export_models(
    bundle: ModelBundle,
    out_dir: Union[str, Path],
    mace_eval: str = "mace-eval",
    tolerance: float = SELF_CHECK_TOLERANCE,
) -> dict:
    """Write the model directory and verify it; returns the check report."""
    model_dir = write_model_dir(bundle, out_dir)
    return run_self_check(bundle, model_dir, mace_eval=mace_eval, tolerance=tolerance)
