"""Run exported encoder graphs end to end: export, embed, score.

Needs the sibling tooling package:  pip install -e ./fixture_tools
Run:  python3 demos/05_model_backend.py
"""

import sys
import tempfile
from pathlib import Path

import numpy as np

try:
    from fixture_tools import build_tiny_bundle, export_models
except ImportError:
    sys.exit("install the tooling first: pip install -e ./fixture_tools --no-build-isolation")

from mace_eval import AudioBuffer, MaceConfig, encode_wav, load_model_backend, mace_from_embeddings

workdir = Path(tempfile.mkdtemp(prefix="mace-demo-"))

# Export a small deterministic encoder bundle to the model-directory
# layout; the exporter verifies the graphs against the native models.
bundle = build_tiny_bundle(seed=1, sample_rate_hz=8000)
report = export_models(bundle, workdir / "model")
print("export self-check:", report)

# The model backend tokenizes text, windows audio, and runs the graphs
# with the built-in numpy executor; no external runtime involved.
audio_dir = workdir / "audio"
audio_dir.mkdir()
rng = np.random.default_rng(0)
clip = AudioBuffer(rng.uniform(-0.6, 0.6, size=8000 * 10), 8000)
(audio_dir / "clip_demo.wav").write_bytes(encode_wav(clip, "pcm16"))

backend = load_model_backend(workdir / "model", audio_dir=audio_dir)
print("embedding dim:", backend.embedding_dim())

candidate = "a dog barks in the distance"
references = ["a dog barking outside", "dogs bark"]
breakdown = mace_from_embeddings(
    backend.embed_audio_id("clip_demo"),
    backend.embed_text(candidate),
    [backend.embed_text(r) for r in references],
    backend.fluency_prob(candidate),
    MaceConfig(),
)
print("breakdown:", breakdown.to_dict())

print("\nthe CLI equivalents:")
print(f"  mace-eval score {audio_dir}/clip_demo.wav '{candidate}' \\")
print(f"      --references refs.txt --backend model:{workdir}/model")
print(f"  mace-eval embed inputs.jsonl --model {workdir}/model --out archives/")
