"""Precomputed-embedding archives and the backend contract.

Archives make evaluation hermetic: once captions and audio are embedded,
scoring needs no models at all.  Run:  python3 demos/03_archives_and_backends.py
"""

import tempfile
from pathlib import Path

import numpy as np

from mace_eval import EmbeddingArchive, MaceConfig, mace_from_embeddings, write_archive
from mace_eval.backends import EMBEDDINGS_FILENAME, FLUENCY_FILENAME, ArchiveBackend

workdir = Path(tempfile.mkdtemp(prefix="mace-demo-"))
print("writing archives under", workdir)

# Captions are keyed by their exact text; audio by a dataset identifier.
rng = np.random.default_rng(0)
vectors = {
    "clip_0042": rng.normal(size=16).astype(np.float32),
    "a dog barks twice": rng.normal(size=16).astype(np.float32),
    "a dog barks": rng.normal(size=16).astype(np.float32),
}
write_archive(workdir / EMBEDDINGS_FILENAME, sorted(vectors.items()))
write_archive(
    workdir / FLUENCY_FILENAME,
    [("a dog barks twice", [0.04]), ("a dog barks", [0.02])],
)

size = (workdir / EMBEDDINGS_FILENAME).stat().st_size
print(f"embeddings archive: {size} bytes "
      f"(16-byte header + 3 records of 32 + 4*16 bytes)")

# Lookups are bit-exact float32 and miss loudly on unknown keys.
archive = EmbeddingArchive(workdir / EMBEDDINGS_FILENAME)
stored = archive.lookup("a dog barks twice")
print("lookup round-trips bit-exactly:",
      stored.tobytes() == vectors["a dog barks twice"].tobytes())

# The backend facade serves the scorer: text, keyed audio, fluency.
backend = ArchiveBackend.from_dir(workdir)
breakdown = mace_from_embeddings(
    backend.embed_audio_id("clip_0042"),
    backend.embed_text("a dog barks twice"),
    [backend.embed_text("a dog barks")],
    backend.fluency_prob("a dog barks twice"),
    MaceConfig(),
)
print("breakdown via archive backend:", breakdown.to_dict())

print("\nthe CLI equivalent:")
print(f"  mace-eval score clip_0042.wav 'a dog barks twice' \\")
print(f"      --references refs.txt --backend archive:{workdir}")
