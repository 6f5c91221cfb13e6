"""Backend that runs exported encoder graphs from a model directory.

A model directory contains three ONNX graphs (text encoder, audio
encoder, fluency classifier), tokenizer files, and ``manifest.json``:

    {
      "embedding_dim": 1024,
      "sample_rate_hz": 44100,
      "window_seconds": 7.0,
      "text_token_limit": 77,
      "graphs": {
        "text_encoder": "text_encoder.onnx",
        "audio_encoder": "audio_encoder.onnx",
        "fluency_classifier": "fluency_classifier.onnx"
      },
      "tokenizers": {"text": "text_tokenizer.json", "fluency": "fluency_tokenizer.json"}
    }

Graph conventions: encoders take int64 token ids of shape [1, n] on their
first input (an optional second input whose name contains "mask" receives
ones), the audio encoder takes one float32 [1, window] input, and every
graph exposes the result on its first output.  Audio longer than one
window is split into contiguous windows whose embeddings are averaged
weighted by duration; a short final window is zero-padded but keeps its
true weight.

Executors are stateless, so a single backend instance may be shared by
any number of worker threads; per-key caches are lock-protected and make
repeated lookups deterministic and cheap.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Mapping, Optional, Union

import numpy as np
from tokenizers import Tokenizer

from .audio import AudioBuffer, decode_wav, aggregate_chunk_embeddings, iter_chunk_windows, plan_chunks, resample
from .backends import Backend, _require_text
from .errors import (
    BackendCapabilityError,
    InferenceError,
    KeyNotFoundError,
    ModelLoadError,
)
from .graph_runtime import GraphExecutor, OnnxModel, load_model

MANIFEST_FILENAME = "manifest.json"
_GRAPH_ROLES = ("text_encoder", "audio_encoder", "fluency_classifier")
_TOKENIZER_ROLES = ("text", "fluency")


@dataclass(frozen=True)
class ModelManifest:
    embedding_dim: int
    sample_rate_hz: int
    window_seconds: float
    text_token_limit: int
    graphs: Mapping[str, str]
    tokenizers: Mapping[str, str]

    @classmethod
    def load(cls, model_dir: Union[str, Path]) -> "ModelManifest":
        path = Path(model_dir) / MANIFEST_FILENAME
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ModelLoadError(f"cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ModelLoadError(f"{path} is not valid JSON: {exc}") from exc

        try:
            manifest = cls(
                embedding_dim=int(raw["embedding_dim"]),
                sample_rate_hz=int(raw["sample_rate_hz"]),
                window_seconds=float(raw["window_seconds"]),
                text_token_limit=int(raw["text_token_limit"]),
                graphs=dict(raw["graphs"]),
                tokenizers=dict(raw["tokenizers"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelLoadError(f"{path} is missing or mistypes a required field: {exc}") from exc

        if manifest.embedding_dim <= 0 or manifest.window_seconds <= 0:
            raise ModelLoadError(f"{path} declares non-positive dimensions")
        if manifest.text_token_limit <= 0:
            raise ModelLoadError(f"{path} declares a non-positive text_token_limit")
        for role in _GRAPH_ROLES:
            if role not in manifest.graphs:
                raise ModelLoadError(f"{path} lacks graphs entry {role!r}")
        for role in _TOKENIZER_ROLES:
            if role not in manifest.tokenizers:
                raise ModelLoadError(f"{path} lacks tokenizers entry {role!r}")
        return manifest

    @property
    def window_samples(self) -> int:
        return max(1, int(round(self.window_seconds * self.sample_rate_hz)))


def _static_last_dim(model: OnnxModel) -> Optional[int]:
    shape = model.outputs[0].shape
    if shape and shape[-1] is not None and shape[-1] > 0:
        return int(shape[-1])
    return None


class _TokenGraph:
    """Pairs a tokenizer with an id-consuming graph executor."""

    def __init__(self, executor: GraphExecutor, tokenizer: Tokenizer, token_limit: int, label: str):
        self.executor = executor
        self.tokenizer = tokenizer
        self.token_limit = token_limit
        self.label = label
        specs = executor.model.feed_inputs
        if not 1 <= len(specs) <= 2:
            raise ModelLoadError(f"{label} graph must take one id input (plus optional mask)")
        if len(specs) == 2 and "mask" not in specs[1].name.lower():
            raise ModelLoadError(
                f"{label} graph has an unrecognized second input {specs[1].name!r}"
            )
        self._specs = specs

    def run(self, text: str) -> np.ndarray:
        ids = self.tokenizer.encode(text).ids[: self.token_limit]
        if not ids:
            raise InferenceError(f"{self.label} tokenizer produced no tokens for {text!r}")
        batch = np.asarray([ids], dtype=np.int64)
        feeds = {self._specs[0].name: batch}
        if len(self._specs) == 2:
            feeds[self._specs[1].name] = np.ones_like(batch)
        outputs = self.executor.run(feeds)
        return outputs[self.executor.model.outputs[0].name]


class ModelBackend(Backend):
    """Runs the exported graphs; optionally resolves audio ids to files.

    ``audio_dir`` maps dataset audio ids onto ``<audio_dir>/<id>.wav``;
    without it only waveform embedding is available.
    """

    def __init__(self, model_dir: Union[str, Path], audio_dir: Union[str, Path, None] = None):
        self.model_dir = Path(model_dir)
        self.audio_dir = Path(audio_dir) if audio_dir is not None else None
        self.manifest = ModelManifest.load(self.model_dir)

        executors: Dict[str, GraphExecutor] = {}
        for role in _GRAPH_ROLES:
            graph_path = self.model_dir / self.manifest.graphs[role]
            executors[role] = GraphExecutor(load_model(graph_path))
        tokenizers: Dict[str, Tokenizer] = {}
        for role in _TOKENIZER_ROLES:
            tok_path = self.model_dir / self.manifest.tokenizers[role]
            if not tok_path.exists():
                raise ModelLoadError(f"missing tokenizer file {tok_path}")
            try:
                tokenizers[role] = Tokenizer.from_file(str(tok_path))
            except Exception as exc:
                raise ModelLoadError(f"cannot load tokenizer {tok_path}: {exc}") from exc

        dim = self.manifest.embedding_dim
        for role in ("text_encoder", "audio_encoder"):
            declared = _static_last_dim(executors[role].model)
            if declared is not None and declared != dim:
                raise ModelLoadError(
                    f"{role} graph outputs dim {declared}, manifest declares {dim}"
                )
        audio_specs = executors["audio_encoder"].model.feed_inputs
        if len(audio_specs) != 1:
            raise ModelLoadError("audio_encoder graph must take exactly one input")
        declared_window = audio_specs[0].shape[-1] if audio_specs[0].shape else None
        if declared_window is not None and declared_window != self.manifest.window_samples:
            raise ModelLoadError(
                f"audio_encoder expects {declared_window} samples per window, "
                f"manifest implies {self.manifest.window_samples}"
            )
        self._audio_input_name = audio_specs[0].name
        self._audio_executor = executors["audio_encoder"]
        self._text = _TokenGraph(
            executors["text_encoder"], tokenizers["text"], self.manifest.text_token_limit, "text"
        )
        self._fluency = _TokenGraph(
            executors["fluency_classifier"],
            tokenizers["fluency"],
            self.manifest.text_token_limit,
            "fluency",
        )

        self._lock = threading.Lock()
        self._text_cache: Dict[str, np.ndarray] = {}
        self._audio_cache: Dict[str, np.ndarray] = {}
        self._prob_cache: Dict[str, float] = {}

    def embedding_dim(self) -> int:
        return self.manifest.embedding_dim

    def _as_embedding(self, raw: np.ndarray, label: str) -> np.ndarray:
        vec = np.asarray(raw, dtype=np.float32).reshape(-1)
        if vec.size != self.manifest.embedding_dim:
            raise InferenceError(
                f"{label} produced {vec.size} values, expected {self.manifest.embedding_dim}"
            )
        vec.setflags(write=False)
        return vec

    def embed_text(self, text: str) -> np.ndarray:
        _require_text(text)
        with self._lock:
            cached = self._text_cache.get(text)
        if cached is not None:
            return cached
        vec = self._as_embedding(self._text.run(text), "text encoder")
        with self._lock:
            self._text_cache[text] = vec
        return vec

    def _embed_window(self, window: np.ndarray) -> np.ndarray:
        feed = np.asarray(window, dtype=np.float32)[None, :]
        out = self._audio_executor.run({self._audio_input_name: feed})
        raw = out[self._audio_executor.model.outputs[0].name]
        return self._as_embedding(raw, "audio encoder")

    def embed_audio(self, buf: AudioBuffer) -> np.ndarray:
        buf = resample(buf, self.manifest.sample_rate_hz)
        plan = plan_chunks(buf, self.manifest.window_seconds)
        embeddings = []
        durations = []
        for window, duration in iter_chunk_windows(buf, plan):
            embeddings.append(self._embed_window(window))
            durations.append(duration)
        merged = aggregate_chunk_embeddings(embeddings, durations)
        return merged.astype(np.float32)

    def _resolve_audio_path(self, audio_id: str) -> Path:
        if self.audio_dir is None:
            raise BackendCapabilityError(
                "model backend has no audio directory configured; "
                "cannot resolve audio ids"
            )
        direct = self.audio_dir / audio_id
        if direct.is_file():
            return direct
        with_ext = self.audio_dir / f"{audio_id}.wav"
        if with_ext.is_file():
            return with_ext
        raise KeyNotFoundError(f"no audio file for id {audio_id!r} under {self.audio_dir}")

    def embed_audio_id(self, audio_id: str) -> np.ndarray:
        with self._lock:
            cached = self._audio_cache.get(audio_id)
        if cached is not None:
            return cached
        path = self._resolve_audio_path(audio_id)
        vec = self.embed_audio(decode_wav(str(path)))
        vec.setflags(write=False)
        with self._lock:
            self._audio_cache[audio_id] = vec
        return vec

    def fluency_prob(self, text: str) -> float:
        _require_text(text)
        with self._lock:
            cached = self._prob_cache.get(text)
        if cached is not None:
            return cached
        raw = np.asarray(self._fluency.run(text), dtype=np.float64).reshape(-1)
        if raw.size != 1:
            raise InferenceError(f"fluency classifier produced {raw.size} values, expected 1")
        prob = float(raw[0])
        if not 0.0 <= prob <= 1.0:
            raise InferenceError(f"fluency classifier produced {prob}, outside [0, 1]")
        with self._lock:
            self._prob_cache[text] = prob
        return prob


def load_model_backend(
    model_dir: Union[str, Path], audio_dir: Union[str, Path, None] = None
) -> ModelBackend:
    """Open a model directory and return a ready backend."""
    return ModelBackend(model_dir, audio_dir=audio_dir)
