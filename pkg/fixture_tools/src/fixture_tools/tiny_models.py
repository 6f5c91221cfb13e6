"""Small deterministic encoder models used as export subjects and oracles.

Weights come from a seeded numpy generator and are loaded into torch, so
the native reference computation is reproducible across processes and
torch versions.  The reference checkpoint loader documents how to plug in
the real contrastive audio-text encoders and fluency classifier; those
weights are not redistributable with this repository.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np
import torch
from tokenizers import Tokenizer
from tokenizers.models import WordLevel
from tokenizers.pre_tokenizers import Whitespace

WORDS = (
    "a the an rain falls on roof dog barks birds sing wind blows car engine "
    "hums people talk water drips softly loudly quiet door slams music plays "
    "steadily distant crowd cheers thunder rolls stream gurgles siren wails "
    "horn honks footsteps crunch gravel bell rings waves crash"
).split()


class TextEncoder(torch.nn.Module):
    def __init__(self, table: np.ndarray, weight: np.ndarray, bias: np.ndarray):
        super().__init__()
        self.table = torch.nn.Parameter(torch.from_numpy(table), requires_grad=False)
        self.weight = torch.nn.Parameter(torch.from_numpy(weight), requires_grad=False)
        self.bias = torch.nn.Parameter(torch.from_numpy(bias), requires_grad=False)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        pooled = self.table[ids].mean(dim=1)
        return torch.tanh(pooled @ self.weight + self.bias)


class AudioEncoder(torch.nn.Module):
    def __init__(self, n_bands: int, weight: np.ndarray, bias: np.ndarray):
        super().__init__()
        self.n_bands = n_bands
        self.weight = torch.nn.Parameter(torch.from_numpy(weight), requires_grad=False)
        self.bias = torch.nn.Parameter(torch.from_numpy(bias), requires_grad=False)

    def forward(self, window: torch.Tensor) -> torch.Tensor:
        bands = window.reshape(window.shape[0], self.n_bands, -1).mean(dim=2)
        return torch.tanh(bands @ self.weight + self.bias)


class FluencyClassifier(torch.nn.Module):
    def __init__(self, table: np.ndarray, weight: np.ndarray):
        super().__init__()
        self.table = torch.nn.Parameter(torch.from_numpy(table), requires_grad=False)
        self.weight = torch.nn.Parameter(torch.from_numpy(weight), requires_grad=False)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        pooled = self.table[ids].mean(dim=1)
        return torch.sigmoid(pooled @ self.weight)


@dataclass
class ModelBundle:
    """Everything export needs: native modules, tokenizers, and geometry."""

    name: str
    text_encoder: TextEncoder
    audio_encoder: AudioEncoder
    fluency_classifier: FluencyClassifier
    text_tokenizer: Tokenizer
    fluency_tokenizer: Tokenizer
    embedding_dim: int
    sample_rate_hz: int
    window_seconds: float
    text_token_limit: int
    n_bands: int

    @property
    def window_samples(self) -> int:
        return int(round(self.window_seconds * self.sample_rate_hz))

    def encode_text_native(self, text: str) -> np.ndarray:
        ids = self.text_tokenizer.encode(text).ids[: self.text_token_limit]
        with torch.no_grad():
            out = self.text_encoder(torch.tensor([ids], dtype=torch.int64))
        return out.numpy().reshape(-1).astype(np.float32)

    def encode_window_native(self, window: np.ndarray) -> np.ndarray:
        feed = torch.from_numpy(np.asarray(window, dtype=np.float32)[None, :])
        with torch.no_grad():
            out = self.audio_encoder(feed)
        return out.numpy().reshape(-1).astype(np.float32)

    def fluency_native(self, text: str) -> float:
        ids = self.fluency_tokenizer.encode(text).ids[: self.text_token_limit]
        with torch.no_grad():
            out = self.fluency_classifier(torch.tensor([ids], dtype=torch.int64))
        return float(out.numpy().reshape(-1)[0])


def _word_tokenizer(words: List[str]) -> Tokenizer:
    vocab = {"[UNK]": 0}
    for word in words:
        vocab.setdefault(word, len(vocab))
    tok = Tokenizer(WordLevel(vocab, unk_token="[UNK]"))
    tok.pre_tokenizer = Whitespace()
    return tok


def build_tiny_bundle(
    seed: int = 0,
    embedding_dim: int = 16,
    sample_rate_hz: int = 44100,
    window_seconds: float = 7.0,
    text_token_limit: int = 24,
    n_bands: int = 10,
) -> ModelBundle:
    """Deterministic toy bundle mirroring the real model-directory shape."""
    window_samples = int(round(window_seconds * sample_rate_hz))
    if window_samples % n_bands != 0:
        raise ValueError(f"n_bands {n_bands} must divide the window of {window_samples} samples")
    tokenizer = _word_tokenizer(WORDS)
    vocab = tokenizer.get_vocab_size()
    rng = np.random.default_rng(seed)

    def normal(*shape, scale=0.5):
        return rng.normal(scale=scale, size=shape).astype(np.float32)

    text = TextEncoder(normal(vocab, embedding_dim), normal(embedding_dim, embedding_dim),
                       normal(embedding_dim, scale=0.1))
    audio = AudioEncoder(n_bands, normal(n_bands, embedding_dim),
                         normal(embedding_dim, scale=0.1))
    fluency_dim = max(4, embedding_dim // 2)
    fluency = FluencyClassifier(normal(vocab, fluency_dim), normal(fluency_dim, 1))
    return ModelBundle(
        name=f"tiny-seed{seed}",
        text_encoder=text,
        audio_encoder=audio,
        fluency_classifier=fluency,
        text_tokenizer=tokenizer,
        fluency_tokenizer=tokenizer,
        embedding_dim=embedding_dim,
        sample_rate_hz=sample_rate_hz,
        window_seconds=window_seconds,
        text_token_limit=text_token_limit,
        n_bands=n_bands,
    )


def load_reference_bundle() -> ModelBundle:
    """Load the published contrastive audio-text checkpoint as a bundle.

    Requires the upstream checkpoint (HTSAT audio encoder, GPT-2 text
    encoder, 2023 weights) and the fluency-error BERT classifier to be
    downloadable or cached locally; neither ships with this repository.
    """
    raise NotImplementedError(
        "reference checkpoints are not bundled: install the upstream CLAP "
        "package and fluency classifier, then adapt their encoders to the "
        "ModelBundle interface (see build_tiny_bundle for the contract)"
    )
