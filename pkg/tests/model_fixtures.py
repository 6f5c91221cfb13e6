"""Shared helpers that assemble model directories for backend tests."""

import json

from tokenizers import Tokenizer
from tokenizers.models import WordLevel
from tokenizers.pre_tokenizers import Whitespace

import onnx_builder as ob

DEFAULT_WORDS = (
    "a the rain falls on roof dog barks birds sing wind blows car engine "
    "hums people talk water drips softly loud quiet door slams music plays "
    "steadily distant crowd cheers thunder rolls stream gurgles"
).split()


def build_word_tokenizer(words=DEFAULT_WORDS) -> Tokenizer:
    vocab = {"[UNK]": 0}
    for word in words:
        vocab.setdefault(word, len(vocab))
    tok = Tokenizer(WordLevel(vocab, unk_token="[UNK]"))
    tok.pre_tokenizer = Whitespace()
    return tok


def build_model_dir(
    root,
    dim=6,
    sample_rate_hz=8000,
    window_seconds=7.0,
    text_token_limit=16,
    words=DEFAULT_WORDS,
    n_bands=8,
    manifest_overrides=None,
    constant_text=None,
):
    """Write graphs + tokenizers + manifest under ``root`` and return it."""
    root.mkdir(parents=True, exist_ok=True)
    tokenizer = build_word_tokenizer(words)
    vocab_size = tokenizer.get_vocab_size()
    window_samples = int(round(window_seconds * sample_rate_hz))
    assert window_samples % n_bands == 0, "pick n_bands dividing the window"

    if constant_text is not None:
        text_graph = ob.constant_text_encoder(dim=dim, value=constant_text)
    else:
        text_graph = ob.linear_text_encoder(vocab=vocab_size, dim=dim, seed=10)
    (root / "text_encoder.onnx").write_bytes(text_graph)
    (root / "audio_encoder.onnx").write_bytes(
        ob.linear_audio_encoder(window_samples=window_samples, dim=dim, n_bands=n_bands, seed=11)
    )
    (root / "fluency_classifier.onnx").write_bytes(
        ob.linear_fluency_classifier(vocab=vocab_size, dim=max(4, dim // 2), seed=12)
    )
    tokenizer.save(str(root / "text_tokenizer.json"))
    tokenizer.save(str(root / "fluency_tokenizer.json"))

    manifest = {
        "embedding_dim": dim,
        "sample_rate_hz": sample_rate_hz,
        "window_seconds": window_seconds,
        "text_token_limit": text_token_limit,
        "graphs": {
            "text_encoder": "text_encoder.onnx",
            "audio_encoder": "audio_encoder.onnx",
            "fluency_classifier": "fluency_classifier.onnx",
        },
        "tokenizers": {"text": "text_tokenizer.json", "fluency": "fluency_tokenizer.json"},
    }
    if manifest_overrides:
        manifest.update(manifest_overrides)
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return root
