import json

import numpy as np
import pytest

from mace_eval.archive import write_archive
from mace_eval.audio import (
    AudioBuffer,
    aggregate_chunk_embeddings,
    encode_wav,
    iter_chunk_windows,
    plan_chunks,
)
from mace_eval.backends import EMBEDDINGS_FILENAME, FLUENCY_FILENAME, ArchiveBackend
from mace_eval.errors import (
    BackendCapabilityError,
    KeyNotFoundError,
    ModelLoadError,
    RangeError,
)
from mace_eval.graph_runtime import GraphExecutor, load_model
from mace_eval.metric import MaceConfig, mace_from_embeddings
from mace_eval.model_backend import load_model_backend

from model_fixtures import DEFAULT_WORDS, build_model_dir


@pytest.fixture(scope="module")
def model_dir(tmp_path_factory):
    return build_model_dir(tmp_path_factory.mktemp("model"), dim=6, sample_rate_hz=8000)


@pytest.fixture(scope="module")
def backend(model_dir):
    return load_model_backend(model_dir)


class TestLoading:
    def test_loads_and_reports_dim(self, backend):
        assert backend.embedding_dim() == 6

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(ModelLoadError):
            load_model_backend(tmp_path)

    def test_manifest_dim_mismatch(self, tmp_path):
        root = build_model_dir(tmp_path / "m", dim=6, manifest_overrides={"embedding_dim": 7})
        with pytest.raises(ModelLoadError, match="dim"):
            load_model_backend(root)

    def test_window_mismatch(self, tmp_path):
        root = build_model_dir(tmp_path / "m", dim=6, manifest_overrides={"window_seconds": 3.0})
        with pytest.raises(ModelLoadError, match="window"):
            load_model_backend(root)

    def test_missing_graph_file(self, tmp_path):
        root = build_model_dir(tmp_path / "m", dim=6)
        (root / "audio_encoder.onnx").unlink()
        with pytest.raises(ModelLoadError):
            load_model_backend(root)

    def test_missing_tokenizer_file(self, tmp_path):
        root = build_model_dir(tmp_path / "m", dim=6)
        (root / "fluency_tokenizer.json").unlink()
        with pytest.raises(ModelLoadError):
            load_model_backend(root)

    def test_manifest_missing_field(self, tmp_path):
        root = build_model_dir(tmp_path / "m", dim=6)
        manifest = json.loads((root / "manifest.json").read_text())
        del manifest["text_token_limit"]
        (root / "manifest.json").write_text(json.dumps(manifest))
        with pytest.raises(ModelLoadError):
            load_model_backend(root)


class TestTextPath:
    def test_constant_model_emits_known_vector(self, tmp_path):
        root = build_model_dir(tmp_path / "m", dim=5, constant_text=0.125)
        backend = load_model_backend(root)
        np.testing.assert_array_equal(
            backend.embed_text("x"), np.full(5, 0.125, dtype=np.float32)
        )

    def test_matches_direct_graph_execution(self, backend, model_dir):
        text = "rain falls on the roof"
        got = backend.embed_text(text)
        executor = GraphExecutor(load_model(model_dir / "text_encoder.onnx"))
        from tokenizers import Tokenizer

        tok = Tokenizer.from_file(str(model_dir / "text_tokenizer.json"))
        ids = np.asarray([tok.encode(text).ids], dtype=np.int64)
        want = executor.run({"input_ids": ids})["embedding"].reshape(-1)
        np.testing.assert_array_equal(got, want.astype(np.float32))

    def test_token_truncation(self, backend):
        base_words = ["rain", "falls", "on", "the", "roof", "dog", "barks", "wind"] * 2
        long_text = " ".join(base_words + ["loud", "quiet", "door", "slams"])
        first_16 = " ".join(base_words)
        np.testing.assert_array_equal(
            backend.embed_text(long_text), backend.embed_text(first_16)
        )

    def test_empty_text(self, backend):
        with pytest.raises(RangeError):
            backend.embed_text("")

    def test_determinism(self, backend):
        a = backend.embed_text("dog barks")
        b = backend.embed_text("dog barks")
        assert a.tobytes() == b.tobytes()


class TestFluencyPath:
    def test_in_range_for_a_thousand_captions(self, backend):
        rng = np.random.default_rng(4)
        for _ in range(1000):
            n = int(rng.integers(1, 10))
            caption = " ".join(rng.choice(DEFAULT_WORDS, size=n))
            assert 0.0 <= backend.fluency_prob(caption) <= 1.0

    def test_empty_text(self, backend):
        with pytest.raises(RangeError):
            backend.fluency_prob("  ")


class TestAudioPath:
    def test_decomposes_into_chunk_aggregation(self, backend, model_dir):
        rng = np.random.default_rng(9)
        rate = 8000
        buf = AudioBuffer(rng.uniform(-0.8, 0.8, size=int(rate * 17.5)), rate)
        got = backend.embed_audio(buf)

        executor = GraphExecutor(load_model(model_dir / "audio_encoder.onnx"))
        plan = plan_chunks(buf, 7.0)
        embeddings = []
        durations = []
        for window, duration in iter_chunk_windows(buf, plan):
            out = executor.run({"audio": window.astype(np.float32)[None, :]})["embedding"]
            embeddings.append(out.reshape(-1))
            durations.append(duration)
        want = aggregate_chunk_embeddings(embeddings, durations).astype(np.float32)
        np.testing.assert_array_equal(got, want)
        assert len(plan.chunks) == 3

    def test_resamples_foreign_rates(self, backend):
        rng = np.random.default_rng(10)
        buf = AudioBuffer(rng.uniform(-0.5, 0.5, size=16000 * 2), 16000)
        out = backend.embed_audio(buf)
        assert out.shape == (6,)
        assert out.dtype == np.float32

    def test_audio_id_resolution(self, tmp_path, model_dir):
        rng = np.random.default_rng(12)
        audio_dir = tmp_path / "audio"
        audio_dir.mkdir()
        buf = AudioBuffer(rng.uniform(-0.5, 0.5, size=8000 * 3), 8000)
        (audio_dir / "clip_7.wav").write_bytes(encode_wav(buf, "pcm16"))
        backend = load_model_backend(model_dir, audio_dir=audio_dir)
        from mace_eval.audio import decode_wav

        direct = backend.embed_audio(decode_wav(str(audio_dir / "clip_7.wav")))
        np.testing.assert_array_equal(backend.embed_audio_id("clip_7"), direct)
        with pytest.raises(KeyNotFoundError):
            backend.embed_audio_id("clip_404")

    def test_audio_id_without_dir(self, backend):
        with pytest.raises(BackendCapabilityError):
            backend.embed_audio_id("clip_1")


class TestSubstitutability:
    def test_archive_and_model_finals_agree(self, tmp_path, model_dir):
        rng = np.random.default_rng(13)
        audio_dir = tmp_path / "audio"
        audio_dir.mkdir()
        buf = AudioBuffer(rng.uniform(-0.6, 0.6, size=8000 * 9), 8000)
        (audio_dir / "clip_sub.wav").write_bytes(encode_wav(buf, "float32"))
        model = load_model_backend(model_dir, audio_dir=audio_dir)

        captions = ["a dog barks", "rain falls softly on a roof", "wind blows"]
        entries = [(c, model.embed_text(c)) for c in captions]
        entries.append(("clip_sub", model.embed_audio_id("clip_sub")))
        arc_dir = tmp_path / "arc"
        arc_dir.mkdir()
        write_archive(arc_dir / EMBEDDINGS_FILENAME, entries)
        write_archive(
            arc_dir / FLUENCY_FILENAME, [(c, [model.fluency_prob(c)]) for c in captions]
        )
        archive = ArchiveBackend.from_dir(arc_dir)

        cfg = MaceConfig()
        for cand in captions[:2]:
            refs = [captions[2]]
            via_model = mace_from_embeddings(
                model.embed_audio_id("clip_sub"),
                model.embed_text(cand),
                [model.embed_text(r) for r in refs],
                model.fluency_prob(cand),
                cfg,
            )
            via_archive = mace_from_embeddings(
                archive.embed_audio_id("clip_sub"),
                archive.embed_text(cand),
                [archive.embed_text(r) for r in refs],
                archive.fluency_prob(cand),
                cfg,
            )
            assert via_model.final == pytest.approx(via_archive.final, abs=1e-4)
