"""Cross-implementation check: the evaluator reproduces the golden breakdowns.

Everything flows through external surfaces only: the archives and audio
files written by this package plus the evaluator's command line.
"""

import json
import subprocess

import pytest

from fixture_tools import archive_io, build_tiny_bundle
from fixture_tools.goldens import build_goldens


def run_score(golden, golden_dir, tmp_path):
    config = golden["config"]
    argv = [
        "mace-eval",
        "score",
        str(golden_dir / golden["audio_path"]),
        golden["candidate"],
        "--backend",
        f"archive:{golden_dir / 'archives'}",
        "--alpha",
        str(config["alpha"]),
        "--threshold",
        str(config["fluency_threshold"]),
        "--weight",
        str(config["audio_text_weight"]),
        "--variant",
        config["variant"],
    ]
    if golden["references"]:
        refs_path = tmp_path / f"{golden['golden_id']}_refs.txt"
        refs_path.write_text("".join(ref + "\n" for ref in golden["references"]))
        argv += ["--references", str(refs_path)]
    proc = subprocess.run(argv, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout)


class TestGoldenEquivalence:
    def test_all_goldens_reproduced_within_1e6(self, golden_dir, tmp_path):
        payload = json.loads((golden_dir / "goldens.json").read_text())
        goldens = payload["goldens"]
        assert len(goldens) >= 10
        variants = {g["config"]["variant"] for g in goldens}
        assert variants == {"full", "at", "tt"}
        fps = {g["expected"]["fp"] for g in goldens}
        assert fps == {0, 1}

        for golden in goldens:
            got = run_score(golden, golden_dir, tmp_path)
            expected = golden["expected"]
            for field in ("s_audio_text", "s_text_text", "s_audio", "fluency_prob", "final"):
                if expected[field] is None:
                    assert got[field] is None, (golden["golden_id"], field)
                else:
                    assert got[field] == pytest.approx(expected[field], abs=1e-6), (
                        golden["golden_id"],
                        field,
                    )
            assert got["fp"] == expected["fp"], golden["golden_id"]

    def test_rebuild_is_deterministic(self, bundle, model_dir, tmp_path):
        first = build_goldens(bundle, tmp_path / "one", count=10, seed=3)
        second = build_goldens(build_tiny_bundle(seed=0), tmp_path / "two", count=10, seed=3)
        assert first.read_bytes() == second.read_bytes()
        for name in ("embeddings.arc", "fluency.arc"):
            a = (tmp_path / "one" / "archives" / name).read_bytes()
            b = (tmp_path / "two" / "archives" / name).read_bytes()
            assert a == b

    def test_archive_round_trip_is_bit_exact(self, bundle, golden_dir):
        # the stored float32 vectors equal the native encoder outputs exactly
        dim, table = archive_io.read(golden_dir / "archives" / "embeddings.arc")
        assert dim == bundle.embedding_dim
        payload = json.loads((golden_dir / "goldens.json").read_text())
        for golden in payload["goldens"][:5]:
            native = bundle.encode_text_native(golden["candidate"])
            stored = table[archive_io.digest(golden["candidate"])]
            assert stored.tobytes() == native.tobytes()
