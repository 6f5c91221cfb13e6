"""Command-line interface: score, eval, sweep, embed.

Backends are selected with ``--backend archive:<dir>`` or
``--backend model:<dir>`` (env var MACE_BACKEND supplies the default).
Exit codes: 0 success, 2 usage error, 3 data or backend error.
Stdout carries machine-readable results; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import List, Optional

from .archive import write_archive
from .audio import decode_wav
from .backends import (
    EMBEDDINGS_FILENAME,
    FLUENCY_FILENAME,
    ArchiveBackend,
    Backend,
)
from .dataset import load_dataset, load_score_table
from .errors import MaceError, RangeError
from .harness import accuracy_from_scores, pair_accuracy
from .metric import (
    DEFAULT_ALPHA,
    DEFAULT_AUDIO_TEXT_WEIGHT,
    DEFAULT_FLUENCY_THRESHOLD,
    MaceConfig,
    Variant,
    mace_from_embeddings,
)
from .model_backend import load_model_backend
from .reports import SCHEMA_VERSION, emit_report
from .sweep import DEFAULT_SEED, DEFAULT_VALIDATION_FRACTION, inclusive_range, sweep

BACKEND_ENV_VAR = "MACE_BACKEND"
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3


class _UsageError(Exception):
    """Raised for problems the user can fix on the command line."""


def _add_common_flags(parser: argparse.ArgumentParser, with_backend: bool = True) -> None:
    if with_backend:
        parser.add_argument(
            "--backend",
            default=os.environ.get(BACKEND_ENV_VAR),
            help=f"archive:<dir> or model:<dir> (default from ${BACKEND_ENV_VAR})",
        )
        parser.add_argument(
            "--audio-dir",
            default=None,
            help="directory resolving dataset audio ids to <id>.wav (model backends)",
        )
    parser.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="penalty coefficient")
    parser.add_argument(
        "--threshold",
        type=float,
        default=DEFAULT_FLUENCY_THRESHOLD,
        help="fluency gate threshold",
    )
    parser.add_argument(
        "--weight",
        type=float,
        default=DEFAULT_AUDIO_TEXT_WEIGHT,
        help="audio-text component weight in the full variant",
    )
    parser.add_argument(
        "--variant",
        choices=[v.value for v in Variant],
        default=Variant.FULL.value,
        help="which similarity components to combine",
    )
    parser.add_argument("--jobs", type=int, default=1, help="parallel scoring workers")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mace-eval",
        description="Audio-caption evaluation: fluency-gated multimodal similarity scoring.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", help="score one (audio, candidate, references) triple")
    p_score.add_argument("audio", help="audio file path (archive backends use the file stem as key)")
    p_score.add_argument("candidate", help="candidate caption text")
    p_score.add_argument("--references", help="text file with one reference caption per line")
    _add_common_flags(p_score)
    p_score.set_defaults(func=cmd_score)

    p_eval = sub.add_parser("eval", help="pair accuracy of a scorer over a dataset")
    p_eval.add_argument("dataset", help="JSON-lines dataset path")
    p_eval.add_argument(
        "--scores",
        help="rank an external score table (JSON {pair_id: [s0, s1]}) instead of a backend",
    )
    p_eval.add_argument(
        "--format", choices=("json", "csv", "table"), default="table", help="report format"
    )
    _add_common_flags(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_sweep = sub.add_parser("sweep", help="threshold x alpha ablation grid")
    p_sweep.add_argument("dataset", help="JSON-lines dataset path")
    p_sweep.add_argument("--thresholds", default="0.90:1.00:0.01", help="grid spec lo:hi:step")
    p_sweep.add_argument("--alphas", default="0.1:1.0:0.1", help="grid spec lo:hi:step")
    p_sweep.add_argument(
        "--val-frac",
        type=float,
        default=DEFAULT_VALIDATION_FRACTION,
        help="validation fraction (stratified by category)",
    )
    p_sweep.add_argument("--seed", type=int, default=DEFAULT_SEED, help="split seed")
    _add_common_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_embed = sub.add_parser("embed", help="precompute an embedding archive with a model backend")
    p_embed.add_argument("manifest", help="JSON-lines manifest of entries to embed")
    p_embed.add_argument("--model", required=True, help="model directory")
    p_embed.add_argument("--out", required=True, help="output directory for archive files")
    p_embed.set_defaults(func=cmd_embed)

    return parser


def _mace_config(args: argparse.Namespace) -> MaceConfig:
    try:
        return MaceConfig(
            alpha=args.alpha,
            fluency_threshold=args.threshold,
            audio_text_weight=args.weight,
            variant=Variant(args.variant),
        )
    except RangeError as exc:
        raise _UsageError(str(exc)) from exc


def _resolve_backend(args: argparse.Namespace) -> Backend:
    spec = args.backend
    if not spec:
        raise _UsageError(
            f"no backend given; pass --backend or set ${BACKEND_ENV_VAR} "
            "(archive:<dir> or model:<dir>)"
        )
    kind, _, location = spec.partition(":")
    if not location:
        raise _UsageError(f"malformed backend spec {spec!r}; expected kind:<path>")
    if kind == "archive":
        return ArchiveBackend.from_dir(location)
    if kind == "model":
        return load_model_backend(location, audio_dir=getattr(args, "audio_dir", None))
    raise _UsageError(f"unknown backend kind {kind!r}; expected archive or model")


def _parse_range_spec(spec: str, flag: str) -> List[float]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise _UsageError(f"{flag} expects lo:hi:step, got {spec!r}")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError as exc:
        raise _UsageError(f"{flag} expects numbers, got {spec!r}") from exc
    try:
        return inclusive_range(lo, hi, step)
    except RangeError as exc:
        raise _UsageError(f"{flag}: {exc}") from exc


def _read_references(path: Optional[str]) -> List[str]:
    if path is None:
        return []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise _UsageError(f"cannot read references file {path}: {exc}") from exc
    return [line.strip() for line in lines if line.strip()]


def _round6(value: Optional[float]) -> Optional[float]:
    return None if value is None else round(value, 6)


def cmd_score(args: argparse.Namespace) -> int:
    config = _mace_config(args)
    references = _read_references(args.references)
    if config.variant is not Variant.AT and not references:
        raise _UsageError(
            f"variant {config.variant.value} needs --references with at least one caption"
        )
    backend = _resolve_backend(args)

    audio_emb = None
    if config.variant is not Variant.TT:
        if isinstance(backend, ArchiveBackend):
            audio_emb = backend.embed_audio_id(Path(args.audio).stem)
        else:
            audio_emb = backend.embed_audio(decode_wav(args.audio))
    cand_emb = backend.embed_text(args.candidate)
    ref_embs = (
        [backend.embed_text(ref) for ref in references]
        if config.variant is not Variant.AT
        else None
    )
    breakdown = mace_from_embeddings(
        audio_emb, cand_emb, ref_embs, backend.fluency_prob(args.candidate), config
    )

    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "score",
        "audio": args.audio,
        "candidate": args.candidate,
        "config": config.to_dict(),
        "s_audio_text": _round6(breakdown.s_audio_text),
        "s_text_text": _round6(breakdown.s_text_text),
        "s_audio": _round6(breakdown.s_audio),
        "fluency_prob": _round6(breakdown.fluency_prob),
        "fp": breakdown.fp,
        "final": _round6(breakdown.final),
    }
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    config = _mace_config(args)
    pairs = load_dataset(args.dataset)
    if not pairs:
        raise _UsageError(f"dataset {args.dataset} contains no pairs")
    if args.scores:
        report = accuracy_from_scores(pairs, load_score_table(args.scores))
    else:
        backend = _resolve_backend(args)
        report = pair_accuracy(pairs, backend, config, jobs=max(1, args.jobs))
    sys.stdout.buffer.write(emit_report(report, args.format))
    sys.stdout.buffer.flush()
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _mace_config(args)
    thresholds = _parse_range_spec(args.thresholds, "--thresholds")
    alphas = _parse_range_spec(args.alphas, "--alphas")
    pairs = load_dataset(args.dataset)
    if not pairs:
        raise _UsageError(f"dataset {args.dataset} contains no pairs")
    backend = _resolve_backend(args)
    try:
        result = sweep(
            pairs,
            backend,
            thresholds,
            alphas,
            validation_fraction=args.val_frac,
            seed=args.seed,
            config=config,
            jobs=max(1, args.jobs),
        )
    except RangeError as exc:
        raise _UsageError(str(exc)) from exc
    sys.stdout.buffer.write(emit_report(result, "csv"))
    sys.stdout.buffer.flush()
    print(
        f"best: threshold={result.best_threshold:g} alpha={result.best_alpha:g} "
        f"accuracy={result.best_accuracy!r} (validation size {result.validation_size})",
        file=sys.stderr,
    )
    return EXIT_OK


def _load_manifest_entries(path: str):
    entries = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise _UsageError(f"cannot read manifest {path}: {exc}") from exc
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            entry = json.loads(line)
        except json.JSONDecodeError as exc:
            raise _UsageError(f"{path}:{line_no}: invalid JSON: {exc}") from exc
        kind = entry.get("kind")
        if kind not in ("text", "audio_path", "fluency"):
            raise _UsageError(f"{path}:{line_no}: kind must be text, audio_path, or fluency")
        if kind == "audio_path":
            if "path" not in entry:
                raise _UsageError(f"{path}:{line_no}: audio_path entries need a path")
            entry.setdefault("key", Path(entry["path"]).stem)
        elif not entry.get("key"):
            raise _UsageError(f"{path}:{line_no}: {kind} entries need a key")
        entries.append(entry)
    if not entries:
        raise _UsageError(f"manifest {path} contains no entries")
    return entries


def cmd_embed(args: argparse.Namespace) -> int:
    entries = _load_manifest_entries(args.manifest)
    backend = load_model_backend(args.model)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    embeddings = []
    fluency = []
    failures = []
    for entry in entries:
        key = entry["key"]
        try:
            if entry["kind"] == "text":
                embeddings.append((key, backend.embed_text(key)))
            elif entry["kind"] == "audio_path":
                embeddings.append((key, backend.embed_audio(decode_wav(entry["path"]))))
            else:
                fluency.append((key, [backend.fluency_prob(key)]))
        except (MaceError, OSError) as exc:
            failures.append({"key": key, "kind": entry["kind"], "error": str(exc)})

    if embeddings:
        write_archive(out_dir / EMBEDDINGS_FILENAME, embeddings)
    if fluency:
        write_archive(out_dir / FLUENCY_FILENAME, fluency)

    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "embed_summary",
        "embeddings_written": len(embeddings),
        "fluency_written": len(fluency),
        "failures": failures,
    }
    print(json.dumps(payload, indent=2))
    for failure in failures:
        print(f"failed {failure['kind']} entry {failure['key']!r}: {failure['error']}", file=sys.stderr)
    return EXIT_DATA if failures else EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    raise SystemExit(main())
