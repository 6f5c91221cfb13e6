"""Offline pipeline commands: export-models, build-goldens, convert."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .convert import AUDIOCAPS_EVAL_PAIRS, CLOTHO_EVAL_PAIRS, ConversionError, convert_dataset
from .export import ExportError, export_models, PROVENANCE_FILENAME
from .goldens import build_goldens
from .tiny_models import build_tiny_bundle, load_reference_bundle


def _bundle_from_args(args: argparse.Namespace):
    if args.reference:
        return load_reference_bundle()
    return build_tiny_bundle(seed=args.seed)


def cmd_export_models(args: argparse.Namespace) -> int:
    bundle = _bundle_from_args(args)
    report = export_models(bundle, args.out, mace_eval=args.mace_eval)
    print(json.dumps({"model_dir": str(args.out), "self_check": report}, indent=2))
    return 0


def cmd_build_goldens(args: argparse.Namespace) -> int:
    model_dir = Path(args.model)
    provenance_path = model_dir / PROVENANCE_FILENAME
    if not provenance_path.exists():
        print(f"error: {provenance_path} missing; export the model dir first", file=sys.stderr)
        return 3
    provenance = json.loads(provenance_path.read_text())
    bundle_name = provenance.get("bundle", "")
    if bundle_name.startswith("tiny-seed"):
        bundle = build_tiny_bundle(seed=int(bundle_name.removeprefix("tiny-seed")))
    else:
        bundle = load_reference_bundle()
    golden_path = build_goldens(bundle, args.out, count=args.count, seed=args.seed)
    print(json.dumps({"goldens": str(golden_path)}, indent=2))
    return 0


def cmd_convert(args: argparse.Namespace) -> int:
    expected = {
        "clotho": CLOTHO_EVAL_PAIRS,
        "audiocaps": AUDIOCAPS_EVAL_PAIRS,
    }.get(args.benchmark, args.expect)
    if expected is None:
        print("error: unknown benchmark; pass --expect COUNT", file=sys.stderr)
        return 2
    counts = convert_dataset(args.upstream, args.benchmark, expected, args.out)
    print(json.dumps({"dataset": str(args.out), "per_category": counts}, indent=2))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fixture-tools",
        description="Offline tooling: export encoder models, build goldens, convert datasets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_export = sub.add_parser("export-models", help="write a model directory and self-check it")
    p_export.add_argument("--out", required=True, help="output model directory")
    p_export.add_argument("--seed", type=int, default=0, help="tiny-bundle seed")
    p_export.add_argument(
        "--reference", action="store_true", help="export the reference checkpoints instead"
    )
    p_export.add_argument("--mace-eval", default="mace-eval", help="evaluator executable")
    p_export.set_defaults(func=cmd_export_models)

    p_goldens = sub.add_parser("build-goldens", help="emit archives plus golden breakdowns")
    p_goldens.add_argument("--model", required=True, help="exported model directory")
    p_goldens.add_argument("--out", required=True, help="output directory")
    p_goldens.add_argument("--count", type=int, default=12)
    p_goldens.add_argument("--seed", type=int, default=7)
    p_goldens.set_defaults(func=cmd_build_goldens)

    p_convert = sub.add_parser("convert", help="convert upstream annotation CSVs to JSON-lines")
    p_convert.add_argument("upstream", help="directory with hc/hi/hm/mm.csv")
    p_convert.add_argument("--benchmark", required=True, help="clotho | audiocaps | custom tag")
    p_convert.add_argument("--expect", type=int, default=None, help="expected pair count")
    p_convert.add_argument("--out", required=True, help="output JSON-lines path")
    p_convert.set_defaults(func=cmd_convert)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except (ConversionError, ExportError, NotImplementedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
