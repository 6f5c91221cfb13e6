"""Offline tooling for the evaluator: export, conversion, golden fixtures."""

from .convert import AUDIOCAPS_EVAL_PAIRS, CLOTHO_EVAL_PAIRS, ConversionError, convert_dataset
from .export import ExportError, export_models, run_self_check, write_model_dir
from .goldens import build_goldens
from .tiny_models import ModelBundle, build_tiny_bundle, load_reference_bundle

__all__ = [
    "AUDIOCAPS_EVAL_PAIRS",
    "CLOTHO_EVAL_PAIRS",
    "ConversionError",
    "ExportError",
    "ModelBundle",
    "build_goldens",
    "build_tiny_bundle",
    "convert_dataset",
    "export_models",
    "load_reference_bundle",
    "run_self_check",
    "write_model_dir",
]
