"""Serialize the bundle's encoder weights as ONNX graphs.

Each exporter writes the exact node sequence the matching torch module
computes, so native and exported outputs agree to float32 tolerance.
"""

from __future__ import annotations

import numpy as np

from .tiny_models import ModelBundle
from .wire import (
    ONNX_FLOAT,
    ONNX_INT64,
    model_bytes,
    node_message,
    tensor_message,
    value_info_message,
)


def export_text_encoder(bundle: ModelBundle) -> bytes:
    table = bundle.text_encoder.table.numpy()
    weight = bundle.text_encoder.weight.numpy()
    bias = bundle.text_encoder.bias.numpy()
    nodes = [
        node_message("Gather", ["table", "input_ids"], ["tok"], axis=0),
        node_message("ReduceMean", ["tok"], ["pooled"], axes=[1], keepdims=0),
        node_message("MatMul", ["pooled", "weight"], ["proj"]),
        node_message("Add", ["proj", "bias"], ["affine"]),
        node_message("Tanh", ["affine"], ["embedding"]),
    ]
    return model_bytes(
        "text_encoder",
        nodes,
        [tensor_message("table", table), tensor_message("weight", weight), tensor_message("bias", bias)],
        [value_info_message("input_ids", ONNX_INT64, [1, "tokens"])],
        [value_info_message("embedding", ONNX_FLOAT, [1, bundle.embedding_dim])],
    )


def export_audio_encoder(bundle: ModelBundle) -> bytes:
    weight = bundle.audio_encoder.weight.numpy()
    bias = bundle.audio_encoder.bias.numpy()
    band_shape = np.asarray(
        [1, bundle.n_bands, bundle.window_samples // bundle.n_bands], dtype=np.int64
    )
    nodes = [
        node_message("Reshape", ["audio", "band_shape"], ["banded"]),
        node_message("ReduceMean", ["banded"], ["bands"], axes=[2], keepdims=0),
        node_message("MatMul", ["bands", "weight"], ["proj"]),
        node_message("Add", ["proj", "bias"], ["affine"]),
        node_message("Tanh", ["affine"], ["embedding"]),
    ]
    return model_bytes(
        "audio_encoder",
        nodes,
        [
            tensor_message("band_shape", band_shape),
            tensor_message("weight", weight),
            tensor_message("bias", bias),
        ],
        [value_info_message("audio", ONNX_FLOAT, [1, bundle.window_samples])],
        [value_info_message("embedding", ONNX_FLOAT, [1, bundle.embedding_dim])],
    )


def export_fluency_classifier(bundle: ModelBundle) -> bytes:
    table = bundle.fluency_classifier.table.numpy()
    weight = bundle.fluency_classifier.weight.numpy()
    nodes = [
        node_message("Gather", ["table", "input_ids"], ["tok"], axis=0),
        node_message("ReduceMean", ["tok"], ["pooled"], axes=[1], keepdims=0),
        node_message("MatMul", ["pooled", "weight"], ["logit"]),
        node_message("Sigmoid", ["logit"], ["error_prob"]),
    ]
    return model_bytes(
        "fluency_classifier",
        nodes,
        [tensor_message("table", table), tensor_message("weight", weight)],
        [value_info_message("input_ids", ONNX_INT64, [1, "tokens"])],
        [value_info_message("error_prob", ONNX_FLOAT, [1, 1])],
    )
