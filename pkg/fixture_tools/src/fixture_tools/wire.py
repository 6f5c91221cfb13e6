"""Protobuf wire-format writer for emitting ONNX graphs.

Deliberately independent of any consumer: messages are assembled from the
ONNX IR field numbers with nothing shared beyond the published layout.
"""

from __future__ import annotations

import struct
from typing import Iterable

import numpy as np

ONNX_FLOAT = 1
ONNX_INT64 = 7

_NP_TO_ONNX = {
    np.dtype("float32"): ONNX_FLOAT,
    np.dtype("int64"): ONNX_INT64,
}


class Message:
    """Accumulates protobuf fields in write order."""

    def __init__(self):
        self._parts: list[bytes] = []

    @staticmethod
    def _varint(value: int) -> bytes:
        value &= (1 << 64) - 1
        chunks = bytearray()
        while True:
            low = value & 0x7F
            value >>= 7
            chunks.append(low | 0x80 if value else low)
            if not value:
                return bytes(chunks)

    def varint(self, field: int, value: int) -> "Message":
        self._parts.append(self._varint(field << 3 | 0) + self._varint(value))
        return self

    def fixed32(self, field: int, value: float) -> "Message":
        self._parts.append(self._varint(field << 3 | 5) + struct.pack("<f", value))
        return self

    def blob(self, field: int, payload: bytes) -> "Message":
        self._parts.append(self._varint(field << 3 | 2) + self._varint(len(payload)) + payload)
        return self

    def text(self, field: int, value: str) -> "Message":
        return self.blob(field, value.encode("utf-8"))

    def message(self, field: int, inner: "Message") -> "Message":
        return self.blob(field, inner.build())

    def build(self) -> bytes:
        return b"".join(self._parts)


def tensor_message(name: str, array: np.ndarray) -> Message:
    arr = np.ascontiguousarray(array)
    msg = Message()
    for dim in arr.shape:
        msg.varint(1, dim)
    msg.varint(2, _NP_TO_ONNX[arr.dtype])
    if name:
        msg.text(8, name)
    msg.blob(9, arr.tobytes())
    return msg


def _attribute(name: str, value) -> Message:
    msg = Message().text(1, name)
    if isinstance(value, int) and not isinstance(value, bool):
        msg.varint(3, value).varint(20, 2)
    elif isinstance(value, float):
        msg.fixed32(2, value).varint(20, 1)
    elif isinstance(value, np.ndarray):
        msg.message(5, tensor_message("", value)).varint(20, 4)
    elif isinstance(value, (list, tuple)):
        for item in value:
            msg.varint(8, int(item))
        msg.varint(20, 7)
    else:
        raise TypeError(f"unsupported attribute {name}={value!r}")
    return msg


def node_message(op_type: str, inputs: Iterable[str], outputs: Iterable[str], **attrs) -> Message:
    msg = Message()
    for name in inputs:
        msg.text(1, name)
    for name in outputs:
        msg.text(2, name)
    msg.text(4, op_type)
    for attr_name, attr_value in attrs.items():
        msg.message(5, _attribute(attr_name, attr_value))
    return msg


def value_info_message(name: str, elem_type: int, shape: Iterable) -> Message:
    shape_msg = Message()
    for dim in shape:
        dim_msg = Message()
        if isinstance(dim, str):
            dim_msg.text(2, dim)
        else:
            dim_msg.varint(1, int(dim))
        shape_msg.message(1, dim_msg)
    tensor_type = Message().varint(1, elem_type).message(2, shape_msg)
    type_proto = Message().message(1, tensor_type)
    return Message().text(1, name).message(2, type_proto)


def model_bytes(
    graph_name: str,
    nodes: Iterable[Message],
    initializers: Iterable[Message],
    inputs: Iterable[Message],
    outputs: Iterable[Message],
    opset: int = 17,
    producer: str = "fixture-tools",
) -> bytes:
    graph = Message()
    for node in nodes:
        graph.message(1, node)
    graph.text(2, graph_name)
    for init in initializers:
        graph.message(5, init)
    for vi in inputs:
        graph.message(11, vi)
    for vi in outputs:
        graph.message(12, vi)
    opset_msg = Message().text(1, "").varint(2, opset)
    model = Message().varint(1, 8).text(2, producer)
    model.message(7, graph).message(8, opset_msg)
    return model.build()
