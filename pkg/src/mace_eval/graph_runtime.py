"""Self-contained ONNX graph loader and numpy executor.

Parses the ONNX protobuf wire format directly (no protobuf/onnxruntime
dependency) and evaluates a documented operator subset with numpy.  The
subset covers feed-forward encoder graphs: embedding lookups, linear
layers, activations, reductions, normalization, and shape plumbing.
Execution is stateless and deterministic, so one executor can serve any
number of threads concurrently.

Field numbers follow the ONNX IR definition of ModelProto and friends;
unknown fields are skipped, which keeps the reader tolerant of graphs
produced by other exporters.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import special

from .errors import InferenceError, ModelLoadError

# --------------------------------------------------------------------------
# protobuf wire primitives
# --------------------------------------------------------------------------

_WIRE_VARINT = 0
_WIRE_FIXED64 = 1
_WIRE_LEN = 2
_WIRE_FIXED32 = 5


def _read_varint(data: bytes, pos: int) -> Tuple[int, int]:
    result = 0
    shift = 0
    while True:
        if pos >= len(data):
            raise ModelLoadError("truncated varint in graph file")
        byte = data[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return result, pos
        shift += 7
        if shift > 70:
            raise ModelLoadError("varint too long in graph file")


def _to_signed64(value: int) -> int:
    value &= (1 << 64) - 1
    return value - (1 << 64) if value >= 1 << 63 else value


def _iter_fields(data: bytes):
    """Yield (field_number, wire_type, value) triples from one message."""
    pos = 0
    while pos < len(data):
        tag, pos = _read_varint(data, pos)
        number, wire = tag >> 3, tag & 0x7
        if wire == _WIRE_VARINT:
            value, pos = _read_varint(data, pos)
        elif wire == _WIRE_FIXED64:
            value, pos = data[pos : pos + 8], pos + 8
        elif wire == _WIRE_LEN:
            length, pos = _read_varint(data, pos)
            value, pos = data[pos : pos + length], pos + length
            if len(value) < length:
                raise ModelLoadError("truncated length-delimited field in graph file")
        elif wire == _WIRE_FIXED32:
            value, pos = data[pos : pos + 4], pos + 4
        else:
            raise ModelLoadError(f"unsupported protobuf wire type {wire}")
        if pos > len(data):
            raise ModelLoadError("field extends past end of graph file")
        yield number, wire, value


def _packed_varints(value: bytes) -> List[int]:
    out = []
    pos = 0
    while pos < len(value):
        item, pos = _read_varint(value, pos)
        out.append(_to_signed64(item))
    return out


# --------------------------------------------------------------------------
# model structure
# --------------------------------------------------------------------------

_DTYPES = {
    1: np.dtype("<f4"),
    2: np.dtype("u1"),
    3: np.dtype("i1"),
    4: np.dtype("<u2"),
    5: np.dtype("<i2"),
    6: np.dtype("<i4"),
    7: np.dtype("<i8"),
    9: np.dtype("bool"),
    10: np.dtype("<f2"),
    11: np.dtype("<f8"),
    12: np.dtype("<u4"),
    13: np.dtype("<u8"),
}

_ATTR_FLOAT = 1
_ATTR_INT = 2
_ATTR_STRING = 3
_ATTR_TENSOR = 4
_ATTR_FLOATS = 6
_ATTR_INTS = 7
_ATTR_STRINGS = 8


@dataclass
class OnnxNode:
    op_type: str
    name: str
    inputs: List[str]
    outputs: List[str]
    attrs: Dict[str, object]


@dataclass
class TensorSpec:
    """Declared name, element type, and shape (None for dynamic dims)."""

    name: str
    dtype: Optional[np.dtype]
    shape: Tuple[Optional[int], ...]


@dataclass
class OnnxModel:
    ir_version: int
    opset_version: int
    nodes: List[OnnxNode]
    initializers: Dict[str, np.ndarray]
    inputs: List[TensorSpec]
    outputs: List[TensorSpec]
    graph_name: str = ""

    @property
    def feed_inputs(self) -> List[TensorSpec]:
        """Graph inputs that are not bound by initializers."""
        return [spec for spec in self.inputs if spec.name not in self.initializers]


def _parse_tensor(data: bytes) -> Tuple[str, np.ndarray]:
    dims: List[int] = []
    data_type = 1
    name = ""
    raw: Optional[bytes] = None
    floats: List[float] = []
    ints32: List[int] = []
    ints64: List[int] = []
    doubles: List[float] = []
    for number, wire, value in _iter_fields(data):
        if number == 1:  # dims
            if wire == _WIRE_LEN:
                dims.extend(_packed_varints(value))
            else:
                dims.append(_to_signed64(value))
        elif number == 2 and wire == _WIRE_VARINT:
            data_type = value
        elif number == 4:  # float_data
            if wire == _WIRE_LEN:
                floats.extend(np.frombuffer(value, dtype="<f4").tolist())
            else:
                floats.append(np.frombuffer(value, dtype="<f4")[0])
        elif number == 5:  # int32_data
            if wire == _WIRE_LEN:
                ints32.extend(_packed_varints(value))
            else:
                ints32.append(_to_signed64(value))
        elif number == 7:  # int64_data
            if wire == _WIRE_LEN:
                ints64.extend(_packed_varints(value))
            else:
                ints64.append(_to_signed64(value))
        elif number == 8 and wire == _WIRE_LEN:
            name = value.decode("utf-8")
        elif number == 9 and wire == _WIRE_LEN:
            raw = value
        elif number == 10:  # double_data
            if wire == _WIRE_LEN:
                doubles.extend(np.frombuffer(value, dtype="<f8").tolist())
            else:
                doubles.append(np.frombuffer(value, dtype="<f8")[0])
        elif number == 14 and wire == _WIRE_VARINT and value != 0:
            raise ModelLoadError(f"tensor {name!r} uses external data, which is unsupported")

    dtype = _DTYPES.get(data_type)
    if dtype is None:
        raise ModelLoadError(f"tensor {name!r} has unsupported element type {data_type}")
    shape = tuple(dims)
    if raw is not None:
        arr = np.frombuffer(raw, dtype=dtype).reshape(shape).copy()
    elif floats:
        arr = np.asarray(floats, dtype=dtype).reshape(shape)
    elif doubles:
        arr = np.asarray(doubles, dtype=dtype).reshape(shape)
    elif ints64:
        arr = np.asarray(ints64, dtype=dtype).reshape(shape)
    elif ints32:
        arr = np.asarray(ints32).astype(dtype).reshape(shape)
    else:
        arr = np.zeros(shape, dtype=dtype)
    return name, arr


def _parse_attribute(data: bytes) -> Tuple[str, object]:
    name = ""
    attr_type = None
    scalar_f = None
    scalar_i = None
    scalar_s = None
    tensor = None
    floats: List[float] = []
    ints: List[int] = []
    strings: List[bytes] = []
    for number, wire, value in _iter_fields(data):
        if number == 1 and wire == _WIRE_LEN:
            name = value.decode("utf-8")
        elif number == 2 and wire == _WIRE_FIXED32:
            scalar_f = float(np.frombuffer(value, dtype="<f4")[0])
        elif number == 3 and wire == _WIRE_VARINT:
            scalar_i = _to_signed64(value)
        elif number == 4 and wire == _WIRE_LEN:
            scalar_s = value
        elif number == 5 and wire == _WIRE_LEN:
            tensor = _parse_tensor(value)[1]
        elif number == 7:
            if wire == _WIRE_LEN:
                floats.extend(np.frombuffer(value, dtype="<f4").tolist())
            else:
                floats.append(float(np.frombuffer(value, dtype="<f4")[0]))
        elif number == 8:
            if wire == _WIRE_LEN:
                ints.extend(_packed_varints(value))
            else:
                ints.append(_to_signed64(value))
        elif number == 9 and wire == _WIRE_LEN:
            strings.append(value)
        elif number == 20 and wire == _WIRE_VARINT:
            attr_type = value

    # proto3 writers omit zero-valued scalars, so typed attributes fall back
    # to the wire default when the payload field is absent
    if attr_type == _ATTR_FLOAT:
        return name, scalar_f if scalar_f is not None else 0.0
    if attr_type == _ATTR_INT:
        return name, scalar_i if scalar_i is not None else 0
    if attr_type == _ATTR_STRING:
        return name, scalar_s.decode("utf-8") if scalar_s is not None else ""
    if attr_type == _ATTR_TENSOR:
        return name, tensor
    if attr_type == _ATTR_FLOATS:
        return name, list(floats)
    if attr_type == _ATTR_INTS:
        return name, list(ints)
    if attr_type == _ATTR_STRINGS:
        return name, [s.decode("utf-8") for s in strings]
    # writers may omit the type tag; fall back on whichever payload showed up
    for candidate in (scalar_f, scalar_i, tensor):
        if candidate is not None:
            return name, candidate
    if floats:
        return name, list(floats)
    if ints:
        return name, list(ints)
    if scalar_s is not None:
        return name, scalar_s.decode("utf-8")
    return name, None


def _parse_node(data: bytes) -> OnnxNode:
    inputs: List[str] = []
    outputs: List[str] = []
    name = ""
    op_type = ""
    domain = ""
    attrs: Dict[str, object] = {}
    for number, wire, value in _iter_fields(data):
        if number == 1 and wire == _WIRE_LEN:
            inputs.append(value.decode("utf-8"))
        elif number == 2 and wire == _WIRE_LEN:
            outputs.append(value.decode("utf-8"))
        elif number == 3 and wire == _WIRE_LEN:
            name = value.decode("utf-8")
        elif number == 4 and wire == _WIRE_LEN:
            op_type = value.decode("utf-8")
        elif number == 5 and wire == _WIRE_LEN:
            attr_name, attr_value = _parse_attribute(value)
            attrs[attr_name] = attr_value
        elif number == 7 and wire == _WIRE_LEN:
            domain = value.decode("utf-8")
    if domain not in ("", "ai.onnx"):
        raise ModelLoadError(f"node {name!r} uses unsupported operator domain {domain!r}")
    return OnnxNode(op_type=op_type, name=name, inputs=inputs, outputs=outputs, attrs=attrs)


def _parse_value_info(data: bytes) -> TensorSpec:
    name = ""
    dtype = None
    shape: Tuple[Optional[int], ...] = ()
    for number, wire, value in _iter_fields(data):
        if number == 1 and wire == _WIRE_LEN:
            name = value.decode("utf-8")
        elif number == 2 and wire == _WIRE_LEN:
            for t_num, t_wire, t_val in _iter_fields(value):
                if t_num == 1 and t_wire == _WIRE_LEN:  # tensor_type
                    elem = None
                    dims: List[Optional[int]] = []
                    for e_num, e_wire, e_val in _iter_fields(t_val):
                        if e_num == 1 and e_wire == _WIRE_VARINT:
                            elem = e_val
                        elif e_num == 2 and e_wire == _WIRE_LEN:  # shape
                            for s_num, s_wire, s_val in _iter_fields(e_val):
                                if s_num == 1 and s_wire == _WIRE_LEN:  # dim
                                    dim_value: Optional[int] = None
                                    for d_num, d_wire, d_val in _iter_fields(s_val):
                                        if d_num == 1 and d_wire == _WIRE_VARINT:
                                            dim_value = _to_signed64(d_val)
                                    dims.append(dim_value)
                    dtype = _DTYPES.get(elem) if elem is not None else None
                    shape = tuple(dims)
    return TensorSpec(name=name, dtype=dtype, shape=shape)


def _parse_graph(data: bytes) -> Tuple[List[OnnxNode], Dict[str, np.ndarray], List[TensorSpec], List[TensorSpec], str]:
    nodes: List[OnnxNode] = []
    initializers: Dict[str, np.ndarray] = {}
    inputs: List[TensorSpec] = []
    outputs: List[TensorSpec] = []
    graph_name = ""
    for number, wire, value in _iter_fields(data):
        if number == 1 and wire == _WIRE_LEN:
            nodes.append(_parse_node(value))
        elif number == 2 and wire == _WIRE_LEN:
            graph_name = value.decode("utf-8")
        elif number == 5 and wire == _WIRE_LEN:
            name, arr = _parse_tensor(value)
            initializers[name] = arr
        elif number == 11 and wire == _WIRE_LEN:
            inputs.append(_parse_value_info(value))
        elif number == 12 and wire == _WIRE_LEN:
            outputs.append(_parse_value_info(value))
    return nodes, initializers, inputs, outputs, graph_name


def load_model(source: Union[bytes, str, Path]) -> OnnxModel:
    """Parse ONNX bytes (or a file path) into an OnnxModel."""
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        try:
            with open(source, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise ModelLoadError(f"cannot read graph file {source}: {exc}") from exc

    ir_version = 0
    opset_version = 0
    graph_fields = None
    try:
        for number, wire, value in _iter_fields(data):
            if number == 1 and wire == _WIRE_VARINT:
                ir_version = _to_signed64(value)
            elif number == 7 and wire == _WIRE_LEN:
                graph_fields = value
            elif number == 8 and wire == _WIRE_LEN:
                domain = ""
                version = 0
                for o_num, o_wire, o_val in _iter_fields(value):
                    if o_num == 1 and o_wire == _WIRE_LEN:
                        domain = o_val.decode("utf-8")
                    elif o_num == 2 and o_wire == _WIRE_VARINT:
                        version = _to_signed64(o_val)
                if domain in ("", "ai.onnx"):
                    opset_version = version
    except ModelLoadError:
        raise
    except Exception as exc:
        raise ModelLoadError(f"malformed graph file: {exc}") from exc

    if graph_fields is None:
        raise ModelLoadError("graph file has no graph payload")
    nodes, initializers, inputs, outputs, graph_name = _parse_graph(graph_fields)
    if not outputs:
        raise ModelLoadError("graph declares no outputs")
    return OnnxModel(
        ir_version=ir_version,
        opset_version=opset_version,
        nodes=nodes,
        initializers=initializers,
        inputs=inputs,
        outputs=outputs,
        graph_name=graph_name,
    )


# --------------------------------------------------------------------------
# executor
# --------------------------------------------------------------------------


def _attr(node: OnnxNode, name: str, default=None):
    return node.attrs.get(name, default)


def _axes_from(node: OnnxNode, values: Dict[str, np.ndarray], input_idx: int):
    """Axes given either as an attribute or as a trailing int64 input."""
    if "axes" in node.attrs:
        return [int(a) for a in node.attrs["axes"]]
    if len(node.inputs) > input_idx and node.inputs[input_idx]:
        return [int(a) for a in values[node.inputs[input_idx]].ravel()]
    return None


class GraphExecutor:
    """Evaluates a parsed model on named feeds.

    Raises ModelLoadError for graphs containing unsupported operators and
    InferenceError for feed/shape problems at run time.
    """

    def __init__(self, model: OnnxModel):
        self.model = model
        unsupported = sorted(
            {node.op_type for node in model.nodes if node.op_type not in _OP_TABLE}
        )
        if unsupported:
            raise ModelLoadError(f"unsupported operators: {', '.join(unsupported)}")

    def run(self, feeds: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
        values: Dict[str, np.ndarray] = dict(self.model.initializers)
        for spec in self.model.feed_inputs:
            if spec.name not in feeds:
                raise InferenceError(f"missing feed for graph input {spec.name!r}")
            arr = np.asarray(feeds[spec.name])
            if spec.dtype is not None and arr.dtype != spec.dtype:
                arr = arr.astype(spec.dtype)
            if len(spec.shape) and arr.ndim != len(spec.shape):
                raise InferenceError(
                    f"input {spec.name!r} expects rank {len(spec.shape)}, got {arr.ndim}"
                )
            for axis, declared in enumerate(spec.shape):
                if declared is not None and declared >= 0 and arr.shape[axis] != declared:
                    raise InferenceError(
                        f"input {spec.name!r} axis {axis} expects {declared}, got {arr.shape[axis]}"
                    )
            values[spec.name] = arr

        for node in self.model.nodes:
            try:
                args = [values[name] if name else None for name in node.inputs]
            except KeyError as exc:
                raise InferenceError(
                    f"node {node.name or node.op_type} consumes unknown value {exc}"
                ) from exc
            try:
                results = _OP_TABLE[node.op_type](node, args, values)
            except (InferenceError, ModelLoadError):
                raise
            except Exception as exc:
                raise InferenceError(
                    f"node {node.name or node.op_type} ({node.op_type}) failed: {exc}"
                ) from exc
            if not isinstance(results, tuple):
                results = (results,)
            for out_name, result in zip(node.outputs, results):
                if out_name:
                    values[out_name] = np.asarray(result)

        outputs = {}
        for spec in self.model.outputs:
            if spec.name not in values:
                raise InferenceError(f"graph output {spec.name!r} was never produced")
            outputs[spec.name] = values[spec.name]
        return outputs


def _op_gemm(node, args, values):
    a, b = args[0], args[1]
    if int(_attr(node, "transA", 0)):
        a = a.T
    if int(_attr(node, "transB", 0)):
        b = b.T
    y = float(_attr(node, "alpha", 1.0)) * (a @ b)
    if len(args) > 2 and args[2] is not None:
        y = y + float(_attr(node, "beta", 1.0)) * args[2]
    return y.astype(args[0].dtype, copy=False)


def _op_reshape(node, args, values):
    data, shape = args[0], [int(s) for s in args[1].ravel()]
    resolved = [data.shape[i] if s == 0 else s for i, s in enumerate(shape)]
    return data.reshape(resolved)


def _op_reduce(np_fn):
    def impl(node, args, values):
        axes = _axes_from(node, values, 1)
        keepdims = bool(int(_attr(node, "keepdims", 1)))
        axis = tuple(axes) if axes is not None else None
        return np_fn(args[0], axis=axis, keepdims=keepdims, dtype=args[0].dtype)

    return impl


def _op_squeeze(node, args, values):
    axes = _axes_from(node, values, 1)
    if axes is None:
        return np.squeeze(args[0])
    return np.squeeze(args[0], axis=tuple(axes))


def _op_unsqueeze(node, args, values):
    axes = _axes_from(node, values, 1)
    out = args[0]
    for axis in sorted(axes):
        out = np.expand_dims(out, axis=axis)
    return out


def _op_slice(node, args, values):
    data = args[0]
    if len(args) > 1 and args[1] is not None:
        starts = [int(v) for v in args[1].ravel()]
        ends = [int(v) for v in args[2].ravel()]
        axes = (
            [int(v) for v in args[3].ravel()]
            if len(args) > 3 and args[3] is not None
            else list(range(len(starts)))
        )
        steps = (
            [int(v) for v in args[4].ravel()]
            if len(args) > 4 and args[4] is not None
            else [1] * len(starts)
        )
    else:
        starts = [int(v) for v in _attr(node, "starts", [])]
        ends = [int(v) for v in _attr(node, "ends", [])]
        axes = [int(v) for v in _attr(node, "axes", range(len(starts)))]
        steps = [1] * len(starts)
    slicer: List[slice] = [slice(None)] * data.ndim
    for start, end, axis, step in zip(starts, ends, axes, steps):
        slicer[axis] = slice(start, end, step)
    return data[tuple(slicer)]


def _op_softmax(node, args, values):
    axis = int(_attr(node, "axis", -1))
    x = args[0]
    shifted = x - np.max(x, axis=axis, keepdims=True)
    exp = np.exp(shifted)
    return (exp / np.sum(exp, axis=axis, keepdims=True)).astype(x.dtype, copy=False)


def _op_layer_norm(node, args, values):
    x, scale = args[0], args[1]
    bias = args[2] if len(args) > 2 and args[2] is not None else None
    axis = int(_attr(node, "axis", -1))
    epsilon = float(_attr(node, "epsilon", 1e-5))
    axes = tuple(range(axis % x.ndim, x.ndim))
    mean = np.mean(x, axis=axes, keepdims=True)
    var = np.var(x, axis=axes, keepdims=True)
    normed = (x - mean) / np.sqrt(var + epsilon)
    y = normed * scale
    if bias is not None:
        y = y + bias
    return y.astype(x.dtype, copy=False)


def _op_constant(node, args, values):
    for key in ("value", "value_float", "value_int"):
        if key in node.attrs:
            return np.asarray(node.attrs[key])
    if "value_floats" in node.attrs:
        return np.asarray(node.attrs["value_floats"], dtype=np.float32)
    if "value_ints" in node.attrs:
        return np.asarray(node.attrs["value_ints"], dtype=np.int64)
    raise InferenceError("Constant node carries no value attribute")


def _op_cast(node, args, values):
    dtype = _DTYPES.get(int(_attr(node, "to", 0)))
    if dtype is None:
        raise InferenceError(f"Cast to unsupported element type {_attr(node, 'to')}")
    return args[0].astype(dtype)


_OP_TABLE = {
    "Identity": lambda n, a, v: a[0],
    "Constant": _op_constant,
    "Cast": _op_cast,
    "Shape": lambda n, a, v: np.asarray(a[0].shape, dtype=np.int64),
    "Gather": lambda n, a, v: np.take(a[0], a[1].astype(np.int64), axis=int(_attr(n, "axis", 0))),
    "Concat": lambda n, a, v: np.concatenate([x for x in a], axis=int(_attr(n, "axis", 0))),
    "Reshape": _op_reshape,
    "Transpose": lambda n, a, v: np.transpose(
        a[0], axes=[int(p) for p in _attr(n, "perm")] if _attr(n, "perm") else None
    ),
    "Flatten": lambda n, a, v: a[0].reshape(
        int(np.prod(a[0].shape[: int(_attr(n, "axis", 1))])), -1
    ),
    "Squeeze": _op_squeeze,
    "Unsqueeze": _op_unsqueeze,
    "Slice": _op_slice,
    "Add": lambda n, a, v: a[0] + a[1],
    "Sub": lambda n, a, v: a[0] - a[1],
    "Mul": lambda n, a, v: a[0] * a[1],
    "Div": lambda n, a, v: a[0] / a[1],
    "Pow": lambda n, a, v: np.power(a[0], a[1]).astype(a[0].dtype, copy=False),
    "Sqrt": lambda n, a, v: np.sqrt(a[0]),
    "Neg": lambda n, a, v: -a[0],
    "Abs": lambda n, a, v: np.abs(a[0]),
    "Exp": lambda n, a, v: np.exp(a[0]),
    "Log": lambda n, a, v: np.log(a[0]),
    "Erf": lambda n, a, v: special.erf(a[0]).astype(a[0].dtype, copy=False),
    "Tanh": lambda n, a, v: np.tanh(a[0]),
    "Relu": lambda n, a, v: np.maximum(a[0], 0),
    "Sigmoid": lambda n, a, v: special.expit(a[0]).astype(a[0].dtype, copy=False),
    "Softmax": _op_softmax,
    "ReduceMean": _op_reduce(np.mean),
    "ReduceSum": _op_reduce(np.sum),
    "MatMul": lambda n, a, v: a[0] @ a[1],
    "Gemm": _op_gemm,
    "LayerNormalization": _op_layer_norm,
}

SUPPORTED_OPS = frozenset(_OP_TABLE)
