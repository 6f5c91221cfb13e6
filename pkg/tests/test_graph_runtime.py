import numpy as np
import pytest

import onnx_builder as ob
from onnx_protoschema import build_onnx_classes

from mace_eval.errors import InferenceError, ModelLoadError
from mace_eval.graph_runtime import GraphExecutor, load_model


@pytest.fixture(scope="module")
def onnx_pb():
    return build_onnx_classes()


def run_bytes(model_bytes, **feeds):
    executor = GraphExecutor(load_model(model_bytes))
    out = executor.run(feeds)
    return next(iter(out.values())) if len(out) == 1 else out


def single_op_model(op_type, arrays, out_shape=None, n_outputs=1, **attrs):
    """One node fed by graph inputs, float32 in and out."""
    inputs = [ob.value_info(f"x{i}", ob.F32, list(a.shape)) for i, a in enumerate(arrays)]
    outputs = [ob.value_info(f"y{j}", ob.F32, out_shape or []) for j in range(n_outputs)]
    n = ob.node(op_type, [f"x{i}" for i in range(len(arrays))], [f"y{j}" for j in range(n_outputs)], **attrs)
    return ob.model(ob.graph([n], [], inputs, outputs))


class TestWireFormatCrossValidation:
    def test_official_protobuf_parses_builder_output(self, onnx_pb):
        model_bytes = ob.linear_text_encoder(vocab=11, dim=6, seed=3)
        parsed = onnx_pb["ModelProto"].FromString(model_bytes)
        assert parsed.ir_version == 8
        assert parsed.producer_name == "mace-eval-tests"
        assert parsed.opset_import[0].version == 17
        g = parsed.graph
        assert [n.op_type for n in g.node] == ["Gather", "ReduceMean", "MatMul", "Add", "Tanh"]
        assert {t.name for t in g.initializer} == {"table", "weight", "bias"}
        table = next(t for t in g.initializer if t.name == "table")
        assert list(table.dims) == [11, 6]
        arr = np.frombuffer(table.raw_data, dtype="<f4").reshape(11, 6)
        assert np.isfinite(arr).all()
        assert g.input[0].name == "input_ids"
        assert g.input[0].type.tensor_type.shape.dim[0].dim_value == 1
        assert g.input[0].type.tensor_type.shape.dim[1].dim_param == "seq"
        assert g.output[0].type.tensor_type.shape.dim[1].dim_value == 6

    def test_reader_parses_official_protobuf_output(self, onnx_pb):
        # build the same structure with the official codec (packed encodings)
        pb = onnx_pb
        m = pb["ModelProto"]()
        m.ir_version = 9
        ops = m.opset_import.add()
        ops.version = 13
        g = m.graph
        g.name = "pbgraph"
        init = g.initializer.add()
        init.name = "w"
        init.data_type = 1
        init.dims.extend([2, 3])
        init.float_data.extend([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])  # typed data, packed
        shape_t = g.initializer.add()
        shape_t.name = "axes"
        shape_t.data_type = 7
        shape_t.dims.extend([1])
        shape_t.int64_data.extend([1])
        n1 = g.node.add()
        n1.op_type = "MatMul"
        n1.input.extend(["x", "w"])
        n1.output.extend(["mm"])
        n2 = g.node.add()
        n2.op_type = "ReduceSum"
        n2.input.extend(["mm", "axes"])
        n2.output.extend(["y"])
        attr = n2.attribute.add()
        attr.name = "keepdims"
        attr.i = 0
        attr.type = 2
        vi = g.input.add()
        vi.name = "x"
        vi.type.tensor_type.elem_type = 1
        d = vi.type.tensor_type.shape.dim.add()
        d.dim_value = 4
        d2 = vi.type.tensor_type.shape.dim.add()
        d2.dim_value = 2
        vo = g.output.add()
        vo.name = "y"
        vo.type.tensor_type.elem_type = 1

        parsed = load_model(m.SerializeToString())
        assert parsed.ir_version == 9
        assert parsed.opset_version == 13
        assert parsed.graph_name == "pbgraph"
        np.testing.assert_array_equal(
            parsed.initializers["w"], np.arange(1.0, 7.0, dtype=np.float32).reshape(2, 3)
        )
        assert parsed.inputs[0].shape == (4, 2)

        x = np.ones((4, 2), dtype=np.float32)
        out = GraphExecutor(parsed).run({"x": x})["y"]
        np.testing.assert_allclose(out, (x @ parsed.initializers["w"]).sum(axis=1))

    def test_round_trip_through_both_codecs(self, onnx_pb):
        mine = ob.linear_audio_encoder(window_samples=64, dim=4)
        reparsed = onnx_pb["ModelProto"].FromString(mine)
        again = load_model(reparsed.SerializeToString())
        direct = load_model(mine)
        assert [n.op_type for n in again.nodes] == [n.op_type for n in direct.nodes]
        for key in direct.initializers:
            np.testing.assert_array_equal(again.initializers[key], direct.initializers[key])

    def test_unknown_fields_are_skipped(self):
        model_bytes = ob.linear_text_encoder(vocab=5, dim=3)
        # append an unknown length-delimited field (number 99) at top level
        extended = model_bytes + ob._field_bytes(99, b"future extension")
        parsed = load_model(extended)
        assert len(parsed.nodes) == 5

    def test_typed_float_data_tensor(self):
        arr = np.array([[1.5, -2.5]], dtype=np.float32)
        t = ob.tensor("c", arr, use_raw=False)
        g = ob.graph(
            [ob.node("Identity", ["c"], ["y"])],
            [t],
            [],
            [ob.value_info("y", ob.F32, [1, 2])],
        )
        out = run_bytes(ob.model(g))
        np.testing.assert_array_equal(out, arr)


class TestExecutorOps:
    def test_elementwise_and_matmul(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(2, 3)).astype(np.float32)
        b = rng.normal(size=(3, 4)).astype(np.float32)
        out = run_bytes(single_op_model("MatMul", [a, b]), x0=a, x1=b)
        np.testing.assert_allclose(out, a @ b, rtol=1e-6)
        for op, fn in [
            ("Add", np.add),
            ("Sub", np.subtract),
            ("Mul", np.multiply),
            ("Div", np.divide),
        ]:
            c = rng.normal(size=(2, 3)).astype(np.float32)
            d = rng.uniform(0.5, 2.0, size=(2, 3)).astype(np.float32)
            np.testing.assert_allclose(
                run_bytes(single_op_model(op, [c, d]), x0=c, x1=d), fn(c, d), rtol=1e-6
            )

    def test_activations(self):
        x = np.linspace(-3, 3, 13, dtype=np.float32).reshape(1, 13)
        np.testing.assert_allclose(
            run_bytes(single_op_model("Tanh", [x]), x0=x), np.tanh(x), rtol=1e-6
        )
        np.testing.assert_allclose(
            run_bytes(single_op_model("Relu", [x]), x0=x), np.maximum(x, 0)
        )
        sig = run_bytes(single_op_model("Sigmoid", [x]), x0=x)
        np.testing.assert_allclose(sig, 1 / (1 + np.exp(-x)), rtol=1e-6)
        import math

        erf = run_bytes(single_op_model("Erf", [x]), x0=x)
        np.testing.assert_allclose(erf, [[math.erf(v) for v in x[0]]], rtol=1e-6)

    def test_gemm(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(3, 2)).astype(np.float32)
        b = rng.normal(size=(4, 3)).astype(np.float32)
        c = rng.normal(size=(2, 4)).astype(np.float32)
        out = run_bytes(
            single_op_model("Gemm", [a, b, c], alpha=2.0, beta=0.5, transA=1, transB=1),
            x0=a,
            x1=b,
            x2=c,
        )
        np.testing.assert_allclose(out, 2.0 * (a.T @ b.T) + 0.5 * c, rtol=1e-5)

    def test_reductions_and_softmax(self):
        x = np.arange(12, dtype=np.float32).reshape(2, 2, 3)
        out = run_bytes(single_op_model("ReduceMean", [x], axes=[1], keepdims=0), x0=x)
        np.testing.assert_allclose(out, x.mean(axis=1))
        out = run_bytes(single_op_model("ReduceSum", [x], axes=[0, 2], keepdims=1), x0=x)
        np.testing.assert_allclose(out, x.sum(axis=(0, 2), keepdims=True))
        sm = run_bytes(single_op_model("Softmax", [x], axis=-1), x0=x)
        e = np.exp(x - x.max(axis=-1, keepdims=True))
        np.testing.assert_allclose(sm, e / e.sum(axis=-1, keepdims=True), rtol=1e-6)

    def test_layer_normalization(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(2, 5)).astype(np.float32)
        scale = rng.normal(size=(5,)).astype(np.float32)
        bias = rng.normal(size=(5,)).astype(np.float32)
        out = run_bytes(
            single_op_model("LayerNormalization", [x, scale, bias], axis=-1, epsilon=1e-5),
            x0=x,
            x1=scale,
            x2=bias,
        )
        mean = x.mean(axis=-1, keepdims=True)
        var = x.var(axis=-1, keepdims=True)
        want = (x - mean) / np.sqrt(var + 1e-5) * scale + bias
        np.testing.assert_allclose(out, want, rtol=1e-4)

    def test_shape_plumbing(self):
        x = np.arange(6, dtype=np.float32).reshape(2, 3)
        np.testing.assert_array_equal(
            run_bytes(single_op_model("Shape", [x]), x0=x), np.array([2, 3], dtype=np.int64)
        )
        np.testing.assert_array_equal(
            run_bytes(single_op_model("Transpose", [x], perm=[1, 0]), x0=x), x.T
        )
        np.testing.assert_array_equal(
            run_bytes(single_op_model("Flatten", [x[None]], axis=1), x0=x[None]),
            x.reshape(1, 6),
        )
        sliced = run_bytes(
            single_op_model("Slice", [x], starts=[0], ends=[2], axes=[1]), x0=x
        )
        np.testing.assert_array_equal(sliced, x[:, :2])

    def test_gather_embedding_lookup(self):
        table = np.arange(20, dtype=np.float32).reshape(5, 4)
        ids = np.array([[1, 3]], dtype=np.int64)
        inputs = [
            ob.value_info("x0", ob.F32, [5, 4]),
            ob.value_info("x1", ob.I64, [1, 2]),
        ]
        n = ob.node("Gather", ["x0", "x1"], ["y"], axis=0)
        model_bytes = ob.model(ob.graph([n], [], inputs, [ob.value_info("y", ob.F32, [])]))
        out = run_bytes(model_bytes, x0=table, x1=ids)
        np.testing.assert_array_equal(out, table[[[1, 3]]])

    def test_composed_text_encoder_matches_numpy(self):
        model_bytes = ob.linear_text_encoder(vocab=11, dim=6, seed=3)
        parsed = load_model(model_bytes)
        table = parsed.initializers["table"]
        weight = parsed.initializers["weight"]
        bias = parsed.initializers["bias"]
        ids = np.array([[2, 7, 7, 1]], dtype=np.int64)
        got = GraphExecutor(parsed).run({"input_ids": ids})["embedding"]
        want = np.tanh(table[ids[0]].mean(axis=0) @ weight + bias)
        np.testing.assert_allclose(got[0], want, rtol=1e-5)

    def test_constant_graph(self):
        model_bytes = ob.constant_text_encoder(dim=5, value=0.25)
        out = run_bytes(model_bytes, input_ids=np.array([[1, 2, 3]], dtype=np.int64))
        np.testing.assert_array_equal(out, np.full((1, 5), 0.25, dtype=np.float32))


class TestErrors:
    def test_unsupported_op(self):
        x = np.zeros((2, 2), dtype=np.float32)
        model_bytes = single_op_model("ConvTranspose", [x])
        with pytest.raises(ModelLoadError, match="ConvTranspose"):
            GraphExecutor(load_model(model_bytes))

    def test_missing_feed(self):
        x = np.zeros((2, 2), dtype=np.float32)
        executor = GraphExecutor(load_model(single_op_model("Relu", [x])))
        with pytest.raises(InferenceError, match="missing feed"):
            executor.run({})

    def test_shape_mismatch(self):
        x = np.zeros((2, 2), dtype=np.float32)
        executor = GraphExecutor(load_model(single_op_model("Relu", [x])))
        with pytest.raises(InferenceError, match="axis"):
            executor.run({"x0": np.zeros((2, 3), dtype=np.float32)})

    def test_truncated_bytes(self):
        model_bytes = ob.linear_text_encoder(vocab=4, dim=2)
        with pytest.raises(ModelLoadError):
            load_model(model_bytes[: len(model_bytes) // 2])

    def test_not_a_model(self):
        with pytest.raises(ModelLoadError):
            load_model(b"\x00\x01\x02definitely not onnx")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ModelLoadError):
            load_model(tmp_path / "nope.onnx")
