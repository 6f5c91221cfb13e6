import json

import pytest

from mace_eval.harness import pair_accuracy
from mace_eval.metric import MaceConfig
from mace_eval.reports import emit_report, parse_report_csv
from mace_eval.sweep import inclusive_range, sweep


@pytest.fixture
def report(bench):
    pairs, backend, _, _ = bench
    return pair_accuracy(pairs, backend, MaceConfig())


@pytest.fixture
def sweep_result(bench):
    pairs, backend, _, _ = bench
    return sweep(
        pairs,
        backend,
        inclusive_range(0.90, 1.00, 0.01),
        inclusive_range(0.1, 1.0, 0.1),
        1.0,
        seed=42,
    )


class TestReportFormats:
    def test_json_schema_stable(self, report):
        payload = json.loads(emit_report(report, "json"))
        assert payload["schema_version"] == 1
        assert payload["kind"] == "accuracy_report"
        assert payload["overall"] == {"num_pairs": 4, "num_correct": 3, "accuracy": 0.75}
        assert list(payload["per_category"]) == ["HC", "HI", "HM", "MM"]
        assert payload["tie_count"] == 0
        assert payload["config"]["alpha"] == 0.3

    def test_csv_round_trip(self, report):
        rows = parse_report_csv(emit_report(report, "csv"))
        assert rows["All"] == (4, 3, 0.75)
        assert rows["HC"] == (1, 1, 1.0)
        assert rows["MM"] == (1, 0, 0.0)

    def test_table_category_order(self, report):
        table = emit_report(report, "table").decode()
        header = table.splitlines()[0]
        assert header.split() == ["category", "HC", "HI", "HM", "MM", "All"]
        accuracy_row = table.splitlines()[2].split()
        assert accuracy_row == ["accuracy", "100.0", "100.0", "100.0", "0.0", "75.0"]
        assert "ties: 0" in table

    def test_unknown_format(self, report):
        with pytest.raises(ValueError):
            emit_report(report, "yaml")


class TestSweepFormats:
    def test_csv_arity(self, sweep_result):
        lines = emit_report(sweep_result, "csv").decode().strip().splitlines()
        assert lines[0] == "threshold,alpha,accuracy"
        assert len(lines) == 1 + 110

    def test_csv_reparses_to_cells(self, sweep_result):
        lines = emit_report(sweep_result, "csv").decode().strip().splitlines()[1:]
        for line, (t_idx, a_idx) in zip(
            lines,
            ((t, a) for t in range(11) for a in range(10)),
        ):
            threshold, alpha, accuracy = (float(x) for x in line.split(","))
            assert threshold == sweep_result.thresholds[t_idx]
            assert alpha == sweep_result.alphas[a_idx]
            assert accuracy == sweep_result.cell(t_idx, a_idx)

    def test_json_payload(self, sweep_result):
        payload = json.loads(emit_report(sweep_result, "json"))
        assert payload["kind"] == "sweep_result"
        assert len(payload["cells"]) == 110
        assert payload["argmax"]["accuracy"] == 1.0
        assert payload["thresholds"][0] == 0.9

    def test_table_renders(self, sweep_result):
        table = emit_report(sweep_result, "table").decode()
        assert table.startswith("thr\\alpha")
        assert "best: threshold=0.9 alpha=0.2 accuracy=100.0" in table

    def test_deterministic_bytes(self, sweep_result):
        assert emit_report(sweep_result, "csv") == emit_report(sweep_result, "csv")
        assert emit_report(sweep_result, "json") == emit_report(sweep_result, "json")
