"""Serialization of accuracy reports and sweep results.

Three formats: schema-stable JSON (version embedded), CSV, and a
human-readable table whose columns follow the HC, HI, HM, MM, All order.
Output is a deterministic byte string for fixed input.
"""

from __future__ import annotations

import io
import json
from typing import Union

from .dataset import Category
from .harness import AccuracyReport
from .sweep import SweepResult

SCHEMA_VERSION = 1

_CATEGORY_ORDER = (Category.HC, Category.HI, Category.HM, Category.MM)
_FORMATS = ("json", "csv", "table")


def _report_json(report: AccuracyReport) -> bytes:
    payload = {"schema_version": SCHEMA_VERSION, "kind": "accuracy_report"}
    payload.update(report.to_dict())
    return (json.dumps(payload, indent=2, sort_keys=False) + "\n").encode("utf-8")


def _report_csv(report: AccuracyReport) -> bytes:
    out = io.StringIO()
    out.write("category,num_pairs,num_correct,accuracy\n")
    for category in _CATEGORY_ORDER:
        stats = report.per_category.get(category)
        if stats is None:
            continue
        out.write(f"{category.value},{stats.num_pairs},{stats.num_correct},{stats.accuracy!r}\n")
    overall = report.overall
    out.write(f"All,{overall.num_pairs},{overall.num_correct},{overall.accuracy!r}\n")
    return out.getvalue().encode("utf-8")


def _report_table(report: AccuracyReport) -> bytes:
    headers = [c.value for c in _CATEGORY_ORDER] + ["All"]
    pair_cells = []
    acc_cells = []
    for category in _CATEGORY_ORDER:
        stats = report.per_category.get(category)
        if stats is None:
            pair_cells.append("0")
            acc_cells.append("-")
        else:
            pair_cells.append(str(stats.num_pairs))
            acc_cells.append(f"{100.0 * stats.accuracy:.1f}")
    pair_cells.append(str(report.overall.num_pairs))
    acc_cells.append(f"{100.0 * report.overall.accuracy:.1f}")

    width = 9
    out = io.StringIO()
    out.write("category " + "".join(h.rjust(width) for h in headers) + "\n")
    out.write("pairs    " + "".join(c.rjust(width) for c in pair_cells) + "\n")
    out.write("accuracy " + "".join(c.rjust(width) for c in acc_cells) + "\n")
    out.write(f"ties: {report.tie_count}\n")
    return out.getvalue().encode("utf-8")


def _sweep_json(result: SweepResult) -> bytes:
    cells = [
        {
            "threshold": threshold,
            "alpha": alpha,
            "accuracy": result.cell(t_idx, a_idx),
        }
        for t_idx, threshold in enumerate(result.thresholds)
        for a_idx, alpha in enumerate(result.alphas)
    ]
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "sweep_result",
        "seed": result.seed,
        "validation_size": result.validation_size,
        "thresholds": list(result.thresholds),
        "alphas": list(result.alphas),
        "cells": cells,
        "argmax": {
            "threshold": result.best_threshold,
            "alpha": result.best_alpha,
            "accuracy": result.best_accuracy,
        },
    }
    return (json.dumps(payload, indent=2) + "\n").encode("utf-8")


def _sweep_csv(result: SweepResult) -> bytes:
    out = io.StringIO()
    out.write("threshold,alpha,accuracy\n")
    for t_idx, threshold in enumerate(result.thresholds):
        for a_idx, alpha in enumerate(result.alphas):
            out.write(f"{threshold!r},{alpha!r},{result.cell(t_idx, a_idx)!r}\n")
    return out.getvalue().encode("utf-8")


def _sweep_table(result: SweepResult) -> bytes:
    width = 8
    out = io.StringIO()
    out.write("thr\\alpha" + "".join(f"{a:g}".rjust(width) for a in result.alphas) + "\n")
    for t_idx, threshold in enumerate(result.thresholds):
        row = "".join(
            f"{100.0 * result.cell(t_idx, a_idx):.1f}".rjust(width)
            for a_idx in range(len(result.alphas))
        )
        out.write(f"{threshold:<9g}" + row + "\n")
    out.write(
        f"best: threshold={result.best_threshold:g} alpha={result.best_alpha:g} "
        f"accuracy={100.0 * result.best_accuracy:.1f}\n"
    )
    return out.getvalue().encode("utf-8")


def emit_report(obj: Union[AccuracyReport, SweepResult], format: str = "json") -> bytes:
    """Serialize a report or sweep result to the requested format."""
    if format not in _FORMATS:
        raise ValueError(f"unknown format {format!r}; expected one of {_FORMATS}")
    if isinstance(obj, AccuracyReport):
        return {"json": _report_json, "csv": _report_csv, "table": _report_table}[format](obj)
    if isinstance(obj, SweepResult):
        return {"json": _sweep_json, "csv": _sweep_csv, "table": _sweep_table}[format](obj)
    raise TypeError(f"cannot emit {type(obj).__name__}")


def parse_report_csv(data: bytes) -> dict:
    """Parse _report_csv output back into {category: (pairs, correct, accuracy)}."""
    lines = data.decode("utf-8").strip().splitlines()
    rows = {}
    for line in lines[1:]:
        category, num_pairs, num_correct, accuracy = line.split(",")
        rows[category] = (int(num_pairs), int(num_correct), float(accuracy))
    return rows
