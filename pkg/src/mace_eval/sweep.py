"""Threshold x penalty-coefficient grid search over a validation split.

Component similarities and fluency probabilities do not depend on the
gate threshold or the penalty coefficient, so they are computed once per
caption; every grid cell then re-runs only the final combination step.
That shortcut is exact: each cell equals a from-scratch accuracy run
with that cell's configuration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .backends import Backend
from .dataset import Category, EvalPair
from .errors import RangeError
from .harness import AccuracyReport, _tally, score_pair
from .metric import MaceConfig, mace_score

DEFAULT_SEED = 42
DEFAULT_VALIDATION_FRACTION = 0.2


@dataclass(frozen=True)
class SweepResult:
    """Accuracy per (threshold, alpha) cell plus the winning cell."""

    thresholds: Tuple[float, ...]
    alphas: Tuple[float, ...]
    accuracy: np.ndarray  # shape (len(thresholds), len(alphas))
    best_threshold: float
    best_alpha: float
    best_accuracy: float
    validation_size: int
    seed: int

    def cell(self, threshold_idx: int, alpha_idx: int) -> float:
        return float(self.accuracy[threshold_idx, alpha_idx])


def inclusive_range(lo: float, hi: float, step: float) -> List[float]:
    """Grid values lo, lo+step, ... including hi when it lands on the grid.

    Values are rounded to 10 decimals so decimal-specified grids come out
    as the decimal values they name.
    """
    if step <= 0:
        raise RangeError(f"step must be positive, got {step}")
    if hi < lo:
        raise RangeError(f"range is empty: {lo} > {hi}")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 10) for i in range(count)]


def validation_split(
    pairs: Sequence[EvalPair], fraction: float, seed: int
) -> List[EvalPair]:
    """Deterministic split stratified by category, preserving input order."""
    if not 0.0 < fraction <= 1.0:
        raise RangeError(f"validation fraction must be in (0, 1], got {fraction}")
    rng = np.random.default_rng(seed)
    selected: List[int] = []
    for category in Category:
        indices = [i for i, pair in enumerate(pairs) if pair.category is category]
        if not indices:
            continue
        order = rng.permutation(len(indices))
        take = len(indices) if fraction == 1.0 else int(round(fraction * len(indices)))
        selected.extend(indices[j] for j in order[:take])
    if not selected:
        raise RangeError("validation split is empty; raise the fraction or supply more pairs")
    return [pairs[i] for i in sorted(selected)]


def sweep(
    pairs: Sequence[EvalPair],
    backend: Backend,
    thresholds: Iterable[float],
    alphas: Iterable[float],
    validation_fraction: float = DEFAULT_VALIDATION_FRACTION,
    seed: int = DEFAULT_SEED,
    config: MaceConfig = MaceConfig(),
    jobs: int = 1,
) -> SweepResult:
    """Grid-search the fluency gate over a stratified validation split.

    ``config`` supplies the variant and component weighting; its alpha and
    threshold are overridden cell by cell.
    """
    thresholds = [float(t) for t in thresholds]
    alphas = [float(a) for a in alphas]
    if not thresholds or not alphas:
        raise RangeError("thresholds and alphas must be nonempty")
    for value in (*thresholds, *alphas):
        if not 0.0 <= value <= 1.0:
            raise RangeError(f"grid values must lie in [0, 1], got {value}")

    subset = validation_split(list(pairs), validation_fraction, seed)

    def components(pair: EvalPair):
        b0, b1 = score_pair(pair, backend, config)
        return (
            (b0.s_audio_text, b0.s_text_text, b0.fluency_prob),
            (b1.s_audio_text, b1.s_text_text, b1.fluency_prob),
        )

    if jobs > 1 and len(subset) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            cached = list(pool.map(components, subset))
    else:
        cached = [components(pair) for pair in subset]

    grid = np.zeros((len(thresholds), len(alphas)), dtype=np.float64)
    for t_idx, threshold in enumerate(thresholds):
        for a_idx, alpha in enumerate(alphas):
            cell_cfg = config.replace(alpha=alpha, fluency_threshold=threshold)

            def scored():
                for pair, (comp_0, comp_1) in zip(subset, cached):
                    final_0 = mace_score(*comp_0, cell_cfg).final
                    final_1 = mace_score(*comp_1, cell_cfg).final
                    yield pair, final_0, final_1

            report: AccuracyReport = _tally(scored(), cell_cfg)
            grid[t_idx, a_idx] = report.overall.accuracy

    best_flat = int(np.argmax(grid))
    best_t, best_a = np.unravel_index(best_flat, grid.shape)
    return SweepResult(
        thresholds=tuple(thresholds),
        alphas=tuple(alphas),
        accuracy=grid,
        best_threshold=thresholds[best_t],
        best_alpha=alphas[best_a],
        best_accuracy=float(grid[best_t, best_a]),
        validation_size=len(subset),
        seed=seed,
    )
