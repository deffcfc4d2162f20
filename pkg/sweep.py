"""
Lorenz Attractors - Parameter sweeps

Path: /sweep.py
Purpose: Expands a sweep specification into a parameter grid, classifies every grid point on a
         bounded process pool and writes one summary row per point, in grid order, to CSV.
"""

import io
import csv
import time
import itertools
import logging
import datetime
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, TextIO, Tuple

import numpy as np
from tqdm import tqdm

from lorenz_config import DEFAULT_SEED, DEFAULT_WORKERS, get_tolerances
from lorenz_errors import LorenzError
from lorenz_map import PARAMETER_KEYS, StandardLorenzMap, validate
from classifier import SUMMARY_COLUMNS, ClassifierParams, classify

logger = logging.getLogger("sweep")

REJECTED = "Rejected"


@dataclass(frozen=True)
class ParameterRange:
    lo: float
    hi: float
    steps: int = 1

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError(f"steps must be at least 1, got {self.steps}")

    def values(self) -> List[float]:
        if self.steps == 1:
            return [float(self.lo)]
        return [float(v) for v in np.linspace(self.lo, self.hi, self.steps)]

    def to_dict(self) -> Dict[str, Any]:
        return {"lo": self.lo, "hi": self.hi, "steps": self.steps}


@dataclass
class SweepSpec:
    """Grid over the five map parameters; a fixed parameter is a one-step range"""

    ranges: Dict[str, ParameterRange]
    tolerances: Dict[str, Any] = field(default_factory=dict)
    out: Optional[str] = None
    workers: int = DEFAULT_WORKERS
    seed: int = DEFAULT_SEED
    classifier: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, spec: Dict[str, Any]) -> "SweepSpec":
        ranges = {}
        for key in PARAMETER_KEYS:
            value = spec["parameters"][key]
            if isinstance(value, dict):
                ranges[key] = ParameterRange(float(value["lo"]), float(value["hi"]), int(value.get("steps", 1)))
            else:
                ranges[key] = ParameterRange(float(value), float(value), 1)
        return cls(
            ranges=ranges,
            tolerances=dict(spec.get("tolerances", {})),
            out=spec.get("out"),
            workers=int(spec.get("workers", DEFAULT_WORKERS)),
            seed=int(spec.get("seed", DEFAULT_SEED)),
            classifier=dict(spec.get("classifier", {})),
        )

    @property
    def size(self) -> int:
        return int(np.prod([self.ranges[key].steps for key in PARAMETER_KEYS]))

    def points(self) -> List[Dict[str, float]]:
        """Grid points in row-major order over c, alpha, beta, v1, v0"""
        axes = [self.ranges[key].values() for key in PARAMETER_KEYS]
        return [dict(zip(PARAMETER_KEYS, combo)) for combo in itertools.product(*axes)]

    def classifier_params(self) -> ClassifierParams:
        return ClassifierParams(**{**self.classifier, "seed": self.seed})

    def to_dict(self) -> Dict[str, Any]:
        return {
            "parameters": {key: r.to_dict() for key, r in self.ranges.items()},
            "tolerances": self.tolerances,
            "out": self.out,
            "workers": self.workers,
            "seed": self.seed,
            "classifier": self.classifier,
        }


def _blank_row(params: Dict[str, float], kind: str) -> Dict[str, Any]:
    row = {key: None for key in SUMMARY_COLUMNS}
    row.update(params)
    row["kind"] = kind
    row["evidence_passed"] = 0
    return row


def run_point(index: int, params: Dict[str, float], tolerances: Dict[str, Any],
              classifier: ClassifierParams) -> Tuple[int, Dict[str, Any]]:
    """Classify one grid point; invalid parameters and analysis faults become rows too"""
    report = validate(params)
    if not report.valid:
        logger.debug(f"Point {index} rejected: {report.violations}")
        return index, _blank_row(params, REJECTED)
    try:
        lorenz = StandardLorenzMap(**params, tol=get_tolerances(tolerances))
        row = classify(lorenz, classifier).summary_row()
    except LorenzError as exc:
        logger.warning(f"Point {index} failed with {type(exc).__name__}: {exc.message}")
        row = _blank_row(params, type(exc).__name__)
    except Exception as e:
        logger.error(f"Point {index} raised an unexpected error: {str(e)}")
        row = _blank_row(params, type(e).__name__)
    return index, row


def run_sweep(spec: SweepSpec, workers: Optional[int] = None, progress: bool = True) -> Dict[str, Any]:
    """
    Classify every grid point of a sweep

    Args:
        spec: Sweep specification
        workers: Worker count override (1 runs serially in this process)
        progress: Show a tqdm progress bar

    Returns:
        Dict with rows in grid order and an execution summary
    """
    workers = max(1, workers or spec.workers)
    points = spec.points()
    classifier = spec.classifier_params()
    logger.info(f"Sweeping {len(points)} grid points on {workers} worker(s)")
    start_time = time.time()

    results = []
    if workers == 1:
        it = enumerate(points)
        if progress:
            it = tqdm(it, total=len(points), desc="Sweep")
        results = [run_point(i, p, spec.tolerances, classifier) for i, p in it]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_point, i, p, spec.tolerances, classifier) for i, p in enumerate(points)]
            for future in tqdm(as_completed(futures), total=len(futures), desc="Sweep", disable=not progress):
                results.append(future.result())

    results.sort(key=lambda t: t[0])
    rows = [row for _, row in results]
    kinds: Dict[str, int] = {}
    for row in rows:
        kinds[row["kind"]] = kinds.get(row["kind"], 0) + 1

    total_time = time.time() - start_time
    return {
        "rows": rows,
        "execution_summary": {
            "timestamp": datetime.datetime.now().isoformat(),
            "grid_points": len(points),
            "workers": workers,
            "seed": spec.seed,
            "kinds": kinds,
            "total_execution_time_seconds": total_time,
            "average_point_time_seconds": total_time / len(points) if points else 0,
        },
    }


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(rows: List[Dict[str, Any]], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for row in rows:
        writer.writerow([_cell(row.get(key)) for key in SUMMARY_COLUMNS])


def rows_to_csv(rows: List[Dict[str, Any]]) -> str:
    buffer = io.StringIO()
    write_csv(rows, buffer)
    return buffer.getvalue()
