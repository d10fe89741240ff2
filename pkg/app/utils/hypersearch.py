"""Restarted alternating direction search over a finite (s, p) grid.

The search alternates full sweeps along s and p until the point stops
moving, then checks a delta-box around it and restarts from any strictly
better point found there.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    field_validator,
    model_validator,
)

from app.utils.errors import InvalidParameterError

logger = logging.getLogger(__name__)

GRID_TOL = 1e-9
DEFAULT_DELTA = 0.3

Evaluator = Callable[[float, float], float]
StepKind = Literal["sweep-s", "sweep-p", "box", "restart"]


def _check_ascending(values: List[float], name: str) -> List[float]:
    if not values:
        raise ValueError(f"{name} must not be empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} must be strictly ascending")
    return values


def grid_axis(start: float, step: float, stop: float) -> List[float]:
    """Values start, start+step, ... up to stop inclusive.

    Same values as the MATLAB range ``start:step:stop``.
    """
    if step <= 0:
        raise InvalidParameterError(f"grid step must be positive, got {step}")
    if stop < start:
        raise InvalidParameterError(
            f"grid stop {stop} lies below start {start}"
        )
    count = int(np.floor((stop - start) / step + GRID_TOL)) + 1
    return np.round(start + step * np.arange(count), 10).tolist()


class SearchGrid(BaseModel):
    model_config = ConfigDict(frozen=True)

    s_values: List[float]
    p_values: List[float]
    delta: float = Field(default=DEFAULT_DELTA, gt=0.0)

    @field_validator("s_values")
    @classmethod
    def check_s(cls, values: List[float]) -> List[float]:
        _check_ascending(values, "s_values")
        if values[0] < 1.0:
            raise ValueError("s values must be >= 1")
        return values

    @field_validator("p_values")
    @classmethod
    def check_p(cls, values: List[float]) -> List[float]:
        _check_ascending(values, "p_values")
        if values[0] <= 0.0:
            raise ValueError("p values must be > 0")
        return values

    @model_validator(mode="after")
    def check_finite(self) -> "SearchGrid":
        if not np.all(np.isfinite(self.s_values + self.p_values)):
            raise ValueError("grid values must be finite")
        return self

    @classmethod
    def from_ranges(
        cls,
        s_range: Tuple[float, float, float],
        p_range: Tuple[float, float, float],
        delta: float = DEFAULT_DELTA,
    ) -> "SearchGrid":
        return cls(
            s_values=grid_axis(*s_range),
            p_values=grid_axis(*p_range),
            delta=delta,
        )

    @property
    def size(self) -> int:
        return len(self.s_values) * len(self.p_values)

    def s_index(self, s: float) -> int:
        return _index_on_axis(self.s_values, s, "s")

    def p_index(self, p: float) -> int:
        return _index_on_axis(self.p_values, p, "p")


def _index_on_axis(values: Sequence[float], x: float, name: str) -> int:
    for i, value in enumerate(values):
        if abs(value - x) <= GRID_TOL:
            return i
    raise InvalidParameterError(f"{name}={x} is not on the search grid")


@dataclass(frozen=True)
class SearchStep:
    step: int
    kind: StepKind
    s: float
    p: float
    accuracy: float


@dataclass
class SearchResult:
    best_s: float
    best_p: float
    best_accuracy: float
    path: List[SearchStep] = field(default_factory=list)
    evaluations: int = 0


class EvaluationCache:
    """Memoizes an evaluator on grid indices and counts real evaluations.

    Several searches may share one instance so every grid point is evaluated
    at most once across them.
    """

    def __init__(
        self, grid: SearchGrid, evaluator: Evaluator, enabled: bool = True
    ):
        self.grid = grid
        self.evaluator = evaluator
        self.enabled = enabled
        self.evaluations = 0
        self._values: Dict[Tuple[int, int], float] = {}

    def __call__(self, i: int, j: int) -> float:
        key = (i, j)
        if self.enabled and key in self._values:
            return self._values[key]
        s, p = self.grid.s_values[i], self.grid.p_values[j]
        accuracy = float(self.evaluator(s, p))
        self.evaluations += 1
        logger.debug("Evaluated s=%g p=%g: accuracy %.4f", s, p, accuracy)
        self._values[key] = accuracy
        return accuracy


class _PathRecorder:
    def __init__(self, grid: SearchGrid):
        self.grid = grid
        self.rows: List[SearchStep] = []

    def add(
        self, step: int, kind: StepKind, i: int, j: int, accuracy: float
    ) -> None:
        s, p = self.grid.s_values[i], self.grid.p_values[j]
        self.rows.append(SearchStep(step, kind, s, p, accuracy))


def _best_on_line(
    candidates: Sequence[Tuple[int, int]],
    values: Sequence[float],
    incumbent: Tuple[int, int],
) -> Tuple[Tuple[int, int], float]:
    """Argmax over ``candidates``.

    The incumbent keeps ties; otherwise the first candidate wins.
    """
    top = max(values)
    for point, value in zip(candidates, values):
        if point == incumbent and value == top:
            return point, value
    first = values.index(top)
    return candidates[first], top


def _sweep(
    cache: EvaluationCache,
    recorder: _PathRecorder,
    step: int,
    kind: StepKind,
    incumbent: Tuple[int, int],
) -> Tuple[Tuple[int, int], float]:
    i, j = incumbent
    if kind == "sweep-s":
        candidates = [(a, j) for a in range(len(cache.grid.s_values))]
    else:
        candidates = [(i, b) for b in range(len(cache.grid.p_values))]
    values = []
    for a, b in candidates:
        value = cache(a, b)
        recorder.add(step, kind, a, b, value)
        values.append(value)
    return _best_on_line(candidates, values, incumbent)


def _box(grid: SearchGrid, centre: Tuple[int, int]) -> List[Tuple[int, int]]:
    s0, p0 = grid.s_values[centre[0]], grid.p_values[centre[1]]
    reach = grid.delta + GRID_TOL
    return [
        (a, b)
        for a, s in enumerate(grid.s_values)
        if abs(s - s0) <= reach
        for b, p in enumerate(grid.p_values)
        if abs(p - p0) <= reach
    ]


def search(
    grid: SearchGrid,
    evaluator,
    start: Tuple[float, float],
    use_cache: bool = True,
) -> SearchResult:
    """Restarted alternating direction search from ``start``.

    ``evaluator`` maps (s, p) to an accuracy and must be deterministic. An
    ``EvaluationCache`` may be passed instead to share evaluations between
    searches.
    """
    if isinstance(evaluator, EvaluationCache):
        cache = evaluator
    else:
        cache = EvaluationCache(grid, evaluator, enabled=use_cache)
    evaluations_before = cache.evaluations
    recorder = _PathRecorder(grid)

    point = (grid.s_index(start[0]), grid.p_index(start[1]))
    accuracy0 = cache(*point)
    step = 0
    while True:
        step += 1
        half, _ = _sweep(cache, recorder, step, "sweep-s", point)
        point1, accuracy1 = _sweep(cache, recorder, step, "sweep-p", half)
        if point1 != point or accuracy1 != accuracy0:
            point, accuracy0 = point1, accuracy1
            continue

        candidates = _box(grid, point)
        values = []
        for a, b in candidates:
            value = cache(a, b)
            recorder.add(step, "box", a, b, value)
            values.append(value)
        point2, accuracy2 = _best_on_line(candidates, values, point)
        if accuracy2 <= accuracy1:
            break
        logger.info(
            "Restarting from s=%g p=%g (accuracy %.4f > %.4f)",
            grid.s_values[point2[0]],
            grid.p_values[point2[1]],
            accuracy2,
            accuracy1,
        )
        recorder.add(step, "restart", *point2, accuracy2)
        point, accuracy0 = point2, accuracy2

    result = SearchResult(
        best_s=grid.s_values[point[0]],
        best_p=grid.p_values[point[1]],
        best_accuracy=accuracy0,
        path=recorder.rows,
        evaluations=cache.evaluations - evaluations_before,
    )
    logger.info(
        "Search from %s finished at s=%g p=%g with accuracy %.4f "
        "after %d evaluations",
        start,
        result.best_s,
        result.best_p,
        result.best_accuracy,
        result.evaluations,
    )
    return result


def exhaustive(grid: SearchGrid, evaluator: Evaluator) -> SearchResult:
    """Evaluates every grid point, s outer and p inner.

    Ties keep the first point.
    """
    recorder = _PathRecorder(grid)
    cache = EvaluationCache(grid, evaluator)
    best: Optional[Tuple[Tuple[int, int], float]] = None
    for a in range(len(grid.s_values)):
        for b in range(len(grid.p_values)):
            value = cache(a, b)
            recorder.add(1, "box", a, b, value)
            if best is None or value > best[1]:
                best = ((a, b), value)
    (a, b), value = best
    return SearchResult(
        best_s=grid.s_values[a],
        best_p=grid.p_values[b],
        best_accuracy=value,
        path=recorder.rows,
        evaluations=cache.evaluations,
    )


def axis_sweep(
    grid: SearchGrid,
    evaluator: Evaluator,
    s: Optional[float] = None,
    p: Optional[float] = None,
) -> List[SearchStep]:
    """Accuracy along one grid axis with the other parameter held fixed.

    Pass ``s`` to sweep p, or ``p`` to sweep s. The fixed value does not need
    to lie on the grid.
    """
    if (s is None) == (p is None):
        raise InvalidParameterError("fix exactly one of s and p")
    if s is not None:
        return [
            SearchStep(1, "sweep-p", s, pv, float(evaluator(s, pv)))
            for pv in grid.p_values
        ]
    return [
        SearchStep(1, "sweep-s", sv, p, float(evaluator(sv, p)))
        for sv in grid.s_values
    ]


def multi_start_search(
    grid: SearchGrid,
    evaluator: Evaluator,
    starts: Sequence[Tuple[float, float]],
) -> Tuple[SearchResult, List[SearchResult]]:
    """Runs ``search`` from every starter over one shared evaluation cache.

    Returns the winning result (ties keep the earliest starter) and the
    per-starter results.
    """
    if not starts:
        raise InvalidParameterError("at least one starter is required")
    cache = EvaluationCache(grid, evaluator)
    results = [search(grid, cache, start) for start in starts]
    winner = results[0]
    for result in results[1:]:
        if result.best_accuracy > winner.best_accuracy:
            winner = result
    return winner, results
