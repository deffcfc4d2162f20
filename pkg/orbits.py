"""
Lorenz Attractors - Orbits, limit-set covers and periodic orbits

Path: /orbits.py
Purpose: Forward orbits with one-sided critical semantics, preimages and preimage trees,
         grid covers standing in for omega- and alpha-limit sets, Lyapunov averages,
         periodic-orbit search by branch itinerary, and homterval evidence.
"""

import math
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from lorenz_config import DEFAULT_GRID
from lorenz_errors import NoPeriodicOrbitInWindow, PreimageTreeEmpty
from lorenz_map import Interval, LorenzMapBase, Side, SignedPoint

logger = logging.getLogger("orbits")

# Fine pruning cells per cover cell in the preimage tree
PRUNE_REFINEMENT = 16
SCAN_POINTS = 64


@dataclass
class Orbit:
    start: SignedPoint
    points: List[float]
    hit_critical_at: Optional[int] = None
    side_resolution: Side = Side.LEFT

    def __len__(self) -> int:
        return len(self.points)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "start": self.start.to_dict(),
            "points": list(self.points),
            "hit_critical_at": self.hit_critical_at,
            "side_resolution": self.side_resolution.letter,
        }

    def to_rows(self) -> List[str]:
        rows = ["# n x"]
        rows.extend(f"{n} {x:.17g}" for n, x in enumerate(self.points))
        return rows


class IntervalCover:
    """Union of occupied cells of a uniform grid on [0,1]"""

    def __init__(self, grid_size: int, mask: Optional[np.ndarray] = None):
        if grid_size < 1:
            raise ValueError(f"grid_size must be positive, got {grid_size}")
        self.grid_size = int(grid_size)
        if mask is None:
            mask = np.zeros(self.grid_size, dtype=bool)
        self.mask = np.asarray(mask, dtype=bool)
        if self.mask.shape != (self.grid_size,):
            raise ValueError("mask length must equal grid_size")

    @classmethod
    def from_points(cls, grid_size: int, xs: Sequence[float]) -> "IntervalCover":
        cover = cls(grid_size)
        xs = np.asarray(xs, dtype=float)
        if xs.size:
            cover.mask[cover.cell_indices(xs)] = True
        return cover

    @classmethod
    def from_intervals(cls, grid_size: int, intervals: Sequence[Interval]) -> "IntervalCover":
        cover = cls(grid_size)
        for interval in intervals:
            first = cover.cell_index(interval.lo)
            last = cover.cell_index(interval.hi)
            # open right end sitting on a cell boundary does not occupy that cell
            if not interval.point and last > first and interval.hi * grid_size == last:
                last -= 1
            cover.mask[first:last + 1] = True
        return cover

    @classmethod
    def full(cls, grid_size: int) -> "IntervalCover":
        return cls(grid_size, np.ones(grid_size, dtype=bool))

    def cell_index(self, x: float) -> int:
        return min(max(int(x * self.grid_size), 0), self.grid_size - 1)

    def cell_indices(self, xs: np.ndarray) -> np.ndarray:
        idx = np.floor(np.asarray(xs, dtype=float) * self.grid_size).astype(np.int64)
        return np.clip(idx, 0, self.grid_size - 1)

    @property
    def cell_count(self) -> int:
        return int(self.mask.sum())

    @property
    def fraction(self) -> float:
        return self.cell_count / self.grid_size

    def is_empty(self) -> bool:
        return not self.mask.any()

    def contains_point(self, x: float) -> bool:
        return bool(self.mask[self.cell_index(x)])

    def cells(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    @property
    def intervals(self) -> List[Interval]:
        cells = self.cells()
        if cells.size == 0:
            return []
        breaks = np.flatnonzero(np.diff(cells) > 1)
        starts = np.concatenate(([cells[0]], cells[breaks + 1]))
        ends = np.concatenate((cells[breaks], [cells[-1]]))
        g = self.grid_size
        return [Interval(s / g, (e + 1) / g, True, True) for s, e in zip(starts, ends)]

    def _aligned(self, other: "IntervalCover") -> Tuple[np.ndarray, np.ndarray]:
        if other.grid_size == self.grid_size:
            return self.mask, other.mask
        size = math.lcm(self.grid_size, other.grid_size)
        return (
            self.refine(size // self.grid_size).mask,
            other.refine(size // other.grid_size).mask,
        )

    def union(self, other: "IntervalCover") -> "IntervalCover":
        a, b = self._aligned(other)
        return IntervalCover(a.size, a | b)

    def intersection(self, other: "IntervalCover") -> "IntervalCover":
        a, b = self._aligned(other)
        return IntervalCover(a.size, a & b)

    def refine(self, factor: int) -> "IntervalCover":
        return IntervalCover(self.grid_size * factor, np.repeat(self.mask, factor))

    def coarsen(self, factor: int) -> "IntervalCover":
        if self.grid_size % factor:
            raise ValueError(f"grid {self.grid_size} is not divisible by {factor}")
        return IntervalCover(self.grid_size // factor, self.mask.reshape(-1, factor).any(axis=1))

    def dilate(self, cells: int = 1) -> "IntervalCover":
        mask = self.mask.copy()
        for shift in range(1, cells + 1):
            mask[shift:] |= self.mask[:-shift]
            mask[:-shift] |= self.mask[shift:]
        return IntervalCover(self.grid_size, mask)

    def issubset(self, other: "IntervalCover", margin_cells: int = 0) -> bool:
        a, b = self._aligned(other)
        wide = IntervalCover(b.size, b).dilate(margin_cells).mask if margin_cells else b
        return bool(np.all(~a | wide))

    def gaps(self) -> List[Interval]:
        """Maximal runs of empty cells strictly between occupied cells"""
        cells = self.cells()
        g = self.grid_size
        return [
            Interval((s + 1) / g, e / g, True, True)
            for s, e in zip(cells[:-1], cells[1:])
            if e - s > 1
        ]

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalCover):
            return NotImplemented
        a, b = self._aligned(other)
        return bool(np.array_equal(a, b))

    def __repr__(self) -> str:
        return f"IntervalCover(grid_size={self.grid_size}, cells={self.cell_count})"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "grid_size": self.grid_size,
            "cell_count": self.cell_count,
            "intervals": [[i.lo, i.hi] for i in self.intervals],
        }

    def to_rows(self) -> List[str]:
        rows = ["# lo hi"]
        rows.extend(f"{i.lo:.17g} {i.hi:.17g}" for i in self.intervals)
        return rows


class Stability(Enum):
    ATTRACTING = "Attracting"
    REPELLING = "Repelling"
    NEUTRAL = "Neutral"
    SUPER_ATTRACTOR = "SuperAttractor"


@dataclass
class PeriodicOrbit:
    itinerary: str
    points: List[float]
    period: int
    multiplier: float
    stability: Stability

    @property
    def is_attractor(self) -> bool:
        return self.stability in (Stability.ATTRACTING, Stability.SUPER_ATTRACTOR)

    def meets(self, interval: Interval, eps: float = 0.0) -> bool:
        return any(interval.interior_contains(x, eps) for x in self.points)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "itinerary": self.itinerary,
            "points": list(self.points),
            "period": self.period,
            "multiplier": self.multiplier,
            "stability": self.stability.value,
        }


@dataclass
class LyapunovEstimate:
    value: float
    n: int
    aborted_at_critical: bool
    points: List[float] = field(default_factory=list, repr=False)

    def recompute(self, lorenz: LorenzMapBase) -> float:
        logs = [math.log(abs(lorenz.derivative(x))) for x in self.points[:self.n]]
        return math.fsum(logs) / self.n if self.n else float("nan")

    def to_dict(self) -> Dict[str, Any]:
        return {"value": self.value, "n": self.n, "aborted_at_critical": self.aborted_at_critical}


@dataclass
class MinimalPeriodOrbit:
    orbit: PeriodicOrbit
    unique: bool
    rivals: List[PeriodicOrbit]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "orbit": self.orbit.to_dict(),
            "unique": self.unique,
            "rivals": [r.to_dict() for r in self.rivals],
        }


@dataclass
class HomtervalEvidence:
    interval: Interval
    steps_checked: int
    straddles_at: Optional[int]
    pairwise_disjoint: bool
    min_length: float
    max_length: float

    @property
    def is_homterval_candidate(self) -> bool:
        return self.straddles_at is None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "interval": [self.interval.lo, self.interval.hi],
            "steps_checked": self.steps_checked,
            "straddles_at": self.straddles_at,
            "pairwise_disjoint": self.pairwise_disjoint,
            "min_length": self.min_length,
            "max_length": self.max_length,
        }


@dataclass
class VisitDensity:
    target: Interval
    grid: int
    horizon: int
    fraction: float
    unvisited_cells: List[int]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "target": [self.target.lo, self.target.hi],
            "grid": self.grid,
            "horizon": self.horizon,
            "fraction": self.fraction,
            "unvisited_cells": len(self.unvisited_cells),
        }


def iterate(lorenz: LorenzMapBase, p: SignedPoint, n: int,
            side_resolution: Side = Side.LEFT) -> Orbit:
    """
    Record n forward iterates of a signed point

    Args:
        lorenz: Map to iterate
        p: Starting point (its side resolves a start on the critical point)
        n: Number of steps
        side_resolution: Side used whenever a later iterate reaches the critical point

    Returns:
        Orbit with n + 1 points
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    side = side_resolution
    points = [p.x]
    hit = None
    x = p.x
    for k in range(n):
        if lorenz.is_critical(x):
            if hit is None:
                hit = k
            x = lorenz.evaluate(x, p.side if k == 0 else side)
        else:
            x = lorenz.evaluate(x)
        points.append(x)
    return Orbit(start=p, points=points, hit_critical_at=hit, side_resolution=side)


def advance(lorenz: LorenzMapBase, xs: np.ndarray, n: int, side: Side = Side.LEFT) -> np.ndarray:
    """Push an array of points n steps forward"""
    xs = np.asarray(xs, dtype=float)
    for _ in range(n):
        xs = lorenz.evaluate_array(xs, side)
    return xs


def omega_estimate(lorenz: LorenzMapBase, p: SignedPoint, transient: int, length: int,
                   grid: int = DEFAULT_GRID, side_resolution: Side = Side.LEFT) -> IntervalCover:
    if transient < 1 or length < 1:
        raise ValueError("transient and length must be at least 1")
    if grid < 2:
        raise ValueError(f"grid must be at least 2, got {grid}")

    side = side_resolution
    step = lorenz.evaluate
    x = step(p.x, p.side)
    for _ in range(transient - 1):
        x = step(x, side)
    samples = np.empty(length + 1)
    samples[0] = x
    for k in range(1, length + 1):
        x = step(x, side)
        samples[k] = x
    cover = IntervalCover.from_points(grid, samples)
    logger.debug(f"omega cover of {p.x}: {cover.cell_count}/{grid} cells")
    return cover


def preimages(lorenz: LorenzMapBase, y: float) -> List[SignedPoint]:
    """
    Preimages of y, at most one per branch, sorted by position

    The critical point is included (with the matching side) when y equals a
    critical value within eps_value.
    """
    if not -lorenz.tol.eps_value <= y <= 1.0 + lorenz.tol.eps_value:
        raise ValueError(f"y must lie in [0,1], got {y}")
    eps = lorenz.tol.eps_value
    found = []
    for side in (Side.LEFT, Side.RIGHT):
        img_lo, img_hi = lorenz.branch_image(side)
        if not img_lo - eps <= y <= img_hi + eps:
            continue
        critical_value = img_hi if side is Side.LEFT else img_lo
        if abs(y - critical_value) <= eps:
            found.append(SignedPoint(lorenz.c, side))
            continue
        x = lorenz.invert_branch(side, min(max(y, img_lo), img_hi))
        found.append(SignedPoint(min(max(x, 0.0), 1.0), side))
    return sorted(found, key=lambda q: (q.x, q.side))


def _preimage_level(lorenz: LorenzMapBase, ys: np.ndarray) -> np.ndarray:
    eps = lorenz.tol.eps_value
    parts = []
    for side in (Side.LEFT, Side.RIGHT):
        img_lo, img_hi = lorenz.branch_image(side)
        inside = ys[(ys >= img_lo - eps) & (ys <= img_hi + eps)]
        if inside.size:
            parts.append(lorenz.invert_branch_array(side, np.clip(inside, img_lo, img_hi)))
    return np.concatenate(parts) if parts else np.empty(0)


def _prune(xs: np.ndarray, cells: int) -> np.ndarray:
    """Keep the smallest and largest node of every fine cell"""
    if xs.size == 0:
        return xs
    xs = np.sort(xs)
    idx = np.clip(np.floor(xs * cells).astype(np.int64), 0, cells - 1)
    first = np.concatenate(([True], idx[1:] != idx[:-1]))
    last = np.concatenate((idx[1:] != idx[:-1], [True]))
    return xs[first | last]


def alpha_estimate(lorenz: LorenzMapBase, x: float, depth: int,
                   grid: int = DEFAULT_GRID) -> IntervalCover:
    """
    Cover of the deep levels of the pruned backward orbit of x

    Args:
        lorenz: Map
        x: Point whose alpha-limit is approximated
        depth: Number of preimage levels
        grid: Cover grid size

    Returns:
        Cover of cells holding preimages at levels >= depth / 2

    Raises:
        PreimageTreeEmpty: If x has no preimages
    """
    if depth < 1:
        raise ValueError(f"depth must be at least 1, got {depth}")
    fine = grid * PRUNE_REFINEMENT
    level = np.array([x], dtype=float)
    cover = IntervalCover(grid)
    for k in range(1, depth + 1):
        level = _prune(_preimage_level(lorenz, level), fine)
        if level.size == 0:
            if k == 1:
                raise PreimageTreeEmpty(f"{x} has no preimages", {"x": x})
            logger.info(f"Preimage tree of {x} died out at level {k}")
            break
        if 2 * k >= depth:
            cover.mask[cover.cell_indices(level)] = True
    return cover


def lyapunov(lorenz: LorenzMapBase, p: SignedPoint, n: int,
             side_resolution: Side = Side.LEFT) -> LyapunovEstimate:
    orbit = iterate(lorenz, p, n, side_resolution)
    steps = n if orbit.hit_critical_at is None else orbit.hit_critical_at
    points = orbit.points[:steps]
    if steps == 0:
        return LyapunovEstimate(value=float("-inf"), n=0, aborted_at_critical=True, points=[])
    logs = [math.log(abs(lorenz.derivative(x))) for x in points]
    value = math.fsum(logs) / steps
    if orbit.hit_critical_at is not None:
        logger.warning(f"Lyapunov average from {p.x} aborted at the critical point after {steps} steps")
    return LyapunovEstimate(
        value=value,
        n=steps,
        aborted_at_critical=orbit.hit_critical_at is not None,
        points=points,
    )


def lyndon_words(max_length: int) -> Iterator[Tuple[int, ...]]:
    """All Lyndon words over {0,1} of length <= max_length, in lexicographic order"""
    word = [-1]
    while word:
        word[-1] += 1
        yield tuple(word)
        m = len(word)
        while len(word) < max_length:
            word.append(word[len(word) - m])
        while word and word[-1] == 1:
            word.pop()


def _word_code(word: Sequence[int]) -> int:
    code = 0
    for letter in word:
        code = 2 * code + letter
    return code


def _letters_to_itinerary(word: Sequence[int]) -> str:
    return "".join("R" if letter else "L" for letter in word)


def _extend_cylinders(lorenz: LorenzMapBase, lo: np.ndarray, hi: np.ndarray,
                      valid: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cylinders of words one letter longer, obtained by prepending each letter"""
    m = lo.size
    new_lo = np.zeros(2 * m)
    new_hi = np.zeros(2 * m)
    new_valid = np.zeros(2 * m, dtype=bool)
    for letter, side in enumerate((Side.LEFT, Side.RIGHT)):
        img_lo, img_hi = lorenz.branch_image(side)
        clo = np.clip(np.maximum(lo, img_lo), img_lo, img_hi)
        chi = np.clip(np.minimum(hi, img_hi), img_lo, img_hi)
        ok = valid & (np.maximum(lo, img_lo) <= np.minimum(hi, img_hi))
        block = slice(letter * m, (letter + 1) * m)
        if ok.any():
            new_lo[block][ok] = lorenz.invert_branch_array(side, clo[ok])
            new_hi[block][ok] = lorenz.invert_branch_array(side, chi[ok])
        new_valid[block] = ok
    return new_lo, new_hi, new_valid


def _compose(lorenz: LorenzMapBase, letters: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Apply the fixed-letter branch composition of each word to its points"""
    ys = np.array(xs, dtype=float)
    for k in range(letters.shape[1]):
        left = letters[:, k] == 0
        if ys.ndim == 2:
            left = left[:, None]
        ys = np.where(left, lorenz.branch_array(Side.LEFT, ys), lorenz.branch_array(Side.RIGHT, ys))
    return ys


def _word_roots(lorenz: LorenzMapBase, letters: np.ndarray, lo: np.ndarray,
                hi: np.ndarray, scan_points: int) -> List[Tuple[int, float]]:
    """Fixed points of each word's branch composition on its cylinder"""
    t = np.linspace(0.0, 1.0, scan_points)
    xs = lo[:, None] + (hi - lo)[:, None] * t[None, :]
    xs[:, 0] = lo
    xs[:, -1] = hi
    hs = _compose(lorenz, letters, xs) - xs

    roots: List[Tuple[int, float]] = []
    zero_rows, zero_cols = np.nonzero(hs == 0.0)
    roots.extend((int(i), float(xs[i, j])) for i, j in zip(zero_rows, zero_cols))

    rows, cols = np.nonzero(hs[:, :-1] * hs[:, 1:] < 0.0)
    if rows.size:
        a = xs[rows, cols]
        b = xs[rows, cols + 1]
        ha_negative = hs[rows, cols] < 0.0
        sub = letters[rows]
        for _ in range(lorenz.tol.max_bisect):
            mid = 0.5 * (a + b)
            if np.all((mid <= a) | (mid >= b)):
                break
            hm = _compose(lorenz, sub, mid) - mid
            move_a = (hm < 0.0) == ha_negative
            a = np.where(move_a, mid, a)
            b = np.where(move_a, b, mid)
        roots.extend((int(i), float(x)) for i, x in zip(rows, 0.5 * (a + b)))
    return roots


def _classify(lorenz: LorenzMapBase, points: Sequence[float], multiplier: float) -> Stability:
    eps = lorenz.tol.eps_value
    if any(lorenz.is_critical(x) for x in points):
        return Stability.SUPER_ATTRACTOR
    if multiplier < 1.0 - eps:
        return Stability.ATTRACTING
    if multiplier > 1.0 + eps:
        return Stability.REPELLING
    return Stability.NEUTRAL


def _branch_by_letter(lorenz: LorenzMapBase, letters: np.ndarray, xs: np.ndarray) -> np.ndarray:
    return np.where(letters == 0, lorenz.branch_array(Side.LEFT, xs), lorenz.branch_array(Side.RIGHT, xs))


def _invert_by_letter(lorenz: LorenzMapBase, letters: np.ndarray, ys: np.ndarray) -> np.ndarray:
    left = lorenz.invert_branch_array(Side.LEFT, np.clip(ys, 0.0, lorenz.v1))
    right = lorenz.invert_branch_array(Side.RIGHT, np.clip(ys, lorenz.v0, 1.0))
    return np.where(letters == 0, left, right)


def _cycle_residuals(lorenz: LorenzMapBase, letters: np.ndarray, pts: np.ndarray) -> np.ndarray:
    images = np.column_stack([
        _branch_by_letter(lorenz, letters[:, k], pts[:, k]) for k in range(letters.shape[1])
    ])
    return np.max(np.abs(images - np.roll(pts, -1, axis=1)), axis=1)


def _orbits_from_roots(lorenz: LorenzMapBase, letters: np.ndarray, x0: np.ndarray) -> List[PeriodicOrbit]:
    """
    Build cycles through each root, forward and backward, keeping the more consistent one

    Forward construction is accurate for contracting cycles and backward
    construction (through the branch inverses) for expanding ones.
    """
    tol = lorenz.tol
    rows, n = letters.shape
    forward = np.empty((rows, n))
    forward[:, 0] = x0
    for k in range(n - 1):
        forward[:, k + 1] = _branch_by_letter(lorenz, letters[:, k], forward[:, k])
    backward = np.empty((rows, n))
    backward[:, 0] = x0
    nxt = x0
    for k in range(n - 1, 0, -1):
        nxt = _invert_by_letter(lorenz, letters[:, k], nxt)
        backward[:, k] = nxt

    res_forward = _cycle_residuals(lorenz, letters, forward)
    res_backward = _cycle_residuals(lorenz, letters, backward)
    use_forward = res_forward <= res_backward
    pts = np.where(use_forward[:, None], forward, backward)
    residual = np.minimum(res_forward, res_backward)

    c = lorenz.c
    wrong_side = np.where(letters == 0, pts > c + tol.eps_point, pts < c - tol.eps_point).any(axis=1)
    ordered = np.sort(pts, axis=1)
    repeated = (np.diff(ordered, axis=1) <= tol.eps_point).any(axis=1) if n > 1 else np.zeros(rows, bool)
    derivs = np.where(
        letters == 0,
        lorenz.branch_derivative_array(Side.LEFT, pts),
        lorenz.branch_derivative_array(Side.RIGHT, pts),
    )
    multipliers = np.prod(np.abs(derivs), axis=1)

    orbits = []
    for r in range(rows):
        if residual[r] > tol.eps_value or wrong_side[r] or repeated[r]:
            logger.debug(f"Rejected root {x0[r]} of {_letters_to_itinerary(letters[r])}: "
                         f"residual {residual[r]:.3g}")
            continue
        points = [float(x) for x in pts[r]]
        multiplier = float(multipliers[r])
        orbits.append(PeriodicOrbit(
            itinerary=_letters_to_itinerary(letters[r]),
            points=points,
            period=n,
            multiplier=multiplier,
            stability=_classify(lorenz, points, multiplier),
        ))
    return orbits


def _critical_cycles(lorenz: LorenzMapBase, max_period: int) -> List[PeriodicOrbit]:
    """Super-attracting orbits detected by the critical orbit returning to c"""
    cycles = []
    for side in (Side.LEFT, Side.RIGHT):
        points = [lorenz.c]
        itinerary = [side.letter]
        x = lorenz.v1 if side is Side.LEFT else lorenz.v0
        for k in range(1, max_period):
            if lorenz.is_critical(x):
                cycles.append(PeriodicOrbit(
                    itinerary="".join(itinerary),
                    points=points,
                    period=k,
                    multiplier=0.0,
                    stability=Stability.SUPER_ATTRACTOR,
                ))
                break
            points.append(x)
            itinerary.append(lorenz.side_of(x).letter)
            x = lorenz.evaluate(x)
        else:
            if lorenz.is_critical(x):
                cycles.append(PeriodicOrbit("".join(itinerary), points, max_period, 0.0,
                                            Stability.SUPER_ATTRACTOR))
    return cycles


class _OrbitIndex:
    """Point-set deduplication keyed on the smallest point of each orbit"""

    def __init__(self, eps: float):
        self.eps = eps
        self.buckets: Dict[Tuple[int, int], List[PeriodicOrbit]] = defaultdict(list)

    def _key(self, orbit: PeriodicOrbit) -> Tuple[int, int]:
        return orbit.period, int(math.floor(min(orbit.points) / (4.0 * self.eps)))

    def add(self, orbit: PeriodicOrbit) -> bool:
        period, bucket = self._key(orbit)
        mine = sorted(orbit.points)
        for b in (bucket - 1, bucket, bucket + 1):
            for other in self.buckets.get((period, b), []):
                theirs = sorted(other.points)
                if all(abs(p - q) <= self.eps for p, q in zip(mine, theirs)):
                    return False
        self.buckets[(period, bucket)].append(orbit)
        return True


def periodic_orbits(lorenz: LorenzMapBase, max_period: int,
                    scan_points: int = SCAN_POINTS) -> List[PeriodicOrbit]:
    """
    Locate periodic orbits up to max_period by itinerary

    For every Lyndon word the cylinder on which the branch composition is defined
    and monotone is built by backward propagation of branch domains; fixed points
    of the composition are bracketed on a pre-scan and refined by bisection.

    Args:
        lorenz: Map (standard or renormalized view)
        max_period: Largest period searched
        scan_points: Pre-scan resolution per cylinder

    Returns:
        Orbits sorted by period then by first point
    """
    if max_period < 1:
        raise ValueError(f"max_period must be at least 1, got {max_period}")

    words_by_length: Dict[int, List[Tuple[int, ...]]] = defaultdict(list)
    for word in lyndon_words(max_period):
        words_by_length[len(word)].append(word)

    index = _OrbitIndex(lorenz.tol.eps_point)
    found: List[PeriodicOrbit] = []
    lo = np.array([0.0, lorenz.c])
    hi = np.array([lorenz.c, 1.0])
    valid = np.array([True, True])

    for n in range(1, max_period + 1):
        if n > 1:
            lo, hi, valid = _extend_cylinders(lorenz, lo, hi, valid)
        words = [w for w in words_by_length[n] if valid[_word_code(w)]]
        if not words:
            continue
        codes = np.array([_word_code(w) for w in words], dtype=np.int64)
        letters = np.array(words, dtype=np.int8)
        roots = _word_roots(lorenz, letters, lo[codes], hi[codes], scan_points)
        if not roots:
            continue
        rows = np.array([i for i, _ in roots], dtype=np.int64)
        x0 = np.array([x for _, x in roots], dtype=float)
        for orbit in _orbits_from_roots(lorenz, letters[rows], x0):
            if index.add(orbit):
                found.append(orbit)

    for orbit in _critical_cycles(lorenz, max_period):
        if index.add(orbit):
            found.append(orbit)

    found.sort(key=lambda o: (o.period, o.points[0]))
    attractors = sum(o.is_attractor for o in found)
    neutral = sum(o.stability is Stability.NEUTRAL for o in found)
    logger.info(f"Found {len(found)} periodic orbits up to period {max_period} "
                f"({attractors} attracting, {neutral} neutral)")
    return found


def minimal_period_orbit(lorenz: LorenzMapBase, side: Side, eps: float, max_period: int,
                         orbits: Optional[List[PeriodicOrbit]] = None) -> MinimalPeriodOrbit:
    """
    Periodic orbit of minimal period meeting a one-sided window at c

    Raises:
        NoPeriodicOrbitInWindow: If no orbit up to max_period meets the window
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    c = lorenz.c
    window = Interval(max(c - eps, 0.0), c) if side is Side.LEFT else Interval(c, min(c + eps, 1.0))
    if orbits is None:
        orbits = periodic_orbits(lorenz, max_period)
    candidates = [o for o in orbits if o.period <= max_period and o.meets(window)]
    if not candidates:
        raise NoPeriodicOrbitInWindow(
            f"No periodic orbit up to period {max_period} meets ({window.lo}, {window.hi})",
            {"window": [window.lo, window.hi], "max_period": max_period},
        )
    best = min(o.period for o in candidates)
    at_best = [o for o in candidates if o.period == best]
    if len(at_best) > 1:
        logger.warning(f"{len(at_best)} orbits of minimal period {best} meet the {side.name.lower()} window")
    return MinimalPeriodOrbit(orbit=at_best[0], unique=len(at_best) == 1, rivals=at_best[1:])


def critical_orbits(lorenz: LorenzMapBase, n: int) -> Tuple[Orbit, Orbit]:
    """Orbits of c- and c+"""
    return (
        iterate(lorenz, SignedPoint(lorenz.c, Side.LEFT), n, Side.LEFT),
        iterate(lorenz, SignedPoint(lorenz.c, Side.RIGHT), n, Side.RIGHT),
    )


def push_interval(lorenz: LorenzMapBase, interval: Interval) -> Optional[Interval]:
    """Image of an interval not straddling c (None if it does)"""
    c = lorenz.c
    if interval.lo < c < interval.hi:
        return None
    side = Side.LEFT if interval.hi <= c else Side.RIGHT
    lo = lorenz.branch(side, interval.lo)
    hi = lorenz.branch(side, interval.hi)
    if lo >= hi:
        return Interval.at(lo)
    return Interval(lo, hi)


def homterval_check(lorenz: LorenzMapBase, interval: Interval, n: int) -> HomtervalEvidence:
    """
    Push an interval forward and report whether any image straddles c

    An interval none of whose first n images contains c is a homterval candidate;
    pairwise disjoint images are reported as wandering-interval evidence.
    """
    images = [interval]
    straddles_at = None
    current = interval
    for k in range(n):
        nxt = push_interval(lorenz, current)
        if nxt is None:
            straddles_at = k
            break
        images.append(nxt)
        current = nxt
        if nxt.point:
            break
    ordered = sorted(images, key=lambda i: i.lo)
    disjoint = all(a.hi <= b.lo for a, b in zip(ordered, ordered[1:]))
    lengths = [i.length for i in images]
    return HomtervalEvidence(
        interval=interval,
        steps_checked=len(images) - 1,
        straddles_at=straddles_at,
        pairwise_disjoint=disjoint,
        min_length=min(lengths),
        max_length=max(lengths),
    )


def visit_density(lorenz: LorenzMapBase, target: Interval, grid: int = DEFAULT_GRID,
                  horizon: int = 1000) -> VisitDensity:
    """Fraction of grid cell midpoints whose orbits enter the open target within horizon"""
    xs = (np.arange(grid) + 0.5) / grid
    visited = (xs > target.lo) & (xs < target.hi)
    for _ in range(horizon):
        if visited.all():
            break
        xs = lorenz.evaluate_array(xs)
        visited |= (xs > target.lo) & (xs < target.hi)
    unvisited = np.flatnonzero(~visited).tolist()
    return VisitDensity(target, grid, horizon, float(visited.mean()), unvisited)
