"""
Lorenz Attractors - Renormalization

Path: /renormalization.py
Purpose: Detects renormalization intervals bounded by periodic points, builds the rescaled
         return map as an evaluable Lorenz map view, computes renormalization cycles and
         trapping regions, and stacks nested renormalizations into a tower checked for
         non-linking.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from lorenz_config import DEFAULT_GRID, DEFAULT_SEED, Tolerances
from lorenz_errors import LinkedIntervalsDetected, RecordInvalid
from lorenz_map import Interval, LorenzMapBase, Side, SignedPoint
from orbits import IntervalCover, PeriodicOrbit, iterate, periodic_orbits, push_interval
from return_maps import NICE_HORIZON, is_nice

logger = logging.getLogger("renormalization")

INCLUSION_SAMPLES = 1000
CYCLE_HORIZON = 1000
SAMPLE_BUDGET = 4096
GAP_SAMPLES = 256


@dataclass(frozen=True)
class RenormalizationRecord:
    """Renormalization interval J=(a,b) with the periods of its endpoints"""

    J: Interval
    period_a: int
    period_b: int

    @property
    def offset(self) -> float:
        return self.J.lo

    @property
    def scale(self) -> float:
        return self.J.hi - self.J.lo

    def rescale(self, x):
        """Affine map [0,1] -> [a,b]"""
        return self.J.lo + self.scale * x

    def unscale(self, y):
        """Inverse affine map [a,b] -> [0,1]"""
        return (y - self.J.lo) / self.scale

    def to_dict(self) -> Dict[str, Any]:
        return {
            "J": [self.J.lo, self.J.hi],
            "period_a": self.period_a,
            "period_b": self.period_b,
            "offset": self.offset,
            "scale": self.scale,
        }


@dataclass
class CycleSets:
    U_J: List[Interval]
    K_J: List[Interval]
    Lambda_J_sample: IntervalCover
    horizon: int

    def k_cover(self, grid: int) -> IntervalCover:
        return IntervalCover.from_intervals(grid, self.K_J)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "U_J": [[i.lo, i.hi] for i in self.U_J],
            "K_J": [[i.lo, i.hi] for i in self.K_J],
            "Lambda_J_sample": self.Lambda_J_sample.to_dict(),
            "horizon": self.horizon,
        }


@dataclass
class RenormTower:
    records: List[RenormalizationRecord]
    depth_limit_hit: bool
    solenoid_cover: Optional[IntervalCover] = None
    level_records: List[RenormalizationRecord] = field(default_factory=list)
    views: List["RenormalizedMapView"] = field(default_factory=list, repr=False)
    cycle_sets: List[CycleSets] = field(default_factory=list, repr=False)

    @property
    def depth(self) -> int:
        return len(self.records)

    @property
    def deepest_view(self) -> Optional["RenormalizedMapView"]:
        return self.views[-1] if self.views else None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "depth": self.depth,
            "depth_limit_hit": self.depth_limit_hit,
            "records": [r.to_dict() for r in self.records],
            "level_records": [r.to_dict() for r in self.level_records],
            "solenoid_cover": self.solenoid_cover.to_dict() if self.solenoid_cover is not None else None,
            "K_J": [[[i.lo, i.hi] for i in cs.K_J] for cs in self.cycle_sets],
        }

    def to_rows(self) -> List[str]:
        rows = ["# a b period_a period_b depth"]
        for depth, rec in enumerate(self.records, start=1):
            rows.append(f"{rec.J.lo:.17g} {rec.J.hi:.17g} {rec.period_a} {rec.period_b} {depth}")
        if self.solenoid_cover is not None:
            rows.extend(self.solenoid_cover.to_rows())
        return rows


def _half_word(lorenz: LorenzMapBase, start: float, side: Side, length: int) -> List[Side]:
    """Branch sides followed by a half of J during its excursion"""
    sides = [side]
    y = lorenz.branch(side, start)
    for _ in range(length - 1):
        nxt = lorenz.side_of(y)
        sides.append(nxt)
        y = lorenz.branch(nxt, y)
    return sides


class RenormalizedMapView(LorenzMapBase):
    """
    Rescaled first return map to a renormalization interval

    g = A^-1 o f^l o A left of the rescaled critical point and A^-1 o f^r o A right of it,
    with A(x) = a + (b - a) x. Views nest: the parent may itself be a view.
    """

    def __init__(self, parent: LorenzMapBase, record: RenormalizationRecord,
                 tol: Optional[Tolerances] = None):
        self.parent = parent
        self.record = record
        self.tol = tol or parent.tol
        a, b = record.J.lo, record.J.hi
        self.c = (parent.c - a) / (b - a)
        self.depth = getattr(parent, "depth", 0) + 1
        self._words = {
            Side.LEFT: _half_word(parent, 0.5 * (a + parent.c), Side.LEFT, record.period_a),
            Side.RIGHT: _half_word(parent, 0.5 * (parent.c + b), Side.RIGHT, record.period_b),
        }
        self.v1 = self.branch(Side.LEFT, self.c)
        self.v0 = self.branch(Side.RIGHT, self.c)

    def _clamp(self, side: Side, x):
        if side is Side.LEFT:
            return np.clip(x, 0.0, self.c)
        return np.clip(x, self.c, 1.0)

    def branch(self, side: Side, x: float) -> float:
        y = self.record.rescale(float(self._clamp(side, x)))
        for s in self._words[side]:
            y = self.parent.branch(s, y)
        return float(min(max(self.record.unscale(y), 0.0), 1.0))

    def branch_array(self, side: Side, xs: np.ndarray) -> np.ndarray:
        y = self.record.rescale(self._clamp(side, np.asarray(xs, dtype=float)))
        for s in self._words[side]:
            y = self.parent.branch_array(s, y)
        return np.clip(self.record.unscale(y), 0.0, 1.0)

    def branch_derivative(self, side: Side, x: float) -> float:
        # the affine factors cancel in the chain rule
        y = self.record.rescale(float(self._clamp(side, x)))
        slope = 1.0
        for s in self._words[side]:
            slope *= self.parent.branch_derivative(s, y)
            y = self.parent.branch(s, y)
        return slope

    def branch_derivative_array(self, side: Side, xs: np.ndarray) -> np.ndarray:
        y = self.record.rescale(self._clamp(side, np.asarray(xs, dtype=float)))
        slope = np.ones_like(y)
        for s in self._words[side]:
            slope = slope * self.parent.branch_derivative_array(s, y)
            y = self.parent.branch_array(s, y)
        return slope

    def itinerary_word(self, side: Side) -> str:
        return "".join(s.letter for s in self._words[side])

    def describe(self) -> Dict[str, Any]:
        return {
            "c": self.c,
            "v1": self.v1,
            "v0": self.v0,
            "depth": self.depth,
            "J": [self.record.J.lo, self.record.J.hi],
            "periods": [self.record.period_a, self.record.period_b],
            "parent": self.parent.describe(),
        }


def _power_values(lorenz: LorenzMapBase, xs: np.ndarray, side: Side, n: int) -> np.ndarray:
    ys = lorenz.branch_array(side, xs)
    for _ in range(n - 1):
        ys = lorenz.evaluate_array(ys)
    return ys


def _period_residual(lorenz: LorenzMapBase, x: float, period: int) -> float:
    y = x
    for _ in range(period):
        y = lorenz.evaluate(y)
    return abs(y - x)


def verify_record(lorenz: LorenzMapBase, rec: RenormalizationRecord,
                  samples: int = INCLUSION_SAMPLES) -> Dict[str, Any]:
    """
    Re-check a record: periodic endpoints and the two half-interval inclusions

    The inclusions are tested at both endpoints (one-sided at c) and on a uniform
    sweep of each half.
    """
    a, b, c = rec.J.lo, rec.J.hi, lorenz.c
    tol = lorenz.tol
    checks: Dict[str, Any] = {}
    checks["periodic_a"] = _period_residual(lorenz, a, rec.period_a) <= tol.eps_point
    checks["periodic_b"] = _period_residual(lorenz, b, rec.period_b) <= tol.eps_point

    t = (np.arange(samples) + 0.5) / samples
    for name, side, lo, hi, n in (("left", Side.LEFT, a, c, rec.period_a),
                                  ("right", Side.RIGHT, c, b, rec.period_b)):
        xs = np.concatenate(([lo, hi], lo + (hi - lo) * t))
        ys = _power_values(lorenz, xs, side, n)
        bad = (ys < a - tol.eps_value) | (ys > b + tol.eps_value)
        checks[f"{name}_inclusion"] = not bool(bad.any())
        checks[f"{name}_image"] = [float(ys.min()), float(ys.max())]
        if bad.any():
            checks[f"{name}_witness"] = {"x": float(xs[bad][0]), "image": float(ys[bad][0])}
    checks["passed"] = all(checks[k] for k in ("periodic_a", "periodic_b", "left_inclusion", "right_inclusion"))
    return checks


def _candidates(lorenz: LorenzMapBase, orbits: Sequence[PeriodicOrbit]):
    """Per orbit: its nearest point to c on each side with the bound its other points impose"""
    c, eps = lorenz.c, lorenz.tol.eps_point
    lefts, rights = [], []
    for orbit in orbits:
        pts = np.asarray(orbit.points)
        below = pts[pts < c - eps]
        above = pts[pts > c + eps]
        if below.size:
            lefts.append((float(below.max()), orbit.period, float(above.min()) if above.size else 1.0))
        if above.size:
            rights.append((float(above.min()), orbit.period, float(below.max()) if below.size else 0.0))
    return lefts, rights


def detect_renormalization(lorenz: LorenzMapBase, max_period: int, horizon: int = NICE_HORIZON,
                           orbits: Optional[List[PeriodicOrbit]] = None,
                           samples: int = INCLUSION_SAMPLES) -> List[RenormalizationRecord]:
    """
    Find renormalization intervals bounded by periodic points up to max_period

    Candidate pairs (a,b) are filtered by the one-sided critical values f^l(c-) and
    f^r(c+) and by the boundary orbits, then checked for niceness and for the half-interval
    inclusions, nearest to c first. The whole interval (0,1) is excluded.

    Returns:
        Verified records, largest interval first
    """
    if max_period < 1:
        raise ValueError(f"max_period must be at least 1, got {max_period}")
    if orbits is None:
        orbits = periodic_orbits(lorenz, max_period)
    lefts, rights = _candidates(lorenz, [o for o in orbits if o.period <= max_period])
    if not lefts or not rights:
        return []

    tol = lorenz.tol
    c = lorenz.c
    crit_left = iterate(lorenz, SignedPoint(c, Side.LEFT), max_period, Side.LEFT).points
    crit_right = iterate(lorenz, SignedPoint(c, Side.RIGHT), max_period, Side.RIGHT).points

    a = np.array([x for x, _, _ in lefts])
    ell = np.array([p for _, p, _ in lefts])
    b_max = np.array([m for _, _, m in lefts])
    u = np.array([crit_left[p] for p in ell])
    b = np.array([x for x, _, _ in rights])
    r = np.array([p for _, p, _ in rights])
    a_min = np.array([m for _, _, m in rights])
    w = np.array([crit_right[p] for p in r])

    eps = tol.eps_value
    keep_left = (a <= u + eps) & (u <= b_max + eps)
    keep_right = (w <= b + eps) & (w >= a_min - eps)
    a, ell, b_max, u = a[keep_left], ell[keep_left], b_max[keep_left], u[keep_left]
    b, r, a_min, w = b[keep_right], r[keep_right], a_min[keep_right], w[keep_right]
    if a.size == 0 or b.size == 0:
        logger.info("Renormalization scan: no endpoint admits the critical value inclusions")
        return []

    A, B = a[:, None], b[None, :]
    feasible = (
        (A <= u[:, None] + eps) & (u[:, None] <= B + eps)
        & (A <= w[None, :] + eps) & (w[None, :] <= B + eps)
        & (B <= b_max[:, None] + eps) & (A >= a_min[None, :] - eps)
        & ~((A <= eps) & (B >= 1.0 - eps))
    )
    rows, cols = np.nonzero(feasible)
    order = np.argsort(np.maximum(c - a[rows], b[cols] - c), kind="stable")
    logger.info(f"Renormalization scan: {len(lefts)}x{len(rights)} endpoint pairs, {rows.size} feasible")

    records: List[RenormalizationRecord] = []
    for k in order:
        i, j = rows[k], cols[k]
        J = Interval(float(a[i]), float(b[j]))
        if any(abs(J.lo - rec.J.lo) <= tol.eps_point and abs(J.hi - rec.J.hi) <= tol.eps_point for rec in records):
            continue
        if not is_nice(lorenz, J, min(horizon, NICE_HORIZON)).is_nice:
            continue
        rec = RenormalizationRecord(J, int(ell[i]), int(r[j]))
        checks = verify_record(lorenz, rec, samples)
        if checks["passed"]:
            logger.debug(f"Renormalization interval ({J.lo}, {J.hi}) with periods ({rec.period_a}, {rec.period_b})")
            records.append(rec)
    records.sort(key=lambda rec: -rec.J.length)
    return records


def renormalize(lorenz: LorenzMapBase, rec: RenormalizationRecord) -> RenormalizedMapView:
    """
    Rescaled return map of a verified record

    Raises:
        RecordInvalid: If the record fails its re-check
    """
    checks = verify_record(lorenz, rec)
    if not checks["passed"]:
        raise RecordInvalid(f"Record ({rec.J.lo}, {rec.J.hi}) fails its re-check", checks)
    return RenormalizedMapView(lorenz, rec)


def push_pieces(lorenz: LorenzMapBase, pieces: List[Interval]) -> List[Interval]:
    """Images of intervals, splitting any interval that straddles c"""
    out = []
    c = lorenz.c
    for piece in pieces:
        parts = [piece] if not piece.lo < c < piece.hi else [Interval(piece.lo, c), Interval(c, piece.hi)]
        for part in parts:
            image = push_interval(lorenz, part)
            if image is not None and not image.point:
                out.append(image)
    return out


def merge_intervals(intervals: List[Interval]) -> List[Interval]:
    merged: List[Interval] = []
    for iv in sorted(intervals, key=lambda i: i.lo):
        if merged and iv.lo < merged[-1].hi:
            last = merged[-1]
            merged[-1] = Interval(last.lo, max(last.hi, iv.hi))
        else:
            merged.append(iv)
    return merged


def renormalization_cycle(lorenz: LorenzMapBase, rec: RenormalizationRecord) -> List[Interval]:
    """Forward images of the two halves of J up to their return, with J as one component"""
    a, b, c = rec.J.lo, rec.J.hi, lorenz.c
    images: List[Interval] = []
    for start, period in ((Interval(a, c), rec.period_a), (Interval(c, b), rec.period_b)):
        pieces = [start]
        for _ in range(period - 1):
            pieces = push_pieces(lorenz, pieces)
            images.extend(pieces)
    outside = [iv for iv in images if not rec.J.contains_interval(iv, lorenz.tol.eps_value)]
    return merge_intervals([rec.J] + outside)


def entry_times(lorenz: LorenzMapBase, xs: np.ndarray, J: Interval, horizon: int) -> np.ndarray:
    """First time each point lies in the open interval J (horizon + 1 if never)"""
    xs = np.asarray(xs, dtype=float)
    times = np.full(xs.size, horizon + 1, dtype=np.int64)
    inside = (xs > J.lo) & (xs < J.hi)
    times[inside] = 0
    idx = np.flatnonzero(~inside)
    y = xs[idx]
    for k in range(1, horizon + 1):
        if idx.size == 0:
            break
        y = lorenz.evaluate_array(y)
        hit = (y > J.lo) & (y < J.hi)
        times[idx[hit]] = k
        idx, y = idx[~hit], y[~hit]
    return times


def _edge(lorenz: LorenzMapBase, J: Interval, horizon: int, inner: float, outer: float) -> float:
    """Bisect between an entering point and a non-entering point"""
    for _ in range(lorenz.tol.max_bisect):
        mid = 0.5 * (inner + outer)
        if mid == inner or mid == outer:
            break
        if entry_times(lorenz, np.array([mid]), J, horizon)[0] <= horizon:
            inner = mid
        else:
            outer = mid
    return inner


def _separate(lorenz: LorenzMapBase, J: Interval, horizon: int, lo: float, hi: float,
              samples: int) -> Tuple[float, float]:
    """Edges of the non-entering set between two cycle components"""
    if hi - lo <= lorenz.tol.eps_point:
        return lo, lo
    xs = lo + (hi - lo) * (np.arange(samples) + 0.5) / samples
    times = entry_times(lorenz, xs, J, horizon)
    never = np.flatnonzero(times > horizon)
    if never.size == 0:
        # no sampled point avoids J: cut at the slowest entry
        cut = float(xs[int(np.argmax(times))])
        return cut, cut
    first, last = int(never[0]), int(never[-1])
    left_inner = float(xs[first - 1]) if first > 0 else lo
    right_inner = float(xs[last + 1]) if last + 1 < samples else hi
    return (_edge(lorenz, J, horizon, left_inner, float(xs[first])),
            _edge(lorenz, J, horizon, right_inner, float(xs[last])))


def _outer_edge(lorenz: LorenzMapBase, J: Interval, horizon: int, inner: float, bound: float,
                samples: int) -> float:
    if abs(bound - inner) <= lorenz.tol.eps_point:
        return bound
    xs = inner + (bound - inner) * (np.arange(1, samples + 1) / samples)
    times = entry_times(lorenz, xs, J, horizon)
    never = np.flatnonzero(times > horizon)
    if never.size == 0:
        return bound
    k = int(never[0])
    previous = float(xs[k - 1]) if k > 0 else inner
    return _edge(lorenz, J, horizon, previous, float(xs[k]))


def cycle_sets(lorenz: LorenzMapBase, rec: RenormalizationRecord, sample_budget: int = SAMPLE_BUDGET,
               horizon: int = CYCLE_HORIZON, grid: int = DEFAULT_GRID, seed: int = DEFAULT_SEED,
               gap_samples: int = GAP_SAMPLES) -> CycleSets:
    """
    Renormalization cycle, trapping region and a sampled cover of the J-avoiding set

    Each trapping-region component is the component of the set of points entering J
    within the horizon that contains one cycle component; its ends are located where
    sampled orbits stop entering J.

    Raises:
        RecordInvalid: If the record fails its re-check
    """
    checks = verify_record(lorenz, rec)
    if not checks["passed"]:
        raise RecordInvalid(f"Record ({rec.J.lo}, {rec.J.hi}) fails its re-check", checks)
    H = max(horizon, rec.period_a, rec.period_b)
    J = rec.J
    U = renormalization_cycle(lorenz, rec)

    lows, highs = [0.0] * len(U), [1.0] * len(U)
    lows[0] = _outer_edge(lorenz, J, H, U[0].lo, 0.0, gap_samples)
    highs[-1] = _outer_edge(lorenz, J, H, U[-1].hi, 1.0, gap_samples)
    for i in range(len(U) - 1):
        highs[i], lows[i + 1] = _separate(lorenz, J, H, U[i].hi, U[i + 1].lo, gap_samples)
    K = [Interval(lo, hi) for lo, hi in zip(lows, highs)]

    rng = np.random.default_rng(seed)
    xs = rng.random(sample_budget)
    avoiding = xs[entry_times(lorenz, xs, J, H) > H]
    lam = IntervalCover.from_points(grid, avoiding)
    logger.info(f"Cycle of ({J.lo:.6g}, {J.hi:.6g}): {len(U)} components, "
                f"{avoiding.size}/{sample_budget} samples avoid J")
    return CycleSets(U_J=U, K_J=K, Lambda_J_sample=lam, horizon=H)


def _original_period(parent_rec: RenormalizationRecord, view: RenormalizedMapView,
                     x: float, period: int) -> int:
    """Steps of the original map for one period of a view orbit"""
    total = 0
    y = x
    for _ in range(period):
        total += parent_rec.period_a if y < view.c else parent_rec.period_b
        y = view.evaluate(y)
    return total


def linked(first: Interval, second: Interval, eps: float = 0.0) -> bool:
    """Intervals that cross or share exactly one boundary point"""
    same_lo = abs(first.lo - second.lo) <= eps
    same_hi = abs(first.hi - second.hi) <= eps
    if same_lo and same_hi:
        return False
    if same_lo or same_hi:
        return True
    crossing = (first.lo < second.lo < first.hi < second.hi) or (second.lo < first.lo < second.hi < first.hi)
    return crossing


def check_non_linking(records: Sequence[RenormalizationRecord], eps: float) -> None:
    """
    Raises:
        LinkedIntervalsDetected: With the first linked pair as witness
    """
    for i, first in enumerate(records):
        for second in records[i + 1:]:
            if linked(first.J, second.J, eps):
                logger.error(f"Linked renormalization intervals {first.J.as_tuple()} and {second.J.as_tuple()}")
                raise LinkedIntervalsDetected(
                    "Renormalization intervals are linked",
                    {"first": first.to_dict(), "second": second.to_dict()},
                )


def build_tower(lorenz: LorenzMapBase, max_depth: int, max_period: int, horizon: int = NICE_HORIZON,
                grid: int = DEFAULT_GRID, seed: int = DEFAULT_SEED,
                sample_budget: int = SAMPLE_BUDGET,
                orbits: Optional[List[PeriodicOrbit]] = None) -> RenormTower:
    """
    Nested renormalizations up to max_depth

    Each level renormalizes the current view at its largest proper renormalization
    interval; records are mapped back to the original coordinates with periods counted
    in steps of the original map.

    Raises:
        LinkedIntervalsDetected: If two records are linked or fail to nest strictly
    """
    if max_depth < 1:
        raise ValueError(f"max_depth must be at least 1, got {max_depth}")
    eps = lorenz.tol.eps_point
    current: LorenzMapBase = lorenz
    records: List[RenormalizationRecord] = []
    level_records: List[RenormalizationRecord] = []
    views: List[RenormalizedMapView] = []
    offset, scale = 0.0, 1.0
    found = detect_renormalization(current, max_period, horizon, orbits)
    check_non_linking(found, eps)

    while found and len(records) < max_depth:
        rec = found[0]
        view = renormalize(current, rec)
        if records:
            parent_view = views[-1]
            parent = records[-1]
            period_a = _original_period(parent, parent_view, rec.J.lo, rec.period_a)
            period_b = _original_period(parent, parent_view, rec.J.hi, rec.period_b)
        else:
            period_a, period_b = rec.period_a, rec.period_b
        original = RenormalizationRecord(
            Interval(offset + scale * rec.J.lo, offset + scale * rec.J.hi), period_a, period_b
        )
        if records:
            outer = records[-1].J
            if not (outer.lo < original.J.lo and original.J.hi < outer.hi):
                raise LinkedIntervalsDetected(
                    "Renormalization intervals do not nest strictly",
                    {"outer": records[-1].to_dict(), "inner": original.to_dict()},
                )
        records.append(original)
        level_records.append(rec)
        views.append(view)
        offset, scale = original.J.lo, original.J.length
        logger.info(f"Renormalization level {len(records)}: ({original.J.lo:.9g}, {original.J.hi:.9g}) "
                    f"periods ({period_a}, {period_b})")
        current = view
        found = detect_renormalization(current, max_period, horizon)

    check_non_linking(records, eps)
    depth_limit_hit = len(records) >= max_depth and bool(found)

    sets: List[CycleSets] = []
    solenoid = None
    if len(records) >= 2:
        for rec in records:
            sets.append(cycle_sets(lorenz, rec, sample_budget, grid=grid, seed=seed))
        solenoid = sets[0].k_cover(grid)
        for cs in sets[1:]:
            solenoid = solenoid.intersection(cs.k_cover(grid))
    return RenormTower(records=records, depth_limit_hit=depth_limit_hit, solenoid_cover=solenoid,
                       level_records=level_records, views=views, cycle_sets=sets)
