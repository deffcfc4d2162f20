"""
Lorenz Attractors - Nice intervals and first return maps

Path: /return_maps.py
Purpose: Checks whether an interval around the critical point is nice, decomposes the first
         return map to a nice interval into branches with return times and images, verifies
         the full-branch structure of those branches, and harvests periodic points
         approaching the boundary of a nice interval.
"""

import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from lorenz_config import DEFAULT_HORIZON
from lorenz_errors import NoApproximantFound, NotNiceError
from lorenz_map import Interval, LorenzMapBase, Side
from orbits import PeriodicOrbit, periodic_orbits

logger = logging.getLogger("return_maps")

SCAN_POINTS = 10_000
NICE_HORIZON = 10_000
SIGNATURE_MASK = (1 << 64) - 1

# Return key of points that do not return within the horizon
NO_RETURN = (0, 0)


class NiceVerdict(Enum):
    NICE = "Nice"
    NOT_NICE = "NotNice"
    UNDETERMINED = "Undetermined"


@dataclass
class NiceInterval:
    interval: Interval
    horizon: int
    verdict: NiceVerdict
    witness: Optional[Dict[str, Any]] = None

    @property
    def is_nice(self) -> bool:
        return self.verdict is NiceVerdict.NICE

    def to_dict(self) -> Dict[str, Any]:
        return {
            "interval": [self.interval.lo, self.interval.hi],
            "horizon": self.horizon,
            "verdict": self.verdict.value,
            "witness": self.witness,
        }


@dataclass
class ReturnBranch:
    domain: Interval
    return_time: int
    image: Interval
    touches_critical: bool
    itinerary: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "domain": [self.domain.lo, self.domain.hi],
            "return_time": self.return_time,
            "image": [self.image.lo, self.image.hi],
            "touches_critical": self.touches_critical,
            "itinerary": self.itinerary,
        }


@dataclass
class ReturnMapDecomposition:
    J: Interval
    branches: List[ReturnBranch]
    covered_fraction: float
    horizon: int
    horizon_exhausted: bool = False
    critical: Optional[float] = None
    evaluator: Optional[Callable[[float], float]] = field(default=None, repr=False, compare=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "J": [self.J.lo, self.J.hi],
            "branches": [b.to_dict() for b in self.branches],
            "covered_fraction": self.covered_fraction,
            "horizon": self.horizon,
            "horizon_exhausted": self.horizon_exhausted,
        }

    def to_rows(self) -> List[str]:
        rows = ["# domain_lo domain_hi return_time image_lo image_hi"]
        for b in self.branches:
            rows.append(f"{b.domain.lo:.17g} {b.domain.hi:.17g} {b.return_time} "
                        f"{b.image.lo:.17g} {b.image.hi:.17g}")
        return rows


@dataclass
class BranchStructureReport:
    passed: bool
    entries: List[Dict[str, Any]]

    @property
    def failures(self) -> List[Dict[str, Any]]:
        return [e for e in self.entries if not e["passed"]]

    def to_dict(self) -> Dict[str, Any]:
        return {"passed": self.passed, "entries": self.entries}


def _walk_boundary(lorenz: LorenzMapBase, start: float, J: Interval, horizon: int,
                   side: Side) -> Dict[str, Any]:
    """Follow a boundary orbit until it enters J, closes a cycle or exhausts the horizon"""
    eps = lorenz.tol.eps_point
    seen: Dict[int, List[float]] = {int(math.floor(start / eps)): [start]}
    near_boundary = False
    hit_critical = False
    x = start
    for j in range(1, horizon + 1):
        if lorenz.is_critical(x):
            hit_critical = True
        x = lorenz.evaluate(x, side)
        if J.interior_contains(x, eps):
            return {"outcome": "entered", "index": j, "value": x, "hit_critical": hit_critical}
        if J.interior_contains(x):
            near_boundary = True
        key = int(math.floor(x / eps))
        for k in (key - 1, key, key + 1):
            if any(abs(x - y) <= eps for y in seen.get(k, ())):
                return {"outcome": "cycle", "index": j, "value": x,
                        "hit_critical": hit_critical, "near_boundary": near_boundary}
        seen.setdefault(key, []).append(x)
    return {"outcome": "horizon", "index": horizon, "value": x,
            "hit_critical": hit_critical, "near_boundary": near_boundary}


def is_nice(lorenz: LorenzMapBase, J: Interval, horizon: int = NICE_HORIZON) -> NiceInterval:
    """
    Decide whether the boundary orbits of J avoid J

    Args:
        lorenz: Map
        J: Open interval containing the critical point (or (0,1))
        horizon: Orbit length checked per boundary point

    Returns:
        NiceInterval with verdict Nice, NotNice (with the witnessing iterate) or Undetermined
    """
    if horizon < 1:
        raise ValueError(f"horizon must be at least 1, got {horizon}")
    if not J.interior_contains(lorenz.c):
        raise ValueError(f"J=({J.lo}, {J.hi}) must contain the critical point {lorenz.c}")

    undetermined = None
    for name, endpoint in (("a", J.lo), ("b", J.hi)):
        walk = _walk_boundary(lorenz, endpoint, J, horizon, Side.LEFT)
        if walk["hit_critical"]:
            other = _walk_boundary(lorenz, endpoint, J, horizon, Side.RIGHT)
            if (other["outcome"] == "entered") != (walk["outcome"] == "entered"):
                undetermined = {"endpoint": name, "reason": "side continuations disagree"}
                continue
        if walk["outcome"] == "entered":
            witness = {"endpoint": name, "start": endpoint, "index": walk["index"], "value": walk["value"]}
            logger.info(f"Interval ({J.lo}, {J.hi}) is not nice: f^{walk['index']}({endpoint}) = {walk['value']}")
            return NiceInterval(J, horizon, NiceVerdict.NOT_NICE, witness)
        if walk["outcome"] == "horizon" and walk["near_boundary"]:
            undetermined = {"endpoint": name, "reason": "orbit grazes the boundary without closing a cycle"}

    if undetermined is not None:
        return NiceInterval(J, horizon, NiceVerdict.UNDETERMINED, undetermined)
    return NiceInterval(J, horizon, NiceVerdict.NICE)


class _ReturnScanner:
    """Return-time keys (return time, itinerary signature) on a nice interval"""

    def __init__(self, lorenz: LorenzMapBase, J: Interval, horizon: int):
        self.lorenz = lorenz
        self.a = J.lo
        self.b = J.hi
        self.horizon = horizon
        self.limit = horizon

    def scan(self, xs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        lorenz, a, b, c = self.lorenz, self.a, self.b, self.lorenz.c
        times = np.zeros(xs.size, dtype=np.int64)
        sigs = np.zeros(xs.size, dtype=np.uint64)
        idx = np.arange(xs.size)
        y = xs.copy()
        sig = np.zeros(xs.size, dtype=np.uint64)
        three, one, two = np.uint64(3), np.uint64(1), np.uint64(2)
        for k in range(1, self.horizon + 1):
            right = y >= c
            sig = sig * three + np.where(right, two, one)
            y = np.where(right, lorenz.branch_array(Side.RIGHT, y), lorenz.branch_array(Side.LEFT, y))
            back = (y > a) & (y < b)
            if back.any():
                times[idx[back]] = k
                sigs[idx[back]] = sig[back]
                keep = ~back
                idx, y, sig = idx[keep], y[keep], sig[keep]
                if idx.size == 0:
                    break
        return times, sigs

    def key(self, x: float) -> Tuple[int, int]:
        lorenz, a, b, c = self.lorenz, self.a, self.b, self.lorenz.c
        y, sig = x, 0
        for k in range(1, self.limit + 1):
            right = y >= c
            sig = (sig * 3 + (2 if right else 1)) & SIGNATURE_MASK
            y = lorenz.branch(Side.RIGHT if right else Side.LEFT, y)
            if a < y < b:
                return (k, sig)
        return NO_RETURN

    def word(self, x: float, length: int) -> List[Side]:
        sides = []
        y = x
        for _ in range(length):
            side = Side.RIGHT if y >= self.lorenz.c else Side.LEFT
            sides.append(side)
            y = self.lorenz.branch(side, y)
        return sides

    def landmark(self, xl: float, xr: float) -> Tuple[Optional[int], Optional[float]]:
        """Step and exact value (c, a or b) hit by the orbit of the boundary between xl and xr"""
        lorenz, a, b, c = self.lorenz, self.a, self.b, self.lorenz.c
        yl, yr = xl, xr
        for k in range(self.limit + 1):
            right_l, right_r = yl >= c, yr >= c
            if right_l != right_r:
                return k, c
            side = Side.RIGHT if right_l else Side.LEFT
            yl, yr = lorenz.branch(side, yl), lorenz.branch(side, yr)
            in_l, in_r = a < yl < b, a < yr < b
            if in_l != in_r:
                outside = yr if in_l else yl
                return k + 1, (a if outside < c else b)
            if in_l and in_r:
                break
        return None, None


@dataclass
class _Piece:
    key: Tuple[int, int]
    rep: float


@dataclass
class _Cut:
    x: float
    step: Optional[int]
    value: Optional[float]


def _refine(scanner: _ReturnScanner, xl: float, kl, xr: float, kr, out: list) -> None:
    """Resolve the branch boundaries between two points with different keys"""
    mid = 0.5 * (xl + xr)
    if mid <= xl or mid >= xr:
        step, value = scanner.landmark(xl, xr)
        x = scanner.lorenz.c if (step == 0 and value == scanner.lorenz.c) else xr
        out.append(_Cut(x, step, value))
        return
    km = scanner.key(mid)
    if km == kl:
        _refine(scanner, mid, km, xr, kr, out)
    elif km == kr:
        _refine(scanner, xl, kl, mid, km, out)
    else:
        _refine(scanner, xl, kl, mid, km, out)
        out.append(_Piece(km, mid))
        _refine(scanner, mid, km, xr, kr, out)


def _edge_probes(scanner: _ReturnScanner, edge: float, x0: float, k0) -> List:
    """Pieces and cuts between an end of J and the nearest scan point"""
    probes = []
    x = x0
    while True:
        nxt = edge + 0.5 * (x - edge)
        if nxt == x or nxt == edge:
            break
        probes.append(nxt)
        x = nxt
    items: list = []
    prev_x, prev_k = x0, k0
    for probe in probes:
        kp = scanner.key(probe)
        if kp != prev_k:
            seg: list = []
            lo, hi = (probe, prev_x) if probe < prev_x else (prev_x, probe)
            klo, khi = (kp, prev_k) if probe < prev_x else (prev_k, kp)
            _refine(scanner, lo, klo, hi, khi, seg)
            items.append((lo, hi, seg, klo, khi))
        prev_x, prev_k = probe, kp
    return items


def _push_from(lorenz: LorenzMapBase, value: float, sides: Sequence[Side]) -> float:
    y = value
    for side in sides:
        y = lorenz.branch(side, y)
    return y


def first_return_value(lorenz: LorenzMapBase, J: Interval, x: float, horizon: int) -> float:
    """f^R(x) for the first return time R of x to J"""
    y = x
    for _ in range(horizon):
        y = lorenz.evaluate(y)
        if J.interior_contains(y):
            return y
    raise ValueError(f"{x} does not return to ({J.lo}, {J.hi}) within {horizon} steps")


def first_return(lorenz: LorenzMapBase, J: Interval, horizon: int = DEFAULT_HORIZON,
                 scan_points: int = SCAN_POINTS, nice: Optional[NiceInterval] = None) -> ReturnMapDecomposition:
    """
    Decompose the first return map to a nice interval into branches

    Args:
        lorenz: Map
        J: Nice interval
        horizon: Largest return time followed
        scan_points: Uniform seed scan of J
        nice: Precomputed niceness verdict

    Returns:
        ReturnMapDecomposition with branches sorted by domain

    Raises:
        NotNiceError: If J is not nice
    """
    nice = nice or is_nice(lorenz, J, min(horizon, NICE_HORIZON))
    if nice.verdict is NiceVerdict.NOT_NICE:
        raise NotNiceError(f"Interval ({J.lo}, {J.hi}) is not nice", nice.witness)

    a, b = J.lo, J.hi
    scanner = _ReturnScanner(lorenz, J, horizon)
    xs = a + (b - a) * (np.arange(scan_points) + 0.5) / scan_points
    times, sigs = scanner.scan(xs)
    scanner.limit = min(horizon, 4 * int(times.max(initial=0)) + 64)
    keys = [(int(t), int(s)) for t, s in zip(times, sigs)]

    # ordered sequence of pieces (branch representatives) and cuts (branch boundaries)
    sequence: list = [_Cut(a, 0, a)]
    head = _edge_probes(scanner, a, float(xs[0]), keys[0])
    for lo, _, seg, klo, _ in reversed(head):
        sequence.append(_Piece(klo, lo))
        sequence.extend(seg)
    sequence.append(_Piece(keys[0], float(xs[0])))
    for i in range(1, scan_points):
        if keys[i] != keys[i - 1]:
            _refine(scanner, float(xs[i - 1]), keys[i - 1], float(xs[i]), keys[i], sequence)
            sequence.append(_Piece(keys[i], float(xs[i])))
    tail = _edge_probes(scanner, b, float(xs[-1]), keys[-1])
    for _, hi, seg, _, khi in tail:
        sequence.extend(seg)
        sequence.append(_Piece(khi, hi))
    sequence.append(_Cut(b, 0, b))

    branches: List[ReturnBranch] = []
    gap_measure = 0.0
    exhausted = False
    pending_cut = sequence[0]
    current: Optional[_Piece] = None
    for item in sequence[1:]:
        if isinstance(item, _Piece):
            if current is None:
                current = item
            continue
        # item is a cut closing the current piece
        if current is not None and item.x > pending_cut.x:
            if current.key == NO_RETURN:
                exhausted = True
                gap_measure += item.x - pending_cut.x
            else:
                branches.append(_make_branch(lorenz, scanner, current, pending_cut, item))
        pending_cut = item
        current = None

    covered = sum(br.domain.length for br in branches) / (b - a)
    if exhausted:
        logger.warning(f"Return map on ({a}, {b}): {gap_measure / (b - a):.3g} of J does not return "
                       f"within {scanner.limit} steps")
    logger.info(f"First return to ({a}, {b}): {len(branches)} branches, covered {covered:.6f}")
    return ReturnMapDecomposition(
        J=J,
        branches=branches,
        covered_fraction=covered,
        horizon=horizon,
        horizon_exhausted=exhausted,
        critical=lorenz.c,
        evaluator=lambda x: first_return_value(lorenz, J, x, horizon),
    )


def _make_branch(lorenz: LorenzMapBase, scanner: _ReturnScanner, piece: _Piece,
                 left: _Cut, right: _Cut) -> ReturnBranch:
    R = piece.key[0]
    sides = scanner.word(piece.rep, R)
    ends = []
    for cut, x in ((left, left.x), (right, right.x)):
        if cut.step is not None and cut.step <= R:
            ends.append(_push_from(lorenz, cut.value, sides[cut.step:]))
        else:
            ends.append(_push_from(lorenz, x, sides))
    lo, hi = min(ends), max(ends)
    image = Interval(lo, hi) if hi > lo else Interval.at(lo)
    c = lorenz.c
    return ReturnBranch(
        domain=Interval(left.x, right.x),
        return_time=R,
        image=image,
        touches_critical=left.x == c or right.x == c,
        itinerary="".join(s.letter for s in sides),
    )


def _period_of(lorenz: LorenzMapBase, x: float, max_period: int) -> Optional[int]:
    eps = lorenz.tol.eps_value
    y = x
    for k in range(1, max_period + 1):
        y = lorenz.evaluate(y)
        if abs(y - x) <= eps:
            return k
    return None


def check_full_branches(lorenz: LorenzMapBase, decomp: ReturnMapDecomposition) -> BranchStructureReport:
    """
    Check the branch structure laws of a return map on a nice interval

    Non-critical branches must map onto J; branches adjacent to an end of J need that
    end to be periodic with period equal to the branch return time.
    """
    eps = lorenz.tol.eps_value
    a, b = decomp.J.lo, decomp.J.hi
    entries: List[Dict[str, Any]] = []
    for i, br in enumerate(decomp.branches):
        if not br.touches_critical:
            full = abs(br.image.lo - a) <= eps and abs(br.image.hi - b) <= eps
            entries.append({
                "branch": i,
                "check": "full_image",
                "passed": full,
                "domain": [br.domain.lo, br.domain.hi],
                "image": [br.image.lo, br.image.hi],
            })
        for name, end in (("a", a), ("b", b)):
            if br.domain.lo != end and br.domain.hi != end:
                continue
            period = _period_of(lorenz, end, br.return_time)
            entries.append({
                "branch": i,
                "check": f"periodic_{name}",
                "passed": period == br.return_time,
                "endpoint": end,
                "period": period,
                "return_time": br.return_time,
            })
    passed = all(e["passed"] for e in entries)
    if not passed:
        logger.warning(f"Branch structure check failed on {sum(not e['passed'] for e in entries)} entries")
    return BranchStructureReport(passed=passed, entries=entries)


def _branch_fixed_point(lorenz: LorenzMapBase, br: ReturnBranch) -> Optional[float]:
    sides = [Side.parse(ch) for ch in br.itinerary]
    lo, hi = br.domain.lo, br.domain.hi
    h_lo = _push_from(lorenz, lo, sides) - lo
    h_hi = _push_from(lorenz, hi, sides) - hi
    if h_lo == 0.0:
        return lo
    if h_hi == 0.0:
        return hi
    if h_lo * h_hi > 0:
        return None
    for _ in range(lorenz.tol.max_bisect):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        h_mid = _push_from(lorenz, mid, sides) - mid
        if (h_mid < 0) == (h_lo < 0):
            lo, h_lo = mid, h_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _avoids(lorenz: LorenzMapBase, x: float, period: int, lo: float, hi: float) -> bool:
    y = x
    for _ in range(period - 1):
        y = lorenz.evaluate(y)
        if lo < y < hi:
            return False
    return True


def periodic_approximants(lorenz: LorenzMapBase, J: Interval, k: int, max_period: int,
                          decomp: Optional[ReturnMapDecomposition] = None,
                          horizon: int = DEFAULT_HORIZON) -> Tuple[List[float], List[float]]:
    """
    Periodic points approaching the ends of a nice interval from inside

    Returns the constant sequence when an end is itself periodic; otherwise the fixed
    points of the return branches nearest that end.

    Raises:
        NoApproximantFound: If no periodic point is located within max_period
    """
    a, b = J.lo, J.hi
    sequences = []
    for end, nearest_first in ((a, False), (b, True)):
        if _period_of(lorenz, end, max_period) is not None:
            sequences.append([end] * k)
            continue
        if decomp is None:
            decomp = first_return(lorenz, J, horizon)
        ordered = sorted(decomp.branches, key=lambda br: br.domain.lo, reverse=nearest_first)
        found = []
        for br in ordered:
            if br.return_time > max_period or br.touches_critical:
                continue
            x = _branch_fixed_point(lorenz, br)
            if x is None:
                continue
            lo, hi = (x, b) if end == a else (a, x)
            if _avoids(lorenz, x, br.return_time, lo, hi):
                found.append(x)
            if len(found) == k:
                break
        if not found:
            raise NoApproximantFound(
                f"No periodic approximant of {end} up to period {max_period}",
                {"endpoint": end, "max_period": max_period},
            )
        sequences.append(found)
    return sequences[0], sequences[1]


def periodic_points(orbits: Sequence[PeriodicOrbit]) -> np.ndarray:
    if not orbits:
        return np.empty(0)
    return np.sort(np.concatenate([np.asarray(o.points) for o in orbits]))


def periodic_accumulation(lorenz: LorenzMapBase, max_period: int, radii: Sequence[float] = (0.1, 0.01, 0.001),
                          orbits: Optional[List[PeriodicOrbit]] = None) -> List[Dict[str, Any]]:
    """Whether located periodic points meet (c-r, c) and (c, c+r) for each radius r"""
    pts = periodic_points(orbits if orbits is not None else periodic_orbits(lorenz, max_period))
    c = lorenz.c
    rows = []
    for r in radii:
        left = bool(np.any((pts > c - r) & (pts < c)))
        right = bool(np.any((pts > c) & (pts < c + r)))
        rows.append({"radius": r, "left": left, "right": right})
    return rows


def periodic_gap_interval(lorenz: LorenzMapBase, max_period: int,
                          orbits: Optional[List[PeriodicOrbit]] = None) -> Interval:
    """Component of (0,1) minus the located periodic points that contains c"""
    pts = periodic_points(orbits if orbits is not None else periodic_orbits(lorenz, max_period))
    c, eps = lorenz.c, lorenz.tol.eps_point
    below = pts[pts < c - eps]
    above = pts[pts > c + eps]
    lo = float(below.max()) if below.size else 0.0
    hi = float(above.min()) if above.size else 1.0
    return Interval(lo, hi)
