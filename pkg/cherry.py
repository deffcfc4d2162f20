"""
Lorenz Attractors - Gap maps, rotation numbers and Cherry verdicts

Path: /cherry.py
Purpose: Reads a two-branch return decomposition as a map of the circle obtained by
         identifying the ends of its interval, estimates its rotation number with an error
         bound and rational locking, scans a parameter for a target rotation number, and
         assembles the evidence that a map (or its deepest renormalization) is a Cherry map.
"""

import math
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from lorenz_config import DEFAULT_MAX_PERIOD, get_tolerances
from lorenz_errors import BranchOverlap, OrbitHitGap, WrongBranchCount
from lorenz_map import Interval, LorenzMapBase, StandardLorenzMap, PARAMETER_KEYS
from orbits import PeriodicOrbit, periodic_orbits
from return_maps import ReturnBranch, ReturnMapDecomposition, is_nice, periodic_gap_interval

logger = logging.getLogger("cherry")

VERDICT_N = 1_000_000
SEARCH_N = 100_000
MAX_RETRIES = 3


@dataclass
class GapMap:
    source: ReturnMapDecomposition
    J: Interval
    c: float
    wrapped: bool
    gap: Interval
    evaluator: Callable[[float], float] = field(repr=False)
    eps_point: float = field(default_factory=lambda: get_tolerances().eps_point)
    eps_critical: float = field(default_factory=lambda: get_tolerances().eps_critical)
    continuous_at_c: bool = True

    @property
    def left(self) -> ReturnBranch:
        return self.source.branches[0]

    @property
    def right(self) -> ReturnBranch:
        return self.source.branches[1]

    def circle(self, x: float) -> float:
        return (x - self.J.lo) / self.J.length

    def lift(self, t: float) -> float:
        """Degree-one lift of the circle map at a real coordinate t"""
        k = math.floor(t)
        frac = t - k
        x = self.J.lo + frac * self.J.length
        if abs(x - self.c) <= self.eps_critical:
            return self.circle(self.left.image.hi) + k
        y = self.circle(self.evaluator(x))
        if self.wrapped and x > self.c:
            y += 1.0
        return y + k

    def to_dict(self) -> Dict[str, Any]:
        return {
            "J": [self.J.lo, self.J.hi],
            "c": self.c,
            "wrapped": self.wrapped,
            "gap": [self.gap.lo, self.gap.hi],
            "gap_length": self.gap.length,
        }


@dataclass
class RotationEstimate:
    value: float
    n: int
    error_bound: float
    rational_lock: Optional[Tuple[int, int]] = None
    seed: float = 0.0
    retries: int = 0

    @property
    def locked(self) -> bool:
        return self.rational_lock is not None

    def to_dict(self) -> Dict[str, Any]:
        lock = f"{self.rational_lock[0]}/{self.rational_lock[1]}" if self.rational_lock else None
        return {
            "value": self.value,
            "n": self.n,
            "error_bound": self.error_bound,
            "rational_lock": lock,
            "seed": self.seed,
            "retries": self.retries,
        }


@dataclass
class RotationTrace:
    estimates: List[RotationEstimate]

    @property
    def cauchy_ok(self) -> bool:
        """Consecutive estimates at n and 2n differ by at most 1/n + 1/(2n)"""
        ok = True
        for first, second in zip(self.estimates, self.estimates[1:]):
            if second.n == 2 * first.n:
                ok &= abs(first.value - second.value) <= 1.0 / first.n + 1.0 / second.n
        return ok

    def to_rows(self) -> List[str]:
        rows = ["# n estimate bound"]
        rows.extend(f"{e.n} {e.value:.17g} {e.error_bound:.3g}" for e in self.estimates)
        return rows


@dataclass
class CherryVerdict:
    verdict: str
    failed_clause: Optional[str]
    clauses: List[Dict[str, Any]]
    target: Dict[str, Any]
    rotation: Optional[RotationEstimate] = None
    gap_map: Optional[GapMap] = field(default=None, repr=False)

    @property
    def is_cherry(self) -> bool:
        return self.verdict == "CherryEvidence"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict,
            "failed_clause": self.failed_clause,
            "clauses": self.clauses,
            "target": self.target,
            "rotation": self.rotation.to_dict() if self.rotation else None,
            "gap_map": self.gap_map.to_dict() if self.gap_map else None,
        }


def core_decomposition(lorenz: LorenzMapBase) -> ReturnMapDecomposition:
    """
    Two-branch decomposition of the invariant core [v0, v1]

    Requires v0 < c < v1; the left branch maps (v0, c) onto (f(v0), v1) and the right
    branch maps (c, v1) onto (v0, f(v1)), each with return time 1.

    Raises:
        WrongBranchCount: If a critical value lies on the wrong side of c
    """
    c, v0, v1 = lorenz.c, lorenz.v0, lorenz.v1
    if not v0 < c < v1:
        raise WrongBranchCount(
            "The core [v0, v1] needs v0 < c < v1",
            {"c": c, "v0": v0, "v1": v1},
        )
    f_v0, f_v1 = lorenz.evaluate(v0), lorenz.evaluate(v1)
    branches = [
        ReturnBranch(Interval(v0, c), 1, Interval(f_v0, v1) if f_v0 < v1 else Interval.at(v1), True, "L"),
        ReturnBranch(Interval(c, v1), 1, Interval(v0, f_v1) if v0 < f_v1 else Interval.at(v0), True, "R"),
    ]
    return ReturnMapDecomposition(
        J=Interval(v0, v1),
        branches=branches,
        covered_fraction=1.0,
        horizon=1,
        critical=c,
        evaluator=lorenz.evaluate,
    )


def rigid_rotation(rho: float) -> ReturnMapDecomposition:
    """Rotation of the unit circle by rho written as a two-branch decomposition"""
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0,1), got {rho}")
    c = 1.0 - rho

    def rotate(x: float) -> float:
        # c itself takes the left limit, matching the one-sided evaluation of Lorenz maps
        return x + rho if x <= c else x + rho - 1.0

    branches = [
        ReturnBranch(Interval(0.0, c), 1, Interval(rho, 1.0), True, "L"),
        ReturnBranch(Interval(c, 1.0), 1, Interval(0.0, rho), True, "R"),
    ]
    return ReturnMapDecomposition(J=Interval(0.0, 1.0), branches=branches, covered_fraction=1.0,
                                  horizon=1, critical=c, evaluator=rotate)


def as_gap_map(decomp: ReturnMapDecomposition, eps_value: Optional[float] = None,
               eps_point: Optional[float] = None) -> GapMap:
    """
    Identify the ends of J and check that the two branches form an injective circle map

    Tolerances default to the configured ones.

    Raises:
        WrongBranchCount: Unless there are exactly two branches abutting at c and covering J
        BranchOverlap: If the branch images overlap
    """
    tol = get_tolerances()
    eps_value = tol.eps_value if eps_value is None else eps_value
    eps_point = tol.eps_point if eps_point is None else eps_point
    eps_critical = min(tol.eps_critical, eps_point)
    if len(decomp.branches) != 2:
        raise WrongBranchCount(f"A gap map needs two branches, got {len(decomp.branches)}",
                               {"branches": len(decomp.branches)})
    left, right = sorted(decomp.branches, key=lambda br: br.domain.lo)
    J = decomp.J
    c = decomp.critical if decomp.critical is not None else left.domain.hi
    abutting = abs(left.domain.hi - right.domain.lo) <= eps_point and abs(left.domain.hi - c) <= eps_point
    covering = abs(left.domain.lo - J.lo) <= eps_point and abs(right.domain.hi - J.hi) <= eps_point
    if not (abutting and covering):
        raise WrongBranchCount("Branch domains must abut at c and cover J", {
            "left": [left.domain.lo, left.domain.hi],
            "right": [right.domain.lo, right.domain.hi],
            "J": [J.lo, J.hi],
        })
    if decomp.evaluator is None:
        raise WrongBranchCount("The decomposition carries no evaluator", {})

    if right.image.hi <= left.image.lo + eps_value:
        wrapped = True
        lo, hi = right.image.hi, left.image.lo
    elif left.image.hi <= right.image.lo + eps_value:
        wrapped = False
        lo, hi = left.image.hi, right.image.lo
    else:
        raise BranchOverlap("Branch images overlap", {
            "left_image": [left.image.lo, left.image.hi],
            "right_image": [right.image.lo, right.image.hi],
        })
    gap = Interval(lo, hi) if hi > lo else Interval.at(max(lo, hi))

    # lift limits at c: left branch from below, right branch (plus a turn when wrapped) from above
    below = (left.image.hi - J.lo) / J.length
    above = (right.image.lo - J.lo) / J.length + (1.0 if wrapped else 0.0)
    continuous = abs(below - above) * J.length <= eps_value

    ordered = ReturnMapDecomposition(J=J, branches=[left, right], covered_fraction=decomp.covered_fraction,
                                     horizon=decomp.horizon, horizon_exhausted=decomp.horizon_exhausted,
                                     critical=c, evaluator=decomp.evaluator)
    return GapMap(source=ordered, J=J, c=c, wrapped=wrapped, gap=gap, evaluator=decomp.evaluator,
                  eps_point=eps_point, eps_critical=eps_critical, continuous_at_c=continuous)


def _displacement(g: GapMap, x: float, steps: int) -> Tuple[float, float]:
    """
    Lifted displacement of x over steps iterations and the final point

    Landing on c only matters when the lift jumps there; otherwise c takes the left limit
    (the right limit plus a turn is the same point of the lift).
    """
    start = g.circle(x)
    turns = 0
    for _ in range(steps):
        if abs(x - g.c) <= g.eps_critical:
            if not g.continuous_at_c:
                raise OrbitHitGap(f"Orbit reached the puncture {g.c}", {"x": x})
            x = g.left.image.hi
            continue
        if g.wrapped and x > g.c:
            turns += 1
        x = g.evaluator(x)
    return g.circle(x) - start + turns, x


def _lock(g: GapMap, value: float, n: int, x: float) -> Optional[Tuple[int, int]]:
    q_max = max(1, math.isqrt(n))
    frac = Fraction(value).limit_denominator(q_max)
    p, q = frac.numerator, frac.denominator
    if abs(value - p / q) > 1.0 / n:
        return None
    try:
        moved, _ = _displacement(g, x, q)
    except OrbitHitGap:
        return None
    if abs(moved - p) * g.J.length <= 10 * g.eps_point:
        return p, q
    return None


def rotation_number(g: GapMap, n: int, seed: Optional[float] = None) -> RotationEstimate:
    """
    Average lifted displacement over n iterations

    The seed defaults to the midpoint of the right branch domain; an orbit that reaches
    the puncture is restarted from a perturbed seed.

    Raises:
        OrbitHitGap: After repeated restarts
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    x0 = g.right.domain.midpoint if seed is None else seed
    for attempt in range(MAX_RETRIES):
        x = x0 + 10 * g.eps_point * attempt
        try:
            moved, last = _displacement(g, x, n)
        except OrbitHitGap as exc:
            logger.warning(f"Rotation orbit from {x} hit the puncture (attempt {attempt + 1}/{MAX_RETRIES})")
            failure = exc
            continue
        value = moved / n
        lock = _lock(g, value, n, last)
        if lock is not None:
            value = lock[0] / lock[1]
        value = value % 1.0
        logger.debug(f"Rotation estimate {value:.12f} at n={n}, lock={lock}")
        return RotationEstimate(value=value, n=n, error_bound=1.0 / n, rational_lock=lock,
                                seed=x, retries=attempt)
    raise OrbitHitGap(f"Rotation orbit hit the puncture {MAX_RETRIES} times",
                      {**failure.details, "seed": x0, "retries": MAX_RETRIES})


def rotation_trace(g: GapMap, ns: Sequence[int]) -> RotationTrace:
    return RotationTrace([rotation_number(g, n) for n in ns])


@dataclass
class RotationSearch:
    parameter: str
    value: float
    estimate: RotationEstimate
    bracket: Tuple[float, float]
    steps: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "parameter": self.parameter,
            "value": self.value,
            "estimate": self.estimate.to_dict(),
            "bracket": list(self.bracket),
            "steps": self.steps,
        }


def _core_rotation(params: Mapping[str, float], n: int) -> RotationEstimate:
    lorenz = StandardLorenzMap(**{k: float(params[k]) for k in PARAMETER_KEYS})
    g = as_gap_map(core_decomposition(lorenz), lorenz.tol.eps_value, lorenz.tol.eps_point)
    return rotation_number(g, n)


def _target_side(estimate: RotationEstimate, target: float) -> int:
    """
    -1 when the rotation number is below the target, +1 above, 0 when indistinguishable

    A verified lock p/q is exact, so it is compared as a fraction; an unlocked estimate
    is only decisive outside twice its error bound.
    """
    if estimate.locked:
        p, q = estimate.rational_lock
        if math.isclose(p % q / q, target, rel_tol=0.0, abs_tol=1e-12):
            return 0
        diff = Fraction(p % q, q) - Fraction(target)
        return (diff > 0) - (diff < 0)
    if abs(estimate.value - target) <= 2.0 * estimate.error_bound:
        return 0
    return 1 if estimate.value > target else -1


def _rotation_at(base: Mapping[str, float], parameter: str, value: float, nudge: float,
                 n: int) -> Tuple[float, RotationEstimate]:
    """Core rotation at value, moving by +-nudge when the orbit keeps hitting the puncture"""
    failure: Optional[OrbitHitGap] = None
    for shift in (0.0, nudge, -nudge):
        try:
            return value + shift, _core_rotation({**base, parameter: value + shift}, n)
        except OrbitHitGap as exc:
            logger.debug(f"Rotation at {parameter}={value + shift!r} hit the puncture")
            failure = exc
    raise ValueError(f"Rotation orbit hits the puncture near {parameter}={value!r}: {failure}")


def locate_rotation_parameter(base: Mapping[str, float], parameter: str, lo: float, hi: float,
                              target: float, n: int = SEARCH_N, steps: int = 60,
                              confirm_n: Optional[int] = None) -> RotationSearch:
    """
    Bisect one map parameter for a core rotation number equal to a target

    Rational plateaus are handled through their locks: a midpoint locked at p/q is on the
    side given by p/q, so bisection keeps closing in on the target. A midpoint is accepted
    once its estimate is indistinguishable from the target, and, when the target is
    irrational, unlocked at both n and confirm_n.

    Args:
        base: Map parameters; parameter is overridden
        parameter: One of PARAMETER_KEYS
        lo, hi: Parameter bracket
        target: Rotation number in (0,1)
        n: Iterations per estimate during the search
        confirm_n: Iterations for the acceptance check (defaults to n)
        steps: Maximum bisection steps

    Raises:
        ValueError: If the target is not bracketed, or no acceptable parameter is found
    """
    if parameter not in PARAMETER_KEYS:
        raise ValueError(f"Unknown parameter: {parameter}")
    confirm_n = max(n, confirm_n or n)
    nudge = 1e-3 * (hi - lo)
    _, at_lo = _rotation_at(base, parameter, lo, nudge, n)
    _, at_hi = _rotation_at(base, parameter, hi, nudge, n)
    side_lo, side_hi = _target_side(at_lo, target), _target_side(at_hi, target)
    if side_lo == side_hi:
        raise ValueError(f"Target {target} not bracketed: rotation {at_lo.value} at {lo}, {at_hi.value} at {hi}")
    increasing = side_lo < side_hi

    for step in range(1, steps + 1):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        nudge = 1e-3 * (hi - lo)
        mid, estimate = _rotation_at(base, parameter, mid, nudge, n)
        side = _target_side(estimate, target)
        if side == 0 and confirm_n > n:
            _, estimate = _rotation_at(base, parameter, mid, nudge, confirm_n)
            side = _target_side(estimate, target)
        if side == 0:
            logger.info(f"Rotation {estimate.value:.9f} (target {target:.9f}) at {parameter}={mid!r} "
                        f"after {step} steps")
            return RotationSearch(parameter, mid, estimate, (lo, hi), step)
        if (side < 0) == increasing:
            lo = mid
        else:
            hi = mid
    raise ValueError(f"No parameter with rotation {target} found in [{lo!r}, {hi!r}] "
                     f"with n={confirm_n}; every midpoint was decided by its estimate")


def _clause(name: str, passed: bool, **detail) -> Dict[str, Any]:
    return {"name": name, "passed": passed, **detail}


def cherry_verdict(lorenz: LorenzMapBase, tower, max_period: int = DEFAULT_MAX_PERIOD,
                   n: int = VERDICT_N, orbits: Optional[List[PeriodicOrbit]] = None) -> CherryVerdict:
    """
    Evidence that the deepest renormalization (or the map itself) is a Cherry map

    Clauses, in order: no periodic attractor or super-attractor; with an empty tower, the
    periodic gap interval is nice; the core decomposition is a gap map; its rotation
    number shows no rational lock at n; no located periodic orbit meets the core.
    """
    view = tower.deepest_view if tower is not None else None
    target = view if view is not None else lorenz
    clauses: List[Dict[str, Any]] = []

    def verdict(failed: Optional[str], rotation=None, g=None) -> CherryVerdict:
        result = CherryVerdict(
            verdict="NotCherry" if failed else "CherryEvidence",
            failed_clause=failed,
            clauses=clauses,
            target={"depth": getattr(target, "depth", 0), **target.describe()},
            rotation=rotation,
            gap_map=g,
        )
        logger.info(f"Cherry verdict: {result.verdict}" + (f" ({failed})" if failed else ""))
        return result

    found = orbits if (orbits is not None and view is None) else periodic_orbits(target, max_period)
    attractors = [o for o in found if o.is_attractor]
    clauses.append(_clause("no_periodic_attractor", not attractors,
                           attractors=[o.to_dict() for o in attractors[:2]]))
    if attractors:
        return verdict("no_periodic_attractor")

    if view is None:
        gap_interval = periodic_gap_interval(target, max_period, found)
        nice = is_nice(target, gap_interval)
        clauses.append(_clause("nice_gap_interval", nice.is_nice, interval=[gap_interval.lo, gap_interval.hi],
                               verdict=nice.verdict.value))
        if not nice.is_nice:
            return verdict("nice_gap_interval")

    tol = target.tol
    try:
        g = as_gap_map(core_decomposition(target), tol.eps_value, tol.eps_point)
    except (BranchOverlap, WrongBranchCount) as exc:
        clauses.append(_clause("gap_map", False, error=type(exc).__name__, details=exc.details))
        return verdict("gap_map")
    clauses.append(_clause("gap_map", True, wrapped=g.wrapped, gap_length=g.gap.length))

    try:
        rotation = rotation_number(g, n)
    except OrbitHitGap as exc:
        clauses.append(_clause("rotation_unlocked", False, error="OrbitHitGap", details=exc.details))
        return verdict("rotation_unlocked", g=g)
    clauses.append(_clause("rotation_unlocked", not rotation.locked, **rotation.to_dict()))
    if rotation.locked:
        return verdict("rotation_unlocked", rotation, g)

    inside = [o for o in found if o.meets(g.J)]
    clauses.append(_clause("no_periodic_in_core", not inside, count=len(inside)))
    if inside:
        return verdict("no_periodic_in_core", rotation, g)
    return verdict(None, rotation, g)
