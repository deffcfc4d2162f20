"""
Lorenz Attractors - Attractor classification

Path: /classifier.py
Purpose: Runs the attractor decision tree on a map: periodic attractors first, then nested
         renormalization (solenoid evidence), Cherry evidence, and finally the chaotic cycle
         of intervals versus the Cantor attractor with wandering gaps. Every verdict carries
         the measurements it was decided on.
"""

import math
import logging
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from lorenz_config import (
    DEFAULT_GRID, DEFAULT_MAX_PERIOD, DEFAULT_SEED, run_defaults,
)
from lorenz_errors import InvariantViolation, LorenzError, NoReturnWithinHorizon
from lorenz_map import Interval, LorenzMapBase, Side, SignedPoint
from orbits import (
    IntervalCover, PeriodicOrbit, Stability, advance, alpha_estimate, critical_orbits,
    omega_estimate, periodic_orbits, visit_density,
)
from return_maps import ReturnMapDecomposition, first_return, periodic_accumulation
from renormalization import build_tower, merge_intervals, push_pieces
from cherry import cherry_verdict

logger = logging.getLogger("classifier")

SUMMARY_COLUMNS = (
    "c", "alpha", "beta", "v1", "v0", "kind", "depth", "rotation", "entropy", "cells", "evidence_passed",
)

PERIODIC = "PeriodicAttractors"
SOLENOID = "SolenoidEvidence"
CHERRY = "CherryEvidence"
CHAOTIC = "ChaoticCycleOfIntervals"
CANTOR = "CantorWanderingEvidence"
INCONCLUSIVE = "Inconclusive"


@dataclass
class ClassifierParams:
    max_period: int = DEFAULT_MAX_PERIOD
    max_depth: int = 3
    solenoid_threshold: int = 3
    grid: int = DEFAULT_GRID
    horizon: int = 10_000
    seed: int = DEFAULT_SEED
    samples: int = 64
    transient: int = 1000
    length: int = 4096
    max_intervals: int = 64
    trials: int = 20
    delta: float = 0.01
    rotation_n: int = 1_000_000
    basin_grid: int = 1000
    basin_iterations: int = 10_000
    basin_radius: float = 1e-6
    invariance_samples: int = 10_000
    witnesses: int = 5

    def doubled(self, seed: Optional[int] = None) -> "ClassifierParams":
        """Same analysis with doubled grid and horizon and a fresh seed"""
        return ClassifierParams(**{**asdict(self), "grid": 2 * self.grid, "horizon": 2 * self.horizon,
                                   "seed": self.seed + 1 if seed is None else seed})

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class TrappingRegion:
    base: Interval
    ell: int
    r: int
    components: List[Interval]
    escapes: int = 0
    samples: int = 0
    witnesses: List[Dict[str, float]] = field(default_factory=list)

    @property
    def invariant(self) -> bool:
        return self.escapes == 0

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return any(iv.contains(x, slack) for iv in self.components)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "base": [self.base.lo, self.base.hi],
            "ell": self.ell,
            "r": self.r,
            "components": [[iv.lo, iv.hi] for iv in self.components],
            "escapes": self.escapes,
            "samples": self.samples,
            "witnesses": self.witnesses[:5],
        }


@dataclass
class AttractorCovers:
    generic: IntervalCover
    critical: IntervalCover

    @property
    def cover(self) -> IntervalCover:
        return self.generic.union(self.critical)

    def to_dict(self) -> Dict[str, Any]:
        return {"generic": self.generic.to_dict(), "critical": self.critical.to_dict()}


@dataclass
class TransitivityEvidence:
    passed: bool
    trials: List[Dict[str, Any]]
    vacuous: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {"passed": self.passed, "vacuous": self.vacuous, "trials": self.trials}


@dataclass
class BasinCoverage:
    fractions: List[float]
    total: float
    grid: int
    iterations: int
    radius: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class AttractorReport:
    kind: str
    detail: Dict[str, Any]
    lambda_cover: IntervalCover
    evidence: List[Dict[str, Any]]
    periodic_density_check: Dict[str, Any]
    entropy_lower_bound: float
    lyapunov_witnesses: List[Dict[str, Any]]
    parameters: Dict[str, Any]
    params: ClassifierParams
    reason: Optional[str] = None

    @property
    def evidence_passed(self) -> int:
        return sum(1 for e in self.evidence if e.get("passed"))

    def evidence_named(self, name: str) -> Optional[Dict[str, Any]]:
        return next((e for e in self.evidence if e["name"] == name), None)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "detail": self.detail,
            "reason": self.reason,
            "parameters": self.parameters,
            "params": self.params.to_dict(),
            "lambda_cover": self.lambda_cover.to_dict(),
            "evidence": self.evidence,
            "periodic_density_check": self.periodic_density_check,
            "entropy_lower_bound": self.entropy_lower_bound,
            "lyapunov_witnesses": self.lyapunov_witnesses,
        }

    def summary_row(self) -> Dict[str, Any]:
        row = {key: self.parameters.get(key) for key in ("c", "alpha", "beta", "v1", "v0")}
        row.update({
            "kind": self.kind,
            "depth": self.detail.get("depth", 0),
            "rotation": self.detail.get("rotation"),
            "entropy": self.entropy_lower_bound,
            "cells": self.lambda_cover.cell_count,
            "evidence_passed": self.evidence_passed,
        })
        return row


def _entry(name: str, passed: bool, **values) -> Dict[str, Any]:
    return {"name": name, "passed": bool(passed), **values}


def _return_time(lorenz: LorenzMapBase, start: Interval, base: Interval, horizon: int,
                 max_pieces: int = 64) -> int:
    """Least k with every piece of the k-th image of start inside base"""
    eps = lorenz.tol.eps_value
    pieces = [start]
    for k in range(1, horizon + 1):
        pieces = merge_intervals(push_pieces(lorenz, pieces))
        if all(base.contains_interval(p, eps) for p in pieces):
            return k
        if len(pieces) > max_pieces:
            break
    raise NoReturnWithinHorizon(
        f"Images of ({start.lo}, {start.hi}) do not return to ({base.lo}, {base.hi})",
        {"start": [start.lo, start.hi], "base": [base.lo, base.hi], "horizon": horizon},
    )


def check_invariance(lorenz: LorenzMapBase, region: TrappingRegion, samples: int,
                     seed: int = DEFAULT_SEED) -> TrappingRegion:
    """Sample the components by length and count images that leave them"""
    rng = np.random.default_rng(seed)
    lengths = np.array([iv.length for iv in region.components])
    which = rng.choice(len(region.components), size=samples, p=lengths / lengths.sum())
    lo = np.array([iv.lo for iv in region.components])[which]
    xs = lo + lengths[which] * rng.random(samples)
    xs = xs[np.abs(xs - lorenz.c) > lorenz.tol.eps_critical]
    ys = lorenz.evaluate_array(xs)
    eps = lorenz.tol.eps_value
    inside = np.zeros(ys.size, dtype=bool)
    for iv in region.components:
        inside |= (ys >= iv.lo - eps) & (ys <= iv.hi + eps)
    escaped = np.flatnonzero(~inside)
    region.escapes = int(escaped.size)
    region.samples = int(xs.size)
    region.witnesses = [{"x": float(xs[i]), "image": float(ys[i])} for i in escaped[:5]]
    if escaped.size:
        logger.warning(f"{escaped.size}/{xs.size} sampled points leave the trapping region")
    return region


def assemble_trapping_region(lorenz: LorenzMapBase, base: Interval, ell: int, r: int,
                             samples: int = 10_000, seed: int = DEFAULT_SEED) -> TrappingRegion:
    """Base interval plus the images of its halves before their return, checked for invariance"""
    c = lorenz.c
    images: List[Interval] = []
    for start, steps in ((Interval(base.lo, c), ell), (Interval(c, base.hi), r)):
        pieces = [start]
        for _ in range(steps - 1):
            pieces = push_pieces(lorenz, pieces)
            images.extend(pieces)
    outside = [iv for iv in images if not base.contains_interval(iv, lorenz.tol.eps_value)]
    components = merge_intervals([base] + outside)
    region = TrappingRegion(base=base, ell=ell, r=r, components=components)
    return check_invariance(lorenz, region, samples, seed)


def trapping_region(lorenz: LorenzMapBase, max_period: int = DEFAULT_MAX_PERIOD, tower=None,
                    horizon: int = 10_000, samples: int = 10_000,
                    seed: int = DEFAULT_SEED) -> TrappingRegion:
    """
    Trapping region around the smallest renormalization interval (or (0,1))

    The return times of the two halves are the least times their interval images fall
    back into the base.

    Raises:
        NoReturnWithinHorizon: If a half does not return within horizon
    """
    if tower is None:
        tower = build_tower(lorenz, 3, max_period)
    base = tower.records[-1].J if tower.records else Interval(0.0, 1.0)
    ell = _return_time(lorenz, Interval(base.lo, lorenz.c), base, horizon)
    r = _return_time(lorenz, Interval(lorenz.c, base.hi), base, horizon)
    region = assemble_trapping_region(lorenz, base, ell, r, samples, seed)
    logger.info(f"Trapping region on ({base.lo:.6g}, {base.hi:.6g}): ell={ell}, r={r}, "
                f"{len(region.components)} components, {region.escapes} escapes")
    return region


def _weyl_seeds(region: TrappingRegion, count: int, seed: int) -> np.ndarray:
    """Quasi-random points spread over the components by length"""
    offset = np.random.default_rng(seed).random()
    golden = (math.sqrt(5.0) - 1.0) / 2.0
    u = (offset + golden * np.arange(1, count + 1)) % 1.0
    lengths = np.array([iv.length for iv in region.components])
    edges = np.concatenate(([0.0], np.cumsum(lengths)))
    total = edges[-1]
    pos = u * total
    k = np.clip(np.searchsorted(edges, pos, side="right") - 1, 0, len(lengths) - 1)
    lo = np.array([iv.lo for iv in region.components])
    return lo[k] + (pos - edges[k])


def attractor_estimate(lorenz: LorenzMapBase, region: TrappingRegion, samples: int = 64,
                       grid: int = DEFAULT_GRID, seed: int = DEFAULT_SEED, transient: int = 1000,
                       length: int = 4096) -> AttractorCovers:
    """
    Generic-point cover and critical-orbit cover of the attractor

    The generic cover collects the orbits of quasi-random seeds in the trapping region after
    a transient; the critical cover is the orbit closure of c- and c+ at grid scale.
    """
    xs = _weyl_seeds(region, samples, seed)
    xs = advance(lorenz, xs, transient)
    generic = IntervalCover(grid)
    for _ in range(length):
        generic.mask[generic.cell_indices(xs)] = True
        xs = lorenz.evaluate_array(xs)
    left, right = critical_orbits(lorenz, transient + length)
    critical = IntervalCover.from_points(grid, left.points + right.points)
    logger.info(f"Attractor covers: generic {generic.cell_count} cells, critical {critical.cell_count} cells")
    return AttractorCovers(generic=generic, critical=critical)


def entropy_lower_bound(decomp: ReturnMapDecomposition, eps_value: float = 1e-9) -> float:
    """log(k)/T over the k full branches (image = J) with largest return time T; 0 if k < 2"""
    J = decomp.J
    full = [br for br in decomp.branches
            if abs(br.image.lo - J.lo) <= eps_value and abs(br.image.hi - J.hi) <= eps_value]
    if len(full) < 2:
        return 0.0
    return math.log(len(full)) / max(br.return_time for br in full)


def transitivity_check(lorenz: LorenzMapBase, cover: IntervalCover, trials: int = 20,
                       horizon: int = 1000, delta: float = 0.01, seed: int = DEFAULT_SEED,
                       max_pieces: int = 4096) -> TransitivityEvidence:
    """
    Push random subintervals of cover cells forward until their images sweep the cover

    Trials cycle through the cover cells in a seeded random order.
    """
    cells = cover.cells()
    if cells.size <= 1:
        return TransitivityEvidence(passed=True, trials=[], vacuous=True)
    rng = np.random.default_rng(seed)
    order = rng.permutation(cells)
    g = cover.grid_size
    results = []
    for k in range(trials):
        cell = int(order[k % order.size])
        lo, hi = np.sort(rng.random(2))
        V = Interval((cell + 0.25 + 0.5 * lo) / g, (cell + 0.25 + 0.5 * max(hi, lo + 1e-6)) / g)
        swept = IntervalCover.from_intervals(g, [V])
        pieces = [V]
        coverage = float((swept.mask & cover.mask).sum()) / cover.cell_count
        steps = 0
        while coverage < 1.0 - delta and steps < horizon:
            pieces = merge_intervals(push_pieces(lorenz, pieces))[:max_pieces]
            if not pieces:
                break
            swept = swept.union(IntervalCover.from_intervals(g, pieces))
            coverage = float((swept.mask & cover.mask).sum()) / cover.cell_count
            steps += 1
        results.append({"cell": cell, "interval": [V.lo, V.hi], "coverage": coverage,
                        "iterations": steps, "reached": coverage >= 1.0 - delta})
    passed = all(t["reached"] for t in results)
    if not passed:
        stuck = next(t for t in results if not t["reached"])
        logger.warning(f"Transitivity trial from cell {stuck['cell']} stuck at coverage {stuck['coverage']:.3f}")
    return TransitivityEvidence(passed=passed, trials=results)


def basin_coverage(lorenz: LorenzMapBase, attractors: Sequence[PeriodicOrbit], grid: int = 1000,
                   iterations: int = 10_000, radius: float = 1e-6) -> BasinCoverage:
    """Fraction of a uniform grid converging to each periodic attractor"""
    xs = advance(lorenz, (np.arange(grid) + 0.5) / grid, iterations)
    fractions = []
    caught = np.zeros(grid, dtype=bool)
    for orbit in attractors:
        pts = np.asarray(orbit.points)
        near = np.min(np.abs(xs[:, None] - pts[None, :]), axis=1) <= radius
        fractions.append(float(near.mean()))
        caught |= near
    return BasinCoverage(fractions=fractions, total=float(caught.mean()), grid=grid,
                         iterations=iterations, radius=radius)


def _periodic_density(cover: IntervalCover, orbits: Sequence[PeriodicOrbit]) -> Dict[str, Any]:
    repelling = [x for o in orbits if o.stability is Stability.REPELLING for x in o.points]
    hit = IntervalCover.from_points(cover.grid_size, repelling)
    cells = cover.cell_count
    fraction = float((hit.mask & cover.mask).sum()) / cells if cells else 0.0
    return {"fraction": fraction, "cells": cells, "repelling_points": len(repelling), "passed": fraction >= 0.9}


def _lyapunov_witnesses(cover: IntervalCover, orbits: Sequence[PeriodicOrbit], count: int) -> List[Dict[str, Any]]:
    inside = [o for o in orbits
              if o.stability is Stability.REPELLING and all(cover.contains_point(x) for x in o.points)]
    inside.sort(key=lambda o: (o.period, o.points[0]))
    return [{
        "itinerary": o.itinerary,
        "period": o.period,
        "point": o.points[0],
        "exponent": math.log(abs(o.multiplier)) / o.period,
    } for o in inside[:count]]


def _omega_cover(lorenz: LorenzMapBase, side: Side, params: ClassifierParams) -> IntervalCover:
    return omega_estimate(lorenz, SignedPoint(lorenz.c, side), params.transient, params.length,
                          params.grid, side)


def _hull(cover: IntervalCover) -> IntervalCover:
    """Smallest single run of cells containing the cover"""
    hull = IntervalCover(cover.grid_size)
    cells = cover.cells()
    if cells.size:
        hull.mask[cells[0]:cells[-1] + 1] = True
    return hull


def _persistent_gaps(lorenz: LorenzMapBase, region: TrappingRegion, covers: AttractorCovers,
                     orbits: Sequence[PeriodicOrbit], params: ClassifierParams) -> List[Interval]:
    """Gaps of the generic cover that survive a 4x refinement and hold no periodic or critical point"""
    fine = attractor_estimate(lorenz, region, params.samples, 4 * params.grid, params.seed,
                              params.transient, params.length).generic
    periodic = np.array([x for o in orbits for x in o.points])
    critical_cells = covers.critical
    persistent = []
    for gap in covers.generic.gaps():
        inner = Interval(gap.lo + 1.0 / fine.grid_size, gap.hi - 1.0 / fine.grid_size, True, True) \
            if gap.length > 2.0 / fine.grid_size else None
        if inner is None:
            continue
        lo_cell, hi_cell = fine.cell_index(inner.lo), fine.cell_index(inner.hi)
        if fine.mask[lo_cell:hi_cell + 1].any():
            continue
        if periodic.size and np.any((periodic > gap.lo) & (periodic < gap.hi)):
            continue
        g = critical_cells.grid_size
        if critical_cells.mask[int(gap.lo * g):int(gap.hi * g)].any():
            continue
        persistent.append(gap)
    return persistent


def _common_evidence(lorenz: LorenzMapBase, cover: IntervalCover, orbits: Sequence[PeriodicOrbit],
                     params: ClassifierParams, periodic_case: bool) -> List[Dict[str, Any]]:
    evidence = []
    neutral = [o for o in orbits if o.stability is Stability.NEUTRAL]
    if neutral:
        logger.warning(f"{len(neutral)} neutral periodic orbits found")
    evidence.append(_entry("neutral_hazards", not neutral, orbits=[o.to_dict() for o in neutral[:5]]))

    c = lorenz.c
    window = Interval(max(c - 1.0 / 64, 0.0), min(c + 1.0 / 64, 1.0))
    density = visit_density(lorenz, window, grid=1024, horizon=1000)
    evidence.append(_entry("visit_density", density.fraction >= 0.99, **density.to_dict()))

    if not periodic_case:
        rows = periodic_accumulation(lorenz, params.max_period, orbits=list(orbits))
        evidence.append(_entry("periodic_accumulation", all(r["left"] and r["right"] for r in rows), radii=rows))

    if not cover.is_empty():
        start = max(cover.intervals, key=lambda iv: iv.length).midpoint
        try:
            alpha = alpha_estimate(lorenz, start, 12, cover.grid_size)
            meets = float((alpha.mask & cover.mask).sum()) / cover.cell_count
            evidence.append(_entry("alpha_limit", meets > 0.0, start=start, fraction=meets))
        except LorenzError as exc:
            evidence.append(_entry("alpha_limit", False, start=start, error=type(exc).__name__))
    return evidence


def classify(lorenz: LorenzMapBase, params: Optional[ClassifierParams] = None) -> AttractorReport:
    """
    Decide the attractor type of a map, attaching every measurement used

    Raises:
        InvariantViolation: If more than two periodic attractors are located
    """
    params = params or ClassifierParams()
    parameters = lorenz.describe()
    orbits = periodic_orbits(lorenz, params.max_period)
    attractors = [o for o in orbits if o.is_attractor]
    if len(attractors) > 2:
        logger.error(f"{len(attractors)} periodic attractors located")
        raise InvariantViolation("More than two periodic attractors located",
                                 {"attractors": [o.to_dict() for o in attractors]})
    evidence = [_entry("periodic_attractor_count", len(attractors) <= 2, count=len(attractors))]

    def report(kind: str, detail: Dict[str, Any], cover: IntervalCover, decomp_base: Interval,
               reason: Optional[str] = None) -> AttractorReport:
        evidence.extend(_common_evidence(lorenz, cover, orbits, params, kind == PERIODIC))
        try:
            decomp = first_return(lorenz, decomp_base, params.horizon)
            entropy = entropy_lower_bound(decomp, lorenz.tol.eps_value)
        except LorenzError as exc:
            logger.warning(f"No return decomposition for the entropy bound: {exc.message}")
            entropy = 0.0
        density = _periodic_density(cover, orbits)
        witnesses = _lyapunov_witnesses(cover, orbits, params.witnesses)
        evidence.append(_entry("periodic_density", density["passed"], fraction=density["fraction"]))
        evidence.append(_entry("lyapunov_witnesses",
                               len(witnesses) >= params.witnesses and all(w["exponent"] >= 1e-3 for w in witnesses),
                               count=len(witnesses)))
        evidence.append(_entry("entropy_lower_bound", entropy > 0.0, value=entropy))
        logger.info(f"Classification: {kind}" + (f" ({reason})" if reason else ""))
        return AttractorReport(kind=kind, detail=detail, lambda_cover=cover, evidence=evidence,
                               periodic_density_check=density, entropy_lower_bound=entropy,
                               lyapunov_witnesses=witnesses, parameters=parameters, params=params,
                               reason=reason)

    whole = Interval(0.0, 1.0)
    if attractors:
        basin = basin_coverage(lorenz, attractors, params.basin_grid, params.basin_iterations, params.basin_radius)
        evidence.append(_entry("basin_coverage", basin.total >= 0.999, **basin.to_dict()))
        cover = IntervalCover.from_points(params.grid, [x for o in attractors for x in o.points])
        return report(PERIODIC, {"attractors": [o.to_dict() for o in attractors]}, cover, whole)

    tower = build_tower(lorenz, params.max_depth, params.max_period, grid=params.grid, seed=params.seed,
                        orbits=orbits)
    evidence.append(_entry("tower_depth", True, depth=tower.depth, depth_limit_hit=tower.depth_limit_hit))
    if tower.depth >= params.solenoid_threshold and tower.depth_limit_hit:
        cover = tower.solenoid_cover if tower.solenoid_cover is not None else IntervalCover(params.grid)
        critical = IntervalCover.from_points(
            params.grid, sum((o.points for o in critical_orbits(lorenz, params.transient + params.length)), []))
        evidence.append(_entry("critical_in_solenoid", critical.issubset(cover, 1)))
        return report(SOLENOID, {"depth": tower.depth, "records": [r.to_dict() for r in tower.records]},
                      cover, tower.records[-1].J)

    cherry = cherry_verdict(lorenz, tower, params.max_period, params.rotation_n, orbits)
    evidence.append(_entry("cherry", cherry.is_cherry, failed_clause=cherry.failed_clause))
    if cherry.is_cherry:
        left = _omega_cover(lorenz, Side.LEFT, params)
        right = _omega_cover(lorenz, Side.RIGHT, params)
        same = left.issubset(right, 1) and right.issubset(left, 1)
        evidence.append(_entry("critical_omega_agree", same, left=left.cell_count, right=right.cell_count))
        if same:
            base = tower.records[-1].J if tower.records else whole
            detail = {"depth": tower.depth, "rotation": cherry.rotation.value if cherry.rotation else None,
                      "cherry": cherry.to_dict()}
            return report(CHERRY, detail, left, base)
        logger.warning("Cherry evidence without matching omega(c-) and omega(c+) covers")

    try:
        region = trapping_region(lorenz, params.max_period, tower, params.horizon,
                                 params.invariance_samples, params.seed)
    except NoReturnWithinHorizon as exc:
        return report(INCONCLUSIVE, {"depth": tower.depth, "error": exc.to_dict()}, IntervalCover(params.grid),
                      whole, reason="trapping region not found")
    evidence.append(_entry("trapping_invariance", region.invariant, escapes=region.escapes, samples=region.samples))
    covers = attractor_estimate(lorenz, region, params.samples, params.grid, params.seed,
                                params.transient, params.length)
    generic, critical = covers.generic, covers.critical
    contained = critical.issubset(generic, 1)
    spans = generic.issubset(_hull(critical), 1)
    agree = contained and spans
    intervals = generic.intervals
    around_c = generic.contains_point(lorenz.c)
    short = len(intervals) <= params.max_intervals
    evidence.append(_entry("cover_agreement", agree, generic=generic.cell_count, critical=critical.cell_count,
                           spans=spans))
    evidence.append(_entry("critical_in_generic", contained))
    evidence.append(_entry("interval_count", short, count=len(intervals)))
    detail = {"depth": tower.depth, "trapping_region": region.to_dict(), "covers": covers.to_dict()}

    failed = None
    if agree and around_c and short:
        transitive = transitivity_check(lorenz, generic, params.trials, 1000, params.delta, params.seed)
        evidence.append(_entry("transitivity", transitive.passed,
                               trials=len(transitive.trials), vacuous=transitive.vacuous))
        if not region.invariant:
            failed = f"trapping region not invariant ({region.escapes}/{region.samples} escapes)"
        elif not transitive.passed:
            stuck = next(t for t in transitive.trials if not t["reached"])
            failed = f"transitivity trial from cell {stuck['cell']} stuck at coverage {stuck['coverage']:.3f}"
        else:
            return report(CHAOTIC, detail, generic, region.base)

    gaps = _persistent_gaps(lorenz, region, covers, orbits, params)
    evidence.append(_entry("persistent_gaps", bool(gaps), count=len(gaps)))
    if contained and gaps:
        detail["gaps"] = [[g.lo, g.hi] for g in gaps[:16]]
        return report(CANTOR, detail, critical, region.base)

    if failed is None:
        if not contained:
            failed = "critical cover escapes the generic cover"
        elif not spans:
            failed = "critical cover does not span the generic cover"
        else:
            failed = "generic cover neither a short cycle of intervals around c nor gapped"
    return report(INCONCLUSIVE, detail, generic, region.base, reason=failed)


def verdict_stable(first: AttractorReport, second: AttractorReport) -> bool:
    """Same kind, or one of them Inconclusive"""
    return first.kind == second.kind or INCONCLUSIVE in (first.kind, second.kind)


def report_context(params: ClassifierParams) -> Dict[str, Any]:
    return {"defaults": run_defaults(), "params": params.to_dict()}
