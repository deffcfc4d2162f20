"""
Lorenz Attractors - Contracting Lorenz map family

Path: /lorenz_map.py
Purpose: Defines the standard non-flat contracting Lorenz map family with one-sided
         evaluation at the critical point, closed-form derivatives, the Schwarzian,
         branch inversion by bisection and parameter validation. LorenzMapBase is the
         interface shared with renormalized views so every analysis runs on both.
"""

import math
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

from lorenz_config import Tolerances, get_tolerances
from lorenz_errors import CriticalPointDerivative, InvalidMapSpec, ValueOutsideBranchImage

logger = logging.getLogger("lorenz_map")

PARAMETER_KEYS = ("c", "alpha", "beta", "v1", "v0")

# Below this ratio x/c the left branch switches to expm1/log1p
SMALL_RATIO = 1e-3


class Side(Enum):
    """Approach side at the critical point (LEFT is c-, RIGHT is c+)"""

    LEFT = "L"
    RIGHT = "R"

    def __lt__(self, other):
        if not isinstance(other, Side):
            return NotImplemented
        return self is Side.LEFT and other is Side.RIGHT

    @property
    def letter(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: Union[str, "Side"]) -> "Side":
        if isinstance(text, Side):
            return text
        key = str(text).strip().upper()
        if key in ("L", "LEFT", "-", "C-"):
            return cls.LEFT
        if key in ("R", "RIGHT", "+", "C+"):
            return cls.RIGHT
        raise ValueError(f"Unknown side: {text}")


@dataclass(frozen=True)
class SignedPoint:
    """A point of [0,1] tagged with the side used if it sits on the critical point"""

    x: float
    side: Side = Side.LEFT

    def __post_init__(self):
        if not 0.0 <= self.x <= 1.0:
            raise ValueError(f"SignedPoint must lie in [0,1], got {self.x}")

    def to_dict(self) -> Dict[str, Any]:
        return {"x": self.x, "side": self.side.letter}


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    closed_lo: bool = False
    closed_hi: bool = False
    point: bool = False

    def __post_init__(self):
        if self.point:
            if self.lo != self.hi:
                raise ValueError(f"Point interval needs lo == hi, got ({self.lo}, {self.hi})")
        elif not self.lo < self.hi:
            raise ValueError(f"Degenerate interval ({self.lo}, {self.hi})")

    @classmethod
    def at(cls, x: float) -> "Interval":
        return cls(x, x, True, True, point=True)

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float, slack: float = 0.0) -> bool:
        """Closed containment widened by slack"""
        return self.lo - slack <= x <= self.hi + slack

    def interior_contains(self, x: float, eps: float = 0.0) -> bool:
        """Open containment shrunk by eps on both ends"""
        return self.lo + eps < x < self.hi - eps

    def contains_interval(self, other: "Interval", slack: float = 0.0) -> bool:
        return self.lo - slack <= other.lo and other.hi <= self.hi + slack

    def overlaps(self, other: "Interval") -> bool:
        """True when the overlap has positive length"""
        return min(self.hi, other.hi) > max(self.lo, other.lo)

    def as_tuple(self) -> Tuple[float, float]:
        return (self.lo, self.hi)

    def to_dict(self) -> Dict[str, Any]:
        return {"lo": self.lo, "hi": self.hi, "closed_lo": self.closed_lo, "closed_hi": self.closed_hi}


@dataclass
class ValidationReport:
    valid: bool
    violations: List[str]
    parameters: Dict[str, float]
    critical_values: Optional[Dict[str, float]] = None
    derivative_vanishes_at_c: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "valid": self.valid,
            "violations": list(self.violations),
            "parameters": dict(self.parameters),
            "critical_values": self.critical_values,
            "derivative_vanishes_at_c": self.derivative_vanishes_at_c,
        }


class LorenzMapBase(ABC):
    """
    Interface of an evaluable Lorenz map on [0,1] with critical point c.

    Implementations provide the two monotone branches (each continuously extended to c,
    where the left branch takes v1 and the right branch v0) and their first derivatives.
    Subclasses expose attributes c, v1, v0 and tol.
    """

    @abstractmethod
    def branch(self, side: Side, x: float) -> float:
        """Branch value at x, clamped to the branch domain"""

    @abstractmethod
    def branch_array(self, side: Side, xs: np.ndarray) -> np.ndarray:
        """Vectorized branch values"""

    @abstractmethod
    def branch_derivative(self, side: Side, x: float) -> float:
        """First derivative of the branch (0 at the critical point)"""

    def branch_derivative_array(self, side: Side, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        return np.array([self.branch_derivative(side, float(x)) for x in xs.ravel()]).reshape(xs.shape)

    def side_of(self, x: float) -> Side:
        return Side.LEFT if x < self.c else Side.RIGHT

    def is_critical(self, x: float) -> bool:
        return abs(x - self.c) <= self.tol.eps_critical

    def branch_domain(self, side: Side) -> Interval:
        if side is Side.LEFT:
            return Interval(0.0, self.c, closed_lo=True)
        return Interval(self.c, 1.0, closed_hi=True)

    def branch_image(self, side: Side) -> Tuple[float, float]:
        if side is Side.LEFT:
            return (0.0, self.v1)
        return (self.v0, 1.0)

    def evaluate(self, x: float, side: Side = Side.LEFT) -> float:
        """
        Evaluate the map with one-sided semantics at the critical point

        Args:
            x: Point of [0,1]
            side: Side used when x is within eps_critical of c

        Returns:
            f(x); v1 or v0 at the critical point; exactly 0 at 0 and 1 at 1
        """
        if x <= 0.0:
            return 0.0
        if x >= 1.0:
            return 1.0
        if self.is_critical(x):
            return self.v1 if side is Side.LEFT else self.v0
        return self.branch(self.side_of(x), x)

    def evaluate_point(self, p: SignedPoint) -> float:
        return self.evaluate(p.x, p.side)

    def evaluate_array(self, xs: np.ndarray, side: Side = Side.LEFT) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        eps = self.tol.eps_critical
        left = xs < self.c - eps
        right = xs > self.c + eps
        out = np.where(left, self.branch_array(Side.LEFT, xs), self.branch_array(Side.RIGHT, xs))
        critical = ~(left | right)
        if np.any(critical):
            out = np.where(critical, self.v1 if side is Side.LEFT else self.v0, out)
        out = np.where(xs <= 0.0, 0.0, out)
        return np.where(xs >= 1.0, 1.0, out)

    def derivative(self, x: float, order: int = 1) -> float:
        if self.is_critical(x):
            raise CriticalPointDerivative(
                f"Derivative requested at the critical point (x={x}, c={self.c})",
                {"x": x, "c": self.c},
            )
        if order != 1:
            raise ValueError(f"Only first derivatives are available for {type(self).__name__}")
        return self.branch_derivative(self.side_of(x), x)

    def derivative_array(self, xs: np.ndarray) -> np.ndarray:
        """First derivatives; 0 at points within eps_critical of c"""
        xs = np.asarray(xs, dtype=float)
        left = xs < self.c
        out = np.where(
            left,
            self.branch_derivative_array(Side.LEFT, xs),
            self.branch_derivative_array(Side.RIGHT, xs),
        )
        return np.where(np.abs(xs - self.c) <= self.tol.eps_critical, 0.0, out)

    def invert_branch(self, side: Side, y: float) -> float:
        return float(self.invert_branch_array(side, np.array([y], dtype=float))[0])

    def invert_branch_array(self, side: Side, ys: np.ndarray) -> np.ndarray:
        """
        Invert one branch by monotone bisection (vectorized)

        Args:
            side: Branch to invert
            ys: Values in the closed branch image

        Returns:
            Preimages on the branch; c where y reaches the critical value

        Raises:
            ValueOutsideBranchImage: If some y lies outside the image by more than eps_value
        """
        ys = np.asarray(ys, dtype=float)
        img_lo, img_hi = self.branch_image(side)
        eps = self.tol.eps_value
        outside = (ys < img_lo - eps) | (ys > img_hi + eps)
        if np.any(outside):
            bad = float(ys[outside][0])
            raise ValueOutsideBranchImage(
                f"Value {bad} outside the {side.name.lower()} branch image [{img_lo}, {img_hi}]",
                {"y": bad, "side": side.letter, "image": [img_lo, img_hi]},
            )

        if side is Side.LEFT:
            lo = np.zeros_like(ys)
            hi = np.full_like(ys, self.c)
            at_critical = ys >= img_hi
            at_end = ys <= img_lo
            end_value = 0.0
        else:
            lo = np.full_like(ys, self.c)
            hi = np.ones_like(ys)
            at_critical = ys <= img_lo
            at_end = ys >= img_hi
            end_value = 1.0

        for _ in range(self.tol.max_bisect):
            mid = 0.5 * (lo + hi)
            if np.all((mid <= lo) | (mid >= hi)):
                break
            below = self.branch_array(side, mid) < ys
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)

        err_lo = np.abs(self.branch_array(side, lo) - ys)
        err_hi = np.abs(self.branch_array(side, hi) - ys)
        result = np.where(err_lo <= err_hi, lo, hi)
        result = np.where(at_end, end_value, result)
        return np.where(at_critical, self.c, result)

    def describe(self) -> Dict[str, Any]:
        return {"c": self.c, "v1": self.v1, "v0": self.v0}


@dataclass(frozen=True)
class StandardLorenzMap(LorenzMapBase):
    """
    Standard contracting Lorenz map with affine rescalings:

        f(x) = v1 * (1 - ((c - x) / c) ** alpha)              on [0, c)
        f(x) = v0 + (1 - v0) * ((x - c) / (1 - c)) ** beta    on (c, 1]
    """

    c: float
    alpha: float
    beta: float
    v1: float
    v0: float
    tol: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        report = validate(self.parameters())
        if not report.valid:
            raise InvalidMapSpec(
                f"Invalid Lorenz map parameters: {'; '.join(report.violations)}",
                {"violations": report.violations, "parameters": self.parameters()},
            )

    @classmethod
    def from_dict(cls, spec: Mapping[str, Any]) -> "StandardLorenzMap":
        tol = get_tolerances(spec.get("tolerances"))
        return cls(*(float(spec[key]) for key in PARAMETER_KEYS), tol=tol)

    def parameters(self) -> Dict[str, float]:
        return {key: getattr(self, key) for key in PARAMETER_KEYS}

    def to_dict(self) -> Dict[str, Any]:
        return {**self.parameters(), "tolerances": self.tol.to_dict()}

    def describe(self) -> Dict[str, Any]:
        return self.parameters()

    def branch(self, side: Side, x: float) -> float:
        c = self.c
        if side is Side.LEFT:
            if x <= 0.0:
                return 0.0
            if x >= c:
                return self.v1
            ratio = x / c
            if ratio < SMALL_RATIO:
                return self.v1 * -math.expm1(self.alpha * math.log1p(-ratio))
            return self.v1 * (1.0 - ((c - x) / c) ** self.alpha)
        if x >= 1.0:
            return 1.0
        if x <= c:
            return self.v0
        return self.v0 + (1.0 - self.v0) * ((x - c) / (1.0 - c)) ** self.beta

    def branch_array(self, side: Side, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        c = self.c
        if side is Side.LEFT:
            xc = np.clip(xs, 0.0, c)
            ratio = xc / c
            plain = 1.0 - ((c - xc) / c) ** self.alpha
            small = -np.expm1(self.alpha * np.log1p(-np.minimum(ratio, 0.5)))
            return self.v1 * np.where(ratio < SMALL_RATIO, small, plain)
        xc = np.clip(xs, c, 1.0)
        out = self.v0 + (1.0 - self.v0) * ((xc - c) / (1.0 - c)) ** self.beta
        return np.where(xc >= 1.0, 1.0, out)

    def _derivatives(self, side: Side, x: float) -> Tuple[float, float, float]:
        c = self.c
        if side is Side.LEFT:
            a, k = self.alpha, self.v1
            u = (c - x) / c
            return (
                k * a / c * u ** (a - 1.0),
                -k * a * (a - 1.0) / c ** 2 * u ** (a - 2.0),
                k * a * (a - 1.0) * (a - 2.0) / c ** 3 * u ** (a - 3.0),
            )
        b, k, span = self.beta, 1.0 - self.v0, 1.0 - c
        w = (x - c) / span
        return (
            k * b / span * w ** (b - 1.0),
            k * b * (b - 1.0) / span ** 2 * w ** (b - 2.0),
            k * b * (b - 1.0) * (b - 2.0) / span ** 3 * w ** (b - 3.0),
        )

    def branch_derivative(self, side: Side, x: float) -> float:
        if (side is Side.LEFT and x >= self.c) or (side is Side.RIGHT and x <= self.c):
            return 0.0
        return self._derivatives(side, x)[0]

    def branch_derivative_array(self, side: Side, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        c = self.c
        if side is Side.LEFT:
            u = (c - np.clip(xs, 0.0, c)) / c
            return self.v1 * self.alpha / c * u ** (self.alpha - 1.0)
        w = (np.clip(xs, c, 1.0) - c) / (1.0 - c)
        return (1.0 - self.v0) * self.beta / (1.0 - c) * w ** (self.beta - 1.0)

    def derivative(self, x: float, order: int = 1) -> float:
        if order not in (1, 2, 3):
            raise ValueError(f"Derivative order must be 1, 2 or 3, got {order}")
        if self.is_critical(x):
            raise CriticalPointDerivative(
                f"Derivative requested at the critical point (x={x}, c={self.c})",
                {"x": x, "c": self.c, "order": order},
            )
        return self._derivatives(self.side_of(x), x)[order - 1]

    def schwarzian(self, x: float) -> float:
        d1, d2, d3 = (self.derivative(x, order) for order in (1, 2, 3))
        return d3 / d1 - 1.5 * (d2 / d1) ** 2


NAMED_INSTANCES: Dict[str, Dict[str, float]] = {
    # full branches, chaotic on [0,1]
    "F": {"c": 0.5, "alpha": 2.0, "beta": 2.0, "v1": 1.0, "v0": 0.0},
    # f(x) < x on (0,1), attracting fixed point 0
    "C": {"c": 0.5, "alpha": 2.0, "beta": 2.0, "v1": 0.2, "v0": 0.1},
    # attracting period-2 orbit, renormalizable with periods (2,2)
    "P": {"c": 0.5, "alpha": 2.0, "beta": 2.0, "v1": 0.7, "v0": 0.3},
    # twice renormalizable, symmetric family c=1/2, alpha=beta=2, v0=1-v1
    "T": {"c": 0.5, "alpha": 2.0, "beta": 2.0, "v1": 0.85, "v0": 0.15},
}


def named_map(name: str, tol: Optional[Tolerances] = None) -> StandardLorenzMap:
    if name not in NAMED_INSTANCES:
        raise ValueError(f"Unknown named instance: {name}. Available: {sorted(NAMED_INSTANCES)}")
    return StandardLorenzMap(**NAMED_INSTANCES[name], tol=tol or Tolerances())


def validate(spec: Union[Mapping[str, Any], StandardLorenzMap]) -> ValidationReport:
    """
    Check a raw parameter bundle against the family constraints

    Args:
        spec: Mapping with keys c, alpha, beta, v1, v0 (or an existing map)

    Returns:
        ValidationReport listing every violated constraint
    """
    params = spec.parameters() if isinstance(spec, StandardLorenzMap) else dict(spec)
    violations: List[str] = []
    values: Dict[str, float] = {}

    for key in PARAMETER_KEYS:
        raw = params.get(key)
        if raw is None:
            violations.append(f"{key} is required")
            continue
        try:
            value = float(raw)
        except (TypeError, ValueError):
            violations.append(f"{key} must be a number")
            continue
        if not math.isfinite(value):
            violations.append(f"{key} must be finite")
            continue
        values[key] = value

    c, alpha, beta = values.get("c"), values.get("alpha"), values.get("beta")
    v1, v0 = values.get("v1"), values.get("v0")
    if c is not None and not 0.0 < c < 1.0:
        violations.append("c must lie in (0,1)")
    if alpha is not None and not alpha > 1.0:
        violations.append("alpha must exceed 1")
    if beta is not None and not beta > 1.0:
        violations.append("beta must exceed 1")
    if v1 is not None and not 0.0 < v1 <= 1.0:
        violations.append("v1 must lie in (0,1]")
    if v0 is not None and not 0.0 <= v0 < 1.0:
        violations.append("v0 must lie in [0,1)")
    if v1 is not None and v0 is not None and not v0 < v1:
        violations.append("v0 must be below v1")

    report = ValidationReport(valid=not violations, violations=violations, parameters=values)
    if report.valid:
        report.critical_values = {"left": v1, "right": v0}
        report.derivative_vanishes_at_c = True
    else:
        logger.debug(f"Validation failed: {violations}")
    return report


def evaluate(lorenz: LorenzMapBase, p: Union[SignedPoint, float]) -> float:
    if isinstance(p, SignedPoint):
        return lorenz.evaluate_point(p)
    return lorenz.evaluate(float(p))


def derivative(lorenz: LorenzMapBase, x: float, order: int = 1) -> float:
    return lorenz.derivative(x, order)


def schwarzian(lorenz: StandardLorenzMap, x: float) -> float:
    return lorenz.schwarzian(x)


def invert_branch(lorenz: LorenzMapBase, side: Side, y: float) -> float:
    return lorenz.invert_branch(side, y)
