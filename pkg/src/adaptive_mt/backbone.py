"""Smoothed EQF, bend point, convex-backbone fit and the backbone pi0 estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .ecdf import PValueSample
from .errors import DomainError, InsufficientDataError
from .numeric import golden_section_min
from .splines import SmoothedEQF, basis_matrix, build_knots

DEFAULT_PASSES = 3
PASS_TOL = 1e-6
BEND_GRID = 2001
L1_GRID = 2001
GAMMA_MIN = 1.0 + 1e-6
GAMMA_MAX = 20.0
GAMMA_TOL = 1e-4
COARSE_SCAN = 100
# Kolmogorov 95% band scale for the near-uniform guard
GUARD_SCALE = 1.36


@dataclass(frozen=True)
class ConvexBackbone:
    """Two-piece convex quantile model: a t^gamma + d t below tau, chord above.

    ``fallback`` marks a fit where no feasible gamma existed and the
    identity backbone was substituted.
    """

    gamma: float
    a: float
    d: float
    b0: float
    b1: float
    tau: float
    objective: float = 0.0
    fallback: bool = False

    @classmethod
    def identity(cls, objective: float = 0.0, fallback: bool = False) -> "ConvexBackbone":
        return cls(gamma=1.0, a=1.0, d=0.0, b0=0.0, b1=1.0, tau=0.0, objective=objective, fallback=fallback)

    @property
    def is_identity(self) -> bool:
        return self.tau == 0.0

    def _power_part(self, t: np.ndarray) -> np.ndarray:
        if self.tau > 0.0 and self.gamma > 1.0:
            # a tau^gamma = -b0/(gamma-1); this form stays finite for tiny tau
            return (-self.b0 / (self.gamma - 1.0)) * (t / self.tau) ** self.gamma
        return self.a * t**self.gamma

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        if self.is_identity:
            out = t_arr.copy() if t_arr.ndim else t_arr * 1.0
        else:
            low = self._power_part(np.minimum(t_arr, self.tau)) + self.d * t_arr
            high = self.b0 + self.b1 * t_arr
            out = np.where(t_arr <= self.tau, low, high)
        return float(out) if np.ndim(out) == 0 else out

    @property
    def value_at_tau(self) -> float:
        return self.b0 + self.b1 * self.tau


@dataclass(frozen=True)
class Pi0Estimate:
    value: float
    method: str
    backbone: Optional[ConvexBackbone] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 < self.value <= 1.0:
            raise DomainError(f"pi0 estimate must lie in (0, 1], got {self.value!r}")


def smooth_eqf(sample: PValueSample, passes: int = DEFAULT_PASSES, tol: float = PASS_TOL) -> SmoothedEQF:
    """Repeated variation-diminishing smoothing of the modified EQF.

    Knots are placed once from the sample and reused on every pass. After
    each pass the coefficients are clamped to the Greville abscissae so the
    spline stays on or below the diagonal at the coefficient level.
    """
    if passes < 1:
        raise DomainError("passes must be at least 1")
    if sample.m < 5:
        raise InsufficientDataError(f"need m >= 5 P values, got {sample.m}")
    knots = build_knots(sample)
    g = knots.greville
    coef = np.minimum(sample.modified_eqf(g), g)
    # spline values at the Greville points are a fixed linear map of the coefficients
    G = basis_matrix(knots, g)
    for _ in range(passes - 1):
        new = np.minimum(G @ coef, g)
        done = np.max(np.abs(new - coef)) < tol
        coef = new
        if done:
            break
    return SmoothedEQF(knots, coef)


def max_gap(q: Callable, grid: int = BEND_GRID) -> tuple[float, float]:
    """(argmax, max) of t - min{q(t), t} on a uniform grid; ties go left."""
    t = np.linspace(0.0, 1.0, grid)
    gap = t - np.minimum(np.asarray(q(t), dtype=float), t)
    i = int(np.argmax(gap))
    return float(t[i]), float(gap[i])


def bend_point(q: Callable, tol: float = 0.0, grid: int = BEND_GRID) -> float:
    """Grid argmax of t - min{q(t), t}; 0 when the largest gap is within tol."""
    tau, gap = max_gap(q, grid)
    if gap <= tol or gap <= 0.0:
        return 0.0
    return tau


def _trapezoid(y: np.ndarray, x: np.ndarray) -> float:
    return float(np.sum((y[1:] + y[:-1]) * np.diff(x)) / 2.0)


def _backbone_for(gamma: float, b0: float, b1: float, tau: float) -> ConvexBackbone:
    a_tau_g = -b0 / (gamma - 1.0)  # a tau^gamma
    a = a_tau_g / tau**gamma if tau**gamma > 0 else math.inf
    d = b1 + b0 * gamma / ((gamma - 1.0) * tau)
    return ConvexBackbone(gamma=gamma, a=a, d=d, b0=b0, b1=b1, tau=tau)


def fit_backbone(q: Callable, tau: float, grid: int = L1_GRID) -> ConvexBackbone:
    """Fit the convex backbone to the quantile curve q at bend point tau.

    The chord slope b1 is fixed by (tau, q(tau)) and (1, 1); a and d follow
    from continuity and smoothness at tau, leaving a 1-D search over gamma
    for the smallest L1 distance. The search is a coarse feasibility scan
    followed by golden-section refinement.
    """
    if not 0.0 <= tau < 1.0:
        raise DomainError(f"tau must lie in [0, 1), got {tau!r}")
    t = np.linspace(0.0, 1.0, grid)
    qt = np.asarray(q(t), dtype=float)

    def l1(bb: ConvexBackbone) -> float:
        return _trapezoid(np.abs(bb(t) - qt), t)

    if tau == 0.0:
        ident = ConvexBackbone.identity()
        return ConvexBackbone.identity(objective=l1(ident))

    q_tau = min(float(q(tau)), tau)
    b1 = (1.0 - q_tau) / (1.0 - tau)
    b0 = 1.0 - b1
    if b0 == 0.0:
        # q touches the diagonal at tau: the backbone is the diagonal itself
        bb = ConvexBackbone(gamma=1.0, a=0.0, d=1.0, b0=0.0, b1=1.0, tau=tau)
        return _with_objective(bb, l1(bb))

    # d(gamma) >= 0  <=>  gamma >= b1 tau / q(tau); d <= 1 and a >= 0 always hold
    lo = max(GAMMA_MIN, b1 * tau / q_tau) if q_tau > 0.0 else math.inf
    if lo > GAMMA_MAX:
        ident = ConvexBackbone.identity(fallback=True)
        return ConvexBackbone.identity(objective=l1(ident), fallback=True)

    def objective(gamma: float) -> float:
        return l1(_backbone_for(gamma, b0, b1, tau))

    scan = np.linspace(GAMMA_MIN, GAMMA_MAX, COARSE_SCAN)
    scan = np.unique(np.concatenate([scan[scan >= lo], [lo]]))
    vals = np.array([objective(g) for g in scan])
    i = int(np.argmin(vals))
    left = scan[max(i - 1, 0)]
    right = scan[min(i + 1, scan.size - 1)]
    gamma, _ = golden_section_min(objective, left, right, tol=GAMMA_TOL)
    if objective(gamma) > vals[i]:
        gamma = float(scan[i])
    bb = _backbone_for(float(gamma), b0, b1, tau)
    return _with_objective(bb, objective(gamma))


def _with_objective(bb: ConvexBackbone, obj: float) -> ConvexBackbone:
    return ConvexBackbone(
        gamma=bb.gamma, a=bb.a, d=bb.d, b0=bb.b0, b1=bb.b1, tau=bb.tau, objective=obj, fallback=bb.fallback
    )


def pi0_from_backbone(backbone: ConvexBackbone) -> float:
    """Inverse slope of the chord from (tau, Q*(tau)) to (1, 1), clamped to (0, 1]."""
    if backbone.is_identity:
        return 1.0
    val = (1.0 - backbone.tau) / (1.0 - backbone.value_at_tau)
    return float(min(max(val, np.finfo(float).tiny), 1.0))


def pi0_from_chord(q: Callable, tau: float) -> float:
    """(1 - tau) / (1 - min{q(tau), tau}), clamped to (0, 1]."""
    q_tau = min(float(q(tau)), tau)
    return float(min(max((1.0 - tau) / (1.0 - q_tau), np.finfo(float).tiny), 1.0))


def guard_tolerance(m: int) -> float:
    return GUARD_SCALE / math.sqrt(m)


def pi0_backbone(sample: PValueSample, passes: int = DEFAULT_PASSES, guard: bool = True) -> Pi0Estimate:
    """Convex-backbone estimate of the true-null proportion.

    When the smoothed EQF stays within ``1.36 / sqrt(m)`` of the diagonal
    the estimate and the backbone exponent are both set to 1. Pass
    ``guard=False`` to get the raw chord estimate regardless (the gap is
    still reported in ``params``).
    """
    if sample.m < 5:
        raise InsufficientDataError(f"need m >= 5 P values, got {sample.m}")
    qhat = smooth_eqf(sample, passes)
    tol = guard_tolerance(sample.m)
    tau_grid, gap = max_gap(qhat)
    params = {"max_gap": gap, "guard_tol": tol, "guard": False, "tau": 0.0, "gamma": 1.0, "fallback": False}
    if gap <= 0.0 or (guard and gap < tol):
        params["guard"] = True
        return Pi0Estimate(1.0, "backbone", ConvexBackbone.identity(), params)
    bb = fit_backbone(qhat, tau_grid)
    params.update(tau=bb.tau, gamma=bb.gamma, fallback=bb.fallback)
    if bb.fallback:
        # no feasible exponent below the cap, but the chord through
        # (tau, Qhat(tau)) and (1, 1) is still defined and fixes pi0
        params["tau"] = tau_grid
        return Pi0Estimate(pi0_from_chord(qhat, tau_grid), "backbone", bb, params)
    return Pi0Estimate(pi0_from_backbone(bb), "backbone", bb, params)
