"""Adaptive Profile Information (API) threshold and its calibrated closed form."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .backbone import ConvexBackbone, Pi0Estimate, pi0_backbone
from .ecdf import PValueSample
from .errors import DomainError

DEFAULT_ALPHA0 = 0.22
API_QUAD_POINTS = 1001
ALPHA_CEILING = 1.0 - 1e-12


@dataclass(frozen=True)
class ThresholdResult:
    """A significance threshold and what it does to a sample.

    ``alpha0`` is the nominal level of the method: the Bonferroni calibrator
    for API thresholds, the FDR control level q for step-up procedures.
    """

    alpha: float
    method: str
    alpha0: float
    pi0_used: float
    gamma_used: float
    rejections: int
    params: Optional[dict] = None


def _check_xy(x: float, y: float) -> None:
    if not (x > 0.0 and x <= 1.0):
        raise DomainError(f"x must lie in (0, 1], got {x!r}")
    if not y >= 1.0:
        raise DomainError(f"y must be >= 1, got {y!r}")


def coeff_A(x: float, y: float, alpha0: float = DEFAULT_ALPHA0) -> float:
    """Multiplier of the calibrated threshold, A(x, y) with x = pi0, y = gamma."""
    _check_xy(x, y)
    if not alpha0 > 0.0:
        raise DomainError("alpha0 must be positive")
    inner = (y + 1.0) ** (1.0 + 1.0 / y) / (x * y)
    return (y / (4.0 ** (1.0 / 3.0) * x)) * alpha0 * inner ** (y / (2.0 * y + 1.0))


def coeff_B(x: float, y: float) -> float:
    """Exponent of m in the calibrated threshold; lies in [1/3, 1]."""
    _check_xy(x, y)
    return (1.0 + 2.0 * x * x / y) * y / (2.0 * y + 1.0)


def _check_model(m: int, pi0: float, gamma: float) -> None:
    if m < 1:
        raise DomainError("m must be at least 1")
    _check_xy(pi0, gamma)


def alpha_star_uncalibrated(m: int, pi0: float, gamma: float, d: float = 0.0) -> float:
    """Closed-form approximate minimiser of the API criterion.

    ``d`` cancels through the choice of the penalty weight and is accepted
    only so callers can pass a backbone's parameters unchanged.
    """
    _check_model(m, pi0, gamma)
    e = gamma / (2.0 * gamma + 1.0)
    lead = ((gamma + 1.0) ** (1.0 + 1.0 / gamma) / (pi0 * gamma)) ** e
    return lead * m ** (-(1.0 + 2.0 * pi0 * pi0 / gamma) * e)


def alpha_cal(m: int, pi0: float, gamma: float, alpha0: float = DEFAULT_ALPHA0) -> float:
    """A(pi0, gamma) m^-B(pi0, gamma), clamped below 1."""
    _check_model(m, pi0, gamma)
    val = coeff_A(pi0, gamma, alpha0) * float(m) ** (-coeff_B(pi0, gamma))
    return min(val, ALPHA_CEILING)


def alpha0_from_target(alpha1: float) -> float:
    """Calibrator alpha0 that bounds the limiting all-null error at alpha1."""
    if not 0.0 < alpha1 < 1.0:
        raise DomainError(f"alpha1 must lie in (0, 1), got {alpha1!r}")
    return -math.log1p(-alpha1)


def penalty_weight(m: int, pi0: float, gamma: float, d: float) -> float:
    """lambda(m, pi0, d) = m^(2 pi0^2 / gamma) / (1 - d)."""
    if d >= 1.0:
        return math.inf
    return float(m) ** (2.0 * pi0 * pi0 / gamma) / (1.0 - d)


def api_value(alpha: float, backbone: ConvexBackbone, m: int, pi0: float, points: int = API_QUAD_POINTS) -> float:
    """The API criterion at alpha; +inf when the backbone is the diagonal on [0, alpha]."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    gamma = backbone.gamma
    t = np.linspace(0.0, alpha, max(points, 2))
    gap = np.maximum(t - np.asarray(backbone(t), dtype=float), 0.0)
    y = gap**gamma
    integral = float(np.sum((y[1:] + y[:-1]) * np.diff(t)) / 2.0)
    if integral <= 0.0:
        return math.inf
    return integral ** (-1.0 / gamma) + penalty_weight(m, pi0, gamma, backbone.d) * m * pi0 * alpha


def api_grid_minimizer(backbone: ConvexBackbone, m: int, pi0: float, grid=None) -> float:
    """Brute-force minimiser of api_value over a log-spaced alpha grid (diagnostic)."""
    if grid is None:
        grid = np.logspace(-8, math.log10(0.999), 2000)
    vals = np.array([api_value(float(a), backbone, m, pi0) for a in grid])
    return float(grid[int(np.argmin(vals))])


def alpha_hat_cal(
    sample: PValueSample,
    alpha0: float = DEFAULT_ALPHA0,
    estimate: Optional[Pi0Estimate] = None,
) -> ThresholdResult:
    """Data-driven calibrated threshold from the backbone's (pi0, gamma).

    A precomputed backbone estimate can be passed to avoid refitting.
    """
    est = estimate if estimate is not None else pi0_backbone(sample)
    if est.method != "backbone":
        raise DomainError("the calibrated threshold needs a backbone estimate")
    pi0 = est.value
    gamma = est.backbone.gamma if est.backbone is not None else 1.0
    if est.params.get("guard"):
        pi0, gamma = 1.0, 1.0
    elif est.params.get("fallback"):
        gamma = 1.0  # the fallback backbone is the identity
    alpha = alpha_cal(sample.m, pi0, gamma, alpha0)
    rejections = int(np.searchsorted(sample.sorted, alpha, side="right"))
    return ThresholdResult(
        alpha=alpha,
        method="api_closed_form",
        alpha0=alpha0,
        pi0_used=pi0,
        gamma_used=gamma,
        rejections=rejections,
        params={"guard": bool(est.params.get("guard", False)), "tau": est.params.get("tau", 0.0)},
    )
