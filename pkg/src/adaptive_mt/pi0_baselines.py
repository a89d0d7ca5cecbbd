"""Competing null-proportion estimators: Storey's lambda ratio (fixed and
bootstrap-tuned) and the Benjamini-Hochberg lowest-slope estimator."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .backbone import Pi0Estimate
from .ecdf import PValueSample
from .errors import DomainError, InsufficientDataError
from .numeric import RngStream

DEFAULT_LAMBDA_GRID = tuple(np.round(np.arange(1, 20) * 0.05, 2))
DEFAULT_BOOTSTRAP = 100


def _storey_ratio(sorted_p: np.ndarray, lambdas: np.ndarray) -> np.ndarray:
    m = sorted_p.shape[-1]
    above = m - np.searchsorted(sorted_p, lambdas, side="right")
    return above / (m * (1.0 - lambdas))


def _clamp(raw: float, m: int) -> tuple[float, bool]:
    if raw <= 0.0:
        return 1.0 / m, True
    return min(raw, 1.0), False


def storey_pi0(sample: PValueSample, lam: float = 0.5) -> Pi0Estimate:
    """(1 - edf(lambda)) / (1 - lambda), clamped to (0, 1].

    A zero numerator is replaced by 1/m and flagged with ``zero_count``.
    """
    if not 0.0 < lam < 1.0:
        raise DomainError(f"lambda must lie in (0, 1), got {lam!r}")
    raw = float(_storey_ratio(sample.sorted, np.array([lam]))[0])
    value, flagged = _clamp(raw, sample.m)
    return Pi0Estimate(value, "storey_lambda", params={"lambda": lam, "raw": raw, "zero_count": flagged})


def storey_pi0_bootstrap(
    sample: PValueSample,
    lambda_grid: Optional[Sequence[float]] = None,
    B: int = DEFAULT_BOOTSTRAP,
    stream: Optional[RngStream] = None,
) -> Pi0Estimate:
    """Storey's ratio at the lambda with the smallest bootstrap MSE.

    The MSE at each lambda is taken around the plug-in target
    ``min over lambda of the full-sample ratio``.
    """
    lams = np.asarray(DEFAULT_LAMBDA_GRID if lambda_grid is None else lambda_grid, dtype=float)
    if lams.size == 0:
        raise DomainError("lambda grid is empty")
    if np.any((lams <= 0.0) | (lams >= 1.0)):
        raise DomainError("every lambda must lie in (0, 1)")
    if B < 1:
        raise DomainError("B must be at least 1")
    stream = stream if stream is not None else RngStream(0)
    m = sample.m
    full = _storey_ratio(sample.sorted, lams)
    target = full.min()
    idx = stream.integers(0, m, size=(B, m))
    boot = np.sort(sample.values[idx], axis=1)
    ratios = np.stack([_storey_ratio(row, lams) for row in boot])
    mse = np.mean((ratios - target) ** 2, axis=0)
    best = int(np.argmin(mse))
    value, flagged = _clamp(float(full[best]), m)
    return Pi0Estimate(
        value,
        "storey_bootstrap",
        params={"lambda": float(lams[best]), "raw": float(full[best]), "zero_count": flagged, "B": B},
    )


def bh_pi0_slope(sample: PValueSample) -> Pi0Estimate:
    """Benjamini-Hochberg estimator from the first decrease in the slopes
    S_i = (1 - P_(i)) / (m + 1 - i)."""
    m = sample.m
    if m < 2:
        raise InsufficientDataError("need at least two P values")
    p = sample.sorted
    i = np.arange(1, m + 1)
    slopes = (1.0 - p) / (m + 1 - i)
    drops = np.nonzero(slopes[1:] < slopes[:-1])[0]
    if drops.size == 0:
        return Pi0Estimate(1.0, "bh_slope", params={"j": None, "no_decrease": True})
    j = int(drops[0]) + 2  # 1-based index of the first S_j < S_{j-1}
    s_j = slopes[j - 1]
    m0 = m if s_j <= 0.0 else min(1.0 + 1.0 / s_j, m)
    return Pi0Estimate(m0 / m, "bh_slope", params={"j": j, "m0": m0, "no_decrease": False})
