"""Rejection procedures and exact error evaluators.

Hard thresholding, the Benjamini-Hochberg step-up and its adaptive
variant, q-values, and closed-form ERR / upper-bound evaluators used to
check the threshold's calibration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .backbone import Pi0Estimate
from .ecdf import PValueSample
from .errors import DomainError
from .numeric import RngStream
from .thresholds import DEFAULT_ALPHA0, ThresholdResult, alpha_cal


@dataclass(frozen=True)
class OutcomeTable:
    v: int
    s: int
    r: int
    m0: int
    m1: int

    def __post_init__(self):
        if self.r != self.v + self.s or self.v > self.m0 or self.s > self.m1 or min(self.v, self.s) < 0:
            raise DomainError(f"inconsistent outcome counts {self}")

    @property
    def m(self) -> int:
        return self.m0 + self.m1

    @classmethod
    def from_decisions(cls, rejected: np.ndarray, truth: np.ndarray) -> "OutcomeTable":
        rejected = np.asarray(rejected, dtype=bool)
        truth = np.asarray(truth, dtype=bool)
        if rejected.shape != truth.shape:
            raise DomainError("truth vector length does not match the number of tests")
        v = int(np.count_nonzero(rejected & ~truth))
        s = int(np.count_nonzero(rejected & truth))
        m1 = int(np.count_nonzero(truth))
        return cls(v=v, s=s, r=v + s, m0=truth.size - m1, m1=m1)


def hard_threshold(sample: PValueSample, alpha: float, truth: Optional[Sequence[int]] = None):
    """Reject every hypothesis with P <= alpha.

    Returns the boolean rejection vector, or the OutcomeTable when the true
    alternative indicators are supplied.
    """
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha!r}")
    rejected = sample.values <= alpha
    if truth is None:
        return rejected
    truth_arr = np.asarray(truth)
    if truth_arr.size != sample.m:
        raise DomainError(f"truth has {truth_arr.size} entries, sample has {sample.m}")
    return OutcomeTable.from_decisions(rejected, truth_arr.astype(bool))


def _step_up(sorted_p: np.ndarray, q: float, m_ref: float) -> int:
    m = sorted_p.size
    k = np.arange(1, m + 1)
    ok = np.nonzero(sorted_p <= q * k / m_ref)[0]
    return int(ok[-1]) + 1 if ok.size else 0


def _check_q(q: float) -> None:
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must lie in (0, 1), got {q!r}")


def bh_stepup(sample: PValueSample, q: float) -> ThresholdResult:
    """Benjamini-Hochberg: reject the k* smallest, k* = max{k : P_(k) <= q k / m}."""
    _check_q(q)
    k = _step_up(sample.sorted, q, sample.m)
    alpha = float(sample.sorted[k - 1]) if k else 0.0
    return ThresholdResult(alpha, "bh_stepup", q, 1.0, 1.0, k if k else 0, params={"k": k})


def m0_from_pi0(pi0: Pi0Estimate, m: int) -> int:
    # round half up, never below one
    return max(1, int(math.floor(pi0.value * m + 0.5)))


def adaptive_bh(sample: PValueSample, q: float, pi0: Pi0Estimate) -> ThresholdResult:
    """Step-up with k/m replaced by k/m0_hat."""
    _check_q(q)
    m0 = m0_from_pi0(pi0, sample.m)
    k = _step_up(sample.sorted, q, m0)
    alpha = float(sample.sorted[k - 1]) if k else 0.0
    return ThresholdResult(alpha, "adaptive_bh", q, pi0.value, 1.0, k, params={"k": k, "m0": m0})


def qvalues(sample: PValueSample, pi0: Optional[Pi0Estimate] = None) -> np.ndarray:
    """q_(k) = min_{j >= k} pi0 m P_(j) / j, capped at 1, in input order."""
    m = sample.m
    p0 = 1.0 if pi0 is None else pi0.value
    order = np.argsort(sample.values, kind="stable")
    ranked = p0 * m * sample.values[order] / np.arange(1, m + 1)
    q_sorted = np.minimum.accumulate(ranked[::-1])[::-1]
    out = np.empty(m)
    out[order] = np.minimum(q_sorted, 1.0)
    return out


def qvalue_threshold(sample: PValueSample, q: float, pi0: Optional[Pi0Estimate] = None) -> ThresholdResult:
    """Reject every hypothesis whose q-value is <= q."""
    _check_q(q)
    qv = qvalues(sample, pi0)
    rej = qv <= q
    k = int(np.count_nonzero(rej))
    alpha = float(sample.values[rej].max()) if k else 0.0
    p0 = 1.0 if pi0 is None else pi0.value
    return ThresholdResult(alpha, "qvalue", q, p0, 1.0, k)


def err_exact(cdfs: Sequence[Callable[[float], float]], alpha: float, null_mask: Sequence[bool]) -> float:
    """ERR of hard thresholding at alpha for independent tests with marginal cdfs G_i.

    ``null_mask[i]`` marks true nulls; their cdfs should be uniform.
    Returns pi0 alpha / F_m(alpha) * (1 - prod(1 - G_i(alpha))), with 0 when
    F_m(alpha) = 0.
    """
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha!r}")
    null_mask = np.asarray(null_mask, dtype=bool)
    if null_mask.size != len(cdfs):
        raise DomainError("null_mask length does not match the number of cdfs")
    g = np.array([float(G(alpha)) for G in cdfs])
    m = g.size
    pi0 = np.count_nonzero(null_mask) / m
    f_m = g.mean()
    if f_m <= 0.0 or pi0 == 0.0:
        return 0.0
    p_any = -math.expm1(np.sum(np.log1p(-np.minimum(g, 1.0)))) if np.all(g < 1.0) else 1.0
    return min(pi0 * alpha / f_m * p_any, 1.0)


@dataclass(frozen=True)
class StylizedTailModel:
    """Power-law tails near zero: envelope cdf beta t^eta, alternative cdf psi t^xi."""

    beta: float
    eta: float
    psi: float
    xi: float
    pi0: float
    m: int

    def __post_init__(self):
        if not (self.beta > 0 and 0 < self.eta <= 1 and self.psi > 0 and 0 < self.xi <= 1):
            raise DomainError("tail parameters out of range")
        if not 0 < self.pi0 <= 1:
            raise DomainError("pi0 must lie in (0, 1]")
        if self.m < 1:
            raise DomainError("m must be at least 1")

    def envelope(self, t: float) -> float:
        return self.beta * t**self.eta

    def alt_cdf(self, t: float) -> float:
        return self.psi * t**self.xi


def psi_bound(model: StylizedTailModel, alpha0: float = DEFAULT_ALPHA0, gamma: float = 1.0) -> float:
    """Upper bound on ERR of hard thresholding at the calibrated threshold.

    Evaluated at alpha = A(pi0, gamma) m^-B(pi0, gamma); tail cdfs above 1
    are clamped to 1.
    """
    alpha = alpha_cal(model.m, model.pi0, gamma, alpha0)
    fbar = min(model.envelope(alpha), 1.0)
    h = min(model.alt_cdf(alpha), 1.0)
    ratio = model.pi0 * alpha / (model.pi0 * alpha + (1.0 - model.pi0) * h)
    any_rej = 1.0 if fbar >= 1.0 else -math.expm1(model.m * math.log1p(-fbar))
    return ratio * any_rej


@dataclass(frozen=True)
class OrthantCheck:
    passed: bool
    margin: float
    lhs: float
    rhs: float
    se: float


def orthant_check(
    sampler: Callable[[RngStream, int], np.ndarray],
    alpha: float,
    n_draws: int,
    stream: Optional[RngStream] = None,
) -> OrthantCheck:
    """Monte Carlo check of Pr(all P_i > alpha) >= prod Pr(P_i > alpha).

    ``sampler(stream, n)`` returns an (n, card) array of joint draws. The
    standard error of LHS - RHS comes from the delta-method influence
    function, so correlation between the two sides is accounted for. The
    check passes when LHS >= RHS - 3 SE.
    """
    if n_draws < 2:
        raise DomainError("need at least two draws")
    stream = stream if stream is not None else RngStream(0)
    draws = np.asarray(sampler(stream, n_draws), dtype=float)
    if draws.ndim == 1:
        draws = draws[:, None]
    above = draws > alpha
    all_above = above.all(axis=1).astype(float)
    marg = above.mean(axis=0)
    lhs = float(all_above.mean())
    rhs = float(np.prod(marg))
    with np.errstate(divide="ignore", invalid="ignore"):
        contrib = np.where(marg > 0, (above - marg) / marg, 0.0)
    infl = (all_above - lhs) - rhs * contrib.sum(axis=1)
    se = float(infl.std(ddof=1) / math.sqrt(n_draws))
    margin = lhs - rhs
    return OrthantCheck(passed=margin >= -3.0 * se, margin=margin, lhs=lhs, rhs=rhs, se=se)
