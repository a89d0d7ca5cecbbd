"""Special functions and the seeded random-stream contract."""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

_EPS = 1e-16
_FPMIN = 1e-300
_MAX_ITER = 1000

_lgamma = np.vectorize(math.lgamma, otypes=[float])


def _lgamma_cached(a: np.ndarray) -> np.ndarray:
    # the F test calls this with the same handful of shape parameters
    uniq, inv = np.unique(a, return_inverse=True)
    return _lgamma(uniq)[inv].reshape(a.shape)


def _betacf(a: np.ndarray, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Continued fraction for I_x(a, b), modified Lentz, all entries at once."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for it in range(1, _MAX_ITER + 1):
        m2 = 2.0 * it
        aa = it * (b - it) * x / ((qam + m2) * (a + m2))
        d_new = 1.0 + aa * d
        d_new = np.where(np.abs(d_new) < _FPMIN, _FPMIN, d_new)
        c_new = 1.0 + aa / c
        c_new = np.where(np.abs(c_new) < _FPMIN, _FPMIN, c_new)
        d_new = 1.0 / d_new
        h_new = h * d_new * c_new
        aa = -(a + it) * (qab + it) * x / ((a + m2) * (qap + m2))
        d_new = 1.0 + aa * d_new
        d_new = np.where(np.abs(d_new) < _FPMIN, _FPMIN, d_new)
        c_new = 1.0 + aa / c_new
        c_new = np.where(np.abs(c_new) < _FPMIN, _FPMIN, c_new)
        d_new = 1.0 / d_new
        delta = d_new * c_new
        h_new = h_new * delta
        # freeze converged entries so they stop drifting
        c = np.where(active, c_new, c)
        d = np.where(active, d_new, d)
        h = np.where(active, h_new, h)
        active &= np.abs(delta - 1.0) >= _EPS
        if not active.any():
            break
    return h


def reg_inc_beta(x, p, q):
    """Regularised incomplete beta function I_x(p, q).

    Broadcasts over array arguments. Uses the continued fraction on
    whichever side of ``(p + 1) / (p + q + 2)`` converges quickly.
    """
    x_arr, p_arr, q_arr = np.broadcast_arrays(
        np.asarray(x, dtype=float), np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    )
    if np.any(~np.isfinite(x_arr)) or np.any((x_arr < 0.0) | (x_arr > 1.0)):
        raise DomainError("x must lie in [0, 1]")
    if np.any(~(p_arr > 0.0)) or np.any(~(q_arr > 0.0)):
        raise DomainError("shape parameters must be positive")
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr).astype(float)
    p_arr = np.atleast_1d(p_arr).astype(float)
    q_arr = np.atleast_1d(q_arr).astype(float)

    out = np.empty_like(x_arr)
    lo = x_arr <= 0.0
    hi = x_arr >= 1.0
    out[lo] = 0.0
    out[hi] = 1.0
    mid = ~(lo | hi)
    if mid.any():
        xm, pm, qm = x_arr[mid], p_arr[mid], q_arr[mid]
        log_front = (
            _lgamma_cached(pm + qm) - _lgamma_cached(pm) - _lgamma_cached(qm) + pm * np.log(xm) + qm * np.log1p(-xm)
        )
        front = np.exp(log_front)
        direct = xm < (pm + 1.0) / (pm + qm + 2.0)
        res = np.empty_like(xm)
        if direct.any():
            res[direct] = front[direct] * _betacf(pm[direct], qm[direct], xm[direct]) / pm[direct]
        flip = ~direct
        if flip.any():
            res[flip] = 1.0 - front[flip] * _betacf(qm[flip], pm[flip], 1.0 - xm[flip]) / qm[flip]
        out[mid] = np.clip(res, 0.0, 1.0)
    return float(out[0]) if scalar else out


def f_sf(f, df1, df2):
    """Upper tail Pr(F > f) of the F(df1, df2) distribution."""
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr < 0.0):
        raise DomainError("F statistic must be nonnegative")
    # Pr(F > f) = I_{df2/(df2 + df1 f)}(df2/2, df1/2)
    with np.errstate(over="ignore", invalid="ignore"):
        x = np.where(np.isinf(f_arr), 0.0, df2 / (df2 + df1 * f_arr))
    return reg_inc_beta(x, df2 / 2.0, df1 / 2.0)


class RngStream:
    """A reproducible random stream keyed by ``(seed, stream_id)``.

    Backed by the counter-based Philox generator; the stream id enters the
    key through ``SeedSequence.spawn_key`` so replicate ``r`` of a
    simulation always sees the same draws, whatever thread runs it.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if seed < 0 or stream_id < 0:
            raise DomainError("seed and stream_id must be nonnegative")
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.Philox(ss))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def replay(self) -> "RngStream":
        """A fresh stream positioned at the start of the same sequence."""
        return RngStream(self.seed, self.stream_id)

    def substream(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)

    def normal(self, mu=0.0, sigma=1.0, size=None):
        if np.any(np.asarray(sigma) < 0):
            raise DomainError("sigma must be nonnegative")
        return self.generator.normal(mu, sigma, size)

    def uniform(self, size=None):
        return self.generator.random(size)

    def beta(self, a, b, size=None):
        return self.generator.beta(a, b, size)

    def exponential(self, scale=1.0, size=None):
        return self.generator.exponential(scale, size)

    def integers(self, low, high=None, size=None):
        return self.generator.integers(low, high, size)


def normal_draw(stream: RngStream, mu: float, sigma: float) -> float:
    """One N(mu, sigma^2) variate; ``sigma == 0`` returns ``mu`` exactly."""
    if sigma < 0:
        raise DomainError(f"sigma must be nonnegative, got {sigma!r}")
    if sigma == 0:
        return float(mu)
    return float(stream.normal(mu, sigma))


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_min(f, lo: float, hi: float, tol: float = 1e-4, max_iter: int = 200):
    """Minimise a unimodal f on [lo, hi]; returns (argmin, f(argmin)).

    The endpoints are compared against the interior optimum so a minimum
    sitting on the boundary is not missed.
    """
    if hi < lo:
        raise DomainError("empty bracket")
    a, b = lo, hi
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
    best_x, best_f = (x1, f1) if f1 <= f2 else (x2, f2)
    for x in (lo, hi):
        fx = f(x)
        if fx < best_f:
            best_x, best_f = x, fx
    return best_x, best_f
