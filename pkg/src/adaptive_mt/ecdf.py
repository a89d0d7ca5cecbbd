"""P-value container with empirical distribution and quantile functions."""

from __future__ import annotations

import numpy as np

from .errors import DomainError, InsufficientDataError


class PValueSample:
    """An immutable vector of m P values.

    The sorted view, the EDF and the (modified) EQF are all derived from the
    order statistics, which are computed once at construction.
    """

    __slots__ = ("_values", "_sorted")

    def __init__(self, values):
        arr = np.array(values, dtype=float).ravel()
        if arr.size < 1:
            raise InsufficientDataError("need at least one P value")
        if not np.all(np.isfinite(arr)):
            raise DomainError("P values must be finite (NaN/inf rejected)")
        if np.any((arr < 0.0) | (arr > 1.0)):
            raise DomainError("P values must lie in [0, 1]")
        arr.setflags(write=False)
        srt = np.sort(arr, kind="stable")
        srt.setflags(write=False)
        self._values = arr
        self._sorted = srt

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def sorted(self) -> np.ndarray:
        return self._sorted

    @property
    def m(self) -> int:
        return int(self._values.size)

    def __len__(self) -> int:
        return self.m

    def __repr__(self) -> str:
        return f"PValueSample(m={self.m})"

    def edf(self, t):
        """Fraction of P values <= t (vectorised over t)."""
        t_arr = np.asarray(t, dtype=float)
        if not np.all(np.isfinite(t_arr)):
            raise DomainError("t must be finite")
        if np.any((t_arr < 0.0) | (t_arr > 1.0)):
            raise DomainError("t must lie in [0, 1]")
        out = np.searchsorted(self._sorted, t_arr, side="right") / self.m
        return float(out) if out.ndim == 0 else out

    def eqf(self, u):
        """Generalised inverse inf{x : edf(x) >= u}, i.e. P_{ceil(u m):m}.

        ``u = 0`` maps to 0 by convention.
        """
        u_arr = np.asarray(u, dtype=float)
        if np.any(~np.isfinite(u_arr)) or np.any((u_arr < 0.0) | (u_arr > 1.0)):
            raise DomainError("u must lie in (0, 1]")
        m = self.m
        # ceil(u m) with a guard against u*m landing a hair above an integer
        idx = np.ceil(u_arr * m - 1e-9 * np.maximum(1.0, u_arr * m)).astype(int)
        idx = np.clip(idx, 0, m)
        out = np.where(idx == 0, 0.0, self._sorted[np.maximum(idx - 1, 0)])
        return float(out) if out.ndim == 0 else out

    def modified_eqf(self, t):
        """min{eqf(t), t}; the curve is forced onto or below the diagonal."""
        t_arr = np.asarray(t, dtype=float)
        out = np.minimum(self.eqf(t_arr), t_arr)
        return float(out) if np.ndim(out) == 0 else out


def edf_eval(sample: PValueSample, t: float) -> float:
    return sample.edf(t)


def eqf_eval(sample: PValueSample, u: float) -> float:
    if not 0.0 < u <= 1.0:
        raise DomainError(f"u must lie in (0, 1], got {u!r}")
    return sample.eqf(u)


def modified_eqf_eval(sample: PValueSample, t: float) -> float:
    return sample.modified_eqf(t)
