"""Clamped B-splines on [0, 1] and the variation-diminishing spline operator.

The smoothed quantile function is represented as an order-5 (quartic)
B-spline whose coefficients are function values at the Greville abscissae
(Schoenberg's operator). Its derivative, a cubic spline, estimates the
quantile density.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .ecdf import PValueSample
from .errors import DomainError, InsufficientDataError

ORDER = 5

# EDF probe points used to place interior knots near small P values
EDF_KNOT_PROBES = (0.001, 0.003, 0.00625, 0.01, 0.0125, 0.025, 0.05, 0.1, 0.25)


@dataclass(frozen=True)
class KnotVector:
    interior: np.ndarray
    order: int = ORDER
    extended: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        interior = np.asarray(self.interior, dtype=float).ravel()
        if interior.size and (np.any(interior <= 0.0) or np.any(interior >= 1.0) or np.any(np.diff(interior) <= 0.0)):
            raise DomainError("interior knots must be strictly increasing inside (0, 1)")
        if self.order < 1:
            raise DomainError("order must be positive")
        interior.setflags(write=False)
        ext = np.concatenate([np.zeros(self.order), interior, np.ones(self.order)])
        ext.setflags(write=False)
        object.__setattr__(self, "interior", interior)
        object.__setattr__(self, "extended", ext)

    @property
    def n(self) -> int:
        """Dimension of the spline space (number of basis functions)."""
        return self.interior.size + self.order

    @property
    def greville(self) -> np.ndarray:
        k = self.order
        t = self.extended
        if k == 1:
            return t[: self.n].copy()
        return np.array([t[j + 1 : j + k].mean() for j in range(self.n)])


def build_knots(sample: PValueSample) -> KnotVector:
    """Interior knots {1/m, ..., 4/m} together with the EDF at the probe points."""
    m = sample.m
    if m < 5:
        raise InsufficientDataError(f"need m >= 5 P values to place knots, got {m}")
    base = np.arange(1, 5) / m
    # EDF values are count/m; build them the same way so duplicates compare equal
    counts = np.searchsorted(sample.sorted, EDF_KNOT_PROBES, side="right")
    edf_knots = counts / m
    cand = np.unique(np.concatenate([base, edf_knots]))
    cand = cand[(cand > 0.0) & (cand < 1.0)]
    if cand.size < 2:
        cand = base
    return KnotVector(cand)


def _span_basis(ext: np.ndarray, order: int, n: int, u: np.ndarray) -> np.ndarray:
    """All n basis values at each u; rows index u. Cox-de Boor recurrence."""
    u = np.asarray(u, dtype=float).ravel()
    nk = ext.size
    # order-1 indicators on [t_i, t_{i+1}); u == 1 goes to the last nonempty span
    B = ((ext[:-1][None, :] <= u[:, None]) & (u[:, None] < ext[1:][None, :])).astype(float)
    last = np.nonzero(ext[:-1] < ext[1:])[0]
    if last.size:
        at_right = u >= ext[-1]
        if at_right.any():
            B[at_right, :] = 0.0
            B[at_right, last[-1]] = 1.0
    for r in range(2, order + 1):
        cols = nk - r
        left_den = ext[r - 1 : r - 1 + cols] - ext[:cols]
        right_den = ext[r : r + cols] - ext[1 : 1 + cols]
        with np.errstate(divide="ignore", invalid="ignore"):
            wl = np.where(left_den > 0, (u[:, None] - ext[:cols]) / left_den, 0.0)
            wr = np.where(right_den > 0, (ext[r : r + cols] - u[:, None]) / right_den, 0.0)
        B = wl * B[:, :cols] + wr * B[:, 1 : cols + 1]
    return B[:, :n]


def basis_matrix(knots: KnotVector, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if np.any(~np.isfinite(u)) or np.any((u < 0.0) | (u > 1.0)):
        raise DomainError("evaluation points must lie in [0, 1]")
    return _span_basis(knots.extended, knots.order, knots.n, u)


def bspline_basis(knots: KnotVector, j: int, u: float) -> float:
    """Value of the j-th (1-based) B-spline of the knot vector at u."""
    if not 1 <= j <= knots.n:
        raise IndexError(f"basis index {j} outside 1..{knots.n}")
    return float(basis_matrix(knots, [u])[0, j - 1])


@dataclass(frozen=True)
class SmoothedEQF:
    """A clamped spline sum_j c_j B_j on [0, 1]."""

    knots: KnotVector
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float).ravel()
        if c.size != self.knots.n:
            raise DomainError(f"expected {self.knots.n} coefficients, got {c.size}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def greville(self) -> np.ndarray:
        return self.knots.greville

    def __call__(self, u):
        u_arr = np.asarray(u, dtype=float)
        vals = basis_matrix(self.knots, u_arr) @ self.coefficients
        return float(vals[0]) if u_arr.ndim == 0 else vals.reshape(u_arr.shape)

    def derivative(self, u):
        """First derivative by the coefficient-difference formula."""
        k = self.knots.order
        if k == 1:
            u_arr = np.asarray(u, dtype=float)
            return 0.0 if u_arr.ndim == 0 else np.zeros(u_arr.shape)
        t = self.knots.extended
        n = self.knots.n
        c = self.coefficients
        den = t[k : k + n - 1] - t[1:n]
        dc = np.where(den > 0, (k - 1) * np.diff(c) / np.where(den > 0, den, 1.0), 0.0)
        u_arr = np.asarray(u, dtype=float)
        if np.any(~np.isfinite(u_arr)) or np.any((u_arr < 0.0) | (u_arr > 1.0)):
            raise DomainError("evaluation points must lie in [0, 1]")
        B = _span_basis(t[1:-1], k - 1, n - 1, u_arr)
        vals = B @ dc
        return float(vals[0]) if u_arr.ndim == 0 else vals.reshape(u_arr.shape)


def vd_spline(h: Callable, knots: KnotVector) -> SmoothedEQF:
    """Schoenberg's variation-diminishing spline: coefficients h(t*_j)."""
    g = knots.greville
    try:
        coef = np.asarray(h(g), dtype=float)
    except TypeError:
        coef = None
    if coef is None or coef.shape != g.shape:
        coef = np.array([float(h(x)) for x in g])
    if not np.all(np.isfinite(coef)):
        raise DomainError("h is not finite at every Greville abscissa")
    return SmoothedEQF(knots, coef)


def spline_derivative(s: SmoothedEQF, u):
    return s.derivative(u)
