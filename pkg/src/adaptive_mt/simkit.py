"""Gene-pathway benchmark models, ANOVA P values and the Monte Carlo harness.

Each replicate draws its data from ``RngStream(seed, r)``, so a report is
reproducible bit for bit no matter how replicates are spread over threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .backbone import Pi0Estimate, pi0_backbone
from .ecdf import PValueSample
from .errors import DomainError
from .numeric import RngStream, f_sf
from .pi0_baselines import bh_pi0_slope, storey_pi0, storey_pi0_bootstrap
from .procedures import OutcomeTable, adaptive_bh, bh_stepup, qvalue_threshold
from .thresholds import DEFAULT_ALPHA0, alpha_hat_cal

N_GROUPS = 4
PER_GROUP = 3
PATHWAY_VARS = (1, 2, 3, 4, 190, 221)
X1_NOISE_SD = 0.28  # variance 0.0784, fixed for every model
FDR_LEVELS = (0.01, 0.05, 0.10, 0.15, 0.20, 0.30, 0.40, 0.60, 0.70)
THREADS_ENV = "ADAPTIVE_MT_THREADS"


@dataclass(frozen=True)
class AltRule:
    """Variables lo..hi (inclusive) built as coef * X_source + noise.

    ``source=None`` means the lag rule X_i = coef * X_{i - lag}.
    """

    lo: int
    hi: int
    source: Optional[int]
    coef: float = 1.0
    lag: int = 0

    @property
    def indices(self) -> range:
        return range(self.lo, self.hi + 1)

    def source_of(self, i: int) -> int:
        return self.source if self.source is not None else i - self.lag


_MODEL1_RULES = (
    AltRule(5, 16, 1),
    AltRule(17, 25, 1, -1.0),
    AltRule(26, 60, 2),
    AltRule(61, 70, 2, -1.0),
    AltRule(71, 100, 3),
    AltRule(101, 110, 3, -1.0),
    AltRule(111, 150, 4),
    AltRule(151, 189, 4, -1.0),
    AltRule(191, 210, 190),
    AltRule(211, 220, 190, -1.0),
    AltRule(222, 250, 221),
    AltRule(251, 500, None, 2.0, lag=250),
)
_MODEL3_RULES = _MODEL1_RULES[:-1]
_MODEL5_RULES = (
    AltRule(5, 8, 1),
    AltRule(9, 12, 2),
    AltRule(13, 16, 3),
    AltRule(17, 20, 4),
    AltRule(191, 195, 190),
    AltRule(222, 226, 221),
)
_MODEL9_RULES = (
    AltRule(5, 6, 1),
    AltRule(7, 8, 2),
    AltRule(9, 10, 3),
    AltRule(11, 12, 4),
    AltRule(191, 191, 190),
)

# model id -> (m, m1, sigma, rules)
TABLE3 = {
    1: (3000, 500, 3.0, _MODEL1_RULES),
    2: (3000, 500, 1.0, _MODEL1_RULES),
    3: (3000, 250, 3.0, _MODEL3_RULES),
    4: (3000, 250, 1.0, _MODEL3_RULES),
    5: (3000, 32, 3.0, _MODEL5_RULES),
    6: (3000, 32, 1.0, _MODEL5_RULES),
    7: (3000, 6, 3.0, ()),
    8: (3000, 6, 1.0, ()),
    9: (10000, 15, 3.0, _MODEL9_RULES),
    10: (10000, 15, 1.0, _MODEL9_RULES),
}


def _expand(rules: Iterable[AltRule]) -> list[tuple[int, int, float]]:
    out = []
    for rule in rules:
        out.extend((i, rule.source_of(i), rule.coef) for i in rule.indices)
    return out


@dataclass(frozen=True)
class SimModelConfig:
    model_id: int
    m: int
    m1: int
    sigma: float
    rules: tuple = ()
    n_groups: int = N_GROUPS
    per_group: int = PER_GROUP
    derived: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.sigma <= 0:
            raise DomainError("sigma must be positive")
        if self.m < max(PATHWAY_VARS):
            raise DomainError(f"m must be at least {max(PATHWAY_VARS)} to hold the pathway variables")
        derived = tuple(sorted(_expand(self.rules)))
        alt = set(PATHWAY_VARS) | {i for i, _, _ in derived}
        if len(alt) != len(PATHWAY_VARS) + len(derived):
            raise DomainError("alternative rules overlap")
        if max(alt) > self.m:
            raise DomainError("alternative index beyond m")
        for i, src, _ in derived:
            if src >= i or src not in alt:
                raise DomainError(f"variable {i} depends on non-alternative or later variable {src}")
        if len(alt) != self.m1:
            raise DomainError(f"rules define {len(alt)} alternatives but m1 = {self.m1}")
        object.__setattr__(self, "derived", derived)

    @property
    def pi0(self) -> float:
        return 1.0 - self.m1 / self.m

    @property
    def n_obs(self) -> int:
        return self.n_groups * self.per_group

    @property
    def alternatives(self) -> list[int]:
        return sorted(set(PATHWAY_VARS) | {i for i, _, _ in self.derived})

    def draw(self, stream: RngStream):
        data = gen_pathway_dataset(self, stream)
        return anova_f_pvalues(data.values, data.groups), data.truth


def table3_config(model_id: int) -> SimModelConfig:
    if model_id not in TABLE3:
        raise DomainError(f"unknown model id {model_id}; valid ids are {sorted(TABLE3)}")
    m, m1, sigma, rules = TABLE3[model_id]
    return SimModelConfig(model_id, m, m1, sigma, rules)


def scaled_config(config: SimModelConfig, m: int, m1: Optional[int] = None) -> SimModelConfig:
    """Shrink a model to m variables.

    The alternative count scales with m unless given (never below the six
    pathway variables); the derived alternatives kept are the first ones by
    index, which keeps every source variable inside the kept set.
    """
    if m1 is None:
        m1 = max(len(PATHWAY_VARS), int(round(config.m1 * m / config.m)))
    n_derived = m1 - len(PATHWAY_VARS)
    derived = list(config.derived)
    if n_derived < 0 or n_derived > len(derived):
        raise DomainError(f"cannot build {m1} alternatives from model {config.model_id}")
    keep = derived[:n_derived]
    rules = tuple(AltRule(i, i, src, coef) for i, src, coef in keep)
    return SimModelConfig(config.model_id, m, m1, config.sigma, rules)


@dataclass(frozen=True)
class PathwayData:
    values: np.ndarray  # (m, n_obs); row i-1 is variable X_i
    truth: np.ndarray  # (m,) True for alternatives
    latent: np.ndarray  # X_0, (n_obs,)
    groups: np.ndarray  # (n_obs,) group labels 0..K-1


def gen_pathway_dataset(config: SimModelConfig, stream: RngStream) -> PathwayData:
    sigma = config.sigma
    K, n = config.n_groups, config.per_group
    groups = np.repeat(np.arange(K), n)
    noise = stream.normal(0.0, sigma, size=(config.m, K * n))
    x0 = np.where(groups == 0, 0.0, 8.0) + stream.normal(0.0, sigma, size=K * n)
    x1_noise = stream.normal(0.0, X1_NOISE_SD, size=K * n)

    def off(vals):
        return np.asarray(vals, dtype=float)[groups]

    X = noise  # unlisted variables are pure N(0, sigma^2)
    X[0] = x0 / 4.0 + x1_noise
    X[1] = x0 + off([0, 0, 6, 14]) + noise[1]
    X[2] = X[1] + noise[2]
    X[3] = X[1] + off([0, 0, -6, -8]) + noise[3]
    x3, x4 = X[2], X[3]
    g = groups
    x190 = np.select([g == 0, g == 1, g == 2], [x3 + 24.0, x3 + x4, x3 - x4 - 6.0], x3 - 14.0)
    x221 = np.select([g <= 1, g == 2], [x3 + 24.0, x3 - x4], x3 + 2.0)
    X[189] = x190 + noise[189]
    X[220] = x221 + noise[220]
    for i, src, coef in config.derived:
        X[i - 1] = coef * X[src - 1] + noise[i - 1]

    truth = np.zeros(config.m, dtype=bool)
    truth[np.array(config.alternatives) - 1] = True
    return PathwayData(values=X, truth=truth, latent=x0, groups=groups)


def anova_f_pvalues(values: np.ndarray, groups: np.ndarray) -> np.ndarray:
    """One-way ANOVA F-test P values for every row of ``values``.

    Rows with no within-group variation get P = 1 when the group means
    agree and P = 0 otherwise.
    """
    values = np.atleast_2d(np.asarray(values, dtype=float))
    groups = np.asarray(groups)
    labels, inv = np.unique(groups, return_inverse=True)
    K = labels.size
    N = groups.size
    if K < 2 or N <= K:
        raise DomainError("need at least two groups and more observations than groups")
    counts = np.bincount(inv, minlength=K).astype(float)
    sums = np.zeros((values.shape[0], K))
    for k in range(K):
        sums[:, k] = values[:, inv == k].sum(axis=1)
    means = sums / counts
    grand = values.mean(axis=1, keepdims=True)
    ssb = np.sum(counts * (means - grand) ** 2, axis=1)
    ssw = np.sum((values - means[:, inv]) ** 2, axis=1)
    scale = np.maximum(np.sum(values**2, axis=1), 1.0)
    tiny = 1e-24 * scale
    df1, df2 = K - 1, N - K
    zero_w = ssw <= tiny
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(zero_w, 0.0, (ssb / df1) / (ssw / df2))
    p = f_sf(np.maximum(f, 0.0), df1, df2)
    p = np.where(zero_w & (ssb > tiny), 0.0, p)
    p = np.where(zero_w & (ssb <= tiny), 1.0, p)
    return np.atleast_1d(p)


def anova_f_pvalue(groups: Sequence[Sequence[float]]) -> float:
    if len(groups) < 2 or any(len(g) < 1 for g in groups):
        raise DomainError("need at least two nonempty groups")
    values = np.concatenate([np.asarray(g, dtype=float) for g in groups])
    labels = np.concatenate([np.full(len(g), k) for k, g in enumerate(groups)])
    return float(anova_f_pvalues(values[None, :], labels)[0])


def _uniform_sampler(stream: RngStream, size):
    return stream.uniform(size)


def _exp_sampler(stream: RngStream, size):
    return stream.exponential(1.0, size)


def orthant_generator(
    card: int,
    f0: Callable = _uniform_sampler,
    h: Callable = _exp_sampler,
    stream: Optional[RngStream] = None,
    size: Optional[int] = None,
) -> np.ndarray:
    """Dependent P values P_j = P0^{X_j}, j = 1..card.

    ``f0(stream, n)`` draws the shared P0 and ``h(stream, shape)`` the
    exponents X_j; defaults are U(0, 1) and Exp(1). Returns one vector of
    length ``card``, or a (size, card) array.
    """
    if card < 1:
        raise DomainError("card must be at least 1")
    stream = stream if stream is not None else RngStream(0)
    n = 1 if size is None else size
    p0 = np.asarray(f0(stream, n), dtype=float).reshape(n, 1)
    x = np.asarray(h(stream, (n, card)), dtype=float).reshape(n, card)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(x == 0.0, 1.0, p0**x)
    return p[0] if size is None else p


def orthant_sampler(card: int, f0: Callable = _uniform_sampler, h: Callable = _exp_sampler):
    """Adapter giving ``orthant_generator`` the sampler signature of orthant_check."""

    def sampler(stream: RngStream, n: int) -> np.ndarray:
        return orthant_generator(card, f0, h, stream, size=n)

    return sampler


@dataclass(frozen=True)
class BetaMixture:
    """m - m1 uniform null P values and m1 Beta(a, b) alternatives."""

    m: int
    m1: int
    a: float
    b: float

    @property
    def pi0(self) -> float:
        return 1.0 - self.m1 / self.m

    def draw(self, stream: RngStream):
        p = np.concatenate([stream.uniform(self.m - self.m1), stream.beta(self.a, self.b, self.m1)])
        truth = np.zeros(self.m, dtype=bool)
        truth[self.m - self.m1 :] = True
        return p, truth


# ---------------------------------------------------------------- methods


class Replicate:
    """One simulated data set, with per-replicate caching of pi0 estimates."""

    def __init__(self, pvalues: np.ndarray, truth: np.ndarray, stream: RngStream):
        self.sample = PValueSample(pvalues)
        self.truth = truth
        self.stream = stream
        self._pi0: dict[str, Pi0Estimate] = {}

    def pi0(self, name: str) -> Pi0Estimate:
        if name not in self._pi0:
            self._pi0[name] = PI0_ESTIMATORS[name](self.sample, self.stream)
        return self._pi0[name]


PI0_ESTIMATORS: dict[str, Callable[[PValueSample, RngStream], Pi0Estimate]] = {
    "backbone": lambda s, rng: pi0_backbone(s),
    "backbone_unguarded": lambda s, rng: pi0_backbone(s, guard=False),
    "storey": lambda s, rng: storey_pi0(s, 0.5),
    "storey_bootstrap": lambda s, rng: storey_pi0_bootstrap(s, stream=rng),
    "bh_slope": lambda s, rng: bh_pi0_slope(s),
}


@dataclass(frozen=True)
class BH:
    q: float
    name: str = "bh"

    def __call__(self, rep: Replicate) -> np.ndarray:
        res = bh_stepup(rep.sample, self.q)
        return rep.sample.values <= res.alpha if res.rejections else np.zeros(rep.sample.m, bool)


@dataclass(frozen=True)
class AdaptiveBH:
    q: float
    estimator: str = "bh_slope"
    name: str = "abh"

    def __call__(self, rep: Replicate) -> np.ndarray:
        res = adaptive_bh(rep.sample, self.q, rep.pi0(self.estimator))
        return rep.sample.values <= res.alpha if res.rejections else np.zeros(rep.sample.m, bool)


@dataclass(frozen=True)
class QValue:
    q: float
    estimator: str = "storey_bootstrap"
    name: str = "qvalue"

    def __call__(self, rep: Replicate) -> np.ndarray:
        res = qvalue_threshold(rep.sample, self.q, rep.pi0(self.estimator))
        return rep.sample.values <= res.alpha if res.rejections else np.zeros(rep.sample.m, bool)


@dataclass(frozen=True)
class API:
    alpha0: float = DEFAULT_ALPHA0
    name: str = "api"

    def __call__(self, rep: Replicate) -> np.ndarray:
        res = alpha_hat_cal(rep.sample, self.alpha0, rep.pi0("backbone"))
        return rep.sample.values <= res.alpha


@dataclass(frozen=True)
class HardThreshold:
    alpha: float
    name: str = "ht"

    def __call__(self, rep: Replicate) -> np.ndarray:
        return rep.sample.values <= self.alpha


def reject_all(rep: Replicate) -> np.ndarray:
    return np.ones(rep.sample.m, dtype=bool)


def reject_none(rep: Replicate) -> np.ndarray:
    return np.zeros(rep.sample.m, dtype=bool)


# ---------------------------------------------------------------- harness


@dataclass(frozen=True)
class MCReport:
    fdr_hat: float
    fndp_hat: float
    err_hat: float
    perr_hat: float
    reps: int
    per_rep: tuple  # (V, S, R) per replicate
    seed: int
    m0: int
    m1: int

    @classmethod
    def from_counts(cls, per_rep: Sequence[tuple[int, int, int]], m0: int, m1: int, seed: int) -> "MCReport":
        arr = np.asarray(per_rep, dtype=float).reshape(-1, 3)
        v, s, r = arr[:, 0], arr[:, 1], arr[:, 2]
        reps = arr.shape[0]
        with np.errstate(divide="ignore", invalid="ignore"):
            fdp = np.where(r > 0, (r - s) / np.where(r > 0, r, 1.0), 0.0)
        fdr = math.fsum(fdp) / reps
        fndp = math.fsum((m1 - s) / m1) / reps if m1 > 0 else 0.0
        mean_r = r.mean()
        if mean_r > 0:
            perr = float(v.mean() / mean_r)
            err = perr * float(np.mean(r > 0))
        else:
            perr = err = 0.0
        return cls(
            fdr_hat=fdr,
            fndp_hat=fndp,
            err_hat=err,
            perr_hat=perr,
            reps=reps,
            per_rep=tuple((int(a), int(b), int(c)) for a, b, c in arr),
            seed=seed,
            m0=m0,
            m1=m1,
        )

    @property
    def fdp(self) -> np.ndarray:
        arr = np.asarray(self.per_rep, dtype=float).reshape(-1, 3)
        r, s = arr[:, 2], arr[:, 1]
        return np.where(r > 0, (r - s) / np.where(r > 0, r, 1.0), 0.0)

    @property
    def fdr_se(self) -> float:
        f = self.fdp
        return float(f.std(ddof=1) / math.sqrt(f.size)) if f.size > 1 else 0.0


def worker_count(requested: Optional[int] = None) -> int:
    cap = os.environ.get(THREADS_ENV)
    n = requested if requested is not None else (os.cpu_count() or 1)
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise DomainError(f"{THREADS_ENV} must be an integer, got {cap!r}") from None
    return max(1, n)


def _run_replicate(source, methods: Mapping[str, Callable], seed: int, r: int):
    stream = RngStream(seed, r)
    pvalues, truth = source.draw(stream)
    rep = Replicate(pvalues, np.asarray(truth, dtype=bool), stream)
    out = {}
    for name, method in methods.items():
        table = OutcomeTable.from_decisions(np.asarray(method(rep), dtype=bool), rep.truth)
        out[name] = (table.v, table.s, table.r)
    m1 = int(rep.truth.sum())
    return out, rep.truth.size - m1, m1


def mc_harness_multi(
    source,
    methods: Mapping[str, Callable],
    reps: int,
    seed: int,
    workers: Optional[int] = 1,
) -> dict[str, MCReport]:
    """Run several methods on the same replicates; one report per method.

    ``source`` is any object with ``draw(stream) -> (pvalues, truth)``,
    e.g. a SimModelConfig or BetaMixture. Methods take a Replicate and
    return a boolean rejection vector.
    """
    if reps < 1:
        raise DomainError("reps must be at least 1")
    n_workers = worker_count(workers)
    if n_workers == 1:
        results = [_run_replicate(source, methods, seed, r) for r in range(reps)]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(lambda r: _run_replicate(source, methods, seed, r), range(reps)))
    m0, m1 = results[0][1], results[0][2]
    return {name: MCReport.from_counts([res[0][name] for res in results], m0, m1, seed) for name in methods}


def mc_harness(source, method: Callable, reps: int, seed: int, workers: Optional[int] = 1) -> MCReport:
    return mc_harness_multi(source, {"method": method}, reps, seed, workers)["method"]


# ---------------------------------------------------------------- pi0 study


@dataclass(frozen=True)
class Pi0Summary:
    model_id: int
    estimator: str
    true_pi0: float
    mean: float
    bias: float
    rmse: float
    reps: int


def _pi0_replicate(source, estimators: Sequence[str], seed: int, r: int) -> list[float]:
    stream = RngStream(seed, r)
    pvalues, truth = source.draw(stream)
    rep = Replicate(pvalues, np.asarray(truth, dtype=bool), stream)
    return [rep.pi0(name).value for name in estimators]


def compare_pi0(
    source,
    estimators: Sequence[str] = ("backbone", "storey_bootstrap", "bh_slope"),
    reps: int = 200,
    seed: int = 0,
    workers: Optional[int] = 1,
) -> list[Pi0Summary]:
    """Root-MSE and bias of each estimator against the source's true pi0."""
    if reps < 1:
        raise DomainError("reps must be at least 1")
    unknown = [e for e in estimators if e not in PI0_ESTIMATORS]
    if unknown:
        raise DomainError(f"unknown estimators {unknown}; choose from {sorted(PI0_ESTIMATORS)}")
    n_workers = worker_count(workers)
    if n_workers == 1:
        rows = [_pi0_replicate(source, estimators, seed, r) for r in range(reps)]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            rows = list(pool.map(lambda r: _pi0_replicate(source, estimators, seed, r), range(reps)))
    est = np.asarray(rows)
    truth = source.pi0
    out = []
    for j, name in enumerate(estimators):
        err = est[:, j] - truth
        out.append(
            Pi0Summary(
                model_id=getattr(source, "model_id", 0),
                estimator=name,
                true_pi0=truth,
                mean=float(est[:, j].mean()),
                bias=float(err.mean()),
                rmse=float(np.sqrt(np.mean(err**2))),
                reps=reps,
            )
        )
    return out
