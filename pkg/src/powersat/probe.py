"""Monte Carlo checks of the probabilistic facts behind the threshold.

Every estimate comes with a standard error.  Per-trial random streams are
derived from (seed, probe tag, n, trial), so results do not depend on the
order in which trials are evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dist import DIVERGENT, DistSpec, moment, sample_many, tail
from .genmodel import Formula, sample_formula, stats
from .rng import derive_stream
from .solver import (DEFAULT_CAP, DEFAULT_MAX_LEN, DEFAULT_MAX_STEPS, contradiction_bicycle, decide,
                     enumerate_bicycles, validate_bicycle)
from .tspan import ClonePool, SpanState, tspan
from .zeta import riemann_zeta

MAX_DEGREE = "MaxDegree"
SUM_DEGREES = "SumDegrees"

# integer tags keep the per-probe streams apart
_TAG_SCALING, _TAG_PAIR, _TAG_AZUMA, _TAG_BICYCLE, _TAG_INCREMENT = 1, 2, 3, 4, 5


@dataclass
class ScalingReport:
    statistic: str
    ns: list
    medians: list
    fitted_exponent: float
    exponent_stderr: float
    trials: int
    seed: int
    values: np.ndarray = field(repr=False, default=None)  # (len(ns), trials)

    @property
    def residuals(self) -> np.ndarray:
        x, y = np.log(self.ns), np.log(self.medians)
        intercept = np.mean(y) - self.fitted_exponent * np.mean(x)
        return y - (intercept + self.fitted_exponent * x)


def loglog_fit(xs, ys) -> tuple[float, float]:
    """Least-squares slope of log y on log x, with its standard error."""
    x, y = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (y - y.mean())) / sxx
    resid = y - y.mean() - slope * xc
    dof = len(x) - 2
    stderr = math.sqrt(float(resid @ resid) / dof / sxx) if dof > 0 else math.nan
    return slope, stderr


def scaling_probe(dist: DistSpec, statistic: str, ns, trials: int, seed: int) -> ScalingReport:
    """Median of max d_i or of sum d_i over i.i.d. degree draws, per n.

    Degrees are drawn without the parity conditioning of the formula
    model; the statistics concern the i.i.d. sequence itself.
    """
    ns = [int(n) for n in ns]
    if len(ns) < 3 or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("need at least 3 strictly increasing values of n")
    if trials < 10:
        raise ValueError("need at least 10 trials per n")
    if statistic not in (MAX_DEGREE, SUM_DEGREES):
        raise ValueError(f"unknown statistic {statistic!r}")
    reduce = np.max if statistic == MAX_DEGREE else np.sum
    values = np.empty((len(ns), trials), dtype=np.float64)
    for i, n in enumerate(ns):
        for j in range(trials):
            rng = derive_stream(seed, _TAG_SCALING, n, j)
            values[i, j] = reduce(sample_many(dist, n, rng))
    medians = np.median(values, axis=1)
    slope, stderr = loglog_fit(ns, medians)
    return ScalingReport(statistic, ns, medians.tolist(), slope, stderr, trials, seed, values)


@dataclass
class PairMomentEstimate:
    mean: float
    stderr: float
    reference: float | object
    samples: int
    nonconvergent_reference: bool
    tail_check: dict = field(default_factory=dict)  # l -> (empirical F_{d+d-}(l), 2 F_xi(sqrt l))


def pair_moment_probe(dist: DistSpec, n: int, trials: int, seed: int,
                      tail_points=(1, 4, 16, 64)) -> PairMomentEstimate:
    """Mean of d+ d- over all variables of `trials` generated 2-CNFs.

    The reference value is (E xi^2 - E xi) / 4; when E xi^2 diverges the
    estimate is still returned, flagged ``nonconvergent_reference``.
    """
    products = []
    for j in range(trials):
        f = sample_formula(dist, n, 2, derive_stream(seed, _TAG_PAIR, n, j))
        products.append(f.lit_degrees[:, 0] * f.lit_degrees[:, 1])
    prod = np.concatenate(products).astype(np.float64)
    mean = float(prod.mean())
    stderr = float(prod.std(ddof=1) / math.sqrt(prod.size)) if prod.size > 1 else math.nan
    m2 = moment(dist, 2)
    if m2 is DIVERGENT:
        reference = DIVERGENT
    else:
        reference = (m2 - moment(dist, 1)) / 4.0
    tail_check = {}
    for ell in tail_points:
        bound = 2.0 * tail(dist, math.ceil(math.sqrt(ell)))
        tail_check[ell] = (float(np.mean(prod >= ell)), bound)
    return PairMomentEstimate(mean, stderr, reference, int(prod.size), reference is DIVERGENT, tail_check)


@dataclass
class AzumaResult:
    empirical: float
    bound: float
    sigma_hat: float
    trials: int
    shift: float

    @property
    def holds(self) -> bool:
        return self.empirical <= self.bound + 3.0 * self.sigma_hat


def azuma_bound(mu: float, t: int, eps: float, x0: float = 0.0) -> float:
    """exp(-(t + X0) mu^2 (1/2 - eps)^2 / (4 log^2 t))."""
    return math.exp(-(t + x0) * mu * mu * (0.5 - eps) ** 2 / (4.0 * math.log(t) ** 2))


def azuma_shift(mu: float, alpha: float) -> float:
    """c such that X = Y - 1 - c has mean mu, Y with tail min(1, l^-alpha)."""
    return riemann_zeta(alpha) - 1.0 - mu


def azuma_probe(mu: float, alpha: float, t: int, eps: float, trials: int, seed: int,
                x0: float = 0.0, law: str = "pareto", chunk: int = 2 ** 22) -> AzumaResult:
    """Empirical Pr[X0 + sum_{i<=t} X_i <= eps mu t] against the analytic bound.

    ``law="pareto"``: X_i = Y_i - 1 - c with Y_i i.i.d. with tail
    min(1, l^-alpha) and c chosen so that E X_i = mu exactly.  Then
    X_i >= -c >= -1 and Pr[X_i >= l] = (l + 1 + c)^-alpha <= l^-alpha.
    ``law="constant"``: X_i = mu deterministically.
    """
    if not 0.0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    if not alpha > 1.0:
        raise ValueError("alpha must exceed 1")
    if not mu > 0.0:
        raise ValueError("mu must be positive")
    if t < 2 or trials < 1 or x0 < 0:
        raise ValueError("need t >= 2, trials >= 1 and X0 >= 0")
    level = eps * mu * t
    bound = azuma_bound(mu, t, eps, x0)
    if law == "constant":
        hits = int(x0 + mu * t <= level) * trials
        return AzumaResult(hits / trials, bound, 0.0, trials, 0.0)
    if law != "pareto":
        raise ValueError(f"unknown increment law {law!r}")
    c = azuma_shift(mu, alpha)
    if not -1.0 <= c <= 1.0:
        raise ValueError(f"mu={mu} with alpha={alpha} needs shift {c:.4f} outside [-1, 1]")
    rng = derive_stream(seed, _TAG_AZUMA, t, int(round(mu * 1e6)), int(round(eps * 1e6)))
    rows = max(1, chunk // t)
    hits = 0
    done = 0
    while done < trials:
        m = min(rows, trials - done)
        y = sample_many(DistSpec.pareto(alpha), (m, t), rng)
        walk = x0 + (y.sum(axis=1) - t * (1.0 + c))
        hits += int(np.count_nonzero(walk <= level))
        done += m
    p = hits / trials
    return AzumaResult(p, bound, math.sqrt(p * (1.0 - p) / trials), trials, c)


def heavy_clause_count(f: Formula, vars) -> int:
    """Number of clauses whose variables all lie in `vars` (1-based indices)."""
    chosen = set(int(v) for v in vars)
    if len(chosen) != f.k:
        raise ValueError(f"need exactly k={f.k} distinct variables")
    if f.n_clauses == 0:
        return 0
    inside = np.isin(np.abs(f.clauses), np.fromiter(chosen, dtype=np.int64))
    return int(np.count_nonzero(inside.all(axis=1)))


def top_degree_vars(f: Formula, count: int) -> list[int]:
    order = np.argsort(-f.degrees, kind="stable")
    return (order[:count] + 1).tolist()


@dataclass
class BicycleReport:
    counts: list
    verdicts: list
    bounds: list
    mean: float
    stderr: float
    mean_bound: float
    complete: list  # whether the enumeration ran to the end in each trial
    inconsistent: int  # UNSAT trials with no bicycle from either the search or G_I's cycles


def bicycle_bound(stats_, max_len: int) -> float:
    """sum_{s=1..max_len} (2 Delta^2 / S_n) ratio^s."""
    r = stats_.ratio
    lead = 2.0 * stats_.Delta ** 2 / stats_.S_n
    return lead * sum(r ** s for s in range(1, max_len + 1))


def bicycle_count_probe(dist: DistSpec, n: int, trials: int, max_len: int = DEFAULT_MAX_LEN,
                        seed: int = 0, cap: int = DEFAULT_CAP,
                        max_steps: int = DEFAULT_MAX_STEPS) -> BicycleReport:
    """Bicycle counts per trial, their bound, and a consistency check.

    An UNSAT trial whose bounded search returned nothing is checked against
    the bicycle read off its contradictory paths in G_I; it counts as
    inconsistent only if that bicycle does not validate either.
    """
    counts, verdicts, bounds, complete = [], [], [], []
    inconsistent = 0
    for j in range(trials):
        f = sample_formula(dist, n, 2, derive_stream(seed, _TAG_BICYCLE, n, j))
        digest = decide(f)
        found, done = enumerate_bicycles(f, max_len=max_len, cap=cap, max_steps=max_steps)
        for b in found:
            if not validate_bicycle(f, b):
                raise AssertionError("bicycle search returned an invalid bicycle")
        counts.append(len(found))
        complete.append(done)
        verdicts.append(digest.verdict)
        bounds.append(bicycle_bound(stats(f), max_len))
        if not digest.is_sat and not found:
            inconsistent += not validate_bicycle(f, contradiction_bicycle(f, digest))
    arr = np.asarray(counts, dtype=float)
    stderr = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return BicycleReport(counts, verdicts, bounds, float(arr.mean()), stderr,
                         float(np.mean(bounds)), complete, inconsistent)


@dataclass
class IncrementReport:
    increments: np.ndarray
    mu: float
    mean: float
    stderr: float

    def tail(self, ell: int) -> tuple[float, float]:
        """Empirical Pr[X >= ell] and its standard error."""
        p = float(np.mean(self.increments >= ell))
        return p, math.sqrt(p * (1.0 - p) / self.increments.size)


def increment_probe(dist: DistSpec, n: int, steps: int, seed: int,
                    connected_frac: float = 0.01) -> IncrementReport:
    """Live-set increments X_i = L_i - L_{i-1} of TSPAN with lazy pairing.

    Each pool holds a fresh degree sequence with Bin(d, 1/2) polarities.
    Spans are restarted from a uniform unpaired clone whenever the live set
    empties, and a new pool is drawn once |C| reaches connected_frac * n.
    mu is the realised ratio minus one, averaged over the pools used.
    """
    out: list[int] = []
    mus = []
    pool_index = 0
    while len(out) < steps:
        rng = derive_stream(seed, _TAG_INCREMENT, n, pool_index)
        pool_index += 1
        degrees = sample_many(dist, n, rng)
        if int(degrees.sum()) % 2:
            continue
        pos = rng.binomial(degrees, 0.5)
        lit_degrees = np.stack([pos, degrees - pos], axis=1)
        mus.append(2.0 * float((pos * (degrees - pos)).sum()) / float(degrees.sum()) - 1.0)
        pool = ClonePool.from_lit_degrees(lit_degrees)
        cap = max(2, int(connected_frac * n))
        while len(out) < steps and pool.n_connected + 2 <= cap:
            start = int(rng.integers(pool.size))
            if pool.paired[start]:
                continue
            span = SpanState.start_at(pool, start)
            tspan(span, math.inf, steps - len(out), rng, max_connected=cap)
            span.detach()
            out.extend(np.diff(span.live_count_history).tolist())
    arr = np.asarray(out[:steps], dtype=np.int64)
    mean = float(arr.mean())
    stderr = float(arr.std(ddof=1) / math.sqrt(arr.size))
    return IncrementReport(arr, float(np.mean(mus)), mean, stderr)
