"""Power-law degree laws on the positive integers.

Three families are supported:

* ``zeta:<beta>``   Pr[xi = l] = l^-beta / zeta(beta), tail exponent beta - 1
* ``pareto:<alpha>`` tail F(l) = Pr[xi >= l] = min(1, l^-alpha), so V = W = 1
* ``const:<d>``     point mass at d (tail exponent conventionally +inf)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .zeta import hurwitz_zeta, riemann_zeta

TABLE_SIZE = 2 ** 16

# head length of the tail-sum used by moment(); the rest is closed form
_MOMENT_HEAD = 256


class _Divergent:
    """Marker returned by :func:`moment` when the moment is infinite."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "DIVERGENT"

    def __bool__(self):
        return False


DIVERGENT = _Divergent()


def is_divergent(value) -> bool:
    return value is DIVERGENT


@dataclass(frozen=True)
class DistSpec:
    kind: str
    param: float

    def __post_init__(self):
        if self.kind == "zeta":
            if not self.param > 1.0:
                raise ValueError(f"zeta law needs beta > 1, got {self.param}")
        elif self.kind == "pareto":
            if not self.param > 0.0:
                raise ValueError(f"pareto law needs alpha > 0, got {self.param}")
        elif self.kind == "const":
            if int(self.param) != self.param or self.param < 1:
                raise ValueError(f"constant law needs a positive integer, got {self.param}")
            object.__setattr__(self, "param", int(self.param))
        else:
            raise ValueError(f"unknown distribution kind {self.kind!r}")

    @classmethod
    def zeta(cls, beta: float) -> "DistSpec":
        return cls("zeta", float(beta))

    @classmethod
    def pareto(cls, alpha: float) -> "DistSpec":
        return cls("pareto", float(alpha))

    @classmethod
    def const(cls, d: int) -> "DistSpec":
        return cls("const", d)

    @classmethod
    def parse(cls, text: str) -> "DistSpec":
        """Parse the CLI spelling ``zeta:<beta>``, ``pareto:<alpha>``, ``const:<d>``."""
        try:
            kind, value = text.strip().split(":")
        except ValueError:
            raise ValueError(f"cannot parse distribution {text!r}; expected kind:value") from None
        kind = kind.lower()
        if kind == "const":
            return cls.const(int(value))
        if kind in ("zeta", "pareto"):
            return cls(kind, float(value))
        raise ValueError(f"unknown distribution kind {kind!r}")

    def __str__(self):
        if self.kind == "const":
            return f"const:{self.param}"
        return f"{self.kind}:{self.param:g}"

    @property
    def alpha(self) -> float:
        """Tail exponent: F(l) = Theta(l^-alpha)."""
        if self.kind == "zeta":
            return self.param - 1.0
        if self.kind == "pareto":
            return self.param
        return math.inf

    @cached_property
    def _zeta_norm(self) -> float:
        return riemann_zeta(self.param)

    @property
    def tail_constants(self) -> tuple[float, float] | None:
        """(W, V) with W l^-alpha <= F(l) <= V l^-alpha for all l >= 1.

        None for the constant law, which has no power-law tail.
        """
        if self.kind == "pareto":
            return 1.0, 1.0
        if self.kind == "zeta":
            b = self.param
            # l^(1-b)/(b-1) <= zeta(b, l) <= l^(1-b)/(b-1) + l^-b
            upper = b / ((b - 1.0) * self._zeta_norm)
            lower = min(1.0, 1.0 / ((b - 1.0) * self._zeta_norm))
            return lower, upper
        return None

    # table of cdf(l) = 1 - F(l + 1) for l = 1..TABLE_SIZE (zeta only)
    @cached_property
    def _cdf_table(self) -> np.ndarray:
        ell = np.arange(1, TABLE_SIZE + 1, dtype=np.float64)
        pmf = ell ** -self.param / self._zeta_norm
        cdf = np.cumsum(pmf)
        # resync the far end with the exact tail to avoid cumsum drift
        cdf_end = 1.0 - hurwitz_zeta(self.param, TABLE_SIZE + 1.0) / self._zeta_norm
        cdf += (cdf_end - cdf[-1]) * (ell / TABLE_SIZE)
        cdf.setflags(write=False)
        return cdf


def pmf(dist: DistSpec, ell: int) -> float:
    """Pr[xi = ell]."""
    if ell < 1:
        raise ValueError("support is the positive integers")
    if dist.kind == "zeta":
        return ell ** -dist.param / dist._zeta_norm
    if dist.kind == "pareto":
        return ell ** -dist.param - (ell + 1) ** -dist.param
    return 1.0 if ell == dist.param else 0.0


def tail(dist: DistSpec, ell: int) -> float:
    """F(ell) = Pr[xi >= ell]."""
    if ell <= 1:
        return 1.0
    if dist.kind == "zeta":
        return hurwitz_zeta(dist.param, float(ell)) / dist._zeta_norm
    if dist.kind == "pareto":
        return ell ** -dist.param
    return 1.0 if ell <= dist.param else 0.0


def moment(dist: DistSpec, m: int):
    """E[xi^m], or DIVERGENT when m >= alpha.

    Uses the tail-sum identity E xi^m = sum_l (l^m - (l-1)^m) F(l).  The
    first terms are summed directly; the remainder past the head is
    evaluated exactly through Hurwitz zeta values.
    """
    if m < 1:
        raise ValueError("moment order must be a positive integer")
    if dist.kind == "const":
        return float(dist.param) ** m
    if m >= dist.alpha:
        return DIVERGENT
    head_len = _MOMENT_HEAD
    head = math.fsum((ell ** m - (ell - 1) ** m) * tail(dist, ell) for ell in range(1, head_len + 1))
    start = head_len + 1.0
    if dist.kind == "pareto":
        # sum_{l>L} (l^m - (l-1)^m) l^-alpha, expanded binomially
        rest = math.fsum(
            math.comb(m, i) * (-1) ** (i + 1) * hurwitz_zeta(dist.param + i - m, start)
            for i in range(1, m + 1)
        )
    else:
        # swapping the double sum: sum_{j>L} j^-beta (j^m - L^m)
        b = dist.param
        rest = (hurwitz_zeta(b - m, start) - head_len ** m * hurwitz_zeta(b, start)) / dist._zeta_norm
    return head + rest


def criterion_side(dist: DistSpec) -> str:
    """Which side of E xi^2 = 3 E xi the law falls on.

    Returns ``"UNSAT"`` when alpha <= 2 or E xi^2 > 3 E xi, ``"SAT"`` when
    E xi^2 < 3 E xi, and ``"BOUNDARY"`` on exact equality.
    """
    if dist.alpha <= 2.0:
        return "UNSAT"
    m2, m1 = moment(dist, 2), moment(dist, 1)
    if m2 > 3.0 * m1:
        return "UNSAT"
    if m2 < 3.0 * m1:
        return "SAT"
    return "BOUNDARY"


def limit_ratio(dist: DistSpec):
    """(E xi^2 - E xi) / (2 E xi), the large-n value of 2 T_n / S_n."""
    m2 = moment(dist, 2)
    if m2 is DIVERGENT:
        return DIVERGENT
    m1 = moment(dist, 1)
    return (m2 - m1) / (2.0 * m1)


def sample_many(dist: DistSpec, size, rng: np.random.Generator) -> np.ndarray:
    """Vectorised inverse-CDF sampling; returns an int64 array."""
    if dist.kind == "const":
        return np.full(size, dist.param, dtype=np.int64)
    u = rng.random(size)
    if dist.kind == "pareto":
        return _pareto_inverse(1.0 - u, dist.param)
    return _zeta_inverse(u, dist)


def sample(dist: DistSpec, rng: np.random.Generator) -> int:
    """One draw: the least l with 1 - F(l + 1) >= u, u ~ U(0, 1)."""
    return int(sample_many(dist, 1, rng)[0])


def _pareto_inverse(v: np.ndarray, alpha: float) -> np.ndarray:
    # least l with (l+1)^-alpha <= v
    x = np.ceil(v ** (-1.0 / alpha) - 1.0)
    x = np.clip(x, 1.0, 2.0 ** 62)
    return x.astype(np.int64)


def _zeta_inverse(u: np.ndarray, dist: DistSpec) -> np.ndarray:
    cdf = dist._cdf_table
    out = np.searchsorted(cdf, u, side="left").astype(np.int64) + 1
    far = out > TABLE_SIZE
    if np.any(far):
        out[far] = _zeta_far_inverse(1.0 - u[far], dist.param, dist._zeta_norm)
    return out


def _zeta_far_inverse(v: np.ndarray, beta: float, norm: float) -> np.ndarray:
    """Least l with F(l + 1) <= v, for l beyond the table.

    Beyond 2^16 the two-term Euler-Maclaurin tail
    F(x) ~ (x^(1-b)/(b-1) + x^-b / 2) / zeta(b) has relative error ~1e-9.
    """
    target = v * norm

    def approx_tail(x):
        return x ** (1.0 - beta) / (beta - 1.0) + 0.5 * x ** -beta

    guess = np.floor((target * (beta - 1.0)) ** (-1.0 / (beta - 1.0)))
    ell = np.maximum(guess - 1.0, float(TABLE_SIZE + 1))
    ell = np.minimum(ell, 2.0 ** 62)
    for _ in range(4):
        too_small = approx_tail(ell + 1.0) > target
        ell = np.where(too_small, ell + 1.0, ell)
        too_big = (ell > TABLE_SIZE + 1) & (approx_tail(ell) <= target)
        ell = np.where(too_big, ell - 1.0, ell)
    return ell.astype(np.int64)


def solve_beta0(tol: float = 1e-12) -> float:
    """Zeta exponent where E xi^2 = 3 E xi, i.e. zeta(b - 2) = 3 zeta(b - 1).

    Bisection on (3, 6]; below the root E xi^2 > 3 E xi (or diverges).
    """

    def gap(b):
        return riemann_zeta(b - 2.0) - 3.0 * riemann_zeta(b - 1.0)

    lo, hi = 3.0 + 1e-9, 6.0
    if not (gap(lo) > 0.0 > gap(hi)):
        raise RuntimeError("threshold bracket lost its sign change")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def beta0_residual(beta: float) -> float:
    return riemann_zeta(beta - 2.0) - 3.0 * riemann_zeta(beta - 1.0)
