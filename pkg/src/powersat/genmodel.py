"""Configuration-model k-CNF generation and formula statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dist import DistSpec, sample_many

MAX_REJECTIONS = 10 ** 6


class DegenerateParity(RuntimeError):
    """No degree sequence with sum divisible by k could be drawn."""


@dataclass(frozen=True)
class DegreeSequence:
    degrees: np.ndarray
    k: int

    def __post_init__(self):
        degrees = np.asarray(self.degrees, dtype=np.int64)
        if degrees.ndim != 1 or degrees.size == 0:
            raise ValueError("degrees must be a non-empty 1-d sequence")
        if degrees.min() < 1:
            raise ValueError("every degree must be at least 1")
        if int(degrees.sum()) % self.k:
            raise ValueError(f"sum of degrees is not a multiple of k={self.k}")
        degrees.setflags(write=False)
        object.__setattr__(self, "degrees", degrees)

    @property
    def n(self) -> int:
        return int(self.degrees.size)

    @property
    def total(self) -> int:
        return int(self.degrees.sum())


@dataclass(frozen=True)
class Formula:
    """A k-CNF over variables 1..n_vars.

    ``clauses`` is an (m, k) int64 array of signed literals (DIMACS
    convention).  ``lit_degrees[i] = (d+, d-)`` counts the occurrences of
    variable i+1 as a positive and as a negative literal.
    """

    n_vars: int
    k: int
    clauses: np.ndarray
    lit_degrees: np.ndarray

    @classmethod
    def from_clauses(cls, n_vars: int, clauses, k: int | None = None) -> "Formula":
        arr = np.asarray(clauses, dtype=np.int64)
        if arr.size == 0:
            k = 2 if k is None else k
            arr = arr.reshape(0, k)
        if arr.ndim != 2:
            raise ValueError("all clauses must have the same width")
        if k is None:
            k = arr.shape[1]
        elif arr.shape[1] != k:
            raise ValueError(f"clauses have width {arr.shape[1]}, expected {k}")
        if arr.size and (np.any(arr == 0) or np.abs(arr).max() > n_vars):
            raise ValueError("literal out of range")
        flat = arr.ravel()
        var = np.abs(flat) - 1
        pos = np.bincount(var[flat > 0], minlength=n_vars)
        neg = np.bincount(var[flat < 0], minlength=n_vars)
        lit_degrees = np.stack([pos, neg], axis=1).astype(np.int64)
        return cls(n_vars, k, arr, lit_degrees)

    def __post_init__(self):
        self.clauses.setflags(write=False)
        self.lit_degrees.setflags(write=False)

    @property
    def n_clauses(self) -> int:
        return int(self.clauses.shape[0])

    @property
    def degrees(self) -> np.ndarray:
        return self.lit_degrees.sum(axis=1)

    def clause_list(self) -> list[tuple[int, ...]]:
        return [tuple(int(x) for x in row) for row in self.clauses]


@dataclass(frozen=True)
class FormulaStats:
    S_n: int
    T_n: int
    Delta: int
    ratio: float

    @property
    def mu(self) -> float:
        return self.ratio - 1.0


def sample_degrees(dist: DistSpec, n: int, k: int, rng: np.random.Generator,
                   max_rejections: int = MAX_REJECTIONS) -> DegreeSequence:
    """Draw n i.i.d. degrees, redrawing the whole sequence until k | sum."""
    if n < k or k < 2:
        raise ValueError(f"need n >= k >= 2, got n={n}, k={k}")
    if dist.kind == "const" and (n * dist.param) % k:
        raise DegenerateParity(f"{dist} with n={n} never has a clone count divisible by {k}")
    for _ in range(max_rejections):
        degrees = sample_many(dist, n, rng)
        if int(degrees.sum()) % k == 0:
            return DegreeSequence(degrees, k)
    raise DegenerateParity(f"no admissible degree sequence after {max_rejections} draws")


def build_formula(degs: DegreeSequence, rng: np.random.Generator) -> Formula:
    """Partition the clone multiset uniformly into k-sets and sign each clone.

    A uniform random permutation cut into consecutive k-blocks gives the same
    law as repeatedly removing k clones uniformly without replacement.  Signs
    are drawn after the partition, one fair coin per clone.
    """
    n, k = degs.n, degs.k
    clones = np.repeat(np.arange(1, n + 1, dtype=np.int64), degs.degrees)
    order = rng.permutation(clones.size)
    paired = clones[order]
    negate = rng.integers(0, 2, size=paired.size, dtype=np.int64)
    literals = paired * (1 - 2 * negate)
    return Formula.from_clauses(n, literals.reshape(-1, k), k=k)


def sample_formula(dist: DistSpec, n: int, k: int, rng: np.random.Generator) -> Formula:
    return build_formula(sample_degrees(dist, n, k, rng), rng)


def stats(f: Formula) -> FormulaStats:
    return stats_from_lit_degrees(f.lit_degrees)


def stats_from_lit_degrees(lit_degrees) -> FormulaStats:
    ld = np.asarray(lit_degrees, dtype=np.int64).reshape(-1, 2)
    deg = ld.sum(axis=1)
    s_n = int(deg.sum())
    t_n = int((ld[:, 0] * ld[:, 1]).sum())
    delta = int(deg.max()) if deg.size else 0
    ratio = 2.0 * t_n / s_n if s_n else 0.0
    return FormulaStats(s_n, t_n, delta, ratio)


def export_dimacs(f: Formula) -> str:
    lines = [f"p cnf {f.n_vars} {f.n_clauses}"]
    lines.extend(" ".join(map(str, row)) + " 0" for row in f.clauses.tolist())
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> Formula:
    """Read a DIMACS CNF.  Clauses may span lines; ``c`` lines are comments."""
    n_vars = n_clauses = None
    literals: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line[0] in "c%":
            continue
        if line[0] == "p":
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad problem line: {raw!r}")
            n_vars, n_clauses = int(parts[2]), int(parts[3])
            continue
        literals.extend(int(tok) for tok in line.split())
    if n_vars is None:
        raise ValueError("missing 'p cnf' header")
    clauses = []
    current: list[int] = []
    for lit in literals:
        if lit == 0:
            clauses.append(current)
            current = []
        else:
            current.append(lit)
    if current:
        clauses.append(current)
    if len(clauses) != n_clauses:
        raise ValueError(f"header announces {n_clauses} clauses, found {len(clauses)}")
    widths = {len(c) for c in clauses}
    if len(widths) > 1:
        raise ValueError(f"mixed clause widths {sorted(widths)} are not supported")
    k = widths.pop() if widths else 2
    return Formula.from_clauses(n_vars, clauses, k=k)


def read_dimacs(path) -> Formula:
    with open(path) as fh:
        return parse_dimacs(fh.read())


def write_dimacs(f: Formula, path) -> None:
    with open(path, "w") as fh:
        fh.write(export_dimacs(f))
