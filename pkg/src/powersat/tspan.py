"""Truncated span growth (TSPAN) and the five-step contradictory-path search.

Clones are the occurrence slots of literals.  A span started at clone p
keeps the set of literals reached from s = not lit(p): pairing a live
clone c1 (a clone of not r, r reached) with c2 records the clause
(not r or lit(c2)), i.e. the implication r -> lit(c2).  A span that
reaches both v and not v proves s false.  Spans from complementary clones
p, q that both do so certify unsatisfiability.

Two pairing modes:

* formula mode (``ClonePool.from_formula``) - the partner of c1 is its mate
  in an existing formula.  For a formula drawn from the configuration
  model this is exactly a uniform choice among unpaired clones (principle
  of deferred decisions), and every pairing is a real clause, so results
  are sound for that formula.
* lazy mode (``ClonePool.from_lit_degrees``) - the partner is drawn
  uniformly from the unpaired clones, building a random matching on the
  fly.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass, field

import numpy as np

from .genmodel import Formula, FormulaStats, stats as formula_stats

LIVE_EMPTY = "LiveEmpty"
REACHED_SIGMA = "ReachedSigma"
REACHED_TAU = "ReachedTau"
COMPLEMENT = "Complement"
CAP = "Cap"

UNTOUCHED, LIVE, CONNECTED = 0, 1, 2


class SubcriticalRatio(ValueError):
    """2 T_n / S_n <= 1: the span process has no positive drift."""


class _IndexedSet:
    """Set with O(1) add, remove and uniform random pick."""

    __slots__ = ("items", "pos")

    def __init__(self, items=()):
        self.items: list[int] = []
        self.pos: dict[int, int] = {}
        for x in items:
            self.add(x)

    def __len__(self):
        return len(self.items)

    def __contains__(self, x):
        return x in self.pos

    def __iter__(self):
        return iter(self.items)

    def add(self, x):
        if x not in self.pos:
            self.pos[x] = len(self.items)
            self.items.append(x)

    def discard(self, x):
        i = self.pos.pop(x, None)
        if i is None:
            return
        last = self.items.pop()
        if i < len(self.items):
            self.items[i] = last
            self.pos[last] = i

    def pick(self, rng: np.random.Generator):
        return self.items[int(rng.integers(len(self.items)))]


class ClonePool:
    """Shared clone universe: literal of each clone, paired set, pair log.

    ``lit_clones(node)`` lists the clones of a literal through CSR offsets
    (``order[offsets[node]:offsets[node + 1]]``).
    """

    def __init__(self, clone_lit, n_vars: int, mate=None):
        nodes = np.asarray(clone_lit, dtype=np.int64)
        self.clone_lit: list[int] = nodes.tolist()
        self.n_vars = n_vars
        self.mate: list[int] | None = None if mate is None else np.asarray(mate).tolist()
        order = np.argsort(nodes, kind="stable")
        counts = np.bincount(nodes, minlength=2 * n_vars)
        self._order: list[int] = order.tolist()
        self._offsets: list[int] = np.concatenate([[0], np.cumsum(counts)]).tolist()
        self.paired = bytearray(nodes.size)
        self.pairs: list[tuple[int, int]] = []
        self.spans: list[SpanState] = []

    @classmethod
    def from_formula(cls, f: Formula) -> "ClonePool":
        """Clone c is position c of the flattened clause array; its mate is c ^ 1."""
        if f.k != 2:
            raise ValueError("TSPAN works on 2-CNFs")
        flat = f.clauses.ravel()
        nodes = 2 * (np.abs(flat) - 1) + (flat < 0)
        mate = np.arange(flat.size) ^ 1
        return cls(nodes, f.n_vars, mate)

    @classmethod
    def from_lit_degrees(cls, lit_degrees) -> "ClonePool":
        """Unmatched pool: d+_i clones of v_i and d-_i clones of not v_i."""
        ld = np.asarray(lit_degrees, dtype=np.int64).reshape(-1, 2)
        counts = ld.ravel()  # node order: +v1, -v1, +v2, ...
        nodes = np.repeat(np.arange(counts.size), counts)
        return cls(nodes, ld.shape[0], None)

    @property
    def size(self) -> int:
        return len(self.clone_lit)

    @property
    def n_connected(self) -> int:
        return 2 * len(self.pairs)

    def lit_clones(self, node: int) -> list[int]:
        return self._order[self._offsets[node]:self._offsets[node + 1]]

    def partner(self, c1: int, rng: np.random.Generator) -> int:
        """Mate of c1 in formula mode; otherwise a uniform unpaired clone other than c1."""
        if self.mate is not None:
            return self.mate[c1]
        if self.size - self.n_connected < 2:
            raise RuntimeError("no unpaired clone left to pair with")
        # rejection sampling is cheap while the paired set stays o(S_n)
        paired, size = self.paired, self.size
        while True:
            c2 = int(rng.integers(size))
            if c2 != c1 and not paired[c2]:
                return c2

    def pair(self, c1: int, c2: int) -> None:
        if self.paired[c1] or self.paired[c2] or c1 == c2:
            raise RuntimeError(f"clones {c1}, {c2} cannot be paired")
        self.paired[c1] = self.paired[c2] = 1
        self.pairs.append((c1, c2))
        for span in self.spans:
            span.live.discard(c1)
            span.live.discard(c2)


@dataclass(eq=False)
class SpanState:
    """One span's view of the pool: live set, reached literals, history."""

    pool: ClonePool
    start: int | None = None
    live: _IndexedSet = field(default_factory=_IndexedSet)
    reached: set = field(default_factory=set)
    activated: set = field(default_factory=set)
    pairs: list = field(default_factory=list)
    live_count_history: list = field(default_factory=list)
    complement: tuple[int, int] | None = None

    @classmethod
    def start_at(cls, pool: ClonePool, clone: int) -> "SpanState":
        if pool.paired[clone]:
            raise ValueError(f"clone {clone} is already paired")
        state = cls(pool, clone)
        state.live.add(clone)
        state.reached.add(pool.clone_lit[clone] ^ 1)
        state.live_count_history.append(1)
        pool.spans.append(state)
        return state

    @classmethod
    def empty(cls, pool: ClonePool) -> "SpanState":
        state = cls(pool)
        state.live_count_history.append(0)
        pool.spans.append(state)
        return state

    def detach(self) -> None:
        if self in self.pool.spans:
            self.pool.spans.remove(self)

    def _reach(self, node: int) -> None:
        if self.complement is None and (node ^ 1) in self.reached:
            self.complement = (node, node ^ 1)
        self.reached.add(node)

    def partition(self) -> np.ndarray:
        """Per-clone label: UNTOUCHED (0), LIVE (1) or CONNECTED (2)."""
        labels = np.frombuffer(bytes(self.pool.paired), dtype=np.uint8).astype(np.int8) * CONNECTED
        for c in self.live:
            labels[c] = LIVE
        return labels

    def counts(self) -> tuple[int, int, int]:
        """(L, C, U) for this span."""
        live = len(self.live)
        conn = self.pool.n_connected
        return live, conn, self.pool.size - live - conn

    def witness_literals(self) -> tuple[int, int] | None:
        """Signed literals (v, not v) both reached, if any."""
        if self.complement is None:
            return None
        a, b = self.complement
        return _node_lit(a), _node_lit(b)


def _node_lit(node: int) -> int:
    var = node // 2 + 1
    return -var if node & 1 else var


@dataclass(frozen=True)
class TspanResult:
    outcome: str
    pairings: int


def tspan(state: SpanState, sigma: float, tau: int, rng: np.random.Generator,
          stop_on_complement: bool = False, max_connected: int | None = None) -> TspanResult:
    """Grow the span while 0 < |L| <= sigma and fewer than tau pairings were made."""
    pool = state.pool
    clone_lit = pool.clone_lit
    paired = pool.paired
    live = state.live
    done = 0
    while True:
        n_live = len(live)
        if n_live == 0:
            return TspanResult(LIVE_EMPTY, done)
        if n_live > sigma:
            return TspanResult(REACHED_SIGMA, done)
        if done >= tau:
            return TspanResult(REACHED_TAU, done)
        if stop_on_complement and state.complement is not None:
            return TspanResult(COMPLEMENT, done)
        if max_connected is not None and pool.n_connected + 2 > max_connected:
            return TspanResult(CAP, done)
        c1 = live.pick(rng)
        c2 = pool.partner(c1, rng)
        pool.pair(c1, c2)
        state.pairs.append((c1, c2))
        done += 1
        w = clone_lit[c2]
        state._reach(w)
        if w not in state.activated:
            state.activated.add(w)
            for c in pool.lit_clones(w ^ 1):
                if not paired[c]:
                    live.add(c)
        state.live_count_history.append(len(live))


@dataclass(frozen=True)
class SpanParams:
    s1: int
    sigma: int
    s2: int
    K: int
    mu: float


def schedule_exponents(alpha: float) -> tuple[float, float, float]:
    """Exponents of n in s1, s2 and K."""
    if math.isinf(alpha):
        return 1.0 / 6.0, 11.0 / 12.0, 7.0 / 12.0
    a = alpha
    e1 = (a + 4.0) / (6.0 * (a + 1.0))
    e2 = (11.0 * a * a + 3.0 * a - 2.0) / (12.0 * a * (a + 1.0))
    ek = (7.0 * a + 10.0) / (12.0 * (a + 1.0))
    return e1, e2, ek


def compute_params(n: int, alpha: float, stats: FormulaStats, override: bool = False) -> SpanParams:
    """Round sizes for the search; ``override`` waives the ratio > 1 and alpha > 2 gates."""
    if not override:
        if stats.ratio <= 1.0:
            raise SubcriticalRatio(f"2T_n/S_n = {stats.ratio:.4f} <= 1")
        if alpha <= 2.0:
            raise ValueError(f"parameter schedule assumes alpha > 2, got {alpha}")
    e1, e2, ek = schedule_exponents(alpha)
    s1 = math.ceil(n ** e1)
    s2 = math.ceil(n ** e2)
    K = math.ceil(n ** ek)
    mu = stats.mu
    sigma = max(1, math.ceil(s1 * mu / 6.0)) if mu > 0 else 1
    return SpanParams(s1, sigma, s2, K, mu)


@dataclass
class SearchResult:
    outcome: str  # "Found" or "Exhausted"
    rounds_used: int
    pairings: int
    found_variable: int | None = None
    pair: tuple[int, int] | None = None
    witnesses: tuple | None = None
    transcript: dict = field(default_factory=dict)
    failures: Counter = field(default_factory=Counter)
    stop_reason: str = ""

    @property
    def found(self) -> bool:
        return self.outcome == "Found"


def search_contradictory_paths(f: Formula, params: SpanParams, rng: np.random.Generator,
                               overlap_frac: float = 0.1, pick: str = "variable",
                               max_rounds: int | None = None,
                               connected_cap: int | None = None) -> SearchResult:
    """Repeated rounds of Steps 1-5 on a fixed formula.

    ``pick`` chooses Step 1's variable: ``"variable"`` is uniform over
    variables with both polarities, ``"clone-pair"`` weights them by
    d+ d-, i.e. uniform over complementary clone pairs.  The paired set
    persists across rounds; the search stops once it would exceed
    ``connected_cap`` clones (default n / ln n).
    """
    if f.k != 2:
        raise ValueError("contradictory paths are searched in 2-CNFs")
    n = f.n_vars
    if connected_cap is None:
        connected_cap = int(n / math.log(n)) if n > 2 else f.n_clauses * 2
    rounds_allowed = params.K if max_rounds is None else max_rounds
    pool = ClonePool.from_formula(f)
    pos, neg = f.lit_degrees[:, 0], f.lit_degrees[:, 1]
    eligible = np.flatnonzero((pos > 0) & (neg > 0))
    if pick == "variable":
        order = rng.permutation(eligible)
    elif pick == "clone-pair":
        weights = (pos[eligible] * neg[eligible]).astype(float)
        order = rng.choice(eligible, size=eligible.size, replace=False, p=weights / weights.sum()) \
            if eligible.size else eligible
    else:
        raise ValueError(f"unknown pick rule {pick!r}")

    result = SearchResult("Exhausted", 0, 0)
    sigma = params.sigma
    for var_index in order.tolist():
        if result.rounds_used >= rounds_allowed:
            result.stop_reason = "rounds"
            break
        p = _free_clone(pool, 2 * var_index, rng)
        q = _free_clone(pool, 2 * var_index + 1, rng)
        if p is None or q is None:
            continue
        if pool.n_connected + 2 > connected_cap:
            result.stop_reason = "connected_cap"
            break
        result.rounds_used += 1
        reason, span_p, span_q = _round(pool, p, q, params, sigma, overlap_frac, connected_cap, rng)
        for span in (span_p, span_q):
            if span is not None:
                span.detach()
        if reason is None:
            result.outcome = "Found"
            result.found_variable = var_index + 1
            result.pair = (p, q)
            result.witnesses = (span_p.witness_literals(), span_q.witness_literals())
            result.transcript = {"p": list(span_p.pairs), "q": list(span_q.pairs)}
            result.stop_reason = "found"
            break
        result.failures[reason] += 1
        if reason == "connected_cap":
            result.stop_reason = "connected_cap"
            break
    else:
        result.stop_reason = result.stop_reason or "variables"
    result.pairings = len(pool.pairs)
    return result


def _free_clone(pool: ClonePool, node: int, rng) -> int | None:
    free = [c for c in pool.lit_clones(node) if not pool.paired[c]]
    if not free:
        return None
    return free[int(rng.integers(len(free)))]


def _round(pool, p, q, params, sigma, overlap_frac, cap, rng):
    """One pass of Steps 2-5; returns (failure reason or None, span_p, span_q)."""
    s1, s2 = params.s1, params.s2
    span_p = SpanState.start_at(pool, p)
    out = tspan(span_p, sigma, s1, rng, max_connected=cap)
    if out.outcome == CAP:
        return "connected_cap", span_p, None
    if out.outcome == LIVE_EMPTY:
        return "step2_live_empty", span_p, None
    if pool.paired[q] or q in span_p.live:
        return "step2_q_touched", span_p, None
    if len(span_p.live) < sigma:
        return "step2_small", span_p, None

    span_q = SpanState.start_at(pool, q)
    out = tspan(span_q, sigma, s1, rng, max_connected=cap)
    if out.outcome == CAP:
        return "connected_cap", span_p, span_q
    if out.outcome == LIVE_EMPTY:
        return "step3_live_empty", span_p, span_q
    overlap = sum(1 for c in span_q.live if c in span_p.live)
    if overlap >= overlap_frac * s1:
        return "step3_overlap", span_p, span_q
    if len(span_q.live) < sigma:
        return "step3_small", span_p, span_q

    for label, span in (("step4", span_p), ("step5", span_q)):
        if span.complement is not None:
            continue
        out = tspan(span, math.inf, s2, rng, stop_on_complement=True, max_connected=cap)
        if out.outcome == CAP:
            return "connected_cap", span_p, span_q
        if span.complement is None and out.outcome == LIVE_EMPTY:
            return f"{label}_live_empty", span_p, span_q
    if span_p.complement is None or span_q.complement is None:
        return "no_contradiction", span_p, span_q
    return None, span_p, span_q


def transcript_certificate(f: Formula, start_clone: int, pairs) -> tuple | None:
    """Rebuild implication paths s ~> v and s ~> not v from a span's pairings.

    s = not lit(start_clone).  Each pair (c1, c2) yields the edge
    not lit(c1) -> lit(c2) through clause c1 // 2.  Returns
    (s, path_to_v, path_to_not_v) as solver.ImplicationPath objects, or
    None when the transcript holds no complementary pair.
    """
    from .solver import ImplicationPath

    flat = f.clauses.ravel()
    s = -int(flat[start_clone])
    adj: dict[int, list[tuple[int, int]]] = {}
    for c1, c2 in pairs:
        adj.setdefault(-int(flat[c1]), []).append((int(flat[c2]), c1 // 2))
    parent = {s: None}
    queue = deque([s])
    while queue:
        a = queue.popleft()
        for b, cid in adj.get(a, ()):
            if b not in parent:
                parent[b] = (a, cid)
                queue.append(b)
    target = next((lit for lit in parent if -lit in parent), None)
    if target is None:
        return None

    def walk(goal):
        lits, cids = [goal], []
        while parent[lits[-1]] is not None:
            a, cid = parent[lits[-1]]
            lits.append(a)
            cids.append(cid)
        return ImplicationPath(tuple(reversed(lits)), tuple(reversed(cids)))

    return s, walk(target), walk(-target)


def run_search(f: Formula, alpha: float, rng: np.random.Generator, override: bool = False,
               **kwargs) -> tuple[SpanParams, SearchResult]:
    """compute_params from the realised statistics, then search."""
    params = compute_params(f.n_vars, alpha, formula_stats(f), override=override)
    return params, search_contradictory_paths(f, params, rng, **kwargs)
