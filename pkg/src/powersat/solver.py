"""Exact 2-SAT through the implication graph, plus structural witnesses.

Literal nodes: variable v (1-based) maps to node 2(v-1) for the positive
literal and 2(v-1)+1 for the negative one, so ``node ^ 1`` negates.
A clause (a or b) contributes the edges not-a -> b and not-b -> a; each
edge remembers the index of the clause that produced it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .genmodel import Formula


class WidthError(ValueError):
    """Operation needs a 2-CNF."""


class NotUnsat(ValueError):
    """A contradiction certificate was requested for a satisfiable formula."""


def lit_to_node(lit: int) -> int:
    return 2 * (abs(lit) - 1) + (1 if lit < 0 else 0)


def node_to_lit(node: int) -> int:
    var = node // 2 + 1
    return -var if node & 1 else var


@dataclass(frozen=True)
class ImplicationGraph:
    n_nodes: int
    offsets: np.ndarray
    targets: np.ndarray
    clause_ids: np.ndarray

    @classmethod
    def from_formula(cls, f: Formula) -> "ImplicationGraph":
        if f.k != 2:
            raise WidthError(f"implication graph needs k = 2, formula has k = {f.k}")
        n_nodes = 2 * f.n_vars
        if f.n_clauses == 0:
            return cls(n_nodes, np.zeros(n_nodes + 1, dtype=np.int64),
                       np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
        a = f.clauses[:, 0]
        b = f.clauses[:, 1]
        na = 2 * (np.abs(a) - 1) + (a < 0)
        nb = 2 * (np.abs(b) - 1) + (b < 0)
        src = np.concatenate([na ^ 1, nb ^ 1])
        dst = np.concatenate([nb, na])
        cid = np.tile(np.arange(f.n_clauses, dtype=np.int64), 2)
        order = np.argsort(src, kind="stable")
        offsets = np.zeros(n_nodes + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n_nodes), out=offsets[1:])
        return cls(n_nodes, offsets, dst[order], cid[order])

    def successors(self, node: int):
        lo, hi = self.offsets[node], self.offsets[node + 1]
        return zip(self.targets[lo:hi].tolist(), self.clause_ids[lo:hi].tolist())


def strongly_connected_components(graph: ImplicationGraph) -> tuple[list[int], int]:
    """Iterative Tarjan.

    Returns (component id per node, number of components).  Components are
    numbered in the order Tarjan closes them, which is a reverse topological
    order of the condensation: every edge u -> v between different
    components has comp[u] > comp[v].
    """
    n = graph.n_nodes
    offsets = graph.offsets.tolist()
    targets = graph.targets.tolist()
    index = [-1] * n
    low = [0] * n
    comp = [-1] * n
    on_stack = [False] * n
    ptr = offsets[:-1].copy() if n else []
    stack: list[int] = []
    counter = 0
    n_comp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        call = [root]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while call:
            v = call[-1]
            end = offsets[v + 1]
            descended = False
            while ptr[v] < end:
                w = targets[ptr[v]]
                ptr[v] += 1
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    call.append(w)
                    descended = True
                    break
                if on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if descended:
                continue
            call.pop()
            if call:
                u = call[-1]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = n_comp
                    if w == v:
                        break
                n_comp += 1
    return comp, n_comp


@dataclass(frozen=True)
class ImplicationDigest:
    verdict: str
    assignment: np.ndarray | None
    witness_var: int | None
    scc_id: np.ndarray
    n_components: int
    condensation_longest_path: int
    graph: ImplicationGraph = field(repr=False)

    @property
    def is_sat(self) -> bool:
        return self.verdict == "SAT"


def decide(f: Formula) -> ImplicationDigest:
    """Decide a 2-CNF; SAT comes with a model, UNSAT with a witness variable."""
    graph = ImplicationGraph.from_formula(f)
    comp, n_comp = strongly_connected_components(graph)
    scc = np.asarray(comp, dtype=np.int64)
    pos, neg = scc[0::2], scc[1::2]
    clash = np.flatnonzero(pos == neg)
    longest = _longest_path(graph, scc, n_comp)
    if clash.size:
        return ImplicationDigest("UNSAT", None, int(clash[0]) + 1, scc, n_comp, longest, graph)
    # a literal is true when its component comes later in topological order
    assignment = pos < neg
    return ImplicationDigest("SAT", assignment, None, scc, n_comp, longest, graph)


def _longest_path(graph: ImplicationGraph, scc: np.ndarray, n_comp: int) -> int:
    if graph.targets.size == 0:
        return 0
    src = np.repeat(np.arange(graph.n_nodes), np.diff(graph.offsets))
    cu = scc[src]
    cv = scc[graph.targets]
    cross = cu != cv
    cu, cv = cu[cross], cv[cross]
    if cu.size == 0:
        return 0
    # edges go from larger to smaller component ids; settle sinks first
    order = np.argsort(cu, kind="stable")
    best = [0] * n_comp
    for u, v in zip(cu[order].tolist(), cv[order].tolist()):
        cand = best[v] + 1
        if cand > best[u]:
            best[u] = cand
    return max(best)


def condensation_longest_path(digest: ImplicationDigest) -> int:
    return digest.condensation_longest_path


def satisfies(f: Formula, assignment) -> bool:
    """Check a boolean assignment (index i for variable i+1) against every clause."""
    values = np.asarray(assignment, dtype=bool)
    lits = f.clauses
    if lits.size == 0:
        return True
    truth = values[np.abs(lits) - 1] == (lits > 0)
    return bool(truth.any(axis=1).all())


def brute_force_sat(f: Formula) -> bool:
    """Exhaustive search over all 2^n assignments (n <= ~20)."""
    n = f.n_vars
    if f.n_clauses == 0:
        return True
    masks = np.arange(2 ** n, dtype=np.int64)
    values = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    lits = f.clauses
    var = np.abs(lits) - 1
    want = lits > 0
    ok = np.ones(masks.size, dtype=bool)
    for row_var, row_want in zip(var, want):
        ok &= (values[:, row_var] == row_want).any(axis=1)
        if not ok.any():
            return False
    return True


@dataclass(frozen=True)
class ImplicationPath:
    """Literals l_0 -> l_1 -> ... -> l_r and the clause behind each arrow."""

    literals: tuple[int, ...]
    clauses: tuple[int, ...]


@dataclass(frozen=True)
class ContradictionCertificate:
    variable: int
    forward: ImplicationPath   # v ~> not v
    backward: ImplicationPath  # not v ~> v


def _bfs_path(graph: ImplicationGraph, start: int, goal: int) -> ImplicationPath:
    parent = {start: (None, None)}
    frontier = [start]
    while frontier and goal not in parent:
        nxt = []
        for v in frontier:
            for w, cid in graph.successors(v):
                if w not in parent:
                    parent[w] = (v, cid)
                    nxt.append(w)
        frontier = nxt
    if goal not in parent:
        raise RuntimeError("no path between literals that share a component")
    nodes, cids = [goal], []
    while nodes[-1] != start:
        prev, cid = parent[nodes[-1]]
        nodes.append(prev)
        cids.append(cid)
    nodes.reverse()
    cids.reverse()
    return ImplicationPath(tuple(node_to_lit(v) for v in nodes), tuple(cids))


def extract_contradictory_paths(f: Formula, digest: ImplicationDigest) -> ContradictionCertificate:
    if digest.verdict != "UNSAT":
        raise NotUnsat("formula is satisfiable; no contradictory paths exist")
    v = digest.witness_var
    pos = lit_to_node(v)
    forward = _bfs_path(digest.graph, pos, pos ^ 1)
    backward = _bfs_path(digest.graph, pos ^ 1, pos)
    return ContradictionCertificate(v, forward, backward)


def replay_path(f: Formula, path: ImplicationPath) -> bool:
    """Every arrow a -> b must come from a clause containing not-a and b."""
    if len(path.literals) != len(path.clauses) + 1:
        return False
    for (a, b), cid in zip(zip(path.literals, path.literals[1:]), path.clauses):
        if not 0 <= cid < f.n_clauses:
            return False
        clause = sorted(f.clauses[cid].tolist())
        if clause != sorted([-a, b]):
            return False
    return True


def replay_certificate(f: Formula, cert: ContradictionCertificate) -> bool:
    v = cert.variable
    fw, bw = cert.forward, cert.backward
    return (
        len(fw.clauses) > 0 and len(bw.clauses) > 0
        and fw.literals[0] == v and fw.literals[-1] == -v
        and bw.literals[0] == -v and bw.literals[-1] == v
        and replay_path(f, fw) and replay_path(f, bw)
    )


@dataclass(frozen=True)
class Bicycle:
    """Clauses (u, l_1), (not l_1, l_2), ..., (not l_s, v).

    ``clauses`` lists the s + 1 clause indices in that order.
    """

    path: tuple[int, ...]
    u: int
    v: int
    clauses: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.path)


def validate_bicycle(f: Formula, bike: Bicycle) -> bool:
    path = bike.path
    if not path or len(bike.clauses) != len(path) + 1:
        return False
    variables = [abs(x) for x in path]
    if len(set(variables)) != len(variables):
        return False
    if abs(bike.u) not in variables or abs(bike.v) not in variables:
        return False
    wanted = [(bike.u, path[0])]
    wanted += [(-a, b) for a, b in zip(path, path[1:])]
    wanted.append((-path[-1], bike.v))
    for (x, y), cid in zip(wanted, bike.clauses):
        if not 0 <= cid < f.n_clauses:
            return False
        if sorted(f.clauses[cid].tolist()) != sorted([x, y]):
            return False
    return True


DEFAULT_MAX_LEN = 25
DEFAULT_CAP = 10 ** 4
DEFAULT_MAX_STEPS = 2 * 10 ** 6


def find_bicycles(f: Formula, max_len: int = DEFAULT_MAX_LEN, cap: int = DEFAULT_CAP,
                  max_steps: int = DEFAULT_MAX_STEPS) -> list[Bicycle]:
    """Bicycles of length 1..max_len, at most ``cap`` of them (see enumerate_bicycles)."""
    return enumerate_bicycles(f, max_len, cap, max_steps)[0]


def enumerate_bicycles(f: Formula, max_len: int = DEFAULT_MAX_LEN, cap: int = DEFAULT_CAP,
                       max_steps: int = DEFAULT_MAX_STEPS) -> tuple[list[Bicycle], bool]:
    """Enumerate bicycles by depth-first search; returns (bicycles, complete).

    Every implication edge not-u -> l_1 is a possible first clause; the
    path then follows implication edges l_i -> l_{i+1} over fresh variables.
    An edge l_s -> v whose variable is already on the path closes a bicycle
    when u's variable is on the path as well.  End clauses may coincide with
    path clauses.  The search stops after ``cap`` bicycles or ``max_steps``
    edge inspections; ``complete`` is False when either limit cut it short.
    Simple paths are exponentially many in dense graphs, hence the step limit.
    """
    if f.k != 2:
        raise WidthError(f"bicycles are defined for 2-CNFs, formula has k = {f.k}")
    if max_len < 1:
        raise ValueError("max_len must be positive")
    graph = ImplicationGraph.from_formula(f)
    offsets = graph.offsets.tolist()
    targets = graph.targets.tolist()
    cids = graph.clause_ids.tolist()
    found: list[Bicycle] = []
    on_path = [False] * (f.n_vars + 1)
    steps = 0

    for src in range(graph.n_nodes):
        u_var = src // 2 + 1
        u_lit = -node_to_lit(src)
        for e0 in range(offsets[src], offsets[src + 1]):
            first = targets[e0]
            nodes = [first]
            clauses = [cids[e0]]
            on_path[first // 2 + 1] = True
            # explicit DFS: one edge cursor per path position
            cursor = [offsets[first]]
            while cursor:
                tip = nodes[-1]
                if cursor[-1] >= offsets[tip + 1]:
                    cursor.pop()
                    on_path[nodes.pop() // 2 + 1] = False
                    clauses.pop()
                    continue
                e = cursor[-1]
                cursor[-1] += 1
                steps += 1
                if steps > max_steps:
                    _clear(on_path, nodes)
                    return found, False
                w = targets[e]
                w_var = w // 2 + 1
                if on_path[w_var]:
                    if on_path[u_var]:
                        found.append(Bicycle(
                            tuple(node_to_lit(x) for x in nodes), u_lit, node_to_lit(w),
                            tuple(clauses) + (cids[e],)))
                        if len(found) >= cap:
                            _clear(on_path, nodes)
                            return found, False
                elif len(nodes) < max_len:
                    nodes.append(w)
                    clauses.append(cids[e])
                    on_path[w_var] = True
                    cursor.append(offsets[w])
    return found, True


def _clear(on_path, nodes):
    for x in nodes:
        on_path[x // 2 + 1] = False


def bicycle_from_closed_walk(literals, clauses) -> Bicycle:
    """A bicycle read off a closed implication walk c_0 -> c_1 -> ... -> c_0.

    ``clauses[i]`` realises the arrow c_i -> c_{i+1 mod L}.  Starting at c_0
    the path grows forward while variables stay fresh; the first repeat is
    the exit clause.  It then grows backward the same way; the first repeat
    there is the entry clause.  Both repeats must occur because the walk
    closes on itself.
    """
    walk = [int(x) for x in literals]
    cl = [int(c) for c in clauses]
    size = len(walk)
    if size == 0 or len(cl) != size:
        raise ValueError("need a non-empty closed walk with one clause per arrow")
    path = [walk[0]]
    inner = []
    seen = {abs(walk[0])}
    k = 1
    while abs(walk[k % size]) not in seen:
        path.append(walk[k])
        inner.append(cl[k - 1])
        seen.add(abs(walk[k]))
        k += 1
    v, exit_clause = walk[k % size], cl[(k - 1) % size]
    b = size - 1
    while abs(walk[b]) not in seen:
        path.insert(0, walk[b])
        inner.insert(0, cl[b])
        seen.add(abs(walk[b]))
        b -= 1
    u, entry_clause = -walk[b], cl[b]
    return Bicycle(tuple(path), u, v, (entry_clause, *inner, exit_clause))


def contradiction_bicycle(f: Formula, digest: ImplicationDigest) -> Bicycle:
    """The bicycle contained in the contradictory paths of an UNSAT formula."""
    cert = extract_contradictory_paths(f, digest)
    walk = cert.forward.literals[:-1] + cert.backward.literals[:-1]
    return bicycle_from_closed_walk(walk, cert.forward.clauses + cert.backward.clauses)
