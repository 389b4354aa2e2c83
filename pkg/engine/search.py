"""
Exact maximum avoiding families.

Avoiding families are the independent sets of the conflict graph (codes joined when they agree
on exactly t-1 coordinates). The solver is a bitmask branch-and-bound: vertex sets are Python
ints, the upper bound is a greedy clique cover of the residual graph, and the branching vertex is
the one of largest residual degree (lowest index on ties).
"""

import itertools
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import networkx as nx
import numpy as np
from scipy import sparse

from .analysis import regime_thresholds
from .core import Box, Family, Restriction, code_array, detect_star, is_avoiding, make_star
from .errors import BudgetError, DomainError
from .report import Report

logger = logging.getLogger(__name__)

GRAPH_LIMIT = 2 ** 20
ENUMERATE_LIMIT = 2 ** 14
EXHAUSTIVE_LIMIT = 20
SPLIT_DEPTH = 3
BEAM_LIMIT = 10 ** 5
PROGRESS_EVERY = 100_000


def _check_t(box, t, upper):
    if int(t) != t or not 1 <= t <= upper:
        raise DomainError(f"t={t} outside [1, {upper}] for box {box}")
    return int(t)


@dataclass(frozen=True, eq=False)
class ConflictGraph:
    """Codes of a box joined when they agree on exactly t-1 coordinates."""

    box: Box
    t: int
    adjacency: sparse.csr_matrix

    @property
    def order(self):
        return self.box.size

    @cached_property
    def masks(self):
        """Neighbourhoods as int bitmasks, bit j set for neighbour j."""
        size = self.order
        indptr, indices = self.adjacency.indptr, self.adjacency.indices
        masks = []
        for v in range(size):
            row = np.zeros(size, dtype=bool)
            row[indices[indptr[v]:indptr[v + 1]]] = True
            masks.append(int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little"))
        return tuple(masks)

    def degrees(self):
        return np.diff(self.adjacency.indptr)

    @property
    def edge_count(self):
        return int(self.adjacency.nnz // 2)

    def degree_stats(self):
        degrees = self.degrees()
        return {
            "vertices": self.order,
            "edges": self.edge_count,
            "min_degree": int(degrees.min()),
            "max_degree": int(degrees.max()),
            "mean_degree": float(degrees.mean()),
            "regular": bool(degrees.min() == degrees.max()),
        }

    def has_edge(self, x, y):
        return bool(self.adjacency[self.box.index(x), self.box.index(y)])

    def to_networkx(self):
        graph = nx.from_scipy_sparse_array(self.adjacency)
        nx.set_node_attributes(graph, {v: self.box.code_at(v) for v in graph.nodes}, "code")
        return graph


def build_conflict_graph(box, t):
    """Conflict graph of (t-1)-agreement on all of [m]^n.

    Raises:
        BudgetError: m^n > 2^20.
        DomainError: t outside [1, n+1].
    """
    t = _check_t(box, t, box.n + 1)
    size = box.size
    if size > GRAPH_LIMIT:
        raise BudgetError(f"conflict graph of {box} has {size} vertices, limit is {GRAPH_LIMIT}")
    arr = code_array(box).astype(np.int16)
    chunk = max(1, 2 ** 24 // max(1, size * max(box.n, 1)))
    rows, cols = [], []
    for start in range(0, size, chunk):
        block = arr[start:start + chunk]
        agreements = (block[:, None, :] == arr[None, :, :]).sum(axis=2)
        r, c = np.nonzero(agreements == t - 1)
        r = r + start
        off_diagonal = r != c
        rows.append(r[off_diagonal])
        cols.append(c[off_diagonal])
    rows = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    adjacency = sparse.csr_matrix((np.ones(rows.size, dtype=bool), (rows, cols)), shape=(size, size))
    graph = ConflictGraph(box, t, adjacency)
    logger.debug("conflict graph %s t=%d: %d edges", box, t, graph.edge_count)
    return graph


def conflict_graph_to_dimacs(graph):
    """DIMACS text of the complement graph (its maximum cliques are the maximum avoiding families)."""
    complement = nx.complement(nx.from_scipy_sparse_array(graph.adjacency))
    lines = [f"c complement of the t={graph.t} conflict graph on {graph.box}",
             f"p edge {complement.number_of_nodes()} {complement.number_of_edges()}"]
    lines.extend(f"e {u + 1} {v + 1}" for u, v in sorted(tuple(sorted(e)) for e in complement.edges))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SymmetryElement:
    """Image coordinate k takes source coordinate order[k]; source symbol s at coordinate a
    becomes perms[a-1][s-1]."""

    order: tuple
    perms: tuple

    def apply(self, x):
        return tuple(self.perms[a - 1][x[a - 1] - 1] for a in self.order)


class SymmetryGroup:
    """Coordinate permutations combined with per-coordinate alphabet permutations."""

    def __init__(self, box):
        self.box = box

    def order(self):
        return math.factorial(self.box.m) ** self.box.n * math.factorial(self.box.n)

    def identity(self):
        m, n = self.box.m, self.box.n
        return SymmetryElement(tuple(range(1, n + 1)), tuple(tuple(range(1, m + 1)) for _ in range(n)))

    def random_element(self, rng):
        m, n = self.box.m, self.box.n
        order = tuple(int(a) + 1 for a in rng.permutation(n))
        perms = tuple(tuple(int(s) + 1 for s in rng.permutation(m)) for _ in range(n))
        return SymmetryElement(order, perms)

    def _image_array(self, g, arr):
        if arr.shape[1] == 0:
            return arr
        columns = []
        for a in g.order:
            lut = np.asarray((0,) + tuple(g.perms[a - 1]))
            columns.append(lut[arr[:, a - 1]])
        return np.column_stack(columns)

    def act(self, g, F):
        if F.box != self.box:
            raise DomainError(f"family on {F.box} acted on by the group of {self.box}")
        arr = F.code_array()
        mask = np.zeros(self.box.size, dtype=bool)
        if len(arr):
            images = self._image_array(g, arr)
            mask[np.ravel_multi_index(tuple(images.T - 1), self.box.shape)] = True
        return Family.from_mask(self.box, mask)

    def vertex_permutation(self, g):
        """perm[i] is the code index of g applied to the code of index i."""
        images = self._image_array(g, code_array(self.box))
        return np.ravel_multi_index(tuple(images.T - 1), self.box.shape)

    def canonical_form(self, F):
        """A canonical representative of the orbit of F, as a sorted code tuple.

        Two families get the same tuple exactly when they lie in one orbit. The tuple is the least
        image the prefix-pruned beam reaches, which need not be the global lexicographic minimum.

        Image coordinates are fixed one at a time. At every depth only the partial images whose
        sorted prefix columns are minimal survive, and partial images describing the same set of
        rows are merged, so symmetric branches collapse.

        Raises:
            BudgetError: the surviving partial images exceed BEAM_LIMIT.
        """
        if F.box != self.box:
            raise DomainError(f"family on {F.box} canonicalized in the group of {self.box}")
        arr = F.code_array().astype(np.int64)
        if len(arr) == 0:
            return ()
        beam = [(np.zeros((len(arr), 0), dtype=np.int64), tuple(range(self.box.n)))]
        for _ in range(self.box.n):
            best, survivors = None, {}
            for prefix, remaining in beam:
                for pos, a in enumerate(remaining):
                    column = arr[:, a]
                    rest = remaining[:pos] + remaining[pos + 1:]
                    present = np.unique(column)
                    for images in itertools.permutations(range(1, len(present) + 1)):
                        lut = np.zeros(self.box.m + 1, dtype=np.int64)
                        lut[present] = images
                        candidate = np.column_stack([prefix, lut[column]])
                        ranked = candidate[np.lexsort(candidate.T[::-1])]
                        key = ranked.astype(np.uint8).tobytes()
                        if best is not None and key > best:
                            continue
                        if best is None or key < best:
                            best, survivors = key, {}
                        rows = np.column_stack([candidate, arr[:, list(rest)]])
                        rows = rows[np.lexsort(rows.T[::-1])]
                        survivors.setdefault((rest, rows.astype(np.uint8).tobytes()), (candidate, rest))
                        if len(survivors) > BEAM_LIMIT:
                            raise BudgetError(f"canonical form of {len(arr)} codes exceeds {BEAM_LIMIT} partial images")
            beam = list(survivors.values())
        final = beam[0][0]
        final = final[np.lexsort(final.T[::-1])]
        return tuple(tuple(int(s) for s in row) for row in final)


def is_t_star(F, t):
    match = detect_star(F)
    return match is not None and match.exact and len(match.restriction) == t


def _lowbit_index(mask):
    return (mask & -mask).bit_length() - 1


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def clique_cover_bound(cand, adj):
    """Size of a greedy clique cover of cand, an upper bound on any independent subset."""
    count = 0
    while cand:
        low = cand & -cand
        pool = cand & adj[low.bit_length() - 1]
        clique = low
        while pool:
            nxt = pool & -pool
            clique |= nxt
            pool &= adj[nxt.bit_length() - 1]
        cand &= ~clique
        count += 1
    return count


def _branch_vertex(cand, adj):
    best_v, best_degree = -1, -1
    for v in _bits(cand):
        degree = (adj[v] & cand).bit_count()
        if degree > best_degree:
            best_v, best_degree = v, degree
    return best_v, best_degree


def greedy_independent_set(adj, cand):
    """Lowest-residual-degree-first greedy independent set."""
    chosen = 0
    while cand:
        v = min(_bits(cand), key=lambda u: ((adj[u] & cand).bit_count(), u))
        chosen |= 1 << v
        cand &= ~(adj[v] | (1 << v))
    return chosen


class _Budget:
    def __init__(self, nodes=None, deadline=None):
        self.limit = nodes
        self.deadline = deadline
        self.nodes = 0

    def tick(self):
        self.nodes += 1
        if self.limit is not None and self.nodes > self.limit:
            raise BudgetError(f"search exceeded {self.limit} nodes")
        if self.deadline is not None and self.nodes % 1024 == 0 and time.monotonic() > self.deadline:
            raise BudgetError("search exceeded its time budget")
        if self.nodes % PROGRESS_EVERY == 0:
            logger.debug("%d nodes expanded", self.nodes)


def _maximum(adj, cand, chosen, size, best, budget):
    """Largest independent set extending `chosen` inside `cand` that beats `best`.

    Returns (best size, witness mask or None when nothing beats the initial best).
    """
    witness = None
    stack = [(cand, chosen, size)]
    while stack:
        cand, chosen, size = stack.pop()
        budget.tick()
        if not cand:
            if size > best:
                best, witness = size, chosen
                logger.debug("incumbent %d", best)
            continue
        if size + clique_cover_bound(cand, adj) <= best:
            continue
        v, degree = _branch_vertex(cand, adj)
        if degree == 0:
            stack.append((0, chosen | cand, size + cand.bit_count()))
            continue
        bit = 1 << v
        stack.append((cand & ~bit, chosen, size))
        stack.append((cand & ~bit & ~adj[v], chosen | bit, size + 1))
    return best, witness


def _enumerate(adj, cand, chosen, size, target, budget):
    """Every independent set of size `target` extending `chosen` inside `cand`."""
    found = []
    stack = [(cand, chosen, size)]
    while stack:
        cand, chosen, size = stack.pop()
        budget.tick()
        if not cand:
            if size == target:
                found.append(chosen)
            continue
        if size + clique_cover_bound(cand, adj) < target:
            continue
        v, degree = _branch_vertex(cand, adj)
        if degree == 0:
            stack.append((0, chosen | cand, size + cand.bit_count()))
            continue
        bit = 1 << v
        stack.append((cand & ~bit, chosen, size))
        stack.append((cand & ~bit & ~adj[v], chosen | bit, size + 1))
    return found


def _split(adj, cand, depth):
    """Subtree tasks (cand, chosen, size) after `depth` include/exclude levels, in DFS order."""
    tasks = [(cand, 0, 0)]
    for _ in range(depth):
        nxt = []
        for cand, chosen, size in tasks:
            if not cand:
                nxt.append((cand, chosen, size))
                continue
            v, _ = _branch_vertex(cand, adj)
            bit = 1 << v
            nxt.append((cand & ~bit & ~adj[v], chosen | bit, size + 1))
            nxt.append((cand & ~bit, chosen, size))
        tasks = nxt
    return tasks


def _solve_task(args):
    kind, adj, task, bound, nodes, deadline = args
    budget = _Budget(nodes, deadline)
    cand, chosen, size = task
    if kind == "max":
        best, witness = _maximum(adj, cand, chosen, size, bound, budget)
        return best, witness, budget.nodes
    return _enumerate(adj, cand, chosen, size, bound, budget), None, budget.nodes


def _run_tasks(kind, adj, tasks, bound, budget_nodes, deadline, workers):
    jobs = [(kind, adj, task, bound, budget_nodes, deadline) for task in tasks]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_solve_task, jobs))
    return [_solve_task(job) for job in jobs]


def _relabel(masks, order):
    """Adjacency masks under the relabelling new vertex i = old vertex order[i]."""
    position = {old: new for new, old in enumerate(order)}
    relabelled = []
    for old in order:
        mask = 0
        for u in _bits(masks[old]):
            mask |= 1 << position[u]
        relabelled.append(mask)
    return tuple(relabelled), position


def _mask_to_family(box, mask):
    indices = list(_bits(mask))
    flags = np.zeros(box.size, dtype=bool)
    flags[indices] = True
    return Family.from_mask(box, flags)


def lex_least_optimum(graph, optimum):
    """The lexicographically least maximum independent set, found include-first in index order."""
    adj = graph.masks
    stack = [((1 << graph.order) - 1, 0, 0)]
    while stack:
        cand, chosen, size = stack.pop()
        if size == optimum:
            return _mask_to_family(graph.box, chosen)
        if not cand or size + clique_cover_bound(cand, adj) < optimum:
            continue
        low = cand & -cand
        v = low.bit_length() - 1
        stack.append((cand & ~low, chosen, size))
        stack.append((cand & ~low & ~adj[v], chosen | low, size + 1))
    raise DomainError(f"no independent set of size {optimum} in the conflict graph of {graph.box}")


@dataclass(frozen=True)
class OptimumCertificate:
    box: Box
    t: int
    optimum: int
    canonical: Family
    orbit_count: Optional[int] = None
    optima_count: Optional[int] = None
    all_stars: Optional[bool] = None
    counterexample: Optional[Family] = None
    regime: str = "outside"
    nodes: int = 0

    def to_json(self):
        data = {
            "m": self.box.m, "n": self.box.n, "t": self.t,
            "optimum": self.optimum,
            "canonical": [list(x) for x in self.canonical.codes()],
            "orbit_count": self.orbit_count,
            "all_stars": self.all_stars,
            "regime": self.regime,
        }
        if self.optima_count is not None:
            data["optima_count"] = self.optima_count
        if self.counterexample is not None:
            data["counterexample"] = [list(x) for x in self.counterexample.codes()]
        return data


def max_avoiding(box, t, mode="one", budget_nodes=None, budget_seconds=None, vertex_order=None,
                 workers=1, graph=None):
    """Exact maximum (t-1)-avoiding family of [m]^n.

    Args:
        box: the box [m]^n (m^n <= 2^20; mode "all" needs m^n <= 2^14).
        t: agreement parameter, 1 <= t <= n+1.
        mode: "one" for the optimum, "all" to also enumerate and classify every optimum.
        budget_nodes: cap on expanded nodes per subtree task.
        budget_seconds: wall-clock cap for the whole search.
        vertex_order: a permutation of the code indices to branch on instead of the natural order.
        workers: processes for the top-level subtree tasks; the result does not depend on it.

    Returns:
        OptimumCertificate whose canonical family is the lexicographically least optimum.

    Raises:
        BudgetError: size limits, node or time budget exceeded.
    """
    if mode not in ("one", "all"):
        raise DomainError(f"unknown search mode {mode!r}")
    t = _check_t(box, t, box.n + 1)
    if mode == "all" and box.size > ENUMERATE_LIMIT:
        raise BudgetError(f"enumerating all optima of {box} exceeds the limit of {ENUMERATE_LIMIT} codes")
    deadline = None if budget_seconds is None else time.monotonic() + float(budget_seconds)
    graph = graph if graph is not None else build_conflict_graph(box, t)
    adj = graph.masks
    position = None
    if vertex_order is not None:
        order = [int(v) for v in vertex_order]
        if sorted(order) != list(range(graph.order)):
            raise DomainError("vertex_order is not a permutation of the code indices")
        adj, position = _relabel(adj, order)
    full = (1 << graph.order) - 1
    incumbent = greedy_independent_set(adj, full)
    lower = incumbent.bit_count()
    tasks = _split(adj, full, SPLIT_DEPTH)
    results = _run_tasks("max", adj, tasks, lower, budget_nodes, deadline, workers)
    optimum = max([lower] + [best for best, _, _ in results])
    nodes = sum(count for _, _, count in results)
    logger.info("optimum %d for %s t=%d after %d nodes", optimum, box, t, nodes)

    canonical = lex_least_optimum(graph, optimum)
    ok, pair = is_avoiding(canonical, t)
    if not ok or len(canonical) != optimum:
        raise AssertionError(f"certificate family fails re-verification: {pair}")
    regime = "inside" if box.n >= t and regime_thresholds(t, box.m, box.n).inside() else "outside"
    if mode == "one":
        return OptimumCertificate(box, t, optimum, canonical, regime=regime, nodes=nodes)

    found = _run_tasks("all", adj, tasks, optimum, budget_nodes, deadline, workers)
    masks = []
    for sets, _, count in found:
        masks.extend(sets)
        nodes += count
    if position is not None:
        back = {new: old for old, new in position.items()}
        masks = [sum(1 << back[v] for v in _bits(mask)) for mask in masks]
    optima = sorted((_mask_to_family(box, mask) for mask in set(masks)), key=lambda F: F.codes())
    group = SymmetryGroup(box)
    classes = {}
    counterexample = None
    for F in optima:
        classes.setdefault(group.canonical_form(F), F)
        if counterexample is None and not is_t_star(F, t):
            counterexample = F
    logger.info("%d optima in %d orbits", len(optima), len(classes))
    return OptimumCertificate(box, t, optimum, canonical, orbit_count=len(classes),
                              optima_count=len(optima), all_stars=counterexample is None,
                              counterexample=counterexample, regime=regime, nodes=nodes)


def exhaustive_max_avoiding(box, t):
    """Brute force over all 2^{m^n} subfamilies (m^n <= 20).

    Returns:
        (optimum, tuple of every optimum Family in lexicographic order).
    """
    t = _check_t(box, t, box.n + 1)
    if box.size > EXHAUSTIVE_LIMIT:
        raise BudgetError(f"exhaustive search over {box} exceeds {EXHAUSTIVE_LIMIT} codes")
    size = box.size
    arr = code_array(box)
    subsets = np.arange(2 ** size, dtype=np.int64)
    bad = np.zeros(subsets.size, dtype=bool)
    for u in range(size):
        for v in range(u + 1, size):
            if int((arr[u] == arr[v]).sum()) == t - 1:
                bad |= ((subsets >> u) & 1).astype(bool) & ((subsets >> v) & 1).astype(bool)
    counts = np.zeros(subsets.size, dtype=np.int64)
    for u in range(size):
        counts += (subsets >> u) & 1
    counts[bad] = -1
    optimum = int(counts.max())
    optima = [_mask_to_family(box, int(s)) for s in subsets[counts == optimum]]
    return optimum, tuple(sorted(optima, key=lambda F: F.codes()))


def verify_main_theorem(box, t, budget_nodes=None, budget_seconds=None, workers=1):
    """Compare the exact optimum and its optima with the t-star conclusion.

    Outside the explicit regimes the outcome is an observation, never an assertion.
    """
    box.require_public()
    t = _check_t(box, t, box.n)
    params = {"m": box.m, "n": box.n, "t": t}
    cert = max_avoiding(box, t, mode="all", budget_nodes=budget_nodes,
                        budget_seconds=budget_seconds, workers=workers)
    target = box.m ** (box.n - t)
    matches = cert.optimum == target
    details = {
        "certificate": cert.to_json(),
        "target": target,
        "optimum_matches": matches,
        "exceeds": cert.optimum > target,
        "stars_only": cert.all_stars,
        "thresholds": regime_thresholds(t, box.m, box.n).as_dict(),
    }
    holds = matches and bool(cert.all_stars)
    if cert.regime == "inside":
        details["label"] = "inside-regime confirmation" if holds else "inside-regime violation"
        return Report.verdict("verify-theorem", params, holds, margin=cert.optimum - target,
                              witness=cert.counterexample, details=details)
    details["label"] = "outside-regime observation"
    details["conclusion_holds"] = holds
    return Report.verdict("verify-theorem", params, True, margin=cert.optimum - target,
                          witness=cert.counterexample, details=details, status="observation")


def _near_star_parts(box, Z, x, t):
    r = Restriction(tuple(Z), tuple(x)).check_in(box)
    if len(r) != t:
        raise DomainError(f"|Z| = {len(r)} but t = {t}")
    return r, make_star(box, r.coords, r.values)


def near_star_completion_check(F, Z, x, t):
    """An avoiding family that is almost the star on (Z, x) and large enough is that star."""
    box = F.box
    t = _check_t(box, t, box.n)
    r, star = _near_star_parts(box, Z, x, t)
    params = {"m": box.m, "n": box.n, "t": t, "restriction": r}
    outside = len(F - star)
    details = {"size": len(F), "outside": outside, "star_size": len(star)}
    if box.m < 8:
        return Report.unmet("near-star", params, f"m = {box.m} < 8", details)
    ok, pair = is_avoiding(F, t)
    if not ok:
        return Report.unmet("near-star", params, "family is not avoiding", {**details, "pair": pair})
    if len(F) < box.m ** (box.n - t):
        return Report.unmet("near-star", params, f"|F| = {len(F)} < m^(n-t) = {box.m ** (box.n - t)}", details)
    if outside * box.m ** (3 * t) > box.size:
        return Report.unmet("near-star", params, f"{outside} codes outside the star exceed m^(n-3t)", details)
    equal = F == star
    witness = None if equal else (F - star).codes()[:1]
    return Report.verdict("near-star", params, equal, margin=outside, witness=witness, details=details)


def near_star_completion_search(box, Z, x, t, budget=10 ** 6):
    """Largest avoiding family whose part outside the star is a given small set O.

    For every mutually avoiding O outside the star with |O| <= m^{n-3t}, the best completion is
    O together with the star members that conflict with nothing in O. The statement holds when
    every nonempty O leaves the completion below m^{n-t}.
    """
    t = _check_t(box, t, box.n)
    r, star = _near_star_parts(box, Z, x, t)
    target = box.m ** (box.n - t)
    cap = box.m ** (box.n - 3 * t) if box.n >= 3 * t else 0
    outside_codes = (Family.full(box) - star).code_array()
    star_codes = star.code_array()
    cap = min(cap, len(outside_codes))
    total = sum(math.comb(len(outside_codes), k) for k in range(1, cap + 1))
    if total > budget:
        raise BudgetError(f"{total} outside sets exceed the budget of {budget}")
    params = {"m": box.m, "n": box.n, "t": t, "restriction": r}
    best, best_set, checked = 0, None, 0
    for k in range(1, cap + 1):
        for combo in itertools.combinations(range(len(outside_codes)), k):
            chosen = outside_codes[list(combo)]
            if not is_avoiding(Family(box, [tuple(c) for c in chosen]), t)[0]:
                continue
            checked += 1
            agreements = (star_codes[:, None, :] == chosen[None, :, :]).sum(axis=2)
            blocked = (agreements == t - 1).any(axis=1)
            completion = k + int((~blocked).sum())
            if completion > best:
                best, best_set = completion, [tuple(int(s) for s in c) for c in chosen]
    holds = best < target
    details = {"outside_sets": checked, "max_completion": best, "target": target, "outside_cap": cap}
    if box.m < 8:
        details["conclusion_holds"] = holds
        return Report.verdict("near-star-search", params, True, margin=target - best,
                              witness=best_set, details=details, status="observation")
    return Report.verdict("near-star-search", params, holds, margin=target - best,
                          witness=None if holds else best_set, details=details)
