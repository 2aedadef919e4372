"""Correlation-derived minimum spanning trees and their topology indicators.

Each week's correlation matrix is mapped entrywise to the Mantegna metric
d = sqrt(2 (1 - rho)), the MST of the complete weighted graph is extracted by
Kruskal's algorithm with a deterministic tie-break, and four indicators are
read off the tree: mean hop distance over all pairs (APL), maximum degree,
the exponent of a discrete power law fitted to the degree sequence, and
per-node betweenness counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import zeta

from .errors import DomainError, ValidationError
from .tableio import write_csv
from .validation import check_correlation_matrix

_RHO_SLACK = 1e-9


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric Mantegna distances with zero diagonal."""

    entities: tuple[str, ...]
    d: np.ndarray

    def __post_init__(self):
        D = np.asarray(self.d, dtype=float)
        object.__setattr__(self, "d", D)
        k = len(self.entities)
        if D.shape != (k, k):
            raise ValidationError("distance matrix shape does not match entities")
        if np.abs(D - D.T).max() > 1e-12 or np.abs(np.diag(D)).max() != 0.0:
            raise ValidationError("distances must be symmetric with zero diagonal")
        if D.min() < 0.0 or D.max() > 2.0:
            raise ValidationError("Mantegna distances must lie in [0, 2]")


@dataclass(frozen=True)
class DegreeDistributionFit:
    """Discrete power-law fit P(s) = s^(-alpha) / zeta(alpha), s_min = 1."""

    alpha: float | None
    c: float | None
    n_obs: int
    converged: bool


@dataclass(frozen=True)
class TreeIndicators:
    apl: float
    max_degree: int
    alpha_degree: float | None
    bc_raw: tuple[int, ...]
    bc_normalized: tuple[float, ...]


@dataclass(frozen=True)
class WeeklyTree:
    """One week's spanning tree; ``edges`` hold (entity_a, entity_b, weight)."""

    date: object
    entities: tuple[str, ...]
    edges: tuple[tuple[str, str, float], ...]
    node_degrees: tuple[int, ...]
    indicators: TreeIndicators | None = field(default=None, compare=False)

    def __post_init__(self):
        k = len(self.entities)
        if len(self.edges) != k - 1:
            raise ValidationError(f"a tree on {k} nodes needs {k - 1} edges")
        if sum(self.node_degrees) != 2 * (k - 1):
            raise ValidationError("degree sum must equal twice the edge count")
        parent = list(range(k))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        index = {e: i for i, e in enumerate(self.entities)}
        for a, b, _ in self.edges:
            ra, rb = find(index[a]), find(index[b])
            if ra == rb:
                raise ValidationError(f"edge {a}-{b} closes a cycle")
            parent[ra] = rb
        # k-1 acyclic edges on k nodes are necessarily connected.

    @property
    def n_nodes(self) -> int:
        return len(self.entities)

    def adjacency(self) -> list[list[int]]:
        index = {e: i for i, e in enumerate(self.entities)}
        adj: list[list[int]] = [[] for _ in self.entities]
        for a, b, _ in self.edges:
            adj[index[a]].append(index[b])
            adj[index[b]].append(index[a])
        return adj


def mantegna_distance(rho: float) -> float:
    """Map a correlation to the metric d = sqrt(2 (1 - rho))."""
    if not math.isfinite(rho) or abs(rho) > 1.0 + _RHO_SLACK:
        raise DomainError(f"correlation must lie in [-1, 1], got {rho}")
    rho = min(max(rho, -1.0), 1.0)
    return math.sqrt(2.0 * (1.0 - rho))


def distance_matrix(corr, entities=None) -> DistanceMatrix:
    """Entrywise Mantegna map of a correlation matrix."""
    R = check_correlation_matrix(corr, name="correlation matrix")
    k = R.shape[0]
    if entities is None:
        entities = tuple(str(i) for i in range(k))
    if np.abs(R).max() > 1.0 + _RHO_SLACK:
        raise DomainError("correlation beyond [-1, 1] tolerance")
    D = np.sqrt(2.0 * (1.0 - np.clip(R, -1.0, 1.0)))
    np.fill_diagonal(D, 0.0)
    return DistanceMatrix(entities=tuple(entities), d=D)


def build_mst(dist: DistanceMatrix, date=None) -> WeeklyTree:
    """Kruskal MST with ties broken by (weight, first index, second index)."""
    D = dist.d
    k = D.shape[0]
    if k < 2:
        raise ValidationError("need at least 2 entities to span a tree")
    edges = sorted(
        ((D[i, j], i, j) for i in range(k) for j in range(i + 1, k)),
        key=lambda e: e,
    )
    parent = list(range(k))
    rank = [0] * k

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chosen = []
    degrees = [0] * k
    for w, i, j in edges:
        ri, rj = find(i), find(j)
        if ri == rj:
            continue
        if rank[ri] < rank[rj]:
            ri, rj = rj, ri
        parent[rj] = ri
        if rank[ri] == rank[rj]:
            rank[ri] += 1
        chosen.append((dist.entities[i], dist.entities[j], float(w)))
        degrees[i] += 1
        degrees[j] += 1
        if len(chosen) == k - 1:
            break
    return WeeklyTree(date=date, entities=dist.entities, edges=tuple(chosen),
                      node_degrees=tuple(degrees))


def _subtree_sizes(tree: WeeklyTree):
    """Yield, per edge, the node count on the child side of that edge."""
    adj = tree.adjacency()
    k = tree.n_nodes
    order = []
    parent = [-1] * k
    seen = [False] * k
    stack = [0]
    seen[0] = True
    while stack:
        v = stack.pop()
        order.append(v)
        for w in adj[v]:
            if not seen[w]:
                seen[w] = True
                parent[w] = v
                stack.append(w)
    size = [1] * k
    for v in reversed(order):
        if parent[v] >= 0:
            size[parent[v]] += size[v]
    return [size[v] for v in range(k) if parent[v] >= 0]


def apl(tree: WeeklyTree) -> float:
    """Mean hop distance over all unordered node pairs.

    Uses the tree identity sum_pairs dist(s, t) = sum_edges s_e (k - s_e),
    where s_e counts the nodes cut off by removing edge e.
    """
    k = tree.n_nodes
    if k < 2:
        raise ValidationError("mean path length needs at least 2 nodes")
    total = sum(s * (k - s) for s in _subtree_sizes(tree))
    return total / (k * (k - 1) / 2)


def max_degree(tree: WeeklyTree) -> int:
    return max(tree.node_degrees)


def betweenness(tree: WeeklyTree):
    """Per-node transit counts: pairs whose unique path passes through the node.

    In a tree each pair has exactly one shortest path, so each pair
    contributes 0 or 1. Returns ``(raw, normalized)`` with the normalizer
    (k-1)(k-2)/2, the pair count excluding the node itself.
    """
    adj = tree.adjacency()
    k = tree.n_nodes
    raw = []
    for v in range(k):
        # Branch sizes of tree - v: pairs through v take one node from each
        # of two different branches.
        branch = []
        seen = [False] * k
        seen[v] = True
        for w in adj[v]:
            if seen[w]:
                continue
            count = 0
            stack = [w]
            seen[w] = True
            while stack:
                x = stack.pop()
                count += 1
                for y in adj[x]:
                    if not seen[y]:
                        seen[y] = True
                        stack.append(y)
            branch.append(count)
        total = sum(branch)
        raw.append((total * total - sum(b * b for b in branch)) // 2)
    denom = (k - 1) * (k - 2) / 2
    normalized = tuple(r / denom if denom > 0 else 0.0 for r in raw)
    return tuple(raw), normalized


def fit_degree_alpha(degrees, alpha_max=50.0) -> DegreeDistributionFit:
    """Discrete power-law MLE on P(s) = s^(-alpha)/zeta(alpha) with s_min = 1.

    Needs at least 3 distinct degree values; otherwise (or at an exponent
    search boundary) the fit reports ``converged = False`` with alpha absent.
    """
    s = np.asarray(list(degrees), dtype=float)
    if s.size == 0 or np.any(s < 1) or np.any(s != np.round(s)):
        raise ValidationError("degrees must be positive integers")
    n = int(s.size)
    if len(set(s.tolist())) < 3:
        return DegreeDistributionFit(alpha=None, c=None, n_obs=n, converged=False)
    log_sum = float(np.sum(np.log(s)))

    def neg_loglik(a):
        return a * log_sum + n * math.log(zeta(a, 1.0))

    res = minimize_scalar(neg_loglik, bounds=(1.0 + 1e-9, alpha_max),
                          method="bounded", options={"xatol": 1e-7})
    alpha = float(res.x)
    if not res.success or alpha >= alpha_max - 1e-3:
        return DegreeDistributionFit(alpha=None, c=None, n_obs=n, converged=False)
    return DegreeDistributionFit(alpha=alpha, c=1.0 / float(zeta(alpha, 1.0)),
                                 n_obs=n, converged=True)


def tree_indicators(tree: WeeklyTree) -> TreeIndicators:
    bc_raw, bc_norm = betweenness(tree)
    fit = fit_degree_alpha(tree.node_degrees)
    return TreeIndicators(
        apl=apl(tree),
        max_degree=max_degree(tree),
        alpha_degree=fit.alpha if fit.converged else None,
        bc_raw=bc_raw,
        bc_normalized=bc_norm,
    )


def weekly_tree(corr, entities=None, date=None) -> WeeklyTree:
    """Distance matrix -> MST -> indicators for a single week."""
    dist = distance_matrix(corr, entities)
    tree = build_mst(dist, date=date)
    ind = tree_indicators(tree)
    return WeeklyTree(date=tree.date, entities=tree.entities, edges=tree.edges,
                      node_degrees=tree.node_degrees, indicators=ind)


def tree_indicator_series(dcc_state, dates=None, entities=None):
    """One indicator-bearing tree per week of a filtered correlation path."""
    R = np.asarray(dcc_state.r_series, dtype=float)
    T, k = R.shape[0], R.shape[1]
    if entities is None:
        entities = tuple(str(i) for i in range(k))
    if dates is None:
        dates = tuple(range(T))
    if len(dates) != T:
        raise ValidationError(f"got {len(dates)} dates for {T} weeks")
    out = []
    for t in range(T):
        try:
            out.append(weekly_tree(R[t], entities=entities, date=dates[t]))
        except (ValidationError, DomainError) as exc:
            raise type(exc)(f"week {t} ({dates[t]}): {exc}") from exc
    return out


def _date_str(date) -> str:
    return date.isoformat() if hasattr(date, "isoformat") else str(date)


def save_indicators_csv(path, trees):
    """Per-week scalar indicators; alpha is left empty when unconverged."""
    rows = []
    for tree in trees:
        ind = tree.indicators
        if ind is None:
            raise ValidationError("trees must carry computed indicators")
        rows.append((
            _date_str(tree.date),
            float(ind.apl),
            int(ind.max_degree),
            "" if ind.alpha_degree is None else float(ind.alpha_degree),
            float(max(ind.bc_normalized)),
        ))
    write_csv(path,
              ["date", "apl", "max_degree", "alpha_degree", "bc_max"],
              rows,
              column_types=["date", "float", "int", "float", "float"],
              description="Weekly tree indicators: mean path length, maximum "
                          "degree, degree power-law exponent, largest "
                          "normalized betweenness.")


def save_bc_csv(path, trees):
    """Long-format per-node betweenness, normalized and raw."""
    rows = []
    for tree in trees:
        ind = tree.indicators
        if ind is None:
            raise ValidationError("trees must carry computed indicators")
        date_s = _date_str(tree.date)
        for i, entity in enumerate(tree.entities):
            rows.append((date_s, entity, float(ind.bc_normalized[i]),
                         int(ind.bc_raw[i])))
    write_csv(path, ["date", "entity", "bc_normalized", "bc_raw"], rows,
              column_types=["date", "string", "float", "int"],
              description="Per-week, per-node betweenness in the spanning tree.")


def save_edges_csv(path, trees):
    """Per-week tree edge lists with Mantegna weights."""
    rows = []
    for tree in trees:
        date_s = _date_str(tree.date)
        for a, b, w in tree.edges:
            rows.append((date_s, a, b, float(w)))
    write_csv(path, ["date", "entity_a", "entity_b", "weight"], rows,
              column_types=["date", "string", "string", "float"],
              description="Per-week spanning-tree edges.")
