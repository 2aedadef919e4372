"""Shared test oracles: independent re-implementations used to cross-check
the package's filters, graph algorithms, and copula numerics.

Everything here is deliberately written from the defining equations with
different code shapes (dict-based loops, BFS, brute-force enumeration) so a
shared bug with the production code is unlikely.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from scipy.special import gammaln


# --- scalar-loop filter oracles ---------------------------------------------


def arma_oracle(mu0, ar, ma, returns, pre_returns=None, pre_innov=None):
    """Conditional mean recursion, one scalar at a time, lag-by-lag."""
    p, q = len(ar), len(ma)
    r = [float(v) for v in returns]
    rbar = sum(r) / len(r)
    pre_r = list(pre_returns) if pre_returns is not None else [rbar] * p
    pre_y = list(pre_innov) if pre_innov is not None else [0.0] * q
    mu, y = [], []
    for t in range(len(r)):
        m = float(mu0)
        for j in range(1, p + 1):
            lag = t - j
            m += ar[j - 1] * (r[lag] if lag >= 0 else pre_r[lag])
        for j in range(1, q + 1):
            lag = t - j
            m += ma[j - 1] * (y[lag] if lag >= 0 else pre_y[lag])
        mu.append(m)
        y.append(r[t] - m)
    return np.array(mu), np.array(y)


def abs_moment_oracle(nu):
    """E|eps| for the unit-variance Student-t, from the closed form."""
    return (2.0 * math.sqrt(nu - 2.0) * math.exp(gammaln((nu + 1.0) / 2.0)
            - gammaln(nu / 2.0)) / (math.sqrt(math.pi) * (nu - 1.0)))


def egarch_oracle(omega, alpha, gamma, beta, nu, innovations, pre_logh=None):
    """Log-variance recursion with zero pre-sample shock terms."""
    r, s = len(alpha), len(beta)
    y = [float(v) for v in innovations]
    n = len(y)
    mean_y = sum(y) / n
    var1 = sum((v - mean_y) ** 2 for v in y) / (n - 1)
    lh0 = math.log(var1) if pre_logh is None else None
    pre = list(pre_logh) if pre_logh is not None else None
    mom = abs_moment_oracle(nu)
    logh, eps = [], []
    for t in range(n):
        x = float(omega)
        for j in range(1, r + 1):
            lag = t - j
            if lag >= 0:
                e = eps[lag]
                x += alpha[j - 1] * e + gamma[j - 1] * (abs(e) - mom)
            # pre-sample shock contribution is zero by convention
        for j in range(1, s + 1):
            lag = t - j
            if lag >= 0:
                x += beta[j - 1] * logh[lag]
            elif pre is not None:
                x += beta[j - 1] * pre[lag]
            else:
                x += beta[j - 1] * lh0
        logh.append(x)
        eps.append(y[t] / math.sqrt(math.exp(x)))
    return np.exp(np.array(logh))


def dcc_oracle(c, d, qbar, shocks):
    """Correlation recursion element-by-element with nested Python loops."""
    T, k = shocks.shape
    m, n = len(c), len(d)
    qbar = np.asarray(qbar, dtype=float)
    q_hist = []
    r_out = np.empty((T, k, k))
    for t in range(T):
        q = np.empty((k, k))
        for a in range(k):
            for b in range(k):
                val = (1.0 - sum(c) - sum(d)) * qbar[a, b]
                for j in range(1, m + 1):
                    if t - j >= 0:
                        val += c[j - 1] * shocks[t - j, a] * shocks[t - j, b]
                    else:
                        val += c[j - 1] * qbar[a, b]
                for j in range(1, n + 1):
                    if t - j >= 0:
                        val += d[j - 1] * q_hist[t - j][a, b]
                    else:
                        val += d[j - 1] * qbar[a, b]
                q[a, b] = val
        q_hist.append(q)
        for a in range(k):
            for b in range(k):
                r_out[t, a, b] = q[a, b] / math.sqrt(q[a, a] * q[b, b])
    return r_out


# --- graph oracles -----------------------------------------------------------


def prufer_to_edges(seq, k):
    """Decode a Prüfer sequence into the edge list of a labeled tree."""
    degree = [1] * k
    for v in seq:
        degree[v] += 1
    edges = []
    used = [False] * k
    for v in seq:
        for leaf in range(k):
            if degree[leaf] == 1 and not used[leaf]:
                edges.append((min(leaf, v), max(leaf, v)))
                used[leaf] = True
                degree[v] -= 1
                break
    last = [v for v in range(k) if not used[v] and degree[v] == 1]
    edges.append((min(last), max(last)))
    return edges


def all_spanning_trees(k):
    """All k^(k-2) labeled trees on k nodes as edge lists."""
    if k == 2:
        return [[(0, 1)]]
    return [prufer_to_edges(seq, k)
            for seq in itertools.product(range(k), repeat=k - 2)]


def min_spanning_weight_bruteforce(dist):
    """Minimum total weight over exhaustive spanning-tree enumeration."""
    k = dist.shape[0]
    best = math.inf
    for edges in all_spanning_trees(k):
        w = sum(dist[a, b] for a, b in edges)
        best = min(best, w)
    return best


def tree_adjacency(edges, k):
    adj = {v: [] for v in range(k)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    return adj


def bfs_paths(adj, src, k):
    """Hop distances and parent pointers from src via BFS."""
    dist = {src: 0}
    parent = {src: None}
    frontier = [src]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    parent[v] = u
                    nxt.append(v)
        frontier = nxt
    return dist, parent


def apl_bfs_oracle(edges, k):
    """Average path length via all-pairs BFS."""
    adj = tree_adjacency(edges, k)
    total = 0
    for s in range(k):
        dist, _ = bfs_paths(adj, s, k)
        total += sum(dist[v] for v in range(k) if v > s)
    return total / (k * (k - 1) / 2)


def bc_paths_oracle(edges, k):
    """Raw betweenness by walking the unique path of every node pair."""
    adj = tree_adjacency(edges, k)
    counts = [0] * k
    for s in range(k):
        _, parent = bfs_paths(adj, s, k)
        for t in range(s + 1, k):
            node = parent[t]
            while node is not None and node != s:
                counts[node] += 1
                node = parent[node]
    return counts


# --- Monte Carlo copula oracle ----------------------------------------------


def sample_bivariate_t_copula(rho, nu, n, seed):
    """Vectorized classic bivariate-t copula sample using numpy's generator."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, 2))
    z[:, 1] = rho * z[:, 0] + math.sqrt(1.0 - rho * rho) * z[:, 1]
    w = rng.chisquare(nu, n) / nu
    t = z / np.sqrt(w)[:, None]
    from scipy.special import stdtr
    return stdtr(nu, t)


def mc_copula_cdf(u, v, rho, nu, n=10**6, seed=0):
    """Monte Carlo estimate of C(u, v) and its standard error."""
    uv = sample_bivariate_t_copula(rho, nu, n, seed)
    hits = np.logical_and(uv[:, 0] <= u, uv[:, 1] <= v)
    p = hits.mean()
    se = math.sqrt(max(p * (1.0 - p), 1e-12) / n)
    return p, se


# --- tiny panels --------------------------------------------------------------


@pytest.fixture()
def tiny_price_csv(tmp_path):
    """A 6-row, 3-entity weekly price CSV for parser tests."""
    path = tmp_path / "prices.csv"
    path.write_text(
        "date,AAA,BBB,CCC\n"
        "2006-01-06,100.0,50.0,200.0\n"
        "2006-01-13,101.0,49.5,202.0\n"
        "2006-01-20,102.5,49.0,198.0\n"
        "2006-01-27,101.5,50.5,205.0\n"
        "2006-02-03,103.0,51.0,207.5\n"
        "2006-02-10,104.0,50.0,210.0\n"
    )
    return str(path)
