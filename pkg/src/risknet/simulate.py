"""Panel simulation from the full data-generating process.

Weekly loop: the correlation driver produces R_t (same recursion and
arithmetic as the estimation filter), one k-variate t-copula draw is mapped
through standardized-t quantiles to unit-variance shocks, the log-variance
and mean recursions run forward (mirroring the filters step for step, so
filtering the output with the true parameters and the recorded pre-sample
values reproduces every latent path), and prices compound from a base level.

All randomness comes from the in-package fixed-algorithm generator, so a
seeded run is reproducible bit for bit on any platform with IEEE doubles.
"""

from __future__ import annotations

import datetime as dt
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .copula import safe_cholesky
from .dcc import DccParams, _normalize_q, dcc_params_from_dict, dcc_params_to_dict
from .distributions import std_t_abs_moment, std_t_ppf, t_cdf
from .errors import ValidationError
from .marginals import ArmaParams, EgarchParams, arma_is_stationary
from .panel import PricePanel
from .rng import Xoshiro256
from .tableio import write_csv


@dataclass(frozen=True)
class SimulationSpec:
    """Everything needed to reproduce one synthetic panel."""

    entities: tuple[str, ...]
    n_weeks: int
    arma: tuple[ArmaParams, ...]
    egarch: tuple[EgarchParams, ...]
    dcc: DccParams
    seed: int
    loadings: tuple[float, ...] | None = None
    base_price: float = 100.0
    start_date: dt.date = dt.date(2005, 1, 7)

    def __post_init__(self):
        k = len(self.entities)
        if len(set(self.entities)) != k or k < 1:
            raise ValidationError("entities must be non-empty and unique")
        if len(self.arma) != k or len(self.egarch) != k:
            raise ValidationError("need one parameter set per entity")
        if self.dcc.n_entities != k:
            raise ValidationError("dcc target matrix size must match entities")
        if self.n_weeks < 1:
            raise ValidationError("n_weeks must be positive")
        if self.seed is None:
            raise ValidationError("a seed is mandatory")
        for i, (a, e) in enumerate(zip(self.arma, self.egarch)):
            if not (arma_is_stationary(a.ar) and e.is_stationary()):
                raise ValidationError(
                    f"entity {self.entities[i]}: parameters must be stationary "
                    "to seed the recursions at their unconditional levels"
                )
        if self.loadings is not None:
            object.__setattr__(
                self, "loadings", tuple(float(v) for v in self.loadings))
            if len(self.loadings) != k:
                raise ValidationError("need one loading per entity")

    @property
    def k(self) -> int:
        return len(self.entities)


@dataclass(frozen=True)
class GroundTruth:
    """Latent paths and pre-sample values recorded during simulation."""

    returns: np.ndarray           # (T, k)
    cond_mean: np.ndarray         # (T, k)
    cond_var: np.ndarray          # (T, k)
    shocks: np.ndarray            # (T, k) unit-variance
    uniforms: np.ndarray          # (T, k)
    r_series: np.ndarray          # (T, k, k)
    q_series: np.ndarray          # (T, k, k)
    presample_returns: tuple[tuple[float, ...], ...]
    presample_innovations: tuple[tuple[float, ...], ...]
    presample_log_variance: tuple[tuple[float, ...], ...]
    dates: tuple[dt.date, ...] = field(default=())


def simulate_panel(spec: SimulationSpec):
    """Run the generator; returns ``(PricePanel, GroundTruth)``."""
    k, T = spec.k, spec.n_weeks
    rng = Xoshiro256(spec.seed)
    qbar = spec.dcc.qbar
    c_coefs, d_coefs = spec.dcc.c, spec.dcc.d
    a = 1.0 - sum(c_coefs) - sum(d_coefs)
    nu_c = spec.dcc.nu_copula

    # Unconditional seeds, recorded so filters can reproduce the run exactly.
    pre_r, pre_y, pre_lh = [], [], []
    for arma, eg in zip(spec.arma, spec.egarch):
        mu_unc = arma.mu0 / (1.0 - sum(arma.ar)) if arma.p else 0.0
        lh_unc = eg.omega / (1.0 - sum(eg.beta))
        pre_r.append(tuple([mu_unc] * arma.p))
        pre_y.append(tuple([0.0] * arma.q))
        pre_lh.append(tuple([lh_unc] * eg.s))
    e_abs = [std_t_abs_moment(eg.nu) for eg in spec.egarch]

    rpad = [list(pre_r[i]) for i in range(k)]
    ypad = [list(pre_y[i]) for i in range(k)]
    lhpad = [list(pre_lh[i]) for i in range(k)]
    epad = [[0.0] * spec.egarch[i].r for i in range(k)]
    apad = [[0.0] * spec.egarch[i].r for i in range(k)]

    q_series = np.empty((T, k, k))
    r_series = np.empty((T, k, k))
    uniforms = np.empty((T, k))
    shocks = np.empty((T, k))
    cond_var = np.empty((T, k))
    cond_mean = np.empty((T, k))
    returns = np.empty((T, k))

    for t in range(T):
        if t == 0:
            Q = qbar.copy()
        else:
            Q = a * qbar
            for j, cj in enumerate(c_coefs, start=1):
                if t - j >= 0:
                    e_lag = shocks[t - j]
                    Q = Q + cj * (e_lag[:, None] * e_lag[None, :])
                else:
                    Q = Q + cj * qbar
            for j, dj in enumerate(d_coefs, start=1):
                Q = Q + dj * (q_series[t - j] if t - j >= 0 else qbar)
        q_series[t] = Q
        R = _normalize_q(Q, t)
        r_series[t] = R

        L = safe_cholesky(R)
        z = L @ rng.normals(k)
        w = rng.chi_square(nu_c) / nu_c
        uniforms[t] = t_cdf(z / math.sqrt(w), nu_c)

        for i in range(k):
            arma, eg = spec.arma[i], spec.egarch[i]
            eps = float(std_t_ppf(uniforms[t, i], eg.nu))

            x = eg.omega
            r_ord, s_ord = eg.r, eg.s
            for j in range(r_ord):
                x += (eg.alpha[j] * epad[i][r_ord + t - 1 - j]
                      + eg.gamma[j] * apad[i][r_ord + t - 1 - j])
            for j in range(s_ord):
                x += eg.beta[j] * lhpad[i][s_ord + t - 1 - j]
            lhpad[i].append(x)
            h = math.exp(x)
            epad[i].append(eps)
            apad[i].append(abs(eps) - e_abs[i])

            m = arma.mu0
            p, q = arma.p, arma.q
            for j in range(p):
                m += arma.ar[j] * rpad[i][p + t - 1 - j]
            for j in range(q):
                m += arma.ma[j] * ypad[i][q + t - 1 - j]
            y = math.sqrt(h) * eps
            r = m + y
            rpad[i].append(r)
            ypad[i].append(y)

            shocks[t, i] = eps
            cond_var[t, i] = h
            cond_mean[t, i] = m
            returns[t, i] = r

    dates = tuple(spec.start_date + dt.timedelta(weeks=t) for t in range(T + 1))
    prices = np.empty((T + 1, k))
    prices[0] = spec.base_price
    prices[1:] = spec.base_price * np.exp(np.cumsum(returns, axis=0))
    panel = PricePanel(entities=spec.entities, dates=dates, prices=prices)

    truth = GroundTruth(
        returns=returns, cond_mean=cond_mean, cond_var=cond_var,
        shocks=shocks, uniforms=uniforms, r_series=r_series,
        q_series=q_series,
        presample_returns=tuple(pre_r),
        presample_innovations=tuple(pre_y),
        presample_log_variance=tuple(pre_lh),
        dates=dates[1:],
    )
    return panel, truth


def factor_correlation(loadings) -> np.ndarray:
    """One-factor implied correlation: R = loadings loadings' off-diagonal."""
    lam = np.asarray(loadings, dtype=float)
    if np.any(np.abs(lam) >= 1.0):
        raise ValidationError("factor loadings must lie strictly inside (-1, 1)")
    R = np.outer(lam, lam)
    np.fill_diagonal(R, 1.0)
    return R


def tree_correlation(k: int, edges: dict) -> np.ndarray:
    """Correlation matrix implied by a Markov tree of pairwise links.

    ``edges`` maps node-index pairs (a, b) to link correlations in (0, 1);
    the pairs must form a spanning tree on ``k`` nodes.  The correlation of
    any two nodes is the product of link correlations along their unique
    path, which is positive definite by construction (it is the correlation
    of a Gaussian tree model) and makes the designed tree the unique
    minimum spanning tree whenever every direct link beats every path
    product.
    """
    adj: dict = {v: {} for v in range(k)}
    if len(edges) != k - 1:
        raise ValidationError(
            f"a spanning tree on {k} nodes needs {k - 1} edges, got {len(edges)}")
    for (a, b), w in edges.items():
        for v in (a, b):
            if not 0 <= v < k:
                raise ValidationError(f"edge node {v} outside 0..{k - 1}")
        if a == b or b in adj[a]:
            raise ValidationError(f"bad or duplicate edge ({a}, {b})")
        if not 0.0 < float(w) < 1.0:
            raise ValidationError(f"link correlation must lie in (0, 1), got {w}")
        adj[a][b] = float(w)
        adj[b][a] = float(w)
    corr = np.eye(k)
    for src in range(k):
        prod = {src: 1.0}
        frontier = [src]
        while frontier:
            nxt = []
            for u in frontier:
                for v, w in adj[u].items():
                    if v not in prod:
                        prod[v] = prod[u] * w
                        nxt.append(v)
            frontier = nxt
        if len(prod) != k:
            raise ValidationError("edges do not connect all nodes")
        corr[src] = [prod[t] for t in range(k)]
    return corr


def hub_market_spec(k: int, hub_loading: float, periphery_loading,
                    seed: int, n_weeks: int = 753) -> SimulationSpec:
    """A one-factor market with a designated hub (entity 0).

    ``periphery_loading`` may be a scalar (all peripherals equal, giving the
    textbook one-factor correlations hub*periphery and periphery^2) or a
    sequence of k-1 values for a graded periphery.
    """
    if k < 5:
        raise ValidationError(f"hub market needs at least 5 entities, got {k}")
    try:
        periph = [float(v) for v in periphery_loading]
    except TypeError:
        periph = [float(periphery_loading)] * (k - 1)
    if len(periph) != k - 1:
        raise ValidationError(f"need {k - 1} periphery loadings, got {len(periph)}")
    if not all(0.0 < v < hub_loading < 1.0 for v in periph):
        raise ValidationError(
            "loadings must satisfy 0 < periphery < hub < 1 for a hub structure"
        )
    loadings = (float(hub_loading),) + tuple(periph)
    entities = tuple(f"E{i + 1:02d}" for i in range(k))
    qbar = factor_correlation(loadings)
    dcc = DccParams(c=(0.05,), d=(0.90,), qbar=qbar, nu_copula=8.0)
    arma = tuple(ArmaParams(0.001, (0.05,), ()) for _ in range(k))
    egarch = tuple(
        EgarchParams(omega=-0.7, alpha=(-0.05,), gamma=(0.2,), beta=(0.9,),
                     nu=8.0)
        for _ in range(k)
    )
    return SimulationSpec(entities=entities, n_weeks=n_weeks, arma=arma,
                          egarch=egarch, dcc=dcc, seed=seed,
                          loadings=loadings)


DEMO_TREE_EDGES = {
    (0, 1): 0.66, (1, 2): 0.60, (2, 3): 0.50,
    (0, 4): 0.62, (4, 5): 0.56, (5, 6): 0.46,
    (0, 7): 0.52, (0, 8): 0.49, (0, 9): 0.46,
}
"""Hub-and-chains market on 10 entities: entity 0 is the hub with two chains
(1-2-3 and 4-5-6) plus three direct leaves.  Link strengths are graded so
every direct link beats every indirect path product (the designed tree is the
unique population minimum spanning tree) and the implied sector correlation
is monotone in tree centrality."""


def hub_chain_market_spec(seed: int, n_weeks: int = 753) -> SimulationSpec:
    """The bundled 10-entity hub market with chain-and-leaf periphery.

    A pure one-factor star makes every non-hub vertex a leaf of the
    population tree (betweenness identically zero), so cross-entity rank
    statistics on centrality would be determined by estimation noise alone.
    This market instead wires the hub to two graded chains and three leaves
    (DEMO_TREE_EDGES), giving strictly graded population centrality and
    sector correlation while keeping a dominant hub.
    """
    k = 10
    entities = tuple(f"E{i + 1:02d}" for i in range(k))
    qbar = tree_correlation(k, DEMO_TREE_EDGES)
    dcc = DccParams(c=(0.05,), d=(0.90,), qbar=qbar, nu_copula=8.0)
    arma = tuple(ArmaParams(0.001, (0.05,), ()) for _ in range(k))
    egarch = tuple(
        EgarchParams(omega=-0.7, alpha=(-0.05,), gamma=(0.2,), beta=(0.9,),
                     nu=8.0)
        for _ in range(k)
    )
    return SimulationSpec(entities=entities, n_weeks=n_weeks, arma=arma,
                          egarch=egarch, dcc=dcc, seed=seed)


# --- serialization and fixture emission ------------------------------------


def spec_to_dict(spec: SimulationSpec) -> dict:
    return {
        "entities": list(spec.entities),
        "n_weeks": spec.n_weeks,
        "seed": spec.seed,
        "base_price": spec.base_price,
        "start_date": spec.start_date.isoformat(),
        "loadings": list(spec.loadings) if spec.loadings is not None else None,
        "arma": [{"mu0": a.mu0, "ar": list(a.ar), "ma": list(a.ma)}
                 for a in spec.arma],
        "egarch": [{"omega": e.omega, "alpha": list(e.alpha),
                    "gamma": list(e.gamma), "beta": list(e.beta), "nu": e.nu}
                   for e in spec.egarch],
        "dcc": dcc_params_to_dict(spec.dcc),
    }


def spec_from_dict(d: dict) -> SimulationSpec:
    return SimulationSpec(
        entities=tuple(d["entities"]),
        n_weeks=int(d["n_weeks"]),
        arma=tuple(ArmaParams(a["mu0"], tuple(a["ar"]), tuple(a["ma"]))
                   for a in d["arma"]),
        egarch=tuple(EgarchParams(e["omega"], tuple(e["alpha"]),
                                  tuple(e["gamma"]), tuple(e["beta"]), e["nu"])
                     for e in d["egarch"]),
        dcc=dcc_params_from_dict(d["dcc"]),
        seed=int(d["seed"]),
        loadings=tuple(d["loadings"]) if d.get("loadings") is not None else None,
        base_price=float(d.get("base_price", 100.0)),
        start_date=dt.date.fromisoformat(d.get("start_date", "2005-01-07")),
    )


def load_spec_json(path) -> SimulationSpec:
    with open(path, encoding="utf-8") as fh:
        return spec_from_dict(json.load(fh))


def write_fixture(spec: SimulationSpec, prices_path, manifest_path,
                  hub_entity=None):
    """Emit the price CSV and a manifest tying it to its generating spec."""
    panel, _ = simulate_panel(spec)
    header = ["date"] + list(panel.entities)
    rows = [
        [panel.dates[t].isoformat()] + [float(v) for v in panel.prices[t]]
        for t in range(panel.prices.shape[0])
    ]
    write_csv(prices_path, header, rows,
              column_types=["date"] + ["float"] * panel.n_entities,
              description="Synthetic weekly price panel.")
    manifest = {
        "format_version": 1,
        "generator": "xoshiro256** seeded via splitmix64 (in-package)",
        "hub_entity": hub_entity,
        "spec": spec_to_dict(spec),
    }
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")
    return panel
