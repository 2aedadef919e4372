"""Command-line pipeline: simulate, fit, mst, covar, relate, report.

Configuration precedence is defaults < JSON config file < environment
(RISKNET_OUTPUT_DIR for the output directory) < command-line flags.  Exit
codes: 0 full success, 1 partial (some entities failed but the run finished),
2 hard failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from .dcc import dcc_filter, fit_dcc, save_correlations_csv, save_dcc_json
from .errors import ConfigError, RisknetError
from .marginals import fit_marginal, save_marginals_json, standardize
from .panel import (PricePanel, default_crisis_calendar, label_dates,
                    load_calendar_json, load_price_csv, to_log_returns)
from .report import (relate_table, save_relate_csv, save_relate_summary,
                     svg_line_chart, svg_scatter)
from .risk import QuantileLevels, risk_series_all, save_risk_csv, save_risk_summary_csv
from .simulate import hub_chain_market_spec, load_spec_json, write_fixture
from .trees import (save_bc_csv, save_edges_csv, save_indicators_csv,
                    tree_indicator_series)

ENV_OUTPUT_DIR = "RISKNET_OUTPUT_DIR"

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_HARD = 2

_FIXTURE_SEED = 20050107


@dataclass(frozen=True)
class RunConfig:
    """Resolved run parameters shared by every analytic subcommand."""

    input: str | None = None
    entities: tuple[str, ...] | None = None
    orders: tuple[int, int, int, int] = (1, 0, 1, 1)
    dcc_orders: tuple[int, int] = (1, 1)
    alpha: float = 0.05
    beta: float = 0.05
    calendar: str | None = None
    output_dir: str = "risknet_out"
    jobs: int = 1
    seed: int = _FIXTURE_SEED
    min_obs: int = 200

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0.0 < v <= 0.5:
                raise ConfigError(f"{name} must lie in (0, 0.5], got {v}")
        for name, orders in (("orders", self.orders), ("dcc_orders", self.dcc_orders)):
            if any((not isinstance(v, int)) or v < 0 or v > 3 for v in orders):
                raise ConfigError(
                    f"{name} must be small non-negative integers (<= 3), got {orders}"
                )
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if self.min_obs < 10:
            raise ConfigError(f"min_obs must be >= 10, got {self.min_obs}")

    @property
    def levels(self) -> QuantileLevels:
        return QuantileLevels(alpha=self.alpha, beta=self.beta)


def _parse_int_tuple(text: str, n: int, what: str) -> tuple[int, ...]:
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != n:
        raise ConfigError(f"{what} needs {n} comma-separated integers, got {text!r}")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise ConfigError(f"{what} must be integers, got {text!r}") from None


def load_config(args) -> RunConfig:
    """Merge config file, environment and CLI flags into a RunConfig."""
    values: dict = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"bad config JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        allowed = {f.name for f in dataclasses.fields(RunConfig)}
        unknown = set(raw) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values.update(raw)

    if os.environ.get(ENV_OUTPUT_DIR):
        values["output_dir"] = os.environ[ENV_OUTPUT_DIR]

    flag_map = {
        "input": "input", "entities": "entities", "orders": "orders",
        "dcc_orders": "dcc_orders", "alpha": "alpha", "beta": "beta",
        "calendar": "calendar", "out_dir": "output_dir", "jobs": "jobs",
        "seed": "seed", "min_obs": "min_obs",
    }
    for flag, key in flag_map.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[key] = v

    if "entities" in values and values["entities"] is not None:
        ents = values["entities"]
        if isinstance(ents, str):
            ents = [e.strip() for e in ents.split(",") if e.strip()]
        values["entities"] = tuple(ents)
    if "orders" in values and not isinstance(values["orders"], tuple):
        seq = values["orders"]
        values["orders"] = (_parse_int_tuple(seq, 4, "orders")
                            if isinstance(seq, str) else tuple(int(v) for v in seq))
    if "dcc_orders" in values and not isinstance(values["dcc_orders"], tuple):
        seq = values["dcc_orders"]
        values["dcc_orders"] = (_parse_int_tuple(seq, 2, "dcc_orders")
                                if isinstance(seq, str) else tuple(int(v) for v in seq))
    for key in ("alpha", "beta"):
        if key in values:
            values[key] = float(values[key])
    for key in ("jobs", "seed", "min_obs"):
        if key in values:
            values[key] = int(values[key])
    return RunConfig(**values)


def bundled_fixture_path() -> str:
    return os.path.join(os.path.dirname(__file__), "data", "demo_prices.csv")


def bundled_manifest_path() -> str:
    return os.path.join(os.path.dirname(__file__), "data", "demo_manifest.json")


# --- pipeline stages -------------------------------------------------------


class Pipeline:
    """Lazy end-to-end computation shared by the analytic subcommands."""

    def __init__(self, cfg: RunConfig):
        if not cfg.input:
            raise ConfigError("an input price CSV is required (--input)")
        self.cfg = cfg
        self.failures: dict[str, str] = {}
        self._panel = None
        self._returns = None
        self._marginals = None
        self._dcc = None
        self._trees = None
        self._risk = None

    @property
    def panel(self) -> PricePanel:
        if self._panel is None:
            panel = load_price_csv(self.cfg.input)
            if self.cfg.entities:
                missing = [e for e in self.cfg.entities if e not in panel.entities]
                if missing:
                    raise ConfigError(f"entities not in input: {missing}")
                keep = [panel.entities.index(e) for e in self.cfg.entities]
                panel = PricePanel(
                    entities=tuple(panel.entities[i] for i in keep),
                    dates=panel.dates,
                    prices=panel.prices[:, keep],
                )
            self._panel = panel
        return self._panel

    @property
    def returns(self):
        if self._returns is None:
            self._returns = to_log_returns(self.panel)
        return self._returns

    @property
    def labels(self):
        if self.cfg.calendar:
            calendar = load_calendar_json(self.cfg.calendar)
        else:
            calendar = default_crisis_calendar()
        return label_dates(self.returns.dates, calendar)

    def marginal_models(self) -> dict:
        if self._marginals is None:
            models = {}
            for entity in self.returns.entities:
                try:
                    models[entity] = fit_marginal(
                        self.returns.column(entity), self.cfg.orders,
                        min_obs=self.cfg.min_obs)
                except RisknetError as exc:
                    self.failures[entity] = f"{type(exc).__name__}: {exc}"
            self._marginals = models
        return self._marginals

    def dcc_state(self):
        if self._dcc is None:
            models = self.marginal_models()
            fitted = [e for e in self.returns.entities if e in models]
            if len(fitted) < 2:
                raise RisknetError(
                    f"only {len(fitted)} entities fitted; dependence stage "
                    "needs at least 2"
                )
            shocks = np.column_stack([models[e].std_resid for e in fitted])
            uniforms = np.column_stack([standardize(models[e]) for e in fitted])
            params = fit_dcc(shocks, self.cfg.dcc_orders,
                             min_obs=self.cfg.min_obs, uniforms=uniforms)
            state = dcc_filter(params, shocks, keep_q=False)
            self._dcc = (fitted, params, state)
        return self._dcc

    def trees(self):
        if self._trees is None:
            fitted, _, state = self.dcc_state()
            self._trees = tree_indicator_series(
                state, dates=self.returns.dates, entities=tuple(fitted))
        return self._trees

    def risk(self):
        if self._risk is None:
            models = self.marginal_models()
            series, risk_failures = risk_series_all(
                self.returns, self.cfg.levels, marginal_models=models,
                orders=self.cfg.orders, dcc_orders=self.cfg.dcc_orders,
                min_obs=self.cfg.min_obs, n_jobs=self.cfg.jobs)
            series = [s for s in series if s.entity in models]
            for entity, msg in risk_failures.items():
                self.failures.setdefault(entity, msg)
            self._risk = series
        return self._risk

    # --- artifact writers ---

    def out(self, name: str) -> str:
        os.makedirs(self.cfg.output_dir, exist_ok=True)
        return os.path.join(self.cfg.output_dir, name)

    def write_config_echo(self):
        cfg = self.cfg
        echo = {
            "input_basename": os.path.basename(cfg.input) if cfg.input else None,
            "entities": list(cfg.entities) if cfg.entities else None,
            "orders": list(cfg.orders),
            "dcc_orders": list(cfg.dcc_orders),
            "alpha": cfg.alpha,
            "beta": cfg.beta,
            "calendar_basename": (os.path.basename(cfg.calendar)
                                  if cfg.calendar else "built-in"),
            "seed": cfg.seed,
            "min_obs": cfg.min_obs,
        }
        with open(self.out("run_config.json"), "w", encoding="utf-8") as fh:
            json.dump(echo, fh, indent=1, sort_keys=True)
            fh.write("\n")

    def write_fit(self):
        models = self.marginal_models()
        fitted, params, state = self.dcc_state()
        save_marginals_json([models[e] for e in fitted], self.out("marginals.json"),
                            entities=fitted)
        save_dcc_json(params, self.out("dcc_params.json"))
        save_correlations_csv(self.out("correlations.csv"), self.returns.dates,
                              fitted, state.r_series)
        summary = {
            "n_entities_input": self.returns.n_entities,
            "n_entities_fitted": len(fitted),
            "failures": dict(sorted(self.failures.items())),
            "dcc": {"c": list(params.c), "d": list(params.d),
                    "nu_copula": params.nu_copula},
        }
        with open(self.out("fit_summary.json"), "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=1, sort_keys=True)
            fh.write("\n")

    def write_mst(self):
        trees = self.trees()
        save_indicators_csv(self.out("tree_indicators.csv"), trees)
        save_bc_csv(self.out("tree_bc.csv"), trees)
        save_edges_csv(self.out("tree_edges.csv"), trees)
        dates = [str(t.date) for t in trees]
        svg_line_chart(
            self.out("tree_indicators.svg"), dates,
            {"apl": [t.indicators.apl for t in trees],
             "bc_max": [max(t.indicators.bc_normalized) for t in trees]},
            "Tree compactness per week", "level")
        svg_line_chart(
            self.out("tree_degree.svg"), dates,
            {"max_degree": [float(t.indicators.max_degree) for t in trees],
             "alpha_degree": [t.indicators.alpha_degree for t in trees]},
            "Degree concentration per week", "level")

    def write_covar(self):
        series = self.risk()
        if not series:
            raise RisknetError("no entity produced a risk series")
        save_risk_csv(self.out("risk.csv"), series)
        save_risk_summary_csv(self.out("risk_summary.csv"), series, self.labels)
        dates = [d.isoformat() for d in self.returns.dates]
        stack = np.stack([s.delta_covar for s in series])
        svg_line_chart(
            self.out("delta_covar.svg"), dates,
            {"cross-entity mean": list(np.mean(stack, axis=0)),
             "cross-entity min": list(np.min(stack, axis=0))},
            "Delta-CoVaR per week", "return")

    def write_relate(self):
        rows, rho = relate_table(self.trees(), self.risk())
        save_relate_csv(self.out("relate.csv"), rows)
        save_relate_summary(self.out("relate_summary.json"), rows, rho)
        svg_scatter(self.out("relate.svg"),
                    [(e, bc, dc) for e, bc, dc in rows],
                    "Mean betweenness vs mean delta-CoVaR",
                    "mean normalized betweenness", "mean delta-CoVaR")
        return rho

    def exit_code(self) -> int:
        return EXIT_PARTIAL if self.failures else EXIT_OK


# --- subcommand entry points ----------------------------------------------


def cmd_simulate(args) -> int:
    out_dir = args.out_dir or os.environ.get(ENV_OUTPUT_DIR) or "risknet_out"
    os.makedirs(out_dir, exist_ok=True)
    if args.spec:
        spec = load_spec_json(args.spec)
        hub = None
    else:
        seed = args.seed if args.seed is not None else _FIXTURE_SEED
        spec = demo_fixture_spec(seed)
        hub = spec.entities[0]
    prices_path = os.path.join(out_dir, args.prices_name)
    manifest_path = os.path.join(out_dir, args.manifest_name)
    panel = write_fixture(spec, prices_path, manifest_path, hub_entity=hub)
    print(f"wrote {prices_path} ({panel.n_weeks} rows x {panel.n_entities} "
          f"entities) and {manifest_path}")
    return EXIT_OK


def demo_fixture_spec(seed: int = _FIXTURE_SEED):
    """The bundled demo market: a hub with graded chains, 754 weekly rows."""
    return hub_chain_market_spec(seed=seed, n_weeks=753)


def _run_stage(args, stages) -> int:
    cfg = load_config(args)
    pipe = Pipeline(cfg)
    pipe.write_config_echo()
    if "fit" in stages:
        pipe.write_fit()
    if "mst" in stages:
        pipe.write_mst()
    if "covar" in stages:
        pipe.write_covar()
    rho = None
    if "relate" in stages:
        rho = pipe.write_relate()

    fitted = len(pipe.marginal_models())
    total = pipe.returns.n_entities
    print(f"fitted {fitted}/{total} entities; outputs in {cfg.output_dir}")
    if rho is not None:
        print(f"spearman(mean BC, mean delta-CoVaR) = {rho:.4f}")
    for entity, msg in sorted(pipe.failures.items()):
        print(f"entity {entity} failed: {msg}", file=sys.stderr)
    return pipe.exit_code()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="risknet",
        description="Correlation-network and conditional-quantile analytics "
                    "for weekly price panels.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="emit a synthetic price fixture")
    p_sim.add_argument("--spec", help="SimulationSpec JSON path")
    p_sim.add_argument("--seed", type=int, help="seed for the built-in demo spec")
    p_sim.add_argument("--out-dir", help="output directory")
    p_sim.add_argument("--prices-name", default="demo_prices.csv")
    p_sim.add_argument("--manifest-name", default="demo_manifest.json")

    def add_common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--input", help="price panel CSV")
        p.add_argument("--entities", help="comma-separated entity filter")
        p.add_argument("--orders", help="mean/variance orders p,q,r,s")
        p.add_argument("--dcc-orders", dest="dcc_orders", help="orders m,n")
        p.add_argument("--alpha", type=float, help="conditioning tail level")
        p.add_argument("--beta", type=float, help="quantile tail level")
        p.add_argument("--calendar", help="market-state calendar JSON")
        p.add_argument("--out-dir", dest="out_dir", help="output directory")
        p.add_argument("--jobs", type=int, help="parallel workers")
        p.add_argument("--seed", type=int, help="run seed")
        p.add_argument("--min-obs", dest="min_obs", type=int,
                       help="minimum observations for estimation")

    for name, help_text, stages in (
        ("fit", "fit marginal and dependence models", ("fit",)),
        ("mst", "weekly spanning trees and indicators", ("mst",)),
        ("covar", "weekly conditional quantile measures", ("covar",)),
        ("relate", "join betweenness with delta-CoVaR", ("relate",)),
        ("report", "full pipeline: fit + mst + covar + relate",
         ("fit", "mst", "covar", "relate")),
    ):
        p = sub.add_parser(name, help=help_text)
        add_common(p)
        p.set_defaults(stages=stages)

    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        return _run_stage(args, args.stages)
    except RisknetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HARD
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HARD


if __name__ == "__main__":
    sys.exit(main())
