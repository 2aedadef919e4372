"""Correlation-network and conditional-quantile analytics for weekly panels.

The package turns a panel of weekly prices into (1) time-varying correlation
matrices via per-entity mean/volatility filters and a dynamic correlation
recursion with a Student-t copula, (2) weekly minimum spanning trees of the
correlation structure with topology indicators, and (3) per-entity
conditional quantile risk measures (CoVaR and its delta form) solved from
the bivariate copula.
"""

from .copula import (mvt_copula_sample, safe_cholesky, t_copula_cdf,
                     t_copula_conditional, t_copula_sample)
from .dcc import (DccParams, DccState, copula_scores, dcc_filter, fit_dcc,
                  rank_uniforms,
                  load_correlations_csv, load_dcc_json, save_correlations_csv,
                  save_dcc_json, t_copula_loglik)
from .errors import (ConfigError, DomainError, EstimationError, NumericalError,
                     ParseError, RisknetError, SolverError, ValidationError)
from .estimators import DccCorrelationModel, MarginalVolatilityModel
from .marginals import (ArmaParams, EgarchParams, MarginalModel, arma_filter,
                        egarch_filter, filter_loglik, fit_marginal,
                        load_marginals_json, save_marginals_json, standardize)
from .panel import (CsvSchema, MarketStateCalendar, PricePanel, ReturnPanel,
                    default_crisis_calendar, label_dates, load_calendar_json,
                    load_price_csv, to_log_returns)
from .report import relate_table, save_relate_csv, save_relate_summary
from .risk import (CovarBreakdown, QuantileLevels, RiskSeries, covar_solve,
                   delta_covar, risk_series_all, risk_series_for_entity,
                   save_risk_csv, save_risk_summary_csv,
                   sector_index_returns, solve_conditional_quantile,
                   var_quantile)
from .rng import Xoshiro256
from .simulate import (GroundTruth, SimulationSpec, factor_correlation,
                       hub_market_spec, simulate_panel, write_fixture)
from .trees import (DegreeDistributionFit, DistanceMatrix, TreeIndicators,
                    WeeklyTree, apl, betweenness, build_mst, distance_matrix,
                    fit_degree_alpha, mantegna_distance, max_degree,
                    tree_indicator_series, tree_indicators, weekly_tree)

__version__ = "0.1.0"

__all__ = [
    "ArmaParams", "ConfigError", "CovarBreakdown", "CsvSchema",
    "DccCorrelationModel", "DccParams", "DccState", "DegreeDistributionFit",
    "DistanceMatrix", "DomainError", "EgarchParams", "EstimationError",
    "GroundTruth", "MarginalModel", "MarginalVolatilityModel",
    "MarketStateCalendar", "NumericalError", "ParseError", "PricePanel",
    "QuantileLevels", "ReturnPanel", "RisknetError", "RiskSeries",
    "SimulationSpec", "SolverError", "TreeIndicators", "ValidationError",
    "WeeklyTree", "Xoshiro256", "apl", "betweenness", "build_mst",
    "copula_scores", "covar_solve", "dcc_filter", "default_crisis_calendar",
    "rank_uniforms",
    "delta_covar", "distance_matrix", "egarch_filter", "factor_correlation",
    "filter_loglik", "fit_dcc", "fit_degree_alpha", "fit_marginal",
    "hub_market_spec", "label_dates", "load_calendar_json",
    "load_correlations_csv", "load_dcc_json", "load_marginals_json",
    "load_price_csv", "mantegna_distance", "max_degree", "mvt_copula_sample",
    "relate_table", "risk_series_all", "risk_series_for_entity",
    "safe_cholesky", "save_correlations_csv", "save_dcc_json",
    "save_marginals_json", "save_relate_csv", "save_relate_summary",
    "save_risk_csv", "save_risk_summary_csv", "sector_index_returns",
    "simulate_panel", "solve_conditional_quantile", "standardize",
    "t_copula_cdf", "t_copula_conditional", "t_copula_loglik",
    "t_copula_sample", "tree_indicator_series", "tree_indicators",
    "to_log_returns", "var_quantile", "weekly_tree", "write_fixture",
    "arma_filter",
]
