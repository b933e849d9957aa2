"""Network autoregression toolkit.

Multivariate time series on a known (or searched-for) network: simulation,
least-squares estimation with missing-data-aware neighbour weights, a
sufficient stationarity check, BIC/AIC order selection, iterated forecasts,
and random-network search for prediction.
"""

from .errors import (
    ConvergenceError,
    DataError,
    GnarError,
    InsufficientDataError,
    RankDeficiencyWarning,
    SingularCovarianceWarning,
    StationarityWarning,
)
from .rng import RngStream
from .network import (
    Edge,
    NeighbourSet,
    Network,
    WeightMap,
    connection_weights,
    from_adjacency,
    load_network,
    neighbour_set,
    network_from_json,
    network_to_json,
    read_adjacency_csv,
    save_network,
    to_adjacency,
    weight_matrix,
    write_adjacency_csv,
)
from .series import SeriesMatrix, load_series_csv, save_series_csv
from .model import (
    CoefficientSet,
    ModelSpec,
    StationarityCheck,
    coefficients_from_gamma,
    coefficients_from_json,
    coefficients_to_json,
    companion_matrix,
    constraint_matrix,
    gamma_from_coefficients,
    group_labels,
    make_coefficients,
    model_label,
    model_spec_from_json,
    model_spec_to_json,
    param_count,
    parameter_names,
    spectral_radius,
    stationarity_margin,
    to_var_matrices,
)
from .sim import gnar_simulate, simulate_from_fit, var_simulate
from .design import (
    DesignProblem,
    build_design,
    dump_design_csv,
    neighbour_regressor,
)
from .estimate import (
    ArBaselineResult,
    ArNodeFit,
    FitResult,
    aic,
    aic_value,
    ar_baseline,
    bic,
    bic_value,
    coefficients_from_fit_json,
    fit,
    fit_result_to_json,
    gls_restricted_estimate,
    innovation_cov,
    loglik,
    loglik_value,
)
from .forecast import predict, prediction_error
from .netsearch import (
    IcGridResult,
    SearchResult,
    erdos_renyi,
    full_stage_grid,
    ic_grid,
    normalize_by_node_sd,
    search,
)

__version__ = "0.1.0"

__all__ = [
    "ArBaselineResult",
    "ArNodeFit",
    "CoefficientSet",
    "ConvergenceError",
    "DataError",
    "DesignProblem",
    "Edge",
    "FitResult",
    "GnarError",
    "IcGridResult",
    "InsufficientDataError",
    "ModelSpec",
    "NeighbourSet",
    "Network",
    "RankDeficiencyWarning",
    "RngStream",
    "SearchResult",
    "SeriesMatrix",
    "SingularCovarianceWarning",
    "StationarityCheck",
    "StationarityWarning",
    "WeightMap",
    "aic",
    "aic_value",
    "ar_baseline",
    "bic",
    "bic_value",
    "build_design",
    "coefficients_from_gamma",
    "coefficients_from_json",
    "coefficients_to_json",
    "companion_matrix",
    "connection_weights",
    "constraint_matrix",
    "dump_design_csv",
    "erdos_renyi",
    "fit",
    "coefficients_from_fit_json",
    "fit_result_to_json",
    "from_adjacency",
    "full_stage_grid",
    "gamma_from_coefficients",
    "gls_restricted_estimate",
    "gnar_simulate",
    "group_labels",
    "ic_grid",
    "innovation_cov",
    "load_network",
    "load_series_csv",
    "loglik",
    "loglik_value",
    "make_coefficients",
    "model_label",
    "model_spec_from_json",
    "model_spec_to_json",
    "neighbour_regressor",
    "neighbour_set",
    "network_from_json",
    "network_to_json",
    "normalize_by_node_sd",
    "param_count",
    "parameter_names",
    "predict",
    "prediction_error",
    "read_adjacency_csv",
    "save_network",
    "save_series_csv",
    "search",
    "simulate_from_fit",
    "spectral_radius",
    "stationarity_margin",
    "to_adjacency",
    "to_var_matrices",
    "var_simulate",
    "weight_matrix",
    "write_adjacency_csv",
]
