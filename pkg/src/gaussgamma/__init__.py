"""Constrained Gauss-Gamma mixture models fitted by EM."""

from .distributions import (
    GammaParams,
    GaussianParams,
    Moments,
    gamma_log_pdf,
    gamma_moments,
    gaussian_log_pdf,
    moments_to_gamma,
    sample_gamma,
    sample_gaussian,
)
from .data_io import (
    HistogramSpec,
    ReturnSeries,
    bundled_prices_path,
    density_curve,
    histogram,
    load_series,
    prices_to_returns,
)
from .em import FitOptions, FitReport, Responsibilities, e_step, fit, initialize, m_step
from .errors import (
    ComponentCollapse,
    EmptySweep,
    GaussGammaError,
    InfeasibleConfiguration,
    MissingColumn,
    NonPositiveMean,
    ParseError,
    SchemaError,
    TooShort,
    ZeroDensityObservation,
)
from .mixture import (
    Component,
    Configuration,
    DomainRole,
    MixtureModel,
    deserialize,
    load_model,
    paper_ground_truth,
    save_model,
    serialize,
)
from .selection import PenalizedScore, SweepSpec, bic, param_count, select, sweep

__version__ = "0.1.0"
