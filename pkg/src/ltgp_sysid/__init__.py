"""Linear state-space identification of LTGP signals driven by earthquake magnitude."""

from .dataio import (
    Catalog,
    CatalogEvent,
    InputSeries,
    LtgpSeries,
    SynthSpec,
    build_input_series,
    calendar_hours,
    generate_synthetic,
    load_table1,
    parse_catalog_csv,
    parse_ltgp_csv,
)
from .ident import IdentDataset, RlsConfig, RlsEstimator, batch_least_squares, identify, rls_update
from .metrics import FitReport, bfr, evaluate
from .model import (
    LtiModel,
    StateTrajectory,
    make_fourth_order,
    make_second_order,
    predict_one_step,
    simulate_free_run,
    state_embed,
    step,
)
from .scenarios import (
    DEFAULT_AREAS,
    GeoArea,
    WindowConfig,
    assign_area,
    build_event_windows,
    run_scenario1,
    run_scenario2,
)

__version__ = "0.1.0"

__all__ = [
    "Catalog",
    "CatalogEvent",
    "DEFAULT_AREAS",
    "FitReport",
    "GeoArea",
    "IdentDataset",
    "InputSeries",
    "LtgpSeries",
    "LtiModel",
    "RlsConfig",
    "RlsEstimator",
    "StateTrajectory",
    "SynthSpec",
    "WindowConfig",
    "assign_area",
    "batch_least_squares",
    "bfr",
    "build_event_windows",
    "build_input_series",
    "calendar_hours",
    "evaluate",
    "generate_synthetic",
    "identify",
    "load_table1",
    "make_fourth_order",
    "make_second_order",
    "parse_catalog_csv",
    "parse_ltgp_csv",
    "predict_one_step",
    "rls_update",
    "run_scenario1",
    "run_scenario2",
    "simulate_free_run",
    "state_embed",
    "step",
]
