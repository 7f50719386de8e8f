"""GeoShapley explanations for spatial prediction models."""

from ._geoshap import (
    CapacityError,
    ConfigError,
    DataError,
    GeoShapleyResult,
    GeoshapError,
    NumericalError,
    OlsModel,
    Predictor,
    PredictorError,
    ProtocolError,
    TrueModel,
    enumerate_coalitions,
    exact_shapley,
    explain,
    generate_dataset,
    intrinsic_effect,
    kernel_weight,
    kmeans,
    log10_to_percent,
    rank_features,
    select_background,
    svc_recover,
)

__all__ = [name for name in dir() if not name.startswith("_")]
