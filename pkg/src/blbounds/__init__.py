"""Brascamp-Lieb constants: perceptivity, explicit bounds, a Gaussian oracle and visual checks."""
from . import bounds, catalog, datum, lieb_oracle, linalg, perceptivity, visual
from .bounds import (
    BoundKind,
    BoundReport,
    greedy_index_sets,
    lower_bound_global,
    lower_bound_localized,
    upper_bound_global,
    upper_bound_localized,
    upper_bound_variant,
)
from .datum import Datum, LocalizedRegularizedDatum
from .exceptions import InvalidInput, NotSurjective, RankDeficient, UnsupportedDimension
from .lieb_oracle import bl_limit, maximize_gaussian
from .linalg import LinearMap, Subspace
from .perceptivity import PerceptivityVerdict, SearchBudget, Status, beta_min_estimate, check_perceptivity
from .visual import PointCloud, covering_estimate, visual_check

__version__ = "0.1.0"

__all__ = [
    "BoundKind",
    "BoundReport",
    "Datum",
    "InvalidInput",
    "LinearMap",
    "LocalizedRegularizedDatum",
    "NotSurjective",
    "PerceptivityVerdict",
    "PointCloud",
    "RankDeficient",
    "SearchBudget",
    "Status",
    "Subspace",
    "UnsupportedDimension",
    "beta_min_estimate",
    "bl_limit",
    "bounds",
    "catalog",
    "check_perceptivity",
    "covering_estimate",
    "datum",
    "greedy_index_sets",
    "lieb_oracle",
    "linalg",
    "lower_bound_global",
    "lower_bound_localized",
    "maximize_gaussian",
    "perceptivity",
    "upper_bound_global",
    "upper_bound_localized",
    "upper_bound_variant",
    "visual",
    "visual_check",
]
