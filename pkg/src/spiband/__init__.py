"""Simultaneous prediction intervals for sampled survival curves."""
from .curves import (
    Band,
    SampleMatrix,
    TimeGrid,
    bounding_band,
    contains,
    pava_antitonic,
    project_band,
    validate_matrix,
)
from .errors import SpibandError
from .estimators import (
    GspieConfig,
    OlshenConfig,
    bonferroni_band,
    critical_k,
    gspie,
    gspie_step,
    olshen,
    two_sided_olshen,
)
from .evaluation import average_width, observed_coverage, percent_change

__version__ = "0.1.0"
