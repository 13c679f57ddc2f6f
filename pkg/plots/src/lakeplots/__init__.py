"""lakeplots: publication-style figures from lakelab CSV/JSON reports.

Pure post-processing: every figure is a function of report files alone, so
regenerating from the same inputs yields byte-identical images.
"""

from .bundle import PlotError, ReportBundle
from .convergence import plot_capacity_dichotomy, plot_convergence
from .fields import plot_fields

__version__ = "0.1.0"
