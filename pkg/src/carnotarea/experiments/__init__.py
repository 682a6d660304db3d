"""Scenario runner: parsing, the verification experiments, rate fits and CLI."""

from .ratefit import RateFit, fit_loglog_slope
from .runner import CSV_COLUMNS, Report, lat_deviations, run_scenario
from .scenario import Scenario, from_dict, load

__all__ = ["CSV_COLUMNS", "RateFit", "Report", "Scenario", "fit_loglog_slope", "from_dict",
           "lat_deviations", "load", "run_scenario"]
