"""Figure rendering for the dislocation-analytics CSV exports."""

from .render import KINDS, circle_plot, daily_roc_bars, duration_hist, start_time_hist

__version__ = "0.1.0"
__all__ = ["KINDS", "duration_hist", "start_time_hist",
           "circle_plot", "daily_roc_bars"]
