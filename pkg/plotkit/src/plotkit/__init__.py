"""plotkit: figure renderers for the satellite maneuver simulator's
trajectory, metrics, and sweep files."""

from .figures import FIGURE_KINDS, render
from .readers import read_metrics, read_sweep, read_trajectory

__version__ = "0.1.0"
