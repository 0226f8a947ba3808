"""Figure rendering for mqcsim CSV outputs; never recomputes physics."""

__version__ = "0.1.0"

from .layouts import LAYOUTS, render
from .reader import CsvFormatError, read_harmonics, read_peakscan, read_spectrum
