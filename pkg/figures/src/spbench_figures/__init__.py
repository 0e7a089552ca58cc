"""Figure rendering for the clustering-validation benchmark CSVs."""

from .figures import (DEFAULT_GROUP_KEYS, FORMATS, KINDS, REQUIRED_COLUMNS,
                      FigureSpec, render)

__version__ = "0.1.0"

__all__ = ["DEFAULT_GROUP_KEYS", "FORMATS", "KINDS", "REQUIRED_COLUMNS",
           "FigureSpec", "render", "__version__"]
