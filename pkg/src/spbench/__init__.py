"""Clustering validation across similarity paradigms.

A similarity paradigm (SP) is a normalisation combined with a dissimilarity
measure applied to raw data.  This package computes seven relative validity
indices from arbitrary dissimilarity matrices, evaluates them under fixed-SP,
matching-SP and mean-SP schemes against external indices, and provides a
benchmark harness for bias, coincidence-of-optima and correlation analyses.
"""

__version__ = "0.1.0"
