"""Emotion text classification benchmark.

Pipeline: corpus loading -> preprocessing -> sparse features -> eight
from-scratch classifiers -> metric reports with a best-classifier
recommendation. Every stage is a pure function of (data, config, seed).
"""

__version__ = "0.1.0"

from emobench.corpus import LABELS

__all__ = ["LABELS", "__version__"]
