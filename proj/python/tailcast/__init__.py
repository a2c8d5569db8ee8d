"""Peaks-over-threshold inference, prediction and heteroscedastic extremes."""

from ._tailcast import *  # noqa: F401,F403
from ._tailcast import __doc__  # noqa: F401

__version__ = "0.1.0"
