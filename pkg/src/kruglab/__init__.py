"""Kruglov operator and Rosenthal-type inequalities on step functions and atomic laws."""

from .dist import DiscreteDistribution
from .kruglov import KruglovConfig, transform
from .spaces import parse_space
from .stepfn import StepFunction

__all__ = ["DiscreteDistribution", "KruglovConfig", "StepFunction", "parse_space", "transform"]
__version__ = "0.1.0"
