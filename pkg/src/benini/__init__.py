"""Benini income distributions and their moment indeterminacy."""
from .distributions import Benini, BeniniThree, GenBenini, LogWeibull, Pareto, stochastically_dominates
from .moments import benini_moment_closed, benini_moment_log, moment_quadrature, moment_table
from .numerics import QuadratureResult, Tolerance
from .stieltjes import StieltjesMember, normalizing_constant

__version__ = "0.1.0"
