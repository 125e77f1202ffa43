"""Exact special numbers, moments of independent random atoms, and identity checks."""

__version__ = "0.1.0"

from .exact import Fraction, Poly, Series, poly_eval  # noqa: E402
from .identities import IdentityReport, run_suite  # noqa: E402
from .moments import RVExpression, atom_moment, moment, parse_expression  # noqa: E402
from .montecarlo import McResult, mc_moment  # noqa: E402
from .special import (  # noqa: E402
    bernoulli_higher,
    bernoulli_second_kind,
    derangement,
    derangement_poly,
    forward_difference_power,
    stirling1,
    stirling1_deg,
    stirling2,
    stirling2_deg,
)

__all__ = [
    "Fraction",
    "Poly",
    "Series",
    "poly_eval",
    "IdentityReport",
    "run_suite",
    "RVExpression",
    "atom_moment",
    "moment",
    "parse_expression",
    "McResult",
    "mc_moment",
    "bernoulli_higher",
    "bernoulli_second_kind",
    "derangement",
    "derangement_poly",
    "forward_difference_power",
    "stirling1",
    "stirling1_deg",
    "stirling2",
    "stirling2_deg",
]
