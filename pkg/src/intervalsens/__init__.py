"""Rigorous enclosure and existence proofs for parametric systems ``f(a, x) = 0``."""

from importlib.resources import files

from .contractors import (
    ContractionOutcome,
    Operator,
    OperatorConfig,
    Status,
    check_existence,
    gamma,
    gauss_seidel,
    hansen_sengupta,
    krawczyk_kernel,
    parametric_hs,
    parametric_krawczyk,
    residual_enclosure,
)
from .expressions import ParametricSystem, ProblemInstance, load_problem, parse_problem
from .interval import EMPTY, ENTIRE, Interval, IntervalMatrix, IntervalVector
from .sensitivity import (
    InflationConfig,
    IterationTrace,
    compare_operators,
    inflate_and_prove,
    refine,
    width_norm,
)

__version__ = "0.1.0"


def bundled_problem(name: str) -> str:
    """Path of a problem file shipped with the package (e.g. ``example1.prob``)."""
    return str(files(__name__) / "data" / name)
