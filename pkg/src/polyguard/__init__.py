"""polyguard: exact-arithmetic guard placement in polygons with holes.

A deterministic bicriteria solver (multiplicative weights with a certified
maximization oracle and grid rounding), epsilon-net extraction, baseline
algorithms, and an experiment harness.  All geometry is exact rational.
"""

from .arrangement import CellComplex, build_complex, refine_complex, subsystem_ranges
from .baselines import SampleParams, greedy_solve, sample_solve
from .epsnet import extract_net, net_is_valid
from .errors import InternalInvariantError, InvalidInputError, PolyguardError
from .geom import (
    RAT,
    PolygonWithHoles,
    locate,
    orientation,
    rat,
    rat_str,
    ring_area,
    segment_intersect,
    triangulate,
)
from .harness import InstanceFile, OptBracket, SolveReport, generate, opt_bracket, verify
from .maximize import maximize_triangle
from .objective import build_triangle_objective, xi_direct
from .oracle import OracleCertificate, OracleContext, max_oracle
from .render import render
from .rounding import GridSpec, RoundedComplex, grid_spec, round_complex
from .solver import (
    FractionalSolution,
    IterationTrace,
    SolveParams,
    active_area,
    solve,
    weight_of_active,
)
from .visibility import sees, visibility_polygon

__version__ = "0.1.0"

__all__ = [
    "CellComplex",
    "FractionalSolution",
    "GridSpec",
    "InstanceFile",
    "InternalInvariantError",
    "InvalidInputError",
    "IterationTrace",
    "OptBracket",
    "OracleCertificate",
    "OracleContext",
    "PolygonWithHoles",
    "PolyguardError",
    "RAT",
    "RoundedComplex",
    "SampleParams",
    "SolveParams",
    "SolveReport",
    "active_area",
    "build_complex",
    "build_triangle_objective",
    "extract_net",
    "generate",
    "greedy_solve",
    "locate",
    "max_oracle",
    "maximize_triangle",
    "net_is_valid",
    "opt_bracket",
    "orientation",
    "rat",
    "rat_str",
    "refine_complex",
    "render",
    "ring_area",
    "round_complex",
    "sample_solve",
    "sees",
    "segment_intersect",
    "solve",
    "subsystem_ranges",
    "triangulate",
    "verify",
    "visibility_polygon",
    "weight_of_active",
    "xi_direct",
]
