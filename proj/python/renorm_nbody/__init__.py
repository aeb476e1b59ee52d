"""Time-renormalized N-body integration: Python front end to the C++ core."""

from ._core import (
    Problem,
    aux_lambda_functions,
    compare,
    constants,
    conformal_map,
    conformal_map_inverse,
    eta,
    gen_binary_visitor,
    gen_pythagorean,
    integrate,
    L_bound,
    load_problem,
    parse_problem,
    radius_estimate,
    radius_scan,
    s_value,
    strip_width,
    taylor_coeffs,
)

__all__ = [
    "Problem",
    "aux_lambda_functions",
    "compare",
    "constants",
    "conformal_map",
    "conformal_map_inverse",
    "eta",
    "gen_binary_visitor",
    "gen_pythagorean",
    "integrate",
    "L_bound",
    "load_problem",
    "parse_problem",
    "radius_estimate",
    "radius_scan",
    "s_value",
    "strip_width",
    "taylor_coeffs",
]
