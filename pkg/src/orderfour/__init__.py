"""Extended-precision Newton variants and an optimal fourth-order weighted family."""

from .numeric import Precision, Jet4, jet_variable, jet_func, jet_arith
from .expr import parse_text, eval_real, eval_jet, format_expr

__version__ = "0.1.0"
