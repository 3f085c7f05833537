"""Built-in benchmark problems and their published error tables."""

from __future__ import annotations

from dataclasses import dataclass

from .expr import Expr, parse_text
from .numeric import Precision


@dataclass(frozen=True)
class Problem:
    id: str
    expr_text: str
    x0: str
    bracket: tuple[str, str]
    description: str

    @property
    def expr(self) -> Expr:
        return parse_text(self.expr_text)

    def start(self, precision: Precision):
        return precision.real(self.x0)

    def bracket_at(self, precision: Precision):
        return tuple(precision.real(b) for b in self.bracket)


PROBLEMS = {
    "f1": Problem(
        "f1",
        "exp(-x)-1+x/5",
        "5",
        ("4", "6"),
        "Planck radiation peak, x = ch/(lambda k T); nonzero root near 5",
    ),
    "f2": Problem(
        "f2",
        "(x^3+2.87*x^2-10.28)/4.62 - x",
        "2.5",
        ("1", "3"),
        "Embedment depth of a sheet-pile wall, engineer's estimate 2.5",
    ),
    "f3": Problem(
        "f3",
        "(x + cos(x)*sin(x))/pi - 1/4",
        "0.4",
        ("0", "1"),
        "Boussinesq strip footing, stress at 25 percent of footing pressure",
    ),
}

TABLE_PROBLEM = {1: "f1", 2: "f2", 3: "f3"}

# Row order follows the published tables. Each entry is |x_k - alpha| for k = 1, 2, 3.
GOLDEN = {
    1: {
        "newton": ("0.21464e-4", "0.83264e-11", "0.12530e-23"),
        "weerakoon": ("0.11208e-6", "0.37810e-23", "0.14517e-72"),
        "homeier": ("0.12544e-6", "0.59456e-23", "0.63310e-72"),
        "bisectrix": ("0.11256e-6", "0.38466e-23", "0.15352e-72"),
        "chun3": ("0.98734e-7", "0.22705e-23", "0.27611e-73"),
        "inverse-bisectrix": ("0.11256e-6", "0.38466e-23", "0.15352e-72"),
        "weighted4": ("0.42864e-9", "0.10085e-40", "0.30899e-167"),
    },
    2: {
        "newton": ("0.85925e-1", "0.32675e-2", "0.50032e-5"),
        "weerakoon": ("0.18271e-1", "0.14770e-5", "0.79610e-18"),
        "homeier": ("0.49772e-2", "0.33027e-8", "0.95318e-27"),
        # Printed as "0.10016-25" in the source table; the "e" is restored here.
        "bisectrix": ("0.54594e-2", "0.63617e-8", "0.10016e-25"),
        "chun3": ("0.27815e-1", "0.95903e-5", "0.41254e-15"),
        "inverse-bisectrix": ("0.54594e-2", "0.63617e-8", "0.10016e-25"),
        "weighted4": ("0.80338e-2", "0.15138e-8", "0.19455e-35"),
    },
    3: {
        "newton": ("0.10737e-3", "0.50901e-8", "0.11442e-16"),
        "weerakoon": ("0.20631e-6", "0.53436e-21", "0.92858e-65"),
        "homeier": ("0.52795e-6", "0.19743e-19", "0.10325e-59"),
        "bisectrix": ("0.42239e-7", "0.13373e-23", "0.42435e-73"),
        "chun3": ("0.93064e-6", "0.20624e-18", "0.22446e-56"),
        "inverse-bisectrix": ("0.42239e-7", "0.13373e-23", "0.42435e-73"),
        "weighted4": ("0.25102e-8", "0.17099e-30", "0.36814e-123"),
    },
}


def get_problem(problem_id: str) -> Problem:
    try:
        return PROBLEMS[problem_id]
    except KeyError:
        raise KeyError(f"unknown problem {problem_id!r}; choose from {', '.join(PROBLEMS)}") from None
