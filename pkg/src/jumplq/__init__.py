"""Linear-quadratic optimal control of jump diffusions.

Solves the backward matrix Riccati equation associated with a linear state
equation driven by Brownian motions and a compensated finite-activity jump
measure, synthesizes the optimal feedback law, and verifies the optimality
structure by algebraic identities and Monte Carlo simulation.
"""

from jumplq.symcone import SymMat, NotUniformlyPositive, min_eigenvalue, is_psd, spd_solve

__version__ = "0.1.0"

__all__ = [
    "SymMat",
    "NotUniformlyPositive",
    "min_eigenvalue",
    "is_psd",
    "spd_solve",
    "__version__",
]
