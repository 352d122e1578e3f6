"""Compiled coefficient tables shared by the Riccati solvers and the simulator.

Coefficient slices are stacked into dense arrays indexed (interval, regime, ...)
so that the per-step hot loops touch numpy only. A deterministic environment is
embedded as a single regime with the identity jump map, which makes the derived
jump field H(theta) = K[jump_to] - K vanish identically in that mode.
"""

from __future__ import annotations

import numpy as np

from jumplq.problem import DeterministicEnv, LqProblem, validate

__all__ = ["CompiledProblem", "compile_problem", "bind_grid"]

GRID_ALIGN_TOL = 1e-9


class CompiledProblem:
    """Stacked coefficient arrays, one block per table interval."""

    def __init__(self, p: LqProblem):
        report = validate(p)
        if not report.ok:
            raise ValueError(f"problem is not admissible: {report.summary()}")
        self.problem = p
        n, m, d, V = p.n, p.m, p.d, p.marks.size
        R = p.num_regimes
        self.n, self.m, self.d, self.V, self.R = n, m, d, V, R
        self.nu = np.asarray(p.marks.weights, dtype=float)
        if isinstance(p.env, DeterministicEnv):
            self.jump_to = np.zeros((1, V), dtype=int)
        else:
            self.jump_to = np.asarray(p.env.jump_map, dtype=int)
        self.breaks = np.asarray(p.env.grid, dtype=float)
        J = self.breaks.size

        def gather(attr, shape):
            out = np.zeros((J, R) + shape)
            for r in range(R):
                table = p.regime_slices(r)
                for j, s in enumerate(table):
                    block = getattr(s, attr)
                    if attr in ("Q", "N"):
                        block = block.entries
                    out[j, r] = block
            return out

        self.A = gather("A", (n, n))
        self.B = gather("B", (n, m))
        self.C = gather("C", (d, n, n))
        self.D = gather("D", (d, n, m))
        self.E = gather("E", (V, n, n))
        self.F = gather("F", (V, n, m))
        self.Q = gather("Q", (n, n))
        self.N = gather("N", (m, m))
        # compensator aggregates: sum_v nu_v E_v and sum_v nu_v F_v
        self.comp_E = np.einsum("v,jrvik->jrik", self.nu, self.E) if V else np.zeros((J, R, n, n))
        self.comp_F = np.einsum("v,jrvik->jrik", self.nu, self.F) if V else np.zeros((J, R, n, m))

        self.has_A = bool(np.any(self.A))
        self.has_B = bool(np.any(self.B))
        self.has_C = bool(np.any(self.C))
        self.has_D = bool(np.any(self.D))
        self.has_E = bool(np.any(self.E))
        self.has_F = bool(np.any(self.F))
        self.has_jumps = V > 0 and bool(np.any(self.nu > 0))
        self.multi_regime = R > 1
        # N-hat equals the constant N when no control enters a noise channel
        self.const_nhat = not (self.has_D or self.has_F)
        if self.const_nhat:
            self.nhat_min_const = np.linalg.eigvalsh(self.N).min(axis=-1)  # (J, R)

    def interval_of(self, t: float) -> int:
        j = int(np.searchsorted(self.breaks, t, side="right")) - 1
        return max(j, 0)


def compile_problem(p: LqProblem) -> CompiledProblem:
    return CompiledProblem(p)


def bind_grid(tabs: CompiledProblem, steps: int, T: float):
    """Map integration steps and nodes to table intervals.

    Every table breakpoint must land on a grid node (within GRID_ALIGN_TOL),
    otherwise a Runge-Kutta step would straddle a coefficient discontinuity
    and lose its order.
    """
    p = tabs.problem
    if abs(T - p.T) > GRID_ALIGN_TOL * max(1.0, abs(p.T)):
        raise ValueError(f"grid horizon {T} does not match problem horizon {p.T}")
    dt = T / steps
    for b in tabs.breaks[1:]:
        k = round(b / dt)
        if not (0 < k < steps) or abs(b - k * dt) > GRID_ALIGN_TOL * max(1.0, T):
            raise ValueError(
                f"coefficient table breakpoint {b} does not lie on the integration grid "
                f"(steps={steps})"
            )
    # interval active on [t_k, t_{k+1}); midpoint lookup avoids breakpoint rounding
    step_interval = np.empty(steps, dtype=int)
    node_interval = np.empty(steps + 1, dtype=int)
    for k in range(steps):
        step_interval[k] = tabs.interval_of((k + 0.5) * dt)
    for k in range(steps + 1):
        node_interval[k] = tabs.interval_of(min((k + 0.25) * dt, T))
    return step_interval, node_interval
