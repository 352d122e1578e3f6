"""Backward matrix Riccati solvers for LQ control of jump diffusions.

The kernel K(t) (one symmetric matrix per regime) solves, backward from
K(T) = M,

    dK/dt = -(G(K, H) + Q - Bhat Nhat^{-1} Bhat^T) - sum_v nu_v H_v

where H is the jump field of K across regime transitions,
H(t, r, theta) = K(t, jump_map(r, theta)) - K(t, r), and G, Bhat, Nhat
collect the drift, diffusion, and jump quadratic terms (see `generator_drift`,
`bhat`, `nhat`). A deterministic coefficient table is the single-regime case,
for which H vanishes identically.

Two solution routes are provided: direct explicit RK4 integration of the
(stacked) nonlinear matrix ODE, and a quasilinearization iteration that
freezes the gain and solves a linear Lyapunov-type equation per sweep,
producing a non-increasing PSD sequence of iterates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from jumplq._tables import CompiledProblem, bind_grid, compile_problem
from jumplq.problem import CoefficientSlice, LqProblem, MarkSpace
from jumplq.symcone import NotUniformlyPositive, SymMat, spd_solve

__all__ = [
    "TimeGrid",
    "SolverDiagnostics",
    "RiccatiSolution",
    "IterationTrace",
    "PsdViolation",
    "NoConvergence",
    "MonotonicityViolation",
    "nhat",
    "bhat",
    "generator_drift",
    "solve_direct",
    "solve_lyapunov",
    "solve_quasilinearization",
    "write_solution_csv",
    "write_diagnostics_csv",
]

PSD_FLOOR = -1e-8  # eigenvalues of K below this abort; above it they are clamped to 0


class PsdViolation(Exception):
    """The kernel left the PSD cone beyond the discretization tolerance."""

    def __init__(self, node: int, min_eig: float):
        self.node = node
        self.min_eig = float(min_eig)
        super().__init__(f"K lost positive semidefiniteness at node {node}: "
                         f"min eigenvalue {self.min_eig:.6e} < {PSD_FLOOR:.1e}")


class NoConvergence(Exception):
    """Quasilinearization did not reach the requested tolerance."""

    def __init__(self, max_iter: int, last_deviation: float):
        self.max_iter = max_iter
        self.last_deviation = float(last_deviation)
        super().__init__(f"no convergence after {max_iter} iterations "
                         f"(last deviation {self.last_deviation:.3e})")


class MonotonicityViolation(Exception):
    """Consecutive quasilinearization iterates failed K_j >= K_{j+1}."""

    def __init__(self, iteration: int, min_eig: float):
        self.iteration = iteration
        self.min_eig = float(min_eig)
        super().__init__(f"iterate pair {iteration}: min eigenvalue of K_j - K_(j+1) "
                         f"is {self.min_eig:.6e} < {PSD_FLOOR:.1e}")


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = k*T/steps, k = 0..steps."""

    steps: int
    T: float

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if self.T <= 0:
            raise ValueError("T must be positive")

    @property
    def dt(self) -> float:
        return self.T / self.steps

    def nodes(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.dt


@dataclass
class SolverDiagnostics:
    method: str
    iterations: int
    min_eig_K: np.ndarray      # (steps+1, R), smallest eigenvalue before clamping
    min_eig_Nhat: np.ndarray   # (steps+1, R)


@dataclass
class RiccatiSolution:
    """Kernel table K, derived jump field H, and solver diagnostics."""

    grid: TimeGrid
    K: np.ndarray              # (steps+1, R, n, n)
    H: np.ndarray              # (steps+1, R, V, n, n); K[jump_to] - K
    diagnostics: SolverDiagnostics

    @property
    def num_regimes(self) -> int:
        return self.K.shape[1]

    def kernel_at(self, node: int, regime: int = 0) -> np.ndarray:
        return self.K[node, regime]


@dataclass
class IterationTrace:
    """Solved quasilinearization iterates with deviations and PSD-order certificates.

    deviations[i] is the sup-node Frobenius distance between iterates i and i+1;
    certificates[i] is the minimum (over nodes and regimes) eigenvalue of
    iterates[i] - iterates[i+1], nonnegative for a monotone non-increasing scheme.
    """

    iterates: list = field(default_factory=list)
    deviations: list = field(default_factory=list)
    certificates: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# Pointwise generator algebra (single slice)
# ---------------------------------------------------------------------------

def _as_mat(x) -> np.ndarray:
    return x.entries if isinstance(x, SymMat) else np.asarray(x, dtype=float)


def _h_entries(H, V: int, n: int) -> np.ndarray:
    if H is None:
        return np.zeros((V, n, n))
    if isinstance(H, np.ndarray) and H.ndim == 3:
        return H
    return np.stack([_as_mat(h) for h in H]) if V else np.zeros((0, n, n))


def nhat(s: CoefficientSlice, marks: MarkSpace, K, H=None) -> SymMat:
    """Control-weight kernel N + sum_i D_i^T K D_i + sum_v nu_v F_v^T (K + H_v) F_v."""
    Km = _as_mat(K)
    n = Km.shape[0]
    Hm = _h_entries(H, marks.size, n)
    out = s.N.entries.copy()
    for i in range(s.d):
        out += s.D[i].T @ Km @ s.D[i]
    for v in range(marks.size):
        out += marks.weights[v] * (s.F[v].T @ (Km + Hm[v]) @ s.F[v])
    return SymMat(out)


def bhat(s: CoefficientSlice, marks: MarkSpace, K, H=None) -> np.ndarray:
    """Cross kernel K B + sum_i C_i^T K D_i + sum_v nu_v [H_v F_v + E_v^T K F_v + E_v^T H_v F_v]."""
    Km = _as_mat(K)
    n = Km.shape[0]
    Hm = _h_entries(H, marks.size, n)
    out = Km @ s.B
    for i in range(s.d):
        out += s.C[i].T @ Km @ s.D[i]
    for v in range(marks.size):
        out += marks.weights[v] * (
            Hm[v] @ s.F[v] + s.E[v].T @ Km @ s.F[v] + s.E[v].T @ Hm[v] @ s.F[v]
        )
    return out


def generator_drift(s: CoefficientSlice, marks: MarkSpace, K, H=None,
                    floor: float = 1e-6) -> SymMat:
    """Negated kernel velocity G + Q - Bhat Nhat^{-1} Bhat^T.

    G = K A + A^T K + sum_i C_i^T K C_i
        + sum_v nu_v [H_v E_v + E_v^T H_v + E_v^T K E_v + E_v^T H_v E_v].

    Raises NotUniformlyPositive if Nhat falls below floor (the uniform
    positivity hypothesis on the control weight fails at this state).
    """
    Km = _as_mat(K)
    n = Km.shape[0]
    Hm = _h_entries(H, marks.size, n)
    G = Km @ s.A + s.A.T @ Km
    for i in range(s.d):
        G += s.C[i].T @ Km @ s.C[i]
    for v in range(marks.size):
        HE = Hm[v] @ s.E[v]
        G += marks.weights[v] * (HE + HE.T + s.E[v].T @ (Km + Hm[v]) @ s.E[v])
    Nh = nhat(s, marks, Km, Hm)
    Bh = bhat(s, marks, Km, Hm)
    comp = Bh @ spd_solve(Nh, Bh.T, floor=floor)
    return SymMat(G + s.Q.entries - comp)


# ---------------------------------------------------------------------------
# Stacked evaluation (all regimes at once)
# ---------------------------------------------------------------------------

def _sym_stack(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def _min_eig_stack(a: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue along the last two axes (cheap path for 1x1)."""
    if a.shape[-1] == 1:
        return a[..., 0, 0]
    return np.linalg.eigvalsh(a)[..., 0]


def _jump_parts(tabs: CompiledProblem, K: np.ndarray):
    """(K[jump_to], H) for a stacked kernel; None when H vanishes identically."""
    if tabs.multi_regime and tabs.V:
        Kj = K[tabs.jump_to]          # (R, V, n, n)
        return Kj, Kj - K[:, None]
    return None, None


def _nhat_stack(tabs: CompiledProblem, j: int, K: np.ndarray) -> np.ndarray:
    # Regime tables force F == 0, so the jump term never sees a nonzero H and
    # reduces to F^T K F with the single-regime (deterministic) table.
    Nh = tabs.N[j]
    if tabs.has_D:
        Nh = Nh + np.einsum("rdji,rjk,rdkl->ril", tabs.D[j], K, tabs.D[j])
    if tabs.has_F:
        Nh = Nh + np.einsum("v,rvji,rjk,rvkl->ril", tabs.nu, tabs.F[j], K, tabs.F[j])
    return Nh


def _bhat_stack(tabs: CompiledProblem, j: int, K: np.ndarray):
    Bh = None
    if tabs.has_B:
        Bh = K @ tabs.B[j]
    if tabs.has_C and tabs.has_D:
        term = np.einsum("rdji,rjk,rdkl->ril", tabs.C[j], K, tabs.D[j])
        Bh = term if Bh is None else Bh + term
    if tabs.has_E and tabs.has_F:
        term = np.einsum("v,rvji,rjk,rvkl->ril", tabs.nu, tabs.E[j], K, tabs.F[j])
        Bh = term if Bh is None else Bh + term
    return Bh


def _completion_term(tabs: CompiledProblem, j: int, K: np.ndarray, floor: float,
                     where: str):
    """(Bhat Nhat^{-1} Bhat^T, min eig of Nhat), enforcing the positivity floor."""
    Bh = _bhat_stack(tabs, j, K)
    if tabs.const_nhat:
        nmin = float(tabs.nhat_min_const[j].min())
        if Bh is None:
            return None, nmin
        comp = Bh @ (tabs.nhat_inv_const[j] @ np.swapaxes(Bh, -1, -2))
        return comp, nmin
    Nh = _nhat_stack(tabs, j, K)
    w = np.linalg.eigvalsh(Nh)
    nmin = float(w[..., 0].min())
    if nmin < floor:
        exc = NotUniformlyPositive(nmin, floor, where=where)
        raise exc
    if Bh is None:
        return None, nmin
    comp = Bh @ np.linalg.solve(Nh, np.swapaxes(Bh, -1, -2))
    return comp, nmin


def _direct_rhs(tabs: CompiledProblem, j: int, K: np.ndarray, floor: float,
                where: str) -> np.ndarray:
    """dK/dt of the nonlinear backward equation at one stacked kernel value."""
    Kj, H = _jump_parts(tabs, K)
    G = None
    if tabs.has_A:
        S = K @ tabs.A[j]
        G = S + np.swapaxes(S, -1, -2)
    if tabs.has_C:
        term = np.einsum("rdji,rjk,rdkl->ril", tabs.C[j], K, tabs.C[j])
        G = term if G is None else G + term
    if tabs.has_E and tabs.has_jumps:
        if H is not None:
            HE = np.einsum("v,rvij,rvjk->rik", tabs.nu, H, tabs.E[j])
            term = HE + np.swapaxes(HE, -1, -2) + np.einsum(
                "v,rvji,rvjk,rvkl->ril", tabs.nu, tabs.E[j], Kj, tabs.E[j]
            )
        else:
            term = np.einsum("v,rvji,rjk,rvkl->ril", tabs.nu, tabs.E[j], K, tabs.E[j])
        G = term if G is None else G + term
    comp, _ = _completion_term(tabs, j, K, floor, where)
    drift = tabs.Q[j].copy() if G is None else G + tabs.Q[j]
    if comp is not None:
        drift = drift - comp
    out = -drift
    if H is not None:
        out = out - np.einsum("v,rvij->rij", tabs.nu, H)
    return _sym_stack(out)


def _closed_loop_rhs(tabs: CompiledProblem, j: int, K: np.ndarray, U) -> np.ndarray:
    """dK/dt of the linear Lyapunov-type equation with frozen gain U (u = -U x)."""
    if U is None:
        Ab, Cb, Eb, Qb = tabs.A[j], tabs.C[j], tabs.E[j], tabs.Q[j]
    else:
        Ab = tabs.A[j] - tabs.B[j] @ U if tabs.has_B else tabs.A[j]
        Cb = tabs.C[j] - tabs.D[j] @ U[:, None] if tabs.has_D else tabs.C[j]
        Eb = tabs.E[j] - tabs.F[j] @ U[:, None] if tabs.has_F else tabs.E[j]
        Qb = tabs.Q[j] + np.swapaxes(U, -1, -2) @ (tabs.N[j] @ U)
    Kj, H = _jump_parts(tabs, K)
    S = K @ Ab
    G = S + np.swapaxes(S, -1, -2) + Qb
    if Cb.size and (tabs.has_C or (U is not None and tabs.has_D)):
        G = G + np.einsum("rdji,rjk,rdkl->ril", Cb, K, Cb)
    if tabs.has_jumps and (tabs.has_E or (U is not None and tabs.has_F)):
        if H is not None:
            HE = np.einsum("v,rvij,rvjk->rik", tabs.nu, H, Eb)
            G = G + HE + np.swapaxes(HE, -1, -2) + np.einsum(
                "v,rvji,rvjk,rvkl->ril", tabs.nu, Eb, Kj, Eb
            )
        else:
            G = G + np.einsum("v,rvji,rjk,rvkl->ril", tabs.nu, Eb, K, Eb)
    out = -G
    if H is not None:
        out = out - np.einsum("v,rvij->rij", tabs.nu, H)
    return _sym_stack(out)


# ---------------------------------------------------------------------------
# Backward RK4 with the PSD guard
# ---------------------------------------------------------------------------

def _interval_spans(indices: np.ndarray):
    """Yield (interval, slice) for maximal constant runs of `indices`."""
    start = 0
    for k in range(1, indices.size + 1):
        if k == indices.size or indices[k] != indices[start]:
            yield int(indices[start]), slice(start, k)
            start = k


def _psd_guard(K: np.ndarray, node: int):
    """Clamp eigenvalues in [PSD_FLOOR, 0) to zero; abort below PSD_FLOOR.

    Returns (guarded K, per-regime smallest eigenvalue before clamping).
    """
    if K.shape[-1] == 1:
        mins = K[:, 0, 0].copy()
        if mins.min() < PSD_FLOOR:
            raise PsdViolation(node, mins.min())
        if mins.min() < 0.0:
            K = np.maximum(K, 0.0)
        return K, mins
    w = np.linalg.eigvalsh(K)
    mins = w[:, 0].copy()
    if mins.min() < PSD_FLOOR:
        raise PsdViolation(node, float(mins.min()))
    if mins.min() < 0.0:
        w_full, vecs = np.linalg.eigh(K)
        w_full = np.maximum(w_full, 0.0)
        K = _sym_stack(vecs @ (w_full[..., None] * np.swapaxes(vecs, -1, -2)))
    return K, mins


def _nhat_diagnostics(tabs: CompiledProblem, node_interval: np.ndarray,
                      K: np.ndarray) -> np.ndarray:
    """Per-node, per-regime smallest eigenvalue of Nhat evaluated at the node kernels."""
    S = K.shape[0]
    out = np.empty((S, tabs.R))
    for j, sl in _interval_spans(node_interval):
        if tabs.const_nhat:
            out[sl] = tabs.nhat_min_const[j]
            continue
        Ks = K[sl]
        Nh = np.broadcast_to(tabs.N[j], (Ks.shape[0],) + tabs.N[j].shape).copy()
        if tabs.has_D:
            Nh += np.einsum("rdji,srjk,rdkl->sril", tabs.D[j], Ks, tabs.D[j])
        if tabs.has_F:
            Nh += np.einsum("v,rvji,srjk,rvkl->sril", tabs.nu, tabs.F[j], Ks, tabs.F[j])
        out[sl] = _min_eig_stack(Nh) if tabs.m == 1 else np.linalg.eigvalsh(Nh)[..., 0]
    return out


def _integrate_backward(tabs: CompiledProblem, grid: TimeGrid, stage_rhs,
                        step_interval: np.ndarray):
    """Classic RK4, backward from K(T) = M, stages symmetrized, PSD-guarded.

    stage_rhs(k, j) must return three callables (right, mid, left) evaluating
    dK/dt at the stage times t_{k+1}, t_{k+1/2}, t_k of step k on interval j.
    """
    steps = grid.steps
    R, n = tabs.R, tabs.n
    K = np.empty((steps + 1, R, n, n))
    K[steps] = np.broadcast_to(tabs.problem.M.entries, (R, n, n))
    min_eig_K = np.empty((steps + 1, R))
    min_eig_K[steps] = _min_eig_stack(K[steps])
    h = -grid.dt
    for k in range(steps - 1, -1, -1):
        j = int(step_interval[k])
        f_right, f_mid, f_left = stage_rhs(k, j)
        Kc = K[k + 1]
        k1 = f_right(Kc)
        k2 = f_mid(_sym_stack(Kc + (0.5 * h) * k1))
        k3 = f_mid(_sym_stack(Kc + (0.5 * h) * k2))
        k4 = f_left(_sym_stack(Kc + h * k3))
        Knew = _sym_stack(Kc + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        Knew, mins = _psd_guard(Knew, k)
        K[k] = Knew
        min_eig_K[k] = mins
    return K, min_eig_K


def _attach_node(exc: NotUniformlyPositive, node: int) -> NotUniformlyPositive:
    exc.node = node
    return exc


def _ensure_nhat_inverse(tabs: CompiledProblem) -> None:
    # Nhat == N when no control enters a noise channel; invert once via eigh.
    if tabs.const_nhat and not hasattr(tabs, "nhat_inv_const"):
        w, v = np.linalg.eigh(tabs.N)
        tabs.nhat_inv_const = np.einsum("jrik,jrk,jrlk->jril", v, 1.0 / w, v)


def _prepare(tabs: CompiledProblem, grid: TimeGrid):
    _ensure_nhat_inverse(tabs)
    return bind_grid(tabs, grid.steps, grid.T)


def _derived_jump_field(tabs: CompiledProblem, K: np.ndarray) -> np.ndarray:
    if tabs.V == 0:
        return np.zeros(K.shape[:2] + (0, tabs.n, tabs.n))
    Kj = K[:, tabs.jump_to]           # (S, R, V, n, n)
    return Kj - K[:, :, None]


def _solve_linear_core(tabs: CompiledProblem, grid: TimeGrid, gain_nodes,
                       step_interval: np.ndarray):
    """Backward solve of the linear equation with a per-node frozen gain table."""

    def stage_rhs(k, j):
        if gain_nodes is None:
            f = lambda K: _closed_loop_rhs(tabs, j, K, None)
            return f, f, f
        u_left = gain_nodes[k]
        u_right = gain_nodes[k + 1]
        u_mid = 0.5 * (u_left + u_right)
        return (
            lambda K: _closed_loop_rhs(tabs, j, K, u_right),
            lambda K: _closed_loop_rhs(tabs, j, K, u_mid),
            lambda K: _closed_loop_rhs(tabs, j, K, u_left),
        )

    return _integrate_backward(tabs, grid, stage_rhs, step_interval)


def gain_update(tabs: CompiledProblem, node_interval: np.ndarray, K: np.ndarray,
                floor: float) -> np.ndarray:
    """Per-node closed-loop gain U = Nhat^{-1} Bhat^T (control u = -U x)."""
    _ensure_nhat_inverse(tabs)
    S = K.shape[0]
    U = np.zeros((S, tabs.R, tabs.m, tabs.n))
    for j, sl in _interval_spans(node_interval):
        Ks = K[sl]
        if tabs.const_nhat:
            Nh = None
        else:
            Nh = np.broadcast_to(tabs.N[j], (Ks.shape[0],) + tabs.N[j].shape).copy()
            if tabs.has_D:
                Nh += np.einsum("rdji,srjk,rdkl->sril", tabs.D[j], Ks, tabs.D[j])
            if tabs.has_F:
                Nh += np.einsum("v,rvji,srjk,rvkl->sril", tabs.nu, tabs.F[j], Ks, tabs.F[j])
            w = np.linalg.eigvalsh(Nh)
            nmin = float(w[..., 0].min())
            if nmin < floor:
                raise NotUniformlyPositive(nmin, floor, where=f"gain update, interval {j}")
        Bh = None
        if tabs.has_B:
            Bh = Ks @ tabs.B[j]
        if tabs.has_C and tabs.has_D:
            term = np.einsum("rdji,srjk,rdkl->sril", tabs.C[j], Ks, tabs.D[j])
            Bh = term if Bh is None else Bh + term
        if tabs.has_E and tabs.has_F:
            term = np.einsum("v,rvji,srjk,rvkl->sril", tabs.nu, tabs.E[j], Ks, tabs.F[j])
            Bh = term if Bh is None else Bh + term
        if Bh is None:
            continue
        Bt = np.swapaxes(Bh, -1, -2)
        if Nh is None:
            U[sl] = tabs.nhat_inv_const[j] @ Bt
        else:
            U[sl] = np.linalg.solve(Nh, Bt)
    return U


# ---------------------------------------------------------------------------
# Public solvers
# ---------------------------------------------------------------------------

def solve_direct(p: LqProblem, grid: TimeGrid, tabs: CompiledProblem | None = None
                 ) -> RiccatiSolution:
    """Integrate the nonlinear backward equation with explicit RK4.

    Regime-switching coefficients become a coupled system of matrix ODEs, one
    kernel per regime, coupled through the compensated jump drift
    sum_v nu_v (K[jump_map(r, v)] - K[r]). The terminal condition K(T) = M
    holds exactly; every node is kept inside the PSD cone up to 1e-8.
    """
    tabs = tabs if tabs is not None else compile_problem(p)
    step_interval, node_interval = _prepare(tabs, grid)
    floor = p.delta

    def stage_rhs(k, j):
        def f(K, _k=k, _j=j):
            try:
                return _direct_rhs(tabs, _j, K, floor, where=f"node {_k}")
            except NotUniformlyPositive as exc:
                raise _attach_node(exc, _k) from None
        return f, f, f

    K, min_eig_K = _integrate_backward(tabs, grid, stage_rhs, step_interval)
    diag = SolverDiagnostics(
        method="direct-rk4",
        iterations=0,
        min_eig_K=min_eig_K,
        min_eig_Nhat=_nhat_diagnostics(tabs, node_interval, K),
    )
    return RiccatiSolution(grid=grid, K=K, H=_derived_jump_field(tabs, K), diagnostics=diag)


def solve_lyapunov(p: LqProblem, grid: TimeGrid, gain: np.ndarray | None = None,
                   tabs: CompiledProblem | None = None) -> RiccatiSolution:
    """Solve the linear Lyapunov-type backward equation with a frozen gain.

    `gain` is a per-node table U of shape (steps+1, R, m, n) in the closed-loop
    convention u = -U x: the equation uses A - B U, C_i - D_i U, E_v - F_v U
    and running weight Q + U^T N U. None means the zero gain (uncontrolled).
    The output is PSD whenever Q, N, M are PSD.
    """
    tabs = tabs if tabs is not None else compile_problem(p)
    step_interval, node_interval = _prepare(tabs, grid)
    if gain is not None:
        expect = (grid.steps + 1, tabs.R, tabs.m, tabs.n)
        gain = np.asarray(gain, dtype=float)
        if gain.shape != expect:
            raise ValueError(f"gain table has shape {gain.shape}, expected {expect}")
    K, min_eig_K = _solve_linear_core(tabs, grid, gain, step_interval)
    diag = SolverDiagnostics(
        method="lyapunov-rk4",
        iterations=0,
        min_eig_K=min_eig_K,
        min_eig_Nhat=_nhat_diagnostics(tabs, node_interval, K),
    )
    return RiccatiSolution(grid=grid, K=K, H=_derived_jump_field(tabs, K), diagnostics=diag)


def solve_quasilinearization(p: LqProblem, grid: TimeGrid, tol: float = 1e-8,
                             max_iter: int = 50,
                             tabs: CompiledProblem | None = None):
    """Monotone iteration: freeze the gain, solve the linear equation, repeat.

    Starting from the zero kernel (whose induced gain is zero), each sweep
    solves the linear equation with gain U = Nhat^{-1}(K_j) Bhat^T(K_j) and
    running weight Q + U^T N U. Iterates K_1 >= K_2 >= ... decrease in the PSD
    order; the trace records sup-node Frobenius deviations and order
    certificates for every consecutive solved pair. Stops when the deviation
    falls below tol.

    Returns (RiccatiSolution, IterationTrace).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    tabs = tabs if tabs is not None else compile_problem(p)
    step_interval, node_interval = _prepare(tabs, grid)
    trace = IterationTrace()
    gain = None  # induced by K_0 = 0
    prev = None
    min_eig_K = None
    converged = False
    for _ in range(max_iter):
        K, min_eig_K = _solve_linear_core(tabs, grid, gain, step_interval)
        if prev is not None:
            diff = prev - K
            deviation = float(np.sqrt((diff * diff).sum(axis=(-2, -1))).max())
            certificate = float(_min_eig_stack(diff).min())
            trace.deviations.append(deviation)
            trace.certificates.append(certificate)
            trace.iterates.append(K)
            if certificate < PSD_FLOOR:
                raise MonotonicityViolation(len(trace.iterates) - 1, certificate)
            if deviation < tol:
                converged = True
                break
        else:
            trace.iterates.append(K)
        gain = gain_update(tabs, node_interval, K, p.delta)
        prev = K
    if not converged:
        last = trace.deviations[-1] if trace.deviations else float("inf")
        raise NoConvergence(max_iter, last)
    K = trace.iterates[-1]
    diag = SolverDiagnostics(
        method="quasilinearization",
        iterations=len(trace.iterates),
        min_eig_K=min_eig_K,
        min_eig_Nhat=_nhat_diagnostics(tabs, node_interval, K),
    )
    sol = RiccatiSolution(grid=grid, K=K, H=_derived_jump_field(tabs, K), diagnostics=diag)
    return sol, trace


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

def write_solution_csv(sol: RiccatiSolution, path) -> None:
    """Kernel table as rows (t, regime, i, j, K_ij)."""
    nodes = sol.grid.nodes()
    S, R, n, _ = sol.K.shape
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,regime,i,j,K_ij\n")
        for k in range(S):
            for r in range(R):
                for i in range(n):
                    for j in range(n):
                        fh.write(f"{nodes[k]!r},{r},{i},{j},{sol.K[k, r, i, j]!r}\n")


def write_diagnostics_csv(sol: RiccatiSolution, path) -> None:
    """Diagnostics as rows (t, regime, min_eig_K, min_eig_Nhat)."""
    nodes = sol.grid.nodes()
    S, R = sol.diagnostics.min_eig_K.shape
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,regime,min_eig_K,min_eig_Nhat\n")
        for k in range(S):
            for r in range(R):
                fh.write(
                    f"{nodes[k]!r},{r},{sol.diagnostics.min_eig_K[k, r]!r},"
                    f"{sol.diagnostics.min_eig_Nhat[k, r]!r}\n"
                )
