"""LQ problem data for controlled jump diffusions.

The state equation is

    dX = (A X + B u) dt + sum_i (C^i X + D^i u) dW^i
         + sum over marks theta of (E(theta) X_- + F(theta) u) d(mu - nu dt)

with quadratic running cost <Q X, X> + <N u, u> and terminal cost <M X_T, X_T>.
Coefficients are piecewise constant on a declared time table, either in a
single deterministic table or in a regime-switching family whose active regime
is driven by the jump marks (regime coefficients require F == 0).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from jumplq.symcone import SymMat, min_eigenvalue

__all__ = [
    "MarkSpace",
    "CoefficientSlice",
    "DeterministicEnv",
    "RegimeSwitchingEnv",
    "CoefficientEnv",
    "LqProblem",
    "ValidationReport",
    "OutOfHorizon",
    "UnknownBenchmark",
    "ProblemFormatError",
    "validate",
    "slice_at",
    "total_intensity",
    "canned_problem",
    "problem_to_dict",
    "problem_from_dict",
    "load_problem",
    "save_problem",
]

PSD_TOL = 1e-10


class OutOfHorizon(Exception):
    """Time query outside [0, T]."""


class UnknownBenchmark(Exception):
    """Unrecognized canned-problem identifier."""


class ProblemFormatError(Exception):
    """Malformed problem document; carries the offending field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def _mat(x, name: str) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a matrix, got ndim={a.ndim}")
    return a


def _stack(mats, name: str, fallback_shape) -> np.ndarray:
    """Stack a list of equally-shaped matrices; empty list becomes (0, *fallback_shape)."""
    seq = list(mats)
    if not seq:
        return np.zeros((0,) + tuple(fallback_shape))
    arr = np.asarray(seq, dtype=float)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise ValueError(f"{name} must be a list of matrices")
    return arr


@dataclass(frozen=True)
class MarkSpace:
    """Finite mark set with per-mark arrival intensities (the measure nu)."""

    labels: tuple
    weights: np.ndarray

    def __init__(self, labels, weights):
        object.__setattr__(self, "labels", tuple(str(s) for s in labels))
        w = np.asarray(weights, dtype=float).reshape(-1)
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        if len(self.labels) != w.shape[0]:
            raise ValueError("labels and weights must have equal length")

    @property
    def size(self) -> int:
        return len(self.labels)


def total_intensity(marks: MarkSpace) -> float:
    """Total arrival rate: sum of the mark weights."""
    return float(np.sum(marks.weights)) if marks.size else 0.0


class CoefficientSlice:
    """One piecewise-constant coefficient block: A, B, C^i, D^i, E(theta), F(theta), Q, N."""

    __slots__ = ("A", "B", "C", "D", "E", "F", "Q", "N")

    def __init__(self, A, B, C, D, E, F, Q, N):
        self.A = _mat(A, "A")
        self.B = _mat(B, "B")
        n = self.A.shape[0]
        m = self.B.shape[1]
        self.C = _stack(C, "C", (n, n))
        self.D = _stack(D, "D", (n, m))
        self.E = _stack(E, "E", (n, n))
        self.F = _stack(F, "F", (n, m))
        self.Q = Q if isinstance(Q, SymMat) else SymMat(Q)
        self.N = N if isinstance(N, SymMat) else SymMat(N)

    @property
    def d(self) -> int:
        return self.C.shape[0]

    @property
    def num_marks(self) -> int:
        return self.E.shape[0]


@dataclass(frozen=True)
class DeterministicEnv:
    """Single piecewise-constant coefficient table over [0, T)."""

    grid: np.ndarray          # left endpoints of the table intervals; grid[0] == 0
    slices: tuple

    def __init__(self, grid, slices):
        g = np.asarray(grid, dtype=float).reshape(-1)
        g.flags.writeable = False
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "slices", tuple(slices))

    @property
    def num_regimes(self) -> int:
        return 1

    @property
    def initial_regime(self) -> int:
        return 0


@dataclass(frozen=True)
class RegimeSwitchingEnv:
    """Per-regime coefficient tables with mark-driven regime transitions.

    jump_map[r, k] is the regime entered when mark k arrives in regime r.
    This class requires F == 0 in every slice.
    """

    grid: np.ndarray
    regimes: tuple            # tuple of per-regime slice tuples, one slice per interval
    jump_map: np.ndarray      # (R, num_marks) integer
    r0: int = 0

    def __init__(self, grid, regimes, jump_map, r0: int = 0):
        g = np.asarray(grid, dtype=float).reshape(-1)
        g.flags.writeable = False
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "regimes", tuple(tuple(row) for row in regimes))
        jm = np.asarray(jump_map, dtype=int)
        if jm.ndim == 1:
            jm = jm[None, :]
        jm.flags.writeable = False
        object.__setattr__(self, "jump_map", jm)
        object.__setattr__(self, "r0", int(r0))

    @property
    def num_regimes(self) -> int:
        return len(self.regimes)

    @property
    def initial_regime(self) -> int:
        return self.r0


CoefficientEnv = Union[DeterministicEnv, RegimeSwitchingEnv]


@dataclass(frozen=True)
class LqProblem:
    """Complete coefficient environment for one LQ control problem."""

    n: int
    m: int
    d: int
    T: float
    x0: np.ndarray
    marks: MarkSpace
    env: CoefficientEnv
    M: SymMat
    delta: float = 1e-6
    name: str = field(default="", compare=False)

    def __init__(self, n, m, d, T, x0, marks, env, M, delta=1e-6, name=""):
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "d", int(d))
        object.__setattr__(self, "T", float(T))
        x = np.asarray(x0, dtype=float).reshape(-1)
        x.flags.writeable = False
        object.__setattr__(self, "x0", x)
        object.__setattr__(self, "marks", marks)
        object.__setattr__(self, "env", env)
        object.__setattr__(self, "M", M if isinstance(M, SymMat) else SymMat(M))
        object.__setattr__(self, "delta", float(delta))
        object.__setattr__(self, "name", str(name))

    @property
    def num_regimes(self) -> int:
        return self.env.num_regimes

    @property
    def initial_regime(self) -> int:
        return self.env.initial_regime

    def regime_slices(self, regime: int) -> tuple:
        if isinstance(self.env, DeterministicEnv):
            return self.env.slices
        return self.env.regimes[regime]


@dataclass
class ValidationReport:
    """List of violated invariants; empty iff the problem is admissible."""

    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def summary(self) -> str:
        return "ok" if self.ok else "; ".join(self.violations)


def _check_slice(v: list, p: LqProblem, s: CoefficientSlice, where: str) -> None:
    n, m, d, K = p.n, p.m, p.d, p.marks.size
    if s.A.shape != (n, n):
        v.append(f"{where}: A has shape {s.A.shape}, expected {(n, n)}")
    if s.B.shape != (n, m):
        v.append(f"{where}: B has shape {s.B.shape}, expected {(n, m)}")
    if s.C.shape != (d, n, n):
        v.append(f"{where}: C has shape {s.C.shape}, expected {(d, n, n)}")
    if s.D.shape != (d, n, m):
        v.append(f"{where}: D has shape {s.D.shape}, expected {(d, n, m)}")
    if s.E.shape != (K, n, n):
        v.append(f"{where}: E has shape {s.E.shape}, expected {(K, n, n)}")
    if s.F.shape != (K, n, m):
        v.append(f"{where}: F has shape {s.F.shape}, expected {(K, n, m)}")
    if s.Q.dim != n:
        v.append(f"{where}: Q has dim {s.Q.dim}, expected {n}")
    elif min_eigenvalue(s.Q) < -PSD_TOL:
        v.append(f"{where}: Q is not positive semidefinite (min eig {min_eigenvalue(s.Q):.3e})")
    if s.N.dim != m:
        v.append(f"{where}: N has dim {s.N.dim}, expected {m}")
    elif min_eigenvalue(s.N) < p.delta - 1e-12:
        v.append(
            f"{where}: N below delta floor (min eig {min_eigenvalue(s.N):.3e} < delta {p.delta:.3e})"
        )
    if isinstance(p.env, RegimeSwitchingEnv) and s.F.size and np.any(s.F != 0.0):
        v.append(f"{where}: F must vanish in regime mode")


def validate(p: LqProblem) -> ValidationReport:
    """Check every standing invariant; returns a report rather than raising."""
    v: list = []
    if p.T <= 0:
        v.append(f"T must be positive, got {p.T}")
    if p.delta <= 0:
        v.append(f"delta must be positive, got {p.delta}")
    if p.n < 1 or p.m < 1 or p.d < 0:
        v.append(f"dimensions (n={p.n}, m={p.m}, d={p.d}) out of range")
    if p.x0.shape != (p.n,):
        v.append(f"x0 has shape {p.x0.shape}, expected ({p.n},)")
    if p.marks.size and np.any(p.marks.weights <= 0):
        v.append("all mark weights must be positive")
    if p.M.dim != p.n:
        v.append(f"M has dim {p.M.dim}, expected {p.n}")
    elif min_eigenvalue(p.M) < -PSD_TOL:
        v.append(f"M is not positive semidefinite (min eig {min_eigenvalue(p.M):.3e})")

    g = p.env.grid
    if g.size == 0 or g[0] != 0.0:
        v.append("table grid must start at 0")
    if g.size > 1 and np.any(np.diff(g) <= 0):
        v.append("table grid must be strictly increasing")
    if g.size and g[-1] >= p.T:
        v.append("table grid breakpoints must lie strictly below T")

    if isinstance(p.env, DeterministicEnv):
        if len(p.env.slices) != g.size:
            v.append(f"expected {g.size} slices for the table grid, got {len(p.env.slices)}")
        for j, s in enumerate(p.env.slices):
            _check_slice(v, p, s, f"slices[{j}]")
    else:
        R = p.env.num_regimes
        if R < 1:
            v.append("regime environment needs at least one regime")
        for r, table in enumerate(p.env.regimes):
            if len(table) != g.size:
                v.append(f"regimes[{r}]: expected {g.size} slices, got {len(table)}")
            for j, s in enumerate(table):
                _check_slice(v, p, s, f"regimes[{r}][{j}]")
        jm = p.env.jump_map
        if jm.shape != (R, p.marks.size):
            v.append(f"jump_map has shape {jm.shape}, expected {(R, p.marks.size)}")
        elif jm.size and (jm.min() < 0 or jm.max() >= R):
            v.append("jump_map entries must be valid regime indices")
        if not (0 <= p.env.r0 < R):
            v.append(f"initial regime {p.env.r0} out of range")
    return ValidationReport(v)


def slice_at(p: LqProblem, t: float, regime: int = 0) -> CoefficientSlice:
    """Coefficient slice active at time t (intervals closed on the left).

    A breakpoint b belongs to the interval starting at b, so the returned
    slice is the right-continuous table value. Deterministic environments
    ignore the regime argument.
    """
    if not (0.0 <= t <= p.T):
        raise OutOfHorizon(f"t={t} outside [0, {p.T}]")
    g = p.env.grid
    j = int(np.searchsorted(g, t, side="right")) - 1
    j = max(j, 0)
    if isinstance(p.env, DeterministicEnv):
        return p.env.slices[j]
    if not (0 <= regime < p.env.num_regimes):
        raise ValueError(f"regime {regime} out of range")
    return p.env.regimes[regime][j]


# ---------------------------------------------------------------------------
# Benchmark corpus
# ---------------------------------------------------------------------------

def _const_env(s: CoefficientSlice) -> DeterministicEnv:
    return DeterministicEnv(grid=[0.0], slices=[s])


def _scalar_riccati() -> LqProblem:
    # dk/dt = k^2, k(T) = 1 => k(t) = 1/(1 + T - t), value 0.5*x0^2 at T = 1.
    s = CoefficientSlice(
        A=[[0.0]], B=[[1.0]], C=[[[0.0]]], D=[[[0.0]]],
        E=[], F=[], Q=[[0.0]], N=[[1.0]],
    )
    return LqProblem(
        n=1, m=1, d=1, T=1.0, x0=[1.0],
        marks=MarkSpace([], []),
        env=_const_env(s), M=SymMat([[1.0]]), name="scalar-riccati",
    )


def _lyapunov_only() -> LqProblem:
    # Uncontrolled (B = D = F = 0) scalar problem with diffusion and jumps.
    s = CoefficientSlice(
        A=[[1.0]], B=[[0.0]], C=[[[0.5]]], D=[[[0.0]]],
        E=[[[0.2]]], F=[[[0.0]]], Q=[[1.0]], N=[[1.0]],
    )
    return LqProblem(
        n=1, m=1, d=1, T=1.0, x0=[1.0],
        marks=MarkSpace(["theta1"], [2.0]),
        env=_const_env(s), M=SymMat([[1.0]]), name="lyapunov-only",
    )


def _two_regime_symmetric() -> LqProblem:
    s = CoefficientSlice(
        A=[[0.1, 0.2], [0.0, -0.1]],
        B=[[1.0], [0.5]],
        C=[[[0.3, 0.0], [0.0, 0.3]]],
        D=[[[0.2], [0.1]]],
        E=[[[0.1, 0.0], [0.0, 0.1]]],
        F=[[[0.0], [0.0]]],
        Q=[[1.0, 0.0], [0.0, 0.5]],
        N=[[1.0]],
    )
    env = RegimeSwitchingEnv(
        grid=[0.0],
        regimes=[[s], [s]],
        jump_map=[[1], [0]],
        r0=0,
    )
    return LqProblem(
        n=2, m=1, d=1, T=1.0, x0=[1.0, -0.5],
        marks=MarkSpace(["swap"], [1.5]),
        env=env, M=SymMat(np.eye(2)), name="two-regime-symmetric",
    )


def _random_psd(seed: int, n: int, m: int, d: int, K: int, R: int = 1) -> LqProblem:
    """Bounded random coefficients with PSD weights, drawn deterministically from seed."""
    rng = np.random.default_rng(seed)
    weights = rng.uniform(0.3, 1.0, size=K)
    nu_tot = max(float(weights.sum()), 1.0)
    regime_mode = R > 1

    def draw_slice() -> CoefficientSlice:
        A = rng.uniform(-0.5, 0.5, (n, n))
        B = rng.uniform(-0.5, 0.5, (n, m))
        C = rng.uniform(-0.35, 0.35, (d, n, n)) / np.sqrt(max(d, 1))
        D = rng.uniform(-0.35, 0.35, (d, n, m)) / np.sqrt(max(d, 1))
        E = rng.uniform(-0.3, 0.3, (K, n, n)) / np.sqrt(nu_tot)
        if regime_mode:
            F = np.zeros((K, n, m))
        else:
            F = rng.uniform(-0.25, 0.25, (K, n, m)) / np.sqrt(nu_tot)
        gq = rng.uniform(-1.0, 1.0, (n, n))
        Q = 0.5 * gq @ gq.T / n
        gn = rng.uniform(-1.0, 1.0, (m, m))
        N = (0.4 + rng.uniform(0.0, 0.4)) * np.eye(m) + 0.3 * gn @ gn.T / m
        return CoefficientSlice(A=A, B=B, C=C, D=D, E=E, F=F, Q=Q, N=N)

    gm = rng.uniform(-1.0, 1.0, (n, n))
    M = SymMat(0.5 * gm @ gm.T / n)
    x0 = rng.uniform(-1.0, 1.0, n)
    if np.linalg.norm(x0) < 0.3:
        x0 = x0 + 0.5
    if regime_mode:
        env: CoefficientEnv = RegimeSwitchingEnv(
            grid=[0.0],
            regimes=[[draw_slice()] for _ in range(R)],
            jump_map=rng.integers(0, R, size=(R, K)),
            r0=0,
        )
    else:
        env = _const_env(draw_slice())
    name = f"random-psd(seed={seed}, n={n}, m={m}, d={d}, K={K}" + (
        f", R={R})" if R != 1 else ")"
    )
    return LqProblem(
        n=n, m=m, d=d, T=1.0, x0=x0,
        marks=MarkSpace([f"theta{k + 1}" for k in range(K)], weights),
        env=env, M=M, name=name,
    )


_RANDOM_PSD_RE = re.compile(r"^random-psd\s*\((.*)\)\s*$")


def canned_problem(name: str) -> LqProblem:
    """Benchmark problems by id.

    Supported: "scalar-riccati", "lyapunov-only", "two-regime-symmetric",
    and "random-psd(seed=S, n=N, m=M, d=D, K=K[, R=R])".
    """
    key = name.strip()
    if key == "scalar-riccati":
        return _scalar_riccati()
    if key == "lyapunov-only":
        return _lyapunov_only()
    if key == "two-regime-symmetric":
        return _two_regime_symmetric()
    match = _RANDOM_PSD_RE.match(key)
    if match:
        kwargs = {}
        try:
            for part in match.group(1).split(","):
                if not part.strip():
                    continue
                k, _, val = part.partition("=")
                kwargs[k.strip()] = int(val)
            return _random_psd(
                seed=kwargs.pop("seed"), n=kwargs.pop("n"), m=kwargs.pop("m"),
                d=kwargs.pop("d"), K=kwargs.pop("K"), R=kwargs.pop("R", 1),
                **kwargs,
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise UnknownBenchmark(f"bad random-psd arguments in {name!r}: {exc}") from None
    raise UnknownBenchmark(name)


# ---------------------------------------------------------------------------
# Problem-spec file (JSON)
# ---------------------------------------------------------------------------

def _slice_to_dict(s: CoefficientSlice) -> dict:
    return {
        "A": s.A.tolist(), "B": s.B.tolist(),
        "C": [c.tolist() for c in s.C], "D": [d.tolist() for d in s.D],
        "E": [e.tolist() for e in s.E], "F": [f.tolist() for f in s.F],
        "Q": s.Q.entries.tolist(), "N": s.N.entries.tolist(),
    }


def problem_to_dict(p: LqProblem) -> dict:
    doc = {
        "n": p.n, "m": p.m, "d": p.d, "T": p.T,
        "x0": p.x0.tolist(), "delta": p.delta,
        "marks": [
            {"label": lab, "weight": float(w)}
            for lab, w in zip(p.marks.labels, p.marks.weights)
        ],
        "M": p.M.entries.tolist(),
    }
    if isinstance(p.env, DeterministicEnv):
        doc["env"] = {
            "type": "deterministic",
            "grid": p.env.grid.tolist(),
            "slices": [_slice_to_dict(s) for s in p.env.slices],
        }
    else:
        doc["env"] = {
            "type": "regime",
            "grid": p.env.grid.tolist(),
            "regimes": [[_slice_to_dict(s) for s in table] for table in p.env.regimes],
            "jump_map": p.env.jump_map.tolist(),
            "r0": p.env.r0,
        }
    return doc


def _need(obj: dict, key: str, path: str):
    if not isinstance(obj, dict):
        raise ProblemFormatError(path, "expected an object")
    if key not in obj:
        raise ProblemFormatError(f"{path}.{key}" if path else key, "missing field")
    return obj[key]


def _num(obj, path: str) -> float:
    if not isinstance(obj, (int, float)) or isinstance(obj, bool):
        raise ProblemFormatError(path, "expected a number")
    return float(obj)


def _matrix(obj, path: str) -> list:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ProblemFormatError(path, "expected a matrix as nested row-major arrays")
    width = len(obj[0])
    for i, row in enumerate(obj):
        if len(row) != width:
            raise ProblemFormatError(path, f"ragged matrix: row {i} has length {len(row)}")
        for j, x in enumerate(row):
            if not isinstance(x, (int, float)) or isinstance(x, bool):
                raise ProblemFormatError(f"{path}[{i}][{j}]", "expected a number")
    return obj


def _matrix_list(obj, path: str) -> list:
    if not isinstance(obj, list):
        raise ProblemFormatError(path, "expected a list of matrices")
    return [_matrix(mx, f"{path}[{i}]") for i, mx in enumerate(obj)]


def _slice_from_dict(obj: dict, path: str) -> CoefficientSlice:
    try:
        return CoefficientSlice(
            A=_matrix(_need(obj, "A", path), f"{path}.A"),
            B=_matrix(_need(obj, "B", path), f"{path}.B"),
            C=_matrix_list(_need(obj, "C", path), f"{path}.C"),
            D=_matrix_list(_need(obj, "D", path), f"{path}.D"),
            E=_matrix_list(_need(obj, "E", path), f"{path}.E"),
            F=_matrix_list(_need(obj, "F", path), f"{path}.F"),
            Q=_matrix(_need(obj, "Q", path), f"{path}.Q"),
            N=_matrix(_need(obj, "N", path), f"{path}.N"),
        )
    except ValueError as exc:
        raise ProblemFormatError(path, str(exc)) from None


def problem_from_dict(doc: dict, name: str = "") -> LqProblem:
    """Build an LqProblem from the problem-spec document, reporting field paths on errors."""
    n = int(_num(_need(doc, "n", ""), "n"))
    m = int(_num(_need(doc, "m", ""), "m"))
    d = int(_num(_need(doc, "d", ""), "d"))
    T = _num(_need(doc, "T", ""), "T")
    delta = _num(_need(doc, "delta", ""), "delta")
    x0 = _need(doc, "x0", "")
    if not isinstance(x0, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in x0
    ):
        raise ProblemFormatError("x0", "expected a numeric array")

    marks_doc = _need(doc, "marks", "")
    if not isinstance(marks_doc, list):
        raise ProblemFormatError("marks", "expected a list")
    labels, weights = [], []
    for i, mk in enumerate(marks_doc):
        labels.append(str(_need(mk, "label", f"marks[{i}]")))
        weights.append(_num(_need(mk, "weight", f"marks[{i}]"), f"marks[{i}].weight"))
    marks = MarkSpace(labels, weights)

    env_doc = _need(doc, "env", "")
    env_type = _need(env_doc, "type", "env")
    grid = _need(env_doc, "grid", "env")
    if not isinstance(grid, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in grid
    ):
        raise ProblemFormatError("env.grid", "expected a numeric array")
    if env_type == "deterministic":
        slices_doc = _need(env_doc, "slices", "env")
        if not isinstance(slices_doc, list):
            raise ProblemFormatError("env.slices", "expected a list")
        env: CoefficientEnv = DeterministicEnv(
            grid=grid,
            slices=[
                _slice_from_dict(s, f"env.slices[{j}]") for j, s in enumerate(slices_doc)
            ],
        )
    elif env_type == "regime":
        regimes_doc = _need(env_doc, "regimes", "env")
        if not isinstance(regimes_doc, list):
            raise ProblemFormatError("env.regimes", "expected a list")
        regimes = []
        for r, table in enumerate(regimes_doc):
            if not isinstance(table, list):
                raise ProblemFormatError(f"env.regimes[{r}]", "expected a list of slices")
            regimes.append(
                [
                    _slice_from_dict(s, f"env.regimes[{r}][{j}]")
                    for j, s in enumerate(table)
                ]
            )
        jump_map = _need(env_doc, "jump_map", "env")
        try:
            jm = np.asarray(jump_map, dtype=int)
        except (TypeError, ValueError):
            raise ProblemFormatError("env.jump_map", "expected nested integer arrays") from None
        if jm.ndim != 2:
            raise ProblemFormatError("env.jump_map", "expected one row per regime")
        env = RegimeSwitchingEnv(
            grid=grid, regimes=regimes, jump_map=jm, r0=int(env_doc.get("r0", 0))
        )
    else:
        raise ProblemFormatError("env.type", f"unknown environment type {env_type!r}")

    try:
        M = SymMat(_matrix(_need(doc, "M", ""), "M"))
    except ValueError as exc:
        raise ProblemFormatError("M", str(exc)) from None
    return LqProblem(
        n=n, m=m, d=d, T=T, x0=x0, marks=marks, env=env, M=M, delta=delta, name=name
    )


def load_problem(path) -> LqProblem:
    """Read a problem-spec JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProblemFormatError("(document)", f"invalid JSON: {exc}") from None
    return problem_from_dict(doc, name=str(path))


def save_problem(p: LqProblem, path) -> None:
    """Write the problem-spec JSON file."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(problem_to_dict(p), fh, indent=2, sort_keys=True)
        fh.write("\n")
