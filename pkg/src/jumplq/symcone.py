"""Symmetric-matrix value type and positive-semidefinite cone utilities."""

from __future__ import annotations

import numpy as np

__all__ = ["SymMat", "NotUniformlyPositive", "min_eigenvalue", "is_psd", "spd_solve"]


class NotUniformlyPositive(Exception):
    """Raised when a matrix required to satisfy A >= floor*I falls below the floor."""

    def __init__(self, min_eig: float, floor: float, where: str = ""):
        self.min_eig = float(min_eig)
        self.floor = float(floor)
        self.where = where
        loc = f" ({where})" if where else ""
        super().__init__(
            f"matrix not uniformly positive{loc}: "
            f"min eigenvalue {self.min_eig:.6e} < floor {self.floor:.6e}"
        )


class SymMat:
    """Dense real symmetric matrix; (A + A^T)/2 is applied on construction.

    Immutable: the entry array is marked read-only, so values can be shared
    freely between concurrent workers.
    """

    __slots__ = ("entries",)

    def __init__(self, entries):
        a = np.array(entries, dtype=float, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] < 1:
            raise ValueError("dimension must be at least 1")
        if not np.all(np.isfinite(a)):
            raise ValueError("entries must be finite")
        a = (a + a.T) / 2.0
        a.flags.writeable = False
        self.entries = a

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, n: int) -> "SymMat":
        return cls(np.eye(n))

    @classmethod
    def zero(cls, n: int) -> "SymMat":
        return cls(np.zeros((n, n)))

    @classmethod
    def diag(cls, values) -> "SymMat":
        return cls(np.diag(np.asarray(values, dtype=float)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymMat):
            return NotImplemented
        return self.entries.shape == other.entries.shape and bool(
            np.array_equal(self.entries, other.entries)
        )

    def __hash__(self):
        return hash((self.entries.shape, self.entries.tobytes()))

    def __repr__(self) -> str:
        return f"SymMat({self.entries.tolist()!r})"


def _entries(a) -> np.ndarray:
    return a.entries if isinstance(a, SymMat) else np.asarray(a, dtype=float)


def min_eigenvalue(a: SymMat) -> float:
    """Smallest eigenvalue, via the symmetric eigensolver (deterministic)."""
    return float(np.linalg.eigvalsh(_entries(a))[0])


def is_psd(a: SymMat, tol: float = 0.0) -> bool:
    """True iff min_eigenvalue(a) >= -tol. Requires tol >= 0."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return min_eigenvalue(a) >= -tol


def spd_solve(a: SymMat, b: np.ndarray, floor: float = 1e-10) -> np.ndarray:
    """Solve a @ x = b through a symmetric eigendecomposition of `a`.

    Succeeds only if the smallest eigenvalue of `a` is at least `floor`;
    otherwise raises NotUniformlyPositive carrying the offending eigenvalue.
    `b` may be a vector or a matrix of stacked right-hand sides.
    """
    am = _entries(a)
    w, v = np.linalg.eigh(am)
    if w[0] < floor:
        raise NotUniformlyPositive(w[0], floor)
    bm = np.asarray(b, dtype=float)
    vec = bm.ndim == 1
    if vec:
        bm = bm[:, None]
    x = v @ ((v.T @ bm) / w[:, None])
    return x[:, 0] if vec else x
