"""Linear operator algebra for the coupling constraints.

Operators are immutable once built and expose ``apply`` / ``apply_adjoint``
plus a dense materialization used by tests and small solvers. Storage is
dense row-major; the benchmark dimensions stay small enough that sparse
formats would only obscure the kernels.
"""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError, DimensionError
from .rng import generator, unit_vector


def _as_vector(v, n: int, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    if v.shape[0] != n:
        raise DimensionError(f"{what}: expected length {n}, got {v.shape[0]}")
    return v


class LinOp:
    """Base linear operator with shape ``(rows, cols)``."""

    rows: int
    cols: int

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def apply(self, v) -> np.ndarray:
        """Matrix-vector product; ``v`` must have length ``cols``."""
        v = _as_vector(v, self.cols, f"apply({type(self).__name__})")
        return self._apply(v)

    def apply_adjoint(self, w) -> np.ndarray:
        """Transpose product; ``w`` must have length ``rows``."""
        w = _as_vector(w, self.rows, f"apply_adjoint({type(self).__name__})")
        return self._apply_adjoint(w)

    def to_dense(self) -> np.ndarray:
        out = np.empty((self.rows, self.cols))
        e = np.zeros(self.cols)
        for j in range(self.cols):
            e[j] = 1.0
            out[:, j] = self._apply(e)
            e[j] = 0.0
        return out

    def _apply(self, v):  # pragma: no cover - abstract
        raise NotImplementedError

    def _apply_adjoint(self, w):  # pragma: no cover - abstract
        raise NotImplementedError


class DenseOp(LinOp):
    """Dense matrix operator (row-major storage)."""

    def __init__(self, matrix):
        m = np.array(matrix, dtype=float, order="C")
        if m.ndim != 2:
            raise DimensionError(f"dense operator needs a 2-d array, got ndim={m.ndim}")
        self.matrix = m
        self.rows, self.cols = m.shape

    def _apply(self, v):
        return self.matrix @ v

    def _apply_adjoint(self, w):
        return self.matrix.T @ w

    def to_dense(self):
        return self.matrix.copy()


class IdentityOp(LinOp):
    def __init__(self, n: int):
        self.rows = self.cols = int(n)

    def _apply(self, v):
        return v.copy()

    def _apply_adjoint(self, w):
        return w.copy()


class ZeroOp(LinOp):
    def __init__(self, rows: int, cols: int):
        self.rows, self.cols = int(rows), int(cols)

    def _apply(self, v):
        return np.zeros(self.rows)

    def _apply_adjoint(self, w):
        return np.zeros(self.cols)


class ScaledOp(LinOp):
    """``alpha * inner`` for a scalar ``alpha``."""

    def __init__(self, alpha: float, inner: LinOp):
        self.alpha = float(alpha)
        self.inner = inner
        self.rows, self.cols = inner.rows, inner.cols

    def _apply(self, v):
        return self.alpha * self.inner._apply(v)

    def _apply_adjoint(self, w):
        return self.alpha * self.inner._apply_adjoint(w)


class VStackOp(LinOp):
    """Vertical stack: all blocks share the input space; outputs concatenate."""

    def __init__(self, blocks):
        blocks = list(blocks)
        if not blocks:
            raise DimensionError("vertical stack needs at least one block")
        cols = blocks[0].cols
        for b in blocks:
            if b.cols != cols:
                raise DimensionError(
                    f"vertical stack: expected {cols} columns, got {b.cols}"
                )
        self.blocks = blocks
        self.cols = cols
        self.rows = sum(b.rows for b in blocks)

    def _apply(self, v):
        return np.concatenate([b._apply(v) for b in self.blocks])

    def _apply_adjoint(self, w):
        out = np.zeros(self.cols)
        at = 0
        for b in self.blocks:
            out += b._apply_adjoint(w[at : at + b.rows])
            at += b.rows
        return out


class BlockDiagOp(LinOp):
    """Block-diagonal: each block acts on its own slice of the input."""

    def __init__(self, blocks):
        blocks = list(blocks)
        if not blocks:
            raise DimensionError("block diagonal needs at least one block")
        self.blocks = blocks
        self.rows = sum(b.rows for b in blocks)
        self.cols = sum(b.cols for b in blocks)

    def _apply(self, v):
        parts, at = [], 0
        for b in self.blocks:
            parts.append(b._apply(v[at : at + b.cols]))
            at += b.cols
        return np.concatenate(parts)

    def _apply_adjoint(self, w):
        parts, at = [], 0
        for b in self.blocks:
            parts.append(b._apply_adjoint(w[at : at + b.rows]))
            at += b.rows
        return np.concatenate(parts)


class RowVectorOp(LinOp):
    """1 x n operator: apply is an inner product, adjoint a scalar multiple."""

    def __init__(self, vector):
        self.vector = np.asarray(vector, dtype=float).ravel()
        self.rows, self.cols = 1, self.vector.shape[0]

    def _apply(self, v):
        return np.array([float(self.vector @ v)])

    def _apply_adjoint(self, w):
        return self.vector * w[0]


def apply(op: LinOp, v) -> np.ndarray:
    return op.apply(v)


def apply_adjoint(op: LinOp, w) -> np.ndarray:
    return op.apply_adjoint(w)


def is_zero_op(op: LinOp) -> bool:
    """True when the operator has no nonzero entry (dense check, small ops)."""
    if isinstance(op, ZeroOp):
        return True
    return not np.any(op.to_dense())


def operator_norm(op: LinOp, tol: float = 1e-12, max_iters: int = 10000, seed: int = 0) -> float:
    """Largest singular value via power iteration on ``op o op^T``.

    The start vector is a seeded pseudo-random unit vector (PCG64 + Box-Muller,
    see :mod:`alia.rng`) so estimates are reproducible byte-for-byte. Raises
    :class:`ConvergenceError` carrying the last estimate if the relative change
    fails to drop below ``tol`` within ``max_iters`` sweeps.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    if is_zero_op(op):
        raise ValueError("operator_norm requires at least one nonzero entry")
    v = unit_vector(generator(seed), op.rows)
    est = 0.0
    for _ in range(int(max_iters)):
        w = op._apply_adjoint(v)
        z = op._apply(w)
        nz = float(np.linalg.norm(z))
        if nz == 0.0:
            # start vector is orthogonal to the range; reseed deterministically
            v = unit_vector(generator(seed + 1), op.rows)
            continue
        new = float(np.sqrt(nz))
        v = z / nz
        if est > 0.0 and abs(new - est) <= tol * new:
            return new
        est = new
    raise ConvergenceError(
        f"power iteration did not converge in {max_iters} sweeps", last_estimate=est
    )
