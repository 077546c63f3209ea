"""Catalog of smooth and proximable convex function blocks.

Smooth blocks expose ``value``/``grad``; proximable blocks expose
``value``/``prox``. Indicator values use a fixed feasibility tolerance of
1e-9 in the max norm so objective gaps stay finite at iterates produced by
exact projections.
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import ConfigError, DimensionError

FEAS_TOL = 1e-9


def _vec(x, n: int, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != n:
        raise DimensionError(f"{what}: expected length {n}, got {x.shape[0]}")
    return x


# ---------------------------------------------------------------------------
# smooth blocks


class SmoothBlock:
    """Differentiable convex block; ``grad`` is the exact derivative of ``value``."""

    dim: int

    def value(self, x) -> float:  # pragma: no cover - abstract
        raise NotImplementedError

    def grad(self, x) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError


class ZeroSmooth(SmoothBlock):
    def __init__(self, dim: int):
        self.dim = int(dim)

    def value(self, x):
        _vec(x, self.dim, "ZeroSmooth.value")
        return 0.0

    def grad(self, x):
        _vec(x, self.dim, "ZeroSmooth.grad")
        return np.zeros(self.dim)


class LinearSmooth(SmoothBlock):
    """``x -> <coeff, x>``."""

    def __init__(self, coeff):
        self.coeff = np.asarray(coeff, dtype=float).ravel()
        self.dim = self.coeff.shape[0]

    def value(self, x):
        return float(self.coeff @ _vec(x, self.dim, "LinearSmooth.value"))

    def grad(self, x):
        _vec(x, self.dim, "LinearSmooth.grad")
        return self.coeff.copy()


class QuadraticSmooth(SmoothBlock):
    """``x -> 0.5 x^T Q x + <q, x>`` with symmetric positive-semidefinite Q.

    Symmetry is enforced; positive semidefiniteness is the caller's
    obligation and is only spot-checked on a few random directions.
    """

    def __init__(self, Q, q=None):
        Q = np.array(Q, dtype=float, order="C")
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise DimensionError(f"quadratic needs a square matrix, got {Q.shape}")
        scale = float(np.max(np.abs(Q))) if Q.size else 0.0
        if float(np.max(np.abs(Q - Q.T))) > 1e-12 * (1.0 + scale):
            raise ValueError("quadratic matrix must be symmetric")
        self.Q = Q
        self.dim = Q.shape[0]
        self.q = np.zeros(self.dim) if q is None else _vec(q, self.dim, "QuadraticSmooth q")
        rng = np.random.Generator(np.random.PCG64(0))
        for _ in range(8):
            v = rng.standard_normal(self.dim)
            if float(v @ (Q @ v)) < -1e-10 * (1.0 + scale) * float(v @ v):
                raise ValueError("quadratic matrix failed the PSD spot check")

    def value(self, x):
        x = _vec(x, self.dim, "QuadraticSmooth.value")
        return float(0.5 * x @ (self.Q @ x) + self.q @ x)

    def grad(self, x):
        x = _vec(x, self.dim, "QuadraticSmooth.grad")
        return self.Q @ x + self.q


class ScaledSumSmooth(SmoothBlock):
    """Nonnegative combination ``sum_i c_i * block_i`` of same-dimension blocks."""

    def __init__(self, terms):
        terms = [(float(c), b) for c, b in terms]
        if not terms:
            raise DimensionError("scaled sum needs at least one term")
        dim = terms[0][1].dim
        for c, b in terms:
            if b.dim != dim:
                raise DimensionError(f"scaled sum: expected dim {dim}, got {b.dim}")
            if c < 0:
                raise ValueError("scaled sum coefficients must be >= 0 to stay convex")
        self.terms = terms
        self.dim = dim

    def value(self, x):
        x = _vec(x, self.dim, "ScaledSumSmooth.value")
        return float(sum(c * b.value(x) for c, b in self.terms))

    def grad(self, x):
        x = _vec(x, self.dim, "ScaledSumSmooth.grad")
        g = np.zeros(self.dim)
        for c, b in self.terms:
            g += c * b.grad(x)
        return g


def smooth_lipschitz(block: SmoothBlock) -> float:
    """Gradient Lipschitz constant for catalog smooth blocks.

    Zero/linear blocks have constant 0; quadratics use a power-iteration
    estimate of ``||Q||``; scaled sums combine their terms. Anything else is a
    configuration error because no estimate is available.
    """
    from .linops import DenseOp, is_zero_op, operator_norm

    if isinstance(block, (ZeroSmooth, LinearSmooth)):
        return 0.0
    if isinstance(block, QuadraticSmooth):
        op = DenseOp(block.Q)
        return 0.0 if is_zero_op(op) else operator_norm(op)
    if isinstance(block, ScaledSumSmooth):
        return float(sum(c * smooth_lipschitz(b) for c, b in block.terms))
    raise ConfigError(f"no Lipschitz estimate for smooth block {type(block).__name__}")


# ---------------------------------------------------------------------------
# proximable blocks


class ProxBlock:
    """Closed convex proper block accessed through its proximal map."""

    dim: int

    def value(self, x) -> float:  # pragma: no cover - abstract
        raise NotImplementedError

    def prox(self, v, alpha: float) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def grad(self, x):
        raise TypeError(f"{type(self).__name__} is not smooth; grad is undefined")

    def _check_alpha(self, alpha: float) -> float:
        alpha = float(alpha)
        if alpha <= 0:
            raise ValueError(f"prox stepsize must be > 0, got {alpha}")
        return alpha


class ZeroProx(ProxBlock):
    def __init__(self, dim: int):
        self.dim = int(dim)

    def value(self, x):
        _vec(x, self.dim, "ZeroProx.value")
        return 0.0

    def prox(self, v, alpha):
        self._check_alpha(alpha)
        return _vec(v, self.dim, "ZeroProx.prox").copy()


def _weights(w, what: str) -> np.ndarray:
    w = np.asarray(w, dtype=float).ravel()
    if np.any(w < 0):
        raise ValueError(f"{what}: weights must be >= 0")
    return w


class L1(ProxBlock):
    """Weighted l1 norm ``sum_i w_i |x_i|``; prox is soft thresholding."""

    def __init__(self, weights):
        self.weights = _weights(weights, "L1")
        self.dim = self.weights.shape[0]

    def value(self, x):
        return float(self.weights @ np.abs(_vec(x, self.dim, "L1.value")))

    def prox(self, v, alpha):
        alpha = self._check_alpha(alpha)
        v = _vec(v, self.dim, "L1.prox")
        return np.sign(v) * np.maximum(np.abs(v) - alpha * self.weights, 0.0)


class L1NonNeg(ProxBlock):
    """Weighted l1 norm plus the nonnegativity indicator.

    The prox is the one-sided soft threshold ``max(0, v - alpha * w)``.
    """

    def __init__(self, weights):
        self.weights = _weights(weights, "L1NonNeg")
        self.dim = self.weights.shape[0]

    def value(self, x):
        x = _vec(x, self.dim, "L1NonNeg.value")
        if float(np.min(x, initial=0.0)) < -FEAS_TOL:
            return float("inf")
        return float(self.weights @ np.abs(x))

    def prox(self, v, alpha):
        alpha = self._check_alpha(alpha)
        v = _vec(v, self.dim, "L1NonNeg.prox")
        return np.maximum(v - alpha * self.weights, 0.0)


class Box(ProxBlock):
    """Indicator of ``{x : lo <= x <= hi}``; prox is the componentwise clamp."""

    def __init__(self, lo, hi, dim: int | None = None):
        if dim is not None:
            lo = np.full(int(dim), float(lo)) if np.isscalar(lo) else lo
            hi = np.full(int(dim), float(hi)) if np.isscalar(hi) else hi
        self.lo = np.asarray(lo, dtype=float).ravel()
        self.hi = np.asarray(hi, dtype=float).ravel()
        if self.lo.shape != self.hi.shape:
            raise DimensionError("box bounds must have matching shapes")
        if np.any(self.lo > self.hi):
            raise ValueError("box lower bounds exceed upper bounds")
        self.dim = self.lo.shape[0]

    def value(self, x):
        x = _vec(x, self.dim, "Box.value")
        viol = max(float(np.max(self.lo - x, initial=0.0)), float(np.max(x - self.hi, initial=0.0)))
        return 0.0 if viol <= FEAS_TOL else float("inf")

    def prox(self, v, alpha):
        self._check_alpha(alpha)
        return np.clip(_vec(v, self.dim, "Box.prox"), self.lo, self.hi)


class LinfBall(ProxBlock):
    """Indicator of ``{x : ||x||_inf <= radius}``."""

    def __init__(self, dim: int, radius: float):
        if radius < 0:
            raise ValueError("radius must be >= 0")
        self.dim = int(dim)
        self.radius = float(radius)

    def value(self, x):
        x = _vec(x, self.dim, "LinfBall.value")
        return 0.0 if float(np.max(np.abs(x), initial=0.0)) <= self.radius + FEAS_TOL else float("inf")

    def prox(self, v, alpha):
        self._check_alpha(alpha)
        return np.clip(_vec(v, self.dim, "LinfBall.prox"), -self.radius, self.radius)


class NonNeg(ProxBlock):
    """Indicator of the nonnegative orthant."""

    def __init__(self, dim: int):
        self.dim = int(dim)

    def value(self, x):
        x = _vec(x, self.dim, "NonNeg.value")
        return 0.0 if float(np.min(x, initial=0.0)) >= -FEAS_TOL else float("inf")

    def prox(self, v, alpha):
        self._check_alpha(alpha)
        return np.maximum(_vec(v, self.dim, "NonNeg.prox"), 0.0)


class Hyperplane(ProxBlock):
    """Indicator of ``{x : <normal, x> = 0}``; prox is orthogonal projection."""

    def __init__(self, normal):
        self.normal = np.asarray(normal, dtype=float).ravel()
        self.norm_sq = float(self.normal @ self.normal)
        if self.norm_sq == 0.0:
            raise ValueError("hyperplane normal must be nonzero")
        self.dim = self.normal.shape[0]

    def value(self, x):
        x = _vec(x, self.dim, "Hyperplane.value")
        dist = abs(float(self.normal @ x)) / np.sqrt(self.norm_sq)
        return 0.0 if dist <= FEAS_TOL else float("inf")

    def prox(self, v, alpha):
        self._check_alpha(alpha)
        v = _vec(v, self.dim, "Hyperplane.prox")
        return v - (float(self.normal @ v) / self.norm_sq) * self.normal


class QuadraticProx(ProxBlock):
    """Convex quadratic ``0.5 x^T Q x + <q, x>`` accessed through its prox.

    The prox solves the regularized normal equations ``(I + alpha Q) z = v -
    alpha q`` with a dense factorization; fine at the small sizes this
    package targets.
    """

    def __init__(self, Q, q=None):
        self._smooth = QuadraticSmooth(Q, q)
        self.dim = self._smooth.dim

    @property
    def Q(self):
        return self._smooth.Q

    @property
    def q(self):
        return self._smooth.q

    def value(self, x):
        return self._smooth.value(x)

    def prox(self, v, alpha):
        alpha = self._check_alpha(alpha)
        v = _vec(v, self.dim, "QuadraticProx.prox")
        lhs = np.eye(self.dim) + alpha * self.Q
        return np.linalg.solve(lhs, v - alpha * self.q)


class WeightedNuclear(ProxBlock):
    """Weighted nuclear norm ``sum_i w_i sigma_i(X)`` of a matrix-shaped vector.

    Vectors reshape row-major to ``shape``. The prox shrinks singular values
    by ``alpha * w_i`` (weights paired with singular values in descending
    order). The function is convex only for nonincreasing weights; other
    weight vectors are accepted with ``convex_weights=False`` and a warning,
    and the same shrinkage formula is applied without any convexity claim.

    The shrinkage formula is the exact prox whenever the shrunken values
    ``max(sigma_i - alpha w_i, 0)`` remain sorted, which holds for constant
    weights (the convex recipe used by the consensus builders) and for
    non-descending weights (the nonconvex recipe); strictly decreasing
    weights can reorder the shrunken values, in which case the formula is
    applied as stated without an optimality claim.
    """

    def __init__(self, weights, shape):
        self.shape = (int(shape[0]), int(shape[1]))
        self.weights = _weights(weights, "WeightedNuclear")
        k = min(self.shape)
        if self.weights.shape[0] != k:
            raise DimensionError(
                f"WeightedNuclear: need {k} weights for shape {self.shape}, got {self.weights.shape[0]}"
            )
        self.dim = self.shape[0] * self.shape[1]
        self.convex_weights = bool(np.all(np.diff(self.weights) <= 0))
        if not self.convex_weights:
            warnings.warn(
                "non-monotone nuclear weights: the block is nonconvex and the "
                "shrinkage prox carries no optimality guarantee",
                stacklevel=2,
            )

    def _matrix(self, x):
        return _vec(x, self.dim, "WeightedNuclear").reshape(self.shape)

    def value(self, x):
        _, s, _ = jacobi_svd(self._matrix(x))
        return float(self.weights @ s)

    def prox(self, v, alpha):
        alpha = self._check_alpha(alpha)
        U, s, V = jacobi_svd(self._matrix(v))
        shrunk = np.maximum(s - alpha * self.weights, 0.0)
        return ((U * shrunk) @ V.T).reshape(self.dim)


class SeparableSum(ProxBlock):
    """Sum of child blocks acting on consecutive slices of the input.

    The slices must partition ``[0, dim)`` exactly; overlaps and gaps are
    rejected at construction.
    """

    def __init__(self, children):
        children = [((int(a), int(b)), blk) for (a, b), blk in children]
        children.sort(key=lambda item: item[0][0])
        at = 0
        for (a, b), blk in children:
            if a != at:
                raise DimensionError(f"separable sum: slice [{a},{b}) leaves a gap or overlap at {at}")
            if b - a != blk.dim:
                raise DimensionError(f"separable sum: slice [{a},{b}) does not match child dim {blk.dim}")
            at = b
        self.children = children
        self.dim = at

    def value(self, x):
        x = _vec(x, self.dim, "SeparableSum.value")
        return float(sum(blk.value(x[a:b]) for (a, b), blk in self.children))

    def prox(self, v, alpha):
        alpha = self._check_alpha(alpha)
        v = _vec(v, self.dim, "SeparableSum.prox")
        out = np.empty(self.dim)
        for (a, b), blk in self.children:
            out[a:b] = blk.prox(v[a:b], alpha)
        return out


def prox_conjugate(block: ProxBlock, v, beta: float) -> np.ndarray:
    """Prox of the scaled convex conjugate via the Moreau identity.

    ``prox_{beta h*}(v) = v - beta * prox_{h/beta}(v / beta)`` where the
    right-hand prox is the catalog prox of ``h`` with stepsize ``1/beta``.
    """
    beta = float(beta)
    if beta <= 0:
        raise ValueError("beta must be > 0")
    v = np.asarray(v, dtype=float).ravel()
    return v - beta * block.prox(v / beta, 1.0 / beta)


# ---------------------------------------------------------------------------
# small dense SVD


def jacobi_svd(M):
    """Thin SVD of a small dense matrix by one-sided Jacobi rotations.

    Returns ``(U, S, V)`` with orthonormal columns, ``S`` nonnegative and
    descending, and ``M = U @ diag(S) @ V.T``. Sweeps continue until every
    column pair is orthogonal to relative tolerance 1e-12.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or min(M.shape) < 1:
        raise DimensionError(f"jacobi_svd needs a 2-d matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("jacobi_svd: non-finite input")
    m, n = M.shape
    if m < n:
        U, S, V = jacobi_svd(M.T)
        return V, S, U

    W = M.astype(float, copy=True)
    V = np.eye(n)
    for _ in range(64):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                wp, wq = W[:, p], W[:, q]
                apq = float(wp @ wq)
                app = float(wp @ wp)
                aqq = float(wq @ wq)
                if apq == 0.0 or abs(apq) <= 1e-12 * np.sqrt(app * aqq):
                    continue
                rotated = True
                tau = (aqq - app) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau)) if tau != 0 else 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                W[:, p], W[:, q] = c * wp - s * wq, s * wp + c * wq
                V[:, p], V[:, q] = c * V[:, p] - s * V[:, q], s * V[:, p] + c * V[:, q]
        if not rotated:
            break

    sigma = np.linalg.norm(W, axis=0)
    order = np.argsort(-sigma)
    sigma = sigma[order]
    W = W[:, order]
    V = V[:, order]

    U = np.zeros((m, n))
    tiny = 1e-14 * max(1.0, float(sigma[0]) if n else 1.0)
    basis_at = 0
    for j in range(n):
        if sigma[j] > tiny:
            U[:, j] = W[:, j] / sigma[j]
        else:
            # null column: fill with an orthonormal completion so U^T U = I
            sigma[j] = 0.0
            while True:
                cand = np.zeros(m)
                cand[basis_at % m] = 1.0
                basis_at += 1
                cand -= U @ (U.T @ cand)
                nrm = float(np.linalg.norm(cand))
                if nrm > 1e-8:
                    U[:, j] = cand / nrm
                    break
    return U, sigma, V
