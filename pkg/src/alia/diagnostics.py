"""Residual-based stopping, energy monitors, slack checks, and oracles.

The production loop only uses :func:`kkt_residuals` and :func:`should_stop`;
everything else is verification machinery: it needs a saddle point or extra
objective evaluations and is therefore opt-in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .blocks import smooth_lipschitz
from .errors import ConvergenceError, DimensionError
from .linops import DenseOp, operator_norm
from .solver import GOLDEN_RATIO, ProblemInstance, SolverState


@dataclass(frozen=True)
class ResidualReport:
    """Dual residuals ``w1``/``w2``, primal residual ``w3``, and their norms."""

    w1: np.ndarray
    w2: np.ndarray
    w3: np.ndarray
    two_norm_w12: float
    two_norm_w3: float
    inf_norm_w12: float
    inf_norm_w3: float

    @classmethod
    def from_vectors(cls, w1, w2, w3) -> "ResidualReport":
        w1 = np.asarray(w1, dtype=float).ravel()
        w2 = np.asarray(w2, dtype=float).ravel()
        w3 = np.asarray(w3, dtype=float).ravel()
        w12 = np.concatenate([w1, w2])
        return cls(
            w1=w1, w2=w2, w3=w3,
            two_norm_w12=float(np.linalg.norm(w12)),
            two_norm_w3=float(np.linalg.norm(w3)),
            inf_norm_w12=float(np.max(np.abs(w12), initial=0.0)),
            inf_norm_w3=float(np.max(np.abs(w3), initial=0.0)),
        )


def kkt_residuals(prev: SolverState, nxt: SolverState, gamma_next: float, problem: ProblemInstance) -> ResidualReport:
    """Optimality residuals of the step ``prev -> nxt`` taken with ``gamma_next``.

    ``w1 = (x^k - x^{k+1})/gamma - grad f2(x^k) + grad f2(x^{k+1})`` lies in
    ``partial f1(x^{k+1}) + grad f2(x^{k+1}) + A^T u^{k+1}`` (the dual-variable
    term cancels by construction of the prox step); ``w2`` is the y-block
    analogue and ``w3`` the constraint violation. Gradients come from the
    state caches, so no new evaluations happen here.
    """
    if prev.x.shape[0] != nxt.x.shape[0] or prev.y.shape[0] != nxt.y.shape[0]:
        raise DimensionError("states have mismatched shapes")
    w1 = (prev.x - nxt.x) / gamma_next - prev.grad_f2 + nxt.grad_f2
    w2 = (prev.y - nxt.y) / gamma_next - prev.grad_g2 + nxt.grad_g2
    w3 = problem.A.apply(nxt.x) + problem.B.apply(nxt.y) - problem.c
    return ResidualReport.from_vectors(w1, w2, w3)


def should_stop(report: ResidualReport, tol_two: float = 1e-4, tol_inf: float = 1e-6) -> bool:
    """True when both the 2-norm and max-norm residual gates pass."""
    if tol_two <= 0 or tol_inf <= 0:
        raise ValueError("tolerances must be > 0")
    return (
        max(report.two_norm_w12, report.two_norm_w3) <= tol_two
        and max(report.inf_norm_w12, report.inf_norm_w3) <= tol_inf
    )


# ---------------------------------------------------------------------------
# Lagrangian gap and energy monitors


def objective_value(problem: ProblemInstance, x, y) -> float:
    return (
        problem.f1.value(x) + problem.f2.value(x) + problem.g1.value(y) + problem.g2.value(y)
    )


def lagrangian_gap(x, y, saddle, problem: ProblemInstance) -> float:
    """Gap ``L(x, y, u*) - L(x*, y*, u*)`` against a known saddle point.

    Nonnegative for true saddle points; ``+inf`` when an indicator term is
    violated beyond tolerance at ``(x, y)``.
    """
    xs, ys, us = (np.asarray(v, dtype=float).ravel() for v in saddle)
    val = objective_value(problem, x, y)
    if math.isinf(val):
        return math.inf
    constraint = problem.A.apply(x) + problem.B.apply(y) - problem.c
    ref_constraint = problem.A.apply(xs) + problem.B.apply(ys) - problem.c
    ref = objective_value(problem, xs, ys) + float(us @ ref_constraint)
    return val + float(us @ constraint) - ref


@dataclass(frozen=True)
class LyapunovWitness:
    """One evaluation of the nonincreasing energy along a run."""

    mode: str
    saddle: tuple
    value: float
    p_prev: float


def lyapunov_value(state: SolverState, saddle, sigma: float, mode: str, problem: ProblemInstance) -> LyapunovWitness:
    """Energy at ``state`` (``k >= 1``): squared distances to the saddle and to
    the previous iterate, the scaled dual distance, plus a weighted
    Lagrangian gap at the previous iterate (weight ``3 gamma_k`` for ``s1``,
    ``(1 + phi) gamma_k`` for ``s2``)."""
    if state.k < 1:
        raise ValueError("the energy is defined from k = 1 on (needs a previous iterate)")
    if mode not in ("s1", "s2"):
        raise ValueError(f"mode must be 's1' or 's2', got {mode!r}")
    xs, ys, us = (np.asarray(v, dtype=float).ravel() for v in saddle)
    p_prev = lagrangian_gap(state.x_prev, state.y_prev, saddle, problem)
    coeff = 3.0 if mode == "s1" else 1.0 + GOLDEN_RATIO
    value = (
        0.5 * float((state.x - xs) @ (state.x - xs))
        + 0.5 * float((state.x - state.x_prev) @ (state.x - state.x_prev))
        + 0.5 * float((state.y - ys) @ (state.y - ys))
        + 0.5 * float((state.y - state.y_prev) @ (state.y - state.y_prev))
        + float((state.u - us) @ (state.u - us)) / (2.0 * sigma)
        + coeff * state.gamma * p_prev
    )
    return LyapunovWitness(mode=mode, saddle=(xs, ys, us), value=value, p_prev=p_prev)


def descent_slacks(decision, state: SolverState, sigma: float, epsilon: float, mode: str) -> dict:
    """Slacks of the three per-iteration descent inequalities (must be >= -1e-10).

    Each slack is the inequality's left-hand side minus the margin
    ``epsilon``, evaluated from the decision's recorded intermediates.
    """
    d = decision.diag
    g = state.gamma
    gn = decision.gamma_next
    rho = gn / g
    a2, b2 = d["a"] ** 2, d["b"] ** 2
    if mode == "s1":
        sx = 0.5 - (4.0 / 3.0) * rho**2 * d["delta_x"] - 2.0 * g * d["ell_x"] * rho \
            - 8.0 * sigma * a2 * gn**2 * d["lamA"] - epsilon
        sy = 0.5 - (4.0 / 3.0) * rho**2 * d["delta_y"] - 2.0 * g * d["ell_y"] * rho \
            - 8.0 * sigma * b2 * gn**2 * d["lamB"] - epsilon
        su = 1.0 / (2.0 * sigma) - (d["lamA"] + d["lamB"]) / (8.0 * sigma) \
            - 4.0 * gn**2 * (a2 + b2) - epsilon
    elif mode == "s2":
        phi = GOLDEN_RATIO
        sx = 0.5 - rho**2 * d["delta_x"] - phi * g * d["ell_x"] * rho \
            - 2.0 * phi**2 * sigma * a2 * gn**2 * d["lamA"] \
            - sigma * a2 * g * rho**3 * d["muA"] * (d["delta_x"] + 1.0) - epsilon
        sy = 0.5 - rho**2 * d["delta_y"] - phi * g * d["ell_y"] * rho \
            - 2.0 * phi**2 * sigma * b2 * gn**2 * d["lamB"] \
            - sigma * b2 * g * rho**3 * d["muB"] * (d["delta_y"] + 1.0) - epsilon
        su = 1.0 / (2.0 * sigma) - (d["lamA"] + d["lamB"]) / (8.0 * sigma) \
            - gn * (d["muA"] + d["muB"]) / sigma - gn**2 * (a2 + b2) - epsilon
    else:
        raise ValueError(f"slacks are defined for modes 's1'/'s2', got {mode!r}")
    return {"x": sx, "y": sy, "u": su}


def stepsize_floor(problem: ProblemInstance, opts) -> float:
    """Closed-form lower bound on the ``s1`` stepsize sequence for quadratic
    smooth blocks (gradient Lipschitz constants are then global).

    The bound is ``min(gamma0, dual term, cap_x, cap_y)`` where the dual term
    uses the operator norms of A and B and each cap replaces the local
    curvature estimates by the global constant.
    """
    sig, eps = opts.sigma, opts.epsilon
    L_x = smooth_lipschitz(problem.f2)
    L_y = smooth_lipschitz(problem.g2)

    def norm_or_zero(op):
        from .linops import is_zero_op

        return 0.0 if is_zero_op(op) else operator_norm(op)

    nA = norm_or_zero(problem.A)
    nB = norm_or_zero(problem.B)
    ab2 = nA * nA + nB * nB
    dual = math.inf if ab2 == 0.0 else math.sqrt((2.0 - 8.0 * sig * eps) / (32.0 * sig * ab2))

    def cap(L, n):
        inner = L * L + (2.0 - 4.0 * eps) / 3.0 * (L * L + 6.0 * sig * n * n)
        den = L + math.sqrt(inner)
        return math.inf if den <= 0.0 else (1.0 - 2.0 * eps) / 2.0 / den

    return min(opts.gamma0, dual, cap(L_x, nA), cap(L_y, nB))


# ---------------------------------------------------------------------------
# independent oracles


def finite_diff_check(block, x, h: float = 1e-6) -> float:
    """Max componentwise error between ``grad`` and central differences."""
    if h <= 0:
        raise ValueError("h must be > 0")
    x = np.asarray(x, dtype=float).ravel()
    g = block.grad(x)
    worst = 0.0
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = h
        approx = (block.value(x + e) - block.value(x - e)) / (2.0 * h)
        worst = max(worst, abs(approx - float(g[i])))
    return worst


def prox_gradient_solve(smooth, prox, x0, step: float, max_iters: int = 100000, tol: float = 1e-12):
    """Plain proximal-gradient reference: ``x <- prox(x - step * grad(x), step)``.

    Returns the final iterate; used as an independent oracle for collapsed
    one-block problems.
    """
    x = np.asarray(x0, dtype=float).ravel()
    for _ in range(int(max_iters)):
        x_new = prox.prox(x - step * smooth.grad(x), step)
        if float(np.max(np.abs(x_new - x), initial=0.0)) <= tol * step:
            return x_new
        x = x_new
    return x


def reference_solve(problem: ProblemInstance, max_iters: int = 2_000_000, tol=(1e-8, 1e-10), beta: float | None = None):
    """Saddle-point oracle: damped fixed-stepsize primal-dual iteration.

    Stacks the two primal blocks into one variable ``z = (x, y)`` with the
    constraint ``[A B] z = c`` handled through its dual, and iterates

        z+ = prox_{alpha p}(z - alpha grad s(z) - alpha K^T u)
        u+ = u + beta (K (2 z+ - z) - c)

    with ``alpha = 0.99 / (L/2 + beta ||K||^2)``. Runs until the step
    residuals pass :func:`should_stop` at ``tol`` (default ``1e-8``/``1e-10``)
    and raises :class:`ConvergenceError` otherwise. Intended for small
    instances only (total dimension at most 200).
    """
    p, q, r = problem.dim_x, problem.dim_y, problem.dim_u
    if p + q + r > 200:
        raise ValueError(f"reference_solve is capped at total dimension 200, got {p + q + r}")
    K = DenseOp(np.hstack([problem.A.to_dense(), problem.B.to_dense()]))
    nK = operator_norm(K) if np.any(K.matrix) else 0.0
    L = max(smooth_lipschitz(problem.f2), smooth_lipschitz(problem.g2))
    if beta is None:
        beta = 1.0 / nK if nK > 0 else 1.0
    alpha = 0.99 / (L / 2.0 + beta * nK * nK) if (L > 0 or nK > 0) else 1.0

    z = np.zeros(p + q)
    u = np.zeros(r)
    gs = np.concatenate([problem.f2.grad(z[:p]), problem.g2.grad(z[p:])])
    check_every = 16
    for it in range(int(max_iters)):
        Ktu = K.apply_adjoint(u)
        z_new = np.concatenate(
            [
                problem.f1.prox(z[:p] - alpha * (gs[:p] + Ktu[:p]), alpha),
                problem.g1.prox(z[p:] - alpha * (gs[p:] + Ktu[p:]), alpha),
            ]
        )
        u_new = u + beta * (K.apply(2.0 * z_new - z) - problem.c)
        gs_new = np.concatenate([problem.f2.grad(z_new[:p]), problem.g2.grad(z_new[p:])])
        if it % check_every == 0:
            # the primal step used the old dual, so the dual increment enters
            w12 = (z - z_new) / alpha - gs + gs_new - Ktu + K.apply_adjoint(u_new)
            w3 = K.apply(z_new) - problem.c
            report = ResidualReport.from_vectors(w12[:p], w12[p:], w3)
            if should_stop(report, tol[0], tol[1]):
                return z_new[:p], z_new[p:], u_new.copy()
        z, gs, u = z_new, gs_new, u_new
        if not np.all(np.isfinite(z)):
            raise ConvergenceError("reference iteration produced non-finite iterates")
    raise ConvergenceError(
        f"reference iteration did not reach tolerance {tol} in {max_iters} iterations",
        last_estimate=(z[:p], z[p:], u),
    )
