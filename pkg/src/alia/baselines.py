"""Non-adaptive reference solvers sharing the problem type and stopping rule.

``flip_admm_solve`` is the function-linearized proximal ADMM with the
linearization matrices chosen as ``(1/eta) I - sigma A^T A`` (and the y-block
analogue), which reduces each subproblem to a single prox call.
``condat_vu_solve`` is the classical primal-dual splitting for
``min f(x) + g(x) + h(Ax)``. ``fixed_step_reference`` is a deliberately
separate, straight-line implementation of the constant-stepsize dual-first
iteration used to cross-check the main solver's ``fixed`` mode.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .blocks import smooth_lipschitz
from .errors import ConfigError, DimensionError
from .linops import IdentityOp, ScaledOp, is_zero_op, operator_norm
from .solver import IterationRecord, ProblemInstance, SolveResult

_PSD_MARGIN = 1e-6


@dataclass(frozen=True)
class FlipOptions:
    """Penalty ``sigma``, dual extrapolation ``phi``, and proximal curvatures.

    ``eta_x``/``eta_y`` must satisfy ``eta <= (1 - 1e-6) / (sigma ||A||^2)``
    (likewise for B) so the implicit linearization matrices stay positive
    semidefinite; ``None`` picks the largest admissible value.
    """

    sigma: float = 1.0
    phi: float = 1.0
    eta_x: float | None = None
    eta_y: float | None = None

    def __post_init__(self):
        if self.sigma <= 0 or self.phi <= 0:
            raise ValueError("sigma and phi must be > 0")
        for name, eta in (("eta_x", self.eta_x), ("eta_y", self.eta_y)):
            if eta is not None and eta <= 0:
                raise ValueError(f"{name} must be > 0")


def resolve_flip_etas(problem: ProblemInstance, opts: FlipOptions, norms=None):
    """Concrete ``(eta_x, eta_y)`` for ``opts``, validated against the operator norms.

    ``norms=(||A||, ||B||)`` may be supplied to avoid re-estimating them (for
    example when the problem's operators are instrumented with call counters).
    """
    if norms is None:
        nA = 0.0 if is_zero_op(problem.A) else operator_norm(problem.A)
        nB = 0.0 if is_zero_op(problem.B) else operator_norm(problem.B)
    else:
        nA, nB = norms

    def resolve(eta, n, name):
        limit = math.inf if n == 0.0 else (1.0 - _PSD_MARGIN) / (opts.sigma * n * n)
        if eta is None:
            return min(limit, 1.0) if math.isinf(limit) else limit
        if eta > limit:
            raise ValueError(
                f"{name} = {eta} violates the positive-semidefiniteness bound {limit}"
            )
        return eta

    return resolve(opts.eta_x, nA, "eta_x"), resolve(opts.eta_y, nB, "eta_y")


def flip_admm_solve(
    problem: ProblemInstance,
    opts: FlipOptions,
    stop=(1e-4, 1e-6),
    max_iters: int = 100000,
    init=None,
    norms=None,
) -> SolveResult:
    """Gauss-Seidel x/y prox steps followed by an extrapolated dual ascent step."""
    from .diagnostics import ResidualReport, should_stop
    from .solver import SolverState, initial_state

    sig, phi = opts.sigma, opts.phi
    eta_x, eta_y = resolve_flip_etas(problem, opts, norms=norms)
    x0, y0, u0 = (None, None, None) if init is None else init
    st = initial_state(problem, x0, y0, u0, gamma0=eta_x)
    x, y, u = st.x, st.y, st.u
    gx, gy = st.grad_f2, st.grad_g2

    trace: list[IterationRecord] = []
    status = "max_iters"
    state = st
    for _ in range(int(max_iters)):
        t0 = time.perf_counter_ns()
        By = problem.B.apply(y)
        rx = problem.A.apply(x) + By - problem.c
        x_new = problem.f1.prox(x - eta_x * (gx + problem.A.apply_adjoint(u + sig * rx)), eta_x)
        Ax_new = problem.A.apply(x_new)
        ry = Ax_new + By - problem.c
        y_new = problem.g1.prox(y - eta_y * (gy + problem.B.apply_adjoint(u + sig * ry)), eta_y)
        res = Ax_new + problem.B.apply(y_new) - problem.c
        u_new = u + phi * sig * res

        gx_new = problem.f2.grad(x_new)
        gy_new = problem.g2.grad(y_new)
        w1 = (x - x_new) / eta_x - gx + gx_new + problem.A.apply_adjoint(u_new - u - sig * rx)
        w2 = (y - y_new) / eta_y - gy + gy_new + problem.B.apply_adjoint(u_new - u - sig * ry)
        report = ResidualReport.from_vectors(w1, w2, res)

        state = SolverState(
            k=state.k + 1,
            x=x_new, x_prev=x, y=y_new, y_prev=y, u=u_new, gamma=eta_x,
            grad_f2=gx_new, grad_f2_prev=gx, grad_g2=gy_new, grad_g2_prev=gy,
        )
        x, y, u, gx, gy = x_new, y_new, u_new, gx_new, gy_new
        trace.append(
            IterationRecord(
                k=state.k, gamma=eta_x, active_term="",
                res2_w12=report.two_norm_w12, res2_w3=report.two_norm_w3,
                resinf_w12=report.inf_norm_w12, resinf_w3=report.inf_norm_w3,
                wall_ns=time.perf_counter_ns() - t0,
            )
        )
        if should_stop(report, stop[0], stop[1]):
            status = "converged"
            break
        if not np.all(np.isfinite(x)):
            status = "diverged"
            break
    return SolveResult(state=state, trace=trace, status=status)


@dataclass(frozen=True)
class CondatVuOptions:
    """Dual step ``beta``; the primal step is derived from a Lipschitz estimate.

    ``alpha = 0.99 / (lipschitz / 2 + beta ||A||^2)``. ``lipschitz=None``
    auto-estimates for catalog smooth blocks and errors otherwise.
    """

    beta: float = 1.0
    lipschitz: float | None = None

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be > 0")
        if self.lipschitz is not None and self.lipschitz < 0:
            raise ValueError("lipschitz must be >= 0")


@dataclass
class CondatVuState:
    k: int
    x: np.ndarray
    u: np.ndarray
    y: np.ndarray  # h-block auxiliary primal, tracks A x in the limit


def condat_vu_solve(problem3, opts: CondatVuOptions, stop=(1e-4, 1e-6), max_iters: int = 100000, init=None, norm_A=None):
    """Primal-dual splitting for ``min f(x) + g(x) + h(Ax)``.

    ``problem3`` is ``(f, g, h, A)`` with smooth ``f`` and proximable ``g``,
    ``h``. The conjugate prox comes from the Moreau identity, which also
    yields an auxiliary primal ``y`` with ``u in partial h(y)`` exactly; the
    stopping rule then reuses the shared residual gates with ``w2 = 0`` and
    ``w3 = Ax - y``.
    """
    from .diagnostics import ResidualReport, should_stop

    f, g, h, A = problem3
    if f.dim != g.dim or A.cols != f.dim or h.dim != A.rows:
        raise DimensionError(
            f"inconsistent three-term problem: f/g dim {f.dim}/{g.dim}, A {A.shape}, h dim {h.dim}"
        )
    L = opts.lipschitz
    if L is None:
        try:
            L = smooth_lipschitz(f)
        except ConfigError as exc:
            raise ConfigError(f"cannot derive a Lipschitz constant: {exc}") from exc
    if norm_A is None:
        norm_A = 0.0 if is_zero_op(A) else operator_norm(A)
    beta = opts.beta
    denom = L / 2.0 + beta * norm_A * norm_A
    alpha = 0.99 / denom if denom > 0 else 1.0

    x = np.zeros(f.dim) if init is None else np.asarray(init[0], dtype=float).ravel()
    u = np.zeros(A.rows) if init is None or len(init) < 2 else np.asarray(init[1], dtype=float).ravel()
    gx = f.grad(x)
    y = np.zeros(A.rows)

    trace: list[IterationRecord] = []
    status = "max_iters"
    k = 0
    for _ in range(int(max_iters)):
        t0 = time.perf_counter_ns()
        Atu = A.apply_adjoint(u)
        x_new = g.prox(x - alpha * gx - alpha * Atu, alpha)
        v = u + beta * A.apply(2.0 * x_new - x)
        y = h.prox(v / beta, 1.0 / beta)
        u_new = v - beta * y
        gx_new = f.grad(x_new)
        w1 = (x - x_new) / alpha - gx + gx_new - Atu + A.apply_adjoint(u_new)
        w3 = A.apply(x_new) - y
        report = ResidualReport.from_vectors(w1, np.zeros(0), w3)
        x, u, gx = x_new, u_new, gx_new
        k += 1
        trace.append(
            IterationRecord(
                k=k, gamma=alpha, active_term="",
                res2_w12=report.two_norm_w12, res2_w3=report.two_norm_w3,
                resinf_w12=report.inf_norm_w12, resinf_w3=report.inf_norm_w3,
                wall_ns=time.perf_counter_ns() - t0,
            )
        )
        if should_stop(report, stop[0], stop[1]):
            status = "converged"
            break
        if not np.all(np.isfinite(x)):
            status = "diverged"
            break
    return CondatVuState(k=k, x=x, u=u, y=y), trace, status


def three_term_form(problem: ProblemInstance):
    """Extract ``(f, g, h, A)`` when the instance matches ``min f+g+h(Ax)``.

    Requires ``B = -I``, ``c = 0`` and a zero smooth y-block; raises
    :class:`ConfigError` otherwise.
    """
    from .blocks import ZeroSmooth

    n = problem.dim_y
    B_ok = isinstance(problem.B, ScaledOp) and problem.B.alpha == -1.0 and isinstance(problem.B.inner, IdentityOp)
    if not B_ok:
        B_ok = problem.B.shape == (n, n) and np.array_equal(problem.B.to_dense(), -np.eye(n))
    if not B_ok or np.any(problem.c):
        raise ConfigError("three-term form needs the constraint A x - y = 0")
    if not isinstance(problem.g2, ZeroSmooth):
        raise ConfigError("three-term form needs a zero smooth y-block")
    return problem.f2, problem.f1, problem.g1, problem.A


def fixed_step_reference(problem: ProblemInstance, sigma: float, gamma: float, init=None, iters: int = 5):
    """Straight-line constant-stepsize dual-first iteration, kept independent
    of the main solver machinery (used as a cross-implementation check).

    Returns the list of ``(x, y, u)`` triples after each of ``iters`` steps.
    """
    x = np.zeros(problem.dim_x) if init is None else np.asarray(init[0], dtype=float).copy()
    y = np.zeros(problem.dim_y) if init is None else np.asarray(init[1], dtype=float).copy()
    u = np.zeros(problem.dim_u) if init is None else np.asarray(init[2], dtype=float).copy()
    x_prev, y_prev = x.copy(), y.copy()
    out = []
    for _ in range(int(iters)):
        du = (
            problem.A.apply(3.0 * x - 2.0 * x_prev)
            + problem.B.apply(3.0 * y - 2.0 * y_prev)
            - problem.c
        )
        u = u + sigma * gamma * du
        x_next = problem.f1.prox(x - gamma * problem.f2.grad(x) - gamma * problem.A.apply_adjoint(u), gamma)
        y_next = problem.g1.prox(y - gamma * problem.g2.grad(y) - gamma * problem.B.apply_adjoint(u), gamma)
        x_prev, y_prev = x, y
        x, y = x_next, y_next
        out.append((x.copy(), y.copy(), u.copy()))
    return out
