"""Adaptive linearized ADMM with linesearch-free stepsize selection.

The solver targets

    minimize  f1(x) + f2(x) + g1(y) + g2(y)
    subject to  A x + B y = c,

where ``f1``/``g1`` are proximable and ``f2``/``g2`` are smooth. Each
iteration picks the next stepsize ``gamma`` and dual direction from already
computed quantities (no trial steps, no backtracking), takes a dual ascent
step, and then two proximal-gradient primal steps:

    u+ = u + sigma * gamma * delta_u
    x+ = prox_{gamma f1}(x - gamma grad f2(x) - gamma A^T u+)
    y+ = prox_{gamma g1}(y - gamma grad g2(y) - gamma B^T u+)

Two selection subroutines are provided. ``s1`` grows the stepsize by at most
3/2 per iteration and caps it with a closed-form quadratic bound; ``s2``
grows by the golden ratio and sharpens the caps by tracking two extra
Young-equality ratios, at the cost of solving a cubic. A ``fixed`` mode runs
the same iteration with a constant stepsize for baseline comparisons.

Gradients of ``f2``/``g2`` are cached on the state: the selection subroutines
only ever read the cached values at the current and previous iterates, and
``advance`` evaluates each gradient exactly once at the new point.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .cubic import smallest_positive_root
from .errors import DimensionError, NumericsError

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0

SUBROUTINES = ("s1", "s2", "fixed")


def _as_vec(v, n, what):
    v = np.asarray(v, dtype=float).ravel()
    if v.shape[0] != n:
        raise DimensionError(f"{what}: expected length {n}, got {v.shape[0]}")
    return v


def _require_finite(arr, what: str):
    if not np.all(np.isfinite(arr)):
        raise NumericsError(f"non-finite values in {what}")


@dataclass(frozen=True)
class ProblemInstance:
    """Problem data ``(f1, f2, g1, g2, A, B, c)`` with consistent dimensions."""

    f1: object
    f2: object
    g1: object
    g2: object
    A: object
    B: object
    c: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float).ravel())
        if self.f1.dim != self.f2.dim:
            raise DimensionError(f"f1 dim {self.f1.dim} != f2 dim {self.f2.dim}")
        if self.g1.dim != self.g2.dim:
            raise DimensionError(f"g1 dim {self.g1.dim} != g2 dim {self.g2.dim}")
        if self.A.cols != self.f1.dim:
            raise DimensionError(f"A has {self.A.cols} columns but x-block dim is {self.f1.dim}")
        if self.B.cols != self.g1.dim:
            raise DimensionError(f"B has {self.B.cols} columns but y-block dim is {self.g1.dim}")
        if self.A.rows != self.B.rows or self.A.rows != self.c.shape[0]:
            raise DimensionError(
                f"constraint rows disagree: A {self.A.rows}, B {self.B.rows}, c {self.c.shape[0]}"
            )

    @property
    def dim_x(self) -> int:
        return self.f1.dim

    @property
    def dim_y(self) -> int:
        return self.g1.dim

    @property
    def dim_u(self) -> int:
        return self.c.shape[0]


def theory_epsilon(sigma: float) -> float:
    """Default strictly positive margin for runs that want the point-convergence guarantee."""
    return min(1e-9, 1.0 / (8.0 * sigma))


@dataclass(frozen=True)
class SolverOptions:
    """Solver knobs: dual/primal ratio ``sigma``, start stepsize, margin, stopping."""

    sigma: float = 1.0
    gamma0: float = 1.0
    epsilon: float = 0.0
    subroutine: str = "s1"
    max_iters: int = 100000
    tol_two: float = 1e-4
    tol_inf: float = 1e-6

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if self.gamma0 <= 0:
            raise ValueError(f"gamma0 must be > 0, got {self.gamma0}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.epsilon > 0 and self.epsilon >= min(0.5, 1.0 / (4.0 * self.sigma)):
            raise ValueError(
                f"positive epsilon must stay below min(1/2, 1/(4 sigma)) = "
                f"{min(0.5, 1.0 / (4.0 * self.sigma))}, got {self.epsilon}"
            )
        if self.subroutine not in SUBROUTINES:
            raise ValueError(f"subroutine must be one of {SUBROUTINES}, got {self.subroutine!r}")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if self.tol_two <= 0 or self.tol_inf <= 0:
            raise ValueError("stopping tolerances must be > 0")


@dataclass(frozen=True)
class SolverState:
    """Iterates at step ``k`` plus the previous iterates and cached gradients."""

    k: int
    x: np.ndarray
    x_prev: np.ndarray
    y: np.ndarray
    y_prev: np.ndarray
    u: np.ndarray
    gamma: float
    grad_f2: np.ndarray
    grad_f2_prev: np.ndarray
    grad_g2: np.ndarray
    grad_g2_prev: np.ndarray


def initial_state(problem: ProblemInstance, x0=None, y0=None, u0=None, gamma0: float = 1.0) -> SolverState:
    """State at ``k = 0`` with previous iterates equal to the current ones.

    Evaluates each smooth gradient once; the copies double as the cached
    previous-iterate gradients.
    """
    x0 = np.zeros(problem.dim_x) if x0 is None else _as_vec(x0, problem.dim_x, "x0")
    y0 = np.zeros(problem.dim_y) if y0 is None else _as_vec(y0, problem.dim_y, "y0")
    u0 = np.zeros(problem.dim_u) if u0 is None else _as_vec(u0, problem.dim_u, "u0")
    if gamma0 <= 0:
        raise ValueError("gamma0 must be > 0")
    gf = problem.f2.grad(x0)
    gg = problem.g2.grad(y0)
    return SolverState(
        k=0,
        x=x0.copy(), x_prev=x0.copy(),
        y=y0.copy(), y_prev=y0.copy(),
        u=u0.copy(),
        gamma=float(gamma0),
        grad_f2=gf, grad_f2_prev=gf.copy(),
        grad_g2=gg, grad_g2_prev=gg.copy(),
    )


@dataclass(frozen=True)
class StepDecision:
    """Next stepsize and dual direction plus every intermediate for diagnostics."""

    gamma_next: float
    delta_u: np.ndarray
    diag: dict
    mode: str

    @property
    def active_term(self) -> str:
        return self.diag["active_term"]


def _ratio(num: float, den: float) -> float:
    """Quotient with the 0/0 -> 0 convention (0 denominators only occur with 0 numerators)."""
    return num / den if den != 0.0 else 0.0


def _young(num: float, den: float, name: str) -> float:
    """Young-equality ratio, guaranteed in [-1, 1]; tiny rounding excursions are clamped.

    The guard tolerance leaves room for dot-product rounding (which scales
    with the dimension) while still catching genuinely out-of-range values.
    """
    val = _ratio(num, den)
    if not math.isfinite(val) or abs(val) > 1.0 + 1e-9:
        raise NumericsError(f"Young ratio {name} out of range: {val}")
    return min(1.0, max(-1.0, val))


def _curvature(diff, grad_diff, gamma):
    """Local curvature estimates (ell, L, delta) from one iterate/gradient pair."""
    n2 = float(diff @ diff)
    ell = _ratio(float(grad_diff @ diff), n2)
    L = _ratio(float(np.linalg.norm(grad_diff)), math.sqrt(n2))
    delta = gamma * gamma * L * L - 2.0 * gamma * ell
    return ell, L, delta


def _pick_min(candidates, names):
    gamma = min(candidates)
    for val, name in zip(candidates, names):
        if val == gamma:
            return gamma, name
    return gamma, names[0]  # pragma: no cover


_CAP_NAMES = ("growth", "dual_cap", "Gx", "Gy")


def select_step_s1(state: SolverState, problem: ProblemInstance, opts: SolverOptions) -> StepDecision:
    """Stepsize/direction selection with growth factor 3/2 and quadratic caps."""
    g = state.gamma
    sig = opts.sigma
    eps = opts.epsilon

    du = (
        problem.A.apply(3.0 * state.x - 2.0 * state.x_prev)
        + problem.B.apply(3.0 * state.y - 2.0 * state.y_prev)
        - problem.c
    )
    _require_finite(du, "delta_u")
    n_du = float(np.linalg.norm(du))
    At_du = problem.A.apply_adjoint(du)
    Bt_du = problem.B.apply_adjoint(du)
    a = _ratio(float(np.linalg.norm(At_du)), n_du)
    b = _ratio(float(np.linalg.norm(Bt_du)), n_du)

    dx = state.x - state.x_prev
    dy = state.y - state.y_prev
    nx2 = float(dx @ dx)
    ny2 = float(dy @ dy)
    nAt2 = float(At_du @ At_du)
    nBt2 = float(Bt_du @ Bt_du)

    lamA = _young(float(At_du @ dx), _ratio(nAt2, 16.0 * a * a) + 4.0 * a * a * nx2, "lamA")
    lamB = _young(float(Bt_du @ dy), _ratio(nBt2, 16.0 * b * b) + 4.0 * b * b * ny2, "lamB")

    # gradient differences at (k-1, k) come from the caches, never re-evaluated
    ell_x, L_x, delta_x = _curvature(state.x_prev - state.x, state.grad_f2_prev - state.grad_f2, g)
    ell_y, L_y, delta_y = _curvature(state.y_prev - state.y, state.grad_g2_prev - state.grad_g2, g)

    def cap(ell, delta, asq, lam):
        inner = (g * ell) ** 2 + (2.0 - 4.0 * eps) / 3.0 * (delta + 6.0 * sig * asq * g * g * lam)
        if inner < 0.0:
            return math.inf  # no real root: the quadratic constraint is vacuous
        den = g * ell + math.sqrt(inner)
        if den <= 0.0:
            return math.inf
        return (1.0 - 2.0 * eps) / 2.0 * g / den

    Gx = cap(ell_x, delta_x, a * a, lamA)
    Gy = cap(ell_y, delta_y, b * b, lamB)
    ab2 = a * a + b * b
    dual_cap = (
        math.inf
        if ab2 == 0.0
        else math.sqrt((4.0 - lamA - lamB - 8.0 * sig * eps) / (32.0 * sig * ab2))
    )
    gamma_next, active = _pick_min((1.5 * g, dual_cap, Gx, Gy), _CAP_NAMES)
    if not (gamma_next > 0.0 and math.isfinite(gamma_next)):
        raise NumericsError(f"next stepsize is not a positive finite number: {gamma_next}")

    diag = {
        "a": a, "b": b, "lamA": lamA, "lamB": lamB, "muA": 0.0, "muB": 0.0,
        "ell_x": ell_x, "ell_y": ell_y, "L_x": L_x, "L_y": L_y,
        "delta_x": delta_x, "delta_y": delta_y,
        "Gamma_x": Gx, "Gamma_y": Gy,
        "Theta": math.nan, "Psi": math.nan,
        "rho": gamma_next / g, "active_term": active,
    }
    return StepDecision(gamma_next=gamma_next, delta_u=du, diag=diag, mode="s1")


def select_step_s2(state: SolverState, problem: ProblemInstance, opts: SolverOptions) -> StepDecision:
    """Golden-ratio selection: sharper caps via two extra Young ratios and a cubic."""
    g = state.gamma
    sig = opts.sigma
    eps = opts.epsilon
    phi = GOLDEN_RATIO

    du = (
        problem.A.apply((1.0 + phi) * state.x - phi * state.x_prev)
        + problem.B.apply((1.0 + phi) * state.y - phi * state.y_prev)
        - problem.c
    )
    _require_finite(du, "delta_u")
    n_du = float(np.linalg.norm(du))
    At_du = problem.A.apply_adjoint(du)
    Bt_du = problem.B.apply_adjoint(du)
    a = _ratio(float(np.linalg.norm(At_du)), n_du)
    b = _ratio(float(np.linalg.norm(Bt_du)), n_du)

    dx = state.x - state.x_prev
    dy = state.y - state.y_prev
    nx2 = float(dx @ dx)
    ny2 = float(dy @ dy)
    nAt2 = float(At_du @ At_du)
    nBt2 = float(Bt_du @ Bt_du)

    lamA = _young(float(At_du @ dx), _ratio(nAt2, 8.0 * phi * a * a) + 2.0 * phi * a * a * nx2, "lamA")
    lamB = _young(float(Bt_du @ dy), _ratio(nBt2, 8.0 * phi * b * b) + 2.0 * phi * b * b * ny2, "lamB")

    # F_k / G_k differences assembled from the cached gradients:
    # F_k(x^{k-1}) - F_k(x^k) = (x^{k-1} - x^k) - gamma_k (grad f2(x^{k-1}) - grad f2(x^k))
    Fdx = (state.x_prev - state.x) - g * (state.grad_f2_prev - state.grad_f2)
    Gdy = (state.y_prev - state.y) - g * (state.grad_g2_prev - state.grad_g2)
    nF2 = float(Fdx @ Fdx)
    nG2 = float(Gdy @ Gdy)
    muA = _young(
        float(At_du @ Fdx), _ratio(g * nAt2, 2.0 * a * a) + (a * a / (2.0 * g)) * nF2, "muA"
    )
    muB = _young(
        float(Bt_du @ Gdy), _ratio(g * nBt2, 2.0 * b * b) + (b * b / (2.0 * g)) * nG2, "muB"
    )

    ell_x, L_x, delta_x = _curvature(state.x_prev - state.x, state.grad_f2_prev - state.grad_f2, g)
    ell_y, L_y, delta_y = _curvature(state.y_prev - state.y, state.grad_g2_prev - state.grad_g2, g)

    def cap(ell, delta, asq, lam, mu):
        c3 = sig * asq * mu * (delta + 1.0) / (g * g)
        c2 = 2.0 * phi * phi * sig * asq * lam + delta / (g * g)
        c1 = phi * ell
        c0 = -(1.0 - 2.0 * eps) / 2.0
        return smallest_positive_root(c3, c2, c1, c0)

    Gx = cap(ell_x, delta_x, a * a, lamA, muA)
    Gy = cap(ell_y, delta_y, b * b, lamB, muB)

    ab2 = a * a + b * b
    theta = (4.0 - lamA - lamB - 8.0 * sig * eps) / (4.0 * sig)
    m = (muA + muB) / sig
    psi = m + math.sqrt(m * m + 2.0 * ab2 * theta)
    dual_cap = theta / psi if psi > 0.0 else math.inf

    gamma_next, active = _pick_min((phi * g, dual_cap, Gx, Gy), _CAP_NAMES)
    if not (gamma_next > 0.0 and math.isfinite(gamma_next)):
        raise NumericsError(f"next stepsize is not a positive finite number: {gamma_next}")

    diag = {
        "a": a, "b": b, "lamA": lamA, "lamB": lamB, "muA": muA, "muB": muB,
        "ell_x": ell_x, "ell_y": ell_y, "L_x": L_x, "L_y": L_y,
        "delta_x": delta_x, "delta_y": delta_y,
        "Gamma_x": Gx, "Gamma_y": Gy,
        "Theta": theta, "Psi": psi,
        "rho": gamma_next / g, "active_term": active,
    }
    return StepDecision(gamma_next=gamma_next, delta_u=du, diag=diag, mode="s2")


def select_step_fixed(state: SolverState, problem: ProblemInstance, opts: SolverOptions) -> StepDecision:
    """Constant-stepsize mode: gamma stays at gamma0, direction as in ``s1``."""
    du = (
        problem.A.apply(3.0 * state.x - 2.0 * state.x_prev)
        + problem.B.apply(3.0 * state.y - 2.0 * state.y_prev)
        - problem.c
    )
    _require_finite(du, "delta_u")
    diag = {
        "a": 0.0, "b": 0.0, "lamA": 0.0, "lamB": 0.0, "muA": 0.0, "muB": 0.0,
        "ell_x": 0.0, "ell_y": 0.0, "L_x": 0.0, "L_y": 0.0,
        "delta_x": 0.0, "delta_y": 0.0,
        "Gamma_x": math.inf, "Gamma_y": math.inf,
        "Theta": math.nan, "Psi": math.nan,
        "rho": opts.gamma0 / state.gamma, "active_term": "fixed",
    }
    return StepDecision(gamma_next=opts.gamma0, delta_u=du, diag=diag, mode="fixed")


_SELECTORS = {"s1": select_step_s1, "s2": select_step_s2, "fixed": select_step_fixed}


def advance(state: SolverState, decision: StepDecision, problem: ProblemInstance, opts: SolverOptions) -> SolverState:
    """One dual step followed by the two independent primal prox steps.

    Evaluates ``grad f2`` and ``grad g2`` exactly once each, at the new
    iterates, and shifts the caches.
    """
    gamma = decision.gamma_next
    u_new = state.u + opts.sigma * gamma * decision.delta_u
    _require_finite(u_new, "u")
    x_new = problem.f1.prox(
        state.x - gamma * state.grad_f2 - gamma * problem.A.apply_adjoint(u_new), gamma
    )
    _require_finite(x_new, "x")
    y_new = problem.g1.prox(
        state.y - gamma * state.grad_g2 - gamma * problem.B.apply_adjoint(u_new), gamma
    )
    _require_finite(y_new, "y")
    return SolverState(
        k=state.k + 1,
        x=x_new, x_prev=state.x,
        y=y_new, y_prev=state.y,
        u=u_new,
        gamma=gamma,
        grad_f2=problem.f2.grad(x_new), grad_f2_prev=state.grad_f2,
        grad_g2=problem.g2.grad(y_new), grad_g2_prev=state.grad_g2,
    )


@dataclass
class IterationRecord:
    """One trace row; slack fields stay ``None`` unless verification is on."""

    k: int
    gamma: float
    active_term: str
    lamA: float | None = None
    lamB: float | None = None
    muA: float | None = None
    muB: float | None = None
    a: float | None = None
    b: float | None = None
    res2_w12: float = math.nan
    res2_w3: float = math.nan
    resinf_w12: float = math.nan
    resinf_w3: float = math.nan
    slack_x: float | None = None
    slack_y: float | None = None
    slack_u: float | None = None
    wall_ns: int = 0


@dataclass
class SolveResult:
    state: SolverState
    trace: list[IterationRecord] = field(default_factory=list)
    status: str = "max_iters"

    def __iter__(self):
        return iter((self.state, self.trace, self.status))


def solve(problem: ProblemInstance, opts: SolverOptions, init=None, verify: bool = False) -> SolveResult:
    """Run the adaptive loop until the residual criterion or ``max_iters``.

    ``init`` is an optional ``(x0, y0, u0)`` triple (zeros by default). With
    ``verify=True`` every record also carries the three descent-inequality
    slacks for the chosen subroutine. Status is one of ``converged``,
    ``max_iters``, ``diverged``.
    """
    from .diagnostics import descent_slacks, kkt_residuals, should_stop

    select = _SELECTORS[opts.subroutine]
    x0, y0, u0 = (None, None, None) if init is None else init
    state = initial_state(problem, x0, y0, u0, opts.gamma0)
    trace: list[IterationRecord] = []
    status = "max_iters"
    for _ in range(opts.max_iters):
        t0 = time.perf_counter_ns()
        try:
            decision = select(state, problem, opts)
            nxt = advance(state, decision, problem, opts)
        except NumericsError:
            status = "diverged"
            break
        report = kkt_residuals(state, nxt, decision.gamma_next, problem)
        rec = IterationRecord(
            k=nxt.k,
            gamma=decision.gamma_next,
            active_term=decision.active_term,
            lamA=decision.diag["lamA"], lamB=decision.diag["lamB"],
            muA=decision.diag["muA"], muB=decision.diag["muB"],
            a=decision.diag["a"], b=decision.diag["b"],
            res2_w12=report.two_norm_w12, res2_w3=report.two_norm_w3,
            resinf_w12=report.inf_norm_w12, resinf_w3=report.inf_norm_w3,
        )
        if verify and decision.mode in ("s1", "s2"):
            slacks = descent_slacks(decision, state, opts.sigma, opts.epsilon, decision.mode)
            rec.slack_x, rec.slack_y, rec.slack_u = slacks["x"], slacks["y"], slacks["u"]
        rec.wall_ns = time.perf_counter_ns() - t0
        trace.append(rec)
        state = nxt
        if should_stop(report, opts.tol_two, opts.tol_inf):
            status = "converged"
            break
    return SolveResult(state=state, trace=trace, status=status)
