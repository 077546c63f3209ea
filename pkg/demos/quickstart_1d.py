"""First contact: a one-dimensional splitting problem you can check by hand.

We minimize 0.5 x^2 subject to x = y (so the solution is x = y = 0 with dual
variable 0) and watch the adaptive stepsize machinery work. Every quantity in
the first iteration is exactly representable: the first stepsize comes out as
0.25 for the conservative subroutine and 0.5 for the golden-ratio one.
"""

import alia

problem = alia.ProblemInstance(
    f1=alia.ZeroProx(1),
    f2=alia.QuadraticSmooth([[1.0]]),   # 0.5 x^2
    g1=alia.ZeroProx(1),
    g2=alia.ZeroSmooth(1),
    A=alia.DenseOp([[1.0]]),
    B=alia.DenseOp([[-1.0]]),
    c=[0.0],
)
init = ([1.0], [0.0], [0.0])

for subroutine in ("s1", "s2"):
    opts = alia.SolverOptions(subroutine=subroutine)
    result = alia.solve(problem, opts, init=init)
    print(f"--- subroutine {subroutine} ---")
    print(f"status: {result.status} after {len(result.trace)} iterations")
    print(f"solution: x={result.state.x[0]:+.2e}  y={result.state.y[0]:+.2e}  u={result.state.u[0]:+.2e}")
    print("first stepsizes:", [round(rec.gamma, 6) for rec in result.trace[:8]])
    print("active cap per step:", [rec.active_term for rec in result.trace[:8]])
    print()

# the first iteration in full detail
opts = alia.SolverOptions(subroutine="s1")
state = alia.initial_state(problem, *init, gamma0=1.0)
decision = alia.select_step_s1(state, problem, opts)
nxt = alia.advance(state, decision, problem, opts)
print("hand-checkable first step (subroutine s1):")
print(f"  delta_u = {decision.delta_u[0]}   gamma_1 = {decision.gamma_next}")
print(f"  u1 = {nxt.u[0]}   x1 = {nxt.x[0]}   y1 = {nxt.y[0]}")
report = alia.kkt_residuals(state, nxt, decision.gamma_next, problem)
print(f"  residuals: w1 = {report.w1[0]}, w2 = {report.w2[0]}, w3 = {report.w3[0]}")
