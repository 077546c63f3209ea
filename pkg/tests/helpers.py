"""Shared fixtures and independent oracles used across the test modules."""

import numpy as np

import alia


def one_d_instance():
    """min 0.5 x^2 s.t. x - y = 0; saddle (0, 0, 0), every step hand-checkable."""
    return alia.ProblemInstance(
        f1=alia.ZeroProx(1),
        f2=alia.QuadraticSmooth([[1.0]]),
        g1=alia.ZeroProx(1),
        g2=alia.ZeroSmooth(1),
        A=alia.DenseOp([[1.0]]),
        B=alia.DenseOp([[-1.0]]),
        c=[0.0],
    )


ONE_D_INIT = ([1.0], [0.0], [0.0])


def iterate_states(problem, opts, init=None, iters=50):
    """Manual solver loop collecting (state, decision, next_state) triples."""
    select = {
        "s1": alia.select_step_s1,
        "s2": alia.select_step_s2,
        "fixed": alia.select_step_fixed,
    }[opts.subroutine]
    x0, y0, u0 = (None, None, None) if init is None else init
    state = alia.initial_state(problem, x0, y0, u0, opts.gamma0)
    out = []
    for _ in range(iters):
        decision = select(state, problem, opts)
        nxt = alia.advance(state, decision, problem, opts)
        out.append((state, decision, nxt))
        state = nxt
    return out


def cubic_eval(coeffs, x):
    c3, c2, c1, c0 = coeffs
    return ((c3 * x + c2) * x + c1) * x + c0


def bisection_roots(coeffs, lo=-1e6, hi=1e6, cells=6000):
    """Sign-change bisection oracle: every root with a sign change on the grid."""
    # mixed log/linear grid so roots near zero are not skipped
    mags = np.concatenate([[0.0], np.logspace(-9, np.log10(hi), cells // 2)])
    grid = np.unique(np.concatenate([-mags[::-1], mags]))
    grid = grid[(grid >= lo) & (grid <= hi)]
    vals = cubic_eval(coeffs, grid)
    roots = []
    for i in range(len(grid) - 1):
        f0, f1 = vals[i], vals[i + 1]
        if f0 == 0.0:
            roots.append(float(grid[i]))
            continue
        if (f0 < 0.0) == (f1 < 0.0):
            continue
        a, b, fa = grid[i], grid[i + 1], f0
        for _ in range(200):
            mid = 0.5 * (a + b)
            fm = cubic_eval(coeffs, mid)
            if fm == 0.0:
                a = b = mid
                break
            if (fa < 0.0) == (fm < 0.0):
                a, fa = mid, fm
            else:
                b = mid
            if b - a <= 1e-12 * (1.0 + abs(mid)):
                break
        roots.append(float(0.5 * (a + b)))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    dedup = []
    for r in sorted(roots):
        if dedup and abs(r - dedup[-1]) <= 1e-9 * (1.0 + abs(r)):
            continue
        dedup.append(r)
    return dedup


def random_linop(gen, kind, rows, cols):
    """One operator of the requested kind with the requested ambient shape."""
    if kind == "dense":
        return alia.DenseOp(gen.standard_normal((rows, cols)))
    if kind == "identity":
        return alia.IdentityOp(cols)
    if kind == "zero":
        return alia.ZeroOp(rows, cols)
    if kind == "scaled":
        return alia.ScaledOp(float(gen.standard_normal()), alia.DenseOp(gen.standard_normal((rows, cols))))
    if kind == "vstack":
        r1 = max(1, rows // 2)
        blocks = [alia.DenseOp(gen.standard_normal((r1, cols)))]
        if rows - r1 > 0:
            blocks.append(alia.DenseOp(gen.standard_normal((rows - r1, cols))))
        return alia.VStackOp(blocks)
    if kind == "block_diag":
        r1, c1 = max(1, rows // 2), max(1, cols // 2)
        if rows - r1 > 0 and cols - c1 > 0:
            blocks = [
                alia.DenseOp(gen.standard_normal((r1, c1))),
                alia.DenseOp(gen.standard_normal((rows - r1, cols - c1))),
            ]
        else:
            blocks = [alia.DenseOp(gen.standard_normal((rows, cols)))]
        return alia.BlockDiagOp(blocks)
    if kind == "row_vector":
        return alia.RowVectorOp(gen.standard_normal(cols))
    raise ValueError(kind)
