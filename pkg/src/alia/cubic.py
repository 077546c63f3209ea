"""Real roots of cubic polynomials, numerically stable near degeneracy.

``a3 x^3 + a2 x^2 + a1 x + a0`` is solved by the depressed-cubic discriminant
cases when the leading coefficient is healthy. When ``|a3|`` is tiny relative
to the other coefficients the closed forms lose precision, so the quadratic
``a2 x^2 + a1 x + a0`` is solved first and its roots are polished by Newton's
method on the full cubic; any remaining real root (there can be a large one
of magnitude about ``|a2/a3|``) is recovered from the deflated polynomial and
polished the same way.
"""

from __future__ import annotations

import math

from .errors import NumericsError

_DEGENERATE_RATIO = 1e-8
_POSITIVE_CUTOFF = 1e-15


def _eval(c3: float, c2: float, c1: float, c0: float, x: float) -> float:
    return ((c3 * x + c2) * x + c1) * x + c0


def _eval_deriv(c3: float, c2: float, c1: float, x: float) -> float:
    return (3.0 * c3 * x + 2.0 * c2) * x + c1


def _cbrt(x: float) -> float:
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def _real_quadratic_roots(b: float, c: float, d: float) -> list[float]:
    """Real roots of ``b x^2 + c x + d`` (stable form; [] for none)."""
    if b == 0.0:
        if c == 0.0:
            return []
        return [-d / c]
    disc = c * c - 4.0 * b * d
    if disc < 0.0:
        return []
    if disc == 0.0:
        return [-c / (2.0 * b)]
    sq = math.sqrt(disc)
    qq = -0.5 * (c + math.copysign(sq, c)) if c != 0.0 else 0.5 * sq
    r1 = qq / b
    r2 = d / qq
    return sorted((r1, r2))


def _deflate(coeffs: list[float], r: float) -> list[float]:
    """Synthetic division by ``(x - r)``; remainder discarded."""
    out = [coeffs[0]]
    for c in coeffs[1:-1]:
        out.append(c + r * out[-1])
    return out


def _newton(c3: float, c2: float, c1: float, c0: float, x0: float, scale: float) -> float:
    """Polish ``x0`` on the full cubic: Newton capped at 64 steps, then a
    sign-change bisection fallback when the residual target is missed."""
    tol = 1e-14 * scale
    x = x0
    fx = _eval(c3, c2, c1, c0, x)
    best_x, best_f = x, abs(fx)
    for _ in range(64):
        if abs(fx) <= tol:
            return x
        d = _eval_deriv(c3, c2, c1, x)
        if d == 0.0 or not math.isfinite(d):
            break
        x = x - fx / d
        if not math.isfinite(x):
            break
        fx = _eval(c3, c2, c1, c0, x)
        if abs(fx) < best_f:
            best_x, best_f = x, abs(fx)
    if best_f <= tol:
        return best_x
    bracket = _find_bracket(c3, c2, c1, c0, best_x)
    if bracket is None:
        return best_x
    lo, hi = bracket
    flo = _eval(c3, c2, c1, c0, lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = _eval(c3, c2, c1, c0, mid)
        if abs(fmid) < best_f:
            best_x, best_f = mid, abs(fmid)
        if fmid == 0.0:
            return mid
        if (flo < 0.0) == (fmid < 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(1.0, abs(lo)):
            break
    return best_x


def _find_bracket(c3, c2, c1, c0, x):
    h = 1e-9 * (1.0 + abs(x))
    for _ in range(80):
        lo, hi = x - h, x + h
        flo = _eval(c3, c2, c1, c0, lo)
        fhi = _eval(c3, c2, c1, c0, hi)
        if math.isfinite(flo) and math.isfinite(fhi) and (flo < 0.0) != (fhi < 0.0):
            return lo, hi
        h *= 2.0
    return None


def _merge(roots: list[float]) -> list[float]:
    roots = sorted(roots)
    out: list[float] = []
    for r in roots:
        if out and abs(r - out[-1]) <= 1e-10 * (1.0 + abs(r)):
            continue
        out.append(r)
    return out


def real_cubic_roots(a3: float, a2: float, a1: float, a0: float) -> list[float]:
    """All distinct real roots of ``a3 x^3 + a2 x^2 + a1 x + a0``, ascending.

    Degree gracefully degrades when leading coefficients vanish; a nonzero
    constant polynomial has no roots and returns ``[]``. An identically zero
    polynomial is rejected.
    """
    coeffs = (float(a3), float(a2), float(a1), float(a0))
    if not all(math.isfinite(c) for c in coeffs):
        raise NumericsError(f"cubic coefficients must be finite, got {coeffs}")
    a3, a2, a1, a0 = coeffs
    if a3 == a2 == a1 == 0.0:
        if a0 == 0.0:
            raise ValueError("identically zero polynomial has every point as a root")
        return []
    scale = max(abs(a3), abs(a2), abs(a1), abs(a0))

    if a3 == 0.0:
        return _merge(_real_quadratic_roots(a2, a1, a0))

    if abs(a3) < _DEGENERATE_RATIO * max(abs(a2), abs(a1), abs(a0)):
        near = [_newton(a3, a2, a1, a0, r, scale) for r in _real_quadratic_roots(a2, a1, a0)]
        near = _merge(near)
        if near:
            deflated = [a3, a2, a1, a0]
            for r in near:
                deflated = _deflate(deflated, r)
            if len(deflated) == 2:
                far = [-deflated[1] / deflated[0]]
            else:
                far = _real_quadratic_roots(*deflated)
            far = [_newton(a3, a2, a1, a0, r, scale) for r in far if math.isfinite(r)]
            return _merge(near + far)
        # quadratic part has no real root: exactly one real root remains,
        # inside the Cauchy bound, with a guaranteed sign change
        R = 1.0 + max(abs(a2), abs(a1), abs(a0)) / abs(a3)
        lo, hi = -R, R
        flo = _eval(a3, a2, a1, a0, lo)
        for _ in range(300):
            mid = 0.5 * (lo + hi)
            fmid = _eval(a3, a2, a1, a0, mid)
            if fmid == 0.0:
                lo = hi = mid
                break
            if (flo < 0.0) == (fmid < 0.0):
                lo, flo = mid, fmid
            else:
                hi = mid
            if hi - lo <= 1e-15 * max(1.0, abs(mid)):
                break
        return [_newton(a3, a2, a1, a0, 0.5 * (lo + hi), scale)]

    # healthy leading coefficient: discriminant cases on the depressed cubic
    P = (3.0 * a3 * a1 - a2 * a2) / (3.0 * a3 * a3)
    Q = (2.0 * a2**3 - 9.0 * a3 * a2 * a1 + 27.0 * a3 * a3 * a0) / (27.0 * a3**3)
    Delta = (Q / 2.0) ** 2 + (P / 3.0) ** 3
    shift = -a2 / (3.0 * a3)

    if a2 * a2 == 3.0 * a3 * a1 or Delta > 0.0:
        sq = math.sqrt(max(Delta, 0.0))
        u_arg = -Q / 2.0 + sq
        v_arg = -Q / 2.0 - sq
        # pair the cube roots through their product (-P/3) to avoid cancellation
        if abs(u_arg) >= abs(v_arg):
            t = _cbrt(u_arg)
            other = (-P / 3.0) / t if t != 0.0 else _cbrt(v_arg)
        else:
            t = _cbrt(v_arg)
            other = (-P / 3.0) / t if t != 0.0 else _cbrt(u_arg)
        roots = [shift + t + other]
    elif Delta == 0.0:
        c = _cbrt(-Q / 2.0)
        roots = [shift + 2.0 * c, shift - c]
    else:
        arg = (-Q / 2.0) / math.sqrt((-P / 3.0) ** 3)
        theta = math.acos(min(1.0, max(-1.0, arg)))
        rr = 2.0 * math.sqrt(-P / 3.0)
        roots = [shift + rr * math.cos((theta + 2.0 * math.pi * k) / 3.0) for k in (0, 1, 2)]

    return _merge([_newton(a3, a2, a1, a0, r, scale) for r in roots])


def smallest_positive_root(a3: float, a2: float, a1: float, a0: float) -> float:
    """Minimum real root strictly above 1e-15; ``+inf`` when none exists.

    The strict cutoff keeps sign-noise roots at zero from being treated as
    positive constraints.
    """
    positive = [r for r in real_cubic_roots(a3, a2, a1, a0) if r > _POSITIVE_CUTOFF]
    return min(positive) if positive else math.inf
