import math

import numpy as np
import pytest

import alia
from alia.errors import NumericsError

from helpers import bisection_roots, cubic_eval


def test_single_real_root():
    assert alia.real_cubic_roots(1.0, 0.0, 0.0, -1.0) == pytest.approx([1.0], abs=1e-14)


def test_double_root_case():
    # (x - 1)^2 (x + 2): the repeated root is reported once
    roots = alia.real_cubic_roots(1.0, 0.0, -3.0, 2.0)
    assert roots == pytest.approx([-2.0, 1.0], abs=1e-12)


def test_three_distinct_roots():
    roots = alia.real_cubic_roots(1.0, -6.0, 11.0, -6.0)
    assert roots == pytest.approx([1.0, 2.0, 3.0], abs=1e-12)


def test_smallest_positive_root_examples():
    assert alia.smallest_positive_root(1.0, -6.0, 11.0, -6.0) == pytest.approx(1.0, abs=1e-12)
    assert alia.smallest_positive_root(0.0, 0.0, 0.0, -0.5) == math.inf


def test_smallest_positive_root_with_only_negative_root():
    # bisection confirms the single real root is near -0.6823 (negative)
    oracle = bisection_roots((1.0, 0.0, 1.0, 1.0), lo=-10, hi=10)
    assert len(oracle) == 1 and oracle[0] == pytest.approx(-0.6823278, abs=1e-6)
    assert alia.smallest_positive_root(1.0, 0.0, 1.0, 1.0) == math.inf


def test_degenerate_degrees():
    assert alia.real_cubic_roots(0.0, 1.0, 0.0, -4.0) == pytest.approx([-2.0, 2.0], abs=1e-12)
    assert alia.real_cubic_roots(0.0, 0.0, 2.0, -1.0) == pytest.approx([0.5], abs=1e-15)
    assert alia.real_cubic_roots(0.0, 0.0, 0.0, 3.0) == []
    with pytest.raises(ValueError, match="zero polynomial"):
        alia.real_cubic_roots(0.0, 0.0, 0.0, 0.0)
    with pytest.raises(NumericsError, match="finite"):
        alia.real_cubic_roots(math.nan, 1.0, 1.0, 1.0)


def test_near_degenerate_leading_coefficient_keeps_near_roots_accurate():
    # tiny a3 perturbs the quadratic x^2 - 3x + 2 = (x-1)(x-2)
    roots = alia.real_cubic_roots(1e-12, 1.0, -3.0, 2.0)
    near = [r for r in roots if abs(r) < 10]
    assert near == pytest.approx([1.0, 2.0], abs=1e-9)
    # the third root sits near -a2/a3 = -1e12
    far = [r for r in roots if abs(r) >= 10]
    assert len(far) == 1 and far[0] == pytest.approx(-1e12, rel=1e-6)


def test_seeded_quadruples_match_bisection_oracle():
    gen = np.random.Generator(np.random.PCG64(77))
    classes = [0.0, 1e-15, 1e-9, 1.0]
    checked_roots = 0
    for trial in range(250):
        scale = classes[trial % len(classes)]
        sign = 1.0 if gen.random() < 0.5 else -1.0
        a3 = sign * scale
        a2, a1, a0 = (float(v) for v in gen.standard_normal(3))
        coeffs = (a3, a2, a1, a0)
        mine = alia.real_cubic_roots(*coeffs)
        maxc = max(abs(c) for c in coeffs)
        for r in mine:
            if abs(r) <= 1e3:
                assert abs(cubic_eval(coeffs, r)) <= 1e-10 * maxc
        oracle = bisection_roots(coeffs)
        for target in oracle:
            checked_roots += 1
            assert any(abs(r - target) <= 1e-9 * (1.0 + abs(target)) for r in mine), (
                coeffs,
                target,
                mine,
            )
    assert checked_roots > 200
