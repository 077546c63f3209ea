"""Call-counting wrappers for verifying per-iteration operation budgets.

``instrument(problem)`` returns an equivalent problem whose gradient, prox,
and operator applications bump a shared :class:`OpCounts`. The wrappers are
pure delegation, so instrumented runs compute bit-identical iterates.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .solver import ProblemInstance


@dataclass
class OpCounts:
    grad_f2: int = 0
    grad_g2: int = 0
    prox_f1: int = 0
    prox_g1: int = 0
    apply_A: int = 0
    adjoint_A: int = 0
    apply_B: int = 0
    adjoint_B: int = 0

    def snapshot(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @property
    def matvecs(self) -> int:
        return self.apply_A + self.adjoint_A + self.apply_B + self.adjoint_B

    @property
    def total_prox(self) -> int:
        return self.prox_f1 + self.prox_g1

    @property
    def total_grad(self) -> int:
        return self.grad_f2 + self.grad_g2


class CountingOp:
    def __init__(self, inner, counts: OpCounts, apply_field: str, adjoint_field: str):
        self._inner = inner
        self._counts = counts
        self._apply_field = apply_field
        self._adjoint_field = adjoint_field

    @property
    def rows(self):
        return self._inner.rows

    @property
    def cols(self):
        return self._inner.cols

    @property
    def shape(self):
        return self._inner.shape

    def apply(self, v):
        setattr(self._counts, self._apply_field, getattr(self._counts, self._apply_field) + 1)
        return self._inner.apply(v)

    def apply_adjoint(self, w):
        setattr(self._counts, self._adjoint_field, getattr(self._counts, self._adjoint_field) + 1)
        return self._inner.apply_adjoint(w)

    def to_dense(self) -> np.ndarray:
        return self._inner.to_dense()


class CountingSmooth:
    def __init__(self, inner, counts: OpCounts, grad_field: str):
        self._inner = inner
        self._counts = counts
        self._grad_field = grad_field

    @property
    def dim(self):
        return self._inner.dim

    def value(self, x):
        return self._inner.value(x)

    def grad(self, x):
        setattr(self._counts, self._grad_field, getattr(self._counts, self._grad_field) + 1)
        return self._inner.grad(x)


class CountingProx:
    def __init__(self, inner, counts: OpCounts, prox_field: str):
        self._inner = inner
        self._counts = counts
        self._prox_field = prox_field

    @property
    def dim(self):
        return self._inner.dim

    def value(self, x):
        return self._inner.value(x)

    def prox(self, v, alpha):
        setattr(self._counts, self._prox_field, getattr(self._counts, self._prox_field) + 1)
        return self._inner.prox(v, alpha)


def instrument(problem: ProblemInstance) -> tuple[ProblemInstance, OpCounts]:
    """Wrap every block and operator of ``problem`` with counting proxies."""
    counts = OpCounts()
    wrapped = ProblemInstance(
        f1=CountingProx(problem.f1, counts, "prox_f1"),
        f2=CountingSmooth(problem.f2, counts, "grad_f2"),
        g1=CountingProx(problem.g1, counts, "prox_g1"),
        g2=CountingSmooth(problem.g2, counts, "grad_g2"),
        A=CountingOp(problem.A, counts, "apply_A", "adjoint_A"),
        B=CountingOp(problem.B, counts, "apply_B", "adjoint_B"),
        c=problem.c,
    )
    return wrapped, counts


def instrument_three_term(problem3, counts: OpCounts | None = None):
    """Counting wrappers for a ``(f, g, h, A)`` three-term problem.

    ``f`` maps to the smooth-gradient counter, ``g`` to the x-block prox
    counter, ``h`` to the y-block prox counter, and ``A`` to the A-operator
    counters.
    """
    counts = counts or OpCounts()
    f, g, h, A = problem3
    wrapped = (
        CountingSmooth(f, counts, "grad_f2"),
        CountingProx(g, counts, "prox_f1"),
        CountingProx(h, counts, "prox_g1"),
        CountingOp(A, counts, "apply_A", "adjoint_A"),
    )
    return wrapped, counts
