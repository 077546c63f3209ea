"""Benchmark problem builders, LIBSVM text parsing, and seeded generators.

The dual regression/classification problems map onto the two-block template

    minimize f1(x) + f2(x) + g1(y) + g2(y)  subject to  A x + B y = c

with the feature matrix entering through the coupling operator. The
consensus builders reformulate the sparse-plus-low-rank unmixing objective
with 2, 3, or 4 variable copies. Everything random is seeded (see
:mod:`alia.rng`), and matrices flatten row-major throughout.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .blocks import (
    Box,
    Hyperplane,
    L1,
    L1NonNeg,
    LinearSmooth,
    LinfBall,
    NonNeg,
    ProxBlock,
    QuadraticProx,
    QuadraticSmooth,
    ScaledSumSmooth,
    SeparableSum,
    SmoothBlock,
    WeightedNuclear,
    ZeroProx,
    ZeroSmooth,
    jacobi_svd,
)
from .errors import ConfigError, DimensionError, ParseError
from .linops import (
    BlockDiagOp,
    DenseOp,
    IdentityOp,
    LinOp,
    RowVectorOp,
    ScaledOp,
    VStackOp,
    ZeroOp,
)
from .solver import ProblemInstance


# ---------------------------------------------------------------------------
# datasets


@dataclass(frozen=True)
class Dataset:
    """Dense feature matrix with one label per row."""

    features: np.ndarray
    labels: np.ndarray
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "features", np.asarray(self.features, dtype=float))
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=float).ravel())
        if self.features.ndim != 2:
            raise DimensionError("features must be a 2-d matrix")
        if self.labels.shape[0] != self.features.shape[0]:
            raise DimensionError(
                f"{self.labels.shape[0]} labels for {self.features.shape[0]} feature rows"
            )
        if not np.all(np.isfinite(self.features)) or not np.all(np.isfinite(self.labels)):
            raise ValueError("dataset contains non-finite entries")


def parse_libsvm(text) -> Dataset:
    """Parse `label idx:val ...` sparse text into a dense :class:`Dataset`.

    Indices are 1-based and must be strictly ascending within a line; missing
    indices densify to zero and the feature count is the largest index seen
    anywhere. ``#`` starts a comment; blank lines are skipped. Errors carry
    the 1-based line number.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    labels: list[float] = []
    rows: list[list[tuple[int, float]]] = []
    width = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise ParseError(f"line {lineno}: bad label {tokens[0]!r}") from None
        pairs: list[tuple[int, float]] = []
        last = 0
        for token in tokens[1:]:
            idx_text, sep, val_text = token.partition(":")
            if not sep:
                raise ParseError(f"line {lineno}: malformed token {token!r}")
            try:
                idx = int(idx_text)
                val = float(val_text)
            except ValueError:
                raise ParseError(f"line {lineno}: malformed token {token!r}") from None
            if idx <= last:
                raise ParseError(
                    f"line {lineno}: indices must be 1-based and ascending, got {idx} after {last}"
                )
            last = idx
            pairs.append((idx, val))
        width = max(width, last)
        labels.append(label)
        rows.append(pairs)
    features = np.zeros((len(rows), width))
    for i, pairs in enumerate(rows):
        for idx, val in pairs:
            features[i, idx - 1] = val
    return Dataset(features=features, labels=np.asarray(labels), source="libsvm")


def format_libsvm(data: Dataset) -> str:
    """Canonical LIBSVM text for ``data``: zeros are dropped, except that the
    widest column is pinned on the first line so a re-parse recovers the
    exact dense shape."""
    m, n = data.features.shape
    lines = []
    column_seen = False
    for i in range(m):
        parts = [format(data.labels[i], ".17g")]
        for j in range(n):
            v = data.features[i, j]
            if v != 0.0:
                parts.append(f"{j + 1}:{format(v, '.17g')}")
                if j == n - 1:
                    column_seen = True
        lines.append(" ".join(parts))
    if n > 0 and m > 0 and not column_seen:
        lines[0] = lines[0] + f" {n}:0"
    return "\n".join(lines) + ("\n" if lines else "")


def synth_dataset(seed: int, m: int, n: int, kind: str = "regression") -> Dataset:
    """Seeded dense dataset: Gaussian features, linear-model labels.

    ``kind="classification"`` thresholds the response to labels in {-1, +1}.
    """
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    gen = rng.generator(seed)
    X = rng.normal(gen, (m, n)) / math.sqrt(n)
    w0 = rng.normal(gen, n)
    noise = rng.normal(gen, m)
    response = X @ w0 + 0.1 * noise
    if kind == "regression":
        labels = response
    elif kind == "classification":
        labels = np.where(response >= 0.0, 1.0, -1.0)
    else:
        raise ValueError(f"unknown dataset kind {kind!r}")
    return Dataset(features=X, labels=labels, source=f"synthetic:{seed}")


# ---------------------------------------------------------------------------
# dual problem builders


def build_dual_lasso(data: Dataset, lam: float) -> ProblemInstance:
    """Dual lasso: ``min 1/4 ||x||^2 - b^T x  s.t.  ||A^T x||_inf <= lam``.

    The x-block objective is the quadratic with matrix ``I/2`` (so its value
    is ``1/4 ||x||^2 - b^T x`` and its gradient ``x/2 - b``); the constraint
    becomes ``A^T x - y = 0`` with the max-norm ball indicator on ``y``.
    """
    if lam <= 0:
        raise ValueError("lam must be > 0")
    m, n = data.features.shape
    return ProblemInstance(
        f1=ZeroProx(m),
        f2=QuadraticSmooth(0.5 * np.eye(m), -data.labels),
        g1=LinfBall(n, lam),
        g2=ZeroSmooth(n),
        A=DenseOp(data.features.T),
        B=ScaledOp(-1.0, IdentityOp(n)),
        c=np.zeros(n),
    )


def build_dual_lad(data: Dataset, lam: float) -> ProblemInstance:
    """Dual least absolute deviation: ``min b^T x`` over the unit max-norm box
    intersected with ``||A^T x||_inf <= lam``."""
    if lam <= 0:
        raise ValueError("lam must be > 0")
    m, n = data.features.shape
    return ProblemInstance(
        f1=LinfBall(m, 1.0),
        f2=LinearSmooth(data.labels),
        g1=LinfBall(n, lam),
        g2=ZeroSmooth(n),
        A=DenseOp(data.features.T),
        B=ScaledOp(-1.0, IdentityOp(n)),
        c=np.zeros(n),
    )


def build_dual_svm(data: Dataset, C: float) -> ProblemInstance:
    """Dual linear-kernel SVM: ``min 1/2 x^T Q x - 1^T x`` over ``[0, C]^m``
    with the scalar coupling ``<labels, x> = 0``.

    ``Q = diag(labels) (F F^T) diag(labels)``. The scalar constraint is
    carried by a 1-row coupling operator with a singleton box on the 1-d
    y-block.
    """
    if C <= 0:
        raise ValueError("C must be > 0")
    labels = data.labels
    if not np.all(np.isin(labels, (-1.0, 1.0))):
        raise ValueError("dual SVM requires labels in {-1, +1}")
    m = data.features.shape[0]
    Q = (data.features @ data.features.T) * np.outer(labels, labels)
    Q = 0.5 * (Q + Q.T)
    return ProblemInstance(
        f1=Box(0.0, C, dim=m),
        f2=QuadraticSmooth(Q, -np.ones(m)),
        g1=Box(0.0, 0.0, dim=1),
        g2=ZeroSmooth(1),
        A=RowVectorOp(labels),
        B=ScaledOp(-1.0, IdentityOp(1)),
        c=np.zeros(1),
    )


# ---------------------------------------------------------------------------
# consensus reformulations of the unmixing objective


@dataclass(frozen=True)
class BlockSpec:
    """Consensus layout: number of variable copies, shapes, and weights."""

    n_blocks: int
    L: int
    N: int
    K: int
    gamma: float
    tau: float
    a_weights: np.ndarray
    b_weights: np.ndarray

    def __post_init__(self):
        if self.n_blocks not in (2, 3, 4):
            raise ValueError("n_blocks must be 2, 3, or 4")
        if self.gamma < 0 or self.tau < 0:
            raise ValueError("gamma and tau must be >= 0")
        object.__setattr__(self, "a_weights", np.asarray(self.a_weights, dtype=float))
        object.__setattr__(self, "b_weights", np.asarray(self.b_weights, dtype=float).ravel())
        if self.a_weights.shape != (self.N, self.K):
            raise DimensionError(f"a_weights must be {self.N}x{self.K}")
        if self.b_weights.shape[0] != min(self.N, self.K):
            raise DimensionError(f"b_weights must have length {min(self.N, self.K)}")
        if np.any(self.a_weights < 0) or np.any(self.b_weights < 0):
            raise ValueError("weights must be >= 0")

    @property
    def convex_regime(self) -> bool:
        """True when the nuclear weights are nonincreasing."""
        return bool(np.all(np.diff(self.b_weights) <= 0))


def synth_unmixing(seed: int, L: int, N: int, K: int, snr_db: float = 30.0):
    """Seeded synthetic unmixing data: nonnegative dictionary, simplex
    abundance columns, and observations with Gaussian noise at ``snr_db``.

    Returns ``(Phi, W0, Y, a_weights, b_weights)``. The sparsity weights are
    inverse least-squares magnitudes ``1 / (max(w_ls, 0) + 1e-16)`` and the
    nuclear weights are constant at the mean inverse singular value of the
    least-squares estimate, which keeps that term convex. ``snr_db=inf``
    yields noiseless observations.
    """
    if not (L >= N >= 1 and K >= 1):
        raise ValueError("need L >= N >= 1 and K >= 1")
    gen = rng.generator(seed)
    Phi = gen.random((L, N))
    W0 = np.column_stack([rng.simplex(gen, N) for _ in range(K)])
    Y0 = Phi @ W0
    if math.isinf(snr_db):
        Y = Y0.copy()
    else:
        noise = rng.normal(gen, (L, K))
        target = np.linalg.norm(Y0) / (10.0 ** (snr_db / 20.0))
        nn = np.linalg.norm(noise)
        Y = Y0 + (target / nn) * noise if nn > 0 else Y0.copy()
    eps = 1e-16
    W_ls = np.linalg.solve(Phi.T @ Phi, Phi.T @ Y)
    a_weights = 1.0 / (np.maximum(W_ls, 0.0) + eps)
    _, svals, _ = jacobi_svd(W_ls)
    b = float(np.mean(1.0 / (svals + eps)))
    b_weights = np.full(min(N, K), b)
    return Phi, W0, Y, a_weights, b_weights


def build_consensus(spec: BlockSpec, data) -> ProblemInstance:
    """Map a consensus reformulation onto the two-block template.

    ``x`` stacks the variable copies (row-major flattened N x K matrices),
    ``y`` is the consensus variable, and the constraint is ``x_i = y`` for
    every copy via a block-diagonal of identities against a vertical stack
    of negated identities.

    With 2 blocks the data term stays smooth and the sparse+nonnegative term
    is the x prox; with 3 and 4 blocks every term is accessed through its
    prox (the data term via a regularized linear solve), and with 4 blocks
    the low-rank term moves into the x stack, leaving a free consensus
    block.
    """
    Phi, _, Y, a_weights, b_weights = data
    N, K = spec.N, spec.K
    if Phi.shape != (spec.L, N) or Y.shape != (spec.L, K):
        raise DimensionError("data shapes disagree with the block layout")
    nk = N * K
    Q_data = np.kron(Phi.T @ Phi, np.eye(K))
    q_data = -(Phi.T @ Y).reshape(nk)
    sparse_weights = (spec.gamma * spec.a_weights).reshape(nk)
    sparse_block = L1NonNeg(sparse_weights)
    if spec.tau > 0:
        lowrank_block: ProxBlock = WeightedNuclear(spec.tau * spec.b_weights, (N, K))
    else:
        lowrank_block = ZeroProx(nk)

    def copies(n):
        A = BlockDiagOp([IdentityOp(nk) for _ in range(n)])
        B = VStackOp([ScaledOp(-1.0, IdentityOp(nk)) for _ in range(n)])
        return A, B, np.zeros(n * nk)

    if spec.n_blocks == 2:
        A, B, c = copies(1)
        return ProblemInstance(
            f1=sparse_block,
            f2=QuadraticSmooth(Q_data, q_data),
            g1=lowrank_block,
            g2=ZeroSmooth(nk),
            A=A, B=B, c=c,
        )
    if spec.n_blocks == 3:
        A, B, c = copies(2)
        return ProblemInstance(
            f1=SeparableSum([((0, nk), QuadraticProx(Q_data, q_data)), ((nk, 2 * nk), sparse_block)]),
            f2=ZeroSmooth(2 * nk),
            g1=lowrank_block,
            g2=ZeroSmooth(nk),
            A=A, B=B, c=c,
        )
    A, B, c = copies(3)
    return ProblemInstance(
        f1=SeparableSum(
            [
                ((0, nk), QuadraticProx(Q_data, q_data)),
                ((nk, 2 * nk), sparse_block),
                ((2 * nk, 3 * nk), lowrank_block),
            ]
        ),
        f2=ZeroSmooth(3 * nk),
        g1=ZeroProx(nk),
        g2=ZeroSmooth(nk),
        A=A, B=B, c=c,
    )


def consensus_sparse_copy(spec: BlockSpec, x) -> np.ndarray:
    """Slice of the stacked primal ``x`` holding the sparse-penalty copy.

    That copy is produced by the one-sided threshold, so it is exactly
    nonnegative with exact zeros where the weights are large; it is the
    stable place to evaluate :func:`consensus_objective` (the inverse-
    magnitude weight recipe makes some weights enormous, and tiny residues
    on the other copies would swamp the value).
    """
    x = np.asarray(x, dtype=float).ravel()
    nk = spec.N * spec.K
    return x[:nk] if spec.n_blocks == 2 else x[nk : 2 * nk]


def consensus_objective(spec: BlockSpec, data, W) -> float:
    """Collapsed objective value at a single matrix ``W`` (row-major vector)."""
    Phi, _, Y, a_weights, b_weights = data
    nk = spec.N * spec.K
    W = np.asarray(W, dtype=float).reshape(spec.N, spec.K)
    if np.min(W) < -1e-9:
        return math.inf
    data_term = 0.5 * float(np.linalg.norm(Y - Phi @ W) ** 2)
    sparse_term = spec.gamma * float(np.sum(spec.a_weights * np.abs(W)))
    _, svals, _ = jacobi_svd(W)
    lowrank_term = spec.tau * float(spec.b_weights @ svals)
    return data_term + sparse_term + lowrank_term


# ---------------------------------------------------------------------------
# random instances with exactly known saddle points


def build_random_saddle(seed: int, p: int, q: int, r: int, nonsmooth: bool = True):
    """Random convex instance whose saddle point is known by construction.

    Draws operators, quadratic curvatures, and a target ``(x*, y*, u*)``,
    then solves the stationarity conditions for the linear terms so the
    target is exactly optimal. With ``nonsmooth=True`` half of the optimal
    entries are zeroed and weighted l1 blocks supply the kinks (a zero
    subgradient certifies optimality there). Returns ``(problem, saddle)``.
    """
    gen = rng.generator(seed)
    A = DenseOp(rng.normal(gen, (r, p)) / math.sqrt(max(p, 1)))
    B = DenseOp(rng.normal(gen, (r, q)) / math.sqrt(max(q, 1)))
    Mx = rng.normal(gen, (p, p))
    My = rng.normal(gen, (q, q))
    Qf = (Mx.T @ Mx) / p
    Qg = (My.T @ My) / q
    xs = rng.normal(gen, p)
    ys = rng.normal(gen, q)
    us = rng.normal(gen, r)

    if nonsmooth:
        xs[gen.random(p) < 0.5] = 0.0
        ys[gen.random(q) < 0.5] = 0.0
        wf = 0.1 + gen.random(p)
        wg = 0.1 + gen.random(q)
        f1, g1 = L1(wf), L1(wg)
        sub_x = wf * np.sign(xs)
        sub_y = wg * np.sign(ys)
    else:
        f1, g1 = ZeroProx(p), ZeroProx(q)
        sub_x = np.zeros(p)
        sub_y = np.zeros(q)

    qf = -(Qf @ xs) - A.apply_adjoint(us) - sub_x
    qg = -(Qg @ ys) - B.apply_adjoint(us) - sub_y
    problem = ProblemInstance(
        f1=f1,
        f2=QuadraticSmooth(Qf, qf),
        g1=g1,
        g2=QuadraticSmooth(Qg, qg),
        A=A,
        B=B,
        c=A.apply(xs) + B.apply(ys),
    )
    return problem, (xs, ys, us)


# ---------------------------------------------------------------------------
# problem-instance (de)serialization for custom files


def _linop_from_json(obj, path: str) -> LinOp:
    kind = obj.get("kind")
    if kind == "dense":
        return DenseOp(np.asarray(obj["matrix"], dtype=float))
    if kind == "identity":
        return IdentityOp(int(obj["dim"]))
    if kind == "zero":
        return ZeroOp(int(obj["rows"]), int(obj["cols"]))
    if kind == "scaled":
        return ScaledOp(float(obj["alpha"]), _linop_from_json(obj["inner"], path + ".inner"))
    if kind == "vstack":
        return VStackOp([_linop_from_json(b, path + ".blocks") for b in obj["blocks"]])
    if kind == "block_diag":
        return BlockDiagOp([_linop_from_json(b, path + ".blocks") for b in obj["blocks"]])
    if kind == "row_vector":
        return RowVectorOp(np.asarray(obj["vector"], dtype=float))
    raise ConfigError(f"{path}: unknown operator kind {kind!r}")


def _smooth_from_json(obj, path: str) -> SmoothBlock:
    kind = obj.get("kind")
    if kind == "zero":
        return ZeroSmooth(int(obj["dim"]))
    if kind == "linear":
        return LinearSmooth(np.asarray(obj["coeff"], dtype=float))
    if kind == "quadratic":
        return QuadraticSmooth(np.asarray(obj["Q"], dtype=float), obj.get("q"))
    if kind == "scaled_sum":
        return ScaledSumSmooth(
            [(float(t["coeff"]), _smooth_from_json(t["block"], path + ".terms")) for t in obj["terms"]]
        )
    raise ConfigError(f"{path}: unknown smooth block kind {kind!r}")


def _prox_from_json(obj, path: str) -> ProxBlock:
    kind = obj.get("kind")
    if kind == "zero":
        return ZeroProx(int(obj["dim"]))
    if kind == "l1":
        return L1(np.asarray(obj["weights"], dtype=float))
    if kind == "l1_nonneg":
        return L1NonNeg(np.asarray(obj["weights"], dtype=float))
    if kind == "box":
        return Box(np.asarray(obj["lo"], dtype=float), np.asarray(obj["hi"], dtype=float))
    if kind == "linf_ball":
        return LinfBall(int(obj["dim"]), float(obj["radius"]))
    if kind == "nonneg":
        return NonNeg(int(obj["dim"]))
    if kind == "hyperplane":
        return Hyperplane(np.asarray(obj["normal"], dtype=float))
    if kind == "weighted_nuclear":
        return WeightedNuclear(np.asarray(obj["weights"], dtype=float), tuple(obj["shape"]))
    if kind == "quadratic":
        return QuadraticProx(np.asarray(obj["Q"], dtype=float), obj.get("q"))
    if kind == "separable_sum":
        return SeparableSum(
            [
                ((int(ch["start"]), int(ch["stop"])), _prox_from_json(ch["block"], path + ".children"))
                for ch in obj["children"]
            ]
        )
    raise ConfigError(f"{path}: unknown prox block kind {kind!r}")


def problem_from_json(obj) -> ProblemInstance:
    """Build a :class:`ProblemInstance` from its JSON description."""
    try:
        return ProblemInstance(
            f1=_prox_from_json(obj["f1"], "f1"),
            f2=_smooth_from_json(obj["f2"], "f2"),
            g1=_prox_from_json(obj["g1"], "g1"),
            g2=_smooth_from_json(obj["g2"], "g2"),
            A=_linop_from_json(obj["A"], "A"),
            B=_linop_from_json(obj["B"], "B"),
            c=np.asarray(obj["c"], dtype=float),
        )
    except KeyError as exc:
        raise ConfigError(f"problem file is missing key {exc.args[0]!r}") from None


def load_problem_file(path) -> ProblemInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return problem_from_json(json.load(fh))
