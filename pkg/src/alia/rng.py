"""Seeded randomness helpers with pinned, documented algorithms.

Everything random in this package flows through a ``numpy.random.Generator``
backed by PCG64 and a caller-supplied integer seed, so any quantity derived
from a seed is reproducible byte-for-byte across runs and platforms.

Gaussian variates are produced by the classic Box-Muller transform applied to
``Generator.random()`` uniforms (rather than numpy's ziggurat sampler) so the
exact sequence is spelled out here: for uniform pairs (u1, u2) with u1 > 0,

    z = sqrt(-2 log u1) * cos(2 pi u2).

Simplex points use exponential spacing: normalize i.i.d. Exp(1) draws, where
each exponential is -log(u) for a uniform u > 0.
"""

import numpy as np

_TINY = np.finfo(float).tiny


def generator(seed: int) -> np.random.Generator:
    """PCG64 generator for ``seed``; the single entry point for randomness."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def normal(gen: np.random.Generator, size) -> np.ndarray:
    """Standard normal draws via Box-Muller on ``gen``'s uniform stream."""
    n = int(np.prod(size)) if not np.isscalar(size) else int(size)
    pairs = (n + 1) // 2
    u1 = np.maximum(gen.random(pairs), _TINY)
    u2 = gen.random(pairs)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)])[:n]
    return z.reshape(size) if not np.isscalar(size) else z


def simplex(gen: np.random.Generator, n: int) -> np.ndarray:
    """Uniform point on the probability simplex via normalized exponentials."""
    e = -np.log(np.maximum(gen.random(n), _TINY))
    return e / e.sum()


def unit_vector(gen: np.random.Generator, n: int) -> np.ndarray:
    """Random unit vector (Box-Muller normals, normalized)."""
    v = normal(gen, n)
    nrm = float(np.linalg.norm(v))
    if nrm == 0.0:
        v = np.ones(n)
        nrm = float(np.linalg.norm(v))
    return v / nrm
