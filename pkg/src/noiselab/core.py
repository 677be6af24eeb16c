"""Finite measured state spaces and dense function tables.

Substrate for every discrete model in the package: a probability measure
over an enumerated state list (optionally the product of per-coordinate
factors), plus the handful of functionals everything else is written in
terms of -- L^r norms, variance, entropy, and conditional expectation
over a coordinate subset.

All operations are pure functions on immutable inputs; nothing here
mutates shared state.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

#: exactness tolerance on finite spaces (double precision arithmetic)
EXACT_TOL = 1e-12


class DegenerateModelError(RuntimeError):
    """Raised when a chain is reducible or a constant otherwise undefined."""


class FiniteProductSpace:
    """A finite probability space, optionally a product of factors.

    Parameters
    ----------
    weights : array-like
        Strictly positive state probabilities summing to 1 (within 1e-12).
    states : sequence, optional
        Hashable state labels aligned with ``weights``; defaults to indices.
    factors : sequence of 1-d arrays, optional
        Per-factor probability vectors.  When given, states are the
        row-major (C-order) product of the factor index ranges: the last
        factor varies fastest, and each state's weight must equal the
        product of its factor weights.
    """

    def __init__(self, weights, states=None, factors=None):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-d array")
        if np.any(w <= 0.0):
            raise ValueError("weights must be strictly positive")
        if abs(float(w.sum()) - 1.0) > EXACT_TOL:
            raise ValueError(f"weights sum to {w.sum()!r}, expected 1 within {EXACT_TOL}")
        self.weights = w
        self.weights.setflags(write=False)

        if factors is not None:
            factors = tuple(np.asarray(fw, dtype=float) for fw in factors)
            sizes = tuple(fw.size for fw in factors)
            if int(np.prod(sizes)) != w.size:
                raise ValueError("product of factor sizes must equal the state count")
            prod = factors[0]
            for fw in factors[1:]:
                prod = np.multiply.outer(prod, fw)
            if np.max(np.abs(prod.reshape(-1) - w)) > EXACT_TOL:
                raise ValueError("state weights do not factor over the given factors")
            for fw in factors:
                fw.setflags(write=False)
        self.factors = factors

        if states is None:
            if factors is not None:
                states = tuple(itertools.product(*[range(fw.size) for fw in factors]))
            else:
                states = tuple(range(w.size))
        else:
            states = tuple(states)
            if len(states) != w.size:
                raise ValueError("states and weights must have equal length")
        self.states = states

    # -- derived shape info ------------------------------------------------
    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def factor_sizes(self) -> tuple[int, ...]:
        if self.factors is None:
            raise ValueError("space has no factor structure")
        return tuple(fw.size for fw in self.factors)

    @classmethod
    def product(cls, factor_weights: Sequence, labels=None) -> "FiniteProductSpace":
        """Build the row-major product of 1-d probability vectors."""
        factors = [np.asarray(fw, dtype=float) for fw in factor_weights]
        prod = factors[0]
        for fw in factors[1:]:
            prod = np.multiply.outer(prod, fw)
        if labels is not None:
            states = tuple(itertools.product(*labels))
        else:
            states = None
        return cls(prod.reshape(-1), states=states, factors=factors)

    @classmethod
    def uniform(cls, size: int, states=None) -> "FiniteProductSpace":
        return cls(np.full(size, 1.0 / size), states=states)

    def __repr__(self):
        nf = "-" if self.factors is None else len(self.factors)
        return f"FiniteProductSpace(size={self.size}, factors={nf})"


@dataclass(frozen=True)
class TableFunction:
    """A real-valued function stored as a dense table over a finite space."""

    space: FiniteProductSpace
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.space.size,):
            raise ValueError(f"values shape {v.shape} does not match state count {self.space.size}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def mean(f: TableFunction) -> float:
    return float(f.space.weights @ f.values)


def lp_norm(f: TableFunction, r) -> float:
    """The L^r(mu) norm; ``r`` may be any real >= 1 or ``math.inf``."""
    if isinstance(r, str):
        if r.lower() in ("inf", "infinity"):
            r = math.inf
        else:
            raise ValueError(f"unrecognized norm order {r!r}")
    r = float(r)
    if math.isnan(r) or r < 1.0:
        raise ValueError(f"norm order must be >= 1, got {r}")
    a = np.abs(f.values)
    if math.isinf(r):
        return float(a.max())
    if r == 1.0:
        return float(f.space.weights @ a)
    return float((f.space.weights @ a**r) ** (1.0 / r))


def variance(f: TableFunction) -> float:
    w, v = f.space.weights, f.values
    m = float(w @ v)
    return max(float(w @ v**2) - m * m, 0.0)


def covariance(f: TableFunction, g: TableFunction) -> float:
    if f.space is not g.space and f.space.size != g.space.size:
        raise ValueError("covariance requires functions on the same space")
    w = f.space.weights
    return float(w @ (f.values * g.values)) - float(w @ f.values) * float(w @ g.values)


def entropy(f: TableFunction) -> float:
    """Ent_mu(f) = int f log f - (int f) log(int f), with 0 log 0 := 0."""
    v = f.values
    if np.any(v < 0.0):
        raise ValueError("entropy requires a pointwise nonnegative function")
    w = f.space.weights
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(v > 0.0, v * np.log(v), 0.0)
    s = float(w @ v)
    if s <= 0.0:
        return 0.0
    return float(w @ t) - s * math.log(s)


def _as_axes(f: TableFunction) -> np.ndarray:
    return f.values.reshape(f.space.factor_sizes)


def conditional_expectation(f: TableFunction, coords: Iterable[int]) -> TableFunction:
    """Average f over all coordinates *not* in ``coords``.

    ``coords`` uses 1-based coordinate indices matching the factor order.
    The result is a full table that depends only on the retained
    coordinates and has the same mean as ``f``.
    """
    space = f.space
    if space.factors is None:
        raise ValueError("conditional expectation requires a product space")
    n = len(space.factors)
    keep = set()
    for i in coords:
        if not 1 <= int(i) <= n:
            raise ValueError(f"coordinate {i} outside 1..{n}")
        keep.add(int(i))

    arr = _as_axes(f)
    for axis in range(n):
        if (axis + 1) in keep:
            continue
        fw = space.factors[axis]
        arr = np.tensordot(arr, fw, axes=([axis], [0]))
        arr = np.expand_dims(arr, axis)
    arr = np.broadcast_to(arr, space.factor_sizes)
    return TableFunction(space, arr.reshape(-1))
