"""Composable search-space and objective-space transformations.

An :class:`Evaluator` wraps a function of points stored along the last axis
of an array, so one call can evaluate a single ``(n,)`` point or an
``(m, n)`` batch. Every wrapper returns a new evaluator and leaves the
wrapped one untouched. The outermost wrapper's variable transform runs
first at call time.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .prng import RngState
from .structured_ops import BlockDiagonalMatrix, Permutation, PermutedOrthogonalMatrix

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Evaluator:
    n: int
    fn: ArrayFn
    x_opt: np.ndarray | None = None
    f_opt: float | None = None
    function_id: int | None = None
    instance: int | None = None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 or x.shape[-1] != self.n:
            raise ValueError(f"expected points of dimension {self.n}, got shape {x.shape}")
        y = self.fn(x)
        return float(y) if x.ndim == 1 else np.asarray(y, dtype=float)

    def wrap(self, fn: ArrayFn) -> "Evaluator":
        return replace(self, fn=fn)


def _require(cond: bool, what: str) -> None:
    if not cond:
        raise ValueError(what)


def gamma(n: int) -> float:
    """Dimension normalization ``min(1, 40/n)``."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    return min(1.0, 40.0 / n)


def scaling_vector(alpha: float, n: int) -> np.ndarray:
    """Diagonal of the conditioning matrix: ``alpha**((i-1) / (2(n-1)))``."""
    if n == 1:
        return np.ones(1)
    return alpha ** (0.5 * np.arange(n) / (n - 1))


def graded_exponents(n: int) -> np.ndarray:
    """``(i-1)/(n-1)`` for ``i = 1..n`` (all zeros when ``n == 1``)."""
    if n == 1:
        return np.zeros(1)
    return np.arange(n) / (n - 1)


def t_osz_values(v):
    """Oscillation map applied elementwise; 0 maps to 0."""
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    nz = v != 0
    a = v[nz]
    xhat = np.log(np.abs(a))
    c1 = np.where(a > 0, 10.0, 5.5)
    c2 = np.where(a > 0, 7.9, 3.1)
    out[nz] = np.sign(a) * np.exp(xhat + 0.049 * (np.sin(c1 * xhat) + np.sin(c2 * xhat)))
    return out


def t_osz_scalar(v: float) -> float:
    return float(t_osz_values(np.float64(v)))


def t_asy_values(x: np.ndarray, beta: float) -> np.ndarray:
    """Asymmetry map: positive entries are raised to ``1 + beta*(i-1)/(n-1)*sqrt(x_i)``."""
    x = np.asarray(x, dtype=float)
    expo = 1.0 + beta * graded_exponents(x.shape[-1]) * np.sqrt(np.maximum(x, 0.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        powered = np.power(np.where(x > 0, x, 1.0), expo)
    return np.where(x > 0, powered, x)


def f_pen(x: np.ndarray) -> np.ndarray:
    """Boundary penalty ``sum(max(0, |x_i| - 5)**2)`` over the last axis."""
    x = np.asarray(x, dtype=float)
    excess = np.maximum(0.0, np.abs(x) - 5.0)
    return np.sum(excess * excess, axis=-1)


def sign_vector(rng: RngState, n: int) -> np.ndarray:
    """Independent fair +/-1 entries."""
    return np.array([1.0 if rng.next_uniform() < 0.5 else -1.0 for _ in range(n)])


# variable-space wrappers


def map_vars(inner: Evaluator, transform: ArrayFn) -> Evaluator:
    """``result(x) = inner(transform(x))``."""
    fn = inner.fn
    return inner.wrap(lambda x: fn(transform(x)))


def translate(inner: Evaluator, x_opt) -> Evaluator:
    x_opt = np.array(x_opt, dtype=float)
    _require(x_opt.shape == (inner.n,), f"x_opt must have length {inner.n}")
    return map_vars(inner, lambda x: x - x_opt)


def permute_vars(inner: Evaluator, P: Permutation) -> Evaluator:
    _require(P.n == inner.n, f"permutation of size {P.n} on dimension {inner.n}")
    return map_vars(inner, P.apply)


def blockrotate_vars(inner: Evaluator, B: BlockDiagonalMatrix) -> Evaluator:
    _require(B.n == inner.n, f"block matrix of size {B.n} on dimension {inner.n}")
    return map_vars(inner, B.apply)


def rotate_vars(inner: Evaluator, R: PermutedOrthogonalMatrix) -> Evaluator:
    """``result(x) = inner(P_left B P_right x)`` as three chained wrappers.

    The right permutation is the outermost wrapper so it acts on ``x`` first.
    """
    _require(R.n == inner.n, f"rotation of size {R.n} on dimension {inner.n}")
    wrapped = permute_vars(inner, R.left)
    wrapped = blockrotate_vars(wrapped, R.block)
    return permute_vars(wrapped, R.right)


def scale_vars(inner: Evaluator, diag) -> Evaluator:
    diag = np.array(diag, dtype=float)
    _require(diag.shape == (inner.n,), f"scaling vector must have length {inner.n}")
    return map_vars(inner, lambda x: x * diag)


def t_osz(inner: Evaluator) -> Evaluator:
    return map_vars(inner, t_osz_values)


def t_asy(inner: Evaluator, beta: float) -> Evaluator:
    _require(beta >= 0, "beta must be non-negative")
    return map_vars(inner, lambda x: t_asy_values(x, beta))


def affine_vars(inner: Evaluator, factor: float, offset: float) -> Evaluator:
    """``result(x) = inner(factor * x + offset)``."""
    return map_vars(inner, lambda x: factor * x + offset)


# objective-space wrappers


def map_objective(inner: Evaluator, transform: ArrayFn) -> Evaluator:
    fn = inner.fn
    return inner.wrap(lambda x: transform(fn(x)))


def shift_objective(inner: Evaluator, f_opt: float) -> Evaluator:
    return replace(map_objective(inner, lambda f: f + f_opt), f_opt=f_opt)


def scale_objective(inner: Evaluator, factor: float) -> Evaluator:
    return map_objective(inner, lambda f: factor * f)


def add_penalty(inner: Evaluator, factor: float, scale: float = 1.0) -> Evaluator:
    """``result(x) = inner(x) + factor * f_pen(x / scale)``, on the untransformed ``x``."""
    fn = inner.fn
    return inner.wrap(lambda x: fn(x) + factor * f_pen(x / scale))


def sphere_raw(n: int) -> Evaluator:
    return Evaluator(n, lambda z: np.sum(z * z, axis=-1))


def constant(n: int, value: float = 0.0) -> Evaluator:
    return Evaluator(n, lambda z: np.full(z.shape[:-1], value))

