"""Permuted orthogonal block-diagonal operators.

A full n x n rotation is replaced by ``R = P_left @ B @ P_right`` where ``B``
is block-diagonal with orthogonal blocks of side at most 40 and the two
permutations come from truncated uniform swaps. Application costs
``sum(s_i**2)`` multiply-adds and storage is linear in ``n`` for a fixed
block size.

Permutations use the gather convention throughout: ``apply(P, x)[i] ==
x[p(i)]``, i.e. ``P`` as a matrix has ``P[i, p(i)] = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .prng import RngState

DEFAULT_BLOCK_SIZE = 40
_MAX_BLOCK_RETRIES = 100
_MIN_ROW_NORM = 1e-12


class DegenerateGeneration(RuntimeError):
    """Gram-Schmidt kept failing on fresh Gaussian draws."""


def _check_length(x: np.ndarray, n: int) -> None:
    if x.shape[-1] != n:
        raise ValueError(f"expected last axis of length {n}, got shape {x.shape}")


def block_sizes(n: int, s_max: int = DEFAULT_BLOCK_SIZE) -> list[int]:
    """Sizes of the diagonal blocks: ``s = min(n, s_max)`` repeated, then the remainder.

    >>> block_sizes(100, 40)
    [40, 40, 20]
    """
    if n < 1 or s_max < 1:
        raise ValueError(f"need n >= 1 and s_max >= 1, got n={n}, s_max={s_max}")
    s = min(n, s_max)
    full, rest = divmod(n, s)
    return [s] * full + ([rest] if rest else [])


@dataclass(frozen=True, eq=False)
class BlockDiagonalMatrix:
    """Orthogonal block-diagonal operator stored as its blocks only."""

    n: int
    block_sizes: tuple[int, ...]
    blocks: tuple[np.ndarray, ...]
    _offsets: tuple[int, ...] = field(init=False, repr=False)
    _stack: np.ndarray | None = field(init=False, repr=False)
    _stack_len: int = field(init=False, repr=False)

    def __post_init__(self):
        if sum(self.block_sizes) != self.n:
            raise ValueError(f"block sizes {self.block_sizes} do not sum to {self.n}")
        if len(self.blocks) != len(self.block_sizes):
            raise ValueError("one block per block size required")
        for size, block in zip(self.block_sizes, self.blocks):
            if block.shape != (size, size):
                raise ValueError(f"block of shape {block.shape}, expected {(size, size)}")
            block.setflags(write=False)
        offsets = [0]
        for size in self.block_sizes:
            offsets.append(offsets[-1] + size)
        object.__setattr__(self, "_offsets", tuple(offsets))
        # the leading run of equal-sized blocks is applied as one batched matmul
        first = self.block_sizes[0]
        count = 0
        while count < len(self.block_sizes) and self.block_sizes[count] == first:
            count += 1
        stack = np.stack(self.blocks[:count]) if count > 1 else None
        object.__setattr__(self, "_stack", stack)
        object.__setattr__(self, "_stack_len", count if stack is not None else 0)

    @classmethod
    def from_blocks(cls, blocks: Sequence[np.ndarray]) -> "BlockDiagonalMatrix":
        blocks = tuple(np.array(b, dtype=float) for b in blocks)
        sizes = tuple(b.shape[0] for b in blocks)
        return cls(sum(sizes), sizes, blocks)

    @classmethod
    def identity(cls, n: int, s_max: int = DEFAULT_BLOCK_SIZE) -> "BlockDiagonalMatrix":
        return cls.from_blocks([np.eye(s) for s in block_sizes(n, s_max)])

    @property
    def n_blocks(self) -> int:
        return len(self.block_sizes)

    @property
    def storage_size(self) -> int:
        """Number of reals held, ``sum(s_i**2)``."""
        return sum(s * s for s in self.block_sizes)

    @property
    def multiply_adds(self) -> int:
        """Arithmetic cost of one :meth:`apply` on a single vector."""
        return sum(s * s for s in self.block_sizes)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """``B @ x`` along the last axis; works for a single point or a batch."""
        x = np.asarray(x, dtype=float)
        _check_length(x, self.n)
        lead = x.shape[:-1]
        y = np.empty_like(x)
        start = 0
        if self._stack is not None:
            k, s = self._stack_len, self.block_sizes[0]
            stop = k * s
            xb = x[..., :stop].reshape(*lead, k, s, 1)
            y[..., :stop] = np.matmul(self._stack, xb).reshape(*lead, stop)
            start = k
        for idx in range(start, self.n_blocks):
            lo, hi = self._offsets[idx], self._offsets[idx + 1]
            y[..., lo:hi] = x[..., lo:hi] @ self.blocks[idx].T
        return y

    def transpose(self) -> "BlockDiagonalMatrix":
        return BlockDiagonalMatrix(self.n, self.block_sizes, tuple(b.T.copy() for b in self.blocks))

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n, self.n))
        for idx, block in enumerate(self.blocks):
            lo, hi = self._offsets[idx], self._offsets[idx + 1]
            dense[lo:hi, lo:hi] = block
        return dense


def _orthonormalize_rows(a: np.ndarray) -> np.ndarray | None:
    """Modified Gram-Schmidt on the rows of ``a`` with one re-orthogonalization pass.

    Returns None if a row collapses below ``_MIN_ROW_NORM``.
    """
    q = a.copy()
    for i in range(q.shape[0]):
        v = q[i]
        for _ in range(2):
            for j in range(i):
                v -= np.dot(q[j], v) * q[j]
        norm = math.sqrt(float(np.dot(v, v)))
        if norm < _MIN_ROW_NORM:
            return None
        q[i] = v / norm
    return q


def generate_block_diagonal(rng: RngState, n: int, s_max: int = DEFAULT_BLOCK_SIZE) -> BlockDiagonalMatrix:
    """Draw a block-diagonal matrix whose blocks are Haar-distributed orthogonal matrices.

    Each block is filled row-major with i.i.d. standard normals from ``rng``
    and its rows are orthonormalized. A block that degenerates during
    orthogonalization is redrawn.
    """
    blocks = []
    for size in block_sizes(n, s_max):
        for _ in range(_MAX_BLOCK_RETRIES):
            raw = np.array(rng.gaussians(size * size)).reshape(size, size)
            block = _orthonormalize_rows(raw)
            if block is not None:
                break
        else:
            raise DegenerateGeneration(f"could not orthogonalize a {size}x{size} block")
        blocks.append(block)
    return BlockDiagonalMatrix.from_blocks(blocks)


def apply_block_diagonal(B: BlockDiagonalMatrix, x: np.ndarray) -> np.ndarray:
    return B.apply(x)


@dataclass(frozen=True, eq=False)
class Permutation:
    """Bijection on ``{1..n}``; ``forward[i-1] = p(i)``."""

    forward: tuple[int, ...]
    index: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        fwd = tuple(int(v) for v in self.forward)
        if sorted(fwd) != list(range(1, len(fwd) + 1)):
            raise ValueError("forward is not a permutation of 1..n")
        object.__setattr__(self, "forward", fwd)
        index = np.array(fwd, dtype=np.intp) - 1
        index.setflags(write=False)
        object.__setattr__(self, "index", index)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @property
    def n(self) -> int:
        return len(self.forward)

    def __eq__(self, other):
        return isinstance(other, Permutation) and self.forward == other.forward

    def __hash__(self):
        return hash(self.forward)

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        _check_length(x, self.n)
        return x[..., self.index]

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, p in enumerate(self.forward, start=1):
            inv[p - 1] = i
        return Permutation(tuple(inv))

    def moved_fraction(self) -> float:
        return sum(p != i for i, p in enumerate(self.forward, start=1)) / self.n

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n, self.n))
        dense[np.arange(self.n), self.index] = 1.0
        return dense


def apply_permutation(P: Permutation, x: np.ndarray) -> np.ndarray:
    return P.apply(x)


def inverse(P: Permutation) -> Permutation:
    return P.inverse()


@dataclass(frozen=True)
class SwapParams:
    n_s: int
    r_s: int

    def __post_init__(self):
        if self.n_s < 0 or self.r_s < 0:
            raise ValueError(f"swap parameters must be non-negative: {self}")

    @classmethod
    def for_dimension(cls, n: int) -> "SwapParams":
        """The suite's choice: ``n_s = n`` and ``r_s = floor(n / 3)``."""
        return cls(n_s=n, r_s=n // 3)


def swap_partner(rng: RngState, i: int, n: int, r_s: int) -> int | None:
    """Draw ``j`` uniformly from ``{max(1, i-r_s) .. min(n, i+r_s)} \\ {i}`` (1-based).

    Returns None when that set is empty.
    """
    lb = max(1, i - r_s)
    ub = min(n, i + r_s)
    if ub - lb < 1:
        return None
    # sample from the range with i removed, then shift past the hole
    j = rng.uniform_int(lb, ub - 1)
    return j + 1 if j >= i else j


def truncated_uniform_swaps(rng: RngState, n: int, params: SwapParams, on_swap=None) -> Permutation:
    """Permutation from truncated uniform swaps.

    Starts from the identity, draws a uniform order ``pi`` of the indices
    (Fisher-Yates), then for ``k = 1..n_s`` swaps ``p[pi(k)]`` with a partner
    at most ``r_s`` positions away. ``on_swap(i, j)`` is called for every
    executed swap.
    """
    if params.n_s > n:
        raise ValueError(f"n_s={params.n_s} exceeds n={n}")
    p = list(range(1, n + 1))
    order = list(range(1, n + 1))
    rng.shuffle(order)
    for k in range(params.n_s):
        i = order[k]
        j = swap_partner(rng, i, n, params.r_s)
        if j is None:
            continue
        p[i - 1], p[j - 1] = p[j - 1], p[i - 1]
        if on_swap is not None:
            on_swap(i, j)
    return Permutation(tuple(p))


class SwapDistance(NamedTuple):
    mean: float
    swaps: int


def swap_distance_stats(
    samples: int,
    n: int,
    params: SwapParams,
    rng: RngState,
    first_index: int | None = None,
) -> SwapDistance:
    """Monte-Carlo mean of ``|i - j|`` over executed swaps.

    With ``first_index=None`` whole permutations are generated and every
    executed swap is recorded until ``samples`` swaps were attempted. With a
    pinned ``first_index`` only the partner draw is repeated ``samples`` times.
    The mean is nan when no swap could be executed.
    """
    total = 0
    executed = 0
    if first_index is not None:
        if not 1 <= first_index <= n:
            raise ValueError(f"first_index {first_index} outside 1..{n}")
        for _ in range(samples):
            j = swap_partner(rng, first_index, n, params.r_s)
            if j is not None:
                total += abs(first_index - j)
                executed += 1
    else:
        if params.n_s == 0:
            return SwapDistance(math.nan, 0)
        distances: list[int] = []
        attempted = 0
        while attempted < samples:
            truncated_uniform_swaps(rng, n, params, on_swap=lambda i, j: distances.append(abs(i - j)))
            attempted += params.n_s
        total, executed = sum(distances), len(distances)
    return SwapDistance(total / executed if executed else math.nan, executed)


@dataclass(frozen=True)
class PermutedOrthogonalMatrix:
    """``R = P_left @ B @ P_right``; ``apply`` runs ``P_right`` first."""

    left: Permutation
    block: BlockDiagonalMatrix
    right: Permutation

    def __post_init__(self):
        if not self.left.n == self.block.n == self.right.n:
            raise ValueError("operand dimensions differ")

    @property
    def n(self) -> int:
        return self.block.n

    @property
    def storage_size(self) -> int:
        """Reals in B plus the integer entries of both permutations."""
        return self.block.storage_size + self.left.n + self.right.n

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.left.apply(self.block.apply(self.right.apply(x)))

    @cached_property
    def _transposed(self) -> tuple[Permutation, BlockDiagonalMatrix, Permutation]:
        return self.right.inverse(), self.block.transpose(), self.left.inverse()

    def apply_transpose(self, y: np.ndarray) -> np.ndarray:
        """``R.T @ y``, which is also ``R^-1 @ y``."""
        right_inv, block_t, left_inv = self._transposed
        return right_inv.apply(block_t.apply(left_inv.apply(y)))

    def to_dense(self) -> np.ndarray:
        return self.left.to_dense() @ self.block.to_dense() @ self.right.to_dense()


class DenseOperator:
    """A materialized square matrix exposing the same interface as the structured operators."""

    def __init__(self, matrix: np.ndarray):
        self.matrix = np.array(matrix, dtype=float)
        self.n = self.matrix.shape[0]

    @property
    def storage_size(self) -> int:
        return self.matrix.size

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        _check_length(x, self.n)
        return x @ self.matrix.T

    def apply_transpose(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(y, dtype=float) @ self.matrix

    def to_dense(self) -> np.ndarray:
        return self.matrix.copy()


def generate_rotation(
    rng_block: RngState,
    rng_left: RngState,
    rng_right: RngState,
    n: int,
    s_max: int = DEFAULT_BLOCK_SIZE,
    params: SwapParams | None = None,
) -> PermutedOrthogonalMatrix:
    params = params or SwapParams.for_dimension(n)
    block = generate_block_diagonal(rng_block, n, s_max)
    left = truncated_uniform_swaps(rng_left, n, params)
    right = truncated_uniform_swaps(rng_right, n, params)
    return PermutedOrthogonalMatrix(left, block, right)


def dump_matrix(matrix: np.ndarray) -> str:
    """Plain-text dump: one row per line, space-separated, 17 significant digits."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    return "".join(" ".join(f"{v:.17g}" for v in row) + "\n" for row in matrix)


def load_matrix(text: str) -> np.ndarray:
    rows = [[float(tok) for tok in line.split()] for line in text.splitlines() if line.strip()]
    return np.array(rows, dtype=float)
