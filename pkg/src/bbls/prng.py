"""Deterministic pseudo-random streams.

Every random quantity of the suite (optima, offsets, rotation blocks,
permutations, Gallagher peaks) is drawn from an :class:`RngState`. The
generator is xorshift128+ (Vigna, 2014; shifts 23/18/5) seeded through
splitmix64, so streams are bit-identical on every platform and trivially
portable to other languages.

Sub-streams are keyed by ``(function id, dimension, instance, role)`` via
:func:`derive_seed`.
"""

from __future__ import annotations

import enum
import math

MASK64 = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
# substituted for seed 0 before expansion
_ZERO_SEED = 0x5DEECE66D1234567
_INV_2_53 = 1.0 / (1 << 53)


class InvalidRange(ValueError):
    """Raised when ``uniform_int`` is called with ``lo > hi``."""


def splitmix64_mix(z: int) -> int:
    """Finalizer of splitmix64 (a bijective 64-bit avalanche mix)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step. Returns ``(new_state, output)``."""
    state = (state + _SPLITMIX_GAMMA) & MASK64
    return state, splitmix64_mix(state)


class Role(enum.IntEnum):
    """Sub-stream roles of one problem instance."""

    X_OPT = 1
    F_OPT = 2
    BLOCK_B1 = 3
    BLOCK_B2 = 4
    PERM_P11 = 5
    PERM_P12 = 6
    PERM_P21 = 7
    PERM_P22 = 8
    AUX = 9


def mix64(*values: int) -> int:
    """Hash a sequence of non-negative integers into one 64-bit word.

    ``h = 0; for v in values: h = splitmix64_mix(h + GAMMA ^ v)``. Order
    matters, so ``mix64(a, b) != mix64(b, a)`` in general.
    """
    h = 0
    for v in values:
        if v < 0:
            raise ValueError(f"mix64 takes non-negative integers, got {v}")
        h = splitmix64_mix(((h + _SPLITMIX_GAMMA) & MASK64) ^ (v & MASK64))
    return h


def derive_seed(fid: int, dimension: int, instance: int, role: Role | int) -> int:
    return mix64(fid, dimension, instance, int(role))


class RngState:
    """xorshift128+ state with a cached Box-Muller spare.

    Single-owner; do not share one instance between threads.
    """

    __slots__ = ("s0", "s1", "cached_gaussian")

    def __init__(self, seed: int):
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must be a non-negative 64-bit integer, got {seed}")
        if seed == 0:
            seed = _ZERO_SEED
        sm, self.s0 = splitmix64(seed)
        sm, self.s1 = splitmix64(sm)
        if self.s0 == 0 and self.s1 == 0:  # pragma: no cover - needs a splitmix collision
            self.s1 = 1
        self.cached_gaussian: float | None = None

    def next_u64(self) -> int:
        s1 = self.s0
        s0 = self.s1
        result = (s0 + s1) & MASK64
        self.s0 = s0
        s1 = (s1 ^ (s1 << 23)) & MASK64
        self.s1 = s1 ^ s0 ^ (s1 >> 18) ^ (s0 >> 5)
        return result

    def next_uniform(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * _INV_2_53

    def next_gaussian(self) -> float:
        """Standard normal deviate by the polar Box-Muller method."""
        if self.cached_gaussian is not None:
            g = self.cached_gaussian
            self.cached_gaussian = None
            return g
        while True:
            u = 2.0 * self.next_uniform() - 1.0
            v = 2.0 * self.next_uniform() - 1.0
            s = u * u + v * v
            if 0.0 < s < 1.0:
                break
        factor = math.sqrt(-2.0 * math.log(s) / s)
        self.cached_gaussian = v * factor
        return u * factor

    def uniform_int(self, lo: int, hi: int) -> int:
        """Integer uniform on ``[lo, hi]`` (inclusive), by rejection."""
        if lo > hi:
            raise InvalidRange(f"empty range [{lo}, {hi}]")
        span = hi - lo + 1
        if span == 1:
            return lo
        limit = ((1 << 64) // span) * span
        while True:
            r = self.next_u64()
            if r < limit:
                return lo + r % span

    # bulk helpers used by instance generation

    def uniforms(self, count: int) -> list[float]:
        return [self.next_uniform() for _ in range(count)]

    def gaussians(self, count: int) -> list[float]:
        return [self.next_gaussian() for _ in range(count)]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle driven by :meth:`uniform_int`."""
        for i in range(len(items) - 1, 0, -1):
            j = self.uniform_int(0, i)
            items[i], items[j] = items[j], items[i]


def rng_new(seed: int) -> RngState:
    return RngState(seed)


def next_uniform(state: RngState) -> float:
    return state.next_uniform()


def next_gaussian(state: RngState) -> float:
    return state.next_gaussian()


def uniform_int(state: RngState, lo: int, hi: int) -> int:
    return state.uniform_int(lo, hi)
