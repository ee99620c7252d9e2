"""The 24 test functions, assembled as transformation pipelines over raw cores.

Every rotation ``R`` or ``Q`` of the classic suite is a
:class:`~bbls.structured_ops.PermutedOrthogonalMatrix` with block size
``min(n, 40)``, ``n`` swaps and swap range ``floor(n/3)``. All functions
except Schwefel, Schaffers, Weierstrass, Gallagher, Katsuura and the
Griewank-Rosenbrock composite are multiplied by ``gamma(n) = min(1, 40/n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import transforms as T
from .prng import RngState, Role, derive_seed
from .structured_ops import (
    BlockDiagonalMatrix,
    DenseOperator,
    PermutedOrthogonalMatrix,
    generate_block_diagonal,
    generate_rotation,
)

SCHWEFEL_OPT = 4.2096874633
SCHWEFEL_CONST = 4.189828872724339
LUNACEK_MU0 = 2.5
# sum_{k=0}^{11} 2^-k cos(pi 3^k); every cosine is -1
WEIERSTRASS_F0 = -(2.0 - 2.0**-11)

FUNCTIONS: dict[int, tuple[str, int]] = {
    1: ("Sphere", 1),
    2: ("Ellipsoidal separable", 1),
    3: ("Rastrigin separable", 1),
    4: ("Bueche-Rastrigin", 1),
    5: ("Linear Slope", 1),
    6: ("Attractive Sector", 2),
    7: ("Step Ellipsoidal", 2),
    8: ("Rosenbrock original", 2),
    9: ("Rosenbrock rotated", 2),
    10: ("Ellipsoidal", 3),
    11: ("Discus", 3),
    12: ("Bent Cigar", 3),
    13: ("Sharp Ridge", 3),
    14: ("Different Powers", 3),
    15: ("Rastrigin", 4),
    16: ("Weierstrass", 4),
    17: ("Schaffers F7", 4),
    18: ("Schaffers F7 moderately ill-conditioned", 4),
    19: ("Composite Griewank-Rosenbrock F8F2", 4),
    20: ("Schwefel", 5),
    21: ("Gallagher's Gaussian 101-me Peaks", 5),
    22: ("Gallagher's Gaussian 21-hi Peaks", 5),
    23: ("Katsuura", 5),
    24: ("Lunacek bi-Rastrigin", 5),
}

# functions with one rotation R, and with both R and Q
_ONE_ROTATION = {9, 10, 11, 12, 14, 19}
_TWO_ROTATIONS = {6, 7, 13, 15, 16, 17, 18, 23, 24}


class UnknownFunction(ValueError):
    pass


class InvalidDimension(ValueError):
    pass


def _check_fid(fid: int) -> None:
    if fid not in FUNCTIONS:
        raise UnknownFunction(f"function id must be in 1..24, got {fid}")


@dataclass(frozen=True)
class ProblemDescriptor:
    function_id: int
    dimension: int
    instance: int

    def __post_init__(self):
        _check_fid(self.function_id)

    @property
    def name(self) -> str:
        return FUNCTIONS[self.function_id][0]

    @property
    def group(self) -> int:
        return FUNCTIONS[self.function_id][1]


# raw cores, all acting on the last axis


def sphere(z):
    return np.sum(z * z, axis=-1)


def ellipsoid(z, condition: float = 1e6):
    weights = condition ** T.graded_exponents(z.shape[-1])
    return np.sum(weights * z * z, axis=-1)


def rastrigin(z):
    n = z.shape[-1]
    return 10.0 * n - 10.0 * np.sum(np.cos(2 * np.pi * z), axis=-1) + np.sum(z * z, axis=-1)


def linear_slope(z, x_opt):
    s = np.sign(x_opt) * 10.0 ** T.graded_exponents(z.shape[-1])
    return np.sum(5.0 * np.abs(s) - s * z, axis=-1)


def attractive_sector(z, x_opt):
    s = np.where(z * x_opt > 0, 100.0, 1.0)
    return np.sum((s * z) ** 2, axis=-1)


def rosenbrock(z):
    _need_two(z)
    a, b = z[..., :-1], z[..., 1:]
    return np.sum(100.0 * (a * a - b) ** 2 + (a - 1.0) ** 2, axis=-1)


def discus(z, k: int):
    return 1e6 * np.sum(z[..., :k] ** 2, axis=-1) + np.sum(z[..., k:] ** 2, axis=-1)


def bent_cigar(z, k: int):
    return np.sum(z[..., :k] ** 2, axis=-1) + 1e6 * np.sum(z[..., k:] ** 2, axis=-1)


def sharp_ridge(z, k: int):
    return np.sum(z[..., :k] ** 2, axis=-1) + 100.0 * np.sqrt(np.sum(z[..., k:] ** 2, axis=-1))


def different_powers(z):
    return np.sum(np.abs(z) ** (2.0 + 4.0 * T.graded_exponents(z.shape[-1])), axis=-1)


def weierstrass(z, terms: int = 12):
    n = z.shape[-1]
    total = np.zeros(z.shape[:-1])
    for k in range(terms):
        total = total + 0.5**k * np.sum(np.cos(2 * np.pi * 3.0**k * (z + 0.5)), axis=-1)
    return 10.0 * (total / n - WEIERSTRASS_F0) ** 3


def schaffers_f7(z):
    _need_two(z)
    s = np.sqrt(z[..., :-1] ** 2 + z[..., 1:] ** 2)
    root = np.sqrt(s)
    inner = root + root * np.sin(50.0 * s**0.2) ** 2
    return np.mean(inner, axis=-1) ** 2


def griewank_rosenbrock(z):
    _need_two(z)
    a, b = z[..., :-1], z[..., 1:]
    s = 100.0 * (a * a - b) ** 2 + (a - 1.0) ** 2
    return 10.0 * np.mean(s / 4000.0 - np.cos(s), axis=-1) + 10.0


def schwefel(z):
    n = z.shape[-1]
    value = -np.sum(z * np.sin(np.sqrt(np.abs(z))), axis=-1) / (100.0 * n) + SCHWEFEL_CONST
    return value + 100.0 * T.f_pen(z / 100.0)


def round_half_away(v):
    return np.sign(v) * np.floor(np.abs(v) + 0.5)


def katsuura(z, terms: int = 32):
    n = z.shape[-1]
    acc = np.zeros(z.shape)
    for j in range(1, terms + 1):
        scaled = 2.0**j * z
        acc += np.abs(scaled - round_half_away(scaled)) / 2.0**j
    factors = (1.0 + np.arange(1, n + 1) * acc) ** (10.0 / n**1.2)
    return 10.0 / n**2 * np.prod(factors, axis=-1) - 10.0 / n**2


def lunacek_s(n: int) -> float:
    return 1.0 - 1.0 / (2.0 * math.sqrt(n + 20.0) - 8.2)


def _need_two(z):
    if z.shape[-1] < 2:
        raise InvalidDimension("this core needs at least 2 variables")


def distinct_axes(n: int) -> int:
    """Number of distinguished coordinates for Discus, Bent Cigar, Sharp Ridge."""
    return math.ceil(n / 40)


def rosenbrock_factor(n: int) -> float:
    return max(1.0, math.sqrt(n) / 8.0)


def gallagher_weights(peaks: int) -> np.ndarray:
    w = np.empty(peaks)
    w[0] = 10.0
    w[1:] = 1.1 + 8.0 * np.arange(peaks - 1) / (peaks - 2)
    return w


@dataclass(frozen=True, eq=False)
class GallagherPeaks:
    """Peak locations ``y``, weights ``w``, diagonal conditionings ``c`` and block matrix ``B``."""

    y: np.ndarray
    weights: np.ndarray
    c: np.ndarray
    block: BlockDiagonalMatrix | DenseOperator
    _by: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_by", self.block.apply(self.y))

    def densified(self) -> "GallagherPeaks":
        return GallagherPeaks(self.y, self.weights, self.c, DenseOperator(self.block.to_dense()))

    def max_term(self, x):
        bx = self.block.apply(x)
        n = bx.shape[-1]
        best = np.full(bx.shape[:-1], -np.inf)
        for i in range(len(self.weights)):
            d = bx - self._by[i]
            q = np.sum(self.c[i] * d * d, axis=-1)
            best = np.maximum(best, self.weights[i] * np.exp(-q / (2.0 * n)))
        return best

    def __call__(self, x):
        return T.t_osz_values(10.0 - self.max_term(x)) ** 2


def _gallagher_spec(fid: int):
    # (number of peaks, alpha_1, half-width for y_1, half-width for other peaks)
    if fid == 21:
        return 101, 1000.0, 4.0, 5.0
    return 21, 1000.0**2, 3.92, 4.9


def _uniform_vector(rng: RngState, n: int, half_width: float) -> np.ndarray:
    return np.array([half_width * (2.0 * u - 1.0) for u in rng.uniforms(n)])


def _round_opt(v: np.ndarray) -> np.ndarray:
    v = np.round(v, 2)
    v[v == 0] = -1e-5
    return v


def generate_gallagher(fid: int, n: int, rng_aux: RngState, rng_block: RngState) -> GallagherPeaks:
    peaks, alpha1, half1, half = _gallagher_spec(fid)
    y = np.empty((peaks, n))
    y[0] = _round_opt(_uniform_vector(rng_aux, n, half1))
    for i in range(1, peaks):
        y[i] = _uniform_vector(rng_aux, n, half)
    alphas = [1000.0 ** (2.0 * j / (peaks - 2)) for j in range(peaks - 1)]
    rng_aux.shuffle(alphas)
    alphas = [alpha1] + alphas
    c = np.empty((peaks, n))
    for i, alpha in enumerate(alphas):
        diag = list(T.scaling_vector(alpha, n) / alpha**0.25)
        rng_aux.shuffle(diag)
        c[i] = diag
    block = generate_block_diagonal(rng_block, n)
    return GallagherPeaks(y, gallagher_weights(peaks), c, block)


class InstanceParameters(NamedTuple):
    x_opt: np.ndarray
    f_opt: float
    seeds: dict[Role, int]


def _rotation(seeds: dict[Role, int], n: int, which: str) -> PermutedOrthogonalMatrix:
    if which == "R":
        roles = (Role.BLOCK_B1, Role.PERM_P11, Role.PERM_P12)
    else:
        roles = (Role.BLOCK_B2, Role.PERM_P21, Role.PERM_P22)
    b, left, right = (RngState(seeds[r]) for r in roles)
    return generate_rotation(b, left, right, n)


def optimal_value(fid: int, n: int, instance: int) -> float:
    """``f_opt`` alone, without generating any matrices."""
    _check_fid(fid)
    return _draw_f_opt(RngState(derive_seed(fid, n, instance, Role.F_OPT)))


def _draw_f_opt(rng: RngState) -> float:
    g1, g2 = rng.next_gaussian(), rng.next_gaussian()
    value = round(100.0 * g1 / g2, 2) if g2 != 0 else 1000.0
    return min(1000.0, max(-1000.0, value))


def instance_parameters(fid: int, n: int, instance: int, _rotations=None) -> InstanceParameters:
    """Optimum location, optimal value and sub-stream seeds of one problem.

    ``x_opt`` is uniform in ``[-4, 4]^n`` rounded to two decimals (zeros
    become ``-1e-5``) unless the function fixes it otherwise.
    """
    _check_fid(fid)
    if n < 1:
        raise InvalidDimension(f"dimension must be positive, got {n}")
    seeds = {role: derive_seed(fid, n, instance, role) for role in Role}
    rng_x = RngState(seeds[Role.X_OPT])
    f_opt = _draw_f_opt(RngState(seeds[Role.F_OPT]))

    if fid == 5:
        x_opt = 5.0 * T.sign_vector(rng_x, n)
    elif fid in (8, 9):
        x_opt = _round_opt(_uniform_vector(rng_x, n, 3.0))
    elif fid == 19:
        R = (_rotations or {}).get("R") or _rotation(seeds, n, "R")
        x_opt = R.apply_transpose(np.full(n, 0.5 / rosenbrock_factor(n)))
    elif fid == 20:
        x_opt = SCHWEFEL_OPT / 2.0 * T.sign_vector(rng_x, n)
    elif fid in (21, 22):
        _, _, half1, _ = _gallagher_spec(fid)
        x_opt = _round_opt(_uniform_vector(RngState(seeds[Role.AUX]), n, half1))
    elif fid == 24:
        x_opt = 0.5 * LUNACEK_MU0 * T.sign_vector(rng_x, n)
    else:
        x_opt = _round_opt(_uniform_vector(rng_x, n, 4.0))
    return InstanceParameters(x_opt, f_opt, seeds)


@dataclass(frozen=True, eq=False)
class Problem:
    descriptor: ProblemDescriptor
    evaluator: T.Evaluator
    x_opt: np.ndarray
    f_opt: float
    rotations: dict[str, PermutedOrthogonalMatrix | DenseOperator]
    core: Callable[[np.ndarray], np.ndarray]
    gallagher: GallagherPeaks | None = None

    @property
    def dimension(self) -> int:
        return self.descriptor.dimension

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.dimension
        return np.full(n, -5.0), np.full(n, 5.0)

    def __call__(self, x):
        return self.evaluator(x)

    @property
    def matrix_storage(self) -> int:
        """Stored matrix and permutation entries; linear in ``n`` for fixed block size."""
        total = sum(r.storage_size for r in self.rotations.values())
        if self.gallagher is not None:
            total += self.gallagher.block.storage_size
        return total


def _pipeline(core, n: int, steps) -> T.Evaluator:
    """Wrap ``core`` so that ``steps`` act on ``x`` in the listed order."""
    ev = T.Evaluator(n, core)
    for step in reversed(steps):
        ev = step(ev)
    return ev


def build_problem(fid: int, n: int, instance: int, dense: bool = False) -> Problem:
    """Assemble problem ``(fid, n, instance)``.

    ``dense=True`` swaps every structured operator for its materialized
    matrix; values must agree with the structured build up to rounding. Only
    meant for small ``n``.
    """
    _check_fid(fid)
    if n < 2:
        raise InvalidDimension(f"problems need n >= 2, got {n}")
    seeds = {role: derive_seed(fid, n, instance, role) for role in Role}
    rotations: dict[str, PermutedOrthogonalMatrix] = {}
    if fid in _ONE_ROTATION or fid in _TWO_ROTATIONS:
        rotations["R"] = _rotation(seeds, n, "R")
    if fid in _TWO_ROTATIONS:
        rotations["Q"] = _rotation(seeds, n, "Q")
    x_opt, f_opt, _ = instance_parameters(fid, n, instance, _rotations=rotations)
    if dense:
        rotations = {k: DenseOperator(v.to_dense()) for k, v in rotations.items()}
    R, Q = rotations.get("R"), rotations.get("Q")
    g = T.gamma(n)
    k = distinct_axes(n)

    shift = lambda e: T.translate(e, x_opt)  # noqa: E731
    rot = lambda M: (lambda e: T.map_vars(e, M.apply) if dense else T.rotate_vars(e, M))  # noqa: E731
    lam = lambda alpha: (lambda e: T.scale_vars(e, T.scaling_vector(alpha, n)))  # noqa: E731
    osz = T.t_osz
    asy = lambda beta: (lambda e: T.t_asy(e, beta))  # noqa: E731

    normalize = True
    penalty = 0.0
    gallagher = None

    if fid == 1:
        core, steps = sphere, [shift]
    elif fid == 2:
        core, steps = ellipsoid, [shift, osz]
    elif fid == 3:
        core, steps = rastrigin, [shift, osz, asy(0.2), lam(10)]
    elif fid == 4:
        base = np.sqrt(10.0) ** T.graded_exponents(n)
        odd = (np.arange(n) % 2) == 0  # 1-based odd positions

        def bueche_scale(v):
            return np.where((v > 0) & odd, 10.0 * base, base) * v

        core, steps = rastrigin, [shift, osz, lambda e: T.map_vars(e, bueche_scale)]
        penalty = 100.0
    elif fid == 5:

        def clamp(x):
            return np.where(x_opt * x < 25.0, x, x_opt)

        core, steps = (lambda z: linear_slope(z, x_opt)), [lambda e: T.map_vars(e, clamp)]
    elif fid == 6:
        core, steps = (lambda z: attractive_sector(z, x_opt)), [shift, rot(R), lam(10), rot(Q)]
    elif fid == 7:
        ellip_weights = 100.0 ** T.graded_exponents(n)

        def step_core(zhat):
            ztilde = np.where(
                np.abs(zhat) > 0.5,
                np.floor(0.5 + zhat),
                np.floor(0.5 + 10.0 * zhat) / 10.0,
            )
            z = Q.apply(ztilde)
            return 0.1 * np.maximum(np.abs(zhat[..., 0]) / 1e4, np.sum(ellip_weights * z * z, axis=-1))

        core, steps = step_core, [shift, rot(R), lam(10)]
        penalty = 1.0
    elif fid == 8:
        c = rosenbrock_factor(n)
        core, steps = rosenbrock, [shift, lambda e: T.affine_vars(e, c, 1.0)]
    elif fid == 9:
        c = rosenbrock_factor(n)
        core, steps = rosenbrock, [shift, rot(R), lambda e: T.affine_vars(e, c, 1.0)]
    elif fid == 10:
        core, steps = ellipsoid, [shift, rot(R), osz]
    elif fid == 11:
        core, steps = (lambda z: discus(z, k)), [shift, rot(R), osz]
    elif fid == 12:
        core, steps = (lambda z: bent_cigar(z, k)), [shift, rot(R), asy(0.5), rot(R)]
    elif fid == 13:
        core, steps = (lambda z: sharp_ridge(z, k)), [shift, rot(R), lam(10), rot(Q)]
    elif fid == 14:
        core, steps = different_powers, [shift, rot(R)]
    elif fid == 15:
        core, steps = rastrigin, [shift, rot(R), osz, asy(0.2), rot(Q), lam(10), rot(R)]
    elif fid == 16:
        core, steps = weierstrass, [shift, rot(R), osz, rot(Q), lam(0.01), rot(R)]
        normalize, penalty = False, 10.0 / n
    elif fid in (17, 18):
        alpha = 10.0 if fid == 17 else 1000.0
        core, steps = schaffers_f7, [shift, rot(R), asy(0.5), rot(Q), lam(alpha)]
        normalize, penalty = False, 10.0
    elif fid == 19:
        c = rosenbrock_factor(n)
        core, steps = griewank_rosenbrock, [rot(R), lambda e: T.affine_vars(e, c, 0.5)]
        normalize = False
    elif fid == 20:
        signs = np.sign(x_opt)
        two_abs = 2.0 * np.abs(x_opt)
        diag = T.scaling_vector(10.0, n)

        def schwefel_vars(x):
            xhat = 2.0 * signs * x
            zhat = xhat.copy()
            zhat[..., 1:] += 0.25 * (xhat[..., :-1] - two_abs[:-1])
            return 100.0 * (diag * (zhat - two_abs) + two_abs)

        core, steps = schwefel, [lambda e: T.map_vars(e, schwefel_vars)]
        normalize = False
    elif fid in (21, 22):
        gallagher = generate_gallagher(fid, n, RngState(seeds[Role.AUX]), RngState(seeds[Role.BLOCK_B1]))
        if dense:
            gallagher = gallagher.densified()
        core, steps = gallagher, []
        normalize, penalty = False, 1.0
    elif fid == 23:
        core, steps = katsuura, [shift, rot(R), lam(100), rot(Q)]
        normalize, penalty = False, 1.0
    else:  # 24
        signs = np.sign(x_opt)
        mu0 = LUNACEK_MU0
        s = lunacek_s(n)
        mu1 = -math.sqrt((mu0 * mu0 - 1.0) / s)
        inner = _pipeline(lambda z: 10.0 * (n - np.sum(np.cos(2 * np.pi * z), axis=-1)), n, [rot(R), lam(100), rot(Q)])

        def lunacek(x):
            xhat = 2.0 * signs * x
            d0 = np.sum((xhat - mu0) ** 2, axis=-1)
            d1 = n + s * np.sum((xhat - mu1) ** 2, axis=-1)
            return np.minimum(d0, d1) + inner.fn(xhat - mu0)

        core, steps = lunacek, []
        penalty = 1e4

    ev = _pipeline(core, n, steps)
    if fid == 6:
        ev = T.scale_objective(ev, g)
        ev = T.map_objective(ev, lambda f: T.t_osz_values(f) ** 0.9)
    elif normalize:
        ev = T.scale_objective(ev, g)
    if penalty:
        ev = T.add_penalty(ev, penalty)
    ev = T.shift_objective(ev, f_opt)
    ev = T.Evaluator(n, ev.fn, x_opt=x_opt, f_opt=f_opt, function_id=fid, instance=instance)
    x_opt.setflags(write=False)
    return Problem(ProblemDescriptor(fid, n, instance), ev, x_opt, f_opt, rotations, core, gallagher)
