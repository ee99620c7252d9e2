"""Problem enumeration, flat indexing and target values."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .functions import FUNCTIONS, ProblemDescriptor

SUITE_NAME = "bbob-largescale"
DIMENSIONS = (20, 40, 80, 160, 320, 640)
DEFAULT_INSTANCES = tuple(range(1, 16))
TEST_MODE_ENV = "BBLS_TEST_MODE"


def test_mode_enabled() -> bool:
    return os.environ.get(TEST_MODE_ENV) == "1"


@dataclass(frozen=True)
class SuiteConfig:
    dimensions: tuple[int, ...] = DIMENSIONS
    function_ids: tuple[int, ...] = tuple(FUNCTIONS)
    instances: tuple[int, ...] = DEFAULT_INSTANCES
    allow_small: bool = field(default_factory=test_mode_enabled)

    def __post_init__(self):
        for name in ("dimensions", "function_ids", "instances"):
            values = tuple(int(v) for v in getattr(self, name))
            if len(set(values)) != len(values):
                raise ValueError(f"duplicate entries in {name}: {values}")
            object.__setattr__(self, name, values)
        for n in self.dimensions:
            if n not in DIMENSIONS and not (self.allow_small and 2 <= n < DIMENSIONS[0]):
                raise ValueError(
                    f"dimension {n} not in {DIMENSIONS} (set {TEST_MODE_ENV}=1 for 2 <= n < 20)"
                )
        for fid in self.function_ids:
            if fid not in FUNCTIONS:
                raise ValueError(f"function id {fid} not in 1..24")
        for inst in self.instances:
            if inst < 0:
                raise ValueError(f"instances must be non-negative, got {inst}")

    def __len__(self) -> int:
        return len(self.dimensions) * len(self.function_ids) * len(self.instances)

    def index_of(self, d: ProblemDescriptor) -> int:
        """Flat index of ``(dimension, function, instance)``; dimension varies slowest."""
        try:
            i = self.dimensions.index(d.dimension)
            j = self.function_ids.index(d.function_id)
            k = self.instances.index(d.instance)
        except ValueError:
            raise KeyError(f"{d} is not part of this suite") from None
        return (i * len(self.function_ids) + j) * len(self.instances) + k

    def descriptor_of(self, index: int) -> ProblemDescriptor:
        if not 0 <= index < len(self):
            raise IndexError(f"problem index {index} out of range 0..{len(self) - 1}")
        rest, k = divmod(index, len(self.instances))
        i, j = divmod(rest, len(self.function_ids))
        return ProblemDescriptor(self.function_ids[j], self.dimensions[i], self.instances[k])


def suite_iter(config: SuiteConfig) -> Iterator[ProblemDescriptor]:
    for n in config.dimensions:
        for fid in config.function_ids:
            for inst in config.instances:
                yield ProblemDescriptor(fid, n, inst)


@dataclass(frozen=True)
class TargetSet:
    f_opt: float
    precisions: tuple[float, ...]

    def __post_init__(self):
        p = self.precisions
        if any(v <= 0 for v in p) or any(a <= b for a, b in zip(p, p[1:])):
            raise ValueError("precisions must be positive and strictly decreasing")

    @property
    def targets(self) -> tuple[float, ...]:
        return tuple(self.f_opt + p for p in self.precisions)

    def __len__(self) -> int:
        return len(self.precisions)


def default_precisions() -> tuple[float, ...]:
    """``10**(2 - 0.2 k)`` for ``k = 0..50``: 51 values from 100 down to 1e-8."""
    return tuple(10.0 ** ((20 - 2 * k) / 10) for k in range(51))


def default_targets(f_opt: float) -> TargetSet:
    return TargetSet(f_opt, default_precisions())


def parse_int_list(text: str) -> tuple[int, ...]:
    """``"1,3,5-7"`` -> ``(1, 3, 5, 6, 7)``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return tuple(out)


def parse_config_text(text: str) -> dict:
    """Parse ``key=value`` lines (``#`` starts a comment).

    Recognized keys: dimensions, functions, instances, budget_multiplier.
    """
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in ("dimensions", "functions", "instances"):
            values[key] = parse_int_list(value)
        elif key == "budget_multiplier":
            values[key] = float(value)
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    return values


def load_config(path: str | Path) -> tuple[SuiteConfig, float | None]:
    values = parse_config_text(Path(path).read_text())
    kwargs = {}
    if "dimensions" in values:
        kwargs["dimensions"] = values["dimensions"]
    if "functions" in values:
        kwargs["function_ids"] = values["functions"]
    if "instances" in values:
        kwargs["instances"] = values["instances"]
    return SuiteConfig(**kwargs), values.get("budget_multiplier")

