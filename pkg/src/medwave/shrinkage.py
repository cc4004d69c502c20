"""Block James-Stein shrinkage of detail coefficients.

Detail subbands are tiled into axis-aligned hypercube blocks of side
len = max(1, floor(L^{1/q})) (trailing blocks truncated at subband edges;
a subband with at most L coefficients forms a single block). Each block is
scaled by the nonnegative James-Stein factor

    c_B = max(0, 1 - lambda* L_B / (4 hhat^2(0) n S_B^2)),

where L_B is the actual block cardinality, S_B^2 the sum of squared
coefficients in the block, n the sample size and hhat^2(0) the error density
at its median (supplied as h_inv_sq = 1/hhat^2(0)). The constant lambda* is
the root of

    lambda - ln(lambda) = 3,    lambda* ~ 4.50524...

Blocks with S_B^2 = 0 are zeroed outright. Gross (approximation)
coefficients pass through untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import ShapeMismatch
from .wavelets import CoefficientPyramid

__all__ = [
    "Block",
    "BlockPartition",
    "ShrinkageConfig",
    "ShrinkageDiagnostics",
    "solve_lambda_star",
    "default_block_cardinality",
    "partition_blocks",
    "shrink",
]


@lru_cache(maxsize=1)
def solve_lambda_star() -> float:
    """Root of lambda - ln(lambda) = 3 on (1, 10), to full precision.

    The residual of the returned value is below 1e-12; the function is
    strictly increasing on the bracket so the root is unique.
    """
    root = float(brentq(lambda x: x - math.log(x) - 3.0, 1.0, 10.0,
                        xtol=1e-14, rtol=8.9e-16))
    if abs(root - math.log(root) - 3.0) > 1e-12:  # pragma: no cover
        raise ArithmeticError("lambda* solve failed to converge")
    return root


def default_block_cardinality(n: int) -> int:
    """Default block size target L = max(1, floor(ln n))."""
    return max(1, int(math.floor(math.log(n))))


@dataclass(frozen=True)
class Block:
    """Axis-aligned hyper-rectangle inside one subband tensor."""

    bounds: tuple            # ((start, stop), ...) per axis
    cardinality: int

    def slices(self) -> tuple:
        return tuple(slice(a, b) for a, b in self.bounds)


@dataclass(frozen=True)
class BlockPartition:
    """Disjoint cover of every detail subband by blocks."""

    q: int
    side: int
    target_cardinality: int
    blocks: dict = field(repr=False)   # (level, subband) -> list[Block]

    def all_blocks(self):
        for key in sorted(self.blocks):
            for b in self.blocks[key]:
                yield key, b


def _block_side(L: int, q: int) -> int:
    """Largest integer side with side**q <= L (at least 1), exactly."""
    side = max(1, int(round(L ** (1.0 / q))))
    while side > 1 and side ** q > L:
        side -= 1
    while (side + 1) ** q <= L:
        side += 1
    return side


@dataclass(frozen=True)
class ShrinkageConfig:
    """Parameters of the shrinkage rule.

    ``h_inv_sq`` is 1/hhat^2(0); ``block_cardinality`` is the target L.
    """

    n: int
    h_inv_sq: float
    block_cardinality: int
    lambda_star: float = None

    def __post_init__(self):
        if self.lambda_star is None:
            object.__setattr__(self, "lambda_star", solve_lambda_star())
        if not 4.505 < self.lambda_star < 4.506:
            raise ShapeMismatch(
                f"lambda_star={self.lambda_star} outside (4.505, 4.506)"
            )
        if self.block_cardinality < 1:
            raise ShapeMismatch("block_cardinality must be >= 1")
        if self.n < 1:
            raise ShapeMismatch("n must be >= 1")
        if not (np.isfinite(self.h_inv_sq) and self.h_inv_sq > 0):
            raise ShapeMismatch("h_inv_sq must be positive and finite")


def partition_blocks(pyramid: CoefficientPyramid,
                     config: ShrinkageConfig) -> BlockPartition:
    """Tile every detail subband of ``pyramid`` into blocks.

    Only the pyramid's level/subband geometry is consulted, never the
    coefficient values; energies are computed at shrink time.
    """
    side = _block_side(config.block_cardinality, pyramid.q)
    blocks = {}
    for j in pyramid.levels():
        size = 2 ** j
        starts = list(range(0, size, side))
        for i in pyramid.subband_indices():
            subband_blocks = []
            # cartesian product of per-axis tile starts
            def walk(axis, bounds):
                if axis == pyramid.q:
                    card = 1
                    for a, b in bounds:
                        card *= (b - a)
                    subband_blocks.append(Block(tuple(bounds), card))
                    return
                for st in starts:
                    walk(axis + 1, bounds + [(st, min(st + side, size))])
            walk(0, [])
            blocks[(j, i)] = subband_blocks
    return BlockPartition(q=pyramid.q, side=side,
                          target_cardinality=config.block_cardinality,
                          blocks=blocks)


@dataclass
class ShrinkageDiagnostics:
    """What the shrinkage step did, per level and overall."""

    blocks_per_level: dict = field(default_factory=dict)
    zeroed_per_level: dict = field(default_factory=dict)
    factor_histogram: np.ndarray = field(
        default_factory=lambda: np.zeros(10, dtype=int)
    )  # 10 equal bins on [0, 1]; factor 1.0 counts in the last bin
    factor_min: float = 1.0
    factor_mean: float = 1.0
    total_blocks: int = 0

    def record(self, level: int, factor: float) -> None:
        self.blocks_per_level[level] = self.blocks_per_level.get(level, 0) + 1
        if factor == 0.0:
            self.zeroed_per_level[level] = self.zeroed_per_level.get(level, 0) + 1
        self.factor_histogram[min(int(factor * 10), 9)] += 1
        self.factor_min = min(self.factor_min, factor)
        # running mean
        self.factor_mean += (factor - self.factor_mean) / (self.total_blocks + 1)
        self.total_blocks += 1


def shrink(pyramid: CoefficientPyramid, partition: BlockPartition,
           config: ShrinkageConfig):
    """Apply the block James-Stein rule; returns (new pyramid, diagnostics).

    The gross tensor is passed through bit-identically; every detail block
    is multiplied by its factor c_B (with S_B^2 = 0 forcing c_B = 0).
    """
    for j in pyramid.levels():
        for i in pyramid.subband_indices():
            if (j, i) not in partition.blocks:
                raise ShapeMismatch(f"partition lacks subband ({j}, {i})")
    out = pyramid.copy()
    diag = ShrinkageDiagnostics()
    lam = config.lambda_star
    scale = 4.0 * config.n / config.h_inv_sq   # = 4 hhat^2(0) n
    for (j, i), block_list in sorted(partition.blocks.items()):
        src = pyramid.details[(j, i)]
        dst = out.details[(j, i)]
        for block in block_list:
            sl = block.slices()
            s2 = float(np.sum(src[sl] ** 2))
            if s2 <= 0.0:
                factor = 0.0
            else:
                factor = max(0.0, 1.0 - lam * block.cardinality / (scale * s2))
            if factor == 0.0:
                dst[sl] = 0.0
            elif factor != 1.0:
                dst[sl] = src[sl] * factor
            diag.record(j, factor)
    return out, diag
