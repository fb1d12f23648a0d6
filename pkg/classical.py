"""
Classical multi-baker map on a ring of L cells:

    M(n, x, y) = (n + 1, 2x,     y/2)        for 0   <= x < 1/2
                 (n - 1, 2x - 1, (1 + y)/2)  for 1/2 <= x < 1

Used as the diffusive baseline msd(t) = t.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from errors import APP_LOGGER_NAME, InvalidArgumentError
from spectral import MsdSeries

LOGGER = logging.getLogger(APP_LOGGER_NAME)

# x -> 2x mod 1 drops one mantissa bit per step; after ~52 steps every
# double has collapsed onto x = 0
MAX_CLASSICAL_STEPS = 48


@dataclass(frozen=True)
class ClassicalEnsemble:
    cells: int
    n: np.ndarray = field(repr=False)
    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    displacement: np.ndarray = field(repr=False)
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.cells < 1:
            raise InvalidArgumentError(f"cells must be positive, got {self.cells!r}")
        n = np.asarray(self.n, dtype=np.int64)
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        d = np.asarray(self.displacement, dtype=np.int64)
        if n.size < 1:
            raise InvalidArgumentError("an ensemble needs at least one point")
        if not (n.shape == x.shape == y.shape == d.shape):
            raise InvalidArgumentError("point coordinate arrays differ in length")
        if np.any((n < 0) | (n >= self.cells)):
            raise InvalidArgumentError("cell index outside [0, L)")
        if np.any((x < 0) | (x >= 1) | (y < 0) | (y >= 1)):
            raise InvalidArgumentError("x, y must lie in [0, 1)")
        for name, arr in (("n", n), ("x", x), ("y", y), ("displacement", d)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def count(self) -> int:
        return int(self.n.size)


def equilibrium_ensemble(cells: int, points: int, seed: int | None = None) -> ClassicalEnsemble:
    """Uniform density over the ring: the classical equilibrium state."""
    if points < 1:
        raise InvalidArgumentError(f"points must be positive, got {points!r}")
    rng = np.random.default_rng(seed)
    return ClassicalEnsemble(
        cells=cells,
        n=rng.integers(0, cells, size=points),
        x=rng.random(points),
        y=rng.random(points),
        displacement=np.zeros(points, dtype=np.int64),
        seed=seed,
    )


def classical_step(ens: ClassicalEnsemble) -> ClassicalEnsemble:
    # x == 1/2 belongs to the right branch
    left = ens.x < 0.5
    hop = np.where(left, 1, -1)
    x = np.where(left, 2.0 * ens.x, 2.0 * ens.x - 1.0)
    y = np.where(left, ens.y / 2.0, (1.0 + ens.y) / 2.0)
    return replace(
        ens,
        n=(ens.n + hop) % ens.cells,
        x=x,
        y=y,
        displacement=ens.displacement + hop,
    )


def classical_inverse_step(ens: ClassicalEnsemble) -> ClassicalEnsemble:
    # the image of the left branch is y < 1/2
    from_left = ens.y < 0.5
    hop = np.where(from_left, 1, -1)
    x = np.where(from_left, ens.x / 2.0, (ens.x + 1.0) / 2.0)
    y = np.where(from_left, 2.0 * ens.y, 2.0 * ens.y - 1.0)
    return replace(
        ens,
        n=(ens.n - hop) % ens.cells,
        x=x,
        y=y,
        displacement=ens.displacement - hop,
    )


def classical_msd(cells: int, points: int, t_max: int, seed: int | None = None) -> MsdSeries:
    """Mean square of the unwrapped cell displacement, started from equilibrium."""
    if t_max < 1:
        raise InvalidArgumentError(f"t_max must be >= 1, got {t_max!r}")
    if 2 * t_max >= cells:
        raise InvalidArgumentError(
            f"t_max must stay below L/2 to avoid wrap-around, got t_max={t_max}, L={cells}"
        )
    if t_max > MAX_CLASSICAL_STEPS:
        raise InvalidArgumentError(
            f"t_max={t_max} exceeds {MAX_CLASSICAL_STEPS} steps of double-precision doubling"
        )
    ens = equilibrium_ensemble(cells, points, seed)
    values = np.zeros(t_max + 1)
    stderr = np.zeros(t_max + 1)
    for t in range(1, t_max + 1):
        ens = classical_step(ens)
        sq = ens.displacement.astype(np.float64) ** 2
        values[t] = sq.mean()
        stderr[t] = sq.std(ddof=1) / np.sqrt(points) if points > 1 else 0.0
    LOGGER.info("Classical m.s.d. L=%d points=%d t_max=%d seed=%s", cells, points, t_max, seed)
    return MsdSeries(
        times=np.arange(t_max + 1),
        values=values,
        stderr=stderr,
        source="classical",
        params={"L": cells, "points": points, "seed": seed},
    )
