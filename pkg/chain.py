"""
Quantum multi-baker propagator on a ring of L cells and the brute-force
chain-trace oracles for the single-cell reduction.

State |n, j> has flat index n*N + j. Column |n, k> with k < N/2 (left half)
moves to cell n+1, with k >= N/2 (right half) to cell n-1; the local
unitary then acts in the target cell.

On the ring M splits into L quasi-momentum sectors theta = 2 pi m / L with
M(theta) = U exp(-i theta J), so the chain trace is the sector average of
single-cell traces. The single-cell formula of module spectral is the
theta = 0 term; both coincide for L = 2, for n <= 1 and for permutation
local maps.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from baker_core import UNITARITY_TOL, LocalUnitary, unitarity_residual, velocity_block
from errors import APP_LOGGER_NAME, InvalidArgumentError, NumericalFailureError
from spectral import IMAG_TOL, MsdSeries, assemble_msd

LOGGER = logging.getLogger(APP_LOGGER_NAME)

DENSE_LIMIT = 4096
HORIZON_FACTOR = 4


@dataclass(frozen=True)
class ChainOperator:
    cells: int
    local_dim: int
    matrix: np.ndarray | sparse.csr_array = field(repr=False)
    local_label: str = "custom"
    boundary: str = "periodic"

    @property
    def size(self) -> int:
        return self.cells * self.local_dim

    @property
    def is_dense(self) -> bool:
        return isinstance(self.matrix, np.ndarray)

    def to_dense(self) -> np.ndarray:
        if self.is_dense:
            return np.array(self.matrix)
        return self.matrix.toarray()


@dataclass(frozen=True)
class CoarseObservables:
    """Diagonals of the coarse position r and velocity v on the ring."""

    position: np.ndarray
    velocity: np.ndarray

    def position_matrix(self) -> np.ndarray:
        return np.diag(self.position.astype(np.float64))

    def velocity_matrix(self) -> np.ndarray:
        return np.diag(self.velocity.astype(np.float64))


def sparse_unitarity_residual(matrix) -> float:  # noqa: ANN001
    """Max-norm of M^+ M - I without densifying M."""
    eye = sparse.csr_array(sparse.identity(matrix.shape[0], dtype=np.complex128, format="csr"))
    gram = sparse.csr_array(matrix.conj().T @ matrix - eye)
    gram.eliminate_zeros()
    return float(np.max(np.abs(gram.data))) if gram.nnz else 0.0


def build_chain(local: LocalUnitary, cells: int) -> ChainOperator:
    if not isinstance(cells, int | np.integer) or cells < 2:
        raise InvalidArgumentError(f"a chain needs at least 2 cells, got {cells!r}")
    dim = local.dim
    half = dim // 2
    size = cells * dim

    rows, cols, vals = [], [], []
    local_rows = np.repeat(np.arange(dim), dim)
    local_cols = np.tile(np.arange(dim), dim)
    entries = local.matrix[local_rows, local_cols]
    keep = entries != 0
    local_rows, local_cols, entries = local_rows[keep], local_cols[keep], entries[keep]
    hop = np.where(local_cols < half, 1, -1)
    for n in range(cells):
        target = (n + hop) % cells
        rows.append(target * dim + local_rows)
        cols.append(n * dim + local_cols)
        vals.append(entries)

    coo = sparse.coo_array(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size),
    )
    # duplicates (L = 2: both hops land in the same cell) are summed
    matrix = coo.tocsr()
    matrix.sum_duplicates()
    if size <= DENSE_LIMIT:
        matrix = matrix.toarray()
        residual = unitarity_residual(matrix)
        matrix.setflags(write=False)
    else:
        residual = sparse_unitarity_residual(matrix)
    if residual > UNITARITY_TOL:
        raise NumericalFailureError("chain operator is not unitary", residual=residual)
    LOGGER.info(
        "Built chain L=%d N=%d (%s, %s storage)",
        cells,
        dim,
        local.label,
        "dense" if size <= DENSE_LIMIT else "sparse",
    )
    return ChainOperator(cells=cells, local_dim=dim, matrix=matrix, local_label=local.label)


def coarse_observables(chain: ChainOperator) -> CoarseObservables:
    cell_index = np.repeat(np.arange(chain.cells, dtype=np.int64), chain.local_dim)
    signs = np.tile(velocity_block(chain.local_dim).signs, chain.cells)
    return CoarseObservables(position=cell_index, velocity=signs)


def _powers(chain: ChainOperator, n_max: int):  # noqa: ANN202
    """Yield M^0, M^1, ..., M^n_max."""
    m = chain.matrix
    if chain.is_dense:
        power = np.eye(chain.size, dtype=np.complex128)
    else:
        power = sparse.identity(chain.size, dtype=np.complex128, format="csr")
    for n in range(n_max + 1):
        yield n, power
        if n < n_max:
            power = m @ power


def _trace_correlation(power, velocity: np.ndarray, norm: int) -> float:  # noqa: ANN001
    # Tr[P^+ v P v] = sum_{a,b} conj(P_ba) v_b P_ba v_a
    if sparse.issparse(power):
        weighted = power.multiply(velocity[:, None]).multiply(velocity[None, :])
        value = complex(power.conj().multiply(weighted).sum())
    else:
        value = complex(np.vdot(power, velocity[:, None] * power * velocity[None, :]))
    value /= norm
    if abs(value.imag) > IMAG_TOL:
        raise NumericalFailureError("chain autocorrelation is not real", residual=abs(value.imag))
    return value.real


def chain_autocorrelation(chain: ChainOperator, n: int) -> float:
    """C_n = (1/LN) Tr[M^{+n} v M^n v]."""
    if n < 0:
        raise InvalidArgumentError(f"n must be non-negative, got {n!r}")
    velocity = coarse_observables(chain).velocity.astype(np.float64)
    power = None
    for _, power in _powers(chain, n):
        pass
    return _trace_correlation(power, velocity, chain.size)


def bloch_autocorrelation(local: LocalUnitary, cells: int, n: int) -> float:
    """C_n of the L-cell ring from its quasi-momentum sectors, without building M."""
    if n < 0:
        raise InvalidArgumentError(f"n must be non-negative, got {n!r}")
    if not isinstance(cells, int | np.integer) or cells < 1:
        raise InvalidArgumentError(f"cells must be positive, got {cells!r}")
    signs = velocity_block(local.dim).signs.astype(np.float64)
    total = 0.0
    for m in range(cells):
        theta = 2.0 * np.pi * m / cells
        sector = local.matrix * np.exp(-1j * theta * signs)[None, :]
        total += _trace_correlation(np.linalg.matrix_power(sector, n), signs, local.dim)
    return total / cells


def _check_horizon(chain: ChainOperator, t_max: int) -> None:
    if t_max < 1:
        raise InvalidArgumentError(f"t_max must be >= 1, got {t_max!r}")
    if t_max > HORIZON_FACTOR * chain.cells:
        raise InvalidArgumentError(
            f"t_max={t_max} exceeds the chain horizon {HORIZON_FACTOR}*L = "
            f"{HORIZON_FACTOR * chain.cells}"
        )


def chain_msd(chain: ChainOperator, t_max: int) -> MsdSeries:
    _check_horizon(chain, t_max)
    velocity = coarse_observables(chain).velocity.astype(np.float64)
    correlations = np.empty(t_max)
    for n, power in _powers(chain, t_max - 1):
        correlations[n] = _trace_correlation(power, velocity, chain.size)
    return MsdSeries(
        times=np.arange(t_max + 1),
        values=assemble_msd(correlations),
        source="chain-oracle",
        params={"N": chain.local_dim, "L": chain.cells, "local": chain.local_label},
    )


def chain_msd_direct(chain: ChainOperator, t_max: int) -> MsdSeries:
    """
    <(M^{+t} r M^t - r)^2> = (1/NL) sum_{a,b} |(M^t)_ba|^2 (r_b - r_a)^2,
    cell differences taken as minimum images, valid while t < L/2.
    """
    if t_max < 1:
        raise InvalidArgumentError(f"t_max must be >= 1, got {t_max!r}")
    if 2 * t_max >= chain.cells:
        raise InvalidArgumentError(
            f"direct displacement needs t_max < L/2, got t_max={t_max}, L={chain.cells}"
        )
    position = coarse_observables(chain).position
    hops = position[:, None] - position[None, :]
    hops = (hops + chain.cells // 2) % chain.cells - chain.cells // 2
    sq_hops = hops.astype(np.float64) ** 2

    values = np.empty(t_max + 1)
    for t, power in _powers(chain, t_max):
        prob = np.abs(power.toarray() if sparse.issparse(power) else power) ** 2
        values[t] = float((prob * sq_hops).sum()) / chain.size
    return MsdSeries(
        times=np.arange(t_max + 1),
        values=values,
        source="chain-direct",
        params={"N": chain.local_dim, "L": chain.cells, "local": chain.local_label},
    )
