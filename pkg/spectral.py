"""
Spectral evaluation of the velocity autocorrelation and of the mean square
displacement from the single-cell trace (1/N) Tr[B^-n J B^n J] of a local unitary B.

With B|j> = exp(i phi_j)|j> and J_jk = <j|J|k>:

    C_n     = (1/N) sum_jk |J_jk|^2 exp(i alpha_jk n),    alpha_jk = phi_j - phi_k
    msd(t)  = (t^2/N) sum_j |J_jj|^2
              + sum_{j!=k} (|J_jk|^2/N) sin^2(alpha_jk t/2) / sin^2(alpha_jk/2)

Pairs with |alpha_jk| <= degeneracy_tol contribute |J_jk|^2 t^2 / N instead.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.linalg import eigh, schur

from baker_core import LocalUnitary, velocity_block
from errors import (
    APP_LOGGER_NAME,
    InvalidArgumentError,
    NoCrossoverError,
    NumericalFailureError,
    UndefinedPlateauError,
)

LOGGER = logging.getLogger(APP_LOGGER_NAME)

TWO_PI = 2.0 * np.pi

DEGENERACY_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-10
SUM_RULE_TOL = 1e-8
IMAG_TOL = 1e-10
PLATEAU_WEIGHT_TOL = 1e-8
ZERO_BALLISTIC_TOL = 1e-12

# (times x pairs) block size for the oscillating sum
_CHUNK_ELEMENTS = 4_000_000

MSD_SOURCES = (
    "exact-spectral",
    "chain-oracle",
    "chain-direct",
    "rmt-closed-form",
    "rmt-monte-carlo",
    "classical",
)


@dataclass(frozen=True)
class MsdSeries:
    times: np.ndarray
    values: np.ndarray
    source: str
    params: dict = field(default_factory=dict)
    stderr: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.source not in MSD_SOURCES:
            raise InvalidArgumentError(f"unknown m.s.d. source {self.source!r}")
        times = np.array(self.times, dtype=np.int64)
        values = np.array(self.values, dtype=np.float64)
        if times.shape != values.shape or times.ndim != 1:
            raise InvalidArgumentError("times and values must be 1-D arrays of equal length")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if self.stderr is not None:
            stderr = np.array(self.stderr, dtype=np.float64)
            if stderr.shape != values.shape:
                raise InvalidArgumentError("stderr must match values in length")
            stderr.setflags(write=False)
            object.__setattr__(self, "stderr", stderr)

    def __len__(self) -> int:
        return int(self.times.size)

    def value_at(self, t: int) -> float:
        idx = np.flatnonzero(self.times == t)
        if idx.size == 0:
            raise KeyError(t)
        return float(self.values[idx[0]])

    def bound_violations(self, tol: float = 1e-8) -> np.ndarray:
        """Times where 0 <= msd(t) <= t^2 fails by more than tol."""
        t2 = self.times.astype(np.float64) ** 2
        bad = (self.values < -tol) | (self.values > t2 + tol)
        return self.times[bad]

    def to_frame(self) -> pd.DataFrame:
        data = {"t": self.times, "msd": self.values}
        if self.stderr is not None:
            data["stderr"] = self.stderr
        return pd.DataFrame(data)


@dataclass(frozen=True)
class SpectralData:
    dim: int
    eigenphases: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)
    j_elements: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    degeneracy_tol: float = DEGENERACY_TOL
    residual: float = 0.0
    label: str = "custom"

    def phase_differences(self) -> np.ndarray:
        return wrap_phase(self.eigenphases[:, None] - self.eigenphases[None, :])


def wrap_phase(alpha):  # noqa: ANN001, ANN201
    """Map phase differences into (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(alpha, dtype=np.float64), TWO_PI)


def sine_ratio(alpha, t):  # noqa: ANN001, ANN201
    """sin^2(alpha t/2) / sin^2(alpha/2), the t^2 limit taken at alpha == 0."""
    alpha = np.asarray(alpha, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    s = np.sin(alpha / 2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.sin(alpha * t / 2.0) ** 2 / s**2
    return np.where(s == 0.0, t * t, ratio)


def _phase_clusters(phases: np.ndarray, tol: float) -> list[np.ndarray]:
    order = np.argsort(phases)
    sorted_phases = phases[order]
    breaks = np.flatnonzero(np.diff(sorted_phases) > tol) + 1
    groups = [list(g) for g in np.split(order, breaks)]
    # close the circle: last cluster may touch the first one across 2 pi
    if len(groups) > 1 and sorted_phases[0] + TWO_PI - sorted_phases[-1] <= tol:
        groups[0] = groups.pop() + groups[0]
    return [np.asarray(g, dtype=np.int64) for g in groups]


def decompose(local: LocalUnitary, degeneracy_tol: float = DEGENERACY_TOL) -> SpectralData:
    """
    Eigenphases in [0, 2 pi), orthonormal eigenvectors and J_jk = (V^+ J V)_jk.

    The complex Schur form of a normal matrix is diagonal, so the Schur
    vectors are an orthonormal eigenbasis. Inside clusters of (near-)equal
    eigenphases the basis is rotated so that J restricted to the cluster is
    diagonal.
    """
    if degeneracy_tol <= 0:
        raise InvalidArgumentError(f"degeneracy_tol must be positive, got {degeneracy_tol!r}")
    dim = local.dim
    b = local.matrix
    triangular, vectors = schur(b, output="complex")
    phases = np.mod(np.angle(np.diag(triangular)), TWO_PI)
    phases[phases >= TWO_PI] = 0.0

    signs = velocity_block(dim).signs.astype(np.float64)
    vectors = np.array(vectors, dtype=np.complex128)
    for idx in _phase_clusters(phases, degeneracy_tol):
        if idx.size < 2:
            continue
        block = vectors[:, idx]
        j_block = block.conj().T @ (signs[:, None] * block)
        _, rotation = eigh((j_block + j_block.conj().T) / 2.0)
        vectors[:, idx] = block @ rotation

    j_elements = vectors.conj().T @ (signs[:, None] * vectors)
    weights = np.abs(j_elements) ** 2

    reconstructed = (vectors * np.exp(1j * phases)[None, :]) @ vectors.conj().T
    residual = float(np.max(np.abs(b - reconstructed)))
    if residual > RECONSTRUCTION_TOL:
        raise NumericalFailureError(
            f"eigendecomposition of {local.label} (N={dim}) failed reconstruction",
            residual=residual,
        )
    v_residual = float(np.max(np.abs(vectors.conj().T @ vectors - np.eye(dim))))
    if v_residual > RECONSTRUCTION_TOL:
        raise NumericalFailureError("eigenvector matrix is not unitary", residual=v_residual)
    sum_rule = abs(float(weights.sum()) - dim)
    if sum_rule > SUM_RULE_TOL:
        raise NumericalFailureError("sum rule sum |J_jk|^2 = N violated", residual=sum_rule)

    for arr in (phases, vectors, j_elements, weights):
        arr.setflags(write=False)
    LOGGER.info(
        "Decomposed %s N=%d: reconstruction residual %.2e", local.label, dim, residual
    )
    return SpectralData(
        dim=dim,
        eigenphases=phases,
        eigenvectors=vectors,
        j_elements=j_elements,
        weights=weights,
        degeneracy_tol=degeneracy_tol,
        residual=residual,
        label=local.label,
    )


def autocorrelation(spec: SpectralData, n: int) -> float:
    if n < 0:
        raise InvalidArgumentError(f"n must be non-negative, got {n!r}")
    rotor = np.exp(1j * spec.eigenphases * n)
    value = rotor @ (spec.weights @ rotor.conj()) / spec.dim
    if abs(value.imag) > IMAG_TOL:
        raise NumericalFailureError(
            f"autocorrelation C_{n} is not real", residual=abs(value.imag)
        )
    return float(value.real)


def assemble_msd(correlations: np.ndarray) -> np.ndarray:
    """
    msd(t) = t <v^2> + 2 sum_{n=1}^{t-1} (t - n) C_n for t = 0 .. len(correlations),
    with <v^2> = 1 since v^2 = I.
    """
    c = np.asarray(correlations, dtype=np.float64)
    t_max = c.size
    times = np.arange(t_max + 1, dtype=np.float64)
    c_tail = c.copy()
    c_tail[:1] = 0.0
    n = np.arange(t_max, dtype=np.float64)
    # S0(t) = sum_{n<t} C_n, S1(t) = sum_{n<t} n C_n
    s0 = np.concatenate([[0.0], np.cumsum(c_tail)])
    s1 = np.concatenate([[0.0], np.cumsum(n * c_tail)])
    return times + 2.0 * (times * s0 - s1)


def time_axis(t_max: int, times) -> np.ndarray:  # noqa: ANN001
    if times is None:
        if t_max < 1:
            raise InvalidArgumentError(f"t_max must be >= 1, got {t_max!r}")
        return np.arange(t_max + 1, dtype=np.int64)
    axis = np.asarray(times, dtype=np.int64)
    if axis.ndim != 1 or np.any(axis < 0):
        raise InvalidArgumentError("times must be a 1-D array of non-negative integers")
    return axis


def _degenerate_mask(spec: SpectralData, tol: float) -> tuple[np.ndarray, np.ndarray]:
    alpha = spec.phase_differences()
    offdiag = ~np.eye(spec.dim, dtype=bool)
    return alpha, offdiag & (np.abs(alpha) <= tol)


def ballistic_coefficient(spec: SpectralData, degeneracy_tol: float | None = None) -> float:
    tol = spec.degeneracy_tol if degeneracy_tol is None else degeneracy_tol
    _, degenerate = _degenerate_mask(spec, tol)
    total = np.trace(spec.weights) + spec.weights[degenerate].sum()
    return float(total / spec.dim)


def msd_exact(
    spec: SpectralData,
    t_max: int,
    degeneracy_tol: float | None = None,
    times=None,  # noqa: ANN001
) -> MsdSeries:
    tol = spec.degeneracy_tol if degeneracy_tol is None else degeneracy_tol
    if tol <= 0:
        raise InvalidArgumentError(f"degeneracy_tol must be positive, got {tol!r}")
    axis = time_axis(t_max, times)
    alpha, degenerate = _degenerate_mask(spec, tol)
    ballistic = ballistic_coefficient(spec, tol)

    # j < k only, each unordered pair counted twice
    upper = np.triu(~degenerate, k=1)
    pair_alpha = alpha[upper]
    pair_coeff = 2.0 * spec.weights[upper] / spec.dim / np.sin(pair_alpha / 2.0) ** 2

    t = axis.astype(np.float64)
    values = ballistic * t * t
    if pair_alpha.size:
        step = max(1, _CHUNK_ELEMENTS // pair_alpha.size)
        half = pair_alpha / 2.0
        for start in range(0, t.size, step):
            chunk = t[start : start + step]
            values[start : start + step] += (np.sin(np.outer(chunk, half)) ** 2) @ pair_coeff

    return MsdSeries(
        times=axis,
        values=values,
        source="exact-spectral",
        params={
            "N": spec.dim,
            "local": spec.label,
            "degeneracy_tol": tol,
            "reconstruction_residual": spec.residual,
            "ballistic_coefficient": ballistic,
        },
    )


def msd_from_autocorrelation(spec: SpectralData, t_max: int) -> MsdSeries:
    if t_max < 1:
        raise InvalidArgumentError(f"t_max must be >= 1, got {t_max!r}")
    c = np.array([autocorrelation(spec, n) for n in range(t_max)])
    return MsdSeries(
        times=np.arange(t_max + 1),
        values=assemble_msd(c),
        source="exact-spectral",
        params={"N": spec.dim, "local": spec.label, "assembly": "autocorrelation"},
    )


def plateau_value(spec: SpectralData) -> float:
    """Time average sum_{j!=k} |J_jk|^2 / (2N sin^2(alpha_jk/2)) of a bounded m.s.d."""
    alpha, degenerate = _degenerate_mask(spec, spec.degeneracy_tol)
    diag_amp = np.sqrt(np.diag(spec.weights))
    if np.any(diag_amp > PLATEAU_WEIGHT_TOL):
        raise UndefinedPlateauError(
            f"{spec.label}: max |J_jj| = {diag_amp.max():.3e}, the m.s.d. grows ballistically"
        )
    if np.any(np.sqrt(spec.weights[degenerate]) > PLATEAU_WEIGHT_TOL):
        raise UndefinedPlateauError(
            f"{spec.label}: degenerate eigenphase pairs carry velocity weight"
        )
    pairs = ~degenerate & ~np.eye(spec.dim, dtype=bool)
    value = spec.weights[pairs] / (2.0 * spec.dim * np.sin(alpha[pairs] / 2.0) ** 2)
    return float(value.sum())


def crossover_time(spec: SpectralData) -> float:
    """Time where the ballistic term b t^2 overtakes the diffusive term t."""
    b = ballistic_coefficient(spec)
    if b <= ZERO_BALLISTIC_TOL:
        raise NoCrossoverError(
            f"{spec.label} (N={spec.dim}): ballistic coefficient {b:.3e} is zero, no crossover"
        )
    return 1.0 / b
