"""
Random-matrix predictions for the m.s.d.: closed forms (CUE exact, COE in
the k = 2 approximation) and Monte-Carlo averages over sampled CUE/COE
local unitaries.
"""

import enum
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import qr

from baker_core import LocalUnitary
from errors import APP_LOGGER_NAME, InvalidArgumentError
from spectral import DEGENERACY_TOL, MsdSeries, decompose, msd_exact, time_axis

LOGGER = logging.getLogger(APP_LOGGER_NAME)


class Ensemble(enum.Enum):
    CUE = "CUE"
    COE = "COE"

    @property
    def k(self) -> int:
        return 1 if self is Ensemble.CUE else 2

    @classmethod
    def parse(cls, value: "str | Ensemble") -> "Ensemble":
        if isinstance(value, Ensemble):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError as exc:
            raise InvalidArgumentError(f"unknown ensemble {value!r} (expected CUE or COE)") from exc


@dataclass(frozen=True)
class EnsembleSpec:
    kind: Ensemble
    dim: int
    seed: int | None = None
    samples: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", Ensemble.parse(self.kind))
        if not isinstance(self.dim, int | np.integer) or self.dim < 2 or self.dim % 2:
            raise InvalidArgumentError(f"ensemble dimension must be even and >= 2, got {self.dim!r}")
        if self.samples is not None and self.samples < 1:
            raise InvalidArgumentError(f"samples must be positive, got {self.samples!r}")

    @property
    def k(self) -> int:
        return self.kind.k


def mean_jj(spec: EnsembleSpec) -> float:
    """<|J_jj|^2> = k / (N + k)."""
    return spec.k / (spec.dim + spec.k)


def mean_offdiag(spec: EnsembleSpec) -> float:
    """<|J_{j!=k}|^2> = N / ((N + k)(N - 1)), from <|J_jj|^2> + (N - 1)<|J_{j!=k}|^2> = 1."""
    if spec.dim < 2:
        raise InvalidArgumentError(f"off-diagonal average needs N >= 2, got {spec.dim!r}")
    return spec.dim / ((spec.dim + spec.k) * (spec.dim - 1))


def sum_rule_exact(spec: EnsembleSpec) -> Fraction:
    """<|J_jj|^2> + (N - 1)<|J_{j!=k}|^2> in rational arithmetic (always 1)."""
    n, k = spec.dim, spec.k
    return Fraction(k, n + k) + (n - 1) * Fraction(n, (n + k) * (n - 1))


def cue_phase_average(n: int, dim: int) -> float:
    """<exp(i(phi_j - phi_k) n)> over the CUE two-point function."""
    if n < 0:
        raise InvalidArgumentError(f"n must be non-negative, got {n!r}")
    if n == 0:
        return 1.0
    if n < dim:
        return (n - dim) / (dim * (dim - 1))
    return 0.0


def autocorrelation_closed_form(spec: EnsembleSpec, n: int) -> float:
    """Ensemble average <C_n> with the element averages and the CUE phase average."""
    if n == 0:
        return 1.0
    return mean_jj(spec) + (spec.dim - 1) * mean_offdiag(spec) * cue_phase_average(n, spec.dim)


def msd_closed_form(spec: EnsembleSpec, t_max: int, times=None) -> MsdSeries:  # noqa: ANN001
    """
    t <= N:  t + t(t-1)/(N+k) [k - 1 + (t-2)/(3(N-1))]
    t >  N:  k t^2/(N+k) + N/3 - N(k-1)/(3(N+k))
    """
    n, k = spec.dim, spec.k
    if n < 2:
        raise InvalidArgumentError(f"closed form needs N >= 2, got {n!r}")
    axis = time_axis(t_max, times)
    t = axis.astype(np.float64)
    short = t + t * (t - 1) / (n + k) * (k - 1 + (t - 2) / (3 * (n - 1)))
    long = k / (n + k) * t * t + n / 3 - n * (k - 1) / (3 * (n + k))
    values = np.where(t <= n, short, long)
    values[t == 0] = 0.0
    return MsdSeries(
        times=axis,
        values=values,
        source="rmt-closed-form",
        params={"N": n, "ensemble": spec.kind.value, "k": k},
    )


def closed_form_branch_gap(spec: EnsembleSpec) -> float:
    """|short - long| evaluated at t = N."""
    n, k = spec.dim, spec.k
    short = n + n * (n - 1) / (n + k) * (k - 1 + (n - 2) / (3 * (n - 1)))
    long = k / (n + k) * n * n + n / 3 - n * (k - 1) / (3 * (n + k))
    return abs(short - long)


def _haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))[None, :]


def sample_unitary(spec: EnsembleSpec, index: int) -> LocalUnitary:
    """
    Deterministic in (seed, index): CUE is Haar (QR with phase fix),
    COE is U^T U with U Haar.
    """
    if spec.seed is None:
        raise InvalidArgumentError("sampling requires an ensemble seed")
    rng = np.random.default_rng([int(spec.seed) & 0xFFFFFFFFFFFFFFFF, int(index)])
    u = _haar_unitary(spec.dim, rng)
    if spec.kind is Ensemble.CUE:
        return LocalUnitary(dim=spec.dim, matrix=u, label="cue-sample")
    coe = u.T @ u
    coe = (coe + coe.T) / 2.0
    return LocalUnitary(dim=spec.dim, matrix=coe, label="coe-sample")


def _sample_msd(spec: EnsembleSpec, index: int, axis: np.ndarray, tol: float) -> np.ndarray:
    local = sample_unitary(spec, index)
    return msd_exact(decompose(local, tol), int(axis.max()), times=axis).values


def msd_monte_carlo(
    spec: EnsembleSpec,
    t_max: int,
    degeneracy_tol: float = DEGENERACY_TOL,
    times=None,  # noqa: ANN001
    workers: int = 1,
) -> MsdSeries:
    """Mean of the exact m.s.d. over samples, with per-t standard errors of the mean."""
    if spec.samples is None or spec.samples < 2:
        raise InvalidArgumentError(f"Monte-Carlo needs samples >= 2, got {spec.samples!r}")
    axis = time_axis(t_max, times)
    LOGGER.info(
        "Monte-Carlo %s N=%d: %d samples, seed=%s, workers=%d",
        spec.kind.value,
        spec.dim,
        spec.samples,
        spec.seed,
        workers,
    )
    indices = range(spec.samples)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda i: _sample_msd(spec, i, axis, degeneracy_tol), indices))
    else:
        rows = [_sample_msd(spec, i, axis, degeneracy_tol) for i in indices]
    # rows stay in sample order, so the reduction does not depend on workers
    stacked = np.vstack(rows)
    mean = stacked.mean(axis=0)
    stderr = stacked.std(axis=0, ddof=1) / np.sqrt(spec.samples)
    return MsdSeries(
        times=axis,
        values=mean,
        stderr=stderr,
        source="rmt-monte-carlo",
        params={
            "N": spec.dim,
            "ensemble": spec.kind.value,
            "k": spec.k,
            "samples": spec.samples,
            "seed": spec.seed,
            "degeneracy_tol": degeneracy_tol,
        },
    )
