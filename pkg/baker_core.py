"""
Single-cell quantum objects: Fourier kernels, the quantum baker map,
the velocity block and the alternative local unitaries.

Matrices are in the position representation, index l <-> q_l = (l + phi_q)/N.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import block_diag, polar

from errors import APP_LOGGER_NAME, InvalidArgumentError, UnitaryFileError

LOGGER = logging.getLogger(APP_LOGGER_NAME)

UNITARITY_TOL = 1e-12
UNITARY_FILE_TOL = 1e-10

LOCAL_LABELS = ("baker", "exchange", "identity", "cue-sample", "coe-sample", "custom")


@dataclass(frozen=True)
class QuantizationPhases:
    phi_q: float = 0.0
    phi_p: float = 0.0

    def __post_init__(self) -> None:
        for name in ("phi_q", "phi_p"):
            value = getattr(self, name)
            if not (0.0 <= value < 1.0):
                raise InvalidArgumentError(f"{name} must lie in [0, 1), got {value!r}")

    def as_tuple(self) -> tuple[float, float]:
        return (self.phi_q, self.phi_p)


BALAZS_VOROS = QuantizationPhases(0.0, 0.0)
SARACENO = QuantizationPhases(0.5, 0.5)


def _frozen(matrix: np.ndarray) -> np.ndarray:
    out = np.array(matrix, dtype=np.complex128, copy=True)
    out.setflags(write=False)
    return out


def _require_even(dim: int, what: str) -> None:
    if not isinstance(dim, int | np.integer) or dim < 2 or dim % 2:
        raise InvalidArgumentError(f"{what} requires an even dimension N >= 2, got {dim!r}")


def unitarity_residual(matrix: np.ndarray) -> float:
    m = np.asarray(matrix)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


@dataclass(frozen=True)
class LocalUnitary:
    dim: int
    matrix: np.ndarray = field(repr=False)
    label: str = "custom"

    def __post_init__(self) -> None:
        _require_even(self.dim, "a local unitary")
        if self.label not in LOCAL_LABELS:
            raise InvalidArgumentError(f"unknown local unitary label {self.label!r}")
        matrix = _frozen(self.matrix)
        if matrix.shape != (self.dim, self.dim):
            raise InvalidArgumentError(
                f"matrix shape {matrix.shape} does not match dim {self.dim}"
            )
        residual = unitarity_residual(matrix)
        if residual > UNITARITY_TOL:
            raise InvalidArgumentError(
                f"{self.label} matrix is not unitary (residual {residual:.3e} > {UNITARITY_TOL:g})"
            )
        object.__setattr__(self, "matrix", matrix)

    @property
    def residual(self) -> float:
        return unitarity_residual(self.matrix)


@dataclass(frozen=True)
class VelocityBlock:
    """J = diag(+1 x N/2, -1 x N/2): one-step cell displacement within a cell."""

    dim: int

    def __post_init__(self) -> None:
        _require_even(self.dim, "the velocity block")

    @property
    def signs(self) -> np.ndarray:
        half = self.dim // 2
        return np.concatenate([np.ones(half, dtype=np.int64), -np.ones(half, dtype=np.int64)])

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.signs.astype(np.float64))

    def trace(self) -> int:
        return int(self.signs.sum())

    def trace_of_square(self) -> int:
        return int((self.signs * self.signs).sum())


def fourier_kernel(dim: int, phases: QuantizationPhases = BALAZS_VOROS) -> np.ndarray:
    """
    G[k, l] = <p_k|q_l> = dim^(-1/2) exp(-i 2 pi (k + phi_p)(l + phi_q) / dim).
    """
    if not isinstance(dim, int | np.integer) or dim < 1:
        raise InvalidArgumentError(f"Fourier kernel dimension must be positive, got {dim!r}")
    k = np.arange(dim) + phases.phi_p
    l = np.arange(dim) + phases.phi_q
    return np.exp(-2j * np.pi * np.outer(k, l) / dim) / np.sqrt(dim)


def quantum_baker(dim: int, phases: QuantizationPhases = BALAZS_VOROS) -> LocalUnitary:
    """U_N = G_N^-1 blockdiag(G_{N/2}, G_{N/2}), both halves with the same phases."""
    _require_even(dim, "the quantum baker map")
    g_full = fourier_kernel(dim, phases)
    g_half = fourier_kernel(dim // 2, phases)
    matrix = g_full.conj().T @ block_diag(g_half, g_half)
    LOGGER.info(
        "Built quantum baker N=%d phases=(%g, %g) residual=%.2e",
        dim,
        phases.phi_q,
        phases.phi_p,
        unitarity_residual(matrix),
    )
    return LocalUnitary(dim=dim, matrix=matrix, label="baker")


def velocity_block(dim: int) -> VelocityBlock:
    return VelocityBlock(dim=dim)


def exchange_unitary(dim: int) -> LocalUnitary:
    """Permutation l -> (l + N/2) mod N: swaps the left and right halves."""
    _require_even(dim, "the exchange operator")
    matrix = np.zeros((dim, dim), dtype=np.complex128)
    cols = np.arange(dim)
    matrix[(cols + dim // 2) % dim, cols] = 1.0
    return LocalUnitary(dim=dim, matrix=matrix, label="exchange")


def identity_unitary(dim: int) -> LocalUnitary:
    _require_even(dim, "the identity map")
    return LocalUnitary(dim=dim, matrix=np.eye(dim, dtype=np.complex128), label="identity")


def _parse_complex(token: str) -> complex:
    re_part, sep, im_part = token.partition(",")
    if not sep:
        raise ValueError(f"expected 're,im', got {token!r}")
    return complex(float(re_part), float(im_part))


def load_custom_unitary(path: str | Path) -> LocalUnitary:
    """
    Read a local unitary from the plain-text format:

        N
        re,im re,im ... (N pairs)
        ... (N rows)

    Matrices with residual above 1e-10 are rejected; accepted ones are
    replaced by the unitary factor of their polar decomposition so that
    text rounding does not leak into the 1e-12 invariant.
    """
    path = Path(path)
    try:
        lines = [ln.strip() for ln in path.read_text(encoding="utf-8").splitlines()]
    except UnicodeDecodeError as exc:
        raise UnitaryFileError(path, f"not a UTF-8 text file ({exc.reason})") from exc
    lines = [ln for ln in lines if ln]
    if not lines:
        raise UnitaryFileError(path, "file is empty")
    try:
        dim = int(lines[0])
    except ValueError as exc:
        raise UnitaryFileError(path, f"first line must be N, got {lines[0]!r}", line=1) from exc
    if dim < 2 or dim % 2:
        raise UnitaryFileError(path, f"N must be even and >= 2, got {dim}", line=1)
    if len(lines) - 1 != dim:
        raise UnitaryFileError(path, f"expected {dim} matrix rows, found {len(lines) - 1}")

    matrix = np.empty((dim, dim), dtype=np.complex128)
    for row, text in enumerate(lines[1:]):
        tokens = text.split()
        if len(tokens) != dim:
            raise UnitaryFileError(
                path, f"expected {dim} entries, found {len(tokens)}", line=row + 2
            )
        try:
            matrix[row] = [_parse_complex(tok) for tok in tokens]
        except ValueError as exc:
            raise UnitaryFileError(path, str(exc), line=row + 2) from exc

    residual = unitarity_residual(matrix)
    if residual > UNITARY_FILE_TOL:
        raise UnitaryFileError(
            path, f"matrix is not unitary (residual {residual:.3e} > {UNITARY_FILE_TOL:g})"
        )
    unitary, _ = polar(matrix)
    LOGGER.info("Loaded custom unitary N=%d from %s (residual %.2e)", dim, path, residual)
    return LocalUnitary(dim=dim, matrix=unitary, label="custom")


def save_custom_unitary(local: LocalUnitary, path: str | Path) -> Path:
    path = Path(path)
    rows = [str(local.dim)]
    for row in local.matrix:
        rows.append(" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row))
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path
