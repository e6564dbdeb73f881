"""Evolution operator ``U(z) = exp(i z C)``, field propagation and the
closed-form displaced-Fock-state amplitudes.

With the coupling matrix equal to ``C1 (a + a^dagger)`` on the truncated
number basis, ``U(z)`` coincides with the displacement operator
``D(i C1 z)`` as long as light does not reach the last site.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .errors import InvalidArgumentError, NumericalError
from .lattice import CouplingMatrix

#: Largest Fock index accepted by :func:`dfs_amplitude`.
DFS_MAX_INDEX = 170

#: Relative floor used by :func:`count_maxima` when none is given.
DEFAULT_MAXIMA_FLOOR = 1e-6

#: Tail weight above which a truncated lattice no longer mimics the semi-infinite one.
TAIL_LEAKAGE_WARNING = 1e-6


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Spectrum:
    """Eigen-decomposition ``C = V diag(w) V^T`` of a coupling matrix."""

    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def phases(self, z) -> np.ndarray:
        return np.exp(1j * np.multiply.outer(z, self.eigenvalues))


def spectrum(matrix: CouplingMatrix) -> Spectrum:
    diag = np.zeros(matrix.dim)
    try:
        w, v = eigh_tridiagonal(diag, np.asarray(matrix.off_diagonal, dtype=float))
    except (LinAlgError, ValueError) as exc:
        raise NumericalError(
            f"tridiagonal eigendecomposition failed for N={matrix.dim}, "
            f"max coupling {matrix.profile.max_coupling:.6g}: {exc}"
        ) from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
        raise NumericalError(f"non-finite eigenpairs for N={matrix.dim}")
    return Spectrum(_readonly(w), _readonly(v))


@dataclass(frozen=True)
class EvolutionOperator:
    """Unitary ``U(z)`` together with the matrix and spectrum it came from."""

    matrix: CouplingMatrix
    z: float
    entries: np.ndarray = field(repr=False)
    spectrum: Spectrum = field(repr=False)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def base_coupling(self) -> float:
        return self.matrix.profile.base_coupling

    def column(self, k: int) -> np.ndarray:
        _check_site(k, self.dim)
        return self.entries[:, k]


@dataclass(frozen=True)
class FieldState:
    amplitudes: np.ndarray = field(repr=False)
    z: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 1:
            raise InvalidArgumentError("amplitudes must be one-dimensional")
        object.__setattr__(self, "amplitudes", _readonly(amps))

    @classmethod
    def single_site(cls, n_sites: int, k: int) -> "FieldState":
        _check_site(k, n_sites)
        amps = np.zeros(n_sites, dtype=complex)
        amps[k] = 1.0
        return cls(amps, 0.0)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def intensities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def power(self) -> float:
        return float(self.intensities.sum())


@dataclass(frozen=True)
class IntensityMap:
    """Intensities ``|phi_n(z_j)|^2``; row ``j`` belongs to ``z_samples[j]``."""

    z_samples: np.ndarray = field(repr=False)
    intensities: np.ndarray = field(repr=False)

    @property
    def final_profile(self) -> np.ndarray:
        return self.intensities[-1]


def _check_site(k, n_sites):
    if int(k) != k or not 0 <= k < n_sites:
        raise InvalidArgumentError(f"site index {k!r} out of range for {n_sites} sites")


def evolution_operator(matrix: CouplingMatrix, z: float, spec: Optional[Spectrum] = None) -> EvolutionOperator:
    """Build ``U(z) = V diag(exp(i z w)) V^T``.

    Pass a precomputed ``spec`` to reuse one decomposition across many ``z``.
    Negative ``z`` back-propagates.
    """
    if not math.isfinite(z):
        raise InvalidArgumentError(f"z must be finite, got {z!r}")
    if spec is None:
        spec = spectrum(matrix)
    v = spec.eigenvectors
    u = (v * spec.phases(float(z))) @ v.T
    return EvolutionOperator(matrix, float(z), _readonly(u), spec)


def propagate(U: EvolutionOperator, field_in: FieldState) -> FieldState:
    if field_in.dim != U.dim:
        raise InvalidArgumentError(f"field has {field_in.dim} sites, operator has {U.dim}")
    return FieldState(U.entries @ field_in.amplitudes, field_in.z + U.z)


def intensity_map(matrix: CouplingMatrix, field_in: FieldState, z_grid: Sequence[float]) -> IntensityMap:
    z = np.asarray(z_grid, dtype=float)
    if z.ndim != 1 or z.size == 0:
        raise InvalidArgumentError("z_grid must be a non-empty 1-D sequence")
    if np.any(np.diff(z) < 0):
        raise InvalidArgumentError("z_grid must be sorted ascending")
    if field_in.dim != matrix.dim:
        raise InvalidArgumentError(f"field has {field_in.dim} sites, lattice has {matrix.dim}")
    spec = spectrum(matrix)
    v = spec.eigenvectors
    modal = v.T @ field_in.amplitudes
    fields = (spec.phases(z) * modal) @ v.T
    return IntensityMap(_readonly(z.copy()), _readonly(np.abs(fields) ** 2))


def tail_leakage(field_state: FieldState, tail_width: int) -> float:
    """Power in the last ``tail_width`` sites of the lattice."""
    if int(tail_width) != tail_width or not 1 <= tail_width < field_state.dim:
        raise InvalidArgumentError(f"tail_width must lie in [1, {field_state.dim}), got {tail_width!r}")
    return float(field_state.intensities[-int(tail_width):].sum())


def count_maxima(intensities: Sequence[float], floor: Optional[float] = None) -> int:
    """Count local maxima (interior and boundary) whose value exceeds ``floor``.

    Runs of equal values are treated as a single plateau. When ``floor`` is
    omitted it defaults to ``DEFAULT_MAXIMA_FLOOR`` times the peak value.
    """
    x = np.asarray(intensities, dtype=float)
    if x.size == 0:
        raise InvalidArgumentError("count_maxima needs at least one value")
    if floor is None:
        floor = DEFAULT_MAXIMA_FLOOR * float(x.max())
    if floor < 0:
        raise InvalidArgumentError(f"floor must be >= 0, got {floor!r}")
    keep = np.concatenate(([True], x[1:] != x[:-1]))
    plateaus = x[keep]
    count = 0
    for i, value in enumerate(plateaus):
        if value <= floor:
            continue
        left_ok = i == 0 or plateaus[i - 1] < value
        right_ok = i == plateaus.size - 1 or plateaus[i + 1] < value
        if left_ok and right_ok:
            count += 1
    return count


def _laguerre(n: int, a: int, x: float) -> float:
    """Generalised Laguerre polynomial ``L_n^{(a)}(x)`` by upward recurrence."""
    prev, cur = 1.0, 1.0 + a - x
    if n == 0:
        return prev
    for j in range(1, n):
        prev, cur = cur, ((2 * j + 1 + a - x) * cur - (j + a) * prev) / (j + 1)
    return cur


def dfs_amplitude(n: int, k: int, alpha: complex) -> complex:
    """Matrix element ``<n| D(alpha) |k>`` of the displacement operator.

    Uses the associated-Laguerre closed form with log-space factorial ratios,
    so it does not depend on any truncated matrix.

    Examples
    --------
    >>> abs(dfs_amplitude(0, 0, 1.0) - math.exp(-0.5)) < 1e-15
    True
    """
    if int(n) != n or int(k) != k or n < 0 or k < 0:
        raise InvalidArgumentError(f"Fock indices must be non-negative integers, got ({n!r}, {k!r})")
    n, k = int(n), int(k)
    if max(n, k) > DFS_MAX_INDEX:
        raise InvalidArgumentError(f"Fock index above {DFS_MAX_INDEX} is not supported")
    alpha = complex(alpha)
    x = abs(alpha) ** 2
    if x == 0.0:
        return complex(n == k)
    lo, hi = min(n, k), max(n, k)
    d = hi - lo
    laguerre = _laguerre(lo, d, x)
    log_mag = d * math.log(abs(alpha)) - x / 2 + 0.5 * (math.lgamma(lo + 1) - math.lgamma(hi + 1))
    unit = alpha / abs(alpha)
    if n < k:
        unit = -unit.conjugate()
    return unit**d * math.exp(log_mag) * laguerre
