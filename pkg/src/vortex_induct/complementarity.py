"""Which-path marking by the measurement loops and the resulting fringe visibility.

Each path carries a circuit whose state, after the electron passes, is
|i> = sum_n c_n |n> in the basis of current eigenstates (n = 0: no current).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_NORM_TOL = 1e-12


@dataclass(frozen=True)
class CircuitQuantumState:
    amplitudes: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.amplitudes, dtype=complex)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("amplitudes must be a non-empty 1-D array")
        norm = float(np.vdot(c, c).real)
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"circuit state not normalised: sum |c_n|^2 = {norm}")
        object.__setattr__(self, "amplitudes", c)

    @classmethod
    def normalized(cls, amplitudes) -> "CircuitQuantumState":
        c = np.asarray(amplitudes, dtype=complex)
        return cls(c / math.sqrt(float(np.vdot(c, c).real)))

    @classmethod
    def ground(cls, dim: int = 16) -> "CircuitQuantumState":
        c = np.zeros(dim, dtype=complex)
        c[0] = 1.0
        return cls(c)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def vacuum_overlap(self) -> complex:
        """<0|i>, i.e. c_0."""
        return complex(self.amplitudes[0])


def coherent_circuit_state(coupling: complex, dim: int = 16) -> CircuitQuantumState:
    """Illustrative excitation family c_n ~ coupling^n / sqrt(n!), truncated to ``dim`` levels.

    Untruncated, |c_0|^2 = exp(-|coupling|^2), so ``coupling`` works as a
    smooth knob between no marking (0) and near-perfect marking (large).
    """
    n = np.arange(dim)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    lam = complex(coupling)
    if lam == 0:
        return CircuitQuantumState.ground(dim)
    mag = np.exp(n * math.log(abs(lam)) - 0.5 * log_fact)
    phase = np.exp(1j * n * np.angle(lam))
    return CircuitQuantumState.normalized(mag * phase)


@dataclass(frozen=True)
class PathState:
    """a_u |u> + e^{i delta} a_d |d>."""

    relative_phase: float = 0.0
    amplitude_u: complex = 1 / math.sqrt(2)
    amplitude_d: complex = 1 / math.sqrt(2)

    def __post_init__(self):
        norm = abs(self.amplitude_u) ** 2 + abs(self.amplitude_d) ** 2
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"path state not normalised: {norm}")

    @property
    def coefficients(self) -> tuple[complex, complex]:
        return complex(self.amplitude_u), complex(self.amplitude_d) * np.exp(1j * self.relative_phase)


@dataclass(frozen=True)
class ReducedDensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.entries, dtype=complex)
        if rho.shape != (2, 2):
            raise ValueError("expected a 2x2 matrix")
        if np.max(np.abs(rho - rho.conj().T)) > _NORM_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > _NORM_TOL:
            raise ValueError("density matrix does not have unit trace")
        if np.min(np.linalg.eigvalsh(rho)) < -_NORM_TOL:
            raise ValueError("density matrix is not positive semidefinite")
        object.__setattr__(self, "entries", rho)

    @property
    def purity(self) -> float:
        return float(np.trace(self.entries @ self.entries).real)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)


def alpha_coefficient(state_u: CircuitQuantumState, state_d: CircuitQuantumState) -> complex:
    """alpha = <0_u|i_u> <i_d|0_d> = c0_u * conj(c0_d)."""
    return state_u.vacuum_overlap * state_d.vacuum_overlap.conjugate()


def reduced_density(path: PathState, state_u: CircuitQuantumState,
                    state_d: CircuitQuantumState) -> ReducedDensityMatrix:
    """Electron path density matrix after tracing out both circuits.

    Final state: a_u |u>|i_u>|0_d> + a_d' |d>|0_u>|i_d>. Tracing the circuits
    leaves rho_ud = a_u conj(a_d') <0_u|i_u><i_d|0_d> = a_u conj(a_d') alpha.
    """
    au, ad = path.coefficients
    off = au * ad.conjugate() * alpha_coefficient(state_u, state_d)
    rho = np.array([[abs(au) ** 2, off], [off.conjugate(), abs(ad) ** 2]], dtype=complex)
    return ReducedDensityMatrix(rho)


def visibility(rho: ReducedDensityMatrix) -> float:
    return float(2.0 * abs(rho.entries[0, 1]))


def distinguishability(state_u: CircuitQuantumState, state_d: CircuitQuantumState) -> float:
    """Which-path distinguishability sqrt(1 - |alpha|^2) for balanced paths."""
    return math.sqrt(max(0.0, 1.0 - abs(alpha_coefficient(state_u, state_d)) ** 2))
