"""Constants, electron and tube descriptions, kinematics and the loop model."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedModeError


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants, CODATA 2018."""

    e: float = 1.602176634e-19
    m_e: float = 9.1093837015e-31
    hbar: float = 1.054571817e-34
    mu_B: float = 9.2740100783e-24
    c: float = 299792458.0
    mu0: float = 1.25663706212e-6

    def __post_init__(self):
        for name in ("e", "m_e", "hbar", "mu_B", "c", "mu0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"constant {name} must be positive")

    @property
    def rest_energy_ev(self) -> float:
        return self.m_e * self.c**2 / self.e

    def check_consistency(self, rtol: float = 1e-6) -> None:
        bohr = self.e * self.hbar / (2.0 * self.m_e)
        if abs(bohr - self.mu_B) > rtol * self.mu_B:
            raise ValueError(f"mu_B={self.mu_B} inconsistent with e*hbar/2m_e={bohr}")


CODATA2018 = PhysicalConstants()


@dataclass(frozen=True)
class ElectronState:
    """An OAM-carrying electron in the lowest (p = 0, n = 0) mode.

    ``kinetic_energy`` is in eV, ``waist`` (w0) in metres.
    """

    kinetic_energy: float
    oam: int
    waist: float
    radial_index: int = 0
    longitudinal_index: int = 0

    def __post_init__(self):
        if not self.kinetic_energy > 0:
            raise ValueError(f"kinetic_energy must be > 0 eV, got {self.kinetic_energy}")
        if not self.waist > 0:
            raise ValueError(f"waist must be > 0 m, got {self.waist}")
        if int(self.oam) != self.oam:
            raise ValueError(f"oam must be an integer, got {self.oam}")
        object.__setattr__(self, "oam", int(self.oam))
        if self.radial_index != 0 or self.longitudinal_index != 0:
            raise UnsupportedModeError(
                f"only p=0, n=0 is supported (got p={self.radial_index}, "
                f"n={self.longitudinal_index})")

    def with_oam(self, oam: int) -> "ElectronState":
        return ElectronState(self.kinetic_energy, oam, self.waist)


@dataclass(frozen=True)
class Kinematics:
    gamma: float
    beta: float
    speed: float
    momentum: float
    m_e: float

    @property
    def velocity_factor(self) -> float:
        """p0 / m_e, the velocity prefactor of the induced-current formula (= gamma*beta*c)."""
        return self.momentum / self.m_e


def kinematics_from_energy(electron: ElectronState,
                           constants: PhysicalConstants = CODATA2018) -> Kinematics:
    gamma = 1.0 + electron.kinetic_energy / constants.rest_energy_ev
    # 1 - 1/gamma^2 written to keep precision for tiny kinetic energies
    x = electron.kinetic_energy / constants.rest_energy_ev
    beta = math.sqrt(x * (x + 2.0)) / (1.0 + x)
    momentum = gamma * constants.m_e * beta * constants.c
    return Kinematics(gamma=gamma, beta=beta, speed=beta * constants.c,
                      momentum=momentum, m_e=constants.m_e)


def kinetic_energy_from_gamma(gamma: float, constants: PhysicalConstants = CODATA2018) -> float:
    return (gamma - 1.0) * constants.rest_energy_ev


def lg_radial_density(r: float, electron: ElectronState):
    """Unnormalised p = 0 Laguerre-Gauss intensity, (r/w0)^(2|l|) exp(-2 r^2 / w0^2).

    Scaling by w0 only changes the normalisation and avoids underflow at large |l|.
    Accepts scalars or arrays.
    """
    if electron.radial_index != 0:
        raise UnsupportedModeError("only p=0 radial profiles are supported")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be >= 0")
    rho = r / electron.waist
    out = rho ** (2 * abs(electron.oam)) * np.exp(-2.0 * rho**2)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LoopModel:
    """Localised current loop standing in for the electron's azimuthal current.

    ``loop_current`` is the magnitude I_e; the sign of the OAM rides on
    ``dipole_moment`` and :attr:`signed_current`.
    """

    r_ell: float
    loop_current: float
    dipole_moment: float

    @property
    def signed_current(self) -> float:
        return math.copysign(self.loop_current, self.dipole_moment) if self.dipole_moment else 0.0


def loop_model(electron: ElectronState, constants: PhysicalConstants = CODATA2018) -> LoopModel:
    ell = electron.oam
    w0 = electron.waist
    current = constants.e * constants.hbar / (math.pi * constants.m_e * w0**2)
    return LoopModel(r_ell=w0 * math.sqrt(abs(ell) / 2.0),
                     loop_current=current,
                     dipole_moment=ell * constants.mu_B)


@dataclass(frozen=True)
class Tube:
    """Conducting tube: radius a, wall thickness w, length L (all metres)."""

    radius: float
    thickness: float
    length: float
    conductivity: float
    rel_permeability: float = 1.0

    def __post_init__(self):
        for name in ("radius", "thickness", "length", "conductivity", "rel_permeability"):
            if not getattr(self, name) > 0:
                raise ValueError(f"tube {name} must be positive, got {getattr(self, name)}")

    def check_loop(self, loop: LoopModel) -> bool:
        """Warn when the tube radius is not much larger than the electron's ring."""
        if self.radius < 5.0 * loop.r_ell:
            warnings.warn(
                f"tube radius {self.radius:g} m is below 5 r_ell ({loop.r_ell:g} m); "
                "the localised-loop picture is unreliable", RuntimeWarning, stacklevel=2)
            return False
        return True


@dataclass(frozen=True)
class FourCurrent:
    charge_component: float
    radial: float
    azimuthal: float
    longitudinal: float

    def minkowski_norm(self) -> float:
        return self.charge_component**2 - self.radial**2 - self.azimuthal**2 - self.longitudinal**2


def rest_four_current(r: float, probability_density: float, electron: ElectronState,
                      constants: PhysicalConstants = CODATA2018) -> FourCurrent:
    """Rest-frame four-current (c rho, 0, hbar l P / (m_e r), 0) at radius ``r``."""
    return FourCurrent(
        charge_component=-constants.c * constants.e * probability_density,
        radial=0.0,
        azimuthal=constants.hbar * electron.oam * probability_density / (constants.m_e * r),
        longitudinal=0.0,
    )


def boost_four_current(rest: FourCurrent, kin: Kinematics) -> FourCurrent:
    """Lab-frame four-current of a source moving with velocity beta*c along +z."""
    if rest.radial != 0 or rest.longitudinal != 0:
        raise ValueError("rest-frame current must have zero radial and longitudinal parts")
    g, b = kin.gamma, kin.beta
    return FourCurrent(
        charge_component=g * (rest.charge_component + b * rest.longitudinal),
        radial=0.0,
        azimuthal=rest.azimuthal,
        longitudinal=g * (rest.longitudinal + b * rest.charge_component),
    )
