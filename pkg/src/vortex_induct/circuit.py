"""Lumped-circuit view of the induced current: RL pulse stretching and autocorrelation."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .core_model import CODATA2018, ElectronState, PhysicalConstants, Tube, kinematics_from_energy
from .induction import current_at
from .numerics import OdeSpec, ode_grid, solve_ode


@dataclass(frozen=True)
class RlCircuit:
    resistance: float
    inductance: float = 0.0

    def __post_init__(self):
        if not self.resistance > 0:
            raise ValueError(f"resistance must be > 0, got {self.resistance}")
        if not self.inductance >= 0:
            raise ValueError(f"inductance must be >= 0, got {self.inductance}")

    @classmethod
    def from_tube(cls, tube: Tube, inductance: float = 0.0,
                  resistance: float | None = None) -> "RlCircuit":
        """Azimuthal resistance of the whole wall, 2 pi a / (sigma w L), unless overridden."""
        if resistance is None:
            resistance = tube_resistance(tube)
        return cls(resistance, inductance)

    @property
    def time_constant(self) -> float:
        return self.inductance / self.resistance


def tube_resistance(tube: Tube) -> float:
    return 2.0 * math.pi * tube.radius / (tube.conductivity * tube.thickness * tube.length)


@dataclass(frozen=True)
class TimeTrace:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1 or t.size < 2:
            raise ValueError("times and values must be equal-length 1-D arrays")
        dt = np.diff(t)
        if np.any(dt <= 0) or np.max(np.abs(dt - dt[0])) > 1e-9 * dt[0]:
            raise ValueError("times must be uniform and increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def step(self) -> float:
        return float(self.times[1] - self.times[0])


def transit_time(electron: ElectronState, tube: Tube,
                 constants: PhysicalConstants = CODATA2018) -> float:
    return tube.length / kinematics_from_energy(electron, constants).speed


def exit_time(electron: ElectronState, tube: Tube,
              constants: PhysicalConstants = CODATA2018) -> float:
    """Time at which the electron leaves the tube (t = 0 at the mid-plane)."""
    return 0.5 * transit_time(electron, tube, constants)


def default_times(electron: ElectronState, tube: Tube, n: int = 20001,
                  span: float = 10.0, constants: PhysicalConstants = CODATA2018) -> np.ndarray:
    """``n`` uniform samples over [-span, +span] transit times."""
    t = span * transit_time(electron, tube, constants)
    return np.linspace(-t, t, n)


def emf_waveform(electron: ElectronState, tube: Tube, times,
                 circuit: RlCircuit | None = None,
                 constants: PhysicalConstants = CODATA2018) -> TimeTrace:
    """EMF driving the lumped circuit, I(z(t)) * R with z = v t."""
    times = np.asarray(times, dtype=float)
    if circuit is None:
        circuit = RlCircuit.from_tube(tube)
    transit = transit_time(electron, tube, constants)
    if times[0] > -5.0 * transit or times[-1] < 5.0 * transit:
        warnings.warn("time window should extend at least 5 transit times past the tube",
                      RuntimeWarning, stacklevel=2)
    z = kinematics_from_energy(electron, constants).speed * times
    return TimeTrace(times, current_at(z, electron, tube, constants) * circuit.resistance)


def rl_response(emf: TimeTrace, circuit: RlCircuit, spec: OdeSpec | None = None) -> TimeTrace:
    """Solve  emf(t) - L dI/dt = I R  with I = 0 at the first sample.

    The sampled EMF is interpolated with a cubic spline so RK4 keeps its order.
    The result is returned on the EMF grid; if ``spec`` defines a different
    grid the solution is splined back onto it.
    """
    if circuit.inductance == 0.0:
        return TimeTrace(emf.times, emf.values / circuit.resistance)
    tau = circuit.time_constant
    if spec is None:
        spec = OdeSpec.over(float(emf.times[0]), float(emf.times[-1]))
    if spec.step > 0.1 * tau:
        warnings.warn(f"ODE step {spec.step:g} s exceeds 0.1 L/R = {0.1 * tau:g} s",
                      RuntimeWarning, stacklevel=2)
    # RK4 only samples the drive on the half-step lattice; tabulate it once
    grid = ode_grid(spec)
    half = 0.5 * (grid[1] - grid[0])
    lattice = spec.t_start + half * np.arange(2 * grid.size - 1)
    drive = CubicSpline(emf.times, emf.values, extrapolate=True)(lattice)
    R, L = circuit.resistance, circuit.inductance
    t0 = spec.t_start

    def rhs(t, i):
        return (drive[int(round((t - t0) / half))] - R * i) / L

    traj = solve_ode(rhs, 0.0, spec)
    if traj.times.shape == emf.times.shape and np.allclose(traj.times, emf.times, rtol=0,
                                                          atol=1e-9 * emf.step):
        return TimeTrace(emf.times, traj.values)
    return TimeTrace(emf.times, CubicSpline(traj.times, traj.values)(emf.times))


def decay_time(trace: TimeTrace, t_exit: float) -> float:
    """1/e decay time of the current once the electron has left the tube.

    With an inductor the current lags the drive and is still swinging through
    zero at the exit instant, so the reference is the peak of the trailing
    lobe (after the last sign change, and no earlier than ``t_exit``).
    Returns ``inf`` if the trace ends before the 1/e point.
    """
    v = trace.values
    flips = np.nonzero(np.signbit(v[1:]) != np.signbit(v[:-1]))[0]
    start = int(flips[-1]) + 1 if flips.size else 0
    start = max(start, int(np.searchsorted(trace.times, t_exit)))
    if start >= v.size:
        raise ValueError("trace ends before the exit time")
    k0 = start + int(np.argmax(np.abs(v[start:])))
    i_ref = trace.values[k0]
    if i_ref == 0.0:
        return 0.0
    target = abs(i_ref) / math.e
    signed = trace.values * math.copysign(1.0, i_ref)
    below = np.nonzero(signed[k0:] <= target)[0]
    if below.size == 0:
        return math.inf
    k = k0 + int(below[0])
    t0, t1 = trace.times[k - 1], trace.times[k]
    y0, y1 = signed[k - 1], signed[k]
    t_cross = t0 + (y0 - target) / (y0 - y1) * (t1 - t0)
    return float(t_cross - trace.times[k0])


def autocorrelation(current: TimeTrace, delays, edge_fraction: float = 1e-6) -> TimeTrace:
    """C(tau) = int i(t) i(t - tau) dt at uniformly spaced ``delays``.

    The lag sequence is an exact discrete sum (the trace is taken as zero
    outside its window, where the trapezoid rule reduces to a plain sum);
    delays between lags are read off a cubic spline through it.
    """
    i = current.values
    peak = np.max(np.abs(i))
    if peak > 0 and max(abs(i[0]), abs(i[-1])) > edge_fraction * peak:
        warnings.warn("current has not decayed at the trace edges; C(tau) leaks",
                      RuntimeWarning, stacklevel=2)
    dt = current.step
    n = i.size
    lags = np.correlate(i, i, mode="full") * dt
    # symmetrise away any rounding asymmetry of the direct sum
    lags = 0.5 * (lags + lags[::-1])
    lag_t = dt * np.arange(-(n - 1), n)
    delays = np.asarray(delays, dtype=float)
    values = np.zeros_like(delays)
    inside = np.abs(delays) <= lag_t[-1]
    k = np.rint(delays / dt)
    on_grid = inside & (np.abs(delays - k * dt) <= 1e-9 * dt)
    values[on_grid] = lags[(k[on_grid] + n - 1).astype(int)]
    off = inside & ~on_grid
    if off.any():
        spline = CubicSpline(lag_t, lags)
        values[off] = 0.5 * (spline(delays[off]) + spline(-delays[off]))
    return TimeTrace(delays, values)
