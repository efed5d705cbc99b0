"""Special functions and integration kernels.

Complete elliptic integrals take the *parameter* ``m = k**2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DomainError

AGM_TOL = 1e-15
_AGM_MAX_ITER = 64
# below this parameter the loop bracket is summed from its power series
_SERIES_CUTOFF = 0.2


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-15
    rel_tol: float = 1e-10
    max_depth: int = 40

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError(f"abs_tol must be > 0, got {self.abs_tol}")
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be > 0, got {self.rel_tol}")
        if int(self.max_depth) != self.max_depth or self.max_depth < 1:
            raise ValueError(f"max_depth must be an integer >= 1, got {self.max_depth}")


@dataclass(frozen=True)
class OdeSpec:
    step: float
    t_start: float
    t_end: float

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"step must be > 0, got {self.step}")
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")
        if (self.t_end - self.t_start) / self.step < 2:
            raise ValueError("integration window must hold at least two steps")

    @classmethod
    def over(cls, t_start: float, t_end: float, n_steps: int = 20000) -> "OdeSpec":
        return cls(step=(t_end - t_start) / n_steps, t_start=t_start, t_end=t_end)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    values: np.ndarray


DEFAULT_QUADRATURE = QuadratureSpec()


# --------------------------------------------------------------------------
# elliptic integrals
# --------------------------------------------------------------------------

def _ke_scalar(m: float) -> tuple[float, float]:
    """K(m) and E(m) by the arithmetic-geometric mean with the Gauss sum."""
    a, b = 1.0, math.sqrt(1.0 - m)
    c2 = m
    weight = 0.5
    acc = weight * c2
    for _ in range(_AGM_MAX_ITER):
        if abs(a - b) <= AGM_TOL * a:
            break
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        weight *= 2.0
        acc += weight * c * c
    k = math.pi / (2.0 * a)
    return k, k * (1.0 - acc)


def _ke_array(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.ones_like(m)
    b = np.sqrt(1.0 - m)
    weight = 0.5
    acc = weight * m
    for _ in range(_AGM_MAX_ITER):
        if np.all(np.abs(a - b) <= AGM_TOL * a):
            break
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), np.sqrt(a * b)
        weight *= 2.0
        acc = acc + weight * c * c
    k = np.pi / (2.0 * a)
    return k, k * (1.0 - acc)


def _check_parameter(m, allow_one: bool) -> None:
    arr = np.asarray(m, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError(f"elliptic parameter must be >= 0, got {m}")
    if allow_one:
        if np.any(arr > 1):
            raise DomainError(f"elliptic parameter must be <= 1, got {m}")
    elif np.any(arr >= 1):
        raise DomainError(f"elliptic parameter must be < 1, got {m}")


def ellip_k(m):
    """Complete elliptic integral of the first kind, K(m), for 0 <= m < 1."""
    _check_parameter(m, allow_one=False)
    if np.ndim(m) == 0:
        return _ke_scalar(float(m))[0]
    return _ke_array(np.asarray(m, dtype=float))[0]


def ellip_e(m):
    """Complete elliptic integral of the second kind, E(m), for 0 <= m <= 1."""
    _check_parameter(m, allow_one=True)
    if np.ndim(m) == 0:
        m = float(m)
        if m == 1.0:
            return 1.0
        return _ke_scalar(m)[1]
    arr = np.asarray(m, dtype=float)
    at_one = arr == 1.0
    _, e = _ke_array(np.where(at_one, 0.0, arr))
    return np.where(at_one, 1.0, e)


def _bracket_series_scalar(m: float) -> float:
    # (1 - m/2)K - E = (pi/4) * sum_{n>=2} c_{n-1} (n-1)/n m^n,  c_n = ((1/2)_n / n!)^2
    c_prev = 0.25  # c_1
    mn = m * m
    total = 0.0
    for n in range(2, 400):
        term = c_prev * (n - 1) / n * mn
        total += term
        if term <= 1e-17 * total:
            break
        c_prev *= ((2 * n - 1) / (2 * n)) ** 2
        mn *= m
    return 0.25 * math.pi * total


def ellip_loop_bracket(m):
    """Return (1 - m/2) K(m) - E(m), the bracket in the current-loop potential.

    The direct difference cancels catastrophically for small ``m`` (the
    result is ~ pi m**2 / 32), so small parameters go through the power series.
    """
    if type(m) is float and 0.0 <= m < 1.0:
        # hot path for scalar callers
        if m < _SERIES_CUTOFF:
            return _bracket_series_scalar(m)
        k, e = _ke_scalar(m)
        return (1.0 - 0.5 * m) * k - e
    _check_parameter(m, allow_one=False)
    if np.ndim(m) == 0:
        m = float(m)
        if m < _SERIES_CUTOFF:
            return _bracket_series_scalar(m)
        k, e = _ke_scalar(m)
        return (1.0 - 0.5 * m) * k - e
    arr = np.asarray(m, dtype=float)
    out = np.empty_like(arr)
    small = arr < _SERIES_CUTOFF
    if np.any(~small):
        k, e = _ke_array(arr[~small])
        out[~small] = (1.0 - 0.5 * arr[~small]) * k - e
    if np.any(small):
        out[small] = [_bracket_series_scalar(v) for v in arr[small].ravel()]
    return out


# --------------------------------------------------------------------------
# quadrature
# --------------------------------------------------------------------------

_INITIAL_PANELS = 16


def integrate(f: Callable[[float], float], a: float, b: float,
              spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Adaptive Simpson quadrature of ``f`` over ``[a, b]``.

    The relative tolerance is measured against a coarse estimate of the
    integral of ``|f|``, so odd integrands with near-zero net area still
    terminate. Raises :class:`ConvergenceError` if a subinterval reaches
    ``spec.max_depth`` halvings without meeting its share of the tolerance.
    """
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")

    def fv(x):
        y = f(x)
        if not math.isfinite(y):
            raise ValueError(f"integrand is not finite at x={x}: {y}")
        return y

    n = 2 * _INITIAL_PANELS
    xs = [a + (b - a) * i / n for i in range(n + 1)]
    xs[-1] = b
    ys = [fv(x) for x in xs]
    h = (b - a) / n
    scale = h / 3.0 * sum(abs(y) * (1 if i in (0, n) else 4 if i % 2 else 2)
                          for i, y in enumerate(ys))
    tol_total = max(spec.abs_tol, spec.rel_tol * scale)

    pieces = []
    stack = []
    for p in range(_INITIAL_PANELS - 1, -1, -1):
        i = 2 * p
        x0, x1, x2 = xs[i], xs[i + 1], xs[i + 2]
        y0, y1, y2 = ys[i], ys[i + 1], ys[i + 2]
        whole = (x2 - x0) / 6.0 * (y0 + 4.0 * y1 + y2)
        stack.append((x0, x1, x2, y0, y1, y2, whole, tol_total / _INITIAL_PANELS, 0))

    while stack:
        x0, x1, x2, y0, y1, y2, whole, tol, depth = stack.pop()
        xl, xr = 0.5 * (x0 + x1), 0.5 * (x1 + x2)
        yl, yr = fv(xl), fv(xr)
        left = (x1 - x0) / 6.0 * (y0 + 4.0 * yl + y1)
        right = (x2 - x1) / 6.0 * (y1 + 4.0 * yr + y2)
        delta = left + right - whole
        if abs(delta) <= 15.0 * tol:
            pieces.append(left + right + delta / 15.0)
            continue
        if depth + 1 >= spec.max_depth:
            raise ConvergenceError(
                f"adaptive Simpson hit max_depth={spec.max_depth} on [{x0}, {x2}]")
        stack.append((x1, xr, x2, y1, yr, y2, right, 0.5 * tol, depth + 1))
        stack.append((x0, xl, x1, y0, yl, y1, left, 0.5 * tol, depth + 1))
    return math.fsum(pieces)


# --------------------------------------------------------------------------
# ODE
# --------------------------------------------------------------------------

def ode_grid(spec: OdeSpec) -> np.ndarray:
    """Time nodes used by :func:`solve_ode` for ``spec``."""
    span = spec.t_end - spec.t_start
    n = max(2, math.ceil(span / spec.step - 1e-9))
    times = spec.t_start + (span / n) * np.arange(n + 1)
    times[-1] = spec.t_end
    return times


def solve_ode(rhs: Callable[[float, float], float], y0: float, spec: OdeSpec) -> Trajectory:
    """Classical fixed-step RK4 for a scalar ODE ``dy/dt = rhs(t, y)``.

    The window is split into ``ceil((t_end - t_start) / step)`` equal steps,
    so the step actually taken never exceeds ``spec.step``.
    """
    times = ode_grid(spec)
    n = times.size - 1
    dt = (spec.t_end - spec.t_start) / n
    values = np.empty(n + 1)
    y = float(y0)
    values[0] = y

    def g(t, y):
        d = rhs(t, y)
        if not math.isfinite(d):
            raise ValueError(f"rhs returned non-finite value {d} at t={t}")
        return d

    for i in range(n):
        t = times[i]
        k1 = g(t, y)
        k2 = g(t + 0.5 * dt, y + 0.5 * dt * k1)
        k3 = g(t + 0.5 * dt, y + 0.5 * dt * k2)
        k4 = g(t + dt, y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        values[i + 1] = y
    return Trajectory(times, values)
