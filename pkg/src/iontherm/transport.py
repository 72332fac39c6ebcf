"""Coherent heating from stair-step transport of a trapped ion.

The trap minimum follows a piecewise-constant staircase (n_steps equal
position increments per leg, out and back), smoothed by the single-pole
low-pass filter on the electrode lines.  The ion is a classical point mass in
a harmonic well of fixed frequency riding that minimum,

    x''(t) = -omega^2 (x - x0(t)),

which captures coherent displacement of the quantum oscillator exactly.  The
drive is piecewise  A + B exp(-gamma (t - t0))  between voltage updates, so
the equation of motion has a closed-form solution per segment and the state
is propagated analytically with no discretization error.  Residual energy at
the end of the relax window is converted to quanta via E/(hbar omega).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .constants import ATOMIC_MASS, HBAR
from .errors import InvalidConfigError, NumericalAccuracyError


@dataclass(frozen=True)
class TransportScenario:
    """Round-trip stair-step transport of one ion along the trap axis.

    total_distance: signed leg length in meters (the ion goes out and back).
    n_steps: voltage updates per leg.
    update_frequency: voltage update rate in Hz.
    filter_cutoff: single-pole low-pass cutoff in Hz (math.inf = no filter).
    secular_frequency: axial mode frequency in Hz, held constant.
    ion_mass: atomic mass units.
    relax_time: settling window appended after the final update, seconds.
    """

    total_distance: float
    n_steps: int
    update_frequency: float
    secular_frequency: float
    ion_mass: float
    filter_cutoff: float = 60e3
    relax_time: float = 50e-6

    def __post_init__(self):
        if self.n_steps < 1:
            raise InvalidConfigError(f"n_steps must be >= 1, got {self.n_steps}")
        for name in ("update_frequency", "secular_frequency", "filter_cutoff"):
            if not (getattr(self, name) > 0):
                raise InvalidConfigError(f"{name} must be positive")
        if not (self.ion_mass > 0):
            raise InvalidConfigError("ion_mass must be positive")
        if self.relax_time < 0:
            raise InvalidConfigError("relax_time must be >= 0")

    @property
    def step_size(self) -> float:
        return self.total_distance / self.n_steps

    @property
    def update_period(self) -> float:
        return 1.0 / self.update_frequency

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.secular_frequency

    @property
    def mass_kg(self) -> float:
        return self.ion_mass * ATOMIC_MASS

    @property
    def total_duration(self) -> float:
        return 2 * self.n_steps * self.update_period + self.relax_time


@dataclass(frozen=True)
class TransportResult:
    """Residual coherent excitation after one round trip."""

    final_displacement_amplitude: float
    quanta_gained: float
    trajectory_samples: np.ndarray | None = None


class FilteredTrajectory:
    """Trap-minimum position x0(t) for a scenario, evaluable at any time.

    Piecewise form per update interval: x0(t) = A + B exp(-gamma (t - t0)),
    continuous across updates and monotone within each leg.  gamma = inf
    reproduces the ideal staircase.
    """

    def __init__(self, scenario: TransportScenario):
        self.scenario = scenario
        self.gamma = 2.0 * math.pi * scenario.filter_cutoff
        n = scenario.n_steps
        step = scenario.step_size
        period = scenario.update_period
        d = scenario.total_distance
        targets = [(k + 1) * step for k in range(n)] + [d - (k + 1) * step for k in range(n)]
        durations = [period] * (2 * n) + [scenario.relax_time]
        targets.append(0.0)

        starts = np.concatenate(([0.0], np.cumsum(durations)))
        self.t_start = starts[:-1]
        self.t_end = starts[-1]
        self.targets = np.asarray(targets)
        self.durations = np.asarray(durations)
        # Initial filtered value per segment: recursive relaxation toward the
        # running target.
        y = 0.0
        y0 = np.empty(len(targets))
        for i, (a, dt) in enumerate(zip(targets, durations)):
            y0[i] = y
            if math.isinf(self.gamma):
                y = a
            else:
                y = a + (y - a) * math.exp(-self.gamma * dt)
        self.y_start = y0
        self.y_final = y

    def _segment_index(self, t: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.t_start, t, side="right") - 1
        return np.clip(idx, 0, len(self.targets) - 1)

    def __call__(self, t) -> np.ndarray:
        """Filtered trap-minimum position at time(s) t.

        With no filter the staircase is right-continuous: the new target
        applies from the update instant onward.
        """
        t = np.asarray(t, dtype=float)
        idx = self._segment_index(t)
        a = self.targets[idx]
        if math.isinf(self.gamma):
            return a + np.zeros_like(t)
        b = self.y_start[idx] - a
        return a + b * np.exp(-self.gamma * (t - self.t_start[idx]))

    def ideal(self, t) -> np.ndarray:
        """Unfiltered staircase position at time(s) t."""
        t = np.asarray(t, dtype=float)
        idx = self._segment_index(t)
        return self.targets[idx]

    def velocity(self, t) -> np.ndarray:
        """Time derivative of the filtered trajectory (zero between jumps if unfiltered)."""
        t = np.asarray(t, dtype=float)
        if math.isinf(self.gamma):
            return np.zeros_like(t)
        idx = self._segment_index(t)
        a = self.targets[idx]
        b = self.y_start[idx] - a
        return -self.gamma * b * np.exp(-self.gamma * (t - self.t_start[idx]))


def build_filtered_trajectory(scenario: TransportScenario) -> FilteredTrajectory:
    return FilteredTrajectory(scenario)


def simulate_transport(
    scenario: TransportScenario, n_trajectory_samples: int = 0
) -> TransportResult:
    """Propagate the ion through both legs plus relax and score the residual.

    The per-segment solution of x'' = -w^2 (x - A - B e^(-g u)) is

        x(u) = A + C e^(-g u) + a cos(w u) + b sin(w u),
        C = B w^2 / (w^2 + g^2),

    matched to (x, v) at each update; the propagation is exact to machine
    precision.  quanta_gained = E / (hbar w) with E the oscillation energy
    about the final trap minimum; the coherent amplitude is its square root.
    """
    traj = build_filtered_trajectory(scenario)
    w = scenario.omega
    g = traj.gamma
    x, v = 0.0, 0.0
    if math.isinf(g):
        for a_target, dt, y0 in zip(traj.targets, traj.durations, traj.y_start):
            ca = x - a_target
            cb = v / w
            cw, sw = math.cos(w * dt), math.sin(w * dt)
            x = a_target + ca * cw + cb * sw
            v = -ca * w * sw + cb * w * cw
    else:
        den = w * w + g * g
        for a_target, dt, y0 in zip(traj.targets, traj.durations, traj.y_start):
            c = (y0 - a_target) * w * w / den
            ca = x - a_target - c
            cb = (v + g * c) / w
            e = math.exp(-g * dt)
            cw, sw = math.cos(w * dt), math.sin(w * dt)
            x = a_target + c * e + ca * cw + cb * sw
            v = -g * c * e - ca * w * sw + cb * w * cw

    x_final_target = 0.0
    energy = 0.5 * scenario.mass_kg * (v * v + w * w * (x - x_final_target) ** 2)
    if not (math.isfinite(energy) and energy >= 0):
        raise NumericalAccuracyError("transport propagation produced a non-finite energy")
    quanta = energy / (HBAR * w)

    samples = None
    if n_trajectory_samples > 0:
        ts = np.linspace(0.0, traj.t_end, n_trajectory_samples)
        xs = _sample_ion_position(scenario, traj, ts)
        samples = np.column_stack([ts, traj(ts), xs])

    return TransportResult(
        final_displacement_amplitude=math.sqrt(quanta),
        quanta_gained=quanta,
        trajectory_samples=samples,
    )


def _sample_ion_position(
    scenario: TransportScenario, traj: FilteredTrajectory, times: np.ndarray
) -> np.ndarray:
    """Ion position at arbitrary times, re-propagating segment by segment."""
    w = scenario.omega
    g = traj.gamma
    out = np.empty(times.size)
    order = np.argsort(times)
    x, v = 0.0, 0.0
    seg = 0
    t_seg = 0.0
    n_seg = len(traj.targets)

    def advance(dt):
        nonlocal x, v
        a_target = traj.targets[seg]
        cw, sw = math.cos(w * dt), math.sin(w * dt)
        if math.isinf(g):
            ca = x - a_target
            cb = v / w
            x = a_target + ca * cw + cb * sw
            v = -ca * w * sw + cb * w * cw
        else:
            c = (traj.y_start[seg] - a_target) * w * w / (w * w + g * g)
            ca = x - a_target - c
            cb = (v + g * c) / w
            e = math.exp(-g * dt)
            x = a_target + c * e + ca * cw + cb * sw
            v = -g * c * e - ca * w * sw + cb * w * cw

    def eval_within(dt):
        a_target = traj.targets[seg]
        cw, sw = math.cos(w * dt), math.sin(w * dt)
        if math.isinf(g):
            return a_target + (x - a_target) * cw + (v / w) * sw
        c = (traj.y_start[seg] - a_target) * w * w / (w * w + g * g)
        ca = x - a_target - c
        cb = (v + g * c) / w
        return a_target + c * math.exp(-g * dt) + ca * cw + cb * sw

    for i in order:
        t = min(times[i], traj.t_end)
        while seg < n_seg - 1 and t > traj.t_start[seg] + traj.durations[seg]:
            advance(traj.t_start[seg] + traj.durations[seg] - t_seg)
            t_seg = traj.t_start[seg] + traj.durations[seg]
            seg += 1
        out[i] = eval_within(t - t_seg)
    return out


@dataclass(frozen=True)
class ScanPoint:
    update_frequency: float
    quanta_gained: float
    error: str | None = None


def scan_update_frequency(scenario: TransportScenario, frequencies) -> list[ScanPoint]:
    """simulate_transport at each update frequency, in the given order.

    A failure at one frequency is recorded on its point and does not abort
    the rest of the scan.
    """
    freqs = list(frequencies)
    if not freqs:
        raise InvalidConfigError("frequency list must be nonempty")
    points = []
    for f in freqs:
        try:
            result = simulate_transport(replace(scenario, update_frequency=float(f)))
            points.append(ScanPoint(float(f), result.quanta_gained))
        except (InvalidConfigError, NumericalAccuracyError) as exc:
            points.append(ScanPoint(float(f), math.nan, error=str(exc)))
    return points


def response_integral_quanta(scenario: TransportScenario, nodes_per_panel: int = 48) -> float:
    """Independent oracle: quanta from the drive-velocity response integral.

    Evaluates J = integral of x0'(t) exp(-i w t) dt by panel-wise
    Gauss-Legendre quadrature (segments are subdivided so each panel spans at
    most ~20 radians of oscillator phase) and converts the final complex
    oscillation amplitude about the trap's final resting position into
    quanta.  Shares only the trajectory definition with simulate_transport,
    not the propagation.
    """
    traj = build_filtered_trajectory(scenario)
    if math.isinf(traj.gamma):
        raise InvalidConfigError("response integral needs a finite filter cutoff")
    w = scenario.omega
    nodes, weights = np.polynomial.legendre.leggauss(nodes_per_panel)
    j_total = 0.0 + 0.0j
    for t0, dt in zip(traj.t_start, traj.durations):
        if dt <= 0:
            continue
        n_panels = max(1, int(math.ceil(w * dt / 20.0)))
        edges = t0 + dt * np.linspace(0.0, 1.0, n_panels + 1)
        for a, b in zip(edges[:-1], edges[1:]):
            t = a + 0.5 * (b - a) * (nodes + 1.0)
            j_total += 0.5 * (b - a) * np.sum(weights * traj.velocity(t) * np.exp(-1j * w * t))
    # Complex amplitude about the final target: v + i w (x - X_f) at t_end
    # equals -i w (e^{i w T} J - (x0(T) - X_f)).
    x0_end = float(traj(traj.t_end))
    amp = np.exp(1j * w * traj.t_end) * j_total - (x0_end - 0.0)
    energy = 0.5 * scenario.mass_kg * (w * abs(amp)) ** 2
    return float(energy / (HBAR * w))
