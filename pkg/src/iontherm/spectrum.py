"""Forward model: sideband excitation probabilities for a probed ion.

A resonant probe of duration t on the m-th sideband drives |g,n> -> |e,n+m>
with excited-state population sin^2(Omega_{n,m} t); for a mixed motional
state the excitation is the population-weighted sum of those terms.  Only
on-resonance peak amplitudes are modeled (one point per sideband, constant
interaction time and intensity); there is no lineshape or detuning model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError
from .oscillator import MotionalState, sideband_rabi_frequency, sideband_rabi_ladder

# Largest sideband order the coupling-strength evaluation is validated for.
MAX_ORDER = 8


@dataclass(frozen=True)
class ProbePulse:
    """Probe pulse: duration in seconds, base (carrier) Rabi frequency in rad/s."""

    duration: float
    base_rabi: float

    def __post_init__(self):
        if self.duration < 0:
            raise InvalidConfigError(f"duration must be >= 0, got {self.duration}")
        if self.base_rabi < 0:
            raise InvalidConfigError(f"base_rabi must be >= 0, got {self.base_rabi}")

    @property
    def theta(self) -> float:
        """Dimensionless pulse area Omega00 * t."""
        return self.duration * self.base_rabi


@dataclass(frozen=True)
class SidebandSpectrum:
    """Excitation probability per sideband order m = -max_order..+max_order.

    amplitudes[i] corresponds to order orders[i] = i - max_order.  shots, when
    present, gives the number of detection shots behind each amplitude; seed
    records the generator seed for synthetic spectra.
    """

    max_order: int
    amplitudes: np.ndarray
    shots: np.ndarray | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.max_order < 1:
            raise InvalidConfigError(f"max_order must be >= 1, got {self.max_order}")
        amps = np.asarray(self.amplitudes, dtype=float)
        if amps.shape != (2 * self.max_order + 1,):
            raise InvalidConfigError(
                f"amplitudes must have {2 * self.max_order + 1} entries for orders "
                f"-{self.max_order}..+{self.max_order}"
            )
        if np.any(amps < 0) or np.any(amps > 1):
            raise InvalidConfigError("amplitudes must lie in [0, 1]")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)
        if self.shots is not None:
            shots = np.asarray(self.shots, dtype=int)
            if shots.shape != amps.shape:
                raise InvalidConfigError("shots must match amplitudes in length")
            if np.any(shots < 1):
                raise InvalidConfigError("shots must be >= 1")
            shots = shots.copy()
            shots.flags.writeable = False
            object.__setattr__(self, "shots", shots)

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.max_order, self.max_order + 1)

    def amplitude(self, m: int) -> float:
        if abs(m) > self.max_order:
            raise InvalidConfigError(f"order {m} outside +-{self.max_order}")
        return float(self.amplitudes[m + self.max_order])

    def shots_for(self, m: int) -> int:
        if self.shots is None:
            raise InvalidConfigError("spectrum carries no shot counts")
        return int(self.shots[m + self.max_order])


@dataclass(frozen=True)
class RabiCurve:
    """Carrier flopping record: excitation vs probe time (seconds)."""

    times: np.ndarray
    excitations: np.ndarray
    shots: int | None = None
    seed: int | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        exc = np.asarray(self.excitations, dtype=float)
        if times.ndim != 1 or times.shape != exc.shape:
            raise InvalidConfigError("times and excitations must be matching 1-D arrays")
        if np.any(times < 0) or np.any(np.diff(times) < 0):
            raise InvalidConfigError("times must be nonnegative and sorted")
        if np.any(exc < 0) or np.any(exc > 1):
            raise InvalidConfigError("excitations must lie in [0, 1]")
        if self.shots is not None and self.shots < 1:
            raise InvalidConfigError("shots must be >= 1")
        times = times.copy()
        exc = exc.copy()
        times.flags.writeable = False
        exc.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "excitations", exc)


def pure_state_excitation(n: int, m: int, eta: float, pulse: ProbePulse) -> float:
    """sin^2(Omega_{n,m} t) for a Fock state |n>; exactly 0 if n+m < 0."""
    if n + m < 0:
        return 0.0
    omega = sideband_rabi_frequency(n, m, eta, pulse.base_rabi)
    return math.sin(omega * pulse.duration) ** 2


def mixed_state_excitation(state: MotionalState, m: int, eta: float, pulse: ProbePulse) -> float:
    """Sum_n P_n sin^2(Omega_{n,m} t) over the truncated ladder.

    The sum starts at n = max(0, -m) so that every term has an existing
    target level; terms below that are identically zero.
    """
    if abs(m) > MAX_ORDER:
        raise InvalidConfigError(f"|m| must be <= {MAX_ORDER}, got {m}")
    ratios = sideband_rabi_ladder(m, eta, state.n_max)
    lo = max(0, -m)
    probs = np.sin(ratios[lo:] * pulse.theta) ** 2
    return float(state.populations[lo:] @ probs)


def sideband_envelope(
    state: MotionalState, eta: float, pulse: ProbePulse, max_order: int
) -> SidebandSpectrum:
    """Peak amplitudes for every sideband order m in [-max_order, +max_order]."""
    if max_order < 1:
        raise InvalidConfigError(f"max_order must be >= 1, got {max_order}")
    amps = np.array(
        [
            mixed_state_excitation(state, m, eta, pulse)
            for m in range(-max_order, max_order + 1)
        ]
    )
    # Guard against rounding just past the unit interval.
    amps = np.clip(amps, 0.0, 1.0)
    return SidebandSpectrum(max_order=max_order, amplitudes=amps)


def carrier_flop_curve(
    state: MotionalState, eta: float, omega0: float, times
) -> np.ndarray:
    """Carrier (m = 0) excitation probability at each probe time.

    For nbar = 0 this is a pure sinusoid; thermal spread over n dephases the
    oscillation and damps the apparent contrast without any dissipation.
    """
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise InvalidConfigError("times must be nonnegative and sorted")
    if omega0 < 0:
        raise InvalidConfigError(f"omega0 must be >= 0, got {omega0}")
    ratios = sideband_rabi_ladder(0, eta, state.n_max)
    # Chunk over times to bound the (ladder x times) intermediate.
    out = np.empty(times.size)
    chunk = max(1, int(4e6 // max(ratios.size, 1)))
    for i in range(0, times.size, chunk):
        phases = np.outer(ratios, omega0 * times[i : i + chunk])
        out[i : i + chunk] = state.populations @ (np.sin(phases) ** 2)
    return np.clip(out, 0.0, 1.0)


def synthesize_measurement(data, shots: int, seed: int):
    """Replace each probability by a seeded binomial draw divided by shots.

    Accepts a SidebandSpectrum, a RabiCurve, or a plain probability array;
    returns the same kind of object with the seed recorded where the type
    carries one.  Identical inputs and seed give bit-identical output.
    """
    if shots < 1:
        raise InvalidConfigError(f"shots must be >= 1, got {shots}")
    rng = np.random.default_rng(seed)
    if isinstance(data, SidebandSpectrum):
        draws = rng.binomial(shots, data.amplitudes) / shots
        return SidebandSpectrum(
            max_order=data.max_order,
            amplitudes=draws,
            shots=np.full(data.amplitudes.shape, shots, dtype=int),
            seed=seed,
        )
    if isinstance(data, RabiCurve):
        draws = rng.binomial(shots, data.excitations) / shots
        return RabiCurve(times=data.times, excitations=draws, shots=shots, seed=seed)
    probs = np.asarray(data, dtype=float)
    if np.any(probs < 0) or np.any(probs > 1):
        raise InvalidConfigError("probabilities must lie in [0, 1]")
    return rng.binomial(shots, probs) / shots
