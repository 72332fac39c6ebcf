"""Single-mode harmonic oscillator quantities for a trapped ion.

Conventions: a sideband of order m drives |g, n> -> |e, n+m>, so m > 0 adds
motional quanta (blue) and m < 0 removes them (red).  Coupling strengths are

    Omega_{n,m} = Omega00 * exp(-eta^2/2) * sqrt(n_<!/n_>!) * eta^|m|
                  * |L_{n_<}^{|m|}(eta^2)|

with n_< (n_>) the lesser (greater) of n and n+m and L the generalized
Laguerre polynomial.  The factorial ratio and the polynomial are evaluated in
log/scaled form so values stay finite and accurate up to n ~ 1000.

Motional population distributions live on a Fock ladder truncated at n_max
(default 1000) and are renormalized over the kept levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
from scipy.special import gammaln

from .constants import ATOMIC_MASS, HBAR
from .errors import (
    InvalidConfigError,
    InvalidTransitionError,
    NumericalAccuracyError,
    TruncationInsufficientError,
)

# Fraction of the ladder reserved as a guard band: states within the top 10%
# of a truncated ladder are considered unreliable for displacement operations.
_GUARD_FRACTION = 0.9

# Maximum population allowed inside the guard band before the truncation is
# declared insufficient.
_LEAK_TOLERANCE = 1e-10


@dataclass(frozen=True)
class OscillatorConfig:
    """Trap and probe geometry defining a single motional mode.

    ion_mass: atomic mass units.
    secular_frequency: mode frequency omega/2pi in Hz.
    probe_wavelength: probe laser wavelength in meters.
    beam_projection: cosine of the angle between probe beam and mode axis.
    """

    ion_mass: float
    secular_frequency: float
    probe_wavelength: float
    beam_projection: float

    def __post_init__(self):
        if not (self.ion_mass > 0):
            raise InvalidConfigError(f"ion_mass must be positive, got {self.ion_mass}")
        if not (self.secular_frequency > 0):
            raise InvalidConfigError(
                f"secular_frequency must be positive, got {self.secular_frequency}"
            )
        if not (self.probe_wavelength > 0):
            raise InvalidConfigError(
                f"probe_wavelength must be positive, got {self.probe_wavelength}"
            )
        if not (0.0 <= self.beam_projection <= 1.0):
            raise InvalidConfigError(
                f"beam_projection must lie in [0, 1], got {self.beam_projection}"
            )

    @property
    def omega(self) -> float:
        """Angular mode frequency in rad/s."""
        return 2.0 * math.pi * self.secular_frequency

    @property
    def mass_kg(self) -> float:
        return self.ion_mass * ATOMIC_MASS


@dataclass(frozen=True)
class TruncationConfig:
    """Fock ladder truncation: levels 0..n_max are kept."""

    n_max: int = 1000

    def __post_init__(self):
        if self.n_max < 1:
            raise InvalidConfigError(f"n_max must be >= 1, got {self.n_max}")

    @property
    def dim(self) -> int:
        return self.n_max + 1


DEFAULT_TRUNCATION = TruncationConfig()


def lamb_dicke(config: OscillatorConfig) -> float:
    """Lamb-Dicke parameter eta = k_projected * sqrt(hbar / (2 m omega)).

    k_projected is the probe wavevector projected on the mode axis,
    2*pi*beam_projection/probe_wavelength.
    """
    x0 = math.sqrt(HBAR / (2.0 * config.mass_kg * config.omega))
    eta = (2.0 * math.pi * config.beam_projection / config.probe_wavelength) * x0
    if eta >= 1.0:
        raise InvalidConfigError(
            f"derived Lamb-Dicke parameter {eta:.4f} >= 1; configuration outside "
            "the supported regime"
        )
    return eta


def _laguerre_scaled(n: int, k: int, x: float) -> tuple[float, float]:
    """Generalized Laguerre L_n^k(x) as (mantissa, log_scale).

    The value is mantissa * exp(log_scale).  The three-term recurrence in the
    degree is rescaled whenever the running values grow large, so the result
    stays representable for any n.
    """
    if n == 0:
        return 1.0, 0.0
    lm1 = 1.0
    lcur = 1.0 + k - x
    log_scale = 0.0
    for d in range(1, n):
        lnext = ((2.0 * d + k + 1.0 - x) * lcur - (d + k) * lm1) / (d + 1.0)
        lm1, lcur = lcur, lnext
        mag = max(abs(lm1), abs(lcur))
        if mag > 1e250:
            lm1 /= mag
            lcur /= mag
            log_scale += math.log(mag)
    return lcur, log_scale


def sideband_rabi_frequency(n: int, m: int, eta: float, omega0: float) -> float:
    """State-dependent Rabi frequency Omega_{n,m} in rad/s.

    n is the initial motional quantum number, m the sideband order and omega0
    the bare carrier Rabi frequency Omega_{0,0}.
    """
    if n < 0:
        raise InvalidConfigError(f"n must be >= 0, got {n}")
    if n + m < 0:
        raise InvalidTransitionError(
            f"transition |{n}> -> |{n + m}> does not exist (red sideband below ground state)"
        )
    if eta < 0:
        raise InvalidConfigError(f"eta must be >= 0, got {eta}")
    if omega0 < 0:
        raise InvalidConfigError(f"omega0 must be >= 0, got {omega0}")

    k = abs(m)
    if eta == 0.0:
        return omega0 if k == 0 else 0.0

    n_lo = min(n, n + m)
    x = eta * eta
    lag, log_scale = _laguerre_scaled(n_lo, k, x)
    if lag == 0.0:
        return 0.0
    log_mag = (
        -0.5 * x
        + k * math.log(eta)
        + 0.5 * (math.lgamma(n_lo + 1) - math.lgamma(max(n, n + m) + 1))
        + log_scale
        + math.log(abs(lag))
    )
    return omega0 * math.exp(log_mag)


def sideband_rabi_ladder(m: int, eta: float, n_max: int) -> np.ndarray:
    """Omega_{n,m}/Omega00 for all n = 0..n_max as one array.

    Vectorized companion of sideband_rabi_frequency; entries with n + m < 0
    are zero (the transition does not exist).  Valid in the oscillatory regime
    x = eta^2 >= 0 where the recurrence stays bounded.
    """
    if eta < 0:
        raise InvalidConfigError(f"eta must be >= 0, got {eta}")
    k = abs(m)
    out = np.zeros(n_max + 1)
    if eta == 0.0:
        if k == 0:
            out[:] = 1.0
        return out

    # Degrees d = n_< run over 0..n_max-k for red sidebands, 0..n_max for blue.
    ndeg = n_max - k if m < 0 else n_max
    if ndeg < 0:
        return out
    x = eta * eta
    lag = np.empty(ndeg + 1)
    lag[0] = 1.0
    if ndeg >= 1:
        lag[1] = 1.0 + k - x
    for d in range(1, ndeg):
        lag[d + 1] = ((2.0 * d + k + 1.0 - x) * lag[d] - (d + k) * lag[d - 1]) / (d + 1.0)
    if not np.all(np.isfinite(lag)):
        raise NumericalAccuracyError("Laguerre recurrence overflowed; eta out of range")

    d_arr = np.arange(ndeg + 1, dtype=float)
    safe = np.where(lag == 0.0, 1.0, np.abs(lag))
    log_mag = (
        -0.5 * x
        + k * math.log(eta)
        + 0.5 * (gammaln(d_arr + 1.0) - gammaln(d_arr + k + 1.0))
        + np.log(safe)
    )
    vals = np.where(lag == 0.0, 0.0, np.exp(log_mag))
    if m < 0:
        out[k:] = vals
    else:
        out[:] = vals
    return out


def _ladder_ops(dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Annihilation and creation operators on the truncated Fock space."""
    a = np.zeros((dim, dim))
    idx = np.arange(dim - 1)
    a[idx, idx + 1] = np.sqrt(idx + 1.0)
    return a, a.T.copy()


def displacement_matrix(alpha: float, dim: int) -> np.ndarray:
    """D(alpha) = exp(alpha (adag - a)) for real alpha on a dim-level ladder.

    Built by numerically exponentiating the generator; returns a real
    orthogonal matrix.
    """
    a, adag = _ladder_ops(dim)
    return scipy.linalg.expm(alpha * (adag - a))


@lru_cache(maxsize=8)
def _displacement_eigenbasis(dim: int):
    """Spectral decomposition of the displacement generator on the ladder.

    i(adag - a) is unitarily equivalent (via diag(i^n)) to the real symmetric
    tridiagonal matrix with zero diagonal and off-diagonals sqrt(n+1), whose
    eigensystem gives exp(alpha (adag - a)) for any alpha at matmul cost.
    """
    lam, w = scipy.linalg.eigh_tridiagonal(np.zeros(dim), np.sqrt(np.arange(1.0, dim)))
    w = np.ascontiguousarray(w)
    w.flags.writeable = False
    lam.flags.writeable = False
    return lam, w


def displacement_population_map(alpha: float, dim: int) -> np.ndarray:
    """Elementwise square of D(alpha): |<j|D|n>|^2 as a (dim, dim) array.

    Rows map Fock populations to displaced populations.  Same generator
    exponential as displacement_matrix, evaluated through the cached spectral
    decomposition so repeated alpha values are cheap.
    """
    lam, w = _displacement_eigenbasis(dim)
    cos_part = (w * np.cos(alpha * lam)) @ w.T
    sin_part = (w * np.sin(alpha * lam)) @ w.T
    return cos_part * cos_part + sin_part * sin_part


def _finalize_state(kind: str, pops: np.ndarray, nbar: float, alpha: float) -> "MotionalState":
    total = pops.sum()
    if not np.isfinite(total) or total <= 0:
        raise NumericalAccuracyError("population normalization failed")
    pops = pops / total
    return MotionalState(kind=kind, populations=pops, nbar=float(nbar), alpha=float(alpha))


@dataclass(frozen=True)
class MotionalState:
    """Population distribution over a truncated Fock ladder.

    kind is "thermal" (parameter nbar) or "displaced_thermal" (nbar, alpha);
    populations[n] is the occupation of level n after renormalization.
    """

    kind: str
    populations: np.ndarray
    nbar: float
    alpha: float = 0.0

    def __post_init__(self):
        pops = np.asarray(self.populations, dtype=float)
        if pops.ndim != 1 or pops.size < 1:
            raise InvalidConfigError("populations must be a 1-D vector")
        if np.any(pops < 0):
            raise InvalidConfigError("populations must be nonnegative")
        if abs(pops.sum() - 1.0) > 1e-12:
            raise InvalidConfigError("populations must sum to 1 within 1e-12")
        pops = pops.copy()
        pops.flags.writeable = False
        object.__setattr__(self, "populations", pops)

    @property
    def n_max(self) -> int:
        return self.populations.size - 1

    def mean_n(self) -> float:
        """Population-weighted mean quantum number on the truncated ladder."""
        return float(np.arange(self.populations.size) @ self.populations)


def thermal_populations(nbar: float, trunc: TruncationConfig = DEFAULT_TRUNCATION) -> MotionalState:
    """Thermal (geometric) distribution with ratio nbar/(nbar+1), renormalized."""
    if nbar < 0:
        raise InvalidConfigError(f"nbar must be >= 0, got {nbar}")
    pops = np.zeros(trunc.dim)
    if nbar == 0.0:
        pops[0] = 1.0
    else:
        ratio = nbar / (nbar + 1.0)
        pops = np.exp(np.arange(trunc.dim) * math.log(ratio))
    return _finalize_state("thermal", pops, nbar, 0.0)


def displaced_thermal_populations(
    nbar: float, alpha: float, trunc: TruncationConfig = DEFAULT_TRUNCATION
) -> MotionalState:
    """Diagonal of D(alpha) rho_thermal D(alpha)^dag on the truncated ladder.

    alpha is the real, nonnegative coherent displacement magnitude; the
    populations depend only on |alpha|.  Raises TruncationInsufficientError
    when a non-negligible fraction of the population reaches the top 10% of
    the ladder.
    """
    if nbar < 0:
        raise InvalidConfigError(f"nbar must be >= 0, got {nbar}")
    if alpha < 0:
        raise InvalidConfigError(f"alpha must be >= 0, got {alpha}")
    thermal = thermal_populations(nbar, trunc).populations
    disp = displacement_matrix(alpha, trunc.dim)
    pops = (disp * disp) @ thermal
    guard_start = int(_GUARD_FRACTION * trunc.dim)
    leak = pops[guard_start:].sum()
    if leak > _LEAK_TOLERANCE:
        raise TruncationInsufficientError(
            f"population {leak:.3e} in the top of the ladder exceeds {_LEAK_TOLERANCE:g}; "
            f"increase n_max beyond {trunc.n_max}"
        )
    return _finalize_state("displaced_thermal", pops, nbar, alpha)


_overlap_cache: dict = {}


def displacement_overlap_oracle(
    n: int, m: int, eta: float, trunc: TruncationConfig = DEFAULT_TRUNCATION
) -> float:
    """|<n+m| exp(i eta (a + adag)) |n>| by dense matrix exponentiation.

    Independent check of sideband_rabi_frequency; intended for tests, not for
    production paths.  The exponential is cached per (eta, n_max) so sweeping
    over matrix elements stays cheap.
    """
    if n < 0:
        raise InvalidConfigError(f"n must be >= 0, got {n}")
    if n + m < 0:
        raise InvalidTransitionError(f"transition |{n}> -> |{n + m}> does not exist")
    if max(n, n + m) >= _GUARD_FRACTION * trunc.dim:
        raise TruncationInsufficientError(
            f"levels {n} -> {n + m} lie within 10% of n_max={trunc.n_max}"
        )
    key = (eta, trunc.n_max)
    mags = _overlap_cache.get(key)
    if mags is None:
        a, adag = _ladder_ops(trunc.dim)
        mags = np.abs(scipy.linalg.expm(1j * eta * (a + adag)))
        mags.flags.writeable = False
        if len(_overlap_cache) > 8:
            _overlap_cache.clear()
        _overlap_cache[key] = mags
    return float(mags[n + m, n])
