"""Estimate the mean motional quantum number nbar from measured spectra.

Four methods, all assuming a thermal (or displaced-thermal) motional state:

* first-order sideband comparison, nbar = r/(1-r) with r the red/blue ratio
  (cold ions, nbar < ~10);
* sideband envelope fit across orders -M..+M (covers nbar up to ~500 with
  fourth-order sidebands);
* motional decoherence of carrier Rabi oscillations (nbar ~ 10-40);
* weighted linear regression of nbar vs wait time for heating rates.

Chi-square fits run a deterministic coarse grid (log-spaced in nbar, linear
in pulse area) followed by Nelder-Mead refinement; the quoted nbar
uncertainty is the half-width of the delta-chi-square = 1 profile with the
nuisance parameters re-optimized at every probe point.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .errors import (
    FitFailedError,
    InsufficientDataError,
    InvalidConfigError,
    MethodRangeError,
    TruncationInsufficientError,
    UnconstrainedFitError,
    UndefinedRatioError,
)
from .oscillator import (
    DEFAULT_TRUNCATION,
    TruncationConfig,
    displacement_population_map,
    sideband_rabi_ladder,
)
from .spectrum import SidebandSpectrum

# Deterministic coarse-search grids.
GRID_NBAR = np.geomspace(0.01, 1000.0, 61)
GRID_THETA = np.linspace(2.0 * np.pi / 48, 2.0 * np.pi, 48)
GRID_ALPHA = np.array([0.0, 0.3, 0.6, 1.0, 1.5, 2.2, 3.2])
GRID_OSCILLATIONS = np.linspace(0.5, 40.0, 261)

_NBAR_LO, _NBAR_HI = 1e-9, 1e6
_BIG = 1e300

# Fraction of the ladder treated as a guard band for displaced states; must
# match the oscillator module convention.
_GUARD_FRACTION = 0.9
_LEAK_TOLERANCE = 1e-10


@dataclass(frozen=True)
class FitResult:
    """Outcome of an nbar estimation.

    base_rabi_times_t is the fitted dimensionless pulse area Omega00*t where
    the method has one; alpha is present only for displaced-thermal fits.
    """

    nbar: float
    nbar_uncertainty: float
    method: str
    chi_square: float
    degrees_of_freedom: int
    base_rabi_times_t: float | None = None
    alpha: float | None = None
    aux: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.nbar < 0:
            raise InvalidConfigError("nbar must be >= 0")
        if self.nbar_uncertainty < 0:
            raise InvalidConfigError("nbar_uncertainty must be >= 0")


@dataclass(frozen=True)
class HeatingSeries:
    """Fitted nbar versus wait time, for heating-rate extraction.

    delays are in milliseconds and strictly increasing; uncertainties are the
    one-sigma errors of the per-delay nbar fits.
    """

    delays: np.ndarray
    nbars: np.ndarray
    uncertainties: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.delays, dtype=float)
        n = np.asarray(self.nbars, dtype=float)
        u = np.asarray(self.uncertainties, dtype=float)
        if not (d.ndim == 1 and d.shape == n.shape == u.shape):
            raise InvalidConfigError("delays, nbars, uncertainties must be matching 1-D arrays")
        if d.size < 2:
            raise InsufficientDataError("a heating series needs at least 2 points")
        if np.any(np.diff(d) <= 0):
            raise InvalidConfigError("delays must be strictly increasing")
        if np.any(u <= 0):
            raise InvalidConfigError("uncertainties must be positive")
        for name, arr in (("delays", d), ("nbars", n), ("uncertainties", u)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class HeatingRateFit:
    """Weighted linear fit of nbar vs delay: slope in quanta/ms."""

    slope: float
    slope_uncertainty: float
    intercept: float
    intercept_uncertainty: float
    chi_square: float
    degrees_of_freedom: int
    method: str = "heating_rate"


@dataclass(frozen=True)
class HeatingDifference:
    """Difference of two fitted nbar values, transport minus reference."""

    delta_nbar: float
    uncertainty: float
    negative_flag: bool


def binomial_sigma(p, shots):
    """One-sigma binomial error of an excitation estimate.

    The variance is floored at the one-count level so zero/full counts keep a
    finite weight in chi-square sums.
    """
    p = np.asarray(p, dtype=float)
    shots = np.asarray(shots, dtype=float)
    return np.sqrt(np.maximum(p * (1.0 - p), 1.0 / shots) / shots)


def fit_sideband_ratio(
    p_red: float, p_blue: float, shots_red: int, shots_blue: int
) -> FitResult:
    """First-order sideband comparison: nbar = r/(1-r), r = p_red/p_blue."""
    for name, p in (("p_red", p_red), ("p_blue", p_blue)):
        if not (0.0 <= p <= 1.0):
            raise InvalidConfigError(f"{name} must lie in [0, 1], got {p}")
    for name, s in (("shots_red", shots_red), ("shots_blue", shots_blue)):
        if s < 1:
            raise InvalidConfigError(f"{name} must be >= 1, got {s}")
    if p_blue == 0.0:
        raise UndefinedRatioError("blue sideband excitation is zero; ratio undefined")
    r = p_red / p_blue
    if r >= 1.0:
        raise MethodRangeError(
            f"red/blue ratio {r:.4f} >= 1: ion too hot for the first-order comparison"
        )
    nbar = r / (1.0 - r)
    var_red = p_red * (1.0 - p_red) / shots_red
    var_blue = p_blue * (1.0 - p_blue) / shots_blue
    sigma_r = math.sqrt(var_red + r * r * var_blue) / p_blue
    sigma_nbar = sigma_r / (1.0 - r) ** 2
    return FitResult(
        nbar=nbar,
        nbar_uncertainty=sigma_nbar,
        method="ratio",
        chi_square=0.0,
        degrees_of_freedom=0,
        aux={"ratio": r, "ratio_uncertainty": sigma_r},
    )


# ---------------------------------------------------------------------------
# shared chi-square machinery


_ladder_cache: dict = {}


def _cached_ladder(m: int, eta: float, n_max: int) -> np.ndarray:
    key = (m, eta, n_max)
    arr = _ladder_cache.get(key)
    if arr is None:
        arr = sideband_rabi_ladder(m, eta, n_max)
        arr.flags.writeable = False
        if len(_ladder_cache) > 256:
            _ladder_cache.clear()
        _ladder_cache[key] = arr
    return arr


# Fit-internal displacements are snapped to this alpha lattice so the
# population maps can be cached; the statistical uncertainty on alpha is
# orders of magnitude coarser.
_ALPHA_STEP = 0.005

_displacement_cache: "OrderedDict" = OrderedDict()


def _quantize_alpha(alpha: float) -> float:
    return round(alpha / _ALPHA_STEP) * _ALPHA_STEP


def _cached_displacement_sq(alpha: float, dim: int) -> np.ndarray:
    """Elementwise square of D(alpha); rows map thermal to displaced populations."""
    key = (alpha, dim)
    arr = _displacement_cache.get(key)
    if arr is None:
        arr = displacement_population_map(alpha, dim)
        arr.flags.writeable = False
        while len(_displacement_cache) > 24:
            _displacement_cache.popitem(last=False)
        _displacement_cache[key] = arr
    else:
        _displacement_cache.move_to_end(key)
    return arr


def _displaced_dim(nbar: float, alpha: float, cap: int) -> int:
    """Ladder size keeping the displaced-thermal guard-band leak below 1e-10."""
    need = 23.03 * (nbar + 1.0) + alpha * alpha + 6.0 * alpha * math.sqrt(nbar + 1.0) + 25.0
    dim = int(math.ceil(need / _GUARD_FRACTION / 32.0)) * 32
    return min(dim, cap)


def _thermal_weight_matrix(nbars: np.ndarray, dim: int) -> np.ndarray:
    """Renormalized geometric weight rows for each nbar."""
    n = np.arange(dim)
    out = np.empty((nbars.size, dim))
    for i, nb in enumerate(nbars):
        if nb == 0.0:
            out[i] = 0.0
            out[i, 0] = 1.0
        else:
            w = np.exp(n * math.log(nb / (nb + 1.0)))
            out[i] = w / w.sum()
    return out


def _displaced_weights(nbar: float, alpha: float, trunc: TruncationConfig) -> np.ndarray:
    """Displaced-thermal populations on an adaptively sized ladder.

    alpha is snapped to the fit-internal lattice; raises
    TruncationInsufficientError when even the capped ladder leaks.
    """
    alpha = _quantize_alpha(alpha)
    dim = _displaced_dim(nbar, alpha, trunc.dim)
    pth = _thermal_weight_matrix(np.array([nbar]), dim)[0]
    pops = _cached_displacement_sq(alpha, dim) @ pth
    leak = pops[int(_GUARD_FRACTION * dim) :].sum()
    if leak > _LEAK_TOLERANCE:
        raise TruncationInsufficientError(
            f"displaced state (nbar={nbar:.3g}, alpha={alpha:.3g}) leaks {leak:.2e} "
            f"past the guard band at dim={dim}"
        )
    return pops / pops.sum()


def _envelope_amplitudes(
    pops: np.ndarray, eta: float, theta: float, orders: np.ndarray
) -> np.ndarray:
    n_max = pops.size - 1
    amps = np.empty(orders.size)
    for i, m in enumerate(orders):
        ratios = _cached_ladder(int(m), eta, n_max)
        amps[i] = pops @ (np.sin(ratios * theta) ** 2)
    return amps


def _nelder_mead(fun, x0, xatol=1e-5):
    return scipy.optimize.minimize(
        fun,
        np.asarray(x0, dtype=float),
        method="Nelder-Mead",
        options={"xatol": xatol, "fatol": 1e-12, "maxiter": 4000, "maxfev": 8000},
    )


def _top_grid_starts(chi: np.ndarray, k: int = 4) -> list[tuple[int, int]]:
    """Indices of the k best non-adjacent nodes of a 2-D chi-square grid.

    Adjacent runners-up belong to the basin already covered by a better
    node, so they are skipped; distinct basins each get a refinement start.
    """
    order = np.argsort(chi, axis=None)
    picked: list[tuple[int, int]] = []
    for flat in order:
        i, j = np.unravel_index(int(flat), chi.shape)
        if not np.isfinite(chi[i, j]):
            break
        if any(abs(i - pi) <= 1 and abs(j - pj) <= 1 for pi, pj in picked):
            continue
        picked.append((i, j))
        if len(picked) >= k:
            break
    return picked


def _profile_sigma(nbar_best: float, chi_min: float, profile_chi2) -> float:
    """Half-width of the delta-chi-square = 1 interval around nbar_best.

    profile_chi2(nbar) must return the chi-square minimized over all other
    parameters.  Each side is bracketed geometrically and then bisected in
    log-nbar; a side that never crosses within the search bounds contributes
    its bound.
    """
    target = chi_min + 1.0

    def crossing(direction: float) -> float:
        lo = nbar_best
        hi = nbar_best
        step = 1.05
        for _ in range(200):
            hi = hi * step if direction > 0 else hi / step
            if hi > _NBAR_HI or hi < _NBAR_LO:
                return max(min(hi, _NBAR_HI), _NBAR_LO)
            if profile_chi2(hi) >= target:
                break
            lo = hi
            step = min(step * 1.6, 4.0)
        else:
            return hi
        for _ in range(60):
            mid = math.sqrt(lo * hi)
            if profile_chi2(mid) >= target:
                hi = mid
            else:
                lo = mid
            if abs(math.log(hi / lo)) < 1e-4:
                break
        return math.sqrt(lo * hi)

    upper = crossing(+1.0)
    lower = crossing(-1.0)
    return 0.5 * abs(upper - lower)


# ---------------------------------------------------------------------------
# sideband envelope fit


def fit_envelope(
    measured: SidebandSpectrum,
    eta: float,
    model: str = "thermal",
    trunc: TruncationConfig = DEFAULT_TRUNCATION,
) -> FitResult:
    """Chi-square fit of the sideband envelope over (nbar, Omega00*t[, alpha]).

    measured must carry shot counts per order; model is "thermal" or
    "displaced_thermal" (the choice is the caller's, never automatic).
    """
    if model not in ("thermal", "displaced_thermal"):
        raise InvalidConfigError(f"unknown model {model!r}")
    if measured.shots is None:
        raise InvalidConfigError("envelope fit needs shot counts per order")
    if measured.max_order < 2:
        raise InvalidConfigError("envelope fit needs sidebands up to order 2 at least")
    if eta <= 0:
        raise InvalidConfigError(f"eta must be positive, got {eta}")

    orders = measured.orders
    data = measured.amplitudes
    sigma = binomial_sigma(data, measured.shots)

    spread = data.max() - data.min()
    if spread < 2.5 * np.median(sigma):
        raise UnconstrainedFitError(
            "spectrum amplitudes are equal within noise; nbar is unconstrained"
        )

    dim = trunc.dim
    n_params = 2 if model == "thermal" else 3
    dof = orders.size - n_params
    if dof < 1:
        raise InsufficientDataError("not enough sideband orders for the chosen model")

    # Precompute sin^2 tables on the theta grid, one per order.
    tables = [
        np.sin(np.outer(_cached_ladder(int(m), eta, dim - 1), GRID_THETA)) ** 2
        for m in orders
    ]
    weights = _thermal_weight_matrix(GRID_NBAR, dim)

    def grid_chi2(pop_rows: np.ndarray) -> np.ndarray:
        chi = np.zeros((pop_rows.shape[0], GRID_THETA.size))
        for i in range(orders.size):
            amp = pop_rows @ tables[i]
            chi += ((amp - data[i]) / sigma[i]) ** 2
        return chi

    starts: list[list[float]] = []
    chi_grid_best = math.inf
    x0_grid_best: list[float] | None = None
    if model == "thermal":
        chi = grid_chi2(weights)
        for i_n, i_t in _top_grid_starts(chi):
            starts.append([math.log(GRID_NBAR[i_n]), GRID_THETA[i_t]])
        chi_grid_best = float(np.min(chi))
        x0_grid_best = starts[0]
    else:
        guard = int(_GUARD_FRACTION * dim)
        for alpha in GRID_ALPHA:
            d2 = _cached_displacement_sq(float(alpha), dim)
            pop_rows = weights @ d2.T
            chi = grid_chi2(pop_rows)
            feasible = pop_rows[:, guard:].sum(axis=1) <= _LEAK_TOLERANCE
            chi[~feasible, :] = np.inf
            if not np.any(np.isfinite(chi)):
                continue
            flat = int(np.argmin(chi))
            i_n, i_t = np.unravel_index(flat, chi.shape)
            start = [math.log(GRID_NBAR[i_n]), GRID_THETA[i_t], float(alpha)]
            starts.append(start)
            if chi[i_n, i_t] < chi_grid_best:
                chi_grid_best = float(chi[i_n, i_t])
                x0_grid_best = start
        if not starts:
            raise FitFailedError("no feasible grid point for the displaced-thermal model")

    def chi2_point(nbar: float, theta: float, alpha: float | None) -> float:
        if theta <= 0 or nbar < _NBAR_LO or nbar > _NBAR_HI:
            return _BIG
        try:
            if alpha is None:
                pops = _thermal_weight_matrix(np.array([nbar]), dim)[0]
            else:
                if alpha < 0:
                    return _BIG
                pops = _displaced_weights(nbar, alpha, trunc)
        except TruncationInsufficientError:
            return _BIG
        amps = _envelope_amplitudes(pops, eta, theta, orders)
        return float(np.sum(((amps - data) / sigma) ** 2))

    if model == "thermal":
        fun = lambda u: chi2_point(math.exp(u[0]), u[1], None)
    else:
        fun = lambda u: chi2_point(math.exp(u[0]), u[1], u[2])

    # Refine every candidate basin and keep the best refined point.
    u_best, chi_best = None, math.inf
    for x0 in starts:
        res = _nelder_mead(fun, x0)
        if np.isfinite(res.fun) and res.fun < chi_best:
            u_best, chi_best = res.x, float(res.fun)
    grid_fit = _result_from_point(x0_grid_best, chi_grid_best, model, dof, measured.seed)
    if u_best is None:
        raise FitFailedError("envelope refinement did not converge", best=grid_fit)
    if chi_best > chi_grid_best:
        u_best, chi_best = np.asarray(x0_grid_best, dtype=float), chi_grid_best
    nbar_best = math.exp(u_best[0])
    theta_best = float(u_best[1])
    alpha_best = float(u_best[2]) if model == "displaced_thermal" else None

    def profile(nbar: float) -> float:
        if model == "thermal":
            r = _nelder_mead(lambda v: chi2_point(nbar, v[0], None), [theta_best])
        else:
            r = _nelder_mead(
                lambda v: chi2_point(nbar, v[0], abs(v[1])), [theta_best, alpha_best]
            )
        return float(r.fun)

    sigma_nbar = _profile_sigma(nbar_best, chi_best, profile)

    aux = {}
    if measured.seed is not None:
        aux["seed"] = measured.seed
    return FitResult(
        nbar=nbar_best,
        nbar_uncertainty=sigma_nbar,
        method="envelope",
        chi_square=chi_best,
        degrees_of_freedom=dof,
        base_rabi_times_t=theta_best,
        alpha=alpha_best,
        aux=aux,
    )


def _result_from_point(x0, chi, model, dof, seed) -> FitResult:
    return FitResult(
        nbar=math.exp(x0[0]),
        nbar_uncertainty=0.0,
        method="envelope",
        chi_square=chi,
        degrees_of_freedom=dof,
        base_rabi_times_t=float(x0[1]),
        alpha=float(x0[2]) if model == "displaced_thermal" else None,
        aux={} if seed is None else {"seed": seed},
    )


def bootstrap_envelope_sigma(
    measured: SidebandSpectrum,
    eta: float,
    model: str = "thermal",
    replicas: int = 100,
    seed: int = 0,
    trunc: TruncationConfig = DEFAULT_TRUNCATION,
) -> float:
    """Parametric-bootstrap spread of the envelope nbar for cross-checking."""
    if replicas < 2:
        raise InvalidConfigError("bootstrap needs at least 2 replicas")
    rng = np.random.default_rng(seed)
    values = []
    for _ in range(replicas):
        draws = rng.binomial(measured.shots, measured.amplitudes) / measured.shots
        replica = SidebandSpectrum(
            max_order=measured.max_order, amplitudes=draws, shots=measured.shots
        )
        try:
            values.append(fit_envelope(replica, eta, model, trunc).nbar)
        except (UnconstrainedFitError, FitFailedError):
            continue
    if len(values) < 2:
        raise FitFailedError("bootstrap produced fewer than 2 successful fits")
    return float(np.std(values, ddof=1))


# ---------------------------------------------------------------------------
# carrier Rabi decoherence fit


def fit_rabi_decoherence(
    times,
    excitations,
    shots: int,
    eta: float,
    trunc: TruncationConfig = DEFAULT_TRUNCATION,
) -> FitResult:
    """Fit nbar and Omega00 to a dephasing carrier flopping curve."""
    times = np.asarray(times, dtype=float)
    exc = np.asarray(excitations, dtype=float)
    if times.ndim != 1 or times.shape != exc.shape:
        raise InvalidConfigError("times and excitations must be matching 1-D arrays")
    if times.size < 10:
        raise InsufficientDataError(
            f"need at least 10 time points, got {times.size}"
        )
    if np.any(np.diff(times) < 0) or np.any(times < 0):
        raise InvalidConfigError("times must be nonnegative and sorted")
    if np.any(exc < 0) or np.any(exc > 1):
        raise InvalidConfigError("excitations must lie in [0, 1]")
    if shots < 1:
        raise InvalidConfigError(f"shots must be >= 1, got {shots}")
    if eta < 0:
        raise InvalidConfigError(f"eta must be >= 0, got {eta}")

    span = float(times[-1] - times[0])
    if span <= 0:
        raise InsufficientDataError("times must span a nonzero interval")
    sigma = binomial_sigma(exc, shots)
    dim = trunc.dim
    ratios = _cached_ladder(0, eta, dim - 1)
    nbar_grid = np.geomspace(0.01, 1000.0, 41)
    weights = _thermal_weight_matrix(nbar_grid, dim)

    chi_grid = np.empty((GRID_OSCILLATIONS.size, nbar_grid.size))
    for k, nosc in enumerate(GRID_OSCILLATIONS):
        omega = nosc * math.pi / span
        table = np.sin(np.outer(ratios, omega * times)) ** 2
        amp = weights @ table
        chi_grid[k] = np.sum(((amp - exc) / sigma) ** 2, axis=1)
    i_o, i_n = np.unravel_index(int(np.argmin(chi_grid)), chi_grid.shape)
    chi_grid_best = float(chi_grid[i_o, i_n])
    x0_grid_best = [math.log(nbar_grid[i_n]), GRID_OSCILLATIONS[i_o] * math.pi / span]
    starts = [
        [math.log(nbar_grid[j]), GRID_OSCILLATIONS[i] * math.pi / span]
        for i, j in _top_grid_starts(chi_grid, k=3)
    ]

    pops_cache: dict = {}

    def chi2_point(nbar: float, omega: float) -> float:
        if omega <= 0 or nbar < _NBAR_LO or nbar > _NBAR_HI:
            return _BIG
        pops = pops_cache.get(nbar)
        if pops is None:
            pops = _thermal_weight_matrix(np.array([nbar]), dim)[0]
            if len(pops_cache) > 64:
                pops_cache.clear()
            pops_cache[nbar] = pops
        model = pops @ (np.sin(np.outer(ratios, omega * times)) ** 2)
        return float(np.sum(((model - exc) / sigma) ** 2))

    u_best, chi_best = None, math.inf
    for x0 in starts:
        res = _nelder_mead(lambda u: chi2_point(math.exp(u[0]), u[1]), x0)
        if np.isfinite(res.fun) and res.fun < chi_best:
            u_best, chi_best = res.x, float(res.fun)
    if u_best is None:
        raise FitFailedError(
            "Rabi-decoherence refinement did not converge",
            best=FitResult(
                nbar=math.exp(x0_grid_best[0]),
                nbar_uncertainty=0.0,
                method="rabi_decoherence",
                chi_square=chi_grid_best,
                degrees_of_freedom=times.size - 2,
                base_rabi_times_t=x0_grid_best[1] * span,
            ),
        )
    if chi_best > chi_grid_best:
        u_best, chi_best = np.asarray(x0_grid_best, dtype=float), chi_grid_best
    nbar_best = math.exp(u_best[0])
    omega_best = float(u_best[1])

    visible = omega_best * span / math.pi
    if visible < 2.0:
        raise InsufficientDataError(
            f"only {visible:.2f} carrier oscillations visible; need at least 2"
        )

    def profile(nbar: float) -> float:
        r = _nelder_mead(lambda v: chi2_point(nbar, v[0]), [omega_best])
        return float(r.fun)

    sigma_nbar = _profile_sigma(nbar_best, chi_best, profile)
    return FitResult(
        nbar=nbar_best,
        nbar_uncertainty=sigma_nbar,
        method="rabi_decoherence",
        chi_square=chi_best,
        degrees_of_freedom=times.size - 2,
        base_rabi_times_t=omega_best * span,
        aux={"omega0_rad_s": omega_best, "oscillations": visible},
    )


# ---------------------------------------------------------------------------
# heating rate and transport difference


def fit_heating_rate(series: HeatingSeries) -> HeatingRateFit:
    """Weighted linear least squares of nbar vs delay; slope in quanta/ms."""
    t = series.delays
    y = series.nbars
    w = 1.0 / series.uncertainties**2
    s = w.sum()
    sx = (w * t).sum()
    sy = (w * y).sum()
    sxx = (w * t * t).sum()
    sxy = (w * t * y).sum()
    delta = s * sxx - sx * sx
    if delta <= 0:
        raise InvalidConfigError("degenerate delay values")
    slope = (s * sxy - sx * sy) / delta
    intercept = (sxx * sy - sx * sxy) / delta
    slope_sigma = math.sqrt(s / delta)
    intercept_sigma = math.sqrt(sxx / delta)
    resid = y - intercept - slope * t
    chi = float((w * resid * resid).sum())
    return HeatingRateFit(
        slope=float(slope),
        slope_uncertainty=slope_sigma,
        intercept=float(intercept),
        intercept_uncertainty=intercept_sigma,
        chi_square=chi,
        degrees_of_freedom=t.size - 2,
    )


def dynamic_heating_difference(
    transport_fit: FitResult, reference_fit: FitResult
) -> HeatingDifference:
    """Transport-induced heating: nbar difference with quadrature uncertainty.

    A negative difference is passed through as-is and flagged when it is more
    negative than one combined sigma.
    """
    delta = transport_fit.nbar - reference_fit.nbar
    sigma = math.hypot(transport_fit.nbar_uncertainty, reference_fit.nbar_uncertainty)
    return HeatingDifference(
        delta_nbar=float(delta),
        uncertainty=float(sigma),
        negative_flag=delta < -sigma,
    )
