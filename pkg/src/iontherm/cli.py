"""Command-line entry points.

Subcommands: simulate-spectrum, synth, fit-ratio, fit-envelope, fit-rabi,
heating-rate, transport-scan.  Exit status is 0 on success, 2 on usage
errors, and 1 on fit or numerical failures (the failure reason is written
into the report).  Identical argv, input files and seeds produce
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__
from .errors import IonthermError
from .io import (
    fmt,
    parse_heating_series,
    parse_rabi_curve,
    parse_spectrum,
    render_report,
    serialize_rabi_curve,
    serialize_spectrum,
    sha256_hex,
    spectrum_file_from_sideband,
)
from .oscillator import (
    TruncationConfig,
    displaced_thermal_populations,
    thermal_populations,
)
from .spectrum import (
    ProbePulse,
    RabiCurve,
    carrier_flop_curve,
    sideband_envelope,
    synthesize_measurement,
)
from .thermometry import (
    bootstrap_envelope_sigma,
    fit_envelope,
    fit_heating_rate,
    fit_rabi_decoherence,
    fit_sideband_ratio,
)
from .transport import TransportScenario, scan_update_frequency
from .constants import CA40_MASS_AMU

THREADS_ENV = "IONTHERM_THREADS"


def _threads_cap() -> int:
    """Validate the optional IONTHERM_THREADS cap (the tool is single-process)."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        cap = int(raw)
    except ValueError:
        cap = -1
    if cap < 1:
        raise SystemExit(f"iontherm: {THREADS_ENV} must be a positive integer, got {raw!r}")
    return cap


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _nonnegative_float(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _orders_arg(text: str) -> int:
    value = int(text)
    if not 1 <= value <= 8:
        raise argparse.ArgumentTypeError(f"orders must lie in 1..8, got {text}")
    return value


def _scan_range(text: str) -> np.ndarray:
    try:
        lo, hi, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi:step, got {text!r}")
    if step <= 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad scan range {text!r}")
    return np.arange(lo, hi + 0.5 * step, step)


def _read_input(args) -> tuple[str, str]:
    """Return (text, sha256) of --input, reading stdin for '-'. """
    from .errors import SpectrumParseError

    if args.input == "-":
        data = sys.stdin.buffer.read()
    else:
        try:
            with open(args.input, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise SpectrumParseError(f"cannot read input {args.input!r}: {exc}") from exc
    digest = sha256_hex(data)
    try:
        return data.decode("utf-8"), digest
    except UnicodeDecodeError as exc:
        raise SpectrumParseError(f"input is not valid UTF-8: {exc}") from exc


def _write_output(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def _make_state(args, trunc: TruncationConfig):
    if getattr(args, "model", "thermal") == "displaced_thermal":
        return displaced_thermal_populations(args.nbar, args.alpha, trunc)
    return thermal_populations(args.nbar, trunc)


def _report(args, entries: dict) -> int:
    entries = {"toolkit_version": __version__, **entries}
    _write_output(getattr(args, "output", None), render_report(entries))
    return 0


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate_spectrum(args) -> int:
    trunc = TruncationConfig(args.nmax)
    state = _make_state(args, trunc)
    pulse = ProbePulse(duration=1.0, base_rabi=args.omega0t)
    spec = sideband_envelope(state, args.eta, pulse, args.orders)
    lines = ["order,excitation"]
    for m, a in zip(spec.orders, spec.amplitudes):
        lines.append(f"{m},{fmt(a)}")
    _write_output(args.output, "\n".join(lines) + "\n")
    if args.plot:
        from .plots import save_spectrum_plot

        save_spectrum_plot(args.plot, spec.orders, spec.amplitudes,
                           title=f"nbar={args.nbar:g}, eta={args.eta:g}")
    return 0


def cmd_synth(args) -> int:
    trunc = TruncationConfig(args.nmax)
    state = _make_state(args, trunc)
    if args.kind == "spectrum":
        if args.orders is None:
            print("iontherm synth: error: --orders is required for --kind spectrum",
                  file=sys.stderr)
            raise SystemExit(2)
        pulse = ProbePulse(duration=1.0, base_rabi=args.omega0t)
        clean = sideband_envelope(state, args.eta, pulse, args.orders)
        noisy = synthesize_measurement(clean, args.shots, args.seed)
        _write_output(args.output, serialize_spectrum(spectrum_file_from_sideband(noisy)))
    else:
        omega0 = math.pi / (args.pi_time_us * 1e-6)
        t_max = args.omega0t / omega0
        times = np.linspace(0.0, t_max, args.points)
        probs = carrier_flop_curve(state, args.eta, omega0, times)
        clean = RabiCurve(times=times, excitations=probs)
        noisy = synthesize_measurement(clean, args.shots, args.seed)
        _write_output(args.output, serialize_rabi_curve(noisy))
    return 0


def cmd_fit_ratio(args) -> int:
    text, digest = _read_input(args)
    sf = parse_spectrum(text)
    try:
        p_red = sf.excitation_for(-1)
        p_blue = sf.excitation_for(+1)
    except ValueError:
        from .errors import InvalidConfigError

        raise InvalidConfigError("fit-ratio needs rows for sideband orders -1 and +1")
    result = fit_sideband_ratio(p_red, p_blue, sf.shots_for(-1), sf.shots_for(+1))
    return _report(
        args,
        {
            "method": result.method,
            "status": "ok",
            "nbar": result.nbar,
            "nbar_uncertainty": result.nbar_uncertainty,
            "ratio": result.aux["ratio"],
            "ratio_uncertainty": result.aux["ratio_uncertainty"],
            "p_red": p_red,
            "p_blue": p_blue,
            "input_sha256": digest,
            "seed": sf.seed,
        },
    )


def cmd_fit_envelope(args) -> int:
    text, digest = _read_input(args)
    spec = parse_spectrum(text).to_sideband_spectrum()
    trunc = TruncationConfig(args.nmax)
    result = fit_envelope(spec, args.eta, model=args.model, trunc=trunc)
    entries = {
        "method": result.method,
        "status": "ok",
        "model": args.model,
        "nbar": result.nbar,
        "nbar_uncertainty": result.nbar_uncertainty,
        "base_rabi_times_t": result.base_rabi_times_t,
        "alpha": result.alpha,
        "coherent_quanta": None if result.alpha is None else result.alpha**2,
        "chi_square": result.chi_square,
        "degrees_of_freedom": result.degrees_of_freedom,
        "eta": args.eta,
        "input_sha256": digest,
        "seed": spec.seed,
    }
    if args.bootstrap:
        entries["bootstrap_sigma"] = bootstrap_envelope_sigma(
            spec, args.eta, model=args.model, replicas=args.bootstrap,
            seed=args.bootstrap_seed, trunc=trunc,
        )
        entries["bootstrap_replicas"] = args.bootstrap
        entries["bootstrap_seed"] = args.bootstrap_seed
    status = _report(args, entries)
    if args.plot:
        from .plots import save_spectrum_plot

        if result.alpha is None:
            state = thermal_populations(result.nbar, trunc)
        else:
            state = displaced_thermal_populations(result.nbar, result.alpha, trunc)
        pulse = ProbePulse(duration=1.0, base_rabi=result.base_rabi_times_t)
        model = sideband_envelope(state, args.eta, pulse, spec.max_order)
        save_spectrum_plot(
            args.plot, spec.orders, spec.amplitudes, model=model.amplitudes,
            title=f"nbar = {result.nbar:.3g} +- {result.nbar_uncertainty:.2g}",
        )
    return status


def cmd_fit_rabi(args) -> int:
    text, digest = _read_input(args)
    curve = parse_rabi_curve(text)
    trunc = TruncationConfig(args.nmax)
    result = fit_rabi_decoherence(
        curve.times, curve.excitations, curve.shots, args.eta, trunc=trunc
    )
    status = _report(
        args,
        {
            "method": result.method,
            "status": "ok",
            "nbar": result.nbar,
            "nbar_uncertainty": result.nbar_uncertainty,
            "base_rabi_times_t": result.base_rabi_times_t,
            "omega0_rad_s": result.aux["omega0_rad_s"],
            "oscillations": result.aux["oscillations"],
            "chi_square": result.chi_square,
            "degrees_of_freedom": result.degrees_of_freedom,
            "eta": args.eta,
            "input_sha256": digest,
            "seed": curve.seed,
        },
    )
    if args.plot:
        from .plots import save_rabi_plot

        state = thermal_populations(result.nbar, trunc)
        dense = np.linspace(curve.times[0], curve.times[-1], 512)
        model = carrier_flop_curve(state, args.eta, result.aux["omega0_rad_s"], dense)
        save_rabi_plot(
            args.plot, curve.times, curve.excitations, dense, model,
            title=f"nbar = {result.nbar:.3g} +- {result.nbar_uncertainty:.2g}",
        )
    return status


def cmd_heating_rate(args) -> int:
    text, digest = _read_input(args)
    series = parse_heating_series(text)
    result = fit_heating_rate(series)
    status = _report(
        args,
        {
            "method": result.method,
            "status": "ok",
            "slope_quanta_per_ms": result.slope,
            "slope_uncertainty": result.slope_uncertainty,
            "intercept": result.intercept,
            "intercept_uncertainty": result.intercept_uncertainty,
            "chi_square": result.chi_square,
            "degrees_of_freedom": result.degrees_of_freedom,
            "input_sha256": digest,
        },
    )
    if args.plot:
        from .plots import save_heating_plot

        save_heating_plot(
            args.plot, series.delays, series.nbars, series.uncertainties,
            result.slope, result.intercept,
            title=f"{result.slope:.3g} +- {result.slope_uncertainty:.2g} quanta/ms",
        )
    return status


def cmd_transport_scan(args) -> int:
    scenario = TransportScenario(
        total_distance=args.distance_um * 1e-6,
        n_steps=args.steps,
        update_frequency=args.scan_khz[0] * 1e3,
        secular_frequency=args.fax_mhz * 1e6,
        ion_mass=args.mass_amu,
        filter_cutoff=args.cutoff_khz * 1e3,
        relax_time=args.relax_us * 1e-6,
    )
    points = scan_update_frequency(scenario, args.scan_khz * 1e3)
    lines = ["update_khz,quanta"]
    for p in points:
        if p.error is not None:
            lines.append(f"# {fmt(p.update_frequency / 1e3)} kHz failed: {p.error}")
        else:
            lines.append(f"{fmt(p.update_frequency / 1e3)},{fmt(p.quanta_gained)}")
    _write_output(args.output, "\n".join(lines) + "\n")
    if args.plot:
        from .plots import save_scan_plot

        ok = [p for p in points if p.error is None]
        save_scan_plot(
            args.plot,
            [p.update_frequency for p in ok],
            [p.quanta_gained for p in ok],
            title=f"{args.steps} steps, {args.distance_um:g} um, fax {args.fax_mhz:g} MHz",
        )
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iontherm",
        description="Trapped-ion sideband thermometry and transport-heating toolkit.",
    )
    parser.add_argument("--version", action="version", version=f"iontherm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_state_flags(p, with_orders=True):
        p.add_argument("--nbar", type=_nonnegative_float, required=True,
                       help="mean motional quantum number")
        p.add_argument("--eta", type=_positive_float, required=True,
                       help="Lamb-Dicke parameter")
        p.add_argument("--omega0t", type=_positive_float, required=True,
                       help="dimensionless pulse area Omega00*t")
        if with_orders:
            p.add_argument("--orders", type=_orders_arg, required=True,
                           help="highest sideband order M (1..8)")
        p.add_argument("--model", choices=("thermal", "displaced_thermal"),
                       default="thermal")
        p.add_argument("--alpha", type=_nonnegative_float, default=0.0,
                       help="coherent displacement (displaced_thermal model)")
        p.add_argument("--nmax", type=_positive_int, default=1000,
                       help="Fock ladder truncation")

    def add_io_flags(p, plot=True):
        p.add_argument("--output", default="-", help="output path, '-' for stdout")
        if plot:
            p.add_argument("--plot", default=None, metavar="PNG",
                           help="also render a figure to this file")

    p = sub.add_parser("simulate-spectrum",
                       help="noise-free sideband envelope for a motional state")
    add_state_flags(p)
    add_io_flags(p)
    p.set_defaults(func=cmd_simulate_spectrum)

    p = sub.add_parser("synth", help="synthetic measurement with binomial shot noise")
    add_state_flags(p, with_orders=False)
    p.add_argument("--orders", type=_orders_arg, default=None,
                   help="highest sideband order M (required for --kind spectrum)")
    p.add_argument("--shots", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--kind", choices=("spectrum", "rabi"), default="spectrum")
    p.add_argument("--points", type=_positive_int, default=121,
                   help="time points for --kind rabi")
    p.add_argument("--pi-time-us", type=_positive_float, default=10.0,
                   help="carrier pi time in us for --kind rabi")
    add_io_flags(p, plot=False)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit-ratio", help="first-order sideband comparison")
    p.add_argument("--input", default="-", help="spectrum CSV with orders -1 and +1")
    add_io_flags(p, plot=False)
    p.set_defaults(func=cmd_fit_ratio)

    p = sub.add_parser("fit-envelope", help="sideband envelope fit for nbar")
    p.add_argument("--input", default="-", help="spectrum CSV (order,excitation,shots)")
    p.add_argument("--eta", type=_positive_float, required=True)
    p.add_argument("--model", choices=("thermal", "displaced_thermal"), default="thermal")
    p.add_argument("--nmax", type=_positive_int, default=1000)
    p.add_argument("--bootstrap", type=int, default=0,
                   help="cross-check uncertainty with N bootstrap replicas")
    p.add_argument("--bootstrap-seed", type=int, default=0)
    add_io_flags(p)
    p.set_defaults(func=cmd_fit_envelope)

    p = sub.add_parser("fit-rabi", help="carrier Rabi decoherence fit for nbar")
    p.add_argument("--input", default="-", help="curve CSV (time_us,excitation,shots)")
    p.add_argument("--eta", type=_positive_float, required=True)
    p.add_argument("--nmax", type=_positive_int, default=1000)
    add_io_flags(p)
    p.set_defaults(func=cmd_fit_rabi)

    p = sub.add_parser("heating-rate", help="weighted linear fit of nbar vs delay")
    p.add_argument("--input", default="-", help="series CSV (delay_ms,nbar,uncertainty)")
    add_io_flags(p)
    p.set_defaults(func=cmd_heating_rate)

    p = sub.add_parser("transport-scan",
                       help="stair-step transport heating vs update frequency")
    p.add_argument("--steps", type=_positive_int, required=True,
                   help="voltage updates per leg")
    p.add_argument("--distance-um", type=float, required=True,
                   help="signed leg length in um")
    p.add_argument("--fax-mhz", type=_positive_float, required=True,
                   help="axial secular frequency in MHz")
    p.add_argument("--scan-khz", type=_scan_range, required=True, metavar="LO:HI:STEP",
                   help="update-frequency scan in kHz")
    p.add_argument("--cutoff-khz", type=_positive_float, default=60.0,
                   help="single-pole filter cutoff in kHz")
    p.add_argument("--mass-amu", type=_positive_float, default=CA40_MASS_AMU)
    p.add_argument("--relax-us", type=_nonnegative_float, default=50.0)
    add_io_flags(p)
    p.set_defaults(func=cmd_transport_scan)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _threads_cap()
    try:
        return args.func(args)
    except IonthermError as exc:
        report = render_report(
            {
                "toolkit_version": __version__,
                "command": args.command,
                "status": "failed",
                "error_type": type(exc).__name__,
                "error": str(exc).replace("\n", " "),
            }
        )
        _write_output(getattr(args, "output", None), report)
        return 1


if __name__ == "__main__":
    sys.exit(main())
