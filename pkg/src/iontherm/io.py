"""File formats and fit-report serialization.

All numeric output uses %.17g so every double survives a write/read round
trip bit-exactly.  Three CSV layouts are understood:

* spectrum files:       header ``order,excitation,shots``
* Rabi curve files:     header ``time_us,excitation,shots``
* heating series files: header ``delay_ms,nbar,uncertainty``

``#`` lines are comments; a comment of the form ``# seed = N`` records the
generator seed of synthetic data and is picked up on parse.  Fit reports are
flat ``key = value`` documents, one entry per line, ordered.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, InvalidConfigError, SpectrumParseError
from .spectrum import RabiCurve, SidebandSpectrum
from .thermometry import HeatingSeries

REPORT_FORMAT = "iontherm-report/1"


def fmt(x) -> str:
    """Serialize one number losslessly (17 significant digits for floats)."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return "%.17g" % float(x)


def _parse_rows(text: str, header: str, n_cols: int):
    """Split CSV text into typed rows, tracking line numbers and seed comments."""
    seed = None
    rows = []
    lines = text.splitlines()
    header_seen = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("seed") and "=" in body:
                try:
                    seed = int(body.split("=", 1)[1].strip())
                except ValueError:
                    raise SpectrumParseError(
                        f"line {lineno}: malformed seed comment {line!r}", line=lineno
                    )
            continue
        if not header_seen:
            if line != header:
                raise SpectrumParseError(
                    f"line {lineno}: expected header {header!r}, got {line!r}",
                    line=lineno,
                )
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != n_cols:
            raise SpectrumParseError(
                f"line {lineno}: expected {n_cols} comma-separated fields, got {len(parts)}",
                line=lineno,
            )
        rows.append((lineno, parts))
    if not header_seen:
        raise SpectrumParseError(f"missing header {header!r}")
    return rows, seed


def _parse_float(token: str, lineno: int, column: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise SpectrumParseError(
            f"line {lineno}: malformed number {token!r} in column {column!r}", line=lineno
        )
    if not math.isfinite(value):
        raise SpectrumParseError(
            f"line {lineno}: non-finite value in column {column!r}", line=lineno
        )
    return value


def _parse_int(token: str, lineno: int, column: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise SpectrumParseError(
            f"line {lineno}: malformed integer {token!r} in column {column!r}", line=lineno
        )


# ---------------------------------------------------------------------------
# spectrum files


@dataclass(frozen=True)
class SpectrumFile:
    """Rows of (order, excitation, shots); orders unique but possibly sparse."""

    orders: tuple
    excitations: tuple
    shots: tuple
    seed: int | None = None

    def excitation_for(self, m: int) -> float:
        return self.excitations[self.orders.index(m)]

    def shots_for(self, m: int) -> int:
        return self.shots[self.orders.index(m)]

    def to_sideband_spectrum(self) -> SidebandSpectrum:
        """Dense SidebandSpectrum; requires every order -M..+M to be present."""
        max_order = max(abs(m) for m in self.orders)
        wanted = list(range(-max_order, max_order + 1))
        missing = [m for m in wanted if m not in self.orders]
        if missing:
            raise InvalidConfigError(f"spectrum is missing sideband orders {missing}")
        amps = np.array([self.excitation_for(m) for m in wanted])
        shots = np.array([self.shots_for(m) for m in wanted])
        return SidebandSpectrum(
            max_order=max_order, amplitudes=amps, shots=shots, seed=self.seed
        )


def parse_spectrum(text: str) -> SpectrumFile:
    rows, seed = _parse_rows(text, "order,excitation,shots", 3)
    orders, excs, shots = [], [], []
    for lineno, (o_tok, e_tok, s_tok) in rows:
        order = _parse_int(o_tok, lineno, "order")
        if order in orders:
            raise SpectrumParseError(f"line {lineno}: duplicate order {order}", line=lineno)
        exc = _parse_float(e_tok, lineno, "excitation")
        if not (0.0 <= exc <= 1.0):
            raise SpectrumParseError(
                f"line {lineno}: excitation {exc!r} outside [0, 1]", line=lineno
            )
        n_shots = _parse_int(s_tok, lineno, "shots")
        if n_shots < 1:
            raise SpectrumParseError(f"line {lineno}: shots must be >= 1", line=lineno)
        orders.append(order)
        excs.append(exc)
        shots.append(n_shots)
    if not orders:
        raise SpectrumParseError("spectrum file has no data rows")
    return SpectrumFile(tuple(orders), tuple(excs), tuple(shots), seed=seed)


def serialize_spectrum(sf: SpectrumFile) -> str:
    lines = []
    if sf.seed is not None:
        lines.append(f"# seed = {sf.seed}")
    lines.append("order,excitation,shots")
    for o, e, s in zip(sf.orders, sf.excitations, sf.shots):
        lines.append(f"{o},{fmt(e)},{s}")
    return "\n".join(lines) + "\n"


def spectrum_file_from_sideband(spec: SidebandSpectrum) -> SpectrumFile:
    if spec.shots is None:
        raise InvalidConfigError("spectrum has no shot counts to serialize")
    return SpectrumFile(
        orders=tuple(int(m) for m in spec.orders),
        excitations=tuple(float(a) for a in spec.amplitudes),
        shots=tuple(int(s) for s in spec.shots),
        seed=spec.seed,
    )


# ---------------------------------------------------------------------------
# Rabi curve files (times stored in microseconds)


def parse_rabi_curve(text: str) -> RabiCurve:
    rows, seed = _parse_rows(text, "time_us,excitation,shots", 3)
    times, excs, shots = [], [], []
    for lineno, (t_tok, e_tok, s_tok) in rows:
        t = _parse_float(t_tok, lineno, "time_us")
        if t < 0:
            raise SpectrumParseError(f"line {lineno}: negative time", line=lineno)
        exc = _parse_float(e_tok, lineno, "excitation")
        if not (0.0 <= exc <= 1.0):
            raise SpectrumParseError(
                f"line {lineno}: excitation {exc!r} outside [0, 1]", line=lineno
            )
        shots.append(_parse_int(s_tok, lineno, "shots"))
        times.append(t)
        excs.append(exc)
    if not times:
        raise SpectrumParseError("Rabi curve file has no data rows")
    n_shots = set(shots)
    if len(n_shots) != 1:
        raise SpectrumParseError("Rabi curve files must use one shot count throughout")
    if min(n_shots) < 1:
        raise SpectrumParseError("shots must be >= 1")
    order = np.argsort(times, kind="stable")
    times = np.asarray(times)[order] * 1e-6
    excs = np.asarray(excs)[order]
    return RabiCurve(times=times, excitations=excs, shots=shots[0], seed=seed)


def serialize_rabi_curve(curve: RabiCurve) -> str:
    if curve.shots is None:
        raise InvalidConfigError("Rabi curve has no shot count to serialize")
    lines = []
    if curve.seed is not None:
        lines.append(f"# seed = {curve.seed}")
    lines.append("time_us,excitation,shots")
    for t, e in zip(curve.times, curve.excitations):
        lines.append(f"{fmt(t * 1e6)},{fmt(e)},{curve.shots}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# heating series files


def parse_heating_series(text: str) -> HeatingSeries:
    rows, _ = _parse_rows(text, "delay_ms,nbar,uncertainty", 3)
    delays, nbars, sigmas = [], [], []
    for lineno, (d_tok, n_tok, u_tok) in rows:
        delays.append(_parse_float(d_tok, lineno, "delay_ms"))
        nbars.append(_parse_float(n_tok, lineno, "nbar"))
        sigma = _parse_float(u_tok, lineno, "uncertainty")
        if sigma <= 0:
            raise SpectrumParseError(
                f"line {lineno}: uncertainty must be positive", line=lineno
            )
        sigmas.append(sigma)
    try:
        return HeatingSeries(
            delays=np.asarray(delays), nbars=np.asarray(nbars), uncertainties=np.asarray(sigmas)
        )
    except (InvalidConfigError, InsufficientDataError) as exc:
        raise SpectrumParseError(str(exc)) from exc


def serialize_heating_series(series: HeatingSeries) -> str:
    lines = ["delay_ms,nbar,uncertainty"]
    for d, n, u in zip(series.delays, series.nbars, series.uncertainties):
        lines.append(f"{fmt(d)},{fmt(n)},{fmt(u)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# fit reports


def render_report(entries: dict) -> str:
    """Serialize an ordered mapping as a flat key = value document."""
    lines = [f"report = {REPORT_FORMAT}"]
    for key, value in entries.items():
        if value is None:
            continue
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, (int, np.integer)):
            text = str(int(value))
        elif isinstance(value, (float, np.floating)):
            if not math.isfinite(value):
                raise InvalidConfigError(f"report field {key!r} is not finite")
            text = fmt(value)
        else:
            text = str(value)
            if "\n" in text:
                raise InvalidConfigError(f"report field {key!r} contains a newline")
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> dict:
    """Inverse of render_report; values come back as int, float, bool or str."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SpectrumParseError(f"line {lineno}: expected 'key = value'", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in out:
            raise SpectrumParseError(f"line {lineno}: duplicate key {key!r}", line=lineno)
        out[key] = _coerce(value)
    if out.get("report") != REPORT_FORMAT:
        raise SpectrumParseError("not an iontherm report")
    return out


def _coerce(value: str):
    if value == "true":
        return True
    if value == "false":
        return False
    try:
        return int(value)
    except ValueError:
        pass
    try:
        f = float(value)
    except ValueError:
        return value
    return f


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
