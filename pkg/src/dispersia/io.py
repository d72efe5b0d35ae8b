"""Serialization: kernel documents, run configs, energy traces, reports.

All documents are JSON. Writes are atomic (temp file + rename) so a failed
run never leaves a partial output behind.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .dispersion import PassivityReport
from .decay import DecayReport
from .kernels import (
    BUILTIN_SAMPLED,
    ExpPolyKernel,
    Kernel,
    SampledKernel,
)
from .modal import EnergyTrace, MediumSpec, cavity_modes


class ParseError(ValueError):
    """Config or document parse failure; message names the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


# ---------------------------------------------------------------------------
# kernel documents

def kernel_to_doc(kernel: Kernel) -> dict:
    if isinstance(kernel, SampledKernel):
        return {
            "type": "sampled_builtin",
            "name": kernel.name,
            "C": kernel.C,
            "delta": kernel.delta,
        }
    terms = []
    if kernel.offset:
        terms.append({
            "poly_re": [kernel.offset],
            "poly_im": [0.0],
            "z_re": 0.0,
            "z_im": 0.0,
        })
    for coeffs, z in kernel.complex_terms():
        terms.append({
            "poly_re": [float(c.real) for c in coeffs],
            "poly_im": [float(c.imag) for c in coeffs],
            "z_re": float(z.real),
            "z_im": float(z.imag),
        })
    return {"type": "exp_poly", "terms": terms}


def kernel_from_doc(doc: dict, where: str = "kernel") -> Kernel:
    if not isinstance(doc, dict):
        raise ParseError(where, "expected an object")
    ktype = doc.get("type")
    if ktype == "exp_poly":
        raw = doc.get("terms")
        if not isinstance(raw, list):
            raise ParseError(f"{where}.terms", "expected a list of terms")
        pairs = []
        for i, term in enumerate(raw):
            loc = f"{where}.terms[{i}]"
            if not isinstance(term, dict):
                raise ParseError(loc, "expected an object")
            for key in ("poly_re", "poly_im", "z_re", "z_im"):
                if key not in term:
                    raise ParseError(f"{loc}.{key}", "missing required field")
            pre = np.asarray(term["poly_re"], dtype=float)
            pim = np.asarray(term["poly_im"], dtype=float)
            if pre.ndim != 1 or pim.ndim != 1 or pre.size != pim.size:
                raise ParseError(
                    f"{loc}.poly_re",
                    "poly_re and poly_im must be equal-length coefficient arrays",
                )
            z = complex(float(term["z_re"]), float(term["z_im"]))
            pairs.append((pre + 1j * pim, z))
        if not pairs:
            return ExpPolyKernel.zero()
        return ExpPolyKernel.from_complex_terms(pairs)
    if ktype == "sampled_builtin":
        name = doc.get("name")
        if name not in BUILTIN_SAMPLED:
            raise ParseError(
                f"{where}.name",
                f"unknown builtin {name!r}; known: {sorted(BUILTIN_SAMPLED)}",
            )
        for key in ("C", "delta"):
            if key not in doc:
                raise ParseError(f"{where}.{key}", "missing required field")
        return SampledKernel(
            BUILTIN_SAMPLED[name],
            C=float(doc["C"]),
            delta=float(doc["delta"]),
            name=name,
        )
    raise ParseError(
        f"{where}.type", f"expected 'exp_poly' or 'sampled_builtin', got {ktype!r}"
    )


def _resolve_kernel(doc, where: str, base_dir: Path) -> Kernel:
    """A kernel field is either an inline document or {"file": path}."""
    if isinstance(doc, dict) and set(doc) == {"file"}:
        path = base_dir / doc["file"]
        if not path.is_file():
            raise ParseError(f"{where}.file", f"kernel file not found: {path}")
        try:
            inner = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"{where}.file", f"invalid JSON in {path}: {exc}") from exc
        return kernel_from_doc(inner, where)
    return kernel_from_doc(doc, where)


# ---------------------------------------------------------------------------
# run configs

@dataclass(frozen=True)
class SimulateConfig:
    medium: MediumSpec
    modes: tuple[tuple[float, float], ...]  # (wavenumber k, initial amplitude)
    dt: float
    T: float
    output_stride: int = 1


@dataclass(frozen=True)
class SpectrumConfig:
    medium: MediumSpec
    k_values: tuple[float, ...]


def _require(doc: dict, key: str, where: str = "config"):
    if key not in doc:
        raise ParseError(f"{where}.{key}", "missing required field")
    return doc[key]


def _positive(value, field: str) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ParseError(field, f"expected a number, got {value!r}") from None
    if not np.isfinite(x) or x <= 0:
        raise ParseError(field, f"must be a positive finite number, got {value!r}")
    return x


def parse_medium(doc: dict, base_dir: Path) -> MediumSpec:
    if not isinstance(doc, dict):
        raise ParseError("medium", "expected an object")
    eps = _positive(_require(doc, "eps", "medium"), "medium.eps")
    mu = _positive(_require(doc, "mu", "medium"), "medium.mu")
    nu_e = _resolve_kernel(_require(doc, "nu_e", "medium"), "medium.nu_e", base_dir)
    nu_h = _resolve_kernel(_require(doc, "nu_h", "medium"), "medium.nu_h", base_dir)
    return MediumSpec(eps=eps, mu=mu, nu_e=nu_e, nu_h=nu_h)


def _parse_modes(doc: dict) -> tuple[tuple[float, float], ...]:
    has_modes = "modes" in doc
    has_cavity = "cavity" in doc
    if has_modes == has_cavity:
        raise ParseError("config", "exactly one of 'modes' or 'cavity' is required")
    if has_modes:
        raw = doc["modes"]
        if not isinstance(raw, list):
            raise ParseError("modes", "expected a list of [k, amplitude] pairs")
        modes = []
        for i, pair in enumerate(raw):
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ParseError(f"modes[{i}]", "expected a [k, amplitude] pair")
            k = _positive(pair[0], f"modes[{i}][0]")
            amp = float(pair[1])
            if not np.isfinite(amp):
                raise ParseError(f"modes[{i}][1]", "amplitude must be finite")
            modes.append((k, amp))
        return tuple(modes)
    cav = doc["cavity"]
    if not isinstance(cav, dict):
        raise ParseError("cavity", "expected an object")
    length = _positive(_require(cav, "length", "cavity"), "cavity.length")
    n_max = _require(cav, "n_max", "cavity")
    if not isinstance(n_max, int) or n_max < 1:
        raise ParseError("cavity.n_max", "must be a positive integer")
    exponent = float(cav.get("amplitude_exponent", -1.5))
    return tuple(cavity_modes(length, n_max, exponent))


def parse_simulate_config(doc: dict, base_dir: Path) -> SimulateConfig:
    if not isinstance(doc, dict):
        raise ParseError("config", "expected a JSON object")
    medium = parse_medium(_require(doc, "medium"), base_dir)
    modes = _parse_modes(doc)
    dt = _positive(_require(doc, "dt"), "dt")
    T = _positive(_require(doc, "T"), "T")
    if T <= dt:
        raise ParseError("T", f"must exceed dt ({dt})")
    stride = doc.get("output_stride", 1)
    if not isinstance(stride, int) or stride < 1:
        raise ParseError("output_stride", "must be a positive integer")
    return SimulateConfig(medium=medium, modes=modes, dt=dt, T=T, output_stride=stride)


def parse_spectrum_config(doc: dict, base_dir: Path) -> SpectrumConfig:
    if not isinstance(doc, dict):
        raise ParseError("config", "expected a JSON object")
    medium = parse_medium(_require(doc, "medium"), base_dir)
    if "k_values" in doc:
        raw = doc["k_values"]
        if not isinstance(raw, list) or not raw:
            raise ParseError("k_values", "expected a nonempty list of wavenumbers")
        ks = tuple(_positive(v, f"k_values[{i}]") for i, v in enumerate(raw))
    elif "k_range" in doc:
        rng = doc["k_range"]
        if not isinstance(rng, dict):
            raise ParseError("k_range", "expected an object {k_min, k_max, num}")
        k_min = _positive(_require(rng, "k_min", "k_range"), "k_range.k_min")
        k_max = _positive(_require(rng, "k_max", "k_range"), "k_range.k_max")
        num = _require(rng, "num", "k_range")
        if not isinstance(num, int) or num < 2:
            raise ParseError("k_range.num", "must be an integer >= 2")
        if k_max <= k_min:
            raise ParseError("k_range.k_max", "must exceed k_min")
        ks = tuple(np.linspace(k_min, k_max, num))
    else:
        raise ParseError("config", "one of 'k_values' or 'k_range' is required")
    return SpectrumConfig(medium=medium, k_values=ks)


def load_config(path: str | os.PathLike) -> tuple[dict, Path]:
    p = Path(path)
    if not p.is_file():
        raise ParseError("config", f"file not found: {p}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError("config", f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return doc, p.parent


# ---------------------------------------------------------------------------
# atomic writes

def _atomic_write(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# energy traces

TRACE_HEADER = "t,energy,history_norm"


def format_trace(trace: EnergyTrace) -> str:
    hn = trace.history_norm
    if hn is None:
        hn = np.zeros_like(trace.times)
    lines = [TRACE_HEADER]
    for t, e, h in zip(trace.times, trace.energy, hn):
        lines.append(f"{t:.17g},{e:.17g},{h:.17g}")
    return "\n".join(lines) + "\n"


def write_trace(path: str | os.PathLike, trace: EnergyTrace) -> None:
    _atomic_write(path, format_trace(trace))


def read_trace(path: str | os.PathLike) -> EnergyTrace:
    p = Path(path)
    if not p.is_file():
        raise ParseError("trace", f"file not found: {p}")
    with p.open() as f:
        header = f.readline().strip()
        if header != TRACE_HEADER:
            raise ParseError("trace", f"bad header {header!r}, expected {TRACE_HEADER!r}")
        try:
            data = np.loadtxt(f, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise ParseError("trace", f"malformed row: {exc}") from exc
    if data.size == 0:
        return EnergyTrace(np.empty(0), np.empty(0), np.empty(0))
    if data.shape[1] != 3:
        raise ParseError("trace", f"expected 3 columns, got {data.shape[1]}")
    return EnergyTrace(data[:, 0], data[:, 1], data[:, 2])


# ---------------------------------------------------------------------------
# report documents (stable key order for golden-file comparison)

def passivity_report_to_doc(report: PassivityReport) -> dict:
    doc = {
        "passive": report.passive,
        "strictly_passive": report.strictly_passive,
    }
    if report.m is not None:
        doc["m"] = report.m
        doc["sigma_E"] = report.sigma_E
        doc["sigma_H"] = report.sigma_H
        doc["omega0"] = report.omega0
    doc["witnesses"] = list(report.witnesses)
    doc["certified"] = report.certified
    return doc


def decay_report_to_doc(report: DecayReport) -> dict:
    doc = {"kind": report.kind}
    if report.rate is not None:
        doc["rate"] = report.rate
    if report.slope is not None:
        doc["slope"] = report.slope
    doc["fit_window"] = list(report.fit_window)
    doc["r_squared"] = report.r_squared
    doc["residual"] = report.residual
    return doc


def write_report(path: Optional[str | os.PathLike], doc: dict) -> str:
    """Serialize a report document; write it if a path is given."""
    text = json.dumps(doc, indent=2) + "\n"
    if path is not None:
        _atomic_write(path, text)
    return text
