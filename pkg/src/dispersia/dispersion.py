"""Frequency-axis analysis: rational form of i w L nu(i w) and passivity checks.

For exponential-polynomial kernels every decision is made on exact polynomial
data: nonnegativity on the real axis is decided from companion-matrix roots
with sign evaluation between them, never from grid sampling alone.  Sampled
kernels get a dense-grid check labelled as such.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from .kernels import (
    ExpPolyKernel,
    Kernel,
    KernelError,
    SampledKernel,
    _trim,
    lambda_laplace_rational,
    laplace,
)


class PassivityError(KernelError):
    """Raised when a decay exponent is requested but does not exist."""


@dataclass(frozen=True)
class OmegaRational:
    """i w L nu(i w) = Pr(w)/Qr(w) + i Pi(w)/Qi(w) with real coefficients."""

    pr: tuple[float, ...]
    qr: tuple[float, ...]
    pi: tuple[float, ...]
    qi: tuple[float, ...]

    def real_part(self, w):
        return npoly.polyval(w, self.pr) / npoly.polyval(w, self.qr)

    def imag_part(self, w):
        return npoly.polyval(w, self.pi) / npoly.polyval(w, self.qi)

    def __call__(self, w):
        return self.real_part(w) + 1j * self.imag_part(w)

    @property
    def is_zero(self) -> bool:
        return not any(self.pr) and not any(self.pi)


@dataclass(frozen=True)
class PassivityReport:
    passive: bool
    strictly_passive: Optional[bool] = None
    m: Optional[int] = None
    sigma_E: float = 0.0
    sigma_H: float = 0.0
    omega0: float = 0.0
    witnesses: tuple[float, ...] = ()
    certified: bool = True


def _poly_iw_split(coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Real and imaginary parts of A(i w) as real polynomials in w."""
    c = np.asarray(coeffs, dtype=float)
    re = np.zeros_like(c)
    im = np.zeros_like(c)
    for k, a in enumerate(c):
        r = k % 4
        if r == 0:
            re[k] = a
        elif r == 1:
            im[k] = a
        elif r == 2:
            re[k] = -a
        else:
            im[k] = -a
    return _trim(re), _trim(im)


def omega_form(kernel: ExpPolyKernel) -> OmegaRational:
    """Exact rational decomposition of w -> i w L nu(i w).

    The zero kernel maps to 0/1 + i 0/1.
    """
    if not isinstance(kernel, ExpPolyKernel):
        raise KernelError("omega_form needs an exponential-polynomial kernel")
    if kernel.is_zero:
        return OmegaRational((0.0,), (1.0,), (0.0,), (1.0,))
    num, den = lambda_laplace_rational(kernel)
    ar, ai = _poly_iw_split(num)
    br, bi = _poly_iw_split(den)
    pr = npoly.polyadd(npoly.polymul(ar, br), npoly.polymul(ai, bi))
    pi = npoly.polysub(npoly.polymul(ai, br), npoly.polymul(ar, bi))
    q = npoly.polyadd(npoly.polymul(br, br), npoly.polymul(bi, bi))
    pr = _trim(pr, 1e-10)
    pi = _trim(pi, 1e-10)
    q = _trim(q, 1e-10)
    pr, pi, q = _cancel_common(pr, pi, q)
    lead = q[-1]
    pr = pr / lead
    pi = pi / lead
    q = q / lead
    return OmegaRational(tuple(pr), tuple(q), tuple(pi), tuple(q))


def _cancel_common(pr: np.ndarray, pi: np.ndarray, q: np.ndarray):
    """Deflate factors of q shared (as roots) by both numerators."""
    if q.size <= 1:
        return pr, pi, q
    roots = np.roots(q[::-1])
    changed = True
    while changed and q.size > 1:
        changed = False
        for r in roots:
            if q.size <= 1:
                break
            sq = npoly.polyval(r, np.abs(q)) or 1.0
            spr = npoly.polyval(abs(r), np.abs(pr)) or 1.0
            spi = npoly.polyval(abs(r), np.abs(pi)) or 1.0
            if (
                abs(npoly.polyval(r, q)) < 1e-10 * sq
                and abs(npoly.polyval(r, pr)) < 1e-10 * spr
                and abs(npoly.polyval(r, pi)) < 1e-10 * spi
            ):
                if abs(r.imag) < 1e-12 * (1 + abs(r)):
                    factor = np.array([-r.real, 1.0])
                else:
                    factor = np.array([abs(r) ** 2, -2 * r.real, 1.0])
                q2, rem_q = npoly.polydiv(q, factor)
                pr2, rem_pr = npoly.polydiv(pr, factor)
                pi2, rem_pi = npoly.polydiv(pi, factor)
                if (
                    np.max(np.abs(rem_q)) < 1e-9 * max(1.0, np.max(np.abs(q)))
                    and np.max(np.abs(rem_pr)) < 1e-9 * max(1.0, np.max(np.abs(pr)))
                    and np.max(np.abs(rem_pi)) < 1e-9 * max(1.0, np.max(np.abs(pi)))
                ):
                    q, pr, pi = _trim(q2, 1e-12), _trim(pr2, 1e-12), _trim(pi2, 1e-12)
                    roots = np.roots(q[::-1]) if q.size > 1 else np.array([])
                    changed = True
                    break
    return pr, pi, q


def _real_roots(coeffs: np.ndarray) -> np.ndarray:
    c = _trim(coeffs, 1e-12)
    if c.size <= 1:
        return np.array([])
    roots = np.roots(c[::-1])
    real = roots[np.abs(roots.imag) < 1e-10 * (1.0 + np.abs(roots))].real
    return np.sort(real)


def _poly_nonneg(coeffs: np.ndarray) -> tuple[bool, Optional[float]]:
    """Is p(w) >= 0 for all real w?  Returns (verdict, witness)."""
    c = _trim(coeffs, 1e-12)
    if c.size == 1:
        return (True, None) if c[0] >= 0 else (False, 0.0)
    scale = np.max(np.abs(c))
    if c[-1] < 0:
        w = 2.0 * _root_radius(c) + 1.0
        return False, w
    reals = _real_roots(c)
    probes = [0.0]
    if reals.size:
        probes.extend(0.5 * (reals[:-1] + reals[1:]))
        probes.append(reals[0] - 1.0)
        probes.append(reals[-1] + 1.0)
    for w in probes:
        val = npoly.polyval(w, c)
        tol = 1e-9 * scale * max(1.0, abs(w)) ** (c.size - 1)
        if val < -tol:
            return False, float(w)
    return True, None


def _poly_positive_off_zero(coeffs: np.ndarray) -> tuple[bool, Optional[float]]:
    """Is p(w) > 0 for all real w != 0?  A root at w = 0 is allowed."""
    c = _trim(coeffs, 1e-12)
    if c.size == 1:
        return (True, None) if c[0] > 0 else (False, 1.0)
    if c[-1] <= 0:
        return False, 2.0 * _root_radius(c) + 1.0
    reals = _real_roots(c)
    radius = _root_radius(c)
    nonzero = reals[np.abs(reals) > 1e-7 * (1.0 + radius)]
    if nonzero.size:
        return False, float(nonzero[np.argmax(np.abs(nonzero))])
    ok, witness = _poly_nonneg(c)
    if not ok:
        return False, witness
    return True, None


def _root_radius(coeffs: np.ndarray) -> float:
    c = _trim(coeffs, 1e-12)
    if c.size <= 1:
        return 0.0
    return float(np.max(np.abs(np.roots(c[::-1]))))


def _sampled_real_part(kernel: SampledKernel, wgrid: np.ndarray) -> np.ndarray:
    return np.array([(1j * w * laplace(kernel, 1j * w)).real for w in wgrid])


_SAMPLED_GRID = np.geomspace(1e-2, 1e3, 600)


def check_passivity(nu_e: Kernel, nu_h: Kernel) -> PassivityReport:
    """Re(i w L nu(i w)) >= 0 for every real w, for both kernels."""
    witnesses: list[float] = []
    passive = True
    certified = True
    for kernel in (nu_e, nu_h):
        if isinstance(kernel, ExpPolyKernel):
            form = omega_form(kernel)
            ok, witness = _poly_nonneg(np.asarray(form.pr))
            if not ok:
                passive = False
                witnesses.append(float(witness))
        else:
            certified = False
            vals = _sampled_real_part(kernel, _SAMPLED_GRID)
            bad = vals < -1e-9
            if np.any(bad):
                passive = False
                witnesses.append(float(_SAMPLED_GRID[np.argmax(bad)]))
    return PassivityReport(passive=passive, witnesses=tuple(witnesses), certified=certified)


def _combined_numerator(nu_e: Kernel, nu_h: Kernel):
    fe = omega_form(nu_e) if isinstance(nu_e, ExpPolyKernel) else None
    fh = omega_form(nu_h) if isinstance(nu_h, ExpPolyKernel) else None
    if fe is None or fh is None:
        return None, None, fe, fh
    num = npoly.polyadd(
        npoly.polymul(np.asarray(fe.pr), np.asarray(fh.qr)),
        npoly.polymul(np.asarray(fh.pr), np.asarray(fe.qr)),
    )
    den = npoly.polymul(np.asarray(fe.qr), np.asarray(fh.qr))
    return _trim(num, 1e-10), _trim(den, 1e-10), fe, fh


def check_strict_passivity(nu_e: Kernel, nu_h: Kernel) -> PassivityReport:
    """R(w) = Re(i w L nu_E) + Re(i w L nu_H) > 0 for all w != 0."""
    base = check_passivity(nu_e, nu_h)
    num, den, _, _ = _combined_numerator(nu_e, nu_h)
    if num is None:
        wgrid = _SAMPLED_GRID
        vals = np.zeros_like(wgrid)
        for kernel in (nu_e, nu_h):
            if isinstance(kernel, ExpPolyKernel):
                if not kernel.is_zero:
                    vals += omega_form(kernel).real_part(wgrid)
            else:
                vals += _sampled_real_part(kernel, wgrid)
        strict = bool(np.all(vals > 0.0))
        witness = () if strict else (float(wgrid[np.argmin(vals)]),)
        return replace(base, strictly_passive=strict and base.passive,
                       witnesses=base.witnesses + witness, certified=False)
    ok, witness = _poly_positive_off_zero(num)
    strict = bool(ok and base.passive)
    extra = () if ok else (float(witness),)
    return replace(base, strictly_passive=strict, witnesses=base.witnesses + extra)


def decay_exponent(nu_e: Kernel, nu_h: Kernel) -> PassivityReport:
    """Extract m, sigma_E, sigma_H, omega0 realizing the quantified bound
    |w|^m Re(i w L nu(i w)) >= sigma for |w| >= omega0."""
    report = check_strict_passivity(nu_e, nu_h)
    if not report.strictly_passive:
        raise PassivityError("decay exponent requires strict passivity")
    if not (isinstance(nu_e, ExpPolyKernel) and isinstance(nu_h, ExpPolyKernel)):
        return _decay_exponent_sampled(nu_e, nu_h, report)

    num, den, fe, fh = _combined_numerator(nu_e, nu_h)
    deficit = (den.size - 1) - (num.size - 1)
    ratio = num[-1] / den[-1]
    if deficit % 2 != 0:
        raise PassivityError(f"degree deficit {deficit} is odd: no decay exponent exists")
    if ratio <= 0:
        raise PassivityError("negative leading coefficient ratio: no decay exponent exists")
    m = deficit

    roots: list[float] = []
    per_field: dict[str, Optional[int]] = {"E": None, "H": None}
    for label, form in (("E", fe), ("H", fh)):
        pr = _trim(np.asarray(form.pr), 1e-12)
        if form.is_zero or (pr.size == 1 and pr[0] == 0.0):
            continue
        per_field[label] = (len(_trim(np.asarray(form.qr), 1e-12)) - 1) - (pr.size - 1)
        roots.extend(np.abs(_real_roots(pr)))
    omega0 = 2.0 * (max(roots) if roots else 0.0) + 1.0

    wgrid = np.geomspace(omega0, 1e4, 4000)
    sig = {"E": 0.0, "H": 0.0}
    for label, form in (("E", fe), ("H", fh)):
        if per_field[label] is not None and per_field[label] == m:
            sig[label] = float(np.min(np.abs(wgrid) ** m * form.real_part(wgrid)))
    return replace(report, m=m, sigma_E=sig["E"], sigma_H=sig["H"], omega0=omega0)


def _decay_exponent_sampled(nu_e: Kernel, nu_h: Kernel, report: PassivityReport) -> PassivityReport:
    """Asymptotic sampling fallback when no rational structure is available."""
    wgrid = np.geomspace(10.0, 60.0, 25)
    vals = np.zeros_like(wgrid)
    for kernel in (nu_e, nu_h):
        if isinstance(kernel, ExpPolyKernel):
            if not kernel.is_zero:
                vals += omega_form(kernel).real_part(wgrid)
        else:
            vals += _sampled_real_part(kernel, wgrid)
    if np.any(vals <= 0):
        raise PassivityError("sampled real part not positive at large frequency")
    slope = np.polyfit(np.log(wgrid), np.log(vals), 1)[0]
    m = max(0, int(round(-slope)))
    omega0 = 10.0
    sigma = float(np.min(np.abs(wgrid) ** m * vals))
    return replace(report, m=m, sigma_E=sigma, sigma_H=0.0, omega0=omega0, certified=False)


def analyze(nu_e: Kernel, nu_h: Kernel) -> PassivityReport:
    """Full chain: passivity, strict passivity and (when it exists) the exponent."""
    report = check_strict_passivity(nu_e, nu_h)
    if not report.strictly_passive:
        return report
    try:
        return decay_exponent(nu_e, nu_h)
    except PassivityError:
        return report
