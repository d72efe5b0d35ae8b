"""Susceptibility kernels: evaluation, decay certificates, Laplace transforms.

Two kernel representations are supported.  ``ExpPolyKernel`` stores finite
sums of damped polynomial oscillations (the family covering Debye, Lorentz
and Drude media) in a real cosine/sine form, so evaluation never leaves the
reals.  ``SampledKernel`` wraps a black-box evaluator together with a
user-supplied exponential bound on the second derivative; its Laplace values
are obtained by adaptive quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Union

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import integrate


class KernelError(ValueError):
    """Invalid kernel data or an operation outside a kernel's domain."""


class NotInClassK(KernelError):
    """The kernel violates one of the decay conditions (non-damped term)."""


class CertificationFailure(KernelError):
    """A claimed second-derivative bound fails on the check grid."""

    def __init__(self, message: str, t_violation: float):
        super().__init__(message)
        self.t_violation = t_violation


class UnsupportedPoint(KernelError):
    """Laplace transform requested at a point the quadrature path cannot handle."""


def _trim(coeffs, rel_tol: float = 0.0) -> np.ndarray:
    """Drop trailing coefficients that are zero (or tiny relative to the rest)."""
    c = np.atleast_1d(np.asarray(coeffs, dtype=float))
    if c.size == 0:
        return np.zeros(1)
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return np.zeros(1)
    cut = rel_tol * scale
    last = c.size - 1
    while last > 0 and abs(c[last]) <= cut:
        last -= 1
    out = c[: last + 1].copy()
    if rel_tol > 0.0:
        out[np.abs(out) <= cut] = 0.0
    return out


@dataclass(frozen=True)
class DampedTerm:
    """One (p(t) cos(y t) + q(t) sin(y t)) e^{x t} contribution, x < 0."""

    p: tuple[float, ...]
    q: tuple[float, ...]
    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(v) for v in _trim(self.p)))
        object.__setattr__(self, "q", tuple(float(v) for v in _trim(self.q)))
        if self.y < 0:
            raise KernelError("oscillation frequency must be >= 0 (fold conjugates)")
        if self.y == 0 and any(self.q):
            raise KernelError("sine coefficients are meaningless for y = 0")

    @property
    def degree(self) -> int:
        return max(len(self.p), len(self.q)) - 1


@dataclass(frozen=True)
class ExpPolyKernel:
    """nu(t) = offset + sum_j (p_j(t) cos(y_j t) + q_j(t) sin(y_j t)) e^{x_j t}.

    The constant ``offset`` accommodates kernels such as the lossy Drude model
    beta*(1 - e^{-nu t}) whose value does not vanish at infinity; it drops out
    of every derivative, so the class-K conditions are untouched by it.
    """

    terms: tuple[DampedTerm, ...] = ()
    offset: float = 0.0

    @property
    def is_zero(self) -> bool:
        return not self.terms and self.offset == 0.0

    def value_at_zero(self) -> float:
        return self.offset + sum(t.p[0] for t in self.terms)

    def derivative(self) -> "ExpPolyKernel":
        """Exact term-wise derivative; again an ExpPolyKernel (offset drops)."""
        new_terms = []
        for t in self.terms:
            p = np.asarray(t.p)
            q = np.asarray(t.q)
            n = max(p.size, q.size)
            p = np.pad(p, (0, n - p.size))
            q = np.pad(q, (0, n - q.size))
            dp = np.pad(npoly.polyder(p), (0, 1)) if n > 1 else np.zeros(1)
            dq = np.pad(npoly.polyder(q), (0, 1)) if n > 1 else np.zeros(1)
            dp = dp[:n] if dp.size >= n else np.pad(dp, (0, n - dp.size))
            dq = dq[:n] if dq.size >= n else np.pad(dq, (0, n - dq.size))
            np_ = dp + t.x * p + t.y * q
            nq_ = dq + t.x * q - t.y * p
            if np.any(_trim(np_, 1e-15) != 0) or np.any(_trim(nq_, 1e-15) != 0):
                new_terms.append(DampedTerm(tuple(np_), tuple(nq_) if t.y else (0.0,), t.x, t.y))
        return ExpPolyKernel(tuple(new_terms), 0.0)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, self.offset, dtype=float)
        for term in self.terms:
            val = npoly.polyval(t, term.p) * np.cos(term.y * t)
            if term.y:
                val = val + npoly.polyval(t, term.q) * np.sin(term.y * t)
            out += val * np.exp(term.x * t)
        return out if out.shape else float(out)

    def complex_terms(self) -> Iterator[tuple[np.ndarray, complex]]:
        """Equivalent P_j(t) e^{z_j t} form with conjugate pairs listed explicitly.

        The constant offset is *not* included.
        """
        for t in self.terms:
            p = np.asarray(t.p, dtype=complex)
            q = np.asarray(t.q, dtype=complex)
            n = max(p.size, q.size)
            p = np.pad(p, (0, n - p.size))
            q = np.pad(q, (0, n - q.size))
            if t.y == 0:
                yield p.real.astype(complex), complex(t.x)
            else:
                c = (p - 1j * q) / 2.0
                yield c, complex(t.x, t.y)
                yield np.conj(c), complex(t.x, -t.y)

    @staticmethod
    def zero() -> "ExpPolyKernel":
        return ExpPolyKernel((), 0.0)

    @staticmethod
    def from_complex_terms(terms) -> "ExpPolyKernel":
        """Fold a conjugate-closed list of (complex poly coeffs, z) into real form.

        A term with z == 0 is only admissible as a real constant (degree 0);
        it becomes the kernel offset.  Any other term needs Re z < 0, enforced
        at certification time.
        """
        offset = 0.0
        pending: list[tuple[np.ndarray, complex]] = []
        for coeffs, z in terms:
            c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
            z = complex(z)
            if z == 0:
                c = c[np.abs(c) > 0] if c.size > 1 else c
                if c.size > 1:
                    raise KernelError("z = 0 term must be a constant (Drude offset)")
                if abs(c[0].imag) > 1e-12 * (1 + abs(c[0])):
                    raise KernelError("z = 0 term must be real")
                offset += float(c[0].real)
            else:
                pending.append((c, z))

        used = [False] * len(pending)
        real_terms: list[DampedTerm] = []
        for i, (ci, zi) in enumerate(pending):
            if used[i]:
                continue
            used[i] = True
            if zi.imag == 0:
                if np.max(np.abs(ci.imag)) > 1e-12 * (1 + np.max(np.abs(ci))):
                    raise KernelError("real-exponent term has complex coefficients")
                real_terms.append(DampedTerm(tuple(ci.real), (0.0,), zi.real, 0.0))
                continue
            # find the conjugate partner
            partner = None
            for j in range(i + 1, len(pending)):
                cj, zj = pending[j]
                if used[j] or cj.size != ci.size:
                    continue
                if abs(zj - np.conj(zi)) <= 1e-12 * (1 + abs(zi)) and np.allclose(
                    cj, np.conj(ci), rtol=1e-10, atol=1e-12
                ):
                    partner = j
                    break
            if partner is None:
                raise KernelError(
                    f"term with z = {zi} has no conjugate partner; kernel would be complex"
                )
            used[partner] = True
            c, z = (ci, zi) if zi.imag > 0 else (np.conj(ci), np.conj(zi))
            p = 2.0 * c.real
            q = -2.0 * c.imag
            real_terms.append(DampedTerm(tuple(p), tuple(q), z.real, z.imag))
        return ExpPolyKernel(tuple(real_terms), offset)


def debye(beta: float = 1.0, tau: float = 1.0) -> ExpPolyKernel:
    """nu(t) = beta e^{-t/tau}."""
    return ExpPolyKernel((DampedTerm((beta,), (0.0,), -1.0 / tau, 0.0),))


def lorentz(beta: float = 1.0, nu0: float = 1.0, nu: float = 1.0) -> ExpPolyKernel:
    """nu(t) = beta sin(nu0 t) e^{-nu t / 2}."""
    return ExpPolyKernel((DampedTerm((0.0,), (beta,), -nu / 2.0, nu0),))


def drude(beta: float = 1.0, nu: float = 1.0) -> ExpPolyKernel:
    """nu(t) = beta (1 - e^{-nu t})."""
    return ExpPolyKernel((DampedTerm((-beta,), (0.0,), -nu, 0.0),), offset=beta)


@dataclass(frozen=True)
class SampledKernel:
    """Black-box kernel t -> (nu, nu', nu'') with a claimed |nu''| <= C e^{-delta t}."""

    evaluator: Callable[[np.ndarray, int], np.ndarray] = field(compare=False)
    C: float = 1.0
    delta: float = 1.0
    name: str = "sampled"

    def __post_init__(self):
        if self.C <= 0 or self.delta <= 0:
            raise KernelError("decay certificate needs C > 0 and delta > 0")

    def __call__(self, t, order: int = 0):
        return self.evaluator(np.asarray(t, dtype=float), order)


def _gaussian_eval(t: np.ndarray, order: int) -> np.ndarray:
    g = np.exp(-(t**2))
    if order == 0:
        return g
    if order == 1:
        return -2.0 * t * g
    return (4.0 * t**2 - 2.0) * g


# max_t |(4 t^2 - 2) e^{-t^2}| e^t = 3.3414 at t = 1.428, so C = 3.4 leaves margin
GAUSSIAN = SampledKernel(_gaussian_eval, C=3.4, delta=1.0, name="gaussian")

BUILTIN_SAMPLED: dict[str, Callable[[np.ndarray, int], np.ndarray]] = {
    "gaussian": _gaussian_eval,
}

Kernel = Union[ExpPolyKernel, SampledKernel]


@dataclass(frozen=True)
class ClassKCertificate:
    C: float
    delta: float
    checked_horizon: float
    max_violation: float


from functools import lru_cache


@lru_cache(maxsize=1024)
def _nth_derivative(kernel: ExpPolyKernel, order: int) -> ExpPolyKernel:
    if order == 0:
        return kernel
    return _nth_derivative(kernel, order - 1).derivative()


def eval_kernel(kernel: Kernel, t, order: int = 0):
    """Evaluate nu, nu' or nu'' at t >= 0.

    ExpPolyKernel derivatives come from exact term-wise differentiation.
    """
    if order not in (0, 1, 2):
        raise KernelError(f"order must be 0, 1 or 2, got {order}")
    tarr = np.asarray(t, dtype=float)
    if np.any(tarr < 0):
        raise KernelError("kernel evaluation requires t >= 0")
    if isinstance(kernel, SampledKernel):
        out = kernel(tarr, order)
    else:
        out = _nth_derivative(kernel, order)(tarr)
    out = np.asarray(out, dtype=float)
    return out if out.shape else float(out)


def certify_class_K(kernel: Kernel) -> ClassKCertificate:
    """Produce (C, delta) with |nu''(t)| <= C e^{-delta t}, or raise.

    For ExpPolyKernel the rate is delta = 0.9 * min_j |Re z_j| and C is a
    padded grid maximum of |nu''| e^{delta t}; the construction also checks
    nu'(t) -> 0 at the horizon and the identity nu'(t) = -int_t^inf nu''.
    For SampledKernel the user-supplied pair is spot-checked.
    """
    if isinstance(kernel, SampledKernel):
        horizon = 50.0 / kernel.delta
        tgrid = np.concatenate(([0.0], np.geomspace(1e-6, horizon, 2000)))
        excess = np.abs(kernel(tgrid, 2)) - kernel.C * np.exp(-kernel.delta * tgrid)
        worst = int(np.argmax(excess))
        if excess[worst] > 1e-9:
            raise CertificationFailure(
                f"claimed bound C={kernel.C}, delta={kernel.delta} violated at "
                f"t={tgrid[worst]:.6g} by {excess[worst]:.3g}",
                float(tgrid[worst]),
            )
        return ClassKCertificate(kernel.C, kernel.delta, horizon, float(max(excess.max(), -0.0)))

    if not isinstance(kernel, ExpPolyKernel):
        raise KernelError(f"unknown kernel type {type(kernel)!r}")

    bad = [t.x for t in kernel.terms if t.x >= 0]
    if bad:
        raise NotInClassK(f"term with Re z = {bad[0]} >= 0: second derivative cannot decay")

    if not kernel.terms:
        # constant or zero kernel: nu'' vanishes identically
        return ClassKCertificate(1e-12, 1.0, 0.0, 0.0)

    delta = 0.9 * min(abs(t.x) for t in kernel.terms)
    horizon = 20.0 / delta
    tgrid = np.concatenate(([0.0], np.geomspace(1e-8, horizon, 10_000)))
    nupp = kernel.derivative().derivative()
    weighted = np.abs(nupp(tgrid)) * np.exp(delta * tgrid)
    C = 1.05 * float(np.max(weighted))
    C = max(C, 1e-12)

    nup = kernel.derivative()
    tail = abs(nup(np.asarray(50.0 / delta)))
    scale = max(1.0, abs(nup(np.asarray(0.0))))
    if tail > 1e-8 * scale:
        raise CertificationFailure(
            f"nu' does not vanish at the horizon: |nu'({50.0/delta:.3g})| = {tail:.3g}",
            50.0 / delta,
        )
    # nu'(t) = -int_t^inf nu''(y) dy, checked by quadrature at three points
    for t0 in (0.0, 1.0, 10.0):
        val, _ = integrate.quad(
            lambda y: nupp(np.asarray(y)), t0, t0 + 60.0 / delta, epsabs=1e-12, limit=400
        )
        if abs(nup(np.asarray(t0)) + val) > 1e-8 * scale:
            raise CertificationFailure(
                f"nu'(t) + int_t^inf nu'' = {nup(np.asarray(t0)) + val:.3g} at t={t0}", t0
            )

    excess = np.abs(nupp(tgrid)) - C * np.exp(-delta * tgrid)
    return ClassKCertificate(C, delta, horizon, float(excess.max()))


def laplace(kernel: Kernel, lam: complex) -> complex:
    """Laplace transform L nu(lambda) for Re lambda >= 0.

    ExpPolyKernel uses the exact partial-fraction sum; SampledKernel uses
    adaptive quadrature, routed through L nu'' on and near the imaginary axis
    because nu itself need not be integrable there.
    """
    lam = complex(lam)
    if lam.real < 0:
        raise UnsupportedPoint("Laplace transform only defined for Re lambda >= 0")
    if isinstance(kernel, ExpPolyKernel):
        if any(t.x >= 0 for t in kernel.terms):
            raise NotInClassK("kernel has a non-damped term")
        if lam == 0 and kernel.offset != 0.0:
            raise UnsupportedPoint("pole at lambda = 0 (kernel has a constant part)")
        total = kernel.offset / lam if kernel.offset else 0.0
        for coeffs, z in kernel.complex_terms():
            fact = 1.0
            for ell, c in enumerate(coeffs):
                if ell > 0:
                    fact *= ell
                total += c * fact / (lam - z) ** (ell + 1)
        return complex(total)

    # sampled path
    delta = kernel.delta
    if lam.real > delta / 2.0:
        upper = 160.0 / delta
        return _oscillatory_laplace(lambda s: kernel(np.asarray(s), 0), lam, upper)
    if lam == 0:
        raise UnsupportedPoint("lambda = 0 is not supported on the quadrature path")
    upper = 60.0 / delta
    lap2 = _oscillatory_laplace(lambda s: kernel(np.asarray(s), 2), lam, upper)
    nu0 = float(kernel(np.asarray(0.0), 0))
    nup0 = float(kernel(np.asarray(0.0), 1))
    return (nu0 + (nup0 + lap2) / lam) / lam


def _oscillatory_laplace(f, lam: complex, upper: float) -> complex:
    """int_0^upper e^{-lam s} f(s) ds with the oscillation handled by weighted quad."""
    sigma, w = lam.real, lam.imag

    def damped(s):
        return float(np.exp(-sigma * s) * f(s))

    if w == 0.0:
        re, _ = integrate.quad(damped, 0.0, upper, epsabs=1e-11, limit=400)
        return complex(re, 0.0)
    re, _ = integrate.quad(damped, 0.0, upper, weight="cos", wvar=w, epsabs=1e-11, limit=400)
    im, _ = integrate.quad(damped, 0.0, upper, weight="sin", wvar=w, epsabs=1e-11, limit=400)
    return complex(re, -im)


def lambda_laplace_rational(kernel: ExpPolyKernel) -> tuple[np.ndarray, np.ndarray]:
    """Real-coefficient rational (num, den) with lambda L nu(lambda) = num/den.

    Built from lambda L nu = nu(0) + L nu', so the denominator collects only
    the damped poles of nu'; a Drude-type constant offset introduces no pole.
    Coefficient arrays are ascending in lambda.
    """
    if any(t.x >= 0 for t in kernel.terms):
        raise NotInClassK("kernel has a non-damped term")
    theta = kernel.derivative()
    groups: list[tuple[np.ndarray, complex]] = []
    for coeffs, z in theta.complex_terms():
        for i, (c0, z0) in enumerate(groups):
            if z0 == z:
                n = max(c0.size, coeffs.size)
                merged = np.pad(c0, (0, n - c0.size)) + np.pad(coeffs, (0, n - coeffs.size))
                groups[i] = (merged, z0)
                break
        else:
            groups.append((np.array(coeffs, dtype=complex), z))

    den = np.array([1.0 + 0j])
    for c, z in groups:
        den = npoly.polymul(den, npoly.polypow(np.array([-z, 1.0]), c.size))

    num = np.zeros(1, dtype=complex)
    for j, (c, z) in enumerate(groups):
        other = np.array([1.0 + 0j])
        for i, (ci, zi) in enumerate(groups):
            if i != j:
                other = npoly.polymul(other, npoly.polypow(np.array([-zi, 1.0]), ci.size))
        inner = np.zeros(1, dtype=complex)
        fact = 1.0
        for ell, cl in enumerate(c):
            if ell > 0:
                fact *= ell
            part = npoly.polypow(np.array([-z, 1.0]), c.size - 1 - ell) * (cl * fact)
            inner = npoly.polyadd(inner, part)
        num = npoly.polyadd(num, npoly.polymul(inner, other))

    num = npoly.polyadd(num, kernel.value_at_zero() * den)
    for arr in (num, den):
        resid = np.max(np.abs(arr.imag))
        if resid > 1e-9 * (1.0 + np.max(np.abs(arr))):
            raise KernelError(f"rational recombination left imaginary residue {resid:.3g}")
    return _trim(num.real, 1e-12), _trim(den.real, 1e-12)
