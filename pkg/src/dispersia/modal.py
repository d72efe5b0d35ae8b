"""Per-mode reduction of the dispersive cavity system and its integrators.

Each divergence-free cavity eigenmode with curl eigenvalue k obeys a
2-component Volterra system; for exponential-polynomial kernels the memory
convolutions close exactly into auxiliary linear states (one companion block
per damped term), so the mode becomes a small constant-coefficient ODE that
is advanced with the matrix exponential.  A history-quadrature integrator is
kept as the independent reference.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.linalg import expm

from .kernels import ExpPolyKernel, Kernel, KernelError, SampledKernel, eval_kernel


class ModalError(ValueError):
    pass


class HistoryTruncationError(ModalError):
    def __init__(self, message: str, s_max: float):
        super().__init__(message)
        self.s_max = s_max


@dataclass(frozen=True)
class MediumSpec:
    eps: float
    mu: float
    nu_e: Kernel = ExpPolyKernel.zero()
    nu_h: Kernel = ExpPolyKernel.zero()

    def __post_init__(self):
        if self.eps <= 0 or self.mu <= 0:
            raise ModalError("permittivity and permeability must be positive")


@dataclass(frozen=True, eq=False)
class ModeSystem:
    """Augmented linear system for one mode: state = (E, H, aux_E..., aux_H...)."""

    k: float
    A: np.ndarray
    e_slot: int
    h_slot: int
    aux_e: slice
    aux_h: slice
    medium: MediumSpec

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def initial_state(self, amplitude: float = 1.0) -> np.ndarray:
        state = np.zeros(self.dim)
        state[self.e_slot] = amplitude
        return state

    def energy(self, state: np.ndarray) -> float:
        return 0.5 * (
            self.medium.eps * state[self.e_slot] ** 2
            + self.medium.mu * state[self.h_slot] ** 2
        )


def _companion_blocks(theta: ExpPolyKernel):
    """Realize y(t) = int_0^t theta(t-s) f(s) ds as linear states.

    Yields (block matrix, drive column vector, readout row vector) triples.
    """
    for term in theta.terms:
        p = np.asarray(term.p)
        q = np.asarray(term.q)
        d = max(p.size, q.size) - 1
        p = np.pad(p, (0, d + 1 - p.size))
        q = np.pad(q, (0, d + 1 - q.size))
        fact = [1.0]
        for ell in range(1, d + 1):
            fact.append(fact[-1] * ell)
        if term.y == 0.0:
            n = d + 1
            B = np.zeros((n, n))
            drive = np.zeros(n)
            read = np.zeros(n)
            drive[0] = 1.0
            for ell in range(n):
                B[ell, ell] = term.x
                if ell > 0:
                    B[ell, ell - 1] = 1.0
                read[ell] = p[ell] * fact[ell]
            yield B, drive, read
        else:
            n = 2 * (d + 1)
            B = np.zeros((n, n))
            drive = np.zeros(n)
            read = np.zeros(n)
            drive[0] = 1.0
            for ell in range(d + 1):
                u, v = 2 * ell, 2 * ell + 1
                B[u, u] = term.x
                B[u, v] = -term.y
                B[v, u] = term.y
                B[v, v] = term.x
                if ell > 0:
                    B[u, u - 2] = 1.0
                    B[v, v - 2] = 1.0
                read[u] = p[ell] * fact[ell]
                read[v] = q[ell] * fact[ell]
            yield B, drive, read


def build_mode(medium: MediumSpec, k: float) -> ModeSystem:
    """Exact finite closure of the per-mode Volterra system.

    eps E' = -nu_E(0) E - (memory read-out) + k H
    mu  H' = -nu_H(0) H - (memory read-out) - k E
    """
    if k < 0:
        raise ModalError("mode wavenumber must be nonnegative")
    for kern in (medium.nu_e, medium.nu_h):
        if isinstance(kern, SampledKernel):
            raise ModalError("sampled kernels admit no finite closure; use step_history")
    blocks_e = list(_companion_blocks(medium.nu_e.derivative()))
    blocks_h = list(_companion_blocks(medium.nu_h.derivative()))
    d_e = sum(b.shape[0] for b, _, _ in blocks_e)
    d_h = sum(b.shape[0] for b, _, _ in blocks_h)
    dim = 2 + d_e + d_h
    A = np.zeros((dim, dim))
    eps, mu = medium.eps, medium.mu
    A[0, 0] = -medium.nu_e.value_at_zero() / eps
    A[1, 1] = -medium.nu_h.value_at_zero() / mu
    A[0, 1] = k / eps
    A[1, 0] = -k / mu

    pos = 2
    for B, drive, read in blocks_e:
        n = B.shape[0]
        A[pos : pos + n, pos : pos + n] = B
        A[pos : pos + n, 0] = drive
        A[0, pos : pos + n] = -read / eps
        pos += n
    for B, drive, read in blocks_h:
        n = B.shape[0]
        A[pos : pos + n, pos : pos + n] = B
        A[pos : pos + n, 1] = drive
        A[1, pos : pos + n] = -read / mu
        pos += n
    return ModeSystem(
        k=float(k),
        A=A,
        e_slot=0,
        h_slot=1,
        aux_e=slice(2, 2 + d_e),
        aux_h=slice(2 + d_e, dim),
        medium=medium,
    )


@lru_cache(maxsize=512)
def _propagator(system: ModeSystem, dt: float) -> np.ndarray:
    return expm(system.A * dt)


def step_exact(system: ModeSystem, state: np.ndarray, dt: float) -> np.ndarray:
    """Advance by exp(A dt); exact for the closed linear system."""
    if dt <= 0:
        raise ModalError("dt must be positive")
    state = np.asarray(state, dtype=float)
    if state.shape != (system.dim,):
        raise ModalError(f"state dimension {state.shape} does not match system {system.dim}")
    if not np.all(np.isfinite(state)):
        raise ModalError("non-finite state")
    return _propagator(system, float(dt)) @ state


def spectral_abscissa(system: ModeSystem) -> tuple[float, np.ndarray]:
    """Max Re eigenvalue of the mode matrix, plus the full eigenvalue list."""
    eigs = np.linalg.eigvals(system.A)
    return float(np.max(eigs.real)), eigs


def dispersion_roots(medium: MediumSpec, k: float) -> np.ndarray:
    """Roots of the per-mode characteristic equation
    lambda^2 (eps + L nu_E)(mu + L nu_H) + k^2 = 0, denominators cleared."""
    from numpy.polynomial import polynomial as npoly
    from .kernels import lambda_laplace_rational

    for kern in (medium.nu_e, medium.nu_h):
        if isinstance(kern, SampledKernel):
            raise ModalError("dispersion relation needs exponential-polynomial kernels")
    parts = []
    dens = []
    for kern, coef in ((medium.nu_e, medium.eps), (medium.nu_h, medium.mu)):
        num, den = lambda_laplace_rational(kern)
        # lambda (coef + L nu) = (coef*lambda*den + num) / den
        a = npoly.polyadd(coef * npoly.polymul(np.array([0.0, 1.0]), den), num)
        parts.append(a)
        dens.append(den)
    char = npoly.polyadd(npoly.polymul(parts[0], parts[1]), k**2 * npoly.polymul(dens[0], dens[1]))
    from .kernels import _trim

    char = _trim(char, 1e-13)
    if char.size <= 1:
        return np.array([])
    return np.roots(char[::-1])


class _GrowBuf:
    """Append-only float buffer with geometric growth."""

    def __init__(self, first: float = 0.0, capacity: int = 1024):
        self._data = np.zeros(capacity)
        self._data[0] = first
        self.n = 1

    def append(self, value: float):
        if self.n == self._data.size:
            self._data = np.concatenate([self._data, np.zeros(self._data.size)])
        self._data[self.n] = value
        self.n += 1

    def view(self) -> np.ndarray:
        return self._data[: self.n]

    def __getitem__(self, idx):
        return self.view()[idx]


@dataclass
class HistoryState:
    """Field history on the uniform step grid, for the reference integrator."""

    dt: float
    s_max: float
    e_past: _GrowBuf = field(default_factory=_GrowBuf)
    h_past: _GrowBuf = field(default_factory=_GrowBuf)
    _weights: dict = field(default_factory=dict, repr=False)

    @property
    def t(self) -> float:
        return (self.e_past.n - 1) * self.dt

    @property
    def e(self) -> float:
        return float(self.e_past[-1])

    @property
    def h(self) -> float:
        return float(self.h_past[-1])

    def eta(self, which: str, s_grid: np.ndarray) -> np.ndarray:
        """Summed past history eta^t(s) = int_0^{min(s,t)} field(t - y) dy."""
        past = (self.e_past if which == "E" else self.h_past).view()
        rev = past[::-1]  # field(t - y) on the y-grid
        cum = np.concatenate(([0.0], np.cumsum(0.5 * (rev[1:] + rev[:-1]) * self.dt)))
        y = np.minimum(np.asarray(s_grid), self.t)
        return np.interp(y, np.arange(past.size) * self.dt, cum)

    def weighted_history_norm(self, C: float, delta: float, s_max: float | None = None) -> float:
        """L^2 norm of (eta_E, eta_H) against the weight w(s) = C e^{-delta s}."""
        upper = s_max if s_max is not None else max(self.t, 1.0) + 20.0 / delta
        s = np.linspace(0.0, upper, 2000)
        w = C * np.exp(-delta * s)
        total = np.trapezoid((self.eta("E", s) ** 2 + self.eta("H", s) ** 2) * w, s)
        return float(np.sqrt(total))


def initial_history(dt: float, s_max: float, e0: float = 1.0, h0: float = 0.0) -> HistoryState:
    state = HistoryState(dt=dt, s_max=s_max)
    state.e_past._data[0] = e0
    state.h_past._data[0] = h0
    return state


def _lag_weights(state: HistoryState, kernel: Kernel, key: str, c: float, n: int) -> np.ndarray:
    """Cached nu'((m + c) dt) for m = 0..n."""
    buf = state._weights.get((key, c))
    if buf is None:
        buf = _GrowBuf(float(eval_kernel(kernel, c * state.dt, 1)))
        state._weights[(key, c)] = buf
    if buf.n <= n:
        t_new = (np.arange(buf.n, n + 1) + c) * state.dt
        for v in np.atleast_1d(eval_kernel(kernel, t_new, 1)):
            buf.append(float(v))
    return buf.view()[: n + 1]


def _convolution(state, kernel, key, samples, c, stage_value):
    """Trapezoidal int_0^{t + c dt} nu'(t + c dt - s) f(s) ds with f(t+c dt)=stage_value."""
    n = len(samples) - 1
    dt = state.dt
    w = _lag_weights(state, kernel, key, c, n)
    if n > 0:
        wrev = w[::-1]
        total = dt * (np.dot(wrev, samples) - 0.5 * (wrev[0] * samples[0] + wrev[-1] * samples[-1]))
    else:
        total = 0.0
    if c > 0.0:
        nup0 = _lag_weights(state, kernel, key, 0.0, 0)[0]
        total += 0.5 * c * dt * (w[0] * samples[-1] + nup0 * stage_value)
    return total


def step_history(medium: MediumSpec, k: float, state: HistoryState, dt: float) -> HistoryState:
    """One step of the brute-force reference integrator (any kernel type).

    Four-stage explicit scheme; each stage evaluates the Volterra convolution
    by trapezoidal quadrature over the stored past.  Serves as the oracle for
    step_exact and is the only integrator available for sampled kernels.
    """
    if dt <= 0:
        raise ModalError("dt must be positive")
    if abs(dt - state.dt) > 1e-12 * state.dt:
        raise ModalError("step size must match the history grid spacing")
    if state.t + dt > state.s_max + 1e-12:
        raise HistoryTruncationError(
            f"t = {state.t + dt:.6g} exceeds the configured history horizon", state.s_max
        )
    eps, mu = medium.eps, medium.mu
    nue0 = float(eval_kernel(medium.nu_e, 0.0, 0))
    nuh0 = float(eval_kernel(medium.nu_h, 0.0, 0))
    e_samples = state.e_past.view()
    h_samples = state.h_past.view()

    # a zero kernel has no memory term; skip its convolution entirely
    live_e = not (isinstance(medium.nu_e, ExpPolyKernel) and medium.nu_e.is_zero)
    live_h = not (isinstance(medium.nu_h, ExpPolyKernel) and medium.nu_h.is_zero)

    def rhs(c, e_star, h_star):
        conv_e = _convolution(state, medium.nu_e, "E", e_samples, c, e_star) if live_e else 0.0
        conv_h = _convolution(state, medium.nu_h, "H", h_samples, c, h_star) if live_h else 0.0
        de = (-nue0 * e_star - conv_e + k * h_star) / eps
        dh = (-nuh0 * h_star - conv_h - k * e_star) / mu
        return de, dh

    e0, h0 = state.e, state.h
    k1 = rhs(0.0, e0, h0)
    k2 = rhs(0.5, e0 + 0.5 * dt * k1[0], h0 + 0.5 * dt * k1[1])
    k3 = rhs(0.5, e0 + 0.5 * dt * k2[0], h0 + 0.5 * dt * k2[1])
    k4 = rhs(1.0, e0 + dt * k3[0], h0 + dt * k3[1])
    e1 = e0 + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    h1 = h0 + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    state.e_past.append(float(e1))
    state.h_past.append(float(h1))
    return state


@dataclass(frozen=True)
class EnergyTrace:
    times: np.ndarray
    energy: np.ndarray
    history_norm: np.ndarray | None = None

    def __post_init__(self):
        if self.times.shape != self.energy.shape:
            raise ModalError("times and energy must have equal length")


def cavity_modes(length: float, n_max: int, amplitude_exponent: float = -1.5):
    """k_n = n pi c0 / L for a reference 1D cavity, amplitudes n^p."""
    return [(n * np.pi / length, float(n) ** amplitude_exponent) for n in range(1, n_max + 1)]


def _run_one_mode(medium, k, amplitude, dt, n_steps, output_stride):
    system = build_mode(medium, k)
    prop = expm(system.A * dt)
    state = system.initial_state(amplitude)
    n_out = n_steps // output_stride + 1
    energy = np.empty(n_out)
    energy[0] = system.energy(state)
    j = 1
    for i in range(1, n_steps + 1):
        state = prop @ state
        if i % output_stride == 0:
            energy[j] = system.energy(state)
            j += 1
    return energy


def run_multimode(
    medium: MediumSpec,
    modes: list[tuple[float, float]],
    dt: float,
    T: float,
    output_stride: int = 1,
    threads: int = 1,
) -> EnergyTrace:
    """Integrate independent modes with the exact propagator and sum energies.

    The per-mode energies are reduced in fixed mode order, so the trace is
    bit-identical regardless of the thread count.
    """
    if dt <= 0 or T <= dt:
        raise ModalError("need dt > 0 and T > dt")
    n_steps = int(round(T / dt))
    times = np.arange(0, n_steps + 1, output_stride) * dt
    if not modes:
        return EnergyTrace(times=np.array([]), energy=np.array([]))

    def task(mode):
        k, amp = mode
        return _run_one_mode(medium, k, amp, dt, n_steps, output_stride)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_mode = list(pool.map(task, modes))
    else:
        per_mode = [task(m) for m in modes]
    energy = np.sum(np.stack(per_mode, axis=0), axis=0)
    return EnergyTrace(times=times, energy=energy)
