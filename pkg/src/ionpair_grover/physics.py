"""Trapped-ion layer: bichromatic two-ion dynamics and pair-qubit robustness.

Units: the trap frequency is the unit of angular frequency (``trap = 1`` by
default) and times are in units of ``1 / trap``.

Two-ion internal basis order is ``|gg>, |ge>, |eg>, |ee>`` where the first
letter belongs to ion 1.  The logical pair qubit is ``|0> = |eg>``,
``|1> = |ge>``.  The full system is internal (x) Fock, internal index major.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import curve_fit

from .gates import rotation_x

GG, GE, EG, EE = 0, 1, 2, 3
LABELS = ("gg", "ge", "eg", "ee")
LOGICAL = (EG, GE)

DEFAULT_FOCK_CUTOFF = 15
MAX_FOCK_CUTOFF = 120
LEAKAGE_THRESHOLD = 1e-6
DEFAULT_TOL = 1e-10
# sideband gap, in units of eta * Omega, below which the two-photon picture is flagged
MARGINAL_GAP = 20.0

# Per-tone coupling is Omega / (2 sqrt 2).  With this normalisation the
# second-order |ge,n> <-> |eg,n> coupling is Omega_eff / 2, so a pulse of
# length T realises U(Omega_eff T / 2) with Omega_eff from effective_rabi.
_TONE_COUPLING = 1.0 / (2.0 * math.sqrt(2.0))


class RegimeWarning(UserWarning):
    pass


class CutoffTooSmallError(RuntimeError):
    pass


class IntegratorError(RuntimeError):
    pass


class UndefinedFidelityError(ValueError):
    pass


@dataclass(frozen=True)
class PulseParams:
    """Bichromatic drive parameters, frequencies in units of the trap frequency.

    Hard limits (``lamb_dicke <= 0.2``, ``rabi < trap``, ``detuning < trap``)
    raise unless ``force=True``, in which case they are only reported by
    :meth:`regime_warnings`.
    """

    rabi: float = 0.05
    lamb_dicke: float = 0.05
    detuning: float = 0.95
    trap: float = 1.0
    force: bool = field(default=False, compare=False)

    def __post_init__(self):
        problems = self._hard_violations()
        if problems and not self.force:
            raise ValueError("; ".join(problems))
        for msg in self.regime_warnings():
            warnings.warn(msg, RegimeWarning, stacklevel=3)

    def _hard_violations(self) -> list:
        out = []
        if self.trap <= 0:
            out.append(f"trap frequency must be positive, got {self.trap}")
        if not 0 <= self.lamb_dicke <= 0.2:
            out.append(f"Lamb-Dicke parameter {self.lamb_dicke} outside [0, 0.2]")
        if not 0 <= self.rabi < self.trap:
            out.append(f"Rabi frequency {self.rabi} must satisfy 0 <= rabi < trap")
        if self.trap - self.detuning <= 0:
            out.append(f"detuning {self.detuning} must lie below the trap frequency")
        return out

    @property
    def sideband_gap(self) -> float:
        return self.trap - self.detuning

    @property
    def in_valid_regime(self) -> bool:
        return not self._hard_violations() and self.sideband_gap > self.lamb_dicke * self.rabi

    def regime_warnings(self) -> list:
        out = list(self._hard_violations())
        if 0.1 < self.lamb_dicke <= 0.2:
            out.append(f"Lamb-Dicke parameter {self.lamb_dicke} > 0.1: weakly justified")
        if self.sideband_gap <= self.lamb_dicke * self.rabi:
            out.append(
                f"trap - detuning = {self.sideband_gap:.3g} <= eta * Omega = "
                f"{self.lamb_dicke * self.rabi:.3g}: intermediate states get populated"
            )
        elif self.sideband_gap < MARGINAL_GAP * self.lamb_dicke * self.rabi:
            out.append(
                f"trap - detuning = {self.sideband_gap:.3g} < {MARGINAL_GAP} * eta * Omega: "
                "effective-rate formula only marginally valid"
            )
        return out


def effective_rabi(p: PulseParams) -> float:
    """Two-photon rate ``-(Omega eta)^2 / (2 (trap - detuning))``."""
    if p.trap == p.detuning:
        raise ZeroDivisionError("detuning equals the trap frequency: sideband resonance")
    return -((p.rabi * p.lamb_dicke) ** 2) / (2.0 * (p.trap - p.detuning))


def pulse_duration_for(p: PulseParams, theta: float) -> float:
    """Pulse length realising ``U(theta)`` on the pair, ``2 theta / |Omega_eff|``.

    Only ``|Omega_eff|`` enters: a negative effective rate is compensated by
    a pi shift of the drive phase, which maps ``U(-theta)`` to ``U(theta)``.
    """
    rate = abs(effective_rabi(p))
    if rate == 0.0:
        raise ValueError("effective Rabi frequency vanishes; no pulse realises the angle")
    return 2.0 * theta / rate


def pulse_angle(p: PulseParams, duration: float) -> float:
    return abs(effective_rabi(p)) * duration / 2.0


def effective_pair_propagator(theta: float) -> np.ndarray:
    """Block-diagonal ``U(theta)`` on span{gg, ee} and on span{eg, ge}."""
    r = rotation_x(theta)
    u = np.zeros((4, 4), dtype=complex)
    for a, b in ((GG, EE), (EG, GE)):
        idx = np.array([a, b])
        u[np.ix_(idx, idx)] = r
    return u


def _ion_raise(ion: int) -> np.ndarray:
    s = np.array([[0, 0], [1, 0]], dtype=complex)  # |e><g| with g=0, e=1
    eye = np.eye(2, dtype=complex)
    return np.kron(s, eye) if ion == 0 else np.kron(eye, s)


class BichromaticHamiltonian:
    """Interaction-picture ``H(t)`` for two ions driven at ``w_eg +- delta``.

    The displacement factor ``exp[i eta (a e^{-i nu t} + a^dag e^{i nu t})]``
    is evaluated exactly on the truncated Fock space as
    ``R(t) exp[i eta (a + a^dag)] R(t)^dag`` with ``R(t) = exp(i nu t n)``.
    """

    def __init__(self, p: PulseParams, n_max: int = DEFAULT_FOCK_CUTOFF):
        if n_max < 2:
            raise ValueError(f"Fock cutoff must be >= 2, got {n_max}")
        self.p = p
        self.n_max = n_max
        self.n_fock = n_max + 1
        self.dim = 4 * self.n_fock
        a = np.diag(np.sqrt(np.arange(1, self.n_fock)), 1)
        evals, evecs = np.linalg.eigh(a + a.T)
        self._disp0 = (evecs * np.exp(1j * p.lamb_dicke * evals)) @ evecs.T
        self._numbers = np.arange(self.n_fock)
        self._raise = _ion_raise(0) + _ion_raise(1)

    def __call__(self, t: float) -> np.ndarray:
        p = self.p
        phase = np.exp(1j * p.trap * t * self._numbers)
        disp = phase[:, None] * self._disp0 * phase.conj()[None, :]
        amp = p.rabi * _TONE_COUPLING * 2.0 * math.cos(p.detuning * t)
        half = amp * np.kron(self._raise, disp)
        return half + half.conj().T


@dataclass
class FullSystemState:
    """Two-ion internal state (x) truncated phonon Fock space, shape ``(4, n_max + 1)``."""

    amplitudes: np.ndarray

    @classmethod
    def basis(cls, internal: str, n: int, n_max: int = DEFAULT_FOCK_CUTOFF) -> "FullSystemState":
        if n > n_max:
            raise ValueError(f"phonon number {n} exceeds cutoff {n_max}")
        amps = np.zeros((4, n_max + 1), dtype=complex)
        amps[LABELS.index(internal), n] = 1.0
        return cls(amps)

    @property
    def n_max(self) -> int:
        return self.amplitudes.shape[1] - 1

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def padded(self, n_max: int) -> "FullSystemState":
        amps = np.zeros((4, n_max + 1), dtype=complex)
        amps[:, : self.n_fock] = self.amplitudes
        return FullSystemState(amps)

    @property
    def n_fock(self) -> int:
        return self.amplitudes.shape[1]


@dataclass
class SimulationResult:
    times: np.ndarray
    # shape (len(times), 4, n_max + 1)
    amplitudes: np.ndarray
    n_max: int
    steps: int
    norm_drift: float
    floquet_period: Optional[float] = None

    @property
    def final(self) -> FullSystemState:
        return FullSystemState(self.amplitudes[-1])

    def population(self, internal: str, n: Optional[int] = None) -> np.ndarray:
        pops = np.abs(self.amplitudes[:, LABELS.index(internal), :]) ** 2
        return pops.sum(axis=1) if n is None else pops[:, n]

    def phonon_change(self, n: int) -> np.ndarray:
        """Population outside phonon number ``n``, per sample."""
        pops = np.abs(self.amplitudes) ** 2
        return 1.0 - pops[:, :, n].sum(axis=1)

    def cutoff_population(self) -> float:
        return float(np.max(np.sum(np.abs(self.amplitudes[:, :, -1]) ** 2, axis=1)))


def drive_period(p: PulseParams, max_denominator: int = 400) -> Optional[float]:
    """Common period of ``H(t)``, or ``None`` if trap and detuning are incommensurate."""
    ratio = p.detuning / p.trap
    frac = Fraction(ratio).limit_denominator(max_denominator)
    if abs(float(frac) - ratio) > 1e-12:
        return None
    return 2.0 * math.pi * frac.denominator / p.trap


@lru_cache(maxsize=16)
def _period_propagator(p: PulseParams, n_max: int, tol: float):
    period = drive_period(p)
    ham = BichromaticHamiltonian(p, n_max)
    dim = ham.dim

    def rhs(t, y):
        return (-1j * (ham(t) @ y.reshape(dim, dim))).ravel()

    sol = solve_ivp(
        rhs,
        (0.0, period),
        np.eye(dim, dtype=complex).ravel(),
        method="DOP853",
        rtol=tol,
        atol=tol,
        dense_output=True,
    )
    if not sol.success:
        raise IntegratorError(sol.message)
    u_period = sol.y[:, -1].reshape(dim, dim)
    return period, u_period, sol, sol.t.size - 1


def _simulate_floquet(p, psi0, times, n_max, tol):
    period, u_period, sol, steps = _period_propagator(p, n_max, tol)
    dim = psi0.size
    out = np.empty((len(times), dim), dtype=complex)
    psi_m, m = psi0.copy(), 0
    for k, t in enumerate(times):
        target_m = int(math.floor(t / period + 1e-12))
        while m < target_m:
            psi_m = u_period @ psi_m
            m += 1
        r = t - m * period
        if r <= 1e-12 * period:
            out[k] = psi_m
        else:
            out[k] = sol.sol(r).reshape(dim, dim) @ psi_m
    return out, steps * max(m, 1), period


def _simulate_direct(p, psi0, times, n_max, tol):
    ham = BichromaticHamiltonian(p, n_max)
    sol = solve_ivp(
        lambda t, y: -1j * (ham(t) @ y),
        (0.0, float(times[-1])),
        psi0,
        method="DOP853",
        t_eval=times,
        rtol=tol,
        atol=tol,
    )
    if not sol.success:
        raise IntegratorError(sol.message)
    return sol.y.T, sol.t.size, None


def simulate_full(
    p: PulseParams,
    initial: FullSystemState,
    duration: float,
    tol: float = DEFAULT_TOL,
    times: Optional[Sequence[float]] = None,
    auto_cutoff: bool = True,
) -> SimulationResult:
    """Integrate ``i d/dt psi = H(t) psi`` from ``t = 0`` to ``duration``.

    When the detuning is a rational multiple of the trap frequency ``H(t)`` is
    periodic; one period is integrated adaptively and the resulting
    propagator is reused.  Otherwise the state is integrated directly.

    If population reaches the Fock cutoff the cutoff is doubled (with
    ``auto_cutoff``) or :class:`CutoffTooSmallError` is raised.
    """
    if times is None:
        times = np.linspace(0.0, duration, 201)
    times = np.asarray(sorted(set(float(t) for t in times) | {float(duration)}))
    if times[0] < 0 or times[-1] > duration:
        raise ValueError("sample times must lie in [0, duration]")

    state = initial
    while True:
        psi0 = state.amplitudes.ravel()
        if drive_period(p) is not None:
            flat, steps, period = _simulate_floquet(p, psi0, times, state.n_max, tol)
        else:
            flat, steps, period = _simulate_direct(p, psi0, times, state.n_max, tol)
        amps = flat.reshape(len(times), 4, state.n_fock)
        result = SimulationResult(times, amps, state.n_max, steps, 0.0, period)
        if result.cutoff_population() <= LEAKAGE_THRESHOLD:
            break
        if not auto_cutoff or 2 * state.n_max > MAX_FOCK_CUTOFF:
            raise CutoffTooSmallError(
                f"population {result.cutoff_population():.2e} at Fock cutoff {state.n_max}"
            )
        state = state.padded(2 * state.n_max)

    norms = np.sum(np.abs(flat) ** 2, axis=1)
    drift = float(np.max(np.abs(norms - np.vdot(psi0, psi0).real)))
    result.norm_drift = drift
    if drift > 10.0 * tol * max(steps, 1):
        raise IntegratorError(f"norm drift {drift:.2e} exceeds budget for {steps} steps")
    return result


def cutoff_convergence(
    p: PulseParams,
    initial: FullSystemState,
    duration: float,
    tol: float = DEFAULT_TOL,
) -> float:
    """Max change of the final amplitudes when the Fock cutoff is doubled."""
    coarse = simulate_full(p, initial, duration, tol, times=[duration], auto_cutoff=False)
    fine = simulate_full(
        p, initial.padded(2 * initial.n_max), duration, tol, times=[duration], auto_cutoff=False
    )
    a = coarse.final.amplitudes
    b = fine.final.amplitudes
    return float(max(np.max(np.abs(b[:, : a.shape[1]] - a)), np.max(np.abs(b[:, a.shape[1]:]))))


@dataclass
class RabiFit:
    phonon: int
    fitted: float
    formula: float
    residual: float
    warnings: list

    @property
    def relative_error(self) -> float:
        return abs(abs(self.fitted) - abs(self.formula)) / abs(self.formula)

    @property
    def ok(self) -> bool:
        return not self.warnings


def extract_effective_rabi(
    p: PulseParams,
    n: int = 0,
    n_max: int = DEFAULT_FOCK_CUTOFF,
    samples: int = 200,
    tol: float = DEFAULT_TOL,
    residual_limit: float = 0.05,
) -> RabiFit:
    """Fit ``P_eg,n(t) = sin^2(Omega_fit t / 2)`` over one effective period.

    The fit only sees ``|Omega_fit|``; the sign is taken from the formula.
    A fit residual above ``residual_limit`` (RMS, absolute probability) or a
    parameter set outside the valid regime is reported in ``warnings``.
    """
    if n > n_max - 3:
        raise ValueError(f"phonon number {n} too close to cutoff {n_max}")
    formula = effective_rabi(p)
    window = 2.0 * math.pi / abs(formula)
    times = np.linspace(0.0, window, samples)
    run = simulate_full(p, FullSystemState.basis("ge", n, n_max), window, tol, times=times)
    pop = run.population("eg", n)

    def model(t, w):
        return np.sin(w * t / 2.0) ** 2

    (w_fit,), _ = curve_fit(model, times, pop, p0=[abs(formula)])
    residual = float(np.sqrt(np.mean((pop - model(times, w_fit)) ** 2)))
    notes = list(p.regime_warnings())
    if residual > residual_limit:
        notes.append(f"poor fit: RMS residual {residual:.3f} > {residual_limit}")
    return RabiFit(n, math.copysign(abs(w_fit), formula), formula, residual, notes)


def free_evolution(state: np.ndarray, t: float, e_excited: float, e_ground: float) -> np.ndarray:
    """Free phase evolution of a pair state with single-ion energies."""
    energies = np.array(
        [2 * e_ground, e_ground + e_excited, e_excited + e_ground, 2 * e_excited]
    )
    return np.exp(-1j * energies * t) * np.asarray(state, dtype=complex)


def collective_dephase(state: np.ndarray, phi: float) -> np.ndarray:
    """Common phase ``e^{i phi}`` on the excited level of both ions."""
    excitations = np.array([0, 1, 1, 2])
    return np.exp(1j * phi * excitations) * np.asarray(state, dtype=complex)


def logical_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    la = np.asarray(a)[list(LOGICAL)]
    lb = np.asarray(b)[list(LOGICAL)]
    na, nb = np.vdot(la, la).real, np.vdot(lb, lb).real
    if na == 0 or nb == 0:
        raise UndefinedFidelityError("state has no population in the logical subspace")
    return float(abs(np.vdot(la, lb)) ** 2 / (na * nb))


def dephasing_average(state: np.ndarray, draws: int = 10_000, seed: int = 0) -> np.ndarray:
    """Density matrix averaged over uniformly random collective phases."""
    rng = np.random.default_rng(seed)
    phis = rng.uniform(0.0, 2.0 * math.pi, size=draws)
    excitations = np.array([0, 1, 1, 2])
    kets = np.exp(1j * np.outer(phis, excitations)) * np.asarray(state, dtype=complex)
    return np.einsum("ki,kj->ij", kets, kets.conj()) / draws
