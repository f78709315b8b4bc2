"""Factored state-vector simulation of the ion-pair Grover iteration.

One iteration inverts the marked amplitude and then applies the inversion
about average ``D_q = W_q P_1 W_q``.  Gates are applied qubit by qubit on a
reshaped view of the state, so nothing larger than the state vector is ever
materialised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .gates import TargetIndex, all_ones, w_gate

MAX_ENGINE_QUBITS = 20
NORM_TOL = 1e-10
TIE_TOL = 1e-9


def num_qubits(state: np.ndarray) -> int:
    n = state.shape[0] if state.ndim == 1 else -1
    if n < 2 or n & (n - 1):
        raise ValueError(f"state length must be a power of two >= 2, got shape {state.shape}")
    return n.bit_length() - 1


def _check_q(q: int) -> None:
    if int(q) != q or q < 2:
        raise ValueError(f"q must be an integer >= 2, got {q!r}")
    if q > MAX_ENGINE_QUBITS:
        raise ValueError(f"q is capped at {MAX_ENGINE_QUBITS}, got {q}")


def basis_state(q: int, index: int) -> np.ndarray:
    psi = np.zeros(2**q, dtype=complex)
    psi[index] = 1.0
    return psi


def apply_single_qubit(state: np.ndarray, gate: np.ndarray, qubit: int) -> np.ndarray:
    """Apply a 2x2 ``gate`` to ``qubit`` (0 is the most significant)."""
    q = num_qubits(state)
    if not 0 <= qubit < q:
        raise ValueError(f"qubit {qubit} out of range for q={q}")
    view = state.reshape(2**qubit, 2, 2 ** (q - qubit - 1))
    return np.einsum("ab,ibj->iaj", gate, view).reshape(-1)


def apply_w_all(state: np.ndarray) -> np.ndarray:
    w = w_gate()
    for k in range(num_qubits(state)):
        state = apply_single_qubit(state, w, k)
    return state


def prepare_initial(q: int, start: Optional[TargetIndex] = None) -> np.ndarray:
    """``W`` on every qubit of ``|1...1>`` (or of ``start`` when given)."""
    _check_q(q)
    start = all_ones(q) if start is None else start
    if start.q != q:
        raise ValueError(f"start state has q={start.q}, expected {q}")
    return apply_w_all(basis_state(q, start.basis))


def invert_marked(state: np.ndarray, target: TargetIndex) -> np.ndarray:
    if target.q != num_qubits(state):
        raise ValueError(f"target has q={target.q} but state has q={num_qubits(state)}")
    out = state.copy()
    out[target.basis] = -out[target.basis]
    return out


def apply_diffusion(state: np.ndarray) -> np.ndarray:
    out = apply_w_all(state)
    out[-1] = -out[-1]
    return apply_w_all(out)


@dataclass
class Trajectory:
    """Amplitudes of a search run; row ``n`` is the state after ``n`` iterations."""

    q: int
    marked: TargetIndex
    amplitudes: np.ndarray
    scheme: str = "paper"
    start: Optional[TargetIndex] = None

    @property
    def n_iters(self) -> int:
        return self.amplitudes.shape[0] - 1

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def marked_probabilities(self) -> np.ndarray:
        return self.probabilities[:, self.marked.basis]

    @property
    def is_extension(self) -> bool:
        """True when the run did not start from ``|1...1>``."""
        return self.start is not None and self.start.basis != 2**self.q - 1


def run_search(
    q: int,
    marked: TargetIndex,
    n_iters: int,
    start: Optional[TargetIndex] = None,
    prepared: Optional[np.ndarray] = None,
) -> Trajectory:
    """Run ``n_iters`` (invert, diffuse) iterations.

    ``prepared`` replaces the prepared state outright; it is how callers
    inject e.g. a globally rephased initial state.
    """
    _check_q(q)
    if marked.q != q:
        raise ValueError(f"marked state has q={marked.q}, expected {q}")
    if int(n_iters) != n_iters or n_iters < 0:
        raise ValueError(f"n_iters must be a non-negative integer, got {n_iters!r}")
    if prepared is None:
        psi = prepare_initial(q, start)
    else:
        psi = np.asarray(prepared, dtype=complex)
        if num_qubits(psi) != q:
            raise ValueError("prepared state has the wrong dimension")
    amps = np.empty((n_iters + 1, 2**q), dtype=complex)
    amps[0] = psi
    for n in range(1, n_iters + 1):
        psi = apply_diffusion(invert_marked(psi, marked))
        amps[n] = psi
    return Trajectory(q, marked, amps, scheme="paper", start=start)


def state_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Overlap ``|<a|b>|^2`` of normalised states; blind to global phase."""
    return float(abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real))


def recurrence_period(
    traj: Trajectory,
    tol: float = TIE_TOL,
    mode: str = "distribution",
    max_period: Optional[int] = None,
) -> Optional[int]:
    """Smallest shift ``p`` under which the recorded run repeats itself.

    ``mode="distribution"`` compares probability vectors in the max norm.
    ``mode="state"`` requires fidelity ``>= 1 - tol`` up to global phase.
    Only shifts up to half the run length are tried by default, so every
    candidate is checked against at least ``p`` pairs of records.
    """
    n_rec = traj.amplitudes.shape[0]
    if n_rec < 2:
        raise ValueError("need at least two records to look for a period")
    if mode not in ("distribution", "state"):
        raise ValueError(f"unknown mode {mode!r}")
    if max_period is None:
        max_period = max(1, (n_rec - 1) // 2)
    probs = traj.probabilities
    for p in range(1, min(max_period, n_rec - 1) + 1):
        if mode == "distribution":
            ok = np.max(np.abs(probs[p:] - probs[:-p])) <= tol
        else:
            ok = all(
                state_fidelity(traj.amplitudes[n], traj.amplitudes[n + p]) >= 1.0 - tol
                for n in range(n_rec - p)
            )
        if ok:
            return p
    return None


def optimal_iterations(n_items: int, n_solutions: int = 1) -> int:
    if n_items < 1 or n_items & (n_items - 1):
        raise ValueError(f"n_items must be a power of two, got {n_items}")
    if not 1 <= n_solutions <= n_items:
        raise ValueError(f"need 1 <= n_solutions <= n_items, got {n_solutions}")
    return math.floor(math.pi / 4 * math.sqrt(n_items / n_solutions))


@dataclass
class SearchReport:
    peak_iteration: int
    peak_probability: float
    co_maximal: list = field(default_factory=list)
    period: Optional[int] = None


def search_report(traj: Trajectory, tie_tol: float = TIE_TOL) -> SearchReport:
    """Peak of ``P(marked)`` over ``n >= 1`` and the states tied for the top there."""
    pm = traj.marked_probabilities
    if pm.size == 0:
        raise ValueError("empty trajectory")
    first = 1 if pm.size > 1 else 0
    peak = first + int(np.argmax(pm[first:]))
    dist = traj.probabilities[peak]
    ties = np.flatnonzero(dist >= dist.max() - tie_tol)
    co_max = [TargetIndex(traj.q, int(b)) for b in ties]
    period = recurrence_period(traj, tie_tol) if pm.size > 1 else None
    return SearchReport(peak, float(pm[peak]), co_max, period)
