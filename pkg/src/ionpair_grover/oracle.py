"""Brute-force dense reference for the search runs.

Everything here is rebuilt from scratch with explicit matrices so that
agreement with :mod:`ionpair_grover.engine` means something.  Nothing in
this module imports the gate builders.
"""

from __future__ import annotations

import numpy as np

from .engine import Trajectory
from .gates import TargetIndex

MAX_ORACLE_QUBITS = 10

_SQRT_HALF = 1.0 / np.sqrt(2.0)
_W = _SQRT_HALF * np.array([[1, 1j], [1j, 1]])
_H = _SQRT_HALF * np.array([[1, 1], [1, -1]], dtype=complex)


class ResourceLimitError(ValueError):
    pass


def _check(q: int, marked: TargetIndex, n_iters: int) -> None:
    if q > MAX_ORACLE_QUBITS:
        raise ResourceLimitError(f"dense oracle is capped at q={MAX_ORACLE_QUBITS}, got {q}")
    if q < 2 or marked.q != q:
        raise ValueError(f"bad qubit count q={q} for marked state {marked}")
    if n_iters < 0:
        raise ValueError("n_iters must be non-negative")


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ra, ca = a.shape
    rb, cb = b.shape
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(ra * rb, ca * cb)


def tensor_power(gate: np.ndarray, q: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for _ in range(q):
        out = kron(out, gate)
    return out


def sign_flip(q: int, index: int) -> np.ndarray:
    p = np.zeros((2**q, 2**q), dtype=complex)
    for k in range(2**q):
        p[k, k] = -1.0 if k == index else 1.0
    return p


class DenseEvolution:
    """Explicit iteration operator ``G = D_q P_marked`` for the x-rotation scheme."""

    def __init__(self, q: int, marked: TargetIndex):
        _check(q, marked, 0)
        self.q = q
        self.marked = marked
        self.w = tensor_power(_W, q)
        self.p_marked = sign_flip(q, marked.basis)
        self.diffusion = self.w @ sign_flip(q, 2**q - 1) @ self.w
        self.step = self.diffusion @ self.p_marked

    def initial(self) -> np.ndarray:
        ones = np.zeros(2**self.q, dtype=complex)
        ones[-1] = 1.0
        return self.w @ ones

    def run(self, n_iters: int) -> np.ndarray:
        amps = [self.initial()]
        for _ in range(n_iters):
            amps.append(self.step @ amps[-1])
        return np.array(amps)


def dense_run(q: int, marked: TargetIndex, n_iters: int) -> Trajectory:
    _check(q, marked, n_iters)
    return Trajectory(q, marked, DenseEvolution(q, marked).run(n_iters), scheme="paper")


def standard_grover_run(q: int, marked: TargetIndex, n_iters: int) -> Trajectory:
    """Textbook Grover: real Hadamards, phase oracle, ``2|s><s| - I``."""
    _check(q, marked, n_iters)
    n = 2**q
    zero = np.zeros(n, dtype=complex)
    zero[0] = 1.0
    s = tensor_power(_H, q) @ zero
    diffusion = 2.0 * np.outer(s, s.conj()) - np.eye(n)
    step = diffusion @ sign_flip(q, marked.basis)
    amps = [s]
    for _ in range(n_iters):
        amps.append(step @ amps[-1])
    return Trajectory(q, marked, np.array(amps), scheme="standard")


def max_deviation(a: Trajectory, b: Trajectory) -> float:
    """Largest absolute probability difference between two runs."""
    if a.q != b.q or a.marked != b.marked or a.amplitudes.shape != b.amplitudes.shape:
        raise ValueError("trajectories differ in shape, q or marked state")
    return float(np.max(np.abs(a.probabilities - b.probabilities)))
