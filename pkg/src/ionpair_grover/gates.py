"""Gate matrices for Grover search on ion-pair qubits.

Basis ordering is most-significant qubit first, with ``|0> = (1, 0)^T`` and
``|1> = (0, 1)^T``.  Every matrix returned here is a dense ``complex128``
array; dense construction is limited to ``q <= MAX_DENSE_QUBITS``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

TWO_PI = 2.0 * np.pi
MAX_DENSE_QUBITS = 10
UNITARY_TOL = 1e-12

# U(7 pi / 4), the Walsh-Hadamard substitute.
W_ANGLE = 7.0 * np.pi / 4.0


def reduce_angle(theta: float) -> float:
    """Map ``theta`` onto ``[0, 2 pi)``."""
    theta = float(theta)
    if not np.isfinite(theta):
        raise ValueError(f"angle must be finite, got {theta!r}")
    reduced = theta % TWO_PI
    # float modulo can land exactly on 2 pi for tiny negative inputs
    return 0.0 if reduced >= TWO_PI else reduced


@dataclass(frozen=True)
class TargetIndex:
    """A marked basis state of a ``q``-qubit register.

    ``basis`` is the 0-based index into the state vector.  The 1-based
    ``paper_index`` counts from the top, so ``paper_index == 1`` is
    ``|1...1>`` and ``paper_index == 2**q`` is ``|0...0>``.
    """

    q: int
    basis: int

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 1:
            raise ValueError(f"qubit count must be a positive integer, got {self.q!r}")
        if int(self.basis) != self.basis or not 0 <= self.basis < 2**self.q:
            raise ValueError(f"basis index {self.basis!r} out of range for q={self.q}")

    @classmethod
    def from_paper_index(cls, q: int, index: int) -> "TargetIndex":
        if not 1 <= index <= 2**q:
            raise ValueError(f"1-based index must lie in [1, {2**q}], got {index}")
        return cls(q, 2**q - index)

    @classmethod
    def from_bitstring(cls, bits: str) -> "TargetIndex":
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"not a bitstring: {bits!r}")
        return cls(len(bits), int(bits, 2))

    @property
    def paper_index(self) -> int:
        return 2**self.q - self.basis

    @property
    def bitstring(self) -> str:
        return format(self.basis, f"0{self.q}b")


def all_ones(q: int) -> TargetIndex:
    return TargetIndex(q, 2**q - 1)


def _check_dense(q: int, minimum: int) -> None:
    if int(q) != q or q < minimum:
        raise ValueError(f"q must be an integer >= {minimum}, got {q!r}")
    if q > MAX_DENSE_QUBITS:
        raise ValueError(
            f"dense matrices are limited to q <= {MAX_DENSE_QUBITS}; got q={q}"
        )


def rotation_x(theta: float) -> np.ndarray:
    """x-axis rotation ``[[cos t, -i sin t], [-i sin t, cos t]]``."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def w_gate() -> np.ndarray:
    return rotation_x(W_ANGLE)


def build_w(q: int) -> np.ndarray:
    """``q``-fold tensor power of ``U(7 pi / 4)``."""
    _check_dense(q, 1)
    w = w_gate()
    return reduce(np.kron, [w] * q)


def build_v(q: int) -> np.ndarray:
    """Identity on the first ``q - 1`` qubits, ``W`` on the last one."""
    _check_dense(q, 2)
    return np.kron(np.eye(2 ** (q - 1), dtype=complex), w_gate())


def _check_target(target: TargetIndex) -> None:
    if not isinstance(target, TargetIndex):
        raise ValueError(f"expected a TargetIndex, got {type(target).__name__}")
    _check_dense(target.q, 2)


def build_m(target: TargetIndex) -> np.ndarray:
    """Controlled-flip operation whose ``V``-conjugate inverts ``target``.

    Identity except on the 2x2 block of basis states ``{2b, 2b + 1}`` that
    contains the target.  The block is ``[[0, -i], [i, 0]]`` for an odd
    target and ``[[0, i], [-i, 0]]`` for an even one.
    """
    _check_target(target)
    m = np.eye(2**target.q, dtype=complex)
    lo = target.basis & ~1
    sign = 1.0 if target.basis & 1 else -1.0
    m[lo, lo] = m[lo + 1, lo + 1] = 0.0
    m[lo, lo + 1] = -1j * sign
    m[lo + 1, lo] = 1j * sign
    return m


def build_p(target: TargetIndex) -> np.ndarray:
    """Diagonal sign flip of the target amplitude."""
    _check_target(target)
    diag = np.ones(2**target.q, dtype=complex)
    diag[target.basis] = -1.0
    return np.diag(diag)


def build_p_conjugated(target: TargetIndex) -> np.ndarray:
    """Same operator as :func:`build_p`, assembled as ``V^-1 M V``."""
    _check_target(target)
    v = build_v(target.q)
    return v.conj().T @ build_m(target) @ v


def build_diffusion(q: int) -> np.ndarray:
    """Inversion about average ``W_q P_1 W_q``."""
    _check_dense(q, 2)
    w = build_w(q)
    return w @ build_p(all_ones(q)) @ w


def is_unitary(m, tol: float = UNITARY_TOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    deviation = m @ m.conj().T - np.eye(m.shape[0])
    return bool(np.max(np.abs(deviation)) <= tol)
