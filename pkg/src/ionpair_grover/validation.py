"""Self-checks run by ``ionpair-grover validate``."""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from . import engine, gates, oracle
from .gates import TargetIndex, all_ones

ITERS = 18


@dataclass
class CheckResult:
    name: str
    measured: float
    tolerance: float
    passed: bool
    # "max": measured must stay <= tolerance; "min": measured must reach it
    kind: str = "max"

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        rel = "<=" if self.kind == "max" else ">="
        return f"{status}  {self.name:<42} measured={self.measured:.3e}  required {rel} {self.tolerance:.1e}"


def _upper(name, measured, tol):
    return CheckResult(name, float(measured), tol, bool(measured <= tol))


def _targets(q: int, rng: random.Random) -> list:
    if q <= 4:
        return [TargetIndex(q, b) for b in range(2**q)]
    picks = sorted(rng.sample(range(2**q), 20 if 2**q > 20 else 2**q))
    return [TargetIndex(q, b) for b in picks]


def unitarity_checks(q_range) -> list:
    out = []
    for q in q_range:
        eye = np.eye(2**q)
        mats = [gates.build_w(q), gates.build_v(q), gates.build_diffusion(q)]
        t = all_ones(q)
        mats += [gates.build_m(t), gates.build_p(t), gates.build_m(TargetIndex(q, 0))]
        dev = max(np.max(np.abs(m @ m.conj().T - eye)) for m in mats)
        out.append(_upper(f"unitarity q={q}", dev, gates.UNITARY_TOL))
        conj = max(
            np.max(np.abs(gates.build_p(t) - gates.build_p_conjugated(t)))
            for t in (all_ones(q), TargetIndex(q, 0), TargetIndex(q, 2**q // 2))
        )
        out.append(_upper(f"P = V^-1 M V q={q}", conj, gates.UNITARY_TOL))
    return out


def oracle_equivalence(q_range, seed: int = 0) -> list:
    rng = random.Random(seed)
    out = []
    for q in q_range:
        dev = 0.0
        for t in _targets(q, rng):
            a = engine.run_search(q, t, ITERS)
            b = oracle.dense_run(q, t, ITERS)
            dev = max(dev, oracle.max_deviation(a, b))
        out.append(_upper(f"engine vs dense oracle q={q}", dev, 1e-10))
    return out


def _faulty_run(q: int, n_iters: int) -> np.ndarray:
    # one extra sign flip in P, on |0...0>, on top of the marked inversion
    marked = all_ones(q)
    psi = engine.prepare_initial(q)
    amps = [psi]
    for _ in range(n_iters):
        psi = engine.invert_marked(psi, marked)
        psi[0] = -psi[0]
        psi = engine.apply_diffusion(psi)
        amps.append(psi)
    return np.array(amps)


def degeneracy_check(inject_fault: bool = False) -> CheckResult:
    """``amp(|000>) = -i amp(|111>)`` along the q=3 run, i.e. |000> tracks ``i|111>``."""
    if inject_fault:
        amps = _faulty_run(3, ITERS)
    else:
        amps = engine.run_search(3, all_ones(3), ITERS).amplitudes
    dev = np.max(np.abs(amps[:, 0] + 1j * amps[:, -1]))
    return _upper("q=3 |000> / i|111> degeneracy", dev, 1e-12)


def recurrence_checks() -> list:
    two = engine.run_search(2, all_ones(2), ITERS)
    p2 = engine.recurrence_period(two, 1e-9)
    three = engine.run_search(3, all_ones(3), ITERS)
    p3 = engine.recurrence_period(three, 1e-9, max_period=9)
    return [
        CheckResult("q=2 recurrence period == 3", float(p2 or 0), 3.0, p2 == 3, kind="min"),
        CheckResult("q=3 has no period <= 9", float(p3 or 0), 0.0, p3 is None),
        _upper("q=2 P(marked) = 1 at n=1", abs(1.0 - two.marked_probabilities[1]), 1e-12),
    ]


def run_all(q_min: int = 2, q_max: int = 8, inject_fault: bool = False, seed: int = 0) -> list:
    if not 2 <= q_min <= q_max <= oracle.MAX_ORACLE_QUBITS:
        raise ValueError(f"q range must satisfy 2 <= q_min <= q_max <= {oracle.MAX_ORACLE_QUBITS}")
    q_range = range(q_min, q_max + 1)
    results = unitarity_checks(q_range)
    results += oracle_equivalence(q_range, seed)
    results.append(degeneracy_check(inject_fault))
    results += recurrence_checks()
    return results
