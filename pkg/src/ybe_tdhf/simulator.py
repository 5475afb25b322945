"""Dense statevector simulator with Jordan-Wigner measurement helpers.

Qubit 0 is the most significant bit of a basis index. An occupied
fermionic mode is |1>, and a_w carries the parity string Z_0 ... Z_{w-1}.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, TextIO

import numpy as np

from .circuit.gates import Circuit, Gate, gate_unitary

MAX_QUBITS = 12


class SimulatorError(ValueError):
    pass


@dataclass
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 0 < self.n_qubits <= MAX_QUBITS:
            raise SimulatorError(f"statevector width must be in 1..{MAX_QUBITS}, got {self.n_qubits}")
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2**self.n_qubits,):
            raise SimulatorError(f"expected {2**self.n_qubits} amplitudes, got {self.amplitudes.shape}")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "Statevector":
        return Statevector(self.n_qubits, self.amplitudes.copy())


def init_state(n: int, occupied: Iterable[int] = ()) -> Statevector:
    """Basis state with |1> on the occupied wires."""
    occ = set(int(k) for k in occupied)
    if any(k < 0 or k >= n for k in occ):
        raise SimulatorError(f"occupied wires {sorted(occ)} out of range for {n} qubits")
    idx = sum(1 << (n - 1 - k) for k in occ)
    amps = np.zeros(2**n, dtype=complex)
    amps[idx] = 1.0
    return Statevector(n, amps)


def _apply_matrix(psi: np.ndarray, n: int, u: np.ndarray, wires: tuple[int, ...]) -> np.ndarray:
    k = len(wires)
    t = psi.reshape((2,) * n)
    t = np.tensordot(u.reshape((2,) * (2 * k)), t, axes=(list(range(k, 2 * k)), list(wires)))
    # tensordot puts the acted-on axes first; move them back
    return np.moveaxis(t, list(range(k)), list(wires)).reshape(-1)


def apply_gate(s: Statevector, g: Gate) -> Statevector:
    if max(g.wires) >= s.n_qubits:
        raise SimulatorError(f"gate {g} outside a {s.n_qubits}-qubit register")
    if g.kind == "PHASE":
        t = s.amplitudes.reshape((2,) * s.n_qubits).copy()
        idx = [slice(None)] * s.n_qubits
        idx[g.wires[0]] = 1
        t[tuple(idx)] *= np.exp(-1j * g.params[0])
        return Statevector(s.n_qubits, t.reshape(-1))
    return Statevector(s.n_qubits, _apply_matrix(s.amplitudes, s.n_qubits, gate_unitary(g), g.wires))


def run_circuit(s: Statevector, c: Circuit) -> Statevector:
    if c.n_qubits != s.n_qubits:
        raise SimulatorError(f"circuit width {c.n_qubits} does not match state width {s.n_qubits}")
    for g in c.gates:
        s = apply_gate(s, g)
    return s


@lru_cache(maxsize=None)
def _bits(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    return ((idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1).astype(np.int8)


def z_expectations(s: Statevector) -> np.ndarray:
    prob = np.abs(s.amplitudes) ** 2
    return prob @ (1.0 - 2.0 * _bits(s.n_qubits))


def _check_perm(perm, n: int) -> np.ndarray:
    perm = np.arange(n) if perm is None else np.asarray(perm, dtype=int)
    if sorted(perm.tolist()) != list(range(n)):
        raise SimulatorError(f"{perm.tolist()} is not a permutation of {n} labels")
    return perm


def occupations(s: Statevector, perm=None) -> np.ndarray:
    """Mode occupations in label order; ``perm[w]`` is the label on wire w."""
    perm = _check_perm(perm, s.n_qubits)
    out = np.empty(s.n_qubits)
    out[perm] = 0.5 * (1.0 - z_expectations(s))
    return out


@lru_cache(maxsize=None)
def _hopping_tables(n: int):
    """For each wire pair p < q: source indices x (q occupied, p empty), targets, and JW signs."""
    bits = _bits(n)
    idx = np.arange(2**n)
    tables = {}
    for p in range(n):
        for q in range(p + 1, n):
            src = idx[(bits[:, q] == 1) & (bits[:, p] == 0)]
            dst = src ^ (1 << (n - 1 - q)) ^ (1 << (n - 1 - p))
            between = bits[src][:, p + 1 : q].sum(axis=1)
            tables[p, q] = (src, dst, 1.0 - 2.0 * (between % 2))
    return tables


def one_rdm(s: Statevector, perm=None) -> np.ndarray:
    """rho[p, q] = <a_p^dag a_q> with p, q orbital labels."""
    n = s.n_qubits
    perm = _check_perm(perm, n)
    psi = s.amplitudes
    rho = np.zeros((n, n), dtype=complex)
    rho[np.diag_indices(n)] = 0.5 * (1.0 - z_expectations(s))
    for (p, q), (src, dst, sign) in _hopping_tables(n).items():
        val = np.sum(np.conj(psi[dst]) * sign * psi[src])
        rho[p, q] = val
        rho[q, p] = np.conj(val)
    out = np.empty_like(rho)
    out[np.ix_(perm, perm)] = rho
    return out


def sample_z(s: Statevector, shots: int, seed: int) -> np.ndarray:
    """Finite-shot estimate of <Z_k> from computational-basis samples."""
    if shots < 1:
        raise SimulatorError(f"shots must be positive, got {shots}")
    prob = np.abs(s.amplitudes) ** 2
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, prob / prob.sum())
    return counts @ (1.0 - 2.0 * _bits(s.n_qubits)) / shots


def dump_state(s: Statevector, out: TextIO, cutoff: float = 1e-12) -> None:
    for i, a in enumerate(s.amplitudes):
        if abs(a) > cutoff:
            out.write(f"{i:0{s.n_qubits}b} {a.real:.17g} {a.imag:.17g}\n")
