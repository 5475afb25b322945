"""Gate-level intermediate representation.

Wires are 0-based; wire 0 is the most significant bit of a basis index.
Two-qubit matrices are written in the order of ``Gate.wires`` (first wire
is the more significant one of the pair).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

KINDS = ("RX", "RZ", "CX", "PHASE", "MB", "FSWAP")
_ARITY = {"RX": 1, "RZ": 1, "PHASE": 1, "CX": 2, "MB": 2, "FSWAP": 2}
_NPARAMS = {"RX": 1, "RZ": 1, "PHASE": 1, "CX": 0, "MB": 2, "FSWAP": 1}

DENSE_CAP = 10

_CX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


class CircuitError(ValueError):
    pass


def normalize_angle(a: float) -> float:
    """Map an angle into (-pi, pi]."""
    a = math.remainder(float(a), 2.0 * math.pi)
    return math.pi if a == -math.pi else a


@dataclass(frozen=True)
class Gate:
    kind: str
    wires: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        if len(self.wires) != _ARITY[self.kind]:
            raise CircuitError(f"{self.kind} acts on {_ARITY[self.kind]} wire(s), got {self.wires}")
        if len(set(self.wires)) != len(self.wires):
            raise CircuitError(f"{self.kind} wires must be distinct, got {self.wires}")
        if len(self.params) != _NPARAMS[self.kind]:
            raise CircuitError(f"{self.kind} takes {_NPARAMS[self.kind]} parameter(s), got {self.params}")
        object.__setattr__(self, "wires", tuple(int(w) for w in self.wires))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))

    def inverse(self) -> "Gate":
        if self.kind == "CX":
            return self
        return replace(self, params=tuple(-p for p in self.params))

    def __str__(self) -> str:
        args = " ".join(str(w) for w in self.wires)
        if self.params:
            args += " " + " ".join(f"{p:.17g}" for p in self.params)
        return f"{'MB' if self.kind == 'MB' else 'P' if self.kind == 'PHASE' else self.kind} {args}"


def rx(q: int, theta: float) -> Gate:
    return Gate("RX", (q,), (theta,))


def rz(q: int, theta: float) -> Gate:
    return Gate("RZ", (q,), (theta,))


def cx(control: int, target: int) -> Gate:
    return Gate("CX", (control, target))


def phase(q: int, phi: float) -> Gate:
    """exp(-i phi n): leaves |0> alone and multiplies |1> by exp(-i phi)."""
    return Gate("PHASE", (q,), (phi,))


def match_block(q1: int, q2: int, theta_x: float, theta_z: float) -> Gate:
    return Gate("MB", (q1, q2), (theta_x, theta_z))


def fswap(q1: int, q2: int, theta: float = math.pi / 2) -> Gate:
    return Gate("FSWAP", (q1, q2), (theta,))


def rx_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def rz_matrix(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def match_block_matrix(theta_x: float, theta_z: float) -> np.ndarray:
    """Rx(pi/2)^2 . CX . [Rx(theta_x) x Rz(theta_z)] . CX . Rx(-pi/2)^2, in time order.

    CX has its control on the first (lower-index) wire.
    """
    wrap_in = np.kron(rx_matrix(math.pi / 2), rx_matrix(math.pi / 2))
    wrap_out = np.kron(rx_matrix(-math.pi / 2), rx_matrix(-math.pi / 2))
    core = np.kron(rx_matrix(theta_x), rz_matrix(theta_z))
    return wrap_out @ _CX @ core @ _CX @ wrap_in


def fswap_matrix(theta: float) -> np.ndarray:
    e = np.exp(1j * theta)
    return np.array([[1, 0, 0, 0], [0, 0, e, 0], [0, e, 0, 0], [0, 0, 0, 1]], dtype=complex)


def gate_unitary(g: Gate) -> np.ndarray:
    if g.kind == "RX":
        return rx_matrix(g.params[0])
    if g.kind == "RZ":
        return rz_matrix(g.params[0])
    if g.kind == "PHASE":
        return np.diag([1.0, np.exp(-1j * g.params[0])])
    if g.kind == "CX":
        return _CX.copy()
    if g.kind == "MB":
        return match_block_matrix(*g.params)
    return fswap_matrix(g.params[0])


@dataclass(frozen=True)
class Circuit:
    """Ordered gates plus the wire -> orbital-label map after the last gate."""

    n_qubits: int
    gates: tuple[Gate, ...] = ()
    permutation: tuple[int, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        perm = tuple(range(self.n_qubits)) if self.permutation is None else tuple(int(p) for p in self.permutation)
        if sorted(perm) != list(range(self.n_qubits)):
            raise CircuitError(f"permutation {perm} is not a bijection on {self.n_qubits} wires")
        object.__setattr__(self, "permutation", perm)
        for g in self.gates:
            if max(g.wires) >= self.n_qubits or min(g.wires) < 0:
                raise CircuitError(f"gate {g} outside circuit width {self.n_qubits}")

    def __len__(self) -> int:
        return len(self.gates)

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    def then(self, other: "Circuit") -> "Circuit":
        """Sequential composition; the label map is taken from ``other``."""
        if other.n_qubits != self.n_qubits:
            raise CircuitError("width mismatch")
        return Circuit(self.n_qubits, self.gates + other.gates, other.permutation)

    def inverse(self) -> "Circuit":
        return Circuit(self.n_qubits, tuple(g.inverse() for g in reversed(self.gates)))

    def depth(self) -> int:
        level = [0] * self.n_qubits
        for g in self.gates:
            d = max(level[w] for w in g.wires) + 1
            for w in g.wires:
                level[w] = d
        return max(level, default=0)


def embed(u: np.ndarray, wires: Sequence[int], n: int) -> np.ndarray:
    """Dense 2^n operator acting as ``u`` on ``wires`` and identity elsewhere."""
    k = len(wires)
    idx = np.arange(2**n)
    sub = np.zeros_like(idx)
    mask = 0
    for t, w in enumerate(wires):
        bit = n - 1 - w
        sub |= ((idx >> bit) & 1) << (k - 1 - t)
        mask |= 1 << bit
    rest = idx & ~mask
    return u[sub[:, None], sub[None, :]] * (rest[:, None] == rest[None, :])


def circuit_unitary(c: Circuit) -> np.ndarray:
    if c.n_qubits > DENSE_CAP:
        raise CircuitError(f"dense unitary limited to {DENSE_CAP} qubits, circuit has {c.n_qubits}")
    U = np.eye(2**c.n_qubits, dtype=complex)
    for g in c.gates:
        U = embed(gate_unitary(g), g.wires, c.n_qubits) @ U
    return U


def phase_aligned_distance(A: np.ndarray, B: np.ndarray) -> float:
    """max|A - e^{ia} B| with the phase fixed on the largest-magnitude entry of A."""
    k = np.unravel_index(np.argmax(np.abs(A)), A.shape)
    if abs(B[k]) < 1e-300:
        return float(np.max(np.abs(A - B)))
    ph = A[k] / B[k]
    ph /= abs(ph)
    return float(np.max(np.abs(A - ph * B)))


# --------------------------------------------------------------------------
# text serialization

_TAGS = {"MB": "MB", "FSWAP": "FSWAP", "P": "PHASE", "CX": "CX", "RX": "RX", "RZ": "RZ"}


def dumps(c: Circuit) -> str:
    lines = [f"QUBITS {c.n_qubits}"]
    if c.permutation != tuple(range(c.n_qubits)):
        lines.append("PERM " + " ".join(str(p) for p in c.permutation))
    lines.extend(str(g) for g in c.gates)
    return "\n".join(lines) + "\n"


def loads(text: str) -> Circuit:
    n = None
    perm = None
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tag, *args = line.split()
        try:
            if tag == "QUBITS":
                n = int(args[0])
                continue
            if tag == "PERM":
                perm = [int(a) for a in args]
                continue
            if tag not in _TAGS:
                raise CircuitError(f"line {lineno}: unsupported gate tag {tag!r}")
            kind = _TAGS[tag]
            nw = _ARITY[kind]
            if len(args) != nw + _NPARAMS[kind]:
                raise CircuitError(f"line {lineno}: wrong number of fields for {tag}")
            gates.append(Gate(kind, tuple(int(a) for a in args[:nw]), tuple(float(a) for a in args[nw:])))
        except (ValueError, IndexError) as exc:
            if isinstance(exc, CircuitError):
                raise
            raise CircuitError(f"line {lineno}: cannot parse {line!r}") from exc
    if n is None:
        raise CircuitError("missing QUBITS header")
    return Circuit(n, tuple(gates), perm)
