"""Constant-depth compression of free-fermion circuits by local rewrites.

The canonical form is a triangle of two-mode blocks: staircase j (for j =
0 .. n-2) covers pairs j, j-1, ..., 0 in time order. A new block on pair k
is pushed into the triangle from the right. On the last staircase it meets
the blocks on pairs k and k-1 and the three are turned over (the
three-body reflection), which leaves the staircase with the same shape and
sends one block on pair k-1 into the staircase before. The walk stops at
pair 0, where the block simply merges. Each absorbed block costs at most
k <= n-2 turnovers, so a Trotter step of O(n^2) blocks costs O(n^3).

Blocks are kept as their 2 x 2 one-body images and per-wire phases are
carried separately and folded into the next block that touches the wire.
"""

from __future__ import annotations

import numpy as np

from .freefermion import embed_one_body, gate_one_body, triangle_to_circuit, turnover
from .gates import Circuit, CircuitError, Gate


class Compressor:
    def __init__(self, n: int):
        if n < 1:
            raise CircuitError("need at least one wire")
        self.n = n
        self.stairs = [[np.eye(2, dtype=complex) for _ in range(j + 1)] for j in range(n - 1)]
        self.pending = np.ones(n, dtype=complex)
        self.rewrites = 0
        self.permutation = tuple(range(n))

    def _absorb_block(self, u: np.ndarray, k: int) -> None:
        u = u @ np.diag(self.pending[k : k + 2])
        self.pending[k : k + 2] = 1.0
        j = self.n - 2
        while True:
            stair = self.stairs[j]
            # stair[i] sits on pair j - i
            if k == 0:
                stair[j] = u @ stair[j]
                return
            ik, ikm = j - k, j - k + 1
            V = embed_one_body(u, (1, 2), 3) @ embed_one_body(stair[ikm], (0, 1), 3) @ embed_one_body(stair[ik], (1, 2), 3)
            v1, v2, v3 = turnover(V, lower_first=True)
            self.rewrites += 1
            stair[ik], stair[ikm] = v2, v3
            u, k, j = v1, k - 1, j - 1

    def absorb_gate(self, g: Gate) -> None:
        v = gate_one_body(g)
        if g.kind == "PHASE":
            self.pending[g.wires[0]] *= v[0, 0]
            return
        a, b = g.wires
        if b != a + 1:
            if a == b + 1:
                J = np.array([[0, 1], [1, 0]])
                v, a = J @ v @ J, b
            else:
                raise CircuitError(f"{g} does not act on adjacent wires")
        self._absorb_block(v, a)

    def absorb(self, c: Circuit) -> "Compressor":
        if c.n_qubits != self.n:
            raise CircuitError(f"width mismatch: compressor {self.n}, circuit {c.n_qubits}")
        for g in c.gates:
            self.absorb_gate(g)
        self.permutation = c.permutation
        return self

    def one_body(self) -> np.ndarray:
        u = np.eye(self.n, dtype=complex)
        for j, stair in enumerate(self.stairs):
            for i, blk in enumerate(stair):
                m = j - i
                u[m : m + 2, :] = blk @ u[m : m + 2, :]
        return np.diag(self.pending) @ u

    def to_circuit(self) -> Circuit:
        return triangle_to_circuit(self.stairs, self.n, permutation=self.permutation, trailing=self.pending)


def compress_ybe(c: Circuit) -> Circuit:
    """Canonical triangular form of a free-fermion circuit."""
    return Compressor(c.n_qubits).absorb(c).to_circuit()
