"""Single-particle (one-body) images of number-conserving circuits.

A circuit made only of PHASE, number-conserving MATCH_BLOCK (theta_x ==
theta_z) and FSWAP(+-pi/2) gates acts on Fock space as a free-fermion
unitary: it is fixed, up to nothing at all (every such gate leaves the
vacuum untouched), by the N x N matrix ``u`` with

    U a_q^dag U^dag = sum_p u[p, q] a_p^dag

in the wire basis. This module computes ``u`` gate by gate, factors
triples of two-mode blocks (the turnover used by compression), and turns a
triangle of 2 x 2 blocks back into gates.
"""

from __future__ import annotations

import math

import numpy as np

from .gates import Circuit, CircuitError, Gate, match_block, normalize_angle, phase

# MATCH_BLOCK(a, a) one-body image is exp(-i a sigma_x); hopping of strength
# g for a time dt needs a = HOPPING_ANGLE_SCALE * g * dt. Pinned by
# test_circuit.py::test_hopping_angle_calibration.
HOPPING_ANGLE_SCALE = 1.0

_NUMBER_CONSERVING_TOL = 1e-12


class NotFreeFermionError(CircuitError):
    pass


def hopping_matrix(theta: float) -> np.ndarray:
    """exp(-i theta sigma_x)."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -1j * s], [-1j * s, c]])


def gate_one_body(g: Gate) -> np.ndarray:
    """1x1 or 2x2 one-body image of a single gate (in ``g.wires`` order)."""
    if g.kind == "PHASE":
        return np.array([[np.exp(-1j * g.params[0])]])
    if g.kind == "MB":
        a, b = g.params
        if abs(normalize_angle(a - b)) > _NUMBER_CONSERVING_TOL:
            raise NotFreeFermionError(f"{g} does not conserve particle number (theta_x != theta_z)")
        return hopping_matrix(a)
    if g.kind == "FSWAP":
        (t,) = g.params
        # +1 on |11> is only consistent with a free-fermion swap when exp(2it) = -1
        if abs(np.exp(2j * t) + 1) > _NUMBER_CONSERVING_TOL:
            raise NotFreeFermionError(f"{g} is not a free-fermion gate (needs theta = +-pi/2)")
        return np.exp(1j * t) * np.array([[0, 1], [1, 0]], dtype=complex)
    raise NotFreeFermionError(f"{g.kind} is not part of the free-fermion gate set")


def one_body_of_circuit(c: Circuit) -> np.ndarray:
    u = np.eye(c.n_qubits, dtype=complex)
    for g in c.gates:
        w = list(g.wires)
        v = gate_one_body(g)
        u[w, :] = v @ u[w, :]
    return u


def embed_one_body(v: np.ndarray, wires, n: int) -> np.ndarray:
    out = np.eye(n, dtype=complex)
    w = list(wires)
    out[np.ix_(w, w)] = v
    return out


# --------------------------------------------------------------------------
# two-mode blocks


def decompose_block(u: np.ndarray) -> tuple[float, float, float, float]:
    """Split a 2x2 unitary as diag(e^{ia}, e^{ib}) . exp(-i theta sigma_x) . diag(e^{-i phi}, 1).

    Returns ``(phi, theta, a, b)``: a PHASE(phi) on the first wire, then
    MATCH_BLOCK(theta, theta), leaves output phases ``a``/``b`` to be pushed
    further along the wires.
    """
    c = 0.5 * (abs(u[0, 0]) + abs(u[1, 1]))
    s = 0.5 * (abs(u[0, 1]) + abs(u[1, 0]))
    theta = math.atan2(s, c)
    cross = -1j * u[0, 0] * np.conj(u[0, 1])
    phi = -float(np.angle(cross)) if abs(cross) > 1e-13 else 0.0
    core = hopping_matrix(theta) @ np.diag([np.exp(-1j * phi), 1.0])
    d = u @ core.conj().T
    return phi, theta, float(np.angle(d[0, 0])), float(np.angle(d[1, 1]))


def _givens_zeroing_first(x0: complex, x1: complex) -> np.ndarray:
    """Unitary v with v @ [x0, x1] = [0, r]."""
    r = math.hypot(abs(x0), abs(x1))
    if r < 1e-300:
        return np.eye(2, dtype=complex)
    return np.array([[x1, -x0], [np.conj(x0), np.conj(x1)]]) / r


def turnover(V: np.ndarray, lower_first: bool = True) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Factor a 3-mode unitary into three two-mode blocks.

    With ``lower_first`` the result (v1, v2, v3) acts, in time order, on
    modes (0,1), (1,2), (0,1): ``V = E01(v3) E12(v2) E01(v1)``. Otherwise the
    pattern is (1,2), (0,1), (1,2). Any V in U(3) factors this way, which is
    what makes the reflection of a block triple always solvable.
    """
    if not lower_first:
        J = np.eye(3)[::-1]
        J2 = np.eye(2)[::-1]
        v1, v2, v3 = turnover(J @ V @ J, lower_first=True)
        return J2 @ v1 @ J2, J2 @ v2 @ J2, J2 @ v3 @ J2

    # v3 on (0,1) must clear V[0, 2]; afterwards row 0 only involves modes 0,1
    a, b = V[0, 2], V[1, 2]
    r = math.hypot(abs(a), abs(b))
    if r < 1e-15:
        v3 = np.eye(2, dtype=complex)
    else:
        col = np.array([np.conj(b), -np.conj(a)]) / r
        v3 = np.array([[col[0], -np.conj(col[1])], [col[1], np.conj(col[0])]])
    W = embed_one_body(v3.conj().T, (0, 1), 3) @ V
    x, y = W[0, 0], W[0, 1]
    nrm = math.hypot(abs(x), abs(y))
    x, y = x / nrm, y / nrm
    v1 = np.array([[x, y], [-np.conj(y), np.conj(x)]])
    rest = W @ embed_one_body(v1.conj().T, (0, 1), 3)
    v2 = rest[1:, 1:]
    return v1, v2, v3


# --------------------------------------------------------------------------
# triangle <-> gates
#
# A triangle on n wires is a list of staircases; staircase j holds the
# blocks for pairs j, j-1, ..., 0 in time order, and staircases run j = 0,
# 1, ..., n-2. That is n(n-1)/2 blocks in all, depth 2n-3.


def triangle_pairs(n: int) -> list[int]:
    return [m for j in range(n - 1) for m in range(j, -1, -1)]


def triangle_to_circuit(
    stairs: list[list[np.ndarray]],
    n: int,
    leading: np.ndarray | None = None,
    permutation=None,
    trailing: np.ndarray | None = None,
    tol: float = 1e-14,
) -> Circuit:
    """Emit [PHASE] + MATCH_BLOCK per block, pushing phases to the end.

    ``leading`` / ``trailing`` are per-wire phase factors acting before /
    after the triangle.
    """
    pend = np.ones(n, dtype=complex) if leading is None else np.asarray(leading, dtype=complex).copy()
    gates: list[Gate] = []
    for j, stair in enumerate(stairs):
        for k, blk in enumerate(stair):
            m = j - k
            u = blk @ np.diag(pend[m : m + 2])
            phi, theta, a, b = decompose_block(u)
            phi = normalize_angle(phi)
            if abs(phi) > tol:
                gates.append(phase(m, phi))
            theta = normalize_angle(theta)
            gates.append(match_block(m, m + 1, theta, theta))
            pend[m], pend[m + 1] = np.exp(1j * a), np.exp(1j * b)
    if trailing is not None:
        pend = pend * np.asarray(trailing)
    for w in range(n):
        phi = normalize_angle(-float(np.angle(pend[w])))
        if abs(phi) > tol:
            gates.append(phase(w, phi))
    return Circuit(n, tuple(gates), permutation)


def resynthesize(u: np.ndarray, perm=None, tol: float = 1e-10) -> Circuit:
    """Triangular Givens factorization of a one-body unitary into gates.

    Column n-1 is cleared by the last staircase (blocks on pairs 0, 1, ...,
    n-2 applied from the left), then column n-2 by the one before, and so on.
    Whatever diagonal is left over acts first and is pushed through to the
    end of the circuit.
    """
    u = np.asarray(u, dtype=complex)
    n = u.shape[0]
    if u.shape != (n, n) or np.max(np.abs(u.conj().T @ u - np.eye(n))) > tol:
        raise CircuitError("resynthesize needs a unitary matrix")
    work = u.copy()
    stairs: list[list[np.ndarray]] = [[] for _ in range(n - 1)]
    for j in range(n - 2, -1, -1):
        col = j + 1
        blocks = []
        for m in range(0, j + 1):
            v = _givens_zeroing_first(work[m, col], work[m + 1, col])
            work[m : m + 2, :] = v @ work[m : m + 2, :]
            blocks.append(v.conj().T)
        # staircase j in time order is pairs j, ..., 0
        stairs[j] = blocks[::-1]
    leading = np.diag(work).copy()
    return triangle_to_circuit(stairs, n, leading=leading, permutation=perm)
