"""Local rewrites on match blocks: merging and the three-body reflection."""

from __future__ import annotations

import numpy as np
from scipy.optimize import least_squares

from .gates import CircuitError, Gate, gate_unitary, match_block, normalize_angle, phase_aligned_distance

REFLECT_TOL = 1e-10
REFLECT_FAIL_TOL = 1e-8
N_SEEDS = 8
_SEED = 20240229


class YbeError(CircuitError):
    pass


def as_match_block(g: Gate) -> Gate:
    """FSWAP(theta) is a match block only at theta = +-pi/2 (the iSWAP family member)."""
    if g.kind == "MB":
        return g
    if g.kind == "FSWAP":
        t = normalize_angle(g.params[0])
        if abs(abs(t) - np.pi / 2) < 1e-12:
            a = -t
            return match_block(*g.wires, a, a)
    raise YbeError(f"{g} is not in the match-block family")


def merge_blocks(b1: Gate, b2: Gate) -> Gate:
    """Single block equal to b1 followed by b2 (same wires, same orientation)."""
    b1, b2 = as_match_block(b1), as_match_block(b2)
    if b1.wires != b2.wires:
        raise CircuitError(f"cannot merge blocks on {b1.wires} and {b2.wires}")
    tx = normalize_angle(b1.params[0] + b2.params[0])
    tz = normalize_angle(b1.params[1] + b2.params[1])
    return match_block(*b1.wires, tx, tz)


def _kron_embed_3(u4: np.ndarray, lower: bool) -> np.ndarray:
    eye = np.eye(2)
    return np.kron(u4, eye) if lower else np.kron(eye, u4)


def _triple_unitary(angles, first_lower: bool) -> np.ndarray:
    from .gates import match_block_matrix

    U = np.eye(8, dtype=complex)
    lower = first_lower
    for k in range(3):
        U = _kron_embed_3(match_block_matrix(angles[2 * k], angles[2 * k + 1]), lower) @ U
        lower = not lower
    return U


def ybe_reflect(triple) -> list[Gate]:
    """Rewrite A(q1,q2) B(q2,q3) C(q1,q2) as A'(q2,q3) B'(q1,q2) C'(q2,q3).

    The reverse orientation is handled as well. Solved numerically over the
    six block angles plus a global phase.
    """
    if len(triple) != 3:
        raise YbeError("ybe_reflect takes exactly three gates")
    blocks = [as_match_block(g) for g in triple]
    w0, w1, w2 = (tuple(b.wires) for b in blocks)
    if w0 != w2 or len(set(w0) & set(w1)) != 1 or w0 == w1:
        raise YbeError(f"gates on {w0}, {w1}, {w2} do not form a reflectable triple")
    wires = sorted(set(w0) | set(w1))
    if wires[2] - wires[0] != 2 or any(tuple(sorted(w)) != w for w in (w0, w1)):
        raise YbeError("reflection needs ordered adjacent wire pairs")
    first_lower = w0[0] == wires[0]

    target = np.eye(8, dtype=complex)
    lower = first_lower
    for b in blocks:
        target = _kron_embed_3(gate_unitary(b), lower) @ target
        lower = not lower

    def residual(x):
        diff = _triple_unitary(x[:6], not first_lower) * np.exp(1j * x[6]) - target
        return np.concatenate([diff.real.ravel(), diff.imag.ravel()])

    a = [p for b in blocks for p in b.params]
    guesses = [np.array(a[4:6] + a[2:4] + a[0:2] + [0.0])]
    rng = np.random.default_rng(_SEED)
    guesses += [np.concatenate([rng.uniform(-np.pi, np.pi, 6), [0.0]]) for _ in range(N_SEEDS)]

    best = None
    for x0 in guesses:
        sol = least_squares(residual, x0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200 * 7)
        U = _triple_unitary(sol.x[:6], not first_lower)
        err = phase_aligned_distance(target, U)
        if best is None or err < best[0]:
            best = (err, sol.x)
        if err < REFLECT_TOL:
            break
    err, x = best
    if err > REFLECT_FAIL_TOL:
        raise YbeError(f"no reflection found (residual {err:.2e})")
    out_wires = [w1, w0, w1]
    return [match_block(*out_wires[k], normalize_angle(x[2 * k]), normalize_angle(x[2 * k + 1])) for k in range(3)]
