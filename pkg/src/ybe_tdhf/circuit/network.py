"""Fermionic swap network and one Trotter step of a one-body Hamiltonian."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .freefermion import HOPPING_ANGLE_SCALE
from .gates import Circuit, CircuitError, Gate, match_block, normalize_angle, phase

FSWAP_VARIANTS = ("fermionic", "bare")


@dataclass(frozen=True)
class PairSchedule:
    n: int
    layers: tuple[tuple[tuple[int, int], ...], ...]
    realized_pairs: frozenset[frozenset[int]]
    final_permutation: tuple[int, ...]


def _rows(n: int) -> list[list[tuple[int, int]]]:
    rows = []
    for r in range(n):
        row = [(w, w + 1) for w in range(r % 2, n - 1, 2)]
        if row:
            rows.append(row)
    return rows


def pair_schedule(n: int, perm_in=None) -> PairSchedule:
    """Brickwork of position pairs; every pair of labels meets exactly once."""
    if n < 2:
        raise CircuitError(f"pair schedule needs at least 2 wires, got {n}")
    labels = list(range(n)) if perm_in is None else list(perm_in)
    rows = _rows(n)
    realized = set()
    for row in rows:
        for a, b in row:
            realized.add(frozenset((labels[a], labels[b])))
            labels[a], labels[b] = labels[b], labels[a]
    return PairSchedule(n, tuple(tuple(r) for r in rows), frozenset(realized), tuple(labels))


def _check_hamiltonian(G: np.ndarray, n: int) -> np.ndarray:
    G = np.asarray(G)
    if G.shape != (n, n):
        raise CircuitError(f"G must be {n}x{n}, got {G.shape}")
    if np.max(np.abs(G - G.conj().T), initial=0.0) > 1e-10:
        raise CircuitError("G must be Hermitian (symmetric when real)")
    return G


def _pair_gates(w: int, g: complex, dt: float, fswap: str) -> list[Gate]:
    """Hop between wires w, w+1 for time dt with coupling g, then exchange the modes."""
    gates = []
    chi = float(np.angle(g)) if abs(np.imag(g)) > 0 else 0.0
    mag = float(np.real(g)) if chi == 0.0 else abs(g)
    if chi:
        gates.append(phase(w, chi))
    theta = normalize_angle(math.pi / 2 + HOPPING_ANGLE_SCALE * mag * dt)
    gates.append(match_block(w, w + 1, theta, theta))
    if fswap == "fermionic":
        # MB(pi/2, pi/2) moves the modes with an extra -i; undo it to get a true fermionic swap
        gates.append(phase(w, -math.pi / 2))
        gates.append(phase(w + 1, normalize_angle(-math.pi / 2 - chi)))
    elif chi:
        gates.append(phase(w + 1, -chi))
    return gates


def trotter_step(
    G: np.ndarray,
    dt: float,
    perm_in=None,
    *,
    fswap: str = "fermionic",
    mirror: bool = False,
) -> tuple[Circuit, tuple[int, ...]]:
    """One swap-network Trotter step of exp(-i dt sum_pq G_pq a_p^dag a_q).

    ``G`` is indexed by orbital label, ``perm_in[w]`` is the label on wire w.
    Each scheduled pair gets a hopping block fused with the exchange, then
    every wire gets PHASE(dt G_pp) for its label. ``mirror`` runs the same
    step back to front (phases first, rows reversed); alternating plain and
    mirrored steps makes the splitting error second order overall.
    """
    if fswap not in FSWAP_VARIANTS:
        raise CircuitError(f"fswap variant must be one of {FSWAP_VARIANTS}, got {fswap!r}")
    if dt <= 0:
        raise CircuitError(f"dt must be positive, got {dt}")
    n = np.asarray(G).shape[0]
    G = _check_hamiltonian(G, n)
    labels = list(range(n)) if perm_in is None else [int(p) for p in perm_in]
    if sorted(labels) != list(range(n)):
        raise CircuitError(f"perm_in {perm_in} is not a permutation of {n} labels")

    def phase_layer(lab):
        return [phase(w, normalize_angle(dt * float(np.real(G[p, p])))) for w, p in enumerate(lab)]

    rows = _rows(n) if n > 1 else []
    if mirror:
        rows = rows[::-1]
    gates: list[Gate] = []
    if mirror:
        gates += phase_layer(labels)
    for row in rows:
        for w, _ in row:
            p, q = labels[w], labels[w + 1]
            gates += _pair_gates(w, G[p, q], dt, fswap)
            labels[w], labels[w + 1] = q, p
    if not mirror:
        gates += phase_layer(labels)
    perm_out = tuple(labels)
    return Circuit(n, tuple(gates), perm_out), perm_out
