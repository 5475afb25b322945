"""Hybrid TDHF: mean-field assembly, circuit-driven propagation and the exact reference.

Spin orbitals are ordered spin-major, [alpha_1 .. alpha_M, beta_1 .. beta_M],
and that label order is also the initial wire order. Densities follow the
simulator convention rho[p, q] = <a_p^dag a_q>; the matrix that multiplies
operators (and that evolves as u P u^dag) is its transpose.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from .circuit.compress import Compressor
from .circuit.network import trotter_step
from .integrals import IntegralSet
from .scf import ScfResult, fock_from_density, total_energy
from .simulator import Statevector, init_state, one_rdm, run_circuit, sample_z, z_expectations

log = logging.getLogger(__name__)

MODES = ("full-rdm", "z-only")
_AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}


class TdhfError(RuntimeError):
    pass


# --------------------------------------------------------------------------
# field


@dataclass(frozen=True)
class FieldPulse:
    e_max: float = 0.07
    omega: float = 0.10
    polarization: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        pol = self.polarization
        if isinstance(pol, str):
            if pol not in _AXES:
                raise ValueError(f"polarization must be x, y, z or a unit vector, got {pol!r}")
            pol = _AXES[pol]
        pol = tuple(float(x) for x in pol)
        if len(pol) != 3 or abs(math.sqrt(sum(x * x for x in pol)) - 1.0) > 1e-12:
            raise ValueError(f"polarization must be a unit 3-vector, got {pol}")
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        object.__setattr__(self, "polarization", pol)

    @property
    def duration(self) -> float:
        return 6.0 * math.pi / self.omega


def field_amplitude(t: float, pulse: FieldPulse) -> float:
    """Three-cycle sine pulse: linear ramp up, one flat cycle, linear ramp down."""
    wt = pulse.omega * t
    cycle = wt / (2.0 * math.pi)
    if cycle < 0.0 or cycle > 3.0:
        return 0.0
    env = min(cycle, 1.0, 3.0 - cycle)
    return env * math.sin(wt) * pulse.e_max


# --------------------------------------------------------------------------
# mean field


@dataclass(frozen=True)
class MeanFieldFrame:
    C: np.ndarray
    hcore: np.ndarray
    eri: np.ndarray
    dipole: np.ndarray
    e_nuc: float
    n_elec: int
    E_hf: float = float("nan")

    @classmethod
    def from_scf(cls, ints: IntegralSet, scf: ScfResult) -> "MeanFieldFrame":
        return cls(scf.C, ints.hcore, ints.eri, ints.dipole, ints.e_nuc, scf.n_elec, scf.E_hf)

    @property
    def M(self) -> int:
        return self.C.shape[1]

    @property
    def n_spin_orbitals(self) -> int:
        return 2 * self.M

    @property
    def occupied_wires(self) -> list[int]:
        n_occ = self.n_elec // 2
        return list(range(n_occ)) + list(range(self.M, self.M + n_occ))

    def ground_rho(self) -> np.ndarray:
        rho = np.zeros((2 * self.M, 2 * self.M))
        rho[self.occupied_wires, self.occupied_wires] = 1.0
        return rho

    def dipole_along(self, pol) -> np.ndarray:
        return np.einsum("k,kpq->pq", np.asarray(pol, dtype=float), self.dipole)


def spatial_density(rho, M: int) -> np.ndarray:
    """Total (both spins) MO density P_mo from a spin-orbital rho or occupation vector."""
    rho = np.asarray(rho)
    if rho.ndim == 1:
        if rho.shape != (2 * M,):
            raise TdhfError(f"occupation vector must have length {2 * M}, got {rho.shape}")
        return np.diag(rho[:M] + rho[M:]).astype(complex)
    if rho.shape != (2 * M, 2 * M):
        raise TdhfError(f"rho must be {2 * M}x{2 * M}, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
        raise TdhfError("density matrix is not Hermitian")
    return (rho[:M, :M] + rho[M:, M:]).T


def ao_density(frame: MeanFieldFrame, rho) -> np.ndarray:
    P_mo = spatial_density(rho, frame.M)
    return frame.C @ P_mo @ frame.C.T


def assemble_g(frame: MeanFieldFrame, rho, e_field: float, pulse: FieldPulse) -> np.ndarray:
    """Spin-orbital one-body matrix blockdiag(G_mo, G_mo) for the current density."""
    P_ao = ao_density(frame, rho)
    F = fock_from_density(frame.hcore, frame.eri, P_ao)
    if e_field:
        F = F + e_field * frame.dipole_along(pulse.polarization)
    G_mo = frame.C.T @ F @ frame.C
    G_mo = 0.5 * (G_mo + G_mo.conj().T)
    if np.max(np.abs(G_mo.imag)) == 0.0:
        G_mo = G_mo.real
    M = frame.M
    G = np.zeros((2 * M, 2 * M), dtype=G_mo.dtype)
    G[:M, :M] = G_mo
    G[M:, M:] = G_mo
    return G


def energies(frame: MeanFieldFrame, rho, e_field: float, pulse: FieldPulse) -> tuple[float, float]:
    """(field-free HF energy, energy including the dipole coupling) of a density."""
    P_ao = ao_density(frame, rho)
    F = fock_from_density(frame.hcore, frame.eri, P_ao)
    e = total_energy(P_ao, frame.hcore, F, frame.e_nuc)
    coupling = float(np.real(np.sum(P_ao.T * frame.dipole_along(pulse.polarization))))
    return e, e + e_field * coupling


# --------------------------------------------------------------------------
# configuration and trajectories


@dataclass(frozen=True)
class DynamicsConfig:
    pulse: FieldPulse = field(default_factory=FieldPulse)
    dt: float = 0.05
    t_final: float | None = None
    mode: str = "full-rdm"
    compress: bool = True
    shots: int = 0
    seed: int = 0
    fswap: str = "fermionic"
    midpoint_field: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_final is not None and self.t_final < self.dt:
            raise ValueError("t_final must be at least dt")
        if self.shots < 0:
            raise ValueError("shots must be non-negative")
        if self.shots and self.mode != "z-only":
            raise ValueError("finite-shot sampling is only available in z-only mode")

    @property
    def final_time(self) -> float:
        return self.pulse.duration if self.t_final is None else self.t_final

    @property
    def n_steps(self) -> int:
        return int(round(self.final_time / self.dt))

    def field_at(self, t: float) -> float:
        return field_amplitude(t + 0.5 * self.dt if self.midpoint_field else t, self.pulse)


COLUMNS = ("t", "e_field", "energy", "energy_with_field", "norm")


@dataclass
class Trajectory:
    t: list[float] = field(default_factory=list)
    e_field: list[float] = field(default_factory=list)
    energy: list[float] = field(default_factory=list)
    energy_with_field: list[float] = field(default_factory=list)
    norm: list[float] = field(default_factory=list)
    occupations: list[np.ndarray] = field(default_factory=list)

    def append(self, t, e_field, energy, energy_with_field, norm, occ) -> None:
        if not (math.isfinite(energy) and math.isfinite(energy_with_field)):
            raise TdhfError(f"non-finite energy at t={t:.6g}")
        self.t.append(t)
        self.e_field.append(e_field)
        self.energy.append(energy)
        self.energy_with_field.append(energy_with_field)
        self.norm.append(norm)
        self.occupations.append(np.asarray(occ, dtype=float))

    def __len__(self) -> int:
        return len(self.t)

    def column(self, name: str) -> np.ndarray:
        if name.startswith("occ_"):
            return np.array([o[int(name[4:]) - 1] for o in self.occupations])
        return np.asarray(getattr(self, name), dtype=float)

    @property
    def column_names(self) -> list[str]:
        k = len(self.occupations[0]) if self.occupations else 0
        return list(COLUMNS) + [f"occ_{i}" for i in range(1, k + 1)]

    def as_array(self) -> np.ndarray:
        return np.column_stack([self.column(c) for c in self.column_names])

    def write_csv(self, out: TextIO, every: int = 1) -> None:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(self.column_names)
        for row in self.as_array()[::every]:
            w.writerow([f"{x:.12g}" for x in row])


@dataclass
class Comparison:
    max_abs: dict[str, float]
    rms: dict[str, float]
    tolerances: dict[str, float]

    @property
    def passed(self) -> bool:
        return all(self.max_abs[k] <= tol for k, tol in self.tolerances.items() if k in self.max_abs)

    @property
    def worst(self) -> float:
        return max(self.max_abs.values())

    def summary(self) -> str:
        lines = [f"{'column':<20}{'max_abs':>14}{'rms':>14}"]
        for k in self.max_abs:
            lines.append(f"{k:<20}{self.max_abs[k]:>14.3e}{self.rms[k]:>14.3e}")
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines)


def compare_trajectories(a: Trajectory, b: Trajectory, tolerances: dict[str, float] | None = None) -> Comparison:
    ta, tb = np.asarray(a.t), np.asarray(b.t)
    if ta.shape != tb.shape or np.max(np.abs(ta - tb), initial=0.0) > 1e-9 * max(1.0, float(np.max(np.abs(ta), initial=0))):
        raise TdhfError("trajectories are on different time grids")
    if a.column_names != b.column_names:
        raise TdhfError("trajectories have different columns")
    da = a.as_array()[:, 1:] - b.as_array()[:, 1:]
    names = a.column_names[1:]
    max_abs = {k: float(np.max(np.abs(da[:, i]))) for i, k in enumerate(names)}
    rms = {k: float(np.sqrt(np.mean(da[:, i] ** 2))) for i, k in enumerate(names)}
    return Comparison(max_abs, rms, dict(tolerances or {}))


# --------------------------------------------------------------------------
# hybrid loop


@dataclass
class HybridState:
    """Everything the circuit path carries from one step to the next."""

    psi: Statevector
    perm: tuple[int, ...]
    rho: np.ndarray
    step: int = 0
    compressor: Compressor | None = None
    initial: Statevector | None = None


def initial_hybrid_state(frame: MeanFieldFrame, compress: bool) -> HybridState:
    n = frame.n_spin_orbitals
    psi = init_state(n, frame.occupied_wires)
    return HybridState(
        psi=psi,
        perm=tuple(range(n)),
        rho=frame.ground_rho(),
        compressor=Compressor(n) if compress else None,
        initial=psi.copy(),
    )


def measure(state: HybridState, mode: str, shots: int = 0, seed: int = 0) -> np.ndarray:
    """Full 1-RDM, or (z-only) the occupation vector in label order."""
    if mode == "full-rdm":
        return one_rdm(state.psi, state.perm)
    z = sample_z(state.psi, shots, seed) if shots else z_expectations(state.psi)
    occ = np.empty(len(z))
    occ[list(state.perm)] = 0.5 * (1.0 - z)
    return occ


def hybrid_step(
    state: HybridState,
    frame: MeanFieldFrame,
    t: float,
    cfg: DynamicsConfig,
) -> tuple[HybridState, np.ndarray, dict]:
    """Build G from the last measurement, run one Trotter step, measure again."""
    e = cfg.field_at(t)
    G = assemble_g(frame, state.rho, e, cfg.pulse)
    circ, perm = trotter_step(G, cfg.dt, state.perm, fswap=cfg.fswap, mirror=bool(state.step % 2))
    if state.compressor is not None:
        state.compressor.absorb(circ)
        run = state.compressor.to_circuit()
        psi = run_circuit(state.initial, run)
    else:
        run = circ
        psi = run_circuit(state.psi, circ)
    new = HybridState(psi, perm, state.rho, state.step + 1, state.compressor, state.initial)
    rho = measure(new, cfg.mode, cfg.shots, cfg.seed + new.step)
    new.rho = rho
    diag = {"field": e, "gates": len(run), "blocks": run.count("MB")}
    return new, rho, diag


def _row_occupations(rho) -> np.ndarray:
    rho = np.asarray(rho)
    return np.real(np.diag(rho)) if rho.ndim == 2 else np.asarray(rho, dtype=float)


def run_tdhf(frame: MeanFieldFrame, cfg: DynamicsConfig) -> Trajectory:
    state = initial_hybrid_state(frame, cfg.compress)
    traj = Trajectory()
    rho0 = state.rho if cfg.mode == "full-rdm" else np.diag(state.rho)
    state.rho = rho0
    f0 = field_amplitude(0.0, cfg.pulse)
    traj.append(0.0, f0, *energies(frame, rho0, f0, cfg.pulse), state.psi.norm(), _row_occupations(rho0))
    for k in range(cfg.n_steps):
        t = k * cfg.dt
        state, rho, _ = hybrid_step(state, frame, t, cfg)
        t1 = (k + 1) * cfg.dt
        e1 = field_amplitude(t1, cfg.pulse)
        en, enf = energies(frame, rho, e1, cfg.pulse)
        traj.append(t1, e1, en, enf, state.psi.norm(), _row_occupations(rho))
        if k % 500 == 0:
            log.debug("step=%d t=%.3f E=%.10f", k, t1, en)
    return traj


# --------------------------------------------------------------------------
# classical reference


def _propagator(h: np.ndarray, dt: float) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * dt * w)) @ v.conj().T


def reference_propagate(frame: MeanFieldFrame, cfg: DynamicsConfig) -> Trajectory:
    """Exact one-body propagation of the MO density with the same frozen-step scheme.

    Works with the per-spin spatial matrix P (operator convention), which
    evolves as u P u^dag with u = exp(-i dt G_mo). In z-only mode the Fock
    build sees only the diagonal, as the circuit path does.
    """
    M = frame.M
    P = np.zeros((M, M), dtype=complex)
    n_occ = frame.n_elec // 2
    P[range(n_occ), range(n_occ)] = 1.0

    def as_rho(P):
        rho = np.zeros((2 * M, 2 * M), dtype=complex)
        rho[:M, :M] = P.T
        rho[M:, M:] = P.T
        return rho if cfg.mode == "full-rdm" else np.real(np.diag(rho))

    traj = Trajectory()
    rho = as_rho(P)
    e0 = field_amplitude(0.0, cfg.pulse)
    traj.append(0.0, e0, *energies(frame, rho, e0, cfg.pulse), 1.0, _row_occupations(rho))
    for k in range(cfg.n_steps):
        G = assemble_g(frame, rho, cfg.field_at(k * cfg.dt), cfg.pulse)
        u = _propagator(G[:M, :M], cfg.dt)
        P = u @ P @ u.conj().T
        rho = as_rho(P)
        t1 = (k + 1) * cfg.dt
        e1 = field_amplitude(t1, cfg.pulse)
        traj.append(t1, e1, *energies(frame, rho, e1, cfg.pulse), 1.0, _row_occupations(rho))
    return traj
