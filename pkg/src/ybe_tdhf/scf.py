"""Restricted closed-shell Hartree-Fock."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .integrals import IntegralSet

log = logging.getLogger(__name__)


class ScfError(RuntimeError):
    pass


class ScfConvergenceError(ScfError):
    pass


@dataclass(frozen=True)
class ScfOptions:
    max_iter: int = 200
    e_tol: float = 1e-10
    d_tol: float = 1e-8
    damping: float = 0.3
    damping_iters: int = 5


@dataclass
class ScfResult:
    C: np.ndarray
    eps: np.ndarray
    P_ao: np.ndarray
    E_hf: float
    n_elec: int
    F_ao: np.ndarray
    converged: bool = True
    n_iter: int = 0
    energies: list[float] = field(default_factory=list)

    @property
    def n_occ(self) -> int:
        return self.n_elec // 2


def orthogonalizer(S: np.ndarray, lindep_tol: float = 1e-10) -> np.ndarray:
    """Symmetric orthogonalization matrix S^(-1/2)."""
    w, v = np.linalg.eigh(S)
    if w.min() < lindep_tol:
        raise ScfError(f"overlap matrix is (nearly) singular: smallest eigenvalue {w.min():.3e}")
    return (v / np.sqrt(w)) @ v.T


def fock_from_density(hcore: np.ndarray, eri: np.ndarray, P_ao: np.ndarray) -> np.ndarray:
    """Closed-shell Fock matrix F = h + J[P] - K[P]/2.

    ``P_ao`` is the total (both spins) density; it may be complex Hermitian,
    in which case the returned Fock matrix is complex Hermitian as well.
    """
    m = hcore.shape[0]
    if P_ao.shape != (m, m) or eri.shape != (m, m, m, m):
        raise ValueError(f"dimension mismatch: hcore {hcore.shape}, eri {eri.shape}, P {P_ao.shape}")
    J = np.einsum("pqrs,sr->pq", eri, P_ao)
    K = np.einsum("prsq,rs->pq", eri, P_ao)
    return hcore + J - 0.5 * K


def total_energy(P_ao: np.ndarray, hcore: np.ndarray, F_ao: np.ndarray, e_nuc: float) -> float:
    """Electronic HF energy 1/2 Tr[P (h + F)] plus nuclear repulsion."""
    return 0.5 * float(np.real(np.sum(P_ao.T * (hcore + F_ao)))) + e_nuc


def _solve_roothaan(F: np.ndarray, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    eps, Cp = np.linalg.eigh(X.T @ F @ X)
    return eps, X @ Cp


def _aufbau_density(C: np.ndarray, eps: np.ndarray, n_occ: int) -> np.ndarray:
    if 0 < n_occ < len(eps) and abs(eps[n_occ] - eps[n_occ - 1]) < 1e-8:
        warnings.warn(
            f"degenerate HOMO/LUMO (gap {eps[n_occ] - eps[n_occ - 1]:.2e}); occupation is ambiguous",
            RuntimeWarning,
            stacklevel=3,
        )
    Cocc = C[:, :n_occ]
    return 2.0 * Cocc @ Cocc.T


def run_rhf(ints: IntegralSet, n_elec: int | None = None, opts: ScfOptions | None = None) -> ScfResult:
    """Fixed-point RHF starting from the core-Hamiltonian guess.

    Linear density damping is applied for the first ``opts.damping_iters``
    iterations. Convergence needs both |dE| < e_tol and max|dP| < d_tol.
    """
    opts = opts or ScfOptions()
    if n_elec is None:
        n_elec = ints.n_elec or 0
    m = ints.M
    if n_elec % 2 or n_elec < 0:
        raise ScfError(f"closed-shell RHF needs an even, non-negative electron count, got {n_elec}")
    if n_elec > 2 * m:
        raise ScfError(f"{n_elec} electrons do not fit in {m} spatial orbitals")
    n_occ = n_elec // 2

    X = orthogonalizer(ints.S)
    eps, C = _solve_roothaan(ints.hcore, X)
    P = _aufbau_density(C, eps, n_occ)
    F = fock_from_density(ints.hcore, ints.eri, P)
    E = total_energy(P, ints.hcore, F, ints.e_nuc)
    energies = [E]
    log.info("iter=0 E=%.12f dE=nan dP=nan", E)

    for it in range(1, opts.max_iter + 1):
        eps, C = _solve_roothaan(F, X)
        P_new = _aufbau_density(C, eps, n_occ)
        if it <= opts.damping_iters and opts.damping > 0:
            P_new = (1.0 - opts.damping) * P_new + opts.damping * P
        dP = float(np.max(np.abs(P_new - P))) if m else 0.0
        P = P_new
        F = fock_from_density(ints.hcore, ints.eri, P)
        E_new = total_energy(P, ints.hcore, F, ints.e_nuc)
        dE = E_new - E
        E = E_new
        energies.append(E)
        log.info("iter=%d E=%.12f dE=%.3e dP=%.3e", it, E, dE, dP)
        if abs(dE) < opts.e_tol and dP < opts.d_tol and it > opts.damping_iters:
            break
    else:
        raise ScfConvergenceError(f"SCF did not converge in {opts.max_iter} iterations (dE={dE:.2e}, dP={dP:.2e})")

    # Final undamped diagonalization so C, eps and P are mutually consistent.
    eps, C = _solve_roothaan(F, X)
    P = _aufbau_density(C, eps, n_occ)
    F = fock_from_density(ints.hcore, ints.eri, P)
    E = total_energy(P, ints.hcore, F, ints.e_nuc)
    return ScfResult(C=C, eps=eps, P_ao=P, E_hf=E, n_elec=n_elec, F_ao=F, n_iter=it, energies=energies)
