import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from ybe_tdhf.integrals import IntegralSet, Molecule, build_basis, compute_integrals
from ybe_tdhf.scf import (
    ScfConvergenceError,
    ScfError,
    ScfOptions,
    fock_from_density,
    orthogonalizer,
    run_rhf,
    total_energy,
)

R_E = 0.734 * oracles.BOHR_PER_ANGSTROM

# Independent SCF (scipy generalized eigensolver on quadrature integrals).
ORACLE_E_STO3G = -1.1170416281371889
ORACLE_E_631G = -1.1268159347921691
ORACLE_E_STO3G_R14 = -1.1167143250625697
ORACLE_EPS_STO3G = (-0.58104525, 0.67738097)
# Minimal-basis H2 at 1.4 bohr as tabulated in standard textbooks.
PUBLISHED_E_STO3G_R14 = -1.1167


def ints_for(basis, R=R_E):
    mol = Molecule.from_atoms([(1, (0, 0, 0)), (1, (0, 0, R))])
    return compute_integrals(mol, build_basis(mol, basis))


@pytest.fixture(scope="module")
def sto3g():
    ints = ints_for("sto-3g")
    return ints, run_rhf(ints)


def test_orthogonalizer_examples():
    assert np.allclose(orthogonalizer(np.eye(3)), np.eye(3))
    assert np.allclose(orthogonalizer(4 * np.eye(2)), 0.5 * np.eye(2))
    S = ints_for("6-31g").S
    X = orthogonalizer(S)
    assert np.max(np.abs(X.T @ S @ X - np.eye(4))) < 1e-12


def test_orthogonalizer_rejects_singular():
    with pytest.raises(ScfError):
        orthogonalizer(np.ones((2, 2)))


def test_fock_no_electrons_and_linearity(sto3g):
    ints, _ = sto3g
    assert np.array_equal(fock_from_density(ints.hcore, ints.eri, np.zeros((2, 2))), ints.hcore)
    rng = np.random.default_rng(3)
    P1, P2 = (lambda A: A + A.T)(rng.normal(size=(2, 2))), (lambda A: A + A.T)(rng.normal(size=(2, 2)))
    f = lambda P: fock_from_density(ints.hcore, ints.eri, P) - ints.hcore
    assert np.max(np.abs(f(P1 + P2) - f(P1) - f(P2))) < 1e-12


def test_fock_dimension_mismatch(sto3g):
    ints, _ = sto3g
    with pytest.raises(ValueError):
        fock_from_density(ints.hcore, ints.eri, np.zeros((3, 3)))


def test_fock_complex_density_is_hermitian(sto3g):
    ints, res = sto3g
    P = res.P_ao + 0.05j * np.array([[0, 1], [-1, 0]])
    F = fock_from_density(ints.hcore, ints.eri, P)
    assert np.max(np.abs(F - F.conj().T)) < 1e-14


def test_sto3g_energy_matches_oracle(sto3g):
    _, res = sto3g
    assert res.converged
    assert abs(res.energies[-1] - res.energies[-2]) < 1e-10
    assert res.E_hf == pytest.approx(ORACLE_E_STO3G, abs=1e-9)
    assert res.eps == pytest.approx(ORACLE_EPS_STO3G, abs=1e-7)


def test_sto3g_at_textbook_distance():
    res = run_rhf(ints_for("sto-3g", 1.4))
    assert res.E_hf == pytest.approx(ORACLE_E_STO3G_R14, abs=1e-9)
    assert res.E_hf == pytest.approx(PUBLISHED_E_STO3G_R14, abs=1e-4)


def test_631g_lower_than_sto3g(sto3g):
    res = run_rhf(ints_for("6-31g"))
    assert res.E_hf == pytest.approx(ORACLE_E_631G, abs=1e-9)
    assert res.E_hf < sto3g[1].E_hf


def test_converged_invariants(sto3g):
    ints, res = sto3g
    S, C, P = ints.S, res.C, res.P_ao
    assert np.max(np.abs(C.T @ S @ C - np.eye(2))) < 1e-8
    assert np.trace(P @ S) == pytest.approx(2.0, abs=1e-8)
    assert np.max(np.abs(P @ S @ P / 2 - P)) < 1e-8
    Cocc = C[:, :1]
    assert np.max(np.abs(res.F_ao @ Cocc - S @ Cocc * res.eps[0])) < 1e-7
    assert total_energy(P, ints.hcore, res.F_ao, ints.e_nuc) == pytest.approx(res.E_hf, abs=1e-12)


def test_no_electrons(sto3g):
    ints, _ = sto3g
    res = run_rhf(ints, n_elec=0)
    assert res.E_hf == pytest.approx(ints.e_nuc, abs=1e-14)
    X = orthogonalizer(ints.S)
    eps, _ = np.linalg.eigh(X.T @ ints.hcore @ X)
    assert res.eps == pytest.approx(eps)


def test_total_energy_zero_density():
    assert total_energy(np.zeros((2, 2)), np.eye(2), np.eye(2), 0.7) == 0.7


def test_energy_monotone_during_damping():
    res = run_rhf(ints_for("6-31g", 1.8))
    e = np.array(res.energies)
    assert np.all(np.diff(e) <= 1e-12)


def test_bad_electron_counts(sto3g):
    ints, _ = sto3g
    with pytest.raises(ScfError):
        run_rhf(ints, n_elec=3)
    with pytest.raises(ScfError):
        run_rhf(ints, n_elec=6)


def test_nonconvergence_raises(sto3g):
    ints, _ = sto3g
    with pytest.raises(ScfConvergenceError):
        run_rhf(ints, opts=ScfOptions(max_iter=3))


def test_log_lines(sto3g, caplog):
    ints, _ = sto3g
    with caplog.at_level(logging.INFO, logger="ybe_tdhf.scf"):
        run_rhf(ints)
    msgs = [r.getMessage() for r in caplog.records]
    assert msgs and all(m.startswith("iter=") and " E=" in m and " dE=" in m and " dP=" in m for m in msgs)


def test_degenerate_homo_lumo_warns():
    ints = IntegralSet(S=np.eye(2), hcore=-np.eye(2), eri=np.zeros((2,) * 4), dipole=np.zeros((3, 2, 2)), e_nuc=0.0)
    with pytest.warns(RuntimeWarning, match="degenerate"):
        run_rhf(ints, n_elec=2)


@given(st.floats(0.9, 3.5))
@settings(max_examples=8, deadline=None)
def test_matches_oracle_scf_along_curve(R):
    S, h, eri, _, e_nuc = oracles.oracle_integrals("sto-3g", R)
    E_ref, _ = oracles.oracle_rhf(S, h, eri, e_nuc)
    assert run_rhf(ints_for("sto-3g", R)).E_hf == pytest.approx(E_ref, abs=1e-8)
