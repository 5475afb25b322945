import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from ybe_tdhf.integrals import (
    IntegralError,
    Molecule,
    boys_f0,
    build_basis,
    compute_integrals,
    core_hamiltonian,
    dipole_matrices,
    dump_fcidump,
    kinetic_matrix,
    load_fcidump,
    load_geometry,
    nuclear_repulsion,
    overlap_matrix,
)

R_E = 0.734 * oracles.BOHR_PER_ANGSTROM

# Frozen from tests/oracles.py (quadrature, no Boys function) at R = 0.734 angstrom.
ORACLE_STO3G = {
    "S12": 0.6638004747139732,
    "h11": -1.124871861035353,
    "h12": -0.9664359229372219,
    "eri_1111": 0.7746059439198976,
    "eri_1122": 0.5722537302561461,
    "eri_1212": 0.3015859545680878,
    "eri_1112": 0.4480175174934781,
    "dz_12": 0.46036520318839597,
}
ORACLE_H_ATOM_HCORE = -0.4665818495572752


def h2(R=R_E, z0=0.0):
    return Molecule.from_atoms([(1, (0.0, 0.0, z0)), (1, (0.0, 0.0, z0 + R))])


@pytest.fixture(scope="module")
def sto3g():
    mol = h2()
    return compute_integrals(mol, build_basis(mol, "sto-3g"))


@pytest.fixture(scope="module")
def b631g():
    mol = h2()
    return compute_integrals(mol, build_basis(mol, "6-31g"))


# --- geometry ---------------------------------------------------------------


def test_geometry_angstrom_converted():
    mol = load_geometry("angstrom\nH 0 0 0\nH 0 0 0.734\n")
    assert mol.coords[1, 2] == pytest.approx(1.3871, abs=5e-5)
    assert list(mol.charges) == [1.0, 1.0]


def test_geometry_bohr_passthrough():
    mol = load_geometry("bohr\n# comment\nH 0 0 0\nH 0 0 1.4  # trailing\n")
    assert np.linalg.norm(mol.coords[1] - mol.coords[0]) == 1.4


def test_geometry_units_override_without_tag():
    mol = load_geometry("H 0 0 0\nH 0 0 1.4\n", units="bohr")
    assert mol.coords[1, 2] == 1.4


@pytest.mark.parametrize(
    "text",
    ["", "# nothing\n", "parsecs\nH 0 0 0\n", "bohr\nXx 0 0 0\n", "bohr\nH 0 0\n", "bohr\nH 0 0 a\n", "bohr\n"],
)
def test_geometry_errors(text):
    with pytest.raises(IntegralError):
        load_geometry(text)


def test_molecule_invariants():
    with pytest.raises(IntegralError):
        Molecule.from_atoms([(0, (0, 0, 0))])
    with pytest.raises(IntegralError):
        Molecule.from_atoms([(1, (0, 0, 0)), (1, (0, 0, 0))])


# --- basis ------------------------------------------------------------------


def test_basis_sizes():
    assert len(build_basis(h2(), "sto-3g")) == 2
    assert len(build_basis(h2(), "STO-3G")) == 2
    assert len(build_basis(h2(), "6-31g")) == 4


def test_basis_errors():
    with pytest.raises(IntegralError, match="unsupported basis"):
        build_basis(h2(), "cc-pvdz")
    he = Molecule.from_atoms([(2, (0, 0, 0))])
    with pytest.raises(IntegralError, match="not supported"):
        build_basis(he, "sto-3g")


@pytest.mark.parametrize("name", ["sto-3g", "6-31g"])
def test_shell_self_overlap_matches_quadrature(name):
    fs = oracles.h2_functions(name, R_E)
    for f in fs:
        assert oracles.overlap(f, f) == pytest.approx(1.0, abs=1e-10)
    S = overlap_matrix(build_basis(h2(), name))
    assert np.allclose(np.diag(S), 1.0, atol=1e-10)


# --- Boys -------------------------------------------------------------------


def test_boys_values():
    assert boys_f0(0.0) == 1.0
    assert boys_f0(1.0) == pytest.approx(0.7468241328124271, abs=1e-13)
    assert boys_f0(30.0) == pytest.approx(0.5 * math.sqrt(math.pi / 30.0), abs=1e-9)
    with pytest.raises(ValueError):
        boys_f0(-1e-3)


def test_boys_continuous_at_threshold():
    x = 1e-7
    assert boys_f0(x * (1 - 1e-9)) == pytest.approx(boys_f0(x * (1 + 1e-9)), rel=1e-13)


@given(st.floats(min_value=0.0, max_value=200.0))
@settings(max_examples=60, deadline=None)
def test_boys_against_quadrature(x):
    from scipy import integrate

    ref = integrate.quad(lambda t: math.exp(-x * t * t), 0.0, 1.0, epsabs=1e-15, epsrel=1e-13)[0]
    assert boys_f0(x) == pytest.approx(ref, rel=1e-11, abs=1e-14)


# --- one-electron integrals ---------------------------------------------------


def test_h2_sto3g_frozen_values(sto3g):
    o = ORACLE_STO3G
    assert sto3g.S[0, 1] == pytest.approx(o["S12"], abs=1e-10)
    assert sto3g.hcore[0, 0] == pytest.approx(o["h11"], abs=1e-10)
    assert sto3g.hcore[0, 1] == pytest.approx(o["h12"], abs=1e-10)
    assert sto3g.eri[0, 0, 0, 0] == pytest.approx(o["eri_1111"], abs=1e-10)
    assert sto3g.eri[0, 0, 1, 1] == pytest.approx(o["eri_1122"], abs=1e-10)
    assert sto3g.eri[0, 1, 0, 1] == pytest.approx(o["eri_1212"], abs=1e-10)
    assert sto3g.eri[0, 0, 0, 1] == pytest.approx(o["eri_1112"], abs=1e-10)
    assert sto3g.dipole[2, 0, 1] == pytest.approx(o["dz_12"], abs=1e-10)


def test_single_atom_core_hamiltonian():
    mol = Molecule.from_atoms([(1, (0.0, 0.0, 0.0))])
    h = core_hamiltonian(build_basis(mol, "sto-3g"), mol)
    assert h[0, 0] == pytest.approx(ORACLE_H_ATOM_HCORE, abs=1e-10)


def test_zero_charge_fixture_gives_kinetic_only():
    mol = h2()
    basis = build_basis(mol, "6-31g")
    h = core_hamiltonian(basis, mol, charges=np.zeros(2))
    assert np.array_equal(h, kinetic_matrix(basis))


@pytest.mark.parametrize("name", ["sto-3g", "6-31g"])
def test_one_electron_against_quadrature(name):
    mol = h2()
    ints = compute_integrals(mol, build_basis(mol, name))
    fs = oracles.h2_functions(name, R_E)
    m = len(fs)
    S = np.array([[oracles.overlap(fs[i], fs[j]) for j in range(m)] for i in range(m)])
    T = np.array([[oracles.kinetic(fs[i], fs[j]) for j in range(m)] for i in range(m)])
    V = np.array(
        [[sum(oracles.attraction(fs[i], fs[j], 1.0, (0, 0, z)) for z in (0.0, R_E)) for j in range(m)] for i in range(m)]
    )
    D = np.array([[[oracles.dipole(fs[i], fs[j], ax) for j in range(m)] for i in range(m)] for ax in range(3)])
    assert np.allclose(ints.S, S, atol=1e-6)
    assert np.allclose(ints.hcore, T + V, atol=1e-6)
    assert np.allclose(ints.dipole, D, atol=1e-6)


def test_matrices_symmetric_and_attraction_negative(b631g):
    for A in (b631g.S, b631g.hcore, *b631g.dipole):
        assert np.max(np.abs(A - A.T)) <= 1e-12
    mol = h2()
    basis = build_basis(mol, "6-31g")
    V = core_hamiltonian(basis, mol) - kinetic_matrix(basis)
    assert np.all(V < 0)
    assert np.linalg.eigvalsh(b631g.S).min() > 0


def test_identical_shells_overlap_exactly_one():
    mol = Molecule.from_atoms([(1, (0.0, 0.0, 0.0))])
    b = build_basis(mol, "sto-3g")
    from ybe_tdhf.integrals import BasisSet

    S = overlap_matrix(BasisSet(b.shells * 2))
    assert S[0, 1] == pytest.approx(1.0, abs=1e-15)


def test_single_shell_overlap_and_dipole():
    mol = Molecule.from_atoms([(1, (0.0, 0.0, 0.0))])
    b = build_basis(mol, "sto-3g")
    assert overlap_matrix(b) == pytest.approx(np.array([[1.0]]))
    assert np.all(dipole_matrices(b) == 0.0)
    mol2 = Molecule.from_atoms([(1, (0.0, 0.0, 1.4))])
    D = dipole_matrices(build_basis(mol2, "sto-3g"))
    assert D[2, 0, 0] == pytest.approx(1.4, abs=1e-12)


# --- two-electron -------------------------------------------------------------


def test_eri_against_quadrature_sto3g(sto3g):
    fs = oracles.h2_functions("sto-3g", R_E)
    for idx in [(0, 0, 0, 0), (0, 0, 1, 1), (0, 1, 0, 1), (0, 0, 0, 1), (1, 1, 1, 1)]:
        ref = oracles.repulsion(*(fs[i] for i in idx))
        assert sto3g.eri[idx] == pytest.approx(ref, abs=1e-8)


def test_eri_against_quadrature_631g_sample(b631g):
    fs = oracles.h2_functions("6-31g", R_E)
    for idx in [(0, 1, 2, 3), (1, 1, 3, 3), (0, 3, 1, 2)]:
        ref = oracles.repulsion(*(fs[i] for i in idx))
        assert b631g.eri[idx] == pytest.approx(ref, abs=1e-8)


def test_eri_eightfold_symmetry(b631g):
    g = b631g.eri
    for perm in ["qprs", "pqsr", "qpsr", "rspq", "srpq", "rsqp", "srqp"]:
        assert np.max(np.abs(g - np.einsum(f"pqrs->{perm}", g))) <= 1e-12
    assert np.all(np.einsum("pppp->p", g) > 0)


def test_eri_point_charge_limit():
    mol = h2(R=50.0)
    ints = compute_integrals(mol, build_basis(mol, "sto-3g"))
    assert ints.eri[0, 0, 1, 1] == pytest.approx(1 / 50.0, abs=1e-3)


# --- nuclear repulsion ----------------------------------------------------------


def test_nuclear_repulsion():
    assert nuclear_repulsion(Molecule.from_atoms([(1, (0, 0, 0))])) == 0.0
    assert nuclear_repulsion(h2(1.4)) == pytest.approx(1 / 1.4, abs=1e-15)
    assert nuclear_repulsion(h2(1.3871)) == pytest.approx(0.720928, abs=1e-6)


@given(
    st.floats(0.6, 4.0),
    st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3)),
)
@settings(max_examples=15, deadline=None)
def test_translation_invariance(R, shift):
    mol = h2(R)
    moved = mol.translated(shift)
    a = compute_integrals(mol, build_basis(mol, "6-31g"))
    b = compute_integrals(moved, build_basis(moved, "6-31g"))
    assert np.allclose(a.S, b.S, atol=1e-12, rtol=0)
    assert np.allclose(a.hcore, b.hcore, atol=1e-12, rtol=0)
    assert np.allclose(a.eri, b.eri, atol=1e-12, rtol=0)
    assert b.e_nuc == pytest.approx(a.e_nuc, abs=1e-12)
    for c in range(3):
        assert np.allclose(b.dipole[c], a.dipole[c] + shift[c] * a.S, atol=1e-12, rtol=0)


@given(st.floats(0.3, 8.0))
@settings(max_examples=25, deadline=None)
def test_overlap_positive_definite(R):
    mol = h2(R)
    assert np.linalg.eigvalsh(overlap_matrix(build_basis(mol, "6-31g"))).min() > 0


# --- FCIDUMP ----------------------------------------------------------------------


def test_fcidump_round_trip(sto3g):
    text = dump_fcidump(sto3g, n_elec=2)
    back = load_fcidump(text)
    assert back.M == 2 and back.n_elec == 2
    assert np.max(np.abs(back.hcore - sto3g.hcore)) <= 1e-14
    assert np.max(np.abs(back.eri - sto3g.eri)) <= 1e-14
    assert np.max(np.abs(back.dipole - sto3g.dipole)) <= 1e-14
    assert abs(back.e_nuc - sto3g.e_nuc) <= 1e-14
    assert np.array_equal(back.S, np.eye(2))


def test_fcidump_index_out_of_range():
    with pytest.raises(IntegralError):
        load_fcidump("M=2 NELEC=2 ENUC=0.5\n0.1 3 1 0 0\n")


def test_fcidump_header_only():
    ints = load_fcidump("M=3 NELEC=2 ENUC=0.25\n")
    assert ints.M == 3 and ints.e_nuc == 0.25
    assert not ints.hcore.any() and not ints.eri.any() and not ints.dipole.any()


@pytest.mark.parametrize("text", ["", "0.1 1 1 0 0\n", "M=2 NELEC=2 ENUC=0\n0.1 1 x 0 0\n", "M=2 NELEC=2 ENUC=0\n0.1 1 1\n"])
def test_fcidump_malformed(text):
    with pytest.raises(IntegralError):
        load_fcidump(text)
