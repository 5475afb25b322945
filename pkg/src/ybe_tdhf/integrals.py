"""One- and two-electron integrals over contracted s-type Gaussians.

Everything is in atomic units. Only s shells are supported, which covers
hydrogen in STO-3G and 6-31G; other systems come in through FCIDUMP files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Sequence

import numpy as np

ANGSTROM_TO_BOHR = 1.0 / 0.529177210903

# Series/closed-form switch for F0; both branches keep ~1e-12 relative error.
BOYS_SERIES_THRESHOLD = 1e-7

_SYMBOLS = (
    "H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca".split()
)
ATOMIC_NUMBERS = {sym.upper(): z for z, sym in enumerate(_SYMBOLS, start=1)}


class IntegralError(ValueError):
    """Raised for malformed geometry/integral input or unsupported bases."""


@dataclass(frozen=True)
class Molecule:
    """Nuclei as ``(Z, position)`` pairs; positions in bohr."""

    atoms: tuple[tuple[int, np.ndarray], ...]

    def __post_init__(self):
        for z, _ in self.atoms:
            if z < 1:
                raise IntegralError(f"atomic number must be >= 1, got {z}")
        pos = [r for _, r in self.atoms]
        for i in range(len(pos)):
            for j in range(i):
                if np.allclose(pos[i], pos[j], atol=1e-12, rtol=0):
                    raise IntegralError(f"atoms {j} and {i} coincide")

    @classmethod
    def from_atoms(cls, atoms: Sequence[tuple[int, Sequence[float]]]) -> "Molecule":
        return cls(tuple((int(z), np.asarray(r, dtype=float).copy()) for z, r in atoms))

    @property
    def charges(self) -> np.ndarray:
        return np.array([z for z, _ in self.atoms], dtype=float)

    @property
    def coords(self) -> np.ndarray:
        return np.array([r for _, r in self.atoms], dtype=float).reshape(-1, 3)

    def translated(self, shift: Sequence[float]) -> "Molecule":
        shift = np.asarray(shift, dtype=float)
        return Molecule(tuple((z, r + shift) for z, r in self.atoms))


@dataclass(frozen=True)
class Shell:
    """A contracted s function. ``coefs`` multiply *normalized* primitives."""

    center: np.ndarray
    exponents: np.ndarray
    coefs: np.ndarray


@dataclass(frozen=True)
class BasisSet:
    shells: tuple[Shell, ...]

    def __len__(self) -> int:
        return len(self.shells)


@dataclass
class IntegralSet:
    S: np.ndarray
    hcore: np.ndarray
    eri: np.ndarray
    dipole: np.ndarray  # shape (3, M, M)
    e_nuc: float
    n_elec: int | None = None
    labels: list[str] = field(default_factory=list)

    @property
    def M(self) -> int:
        return self.S.shape[0]


# --------------------------------------------------------------------------
# geometry and basis construction


def load_geometry(text: str, units: str | None = None) -> Molecule:
    """Parse a geometry file.

    The first non-comment line is the unit tag (``angstrom`` or ``bohr``),
    followed by ``<symbol> <x> <y> <z>`` lines. ``units`` overrides the tag
    when given; in that case a missing tag line is tolerated.
    """
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines:
        raise IntegralError("empty geometry")

    tag = lines[0].lower()
    if tag in ("angstrom", "bohr"):
        lines = lines[1:]
    elif units is None:
        raise IntegralError(f"first line must be a unit tag, got {lines[0]!r}")
    else:
        tag = None
    unit = (units or tag).lower()
    if unit not in ("angstrom", "bohr"):
        raise IntegralError(f"unknown unit {unit!r}")
    scale = ANGSTROM_TO_BOHR if unit == "angstrom" else 1.0

    atoms = []
    for line in lines:
        parts = line.split()
        if len(parts) != 4:
            raise IntegralError(f"cannot parse atom line {line!r}")
        sym = parts[0].upper()
        if sym not in ATOMIC_NUMBERS:
            raise IntegralError(f"unknown element symbol {parts[0]!r}")
        try:
            xyz = [float(v) * scale for v in parts[1:]]
        except ValueError as exc:
            raise IntegralError(f"bad coordinate in {line!r}") from exc
        atoms.append((ATOMIC_NUMBERS[sym], xyz))
    if not atoms:
        raise IntegralError("geometry contains no atoms")
    return Molecule.from_atoms(atoms)


def _basis_table() -> dict:
    with resources.files("ybe_tdhf").joinpath("data/basis_sets.json").open() as fh:
        return json.load(fh)


def _primitive_norm(alpha: np.ndarray) -> np.ndarray:
    return (2.0 * alpha / np.pi) ** 0.75


def _normalized_shell(center, prims) -> Shell:
    exps = np.array([p[0] for p in prims], dtype=float)
    coefs = np.array([p[1] for p in prims], dtype=float)
    if np.any(exps <= 0):
        raise IntegralError("Gaussian exponents must be positive")
    # <g_i|g_j> for normalized primitives at a common center
    a = exps[:, None] + exps[None, :]
    s = (2.0 * np.sqrt(exps[:, None] * exps[None, :]) / a) ** 1.5
    coefs = coefs / np.sqrt(coefs @ s @ coefs)
    return Shell(np.asarray(center, dtype=float).copy(), exps, coefs)


def build_basis(mol: Molecule, name: str) -> BasisSet:
    table = _basis_table()
    key = name.lower()
    if key not in table:
        raise IntegralError(f"unsupported basis {name!r} (have {sorted(table)})")
    shells = []
    for z, r in mol.atoms:
        sym = _SYMBOLS[z - 1]
        if sym not in table[key]:
            raise IntegralError(f"element {sym} not supported in basis {name!r}")
        for prims in table[key][sym]:
            shells.append(_normalized_shell(r, prims))
    basis = BasisSet(tuple(shells))
    diag = np.diag(overlap_matrix(basis))
    if not np.allclose(diag, 1.0, atol=1e-10, rtol=0):
        raise IntegralError(f"basis {name!r} failed normalization check: {diag}")
    return basis


# --------------------------------------------------------------------------
# primitive kernels


def boys_f0(x: float) -> float:
    """F0(x) = int_0^1 exp(-x t^2) dt."""
    if x < 0:
        raise ValueError(f"Boys function argument must be >= 0, got {x}")
    if x < BOYS_SERIES_THRESHOLD:
        return 1.0 - x / 3.0 + x * x / 10.0
    sx = math.sqrt(x)
    return 0.5 * math.sqrt(math.pi / x) * math.erf(sx)


def _pairs(a: Shell, b: Shell):
    """Yield (weight, p, mu, |A-B|^2, P) for every primitive pair of two shells."""
    na = a.coefs * _primitive_norm(a.exponents)
    nb = b.coefs * _primitive_norm(b.exponents)
    rab2 = float(np.sum((a.center - b.center) ** 2))
    for ca, alpha in zip(na, a.exponents):
        for cb, beta in zip(nb, b.exponents):
            p = alpha + beta
            mu = alpha * beta / p
            P = (alpha * a.center + beta * b.center) / p
            yield ca * cb, p, mu, rab2, P


def _overlap(a: Shell, b: Shell) -> float:
    return sum(w * (np.pi / p) ** 1.5 * math.exp(-mu * r2) for w, p, mu, r2, _ in _pairs(a, b))


def _kinetic(a: Shell, b: Shell) -> float:
    tot = 0.0
    for w, p, mu, r2, _ in _pairs(a, b):
        tot += w * mu * (3.0 - 2.0 * mu * r2) * (np.pi / p) ** 1.5 * math.exp(-mu * r2)
    return tot


def _attraction(a: Shell, b: Shell, charges, centers) -> float:
    tot = 0.0
    for w, p, mu, r2, P in _pairs(a, b):
        pre = w * 2.0 * np.pi / p * math.exp(-mu * r2)
        for z, c in zip(charges, centers):
            tot -= z * pre * boys_f0(p * float(np.sum((P - c) ** 2)))
    return tot


def _repulsion(a: Shell, b: Shell, c: Shell, d: Shell) -> float:
    tot = 0.0
    cd = list(_pairs(c, d))
    for w1, p, mu1, r1, P in _pairs(a, b):
        k1 = w1 * math.exp(-mu1 * r1)
        for w2, q, mu2, r2, Q in cd:
            k2 = w2 * math.exp(-mu2 * r2)
            pq = p + q
            t = p * q / pq * float(np.sum((P - Q) ** 2))
            tot += k1 * k2 * 2.0 * np.pi**2.5 / (p * q * math.sqrt(pq)) * boys_f0(t)
    return tot


# --------------------------------------------------------------------------
# matrices


def _symmetric(basis: BasisSet, fn) -> np.ndarray:
    m = len(basis)
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1):
            out[i, j] = out[j, i] = fn(basis.shells[i], basis.shells[j])
    return out


def overlap_matrix(basis: BasisSet) -> np.ndarray:
    return _symmetric(basis, _overlap)


def kinetic_matrix(basis: BasisSet) -> np.ndarray:
    return _symmetric(basis, _kinetic)


def attraction_matrix(basis: BasisSet, mol: Molecule, charges=None) -> np.ndarray:
    """Nuclear attraction; ``charges`` overrides the nuclear charges (ghost centers)."""
    z = mol.charges if charges is None else np.asarray(charges, dtype=float)
    return _symmetric(basis, lambda a, b: _attraction(a, b, z, mol.coords))


def core_hamiltonian(basis: BasisSet, mol: Molecule, charges=None) -> np.ndarray:
    return kinetic_matrix(basis) + attraction_matrix(basis, mol, charges)


def eri_tensor(basis: BasisSet) -> np.ndarray:
    """Chemist-notation (pq|rs), filled from the 8-fold unique quartets."""
    m = len(basis)
    sh = basis.shells
    eri = np.zeros((m, m, m, m))
    for p in range(m):
        for q in range(p + 1):
            pq = p * (p + 1) // 2 + q
            for r in range(m):
                for s in range(r + 1):
                    if r * (r + 1) // 2 + s > pq:
                        continue
                    v = _repulsion(sh[p], sh[q], sh[r], sh[s])
                    for i, j, k, l in (
                        (p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
                        (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p),
                    ):
                        eri[i, j, k, l] = v
    return eri


def dipole_matrices(basis: BasisSet) -> np.ndarray:
    """<chi_p| x,y,z |chi_q> about the origin, shape (3, M, M)."""
    m = len(basis)
    out = np.zeros((3, m, m))
    for i in range(m):
        for j in range(i + 1):
            v = np.zeros(3)
            for w, p, mu, r2, P in _pairs(basis.shells[i], basis.shells[j]):
                v += w * (np.pi / p) ** 1.5 * math.exp(-mu * r2) * P
            out[:, i, j] = out[:, j, i] = v
    return out


def nuclear_repulsion(mol: Molecule) -> float:
    if not mol.atoms:
        raise IntegralError("molecule has no atoms")
    z = mol.charges
    r = mol.coords
    e = 0.0
    for i in range(len(z)):
        for j in range(i):
            d = float(np.linalg.norm(r[i] - r[j]))
            if d < 1e-12:
                raise IntegralError(f"atoms {j} and {i} coincide")
            e += z[i] * z[j] / d
    return e


def compute_integrals(mol: Molecule, basis: BasisSet) -> IntegralSet:
    n_elec = int(round(mol.charges.sum()))
    return IntegralSet(
        S=overlap_matrix(basis),
        hcore=core_hamiltonian(basis, mol),
        eri=eri_tensor(basis),
        dipole=dipole_matrices(basis),
        e_nuc=nuclear_repulsion(mol),
        n_elec=n_elec,
    )


def transform(ints: IntegralSet, C: np.ndarray) -> IntegralSet:
    """Express an integral set in the orbital basis given by the columns of C."""
    eri = np.einsum("pqrs,pi,qj,rk,sl->ijkl", ints.eri, C, C, C, C, optimize=True)
    return IntegralSet(
        S=C.T @ ints.S @ C,
        hcore=C.T @ ints.hcore @ C,
        eri=eri,
        dipole=np.einsum("cpq,pi,qj->cij", ints.dipole, C, C),
        e_nuc=ints.e_nuc,
        n_elec=ints.n_elec,
    )


# --------------------------------------------------------------------------
# FCIDUMP-style exchange format (1-based indices)

_COMPONENTS = "xyz"


def dump_fcidump(ints: IntegralSet, n_elec: int | None = None, tol: float = 0.0) -> str:
    """Serialize an orthonormal-basis integral set.

    The format has no overlap section, so the reader assumes S = identity;
    callers should transform to an orthonormal (e.g. MO) basis first.
    """
    m = ints.M
    ne = n_elec if n_elec is not None else (ints.n_elec or 0)
    lines = [f"M={m} NELEC={ne} ENUC={float(ints.e_nuc)!r}"]
    for p in range(m):
        for q in range(p + 1):
            for r in range(m):
                for s in range(r + 1):
                    if r * (r + 1) // 2 + s > p * (p + 1) // 2 + q:
                        continue
                    v = ints.eri[p, q, r, s]
                    if abs(v) > tol:
                        lines.append(f"{float(v)!r} {p + 1} {q + 1} {r + 1} {s + 1}")
    for p in range(m):
        for q in range(p + 1):
            v = ints.hcore[p, q]
            if abs(v) > tol:
                lines.append(f"{float(v)!r} {p + 1} {q + 1} 0 0")
    for c, name in enumerate(_COMPONENTS):
        block = [
            f"{float(ints.dipole[c, p, q])!r} {p + 1} {q + 1}"
            for p in range(m)
            for q in range(p + 1)
            if abs(ints.dipole[c, p, q]) > tol
        ]
        if block:
            lines.append(f"DIPOLE {name}")
            lines.extend(block)
    return "\n".join(lines) + "\n"


def load_fcidump(text: str) -> IntegralSet:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise IntegralError("missing header")
    header = {}
    for tok in lines[0].replace(",", " ").split():
        if "=" not in tok:
            raise IntegralError(f"missing header (got {lines[0]!r})")
        k, v = tok.split("=", 1)
        header[k.upper()] = v
    try:
        m = int(header["M"])
        n_elec = int(header.get("NELEC", 0))
        e_nuc = float(header.get("ENUC", 0.0))
    except (KeyError, ValueError) as exc:
        raise IntegralError(f"bad header {lines[0]!r}") from exc
    if m < 1:
        raise IntegralError(f"bad basis size M={m}")

    hcore = np.zeros((m, m))
    eri = np.zeros((m, m, m, m))
    dip = np.zeros((3, m, m))
    section = None

    def index(tok: str, lineno: int) -> int:
        i = int(tok)
        if i < 0 or i > m:
            raise IntegralError(f"line {lineno}: index {i} out of range 1..{m}")
        return i

    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if parts[0].upper() == "DIPOLE":
            if len(parts) != 2 or parts[1].lower() not in _COMPONENTS:
                raise IntegralError(f"line {lineno}: bad DIPOLE section header {line!r}")
            section = _COMPONENTS.index(parts[1].lower())
            continue
        try:
            value = float(parts[0])
            idx = [index(t, lineno) for t in parts[1:]]
        except ValueError as exc:
            raise IntegralError(f"line {lineno}: malformed record {line!r}") from exc
        if section is not None:
            if len(idx) != 2 or 0 in idx:
                raise IntegralError(f"line {lineno}: dipole record needs two indices")
            p, q = idx[0] - 1, idx[1] - 1
            dip[section, p, q] = dip[section, q, p] = value
            continue
        if len(idx) != 4:
            raise IntegralError(f"line {lineno}: malformed record {line!r}")
        p, q, r, s = idx
        if p and q and r and s:
            p, q, r, s = p - 1, q - 1, r - 1, s - 1
            for i, j, k, l in (
                (p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
                (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p),
            ):
                eri[i, j, k, l] = value
        elif p and q and not r and not s:
            hcore[p - 1, q - 1] = hcore[q - 1, p - 1] = value
        elif not p and not q and not r and not s:
            # core-energy record; folded into e_nuc
            e_nuc += value
        elif p and not q and not r and not s:
            continue  # reserved (orbital-energy slot)
        else:
            raise IntegralError(f"line {lineno}: unsupported index pattern {line!r}")

    return IntegralSet(S=np.eye(m), hcore=hcore, eri=eri, dipole=dip, e_nuc=e_nuc, n_elec=n_elec)
