"""Command-line front end: ``scf``, ``run``, ``compress`` and ``verify``."""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .circuit import compress as compress_mod
from .circuit.freefermion import NotFreeFermionError
from .circuit.gates import Circuit, CircuitError, circuit_unitary, dumps, loads, match_block, phase_aligned_distance
from .circuit.network import pair_schedule
from .circuit.ybe import YbeError, merge_blocks, ybe_reflect
from .integrals import IntegralError, build_basis, compute_integrals, load_fcidump, load_geometry
from .scf import ScfConvergenceError, ScfError, run_rhf
from .tdhf import DynamicsConfig, FieldPulse, MeanFieldFrame, compare_trajectories, reference_propagate, run_tdhf

EXIT_OK, EXIT_USAGE, EXIT_SCF, EXIT_TOLERANCE, EXIT_REWRITE = 0, 2, 3, 4, 5

log = logging.getLogger("ybe_tdhf")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    geom: str | None = None
    units: str | None = None
    basis: str | None = None
    fcidump: str | None = None
    n_elec: int | None = None
    e_max: float = 0.07
    omega: float = 0.10
    pol: str = "z"
    dt: float = 0.05
    t_final: float | None = None
    mode: str = "rdm"
    compress: bool = True
    shots: int = 0
    seed: int = 0
    out: str = "trajectory.csv"
    tolerance: float | None = None
    fswap: str = "fermionic"
    midpoint: bool = False
    plot_every: int = 10

    def validate(self) -> None:
        if (self.basis is None) == (self.fcidump is None):
            raise UsageError("give exactly one of --basis (with --geom) or --fcidump")
        if self.basis is not None and self.geom is None:
            raise UsageError("--basis needs --geom")
        if not self.dt > 0:
            raise UsageError("dt must be positive")
        if self.t_final is not None and self.t_final < self.dt:
            raise UsageError("t_final must be at least dt")
        if self.mode not in ("rdm", "zonly"):
            raise UsageError(f"mode must be rdm or zonly, got {self.mode!r}")
        if self.shots < 0:
            raise UsageError("shots must be non-negative")
        if self.shots and self.mode != "zonly":
            raise UsageError("--shots requires --mode zonly")
        if self.plot_every < 1:
            raise UsageError("plot_every must be positive")

    def dynamics(self) -> DynamicsConfig:
        try:
            pulse = FieldPulse(self.e_max, self.omega, self.pol)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        return DynamicsConfig(
            pulse=pulse,
            dt=self.dt,
            t_final=self.t_final,
            mode="full-rdm" if self.mode == "rdm" else "z-only",
            compress=self.compress,
            shots=self.shots,
            seed=self.seed,
            fswap=self.fswap,
            midpoint_field=self.midpoint,
        )


def _coerce(name: str, raw: str):
    kind = {f.name: f.type for f in fields(RunConfig)}[name]
    if "bool" in kind:
        low = raw.lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise UsageError(f"config key {name}: expected a boolean, got {raw!r}")
        return low in ("true", "1", "yes")
    if raw.lower() in ("none", ""):
        return None
    try:
        if "int" in kind:
            return int(raw)
        if "float" in kind:
            return float(raw)
    except ValueError as exc:
        raise UsageError(f"config key {name}: cannot parse {raw!r}") from exc
    return raw


def read_config_file(path: str) -> dict:
    known = {f.name for f in fields(RunConfig)}
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then config-file keys, then flags given on the command line."""
    values = read_config_file(args.config) if args.config else {}
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


# --------------------------------------------------------------------------
# problem setup


def load_problem(cfg: RunConfig):
    """Integrals and converged RHF for the configured system."""
    try:
        if cfg.fcidump is not None:
            ints = load_fcidump(Path(cfg.fcidump).read_text())
        else:
            mol = load_geometry(Path(cfg.geom).read_text(), units=cfg.units)
            ints = compute_integrals(mol, build_basis(mol, cfg.basis))
    except OSError as exc:
        raise UsageError(f"cannot read input: {exc}") from exc
    except IntegralError as exc:
        raise UsageError(str(exc)) from exc
    try:
        scf = run_rhf(ints, n_elec=cfg.n_elec)
    except ScfConvergenceError:
        raise
    except ScfError as exc:
        raise UsageError(str(exc)) from exc
    return ints, scf


def cmd_scf(args) -> int:
    cfg = resolve_config(args)
    ints, scf = load_problem(cfg)
    np.set_printoptions(precision=10, suppress=True, linewidth=120)
    print(f"E_hf = {scf.E_hf:.12f}")
    print(f"iterations = {scf.n_iter}")
    print("orbital energies:")
    print(scf.eps)
    print("MO coefficients:")
    print(scf.C)
    return EXIT_OK


def _write_trajectory(traj, path: str, every: int = 1) -> None:
    with open(path, "w", newline="") as fh:
        traj.write_csv(fh, every=every)


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    dyn = cfg.dynamics()
    ints, scf = load_problem(cfg)
    frame = MeanFieldFrame.from_scf(ints, scf)
    if 2 * frame.M > 12:
        raise UsageError(f"{2 * frame.M} spin orbitals exceed the 12-qubit simulator")
    traj = run_tdhf(frame, dyn)
    _write_trajectory(traj, cfg.out)
    print(f"wrote {len(traj)} rows to {cfg.out}")
    if args.emit_plot_data:
        _write_trajectory(traj, args.emit_plot_data, every=cfg.plot_every)
    if not args.reference:
        return EXIT_OK
    ref = reference_propagate(frame, dyn)
    ref_path = str(Path(cfg.out).with_suffix("")) + ".reference.csv"
    _write_trajectory(ref, ref_path)
    tol = cfg.tolerance if cfg.tolerance is not None else 0.1 * dyn.dt**2
    report = compare_trajectories(traj, ref, {k: tol for k in traj.column_names[1:]})
    print(f"reference written to {ref_path}; tolerance {tol:.3e}")
    print(report.summary())
    if args.strict and not report.passed:
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_compress(args) -> int:
    try:
        circ = loads(Path(args.input).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read circuit: {exc}") from exc
    except CircuitError as exc:
        raise UsageError(str(exc)) from exc
    try:
        out = compress_mod.compress_ybe(circ)
    except (NotFreeFermionError, YbeError) as exc:
        print(f"rewrite failed: {exc}", file=sys.stderr)
        return EXIT_REWRITE
    Path(args.output).write_text(dumps(out))
    print(f"blocks: {circ.count('MB') + circ.count('FSWAP')} -> {out.count('MB')}")
    print(f"phases: {circ.count('PHASE')} -> {out.count('PHASE')}")
    if circ.n_qubits <= 8:
        res = phase_aligned_distance(circuit_unitary(circ), circuit_unitary(out))
        print(f"residual: {res:.3e}")
    return EXIT_OK


VERIFY_TOL = {"ybe": 1e-10, "merge": 1e-12, "schedule": 0.0}


def cmd_verify(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    rng = np.random.default_rng(args.seed)

    ybe_worst = 0.0
    for _ in range(args.samples):
        a = rng.uniform(-math.pi, math.pi, 6)
        triple = [match_block(0, 1, a[0], a[1]), match_block(1, 2, a[2], a[3]), match_block(0, 1, a[4], a[5])]
        try:
            out = ybe_reflect(triple)
        except YbeError as exc:
            print(f"ybe: {exc}")
            return EXIT_TOLERANCE
        ybe_worst = max(ybe_worst, phase_aligned_distance(circuit_unitary(Circuit(3, triple)), circuit_unitary(Circuit(3, out))))

    merge_worst = 0.0
    for _ in range(args.samples):
        a = rng.uniform(-math.pi, math.pi, 4)
        b1, b2 = match_block(0, 1, a[0], a[1]), match_block(0, 1, a[2], a[3])
        prod = circuit_unitary(Circuit(2, (b1, b2)))
        merge_worst = max(merge_worst, phase_aligned_distance(prod, circuit_unitary(Circuit(2, (merge_blocks(b1, b2),)))))

    sched_bad = 0
    for n in range(2, 11):
        s = pair_schedule(n)
        if len(s.realized_pairs) != n * (n - 1) // 2 or s.final_permutation != tuple(range(n))[::-1]:
            sched_bad += 1

    results = {"ybe": ybe_worst, "merge": merge_worst, "schedule": float(sched_bad)}
    ok = True
    for name, val in results.items():
        passed = val <= VERIFY_TOL[name]
        ok &= passed
        print(f"{name:<10} max_residual={val:.3e} tol={VERIFY_TOL[name]:.0e} {'PASS' if passed else 'FAIL'}")
    return EXIT_OK if ok else EXIT_TOLERANCE


# --------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    shared = _Parser(add_help=False)
    g = shared.add_argument_group("system")
    g.add_argument("--config", help="flat 'key = value' file; flags override it")
    g.add_argument("--geom", help="geometry file: unit tag line, then 'El x y z' lines")
    g.add_argument("--units", choices=["angstrom", "bohr"])
    g.add_argument("--basis", type=str.lower, help="sto-3g or 6-31g")
    g.add_argument("--fcidump", help="integral file (orthonormal basis)")
    g.add_argument("--nelec", dest="n_elec", type=int)
    d = shared.add_argument_group("dynamics")
    d.add_argument("--emax", dest="e_max", type=float)
    d.add_argument("--omega", type=float)
    d.add_argument("--pol", choices=["x", "y", "z"])
    d.add_argument("--dt", type=float)
    d.add_argument("--tfinal", dest="t_final", type=float)
    d.add_argument("--mode", choices=["zonly", "rdm"])
    d.add_argument("--no-compress", dest="compress", action="store_const", const=False)
    d.add_argument("--shots", type=int)
    d.add_argument("--seed", type=int)
    d.add_argument("--fswap", choices=["fermionic", "bare"])
    d.add_argument("--midpoint", action="store_const", const=True, help="evaluate the field at step midpoints")
    d.add_argument("--reference", action="store_true", help="also run the exact classical propagator")
    d.add_argument("--strict", action="store_true", help="exit 4 when the reference comparison fails")
    d.add_argument("--tolerance", type=float)
    d.add_argument("--out")
    d.add_argument("--emit-plot-data", metavar="PATH")
    d.add_argument("--plot-every", dest="plot_every", type=int)
    d.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="ybe-tdhf", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("scf", parents=[shared], help="ground-state RHF").set_defaults(func=cmd_scf)
    sub.add_parser("run", parents=[shared], help="hybrid TDHF dynamics").set_defaults(func=cmd_run)
    c = sub.add_parser("compress", help="canonicalize a circuit file")
    c.add_argument("input")
    c.add_argument("output")
    c.set_defaults(func=cmd_compress)
    v = sub.add_parser("verify", help="YBE / merge / schedule self-test")
    v.add_argument("--samples", type=int, default=100)
    v.add_argument("--seed", type=int, default=7)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING, format="%(message)s")
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScfConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCF


if __name__ == "__main__":
    sys.exit(main())
