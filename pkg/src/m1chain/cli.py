"""Command-line entry point: ``m1chain <command> [options]``.

Commands: ``spectrum``, ``table-integers``, ``quench``, ``bethe-verify``,
``mps-check``.  Text reports go to stdout unless ``--out`` is given; JSON
output embeds the full run configuration and library version.  The exit
code is 0 iff every check the command performs passes.

Set ``M1CHAIN_NUM_THREADS`` to cap BLAS threads.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .bethe import (
    RESIDUAL_TOL,
    Inadmissible,
    build_bethe_state,
    dress_solution,
    make_solution,
    single_fermion_solutions,
    solution_from_json,
    special_solution,
)
from .dynamics import (
    DEFAULT_SAMPLES,
    default_times,
    fidelity_series,
    single_fermion_fidelity_bessel,
    single_fermion_fidelity_exact,
    single_fermion_state,
    z2_fidelity_analytic,
    z2_initial_state,
)
from .hilbert import enumerate_basis
from .mps import build_special_mps, mps_to_statevector, schmidt_spectrum
from .operators import build_fermion_number, build_m1, build_pxp, build_supercharge
from .spectra import (
    SusyConsistencyError,
    classify_susy,
    diagonalize,
    entanglement_entropy,
    format_integer_table,
    integer_eigenvalue_table,
)

ED_CHECK_MAX_N = 12
EIGEN_TOL = 1e-8


@dataclass
class RunConfig:
    command: str
    n_sites: int
    mu: float = 0.0
    model: str = "m1"
    init: str = "z2"
    tmax: float = 10.0
    samples: int = DEFAULT_SAMPLES
    sector: int | None = None
    tol: float = 1e-8
    out: str | None = None
    format: str = "text"
    method: str = "auto"
    analytic: bool = False
    family: str = "special"
    f: int = 1
    branch: str = "+"
    n_plus: int = 0
    n_minus: int = 0
    base_n: int = 0
    perturb: float = 0.0
    file: str | None = None

    def validate(self) -> None:
        if self.n_sites < 3:
            raise ValueError(f"--n must be >= 3 (got {self.n_sites})")
        if self.tol <= 0:
            raise ValueError("--tol must be positive")
        if self.samples < 2:
            raise ValueError("--samples must be >= 2")


class _Report:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.lines: list[str] = []
        self.data: dict = {}
        self.ok = True

    def say(self, line: str = "") -> None:
        self.lines.append(line)

    def check(self, name: str, passed: bool, detail: str = "") -> None:
        self.ok &= bool(passed)
        self.data.setdefault("checks", {})[name] = bool(passed)
        self.say(f"[{'PASS' if passed else 'FAIL'}] {name}" + (f": {detail}" if detail else ""))

    def json(self) -> str:
        doc = {
            "version": __version__,
            "config": asdict(self.cfg),
            "ok": self.ok,
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        }
        doc.update(self.data)
        return json.dumps(doc, indent=2, default=_jsonable)


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serializable: {type(x)}")


def _hamiltonian(cfg: RunConfig, basis):
    if cfg.model == "m1":
        return build_m1(basis)
    if cfg.model == "pxp":
        return build_pxp(basis, cfg.mu)
    raise ValueError(f"unknown model {cfg.model!r}")


def cmd_spectrum(cfg: RunConfig, rep: _Report) -> None:
    basis = enumerate_basis(cfg.n_sites)
    H = _hamiltonian(cfg, basis)
    spec = diagonalize(H, cfg.sector) if cfg.model == "m1" else diagonalize(H)
    rep.say(f"{H.name} on N={cfg.n_sites}: dim {basis.dim}, {len(spec)} eigenpairs")
    rep.check("residuals", spec.residual_norms.max() <= 1e-10 * max(1, np.abs(spec.eigenvalues).max()),
              f"max {spec.residual_norms.max():.2e}")
    rep.data["spectrum"] = json.loads(spec.to_json())
    if cfg.model == "m1":
        for f in np.unique(spec.sectors):
            vals = spec.eigenvalues[spec.in_sector(int(f))]
            rep.say(f"f={int(f)}: {np.array2string(vals, precision=10, max_line_width=100)}")
        if cfg.sector is None:
            try:
                cls = classify_susy(spec, build_supercharge(basis), cfg.tol)
                zero = {}
                for i in cls.singlets:
                    zero[int(spec.sectors[i])] = zero.get(int(spec.sectors[i]), 0) + 1
                rep.data["susy"] = {
                    "singlets": zero,
                    "doublets": len(cls.doublets),
                    "max_energy_mismatch": cls.max_energy_mismatch,
                }
                zs = ", ".join(f"f={f} x{n}" for f, n in sorted(zero.items())) or "none"
                rep.check("susy pairing", True,
                          f"{len(cls.doublets)} doublets, zero modes: {zs}")
            except SusyConsistencyError as exc:
                rep.check("susy pairing", False, str(exc))
    else:
        vals = spec.eigenvalues
        rep.say(np.array2string(vals, precision=10, max_line_width=100))
        if cfg.mu == 0:
            sym = np.abs(np.sort(vals) + np.sort(vals)[::-1]).max()
            rep.check("spectrum symmetric about 0", sym <= 1e-9, f"max |E_k + E_(n-k)| = {sym:.2e}")


def cmd_table_integers(cfg: RunConfig, rep: _Report) -> None:
    basis = enumerate_basis(cfg.n_sites)
    spec = diagonalize(build_m1(basis), cfg.sector)
    table = integer_eigenvalue_table(spec, cfg.tol)
    rep.say(f"integer eigenvalues of H_M1, N={cfg.n_sites} (tol {cfg.tol:g})")
    rep.say(format_integer_table(table))
    rep.data["table"] = {
        str(f): [{"E": lv.energy, "multiplicity": lv.multiplicity, "distance": lv.distance} for lv in lvs]
        for f, lvs in table.items()
    }


def _initial_state(cfg: RunConfig, basis):
    init = cfg.init
    if init == "z2":
        if cfg.n_sites % 2:
            raise ValueError("--init z2 needs an even N")
        return z2_initial_state(basis)
    if init == "single":
        return single_fermion_state(basis, 1)
    if init.startswith("index:"):
        v = np.zeros(basis.dim, dtype=complex)
        v[int(init.split(":", 1)[1])] = 1
        return v
    if init.startswith("file:"):
        raw = np.loadtxt(init.split(":", 1)[1], ndmin=2)
        v = raw[:, 0] + (1j * raw[:, 1] if raw.shape[1] > 1 else 0)
        if v.shape != (basis.dim,):
            raise ValueError(f"state file has {len(v)} amplitudes, basis has {basis.dim}")
        return v / np.linalg.norm(v)
    raise ValueError(f"unknown --init {init!r}")


def cmd_quench(cfg: RunConfig, rep: _Report):
    if cfg.init == "z2" and cfg.n_sites % 2:
        raise ValueError("--init z2 needs an even N")
    times = default_times(cfg.tmax, cfg.samples)
    analytic = {}
    if cfg.analytic:
        if cfg.init == "z2":
            analytic["z2_analytic"] = z2_fidelity_analytic(cfg.n_sites, times)
        if cfg.init == "single":
            analytic["single_exact"] = single_fermion_fidelity_exact(cfg.n_sites, times)
            analytic["single_bessel"] = single_fermion_fidelity_bessel(cfg.n_sites, times)
    if cfg.analytic and cfg.init == "single" and cfg.n_sites > 20:
        # beyond desk-scale ED the closed forms are the data
        from .dynamics import QuenchResult

        res = QuenchResult(times, analytic["single_exact"], {}, "analytic",
                           {"N": cfg.n_sites, "hamiltonian": f"H_PXP(mu={cfg.mu:g})"})
        analytic.pop("single_exact")
    else:
        basis = enumerate_basis(cfg.n_sites)
        H = build_pxp(basis, cfg.mu) if cfg.model == "pxp" else build_m1(basis)
        psi = _initial_state(cfg, basis)
        res = fidelity_series(H, psi, times, {"F": build_fermion_number(basis)}, cfg.method)
    res.observables.update(analytic)
    res.meta.update(mu=cfg.mu, tol=cfg.tol, init=cfg.init)
    rep.data["quench"] = json.loads(res.to_json())
    rep.check("fidelity in [0, 1]",
              bool(np.all(res.fidelity > -1e-12) and np.all(res.fidelity < 1 + 1e-12)))
    rep.say(f"quench N={cfg.n_sites} init={cfg.init} method={res.method}: {len(times)} samples")
    return res


def _bethe_report(rep: _Report, sol, label: str, basis=None, H=None) -> None:
    entry = {
        "label": label,
        "N": sol.n_sites,
        "f": sol.fermion_number,
        "mus": [[m.real, m.imag] for m in sol.mus],
        "energy": sol.energy,
        "momentum": sol.momentum,
        "residual": sol.residual_norm,
        "integer_energy": bool(abs(sol.energy - round(sol.energy)) <= 1e-9),
    }
    ok = sol.residual_norm <= RESIDUAL_TOL
    detail = f"E={sol.energy:.10g} p={sol.momentum:.6f} residual={sol.residual_norm:.2e}"
    if entry["integer_energy"]:
        detail += " [integer]"
    if ok and H is not None:
        try:
            psi = build_bethe_state(sol.mus, basis)
            r = float(np.linalg.norm(H @ psi - sol.energy * psi))
            entry["ed_residual"] = r
            detail += f" ED={r:.2e}"
            ok = r <= EIGEN_TOL
        except ValueError as exc:
            entry["ed_residual"] = None
            detail += f" (state vanishes: {exc})"
    rep.data.setdefault("solutions", []).append(entry)
    rep.check(label, ok, detail)


def cmd_bethe_verify(cfg: RunConfig, rep: _Report) -> None:
    sols = []
    if cfg.file:
        with open(cfg.file) as fh:
            text = fh.read()
        try:
            sols.append(("file", solution_from_json(text)))
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    elif cfg.family == "single":
        sols = [(s.family, s) for s in single_fermion_solutions(cfg.n_sites)]
    elif cfg.family in ("special", "dressed"):
        base = special_solution(cfg.n_sites, cfg.f, cfg.branch) if cfg.family == "special" else None
        if cfg.family == "dressed":
            base = single_fermion_solutions(cfg.n_sites)[cfg.base_n % cfg.n_sites]
            base = dress_solution(base, cfg.n_plus, cfg.n_minus)
        if isinstance(base, Inadmissible):
            rep.say(f"inadmissible: {base.reason} (mismatch {base.mismatch:.3g})")
            rep.data["verdict"] = "inadmissible"
            return
        sols.append((base.family, base))
    else:
        raise ValueError(f"unknown --family {cfg.family!r}")

    if cfg.perturb:
        sols = [(f"{lab} perturbed", make_solution([m * np.exp(1j * cfg.perturb) for m in s.mus],
                                                   s.n_sites)) for lab, s in sols]
    for label, sol in sols:
        basis = H = None
        if sol.n_sites <= ED_CHECK_MAX_N:
            basis = enumerate_basis(sol.n_sites)
            H = build_m1(basis)
        _bethe_report(rep, sol, label, basis, H)


def cmd_mps_check(cfg: RunConfig, rep: _Report) -> None:
    sol = special_solution(cfg.n_sites, cfg.f, cfg.branch)
    if isinstance(sol, Inadmissible):
        rep.say(f"inadmissible: parity condition (N={cfg.n_sites}, f={cfg.f}, branch {cfg.branch})")
        rep.data["verdict"] = "inadmissible"
        return
    rep.data["verdict"] = "admissible"
    basis = enumerate_basis(cfg.n_sites)
    mps = build_special_mps(cfg.n_sites, cfg.f, cfg.branch)
    v = mps_to_statevector(mps, basis)
    w = build_bethe_state(sol.mus, basis)
    overlap = abs(np.vdot(w, v))
    H = build_m1(basis)
    resid = float(np.linalg.norm(H @ v - (cfg.n_sites - cfg.f) * v))
    D = mps.bond_dimension
    ranks, ent = {}, {}
    for L in range(1, cfg.n_sites):
        ranks[L] = max(len(schmidt_spectrum(v, basis, (s, L))) for s in range(1, cfg.n_sites + 1))
        ent[L] = max(entanglement_entropy(v, basis, (s, L)) for s in range(1, cfg.n_sites + 1))
    rep.data.update(overlap=overlap, eigen_residual=resid, bond_dimension=D,
                    schmidt_rank=ranks, entropy_max_over_cuts=ent)
    rep.check("overlap with Bethe state", abs(overlap - 1) <= 1e-9, f"|<bethe|mps>| = {overlap:.12f}")
    rep.check(f"eigenvector at E = N - f = {cfg.n_sites - cfg.f}", resid <= EIGEN_TOL, f"{resid:.2e}")
    rep.check(f"Schmidt rank <= {D}", max(ranks.values()) <= D, f"max {max(ranks.values())}")
    rep.check(f"entropy <= ln {D}", max(ent.values()) <= np.log(D) + 1e-12,
              f"max {max(ent.values()):.6f} vs {np.log(D):.6f}")
    for L in range(1, cfg.n_sites):
        rep.say(f"  |A|={L:2d}  S_max={ent[L]:.8f}  rank={ranks[L]}")


COMMANDS = {
    "spectrum": cmd_spectrum,
    "table-integers": cmd_table_integers,
    "quench": cmd_quench,
    "bethe-verify": cmd_bethe_verify,
    "mps-check": cmd_mps_check,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="m1chain", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, required=True, dest="n_sites", help="number of sites")
    common.add_argument("--mu", type=float, default=0.0, help="chemical potential")
    common.add_argument("--tol", type=float, default=1e-8)
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--format", choices=["text", "json", "csv"], default="text")
    common.add_argument("--sector", type=int, default=None, help="fermion-number sector")

    s = sub.add_parser("spectrum", parents=[common], help="full spectrum and SUSY structure")
    s.add_argument("--model", choices=["m1", "pxp"], default="m1")
    sub.add_parser("table-integers", parents=[common], help="integer eigenvalues per sector")
    q = sub.add_parser("quench", parents=[common], help="fidelity and <F>(t) after a quench")
    q.add_argument("--model", choices=["m1", "pxp"], default="pxp")
    q.add_argument("--init", default="z2", help="z2 | single | index:<k> | file:<path>")
    q.add_argument("--tmax", type=float, default=10.0)
    q.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    q.add_argument("--method", choices=["auto", "spectral", "krylov"], default="auto")
    q.add_argument("--analytic", action="store_true", help="add closed-form overlay columns")
    b = sub.add_parser("bethe-verify", parents=[common], help="verify Bethe solutions")
    b.add_argument("--family", choices=["single", "special", "dressed"], default="special")
    b.add_argument("--f", type=int, default=1)
    b.add_argument("--branch", choices=["+", "-"], default="+")
    b.add_argument("--n-plus", type=int, default=0)
    b.add_argument("--n-minus", type=int, default=0)
    b.add_argument("--base-n", type=int, default=0,
                   help="dressed: start from the single-fermion solution mu = exp(2 pi i n / N)")
    b.add_argument("--perturb", type=float, default=0.0, help="rotate every mu by this phase")
    b.add_argument("--file", default=None, help="solution JSON")
    m = sub.add_parser("mps-check", parents=[common], help="check the special MPS eigenstates")
    m.add_argument("--f", type=int, default=1)
    m.add_argument("--branch", choices=["+", "-"], default="+")
    return p


def _limit_threads() -> None:
    n = os.environ.get("M1CHAIN_NUM_THREADS")
    if n:
        from threadpoolctl import threadpool_limits

        threadpool_limits(int(n))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(**{k: v for k, v in vars(args).items()})
    rep = _Report(cfg)
    _limit_threads()
    try:
        cfg.validate()
        result = COMMANDS[cfg.command](cfg, rep)
    except (ValueError, OSError) as exc:
        print(f"m1chain {cfg.command}: error: {exc}", file=sys.stderr)
        return 2

    if cfg.format == "json":
        text = rep.json()
    elif cfg.format == "csv":
        if cfg.command != "quench":
            print("m1chain: --format csv is only available for quench", file=sys.stderr)
            return 2
        text = result.to_csv()
    else:
        text = "\n".join(rep.lines)
    if cfg.out:
        try:
            with open(cfg.out, "w", newline="") as fh:
                fh.write(text + ("" if text.endswith("\n") else "\n"))
        except OSError as exc:
            print(f"m1chain {cfg.command}: cannot write {cfg.out}: {exc}", file=sys.stderr)
            return 2
    else:
        print(text)
    return 0 if rep.ok else 1


if __name__ == "__main__":
    sys.exit(main())
