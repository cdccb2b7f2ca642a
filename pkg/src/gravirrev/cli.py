"""Command-line experiments.

Every subcommand prints its primary JSON (or CSV) result to stdout. With
``--output-dir`` the result files are written there together with a
``manifest.json`` naming every input and output by SHA-256.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from . import constants, dephasing, kernel, master_eq, sn_solver
from .errors import DomainError, GravirrevError, NumericalError
from .qstate import projector, StateVector

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


def _tool_version():
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


def _workers():
    raw = os.environ.get("GRAVIRREV_THREADS")
    if raw:
        return max(1, int(raw))
    return os.cpu_count() or 1


def _dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read {path}: {exc}") from exc


def _parse_entries(text, n):
    if not text:
        return [(m, k) for m in range(n) for k in range(m + 1, n)]
    out = []
    for tok in text.split(","):
        m, k = (int(x) for x in tok.split(":"))
        if not (0 <= m < n and 0 <= k < n):
            raise DomainError(f"entry {tok} outside a {n}-level system")
        out.append((m, k))
    return out


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class _Run:
    """Collects outputs of one subcommand and writes them with a manifest."""

    def __init__(self, args, inputs=()):
        self.args = args
        self.inputs = [str(p) for p in inputs]
        self.files = {}

    def add(self, name, text):
        self.files[name] = text

    def finish(self, stdout_name):
        sys.stdout.write(self.files[stdout_name])
        out_dir = self.args.output_dir
        if out_dir is None:
            return
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        outputs = []
        for name, text in self.files.items():
            p = out_dir / name
            p.write_bytes(text.encode("utf-8"))
            outputs.append({"path": str(p), "sha256": _sha256(p)})
        params = {k: v for k, v in vars(self.args).items() if k not in ("func", "output_dir")}
        manifest = {
            "subcommand": self.args.command,
            "parameters": params,
            "seed": getattr(self.args, "seed", None),
            "input_paths": [{"path": p, "sha256": _sha256(p)} for p in self.inputs],
            "output_paths": outputs,
            "tool_version": _tool_version(),
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        }
        (out_dir / "manifest.json").write_bytes(_dumps(manifest).encode("utf-8"))


def cmd_planck(args):
    rep = constants.planck_regime_report(args.mass_kg, args.speed_mps)
    run = _Run(args)
    run.add("planck.json", _dumps(rep.to_dict()))
    run.finish("planck.json")


def cmd_bekenstein(args):
    s = constants.bekenstein_entropy(args.area_m2)
    run = _Run(args)
    run.add("bekenstein.json", _dumps({"area_m2": args.area_m2, "entropy_J_per_K": s}))
    run.finish("bekenstein.json")


def cmd_dephase(args):
    spec = dephasing.EnergySpectrum.from_json(_load_json(args.spectrum))
    dist = dephasing.DeltaDistribution(args.dist, args.sigma)
    if args.t_steps < 1:
        raise DomainError("--t-steps must be >= 1")
    times = np.linspace(0.0, args.t_max, args.t_steps)
    entries = _parse_entries(args.entries, spec.n)
    if args.analytic:
        mats = [dephasing.analytic_averaged_density(spec, dist, t).entries for t in times]
    else:
        if args.seed is None:
            raise DomainError("--seed is required unless --analytic is given")
        est = dephasing.ensemble_series(spec, dist, times, args.samples, args.seed)
        mats = [r.entries for r in est.rho]
    rows = []
    for t, rho in zip(times, mats):
        for m, k in entries:
            z = rho[m, k]
            rows.append([float(t), m, k, float(z.real), float(z.imag), float(abs(z))])
    run = _Run(args, [args.spectrum])
    run.add("dephase.csv", _csv(["t_s", "entry_m", "entry_n", "re", "im", "abs"], rows))
    run.finish("dephase.csv")


def _load_system(path):
    sys_, init = master_eq.system_from_json(_load_json(path))
    if init is None:
        raise DomainError(f"{path} has no initial_state or initial_density")
    return sys_, init


def cmd_evolve(args):
    sys_, init = _load_system(args.system)
    res = master_eq.evolve(init, sys_, args.t_final, args.dt)
    entries = [tuple(int(x) for x in tok.split(":")) for tok in (args.observables or "").split(",") if ":" in tok]
    header = ["t_s", "trace", "purity", "min_eig", "energy_J"]
    for m, k in entries:
        header += [f"re_{m}_{k}", f"im_{m}_{k}", f"abs_{m}_{k}"]
    rows = []
    for i, t in enumerate(res.times):
        rho = res.states[i].entries
        row = [float(t), float(np.trace(rho).real), float(res.purity[i]), float(res.min_eigenvalue[i]),
               float(res.energy[i])]
        for m, k in entries:
            z = rho[m, k]
            row += [float(z.real), float(z.imag), float(abs(z))]
        rows.append(row)
    run = _Run(args, [args.system])
    run.add("evolution.csv", _csv(header, rows))
    run.finish("evolution.csv")


def cmd_cat_decay(args):
    a = kernel.MassConfiguration.from_json(_load_json(args.config_a))
    b = kernel.MassConfiguration.from_json(_load_json(args.config_b))
    rate = master_eq.cat_decay_rate(a, b, args.sigma_reg)
    out = {"closed_form_rate_hz": rate}
    if args.oracle:
        if rate == 0.0:
            out.update(fitted_rate_hz=0.0, relative_gap=0.0)
        else:
            t_final = args.t_final if args.t_final is not None else 4.0 / rate
            dt = args.dt if args.dt is not None else 0.005 / rate
            sys_ = master_eq.cat_system(a, b, args.sigma_reg)
            res = master_eq.evolve(StateVector.normalized([1, 1]), sys_, t_final, dt)
            fitted = master_eq.fit_decay_rate(res.times, res.entry(0, 1))
            out.update(fitted_rate_hz=fitted, relative_gap=abs(fitted - rate) / rate)
    run = _Run(args, [args.config_a, args.config_b])
    run.add("cat_decay.json", _dumps(out))
    run.finish("cat_decay.json")


def cmd_noise_check(args):
    cfg = kernel.MassConfiguration.from_json(_load_json(args.config))
    ker = kernel.build_newton_kernel(cfg, args.sigma_reg)
    w = np.concatenate([kernel.sample_noise(ker, True, args.dt, args.steps, args.seed, index=k).increments
                        for k in range(args.samples)])
    n_draws = w.shape[0]
    expected = constants.HBAR * ker.matrix * args.dt
    sample_cov = w.T @ w / n_draws
    # std of a product of jointly gaussian zero-mean variables: sqrt(C_ii C_jj + C_ij^2)
    d = np.diag(expected)
    mc_std = np.sqrt((np.outer(d, d) + expected**2) / n_draws)
    z = np.abs(sample_cov - expected) / mc_std
    rel = np.abs(sample_cov - expected) / np.abs(expected)
    out = {
        "n_draws": n_draws,
        "max_relative_error": float(rel.max()),
        "max_z_score": float(z.max()),
        "mean_abs_over_std": float(np.max(np.abs(w.mean(axis=0)) / np.sqrt(d / n_draws))),
        "expected_covariance": expected.tolist(),
        "sample_covariance": sample_cov.tolist(),
    }
    run = _Run(args, [args.config])
    run.add("noise_check.json", _dumps(out))
    run.finish("noise_check.json")


def cmd_unravel(args):
    sys_, init = _load_system(args.system)
    if not isinstance(init, StateVector):
        raise DomainError("unravel needs a pure initial_state")
    ur = master_eq.unravel(init, sys_, args.dt, args.steps, args.trajectories, args.seed, workers=_workers())
    det = master_eq.evolve(projector(init), sys_, args.dt * args.steps, args.dt)
    dev = np.abs(ur.rho.entries - det.states[-1].entries)
    # rounding floor for entries that carry no Monte-Carlo spread
    bound = 3.0 * ur.std_error + 1e-12
    k = np.unravel_index(np.argmax(dev / bound), dev.shape)
    out = {
        "trajectories": args.trajectories,
        "max_deviation": float(dev.max()),
        "worst_entry": [int(k[0]), int(k[1])],
        "worst_entry_deviation": float(dev[k]),
        "worst_entry_3sigma_bound": float(bound[k]),
        "max_deviation_over_3sigma": float((dev / bound).max()),
        "within_3sigma": bool(np.all(dev <= bound)),
        "max_trajectory_purity_error": float(np.max(np.abs(ur.trajectory_purity - 1.0))),
    }
    run = _Run(args, [args.system])
    run.add("unravel.json", _dumps(out))
    run.finish("unravel.json")


def cmd_sn_soliton(args):
    grid = sn_solver.RadialGrid.for_mass(args.mass_kg, args.r_max_dimensionless, args.n_points)
    sol = sn_solver.solve_ground_state(args.mass_kg, grid, tol=args.tol, max_iter=args.max_iter)
    rows = [[float(r), float(u), float(p)] for r, u, p in zip(grid.r, sol.u, sol.phi)]
    summary = sol.summary()
    summary.update(coarse_grid=sol.coarse_grid, tail_ok=sol.tail_ok)
    run = _Run(args)
    run.add("soliton.json", _dumps(summary))
    run.add("soliton.csv", _csv(["r_m", "u", "phi_J"], rows))
    run.finish("soliton.json")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="gravirrev", description="Gravity-related irreversibility experiments.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--output-dir", default=None)
        return sp

    sp = add("planck", cmd_planck, "de Broglie wavelength vs Planck length")
    sp.add_argument("--mass-kg", type=float, required=True)
    sp.add_argument("--speed-mps", type=float, required=True)

    sp = add("bekenstein", cmd_bekenstein, "black-hole entropy of a horizon area")
    sp.add_argument("--area-m2", type=float, required=True)

    sp = add("dephase", cmd_dephase, "random time-flow dephasing series")
    sp.add_argument("--spectrum", required=True)
    sp.add_argument("--sigma", type=float, required=True)
    sp.add_argument("--dist", choices=("gaussian", "uniform"), default="gaussian")
    sp.add_argument("--t-max", type=float, required=True)
    sp.add_argument("--t-steps", type=int, required=True)
    sp.add_argument("--samples", type=int, default=10000)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--analytic", action="store_true")
    sp.add_argument("--entries", default=None, help="comma list m:n (default: all upper off-diagonals)")

    sp = add("evolve", cmd_evolve, "integrate the master equation")
    sp.add_argument("--system", required=True)
    sp.add_argument("--t-final", type=float, required=True)
    sp.add_argument("--dt", type=float, required=True)
    sp.add_argument("--observables", default="", help="comma list of matrix entries m:n")

    sp = add("cat-decay", cmd_cat_decay, "decay rate of a two-configuration cat")
    sp.add_argument("--config-a", required=True)
    sp.add_argument("--config-b", required=True)
    sp.add_argument("--sigma-reg", type=float, required=True)
    sp.add_argument("--oracle", action="store_true")
    sp.add_argument("--t-final", type=float)
    sp.add_argument("--dt", type=float)

    sp = add("noise-check", cmd_noise_check, "sample Newton noise and check its covariance")
    sp.add_argument("--config", required=True)
    sp.add_argument("--sigma-reg", type=float, required=True)
    sp.add_argument("--dt", type=float, required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--samples", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)

    sp = add("unravel", cmd_unravel, "noise-unraveled ensemble vs deterministic evolution")
    sp.add_argument("--system", required=True)
    sp.add_argument("--dt", type=float, required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--trajectories", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)

    sp = add("sn-soliton", cmd_sn_soliton, "Schroedinger-Newton ground state")
    sp.add_argument("--mass-kg", type=float, required=True)
    sp.add_argument("--n-points", type=int, default=2000)
    sp.add_argument("--r-max-dimensionless", type=float, default=30.0)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--max-iter", type=int, default=500)
    return p


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except NumericalError as exc:
        print(f"gravirrev: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (GravirrevError, ValueError) as exc:
        print(f"gravirrev: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main():
    try:
        code = run()
        sys.stdout.flush()
    except BrokenPipeError:
        # reader went away (e.g. piped into head); files are already written
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = EXIT_OK
    sys.exit(code)
