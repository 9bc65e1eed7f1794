"""Command-line front end: scenario runs, sweeps, protocol design, the raw
L(λ) solver on operator files, and the invariant check suites.

Outputs: results.jsonl (one ScenarioResult per line, source of truth),
results.csv (fixed-column projection), manifest.json (reproducibility echo),
fit_summary.json for sweeps.  Exit codes: 0 success, 1 validation error or
failed checks, 2 design infeasibility.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, estimation, hilbert, intelligent, resources, scenarios
from .errors import InfeasibleError, SqueezelabError, TruncationError
from .hilbert import (HilbertSpec, build_fock_operator, build_spin_operator,
                      check_sgur, commutator, moment_report, random_hermitian,
                      random_state)
from .intelligent import displaced_squeezed_state, solve_intelligent_states
from .scenarios import CSV_HEADER, ScenarioConfig, ScenarioResult


class _CliValidationError(SqueezelabError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise _CliValidationError(message)


@dataclass
class RunManifest:
    command: str
    config_path: str | None
    output_dir: str
    master_seed: int
    version_stamp: str

    def to_dict(self) -> dict:
        return {"command": self.command, "config_path": self.config_path,
                "output_dir": self.output_dir, "master_seed": self.master_seed,
                "version_stamp": self.version_stamp}


def _build_parser() -> _Parser:
    parser = _Parser(prog="squeezelab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_out=True):
        p.add_argument("--config", type=str, default=None, help="JSON config file")
        if with_out:
            p.add_argument("--out", type=str, required=True, help="output directory")
            p.add_argument("--force", action="store_true", help="overwrite existing outputs")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--shots", type=int, default=None)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--dim", type=int, default=None)

    families = ["position", "sg-phase", "quadrature-phase", "spin"]

    p_scen = sub.add_parser("scenario", help="run one example-family scenario")
    p_scen.add_argument("--family", choices=families, required=True)
    p_scen.add_argument("--lambda", dest="lam", type=float, help="position squeezing parameter")
    p_scen.add_argument("--alpha", type=float, help="SG coherent amplitude")
    p_scen.add_argument("--xi", type=float, help="quadrature squeezing parameter")
    p_scen.add_argument("--alpha-sq", type=float, default=None,
                        help="quadrature displacement (default: balanced split)")
    p_scen.add_argument("--two-j", type=int, help="spin 2j")
    p_scen.add_argument("--phi-true", type=float, default=None)
    add_common(p_scen)

    p_sweep = sub.add_parser("sweep", help="run a scenario over a parameter list and fit the scaling")
    p_sweep.add_argument("--family", choices=families, required=True)
    p_sweep.add_argument("--lambda", dest="lam", type=str, help="comma list, e.g. 4,9,16,25")
    p_sweep.add_argument("--alpha", type=str, help="comma list")
    p_sweep.add_argument("--xi", type=str, help="comma list")
    p_sweep.add_argument("--two-j", type=str, help="comma list")
    p_sweep.add_argument("--jobs", type=int, default=1)
    add_common(p_sweep)

    p_design = sub.add_parser("design", help="design a squeezing protocol for (A, H) and a budget")
    p_design.add_argument("--budget", type=float, required=True)
    p_design.add_argument("--A", dest="a_path", type=str, help="observable JSON file")
    p_design.add_argument("--H", dest="h_path", type=str, help="Hamiltonian JSON file")
    p_design.add_argument("--preset", choices=["xp", "spin"], default=None,
                          help="built-in pair: X/P quadratures or Jx/-Jy")
    p_design.add_argument("--two-j", type=int, default=16, help="spin preset 2j")
    p_design.add_argument("--e0-zero", action="store_true",
                          help="use the zero ground-energy convention for cutoff Hamiltonians")
    p_design.add_argument("--lambda-grid", type=str, default=None, help="comma list")
    add_common(p_design)

    p_solve = sub.add_parser("solve", help="solve L(lambda) = lambda*A + i*H on operator files")
    p_solve.add_argument("--A", dest="a_path", type=str, required=True)
    p_solve.add_argument("--H", dest="h_path", type=str, required=True)
    p_solve.add_argument("--lambda", dest="lam", type=str, required=True,
                         help="complex allowed, e.g. 2.0 or 1+1j")
    p_solve.add_argument("--accept-tol", type=float, default=None)
    p_solve.add_argument("--out", type=str, default=None, help="write listing to a file instead of stdout")
    p_solve.add_argument("--config", type=str, default=None)

    p_check = sub.add_parser("check", help="run the invariant suites")
    p_check.add_argument("--dim", type=int, default=256)
    p_check.add_argument("--spin-two-j", type=int, default=32)
    p_check.add_argument("--alpha", type=float, default=4.0)
    p_check.add_argument("--samples", type=int, default=1000)
    p_check.add_argument("--seed", type=int, default=20260809)
    p_check.add_argument("--config", type=str, default=None)

    return parser


def _load_config(args) -> ScenarioConfig:
    cfg = ScenarioConfig()
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = ScenarioConfig.from_dict(json.load(fh))
    for key in ("seed", "shots", "trials", "dim"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    return cfg


def _prepare_outputs(out_dir: str, names: list[str], force: bool) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    clashes = [n for n in names if (out / n).exists()]
    if clashes and not force:
        raise _CliValidationError(
            f"refusing to overwrite {clashes} in {out} (pass --force)")
    return out


def _write_outputs(out: Path, manifest: RunManifest, results: list[ScenarioResult],
                   fit: dict | None = None) -> None:
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out / "results.jsonl", "w") as fh:
        for r in results:
            fh.write(json.dumps(r.to_dict(), sort_keys=True))
            fh.write("\n")
    with open(out / "results.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in results:
            writer.writerow(r.csv_row())
    if fit is not None:
        with open(out / "fit_summary.json", "w") as fh:
            json.dump(fit, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _parse_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _family_key(family_flag: str) -> str:
    return family_flag.replace("-", "_")


def _scenario_parameters(args, family: str) -> dict:
    params: dict = {}
    if family == "position":
        if args.lam is None:
            raise _CliValidationError("position scenario needs --lambda")
        params["lambda"] = args.lam
    elif family == "sg_phase":
        if args.alpha is None:
            raise _CliValidationError("sg-phase scenario needs --alpha")
        params["alpha"] = args.alpha
    elif family == "quadrature_phase":
        if args.xi is None:
            raise _CliValidationError("quadrature-phase scenario needs --xi")
        params["xi"] = args.xi
        if args.alpha_sq is not None:
            params["alpha_sq"] = args.alpha_sq
    elif family == "spin":
        if args.two_j is None:
            raise _CliValidationError("spin scenario needs --two-j")
        params["two_j"] = args.two_j
    if getattr(args, "phi_true", None) is not None:
        params["phi_true"] = args.phi_true
    return params


def _cmd_scenario(args) -> int:
    family = _family_key(args.family)
    cfg = _load_config(args)
    cfg.family = family
    cfg.parameters = {**cfg.parameters, **_scenario_parameters(args, family)}
    out = _prepare_outputs(args.out, ["manifest.json", "results.jsonl", "results.csv"], args.force)
    result = scenarios.run_scenario(cfg)
    manifest = RunManifest("scenario", args.config, str(out), cfg.seed, __version__)
    _write_outputs(out, manifest, [result])
    print(f"wrote {out / 'results.csv'}")
    return 0


def _sweep_values(args, family: str) -> list[float]:
    flag = {"position": args.lam, "sg_phase": args.alpha,
            "quadrature_phase": args.xi, "spin": args.two_j}[family]
    if flag is None:
        raise _CliValidationError(f"sweep over {family} needs its parameter list flag")
    values = _parse_list(flag)
    if not values:
        raise _CliValidationError("empty sweep value list")
    return values


def _cmd_sweep(args) -> int:
    family = _family_key(args.family)
    cfg = _load_config(args)
    cfg.family = family
    values = _sweep_values(args, family)
    out = _prepare_outputs(args.out, ["manifest.json", "results.jsonl", "results.csv",
                                      "fit_summary.json"], args.force)
    results, fit = scenarios.run_sweep(family, values, cfg, jobs=max(1, args.jobs))
    manifest = RunManifest("sweep", args.config, str(out), cfg.seed, __version__)
    _write_outputs(out, manifest, results, fit)
    print(f"fit: slope={fit['slope']:.4f} r2={fit['r_squared']:.5f} ({len(results)} points)")
    return 0


def _load_operator(path: str) -> hilbert.Operator:
    with open(path) as fh:
        return hilbert.operator_from_dict(json.load(fh))


def _design_pair(args):
    if args.preset == "xp":
        dim = args.dim or scenarios.default_dim()
        return build_fock_operator("X", dim), build_fock_operator("P", dim), True
    if args.preset == "spin":
        jx = build_spin_operator("Jx", args.two_j)
        minus_jy = hilbert.scaled(build_spin_operator("Jy", args.two_j), -1.0)
        return jx, minus_jy, False
    if not args.a_path or not args.h_path:
        raise _CliValidationError("design needs --preset or both --A and --H")
    return _load_operator(args.a_path), _load_operator(args.h_path), False


def _cmd_design(args) -> int:
    cfg = _load_config(args)
    A, H, e0_zero_default = _design_pair(args)
    override = 0.0 if (args.e0_zero or e0_zero_default) else None
    grid = _parse_list(args.lambda_grid) if args.lambda_grid else None
    out = _prepare_outputs(args.out, ["manifest.json", "results.jsonl", "results.csv"], args.force)
    result = scenarios.design_protocol(A, H, args.budget, lambda_grid=grid,
                                       config=cfg, ground_energy_override=override)
    manifest = RunManifest("design", args.config, str(out), cfg.seed, __version__)
    _write_outputs(out, manifest, [result])
    print(f"selected lambda={result.metrics['lambda_selected']:g} "
          f"predicted dphi={result.metrics['predicted_dphi']:.6g} N={result.metrics['n_probes']:.6g}")
    return 0


def _cmd_solve(args) -> int:
    A = _load_operator(args.a_path)
    H = _load_operator(args.h_path)
    try:
        lam = complex(args.lam)
    except ValueError:
        raise _CliValidationError(f"cannot parse lambda {args.lam!r}")
    states = solve_intelligent_states(A, H, lam, accept_tol=args.accept_tol)
    listing = [{"eigenvalue": [s.eigenvalue.real, s.eigenvalue.imag],
                "residual": s.residual,
                "trifonov_residuals": list(s.trifonov_residuals),
                "usable": s.usable,
                "tail_weight": s.state.tail_weight} for s in states]
    text = json.dumps({"lambda": [lam.real, lam.imag], "count": len(listing),
                       "states": listing}, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


# ---------------------------------------------------------------------------
# invariant check suites
# ---------------------------------------------------------------------------

def _suite_schrodinger(args) -> tuple[bool, str]:
    rng = np.random.default_rng(args.seed)
    worst = np.inf
    for space in (HilbertSpec.fock(32), HilbertSpec.spin(args.spin_two_j)):
        for _ in range(args.samples):
            state = random_state(space, rng)
            rep = moment_report(state, random_hermitian(space, rng),
                                random_hermitian(space, rng))
            worst = min(worst, rep.schrodinger_slack)
    return worst >= -1e-10, f"worst slack {worst:.3e} over {2 * args.samples} draws"


def _suite_su2_algebra(args) -> tuple[bool, str]:
    worst = 0.0
    for two_j in (1, 2, 3, 5, 8, 16, 32, 64):
        jx = build_spin_operator("Jx", two_j)
        jy = build_spin_operator("Jy", two_j)
        jz = build_spin_operator("Jz", two_j)
        dev = np.max(np.abs(commutator(jx, jy).entries - 1j * jz.entries))
        worst = max(worst, float(dev))
    return worst <= 1e-12, f"worst |[Jx,Jy]-iJz| = {worst:.3e}"


def _suite_xp_commutator(args) -> tuple[bool, str]:
    d = args.dim
    X = build_fock_operator("X", d)
    P = build_fock_operator("P", d)
    expected = 1j * np.eye(d)
    expected[d - 1, d - 1] = 1j * (1 - d)
    dev = float(np.max(np.abs(commutator(X, P).entries - expected)))
    return dev <= 1e-12, f"truncated [X,P] deviation {dev:.3e}"


def _suite_derivative(args) -> tuple[bool, str]:
    rng = np.random.default_rng(args.seed + 1)
    worst = 0.0
    for space in (HilbertSpec.fock(24), HilbertSpec.spin(16)):
        for _ in range(50):
            state = random_state(space, rng)
            A = random_hermitian(space, rng)
            H = random_hermitian(space, rng)
            phi = float(rng.uniform(-1.0, 1.0))
            analytic, numeric = estimation.derivative_identity_check(state, A, H, phi, 1e-3)
            worst = max(worst, abs(analytic - numeric) / max(1.0, abs(analytic)))
    return worst <= 1e-4, f"worst derivative mismatch {worst:.3e}"


def _suite_trifonov(args) -> tuple[bool, str]:
    X = build_fock_operator("X", args.dim)
    P = build_fock_operator("P", args.dim)
    worst = 0.0
    for lam in (1.0, 2.0, 4.0, 9.0, 1 + 1j):
        for state in solve_intelligent_states(X, P, lam):
            worst = max(worst, max(state.trifonov_residuals))
    return worst <= 1e-6, f"worst moment-identity residual {worst:.3e}"


def _suite_sgur(args) -> tuple[bool, str]:
    try:
        probe = displaced_squeezed_state(args.alpha, 0.0, args.dim)
        slack_c, slack_s = check_sgur(probe)
    except TruncationError as exc:
        return False, f"tail-weight gate: {exc}"
    ok = slack_c >= -1e-8 and slack_s >= -1e-8
    return ok, f"slacks ({slack_c:.3e}, {slack_s:.3e})"


def _cmd_check(args) -> int:
    suites = [("schrodinger_slack", _suite_schrodinger),
              ("su2_algebra", _suite_su2_algebra),
              ("xp_commutator", _suite_xp_commutator),
              ("derivative_identity", _suite_derivative),
              ("intelligent_identities", _suite_trifonov),
              ("sgur_truncation", _suite_sgur)]
    failures = 0
    for name, fn in suites:
        ok, detail = fn(args)
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failures += 0 if ok else 1
    return 0 if failures == 0 else 1


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {"scenario": _cmd_scenario, "sweep": _cmd_sweep,
                   "design": _cmd_design, "solve": _cmd_solve,
                   "check": _cmd_check}[args.command]
        return handler(args)
    except InfeasibleError as exc:
        json.dump({"error": "infeasible", "message": str(exc), "report": exc.report},
                  sys.stderr, sort_keys=True)
        sys.stderr.write("\n")
        return 2
    except (SqueezelabError, ValueError, OSError, KeyError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)},
                  sys.stderr, sort_keys=True)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
