"""Command line front end: simulate, equivalence, erase, fock-verify.

Exit codes: 0 on pass, 2 on config/usage validation errors, 1 on failed
checks or I/O errors. The KICKBACK_TOL environment variable overrides the
certificate pass tolerance.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from importlib import resources
from pathlib import Path

from . import fock
from .dephase import PhaseWeight
from .entangle import EnvironmentModel
from .equivalence import certify_equivalence, env_to_weight, weight_to_env
from .eraser import erasure_report
from .figures import save_fringe_figure
from .reportio import kv_line
from .scenario import ScenarioError, parse_scenario, run_analytic, run_monte_carlo

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_VALIDATION = 2

PRESETS = {
    "dnr-stage1": "dnr_stage1.cfg",
    "dnr-stage2": "dnr_stage2.cfg",
    "dnr-stage3": "dnr_stage3.cfg",
}


def _load_config(spec: str) -> str:
    """Read a config from a path, or from the named built-in preset."""
    path = Path(spec)
    if path.is_file():
        return path.read_text()
    if spec in PRESETS:
        return (resources.files("kickback") / "presets" / PRESETS[spec]).read_text()
    raise ScenarioError(
        f"config '{spec}' is neither a file nor a preset (presets: {', '.join(sorted(PRESETS))})"
    )


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as exc:
        raise RuntimeError(f"cannot write {path}: {exc}") from exc


def _cmd_simulate(args) -> int:
    scenario = parse_scenario(_load_config(args.config))
    if args.shots is not None:
        scenario = dataclasses.replace(scenario, shots=args.shots)
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
    if scenario.shots > 0:
        result = run_monte_carlo(scenario, shards=args.shards)
    else:
        result = run_analytic(scenario)
    out = args.out or scenario.output
    if out:
        out_path = Path(out)
        _write_text(out_path, result.to_csv_text())
        if not args.no_plot:
            save_fringe_figure(result, out_path.with_suffix(".png"))
        sys.stdout.write(result.to_report_text())
    else:
        sys.stderr.write(result.to_report_text())
        sys.stdout.write(result.to_csv_text())
    return EXIT_OK


def _counterpart(channel):
    if isinstance(channel, EnvironmentModel):
        return env_to_weight(channel)
    if isinstance(channel, PhaseWeight):
        return weight_to_env(channel)
    raise ScenarioError("equivalence needs a phase-kick or environment channel")


def _cmd_equivalence(args) -> int:
    scenario = parse_scenario(_load_config(args.config))
    certificate = certify_equivalence(scenario.channel, _counterpart(scenario.channel))
    text = certificate.to_text()
    sys.stdout.write(text)
    if args.out:
        _write_text(Path(args.out), text)
    return EXIT_OK if certificate.passed else EXIT_CHECK_FAILED


def _cmd_erase(args) -> int:
    scenario = parse_scenario(_load_config(args.config))
    if not scenario.is_env_channel:
        raise ScenarioError("erase needs an environment channel (kind canonical or explicit)")
    if scenario.erasure_kind is None:
        scenario = dataclasses.replace(scenario, erasure_kind="eigen")
    report = erasure_report(scenario.psi0, scenario.channel, scenario.resolve_basis())
    text = report.to_text()
    sys.stdout.write(text)
    if args.out:
        out_path = Path(args.out)
        _write_text(out_path, text)
        save_fringe_figure(run_analytic(scenario), out_path.with_suffix(".png"))
    return EXIT_OK


def _cmd_fock_verify(args) -> int:
    resolution_deviation = fock.resolution_check(
        n_sub=args.n_sub, n_max=args.n_max, i_max=args.i_max, n_phi=args.n_phi, n_i=args.n_i
    )
    integral = fock.phase_integral_inner_product(
        n_max=args.n_max, i_max=args.i_max, n_phi=args.n_phi, n_i=args.n_i
    )
    density_error = float(
        max(abs(d - 1.0 / (2.0 * math.pi)) for d in integral.relative_phase_density)
    )
    passed = (
        resolution_deviation < 1e-6
        and abs(integral.value) < 1e-10
        and density_error < 1e-8
    )
    lines = [
        kv_line("resolution_max_deviation", resolution_deviation),
        kv_line("phase_integral_value", integral.value.real, integral.value.imag),
        kv_line("phase_integral_abs", abs(integral.value)),
        kv_line("phase_density_max_error", density_error),
        kv_line("pass", passed),
    ]
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kickback",
        description="Two-way interferometer decoherence experiments: "
        "phase kicks, which-way entanglement, erasure, Fock-space checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="run a scenario and emit CSV fringe data")
    simulate.add_argument("--config", required=True, help="config path or preset name")
    simulate.add_argument("--shots", type=int, default=None, help="override Monte Carlo shots")
    simulate.add_argument("--seed", type=int, default=None, help="override RNG seed")
    simulate.add_argument("--shards", type=int, default=1, help="independent RNG shards")
    simulate.add_argument("--out", default=None, help="CSV output path")
    simulate.add_argument("--no-plot", action="store_true", help="skip the figure next to the CSV")
    simulate.set_defaults(func=_cmd_simulate)

    equivalence = sub.add_parser(
        "equivalence", help="certify the channel built from the config against its conversion"
    )
    equivalence.add_argument("--config", required=True)
    equivalence.add_argument("--out", default=None, help="certificate output path")
    equivalence.set_defaults(func=_cmd_equivalence)

    erase = sub.add_parser("erase", help="sort an entangled scenario into subensembles")
    erase.add_argument("--config", required=True)
    erase.add_argument("--out", default=None, help="report output path")
    erase.set_defaults(func=_cmd_erase)

    fock_verify = sub.add_parser("fock-verify", help="run the truncated-Fock-space checks")
    fock_verify.add_argument("--n-sub", type=int, default=12)
    fock_verify.add_argument("--n-max", type=int, default=32)
    fock_verify.add_argument("--i-max", type=float, default=50.0)
    fock_verify.add_argument("--n-phi", type=int, default=64)
    fock_verify.add_argument("--n-i", type=int, default=200)
    fock_verify.set_defaults(func=_cmd_fock_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except RuntimeError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    raise SystemExit(main())
