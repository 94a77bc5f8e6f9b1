"""
Command line interface for the tcups package.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError
from termcolor import colored

from . import __version__

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_ANALYSIS = 3
EXIT_IO = 4

EXIT_CODES = {
    None: EXIT_OK,
    "validation": EXIT_VALIDATION,
    "analysis": EXIT_ANALYSIS,
    "io": EXIT_IO,
    "internal": EXIT_ANALYSIS,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tcups",
        description="Simulate and analyze two-pulse Stokes interference spectra",
    )
    parser.add_argument("--version", action="version", version=f"tcups {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--json-only", action="store_true", help="Print only the JSON result")
        p.add_argument("--workers", type=int, default=1, help="Concurrent jobs (results do not depend on it)")

    simulate = sub.add_parser("simulate", help="Write laser and Stokes pair spectra for every delay")
    simulate.add_argument("--config", type=str, help="JSON run config")
    simulate.add_argument("--out", type=str, help="Output directory")
    simulate.add_argument("--seed", type=int, help="Seed for phase and counting streams")
    simulate.add_argument("--shots", type=int, help="Shots averaged per spectrum")
    common(simulate)

    analyze = sub.add_parser("analyze", help="Fit visibility decay of a spectra directory")
    analyze.add_argument("spectra_dir", type=str, help="Directory written by 'tcups simulate'")
    analyze.add_argument("--out", type=str, help="Directory for report.json and plots")
    analyze.add_argument("--plot", action="store_true", help="Write waterfall and decay SVG plots")
    analyze.add_argument("--method", choices=["fourier", "direct"], default="fourier", help="Visibility estimator")
    analyze.add_argument("--fix-v0", action="store_true", help="Hold the decay amplitude at 1")
    common(analyze)

    quantum = sub.add_parser("quantum-check", help="Langevin integration against the perturbative correlation")
    quantum.add_argument("--config", type=str, help="JSON file with Langevin parameters")
    quantum.add_argument("--coupling", type=float, help="Pump-on coupling g (1/ps)")
    quantum.add_argument("--gamma", type=float, help="Dephasing rate Γ (1/ps)")
    quantum.add_argument("--pump-duration", type=float, help="Pump duration (ps)")
    quantum.add_argument("--trajectories", type=int, help="Number of trajectories")
    quantum.add_argument("--seed", type=int, help="Noise seed")
    quantum.add_argument("--rates", action="store_true", help="Also fit amplitude and population decay rates")
    quantum.add_argument("--out", type=str, help="Path of the JSON report")
    common(quantum)

    power = sub.add_parser("power-scan", help="Stokes yield and visibility against pump energy")
    power.add_argument("--config", type=str, help="JSON run config")
    power.add_argument("--out", type=str, help="Path of the JSON report")
    power.add_argument("--seed", type=int, help="Seed for phase and counting streams")
    power.add_argument("--shots", type=int, help="Shots averaged per spectrum")
    common(power)

    schema = sub.add_parser("schema", help="Print the JSON schemas of all reports")
    schema.add_argument("--out", type=str, help="Directory to write one <name>.schema.json per report")

    sub.add_parser("constants", help="Print the constants and material reference table")
    return parser


def _langevin_params(args: argparse.Namespace):
    from .models.quantum import LangevinParams

    data: Dict[str, Any] = {}
    if args.config:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
    overrides = {
        "coupling": args.coupling,
        "gamma": args.gamma,
        "pump_duration": args.pump_duration,
        "trajectories": args.trajectories,
        "seed": args.seed,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    return LangevinParams.model_validate(data)


def _summarize(command: str, result: Dict[str, Any]) -> None:
    if not result["success"]:
        print(colored(f"\n✗ {command} failed: {result['error']}", "red"))
        return
    print(colored(f"\n✓ {command} finished", "green"))
    report = result.get("report") or {}
    if command == "simulate":
        manifest = result["manifest"]
        print(colored(f"Wrote {2 * len(manifest['files'])} spectra to {result['output_dir']}", "cyan"))
        print(colored(f"Config hash: {manifest['config_hash']}", "cyan"))
    elif command == "analyze":
        if report["lifetime_ps"] is not None:
            print(colored(
                f"1/Γ = {report['lifetime_ps']:.2f} ± {report['lifetime_stderr']:.2f} ps, "
                f"Δν = {report['linewidth_cm_inv']:.3f} cm^-1, Q = {report['q_factor']:.0f}",
                "cyan",
            ))
        else:
            print(colored("No visibility decay resolved (Γ at the boundary)", "yellow"))
        for failure in report["failures"]:
            print(colored(f"Skipped τ = {failure['delay_ps']} ps: {failure['error']}", "yellow"))
    elif command == "quantum-check":
        status = "green" if report["all_within_3sigma"] else "yellow"
        print(colored(f"All points within 3σ of the perturbative result: {report['all_within_3sigma']}", status))
        for warning in report["warnings"]:
            print(colored(f"Regime warning: {warning}", "yellow"))
    elif command == "power-scan":
        print(colored(f"log-log slope {report['slope']:.4f}, visibility spread {report['visibility_spread']:.2e}", "cyan"))


def _run(args: argparse.Namespace) -> Dict[str, Any]:
    from .commands import cmd_analyze, cmd_power_scan, cmd_quantum_check, cmd_simulate
    from .config import load_config

    if args.command == "simulate":
        config = load_config(args.config, output_dir=args.out, seed=args.seed, shots=args.shots)
        if not args.json_only:
            print(colored(f"\nSimulating {len(config.excitation.delays_ps)} delays into {config.output_dir}", "cyan"))
        return cmd_simulate(config, workers=args.workers)
    if args.command == "analyze":
        if not args.json_only:
            print(colored(f"\nAnalyzing {args.spectra_dir}", "cyan"))
        return cmd_analyze(args.spectra_dir, out=args.out, plot=args.plot, method=args.method, fix_v0=args.fix_v0)
    if args.command == "quantum-check":
        params = _langevin_params(args)
        if not args.json_only:
            print(colored(f"\nIntegrating {params.trajectories} trajectories per delay", "cyan"))
        return cmd_quantum_check(params, rate_check=args.rates, workers=args.workers, out=args.out)
    if args.command == "power-scan":
        config = load_config(args.config, seed=args.seed, shots=args.shots)
        return cmd_power_scan(config, workers=args.workers, out=args.out)
    raise ValueError(f"unknown command {args.command}")


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point for the package when run from the command line."""
    args = build_parser().parse_args(argv)

    if args.command == "constants":
        from .physics import constants_reference

        print(constants_reference(), end="")
        return EXIT_OK
    if args.command == "schema":
        from .analysis.report import report_schemas
        from .instrument.io import write_json

        schemas = report_schemas()
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            for name, schema in schemas.items():
                write_json(out / f"{name}.schema.json", schema)
        else:
            print(json.dumps(schemas, indent=2, sort_keys=True))
        return EXIT_OK

    # Configure logging
    logging.basicConfig(
        level=logging.WARNING if args.json_only else logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    try:
        result = _run(args)
    except (ValidationError, ValueError) as e:
        result = {"success": False, "error": str(e), "error_kind": "validation"}
    except OSError as e:
        result = {"success": False, "error": str(e), "error_kind": "io"}

    if args.json_only:
        print(json.dumps(result, indent=2, sort_keys=True))
    else:
        _summarize(args.command, result)
    return EXIT_CODES.get(result.get("error_kind"), EXIT_ANALYSIS)


if __name__ == "__main__":
    sys.exit(main())
