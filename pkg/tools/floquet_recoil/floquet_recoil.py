#!/bin/env python

"""
Emission rates, recoil forces and drift trajectories of an electron dressed by a
strong circularly polarized field.

Subcommands: derive, pattern, forces, trajectory, sweep, verify.
"""

import argparse
import dataclasses
import hashlib
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import List, Optional

import numpy as np
import pandas as pd
import yaml

from tools.floquet_recoil import __version__
from tools.floquet_recoil.core_model import (
    CM_PER_M,
    DYN_PER_N,
    ERG_PER_J,
    Constants,
    DerivedParams,
    ElectronState,
    FieldConfig,
    Verdict,
    derive_params,
    gaussian_to_si,
    positive_number,
    si_to_gaussian,
    validate_regime,
)
from tools.floquet_recoil.dynamics import (
    TrajectoryConfig,
    guiding_center_metadata,
    heading_change,
    simulate,
    trajectory_frame,
    work_integral,
)
from tools.floquet_recoil.emission import radiation_pattern
from tools.floquet_recoil.errors import ConfigError, DomainError, RegimeError, RelativisticInputError
from tools.floquet_recoil.numerics import QuadratureRule
from tools.floquet_recoil.observables import (
    acceleration_estimate,
    anomalous_recoil,
    classical_recoil,
    force_report,
    larmor_power,
)
from tools.floquet_recoil.verification import run_checks
from tools.python_modules.report_tool import ReportWriter, file_digest
from tools.python_modules.utils import logging_decorator, read_file

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_REGIME_INVALID = 2
EXIT_USAGE = 64
EXIT_IO = 73

SETTINGS_FILE = os.path.join(os.path.dirname(os.path.abspath(__file__)), "floquet_recoil.yml")
SWEEP_PARAMS = ("E0", "omega", "vk_mag")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
SWEEP_COLUMNS = ["value", "P_W", "tau_s", "F_parallel_N", "F_perp_N", "a_perp_m_s2", "regime_verdict"]


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError("arguments", message)


def parse_cli_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """
    Parse CLI arguments.
    """

    common = _ArgumentParser(add_help=False)
    common.add_argument("--settings", dest="settings", help="Tool settings file", default=SETTINGS_FILE)
    common.add_argument("-v", "--verbose", dest="verbose", action="store_true", help="Log progress")
    common.add_argument("--quad-order", dest="quad_order", type=int, help="Gauss-Legendre order")

    field_args = _ArgumentParser(add_help=False)
    field_args.add_argument("--config", dest="config", help="Field configuration file", required=True)
    field_args.add_argument("--vk", dest="vk", help="Drift velocity vx,vy,vz in m/s", default="0,0,0")
    field_args.add_argument("--out", dest="out", help="Output file")

    parser = _ArgumentParser(prog="floquet-recoil", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("derive", parents=[common, field_args], help="Derived parameters and regime report")

    pattern = commands.add_parser("pattern", parents=[common, field_args], help="Radiation pattern CSV")
    pattern.add_argument("--n-theta", dest="n_theta", type=int, default=64)
    pattern.add_argument("--n-phi", dest="n_phi", type=int, default=128)
    pattern.add_argument("--method", dest="method", choices=["closed_form", "density"], default="closed_form")

    commands.add_parser("forces", parents=[common, field_args], help="Force report")

    trajectory = commands.add_parser("trajectory", parents=[common, field_args], help="Drift trajectory CSV")
    trajectory.add_argument("--t-end", dest="t_end", type=float, help="End time in s")
    trajectory.add_argument("--dt", dest="dt", type=float, help="Time step in s")
    trajectory.add_argument("--drag", dest="drag", action="store_true", help="Include photon drag")
    trajectory.add_argument("--classical", dest="classical", action="store_true", help="Disable the anomalous force")

    sweep = commands.add_parser("sweep", parents=[common, field_args], help="Parameter sweep CSV")
    sweep.add_argument("--param", dest="param", choices=SWEEP_PARAMS, required=True)
    sweep.add_argument("--from", dest="start", type=float, required=True)
    sweep.add_argument("--to", dest="stop", type=float, required=True)
    sweep.add_argument("--steps", dest="steps", type=int, required=True)
    sweep.add_argument("--linear", dest="linear", action="store_true", help="Linear instead of geometric spacing")

    commands.add_parser("verify", parents=[common], help="Run the self-verification suite")

    return parser.parse_args(argv)


def load_config(args: argparse.Namespace) -> dict:
    """
    Read configuration from default values, settings file and CLI arguments in this order of precedence.
    Returns config as a dictionary.
    """

    # default values
    config = {
        "quad_order": 64,
        "phi_count": None,  # 2 * quad_order
        "dt_fraction": 1.0e-4,  # of t_damp
        "t_end_fraction": 1.0,  # of t_damp
        "output_stride": 1,
        "lad_samples": 10000,
        "sweep_workers": 4,
        "log_level": "WARNING",
    }

    # merge with values from settings file
    settings_file = args.settings
    if settings_file and os.path.isfile(settings_file):
        with open(settings_file) as file:
            config_from_file = yaml.safe_load(file) or {}
        if not isinstance(config_from_file, dict):
            raise ConfigError(settings_file, "settings file must be a mapping")
        for key in config_from_file:
            if key not in config:
                raise ConfigError(str(key), "unknown settings key")
        config = {**config, **config_from_file}
    elif settings_file != SETTINGS_FILE:
        raise ConfigError("settings", f"no such file {settings_file}")

    # merge with values from arguments
    for key in config:
        if getattr(args, key, None) is not None:
            config[key] = getattr(args, key)

    if args.verbose:
        config["log_level"] = "INFO"
    return validate_settings(config)


def validate_settings(config: dict) -> dict:
    """
    Check types and ranges of the merged settings. Fractions given as YAML
    text are parsed to floats.
    """
    for key in ("quad_order", "output_stride", "lad_samples", "sweep_workers"):
        value = config[key]
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise ConfigError(key, f"expected a positive integer, got {value!r}")
    phi_count = config["phi_count"]
    if phi_count is not None and (isinstance(phi_count, bool) or not isinstance(phi_count, int) or phi_count < 4):
        raise ConfigError("phi_count", f"expected null or an integer of at least 4, got {phi_count!r}")
    for key in ("dt_fraction", "t_end_fraction"):
        config[key] = positive_number(key, config[key])
    level = str(config["log_level"]).upper()
    if level not in LOG_LEVELS:
        raise ConfigError("log_level", f"expected one of {', '.join(LOG_LEVELS)}, got {config['log_level']!r}")
    config["log_level"] = level
    return config


def load_field(config_path: str, constants: Constants):
    """
    Returns the field and the optional spatial scale of its profile in cm.
    """
    try:
        document = yaml.safe_load(read_file(config_path))
    except OSError as error:
        raise ConfigError("config", f"cannot read {config_path}: {error.strerror}")
    except yaml.YAMLError as error:
        raise ConfigError("config", f"malformed document: {error}")
    if not isinstance(document, dict):
        raise ConfigError("config", "expected a flat key-value document")
    cfg = FieldConfig.from_mapping(document, constants)
    scale = document.get("field_scale_m")
    return cfg, (positive_number("field_scale_m", scale) * CM_PER_M if scale is not None else None)


def parse_vk(text: str, constants: Constants) -> ElectronState:
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError:
        raise ConfigError("vk", f"expected three comma-separated numbers, got {text!r}")
    if len(values) != 3:
        raise ConfigError("vk", f"expected three comma-separated numbers, got {text!r}")
    return ElectronState.from_si(values, constants)


def field_document(cfg: FieldConfig) -> dict:
    return {
        "E0_V_per_m": gaussian_to_si(cfg.E0),
        "omega_rad_per_s": cfg.omega,
        "polarization": cfg.polarization.value,
        "mode": cfg.mode.value,
    }


def derived_document(params: DerivedParams, constants: Constants) -> dict:
    return {
        "v0_m_s": params.v0 / CM_PER_M,
        "r0_m": params.r0 / CM_PER_M,
        "eps0_J": params.eps0 / ERG_PER_J,
        "tau_s": params.tau,
        "eta": params.eta,
        "omega_tau": params.omega_tau,
        "lambda0_m": params.lambda0 / CM_PER_M,
        "t_damp_s": params.t_damp,
        "photon_energy_ratio": params.photon_energy_ratio,
        "period_s": params.period,
        "alpha": constants.alpha,
    }


@dataclass
class RunManifest:
    command: str
    field_config: dict
    derived: dict
    input_hash: str
    version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    extra: dict = field(default_factory=dict)

    def to_document(self) -> dict:
        return dataclasses.asdict(self)


def input_hash(args: argparse.Namespace) -> str:
    digest = hashlib.sha256()
    if getattr(args, "config", None):
        digest.update(file_digest(args.config).encode())
    arguments = {key: value for key, value in sorted(vars(args).items()) if key not in ("settings", "verbose", "out")}
    digest.update(yaml.safe_dump(arguments).encode())
    return digest.hexdigest()


class Session:
    """
    Resolved inputs shared by the field-based commands.
    """

    def __init__(self, args: argparse.Namespace, settings: dict):
        self.args = args
        self.settings = settings
        self.constants = Constants.gaussian()
        self.cfg, self.field_scale_cm = load_field(args.config, self.constants)
        self.state = parse_vk(args.vk, self.constants)
        self.params = derive_params(self.cfg, self.constants)
        self.writer = ReportWriter()

    @property
    def rule(self) -> QuadratureRule:
        return QuadratureRule.gauss_legendre(self.settings["quad_order"], self.settings["phi_count"])

    def regime(self):
        return validate_regime(self.params, self.state, self.field_scale_cm)

    def manifest(self, extra: Optional[dict] = None) -> dict:
        return RunManifest(
            command=self.args.command,
            field_config=field_document(self.cfg),
            derived=derived_document(self.params, self.constants),
            input_hash=input_hash(self.args),
            extra=extra or {},
        ).to_document()

    def write_table(self, frame, extra: Optional[dict] = None):
        if not self.args.out:
            raise ConfigError("out", f"{self.args.command} needs an output path")
        self.writer.write_table(frame, self.args.out)
        self.writer.write_manifest(self.manifest(extra), self.args.out)
        logger.info(f"Wrote {self.args.out}")


def emit(document: dict):
    sys.stdout.write(ReportWriter.dump_document(document))


@logging_decorator("Derived parameters")
def cmd_derive(session: Session) -> int:
    regime = session.regime()
    document = {
        **field_document(session.cfg),
        **derived_document(session.params, session.constants),
        "regime_verdict": regime.verdict.value,
        "regime_flags": dict(regime.flags),
        "regime_warnings": dict(regime.warnings),
    }
    emit(document)
    return EXIT_REGIME_INVALID if regime.verdict is Verdict.INVALID else EXIT_OK


@logging_decorator("Radiation pattern")
def cmd_pattern(session: Session) -> int:
    regime = session.regime()
    if not regime.valid:
        raise RegimeError(regime)
    args = session.args
    pattern = radiation_pattern(
        session.state, session.cfg, session.params, grid=(args.n_theta, args.n_phi), method=args.method
    )
    session.write_table(pattern.to_frame(), extra={"pattern": pattern.metadata, "regime_verdict": regime.verdict.value})
    return EXIT_OK


@logging_decorator("Force report")
def cmd_forces(session: Session) -> int:
    report = force_report(session.state, session.cfg, session.params, session.rule, session.field_scale_cm)
    record = report.to_record()
    emit(record)
    if session.args.out:
        with open(session.args.out, "w", encoding="utf-8") as file:
            file.write(ReportWriter.dump_document(record))
        session.writer.write_manifest(session.manifest(), session.args.out)
    return EXIT_OK if report.regime.valid else EXIT_REGIME_INVALID


@logging_decorator("Trajectory")
def cmd_trajectory(session: Session) -> int:
    args, settings, params = session.args, session.settings, session.params
    dt = args.dt if args.dt is not None else settings["dt_fraction"] * params.t_damp
    t_end = args.t_end if args.t_end is not None else settings["t_end_fraction"] * params.t_damp
    trajectory = TrajectoryConfig(
        v_k=session.state.v_k,
        t_end=t_end,
        dt=dt,
        include_drag=args.drag,
        output_stride=settings["output_stride"],
        include_anomalous=not args.classical,
    )
    points = simulate(trajectory, session.cfg, params, session.constants)
    extra = {
        **guiding_center_metadata(session.cfg, params, session.constants),
        "heading_change_rad": heading_change(points),
        "work_perp_J": work_integral(points) / ERG_PER_J,
        "include_drag": args.drag,
        "include_anomalous": not args.classical,
        "dt_s": dt,
        "t_end_s": t_end,
    }
    session.write_table(trajectory_frame(points), extra=extra)
    return EXIT_OK


def sweep_values(start: float, stop: float, steps: int, linear: bool = False) -> np.ndarray:
    if steps < 2:
        raise DomainError(f"a sweep needs at least 2 steps, got {steps}")
    if not start < stop:
        raise DomainError(f"sweep start {start} must be below its end {stop}")
    if linear:
        return np.linspace(start, stop, steps)
    if not start > 0:
        raise DomainError("geometric sweeps need a positive start value")
    return np.geomspace(start, stop, steps)


def sweep_point(param: str, value: float, cfg: FieldConfig, state: ElectronState, constants: Constants) -> dict:
    """
    Closed-form observables at one sweep value. A point beyond the
    non-relativistic range is kept as an Invalid row.
    """
    try:
        if param == "E0":
            cfg = dataclasses.replace(cfg, E0=si_to_gaussian(value))
        elif param == "omega":
            cfg = dataclasses.replace(cfg, omega=value)
        else:
            direction = state.velocity / state.speed if state.speed > 0 else np.array([1.0, 0.0, 0.0])
            state = ElectronState(tuple(direction * value * CM_PER_M), constants)
        params = derive_params(cfg, constants)
    except (RelativisticInputError, DomainError) as error:
        logger.warning(f"Sweep point {param}={value:.6g} is out of range: {error}")
        row = {column: math.nan for column in SWEEP_COLUMNS}
        row.update(value=value, regime_verdict=Verdict.INVALID.value)
        return row

    perpendicular = anomalous_recoil(state, cfg, params)
    return {
        "value": value,
        "P_W": larmor_power(cfg, params, constants=constants) / ERG_PER_J,
        "tau_s": params.tau,
        "F_parallel_N": float(np.linalg.norm(classical_recoil(state, cfg, params))) / DYN_PER_N,
        "F_perp_N": float(np.linalg.norm(perpendicular)) / DYN_PER_N,
        "a_perp_m_s2": acceleration_estimate(state, cfg, params).a_perp_m_s2,
        "regime_verdict": validate_regime(params, state).verdict.value,
    }


@logging_decorator("Parameter sweep")
def cmd_sweep(session: Session) -> int:
    args = session.args
    values = sweep_values(args.start, args.stop, args.steps, args.linear)
    with ThreadPoolExecutor(max_workers=session.settings["sweep_workers"]) as executor:
        # map yields in submission order
        rows = list(
            executor.map(lambda value: sweep_point(args.param, float(value), session.cfg, session.state, session.constants), values)
        )
    session.write_table(
        pd.DataFrame(rows, columns=SWEEP_COLUMNS),
        extra={"param": args.param, "from": args.start, "to": args.stop, "steps": args.steps, "linear": args.linear},
    )
    return EXIT_OK


@logging_decorator("Verification")
def cmd_verify(args: argparse.Namespace, settings: dict) -> int:
    results = run_checks(settings["quad_order"], settings["phi_count"], lad_samples=settings["lad_samples"])
    emit(
        {
            "quad_order": settings["quad_order"],
            "checks": [
                {"name": r.name, "residual": r.residual, "tolerance": r.tolerance, "passed": r.passed} for r in results
            ],
            "passed": sum(r.passed for r in results),
            "failed": sum(not r.passed for r in results),
        }
    )
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECKS_FAILED


COMMANDS = {
    "derive": cmd_derive,
    "pattern": cmd_pattern,
    "forces": cmd_forces,
    "trajectory": cmd_trajectory,
    "sweep": cmd_sweep,
}


def run(args: argparse.Namespace, settings: dict) -> int:
    if args.command == "verify":
        return cmd_verify(args, settings)
    return COMMANDS[args.command](Session(args, settings))


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = parse_cli_args(argv)
        settings = load_config(args)
    except ConfigError as error:
        logging.basicConfig(stream=sys.stderr)
        logger.error(str(error))
        return EXIT_USAGE

    logging.basicConfig(stream=sys.stderr, level=str(settings["log_level"]).upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args, settings)
    except (RegimeError, RelativisticInputError) as error:
        logger.error(str(error))
        return EXIT_REGIME_INVALID
    except (ConfigError, DomainError) as error:
        logger.error(str(error))
        return EXIT_USAGE
    except OSError as error:
        logger.error(f"I/O error: {error}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
