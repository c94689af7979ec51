"""Command-line front end: scenario files in, report.json and trajectory.csv out."""

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path
from typing import Callable, Literal, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from errors import (
    ClosureError,
    ConsistencyError,
    DegenerateSequenceError,
    DomainError,
    ScenarioError,
)
from jones import AbsorberSpec, PoincarePoint, RetarderSpec, angles_from_stokes, stokes_from_angles
from phases import (
    ClosedSequence,
    complete_closure,
    fixed_point_phase,
    insertion_loss_db,
    m_element_rotation,
    sequence_loop,
    thomas_report,
)
from registry import get_command, list_commands, register_command
from report import CommandReport, CommandStatus
from sim import Scenario, ScenarioOptions, run_scenario
from wilson import compare_loop

logger = logging.getLogger(__name__)

AXIS_NORM_WARNING = 1e-6
CSV_HEADER = ["state_index", "element_index", "t", "s1", "s2", "s3", "intensity"]
REPORT_FILE = "report.json"
TRAJECTORY_FILE = "trajectory.csv"


class SphereAngles(BaseModel):
    """Axis given by its latitude 2chi and longitude 2psi, in degrees."""

    model_config = ConfigDict(extra="forbid")

    two_chi_deg: float
    two_psi_deg: float


AxisEntry = Union[tuple[float, float, float], SphereAngles]


class ElementEntry(BaseModel):
    """One element as written in a scenario file."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["absorber", "retarder"]
    axis: AxisEntry
    alpha: Optional[float] = Field(default=None, description="Relative absorption (nepers)")
    alpha0: Optional[float] = Field(default=None, description="Overall absorption (nepers)")
    delta_deg: Optional[float] = Field(default=None, description="Retardance (degrees)")


class ScenarioFile(BaseModel):
    """Top-level schema of a scenario file."""

    model_config = ConfigDict(extra="forbid")

    elements: list[ElementEntry] = Field(min_length=1)
    inputs: list[AxisEntry] = Field(default_factory=list)
    options: ScenarioOptions = Field(default_factory=ScenarioOptions)


class CliConfig(BaseModel):
    """Resolved command-line invocation."""

    subcommand: Literal["simulate", "closure", "wilson", "phase"]
    scenario_path: Path
    output_dir: Path = Field(default=Path("."))
    wilson_steps: Optional[int] = Field(default=None, ge=1)
    trace_samples: Optional[int] = Field(default=None, ge=2)
    tolerance: Optional[float] = Field(default=None, gt=0.0)
    close: bool = False

    def overrides(self) -> dict:
        """CLI values that take precedence over the scenario's options."""
        out = {
            "wilson_steps": self.wilson_steps,
            "trace_samples": self.trace_samples,
            "tolerance": self.tolerance,
        }
        out = {k: v for k, v in out.items() if v is not None}
        if self.close:
            out["complete_closure"] = True
        return out


def _field_path(loc: Sequence) -> str:
    return ".".join(str(part) for part in loc) or "<root>"


def _parse_axis(path: str, field: str, entry: AxisEntry) -> PoincarePoint:
    if isinstance(entry, SphereAngles):
        return stokes_from_angles(entry.two_chi_deg, entry.two_psi_deg)
    v = np.asarray(entry, dtype=float)
    norm = float(np.linalg.norm(v))
    if not math.isfinite(norm) or norm == 0.0:
        raise ScenarioError(path, field, "axis must be a nonzero finite vector")
    if abs(norm - 1.0) > AXIS_NORM_WARNING:
        logger.warning(f"{path}: {field}: axis norm {norm:.9g} is not 1; normalizing")
    return PoincarePoint.from_vector(v)


def _parse_element(path: str, index: int, entry: ElementEntry) -> Union[AbsorberSpec, RetarderSpec]:
    field = f"elements.{index}"
    axis = _parse_axis(path, f"{field}.axis", entry.axis)
    if entry.kind == "absorber":
        if entry.alpha is None:
            raise ScenarioError(path, f"{field}.alpha", "absorber needs alpha")
        if entry.delta_deg is not None:
            raise ScenarioError(path, f"{field}.delta_deg", "absorber does not take delta_deg")
        try:
            return AbsorberSpec(axis=axis, alpha=entry.alpha, alpha0=entry.alpha0 or 0.0)
        except ValidationError as exc:
            err = exc.errors()[0]
            raise ScenarioError(path, f"{field}.{_field_path(err['loc'])}", err["msg"]) from exc
    if entry.delta_deg is None:
        raise ScenarioError(path, f"{field}.delta_deg", "retarder needs delta_deg")
    if entry.alpha is not None or entry.alpha0 is not None:
        raise ScenarioError(path, f"{field}.alpha", "retarder does not take alpha")
    return RetarderSpec(axis=axis, delta=math.radians(entry.delta_deg))


def parse_scenario_file(path: Union[str, Path]) -> Scenario:
    """Load and validate a JSON scenario file; angles in degrees become radians."""
    path = Path(path)
    name = str(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ScenarioError(name, "<file>", f"cannot read: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(name, "<file>", f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ScenarioError(name, "<root>", "scenario must be a JSON object")

    try:
        parsed = ScenarioFile.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        raise ScenarioError(name, _field_path(err["loc"]), err["msg"]) from exc

    elements = [_parse_element(name, k, e) for k, e in enumerate(parsed.elements)]
    inputs = [_parse_axis(name, f"inputs.{k}", p) for k, p in enumerate(parsed.inputs)]
    logger.debug(f"Loaded {name}: {len(elements)} elements, {len(inputs)} inputs")
    return Scenario(elements=elements, inputs=inputs, options=parsed.options)


def load_scenario(config: CliConfig) -> Scenario:
    """Parse the scenario and apply CLI overrides to its options."""
    scenario = parse_scenario_file(config.scenario_path)
    options = scenario.options.model_copy(update=config.overrides())
    return scenario.model_copy(update={"options": options})


FLOAT_FORMAT = "#.17g"


def format_float(value: float) -> str:
    """Fixed 17 significant digits, trailing zeros kept."""
    if not math.isfinite(value):
        raise ValueError(f"Out of range float values are not JSON compliant: {value!r}")
    return format(value, FLOAT_FORMAT)


def dumps_fixed(value, level: int = 0) -> str:
    """json.dumps(indent=2, sort_keys=True) with every float at 17 significant digits."""
    if value is None or isinstance(value, (bool, str)):
        return json.dumps(value)
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, int):
        return str(value)
    pad, inner = "  " * level, "  " * (level + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps_fixed(value[k], level + 1)}" for k in sorted(value)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [inner + dumps_fixed(v, level + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def write_json(path: Path, payload: dict) -> None:
    """Write with sorted keys and 17-significant-digit floats, LF line endings."""
    path.write_text(dumps_fixed(payload) + "\n", encoding="utf-8", newline="\n")


def write_trajectory(path: Path, records: list) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for record in records:
            writer.writerow([format_float(v) if isinstance(v, float) else v for v in record.csv_row()])


def _closed_elements(scenario: Scenario) -> tuple[list[AbsorberSpec], Optional[AbsorberSpec]]:
    elements = list(scenario.elements)
    if not scenario.is_pure_absorber:
        raise DomainError("This command needs a pure absorber sequence")
    if scenario.options.complete_closure:
        closing, seq = complete_closure(elements, scenario.options.tolerance)
        return list(seq.elements), closing
    return elements, None


def _simulate(config: CliConfig, scenario: Scenario) -> tuple[dict, list[str]]:
    records, report = run_scenario(scenario)
    write_trajectory(config.output_dir / TRAJECTORY_FILE, records)
    result = report.to_dict()
    result["final_insertion_loss_db"] = [insertion_loss_db(i) for i in report.final_intensities]
    result["trajectory_rows"] = len(records)
    return result, [TRAJECTORY_FILE]


def _axis_dict(axis: PoincarePoint) -> dict:
    two_chi, two_psi = angles_from_stokes(axis)
    return {"s": list(axis.s), "two_chi_deg": two_chi, "two_psi_deg": two_psi}


def _closure(config: CliConfig, scenario: Scenario) -> tuple[dict, list[str]]:
    if not scenario.is_pure_absorber:
        raise DomainError("Closure needs a pure absorber sequence")
    closing, seq = complete_closure(list(scenario.elements), scenario.options.tolerance)
    result = {
        "closing_element": {**closing.to_dict(), "axis": _axis_dict(closing.axis)},
        "rotation": m_element_rotation(seq.elements, scenario.options.tolerance).to_dict(),
        "sequence": seq.to_dict(),
    }
    axes = [e.axis.vector for e in scenario.elements]
    if len(axes) == 2:
        result["coplanarity"] = abs(float(np.dot(closing.axis.vector, np.cross(axes[0], axes[1]))))
    return result, []


def _wilson(config: CliConfig, scenario: Scenario) -> tuple[dict, list[str]]:
    elements, closing = _closed_elements(scenario)
    loop = sequence_loop(elements, scenario.options.tolerance)
    comparison = compare_loop(loop, scenario.options.wilson_steps)
    result = comparison.to_dict()
    result["loop"] = loop.to_dict()
    result["closing_element"] = closing.to_dict() if closing else None
    return result, []


def _phase(config: CliConfig, scenario: Scenario) -> tuple[dict, list[str]]:
    elements, closing = _closed_elements(scenario)
    seq = ClosedSequence.from_elements(elements, scenario.options.tolerance)
    report = thomas_report(seq, scenario.options.trace_samples, scenario.options.tolerance)
    result = report.to_dict()
    result["closing_element"] = closing.to_dict() if closing else None
    if report.fixed_point is not None:
        result["fixed_point_phase_deg"] = math.degrees(fixed_point_phase(seq, report.fixed_point))
    return result, []


def _execute(config: CliConfig, body: Callable[[CliConfig, Scenario], tuple[dict, list[str]]]) -> int:
    """Run one subcommand body, map errors to status, write report.json, echo it."""
    report = CommandReport(command=config.subcommand, scenario=config.scenario_path.name)
    writable = True
    try:
        config.output_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        writable = False
        report = report.model_copy(
            update={"status": CommandStatus.ERROR, "error": {"error": f"Cannot create output directory: {exc}", "kind": "io"}}
        )
    if writable:
        try:
            scenario = load_scenario(config)
            result, outputs = body(config, scenario)
            report = report.model_copy(update={"result": result, "outputs": outputs + [REPORT_FILE]})
        except (ClosureError, ConsistencyError) as exc:
            logger.error(str(exc))
            report = report.model_copy(
                update={"status": CommandStatus.NUMERIC_FAILURE, "error": exc.to_dict(), "outputs": [REPORT_FILE]}
            )
        except ScenarioError as exc:
            report = report.model_copy(update={"status": CommandStatus.ERROR, "error": exc.to_dict()})
        except DegenerateSequenceError as exc:
            report = report.model_copy(update={"status": CommandStatus.ERROR, "error": {"error": str(exc), "kind": "degenerate"}})
        except (DomainError, ValidationError) as exc:
            report = report.model_copy(update={"status": CommandStatus.ERROR, "error": {"error": str(exc), "kind": "domain"}})
        if not report.is_error or report.status == CommandStatus.NUMERIC_FAILURE:
            write_json(config.output_dir / REPORT_FILE, report.to_dict())

    print(dumps_fixed(report.to_dict()))
    return report.exit_code


def cmd_simulate(config: CliConfig) -> int:
    """Trace the scenario inputs and write report.json and trajectory.csv."""
    return _execute(config, _simulate)


def cmd_closure(config: CliConfig) -> int:
    """Append the closing absorber and report its axis, rapidity and the rotation."""
    return _execute(config, _closure)


def cmd_wilson(config: CliConfig) -> int:
    """Compare the path-ordered integral with the exact boost product."""
    return _execute(config, _wilson)


def cmd_phase(config: CliConfig) -> int:
    """Report rotation, solid angle and pole phases of a closed sequence."""
    return _execute(config, _phase)


register_command("simulate", cmd_simulate, "Trace input states through the element sequence")
register_command("closure", cmd_closure, "Find the absorber that closes the sequence")
register_command("wilson", cmd_wilson, "Wilson-loop integral against the exact rotation")
register_command("phase", cmd_phase, "Thomas rotation, solid angle and Pancharatnam phases")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Optical Thomas rotation: Jones calculus meets the Lorentz group")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in list_commands():
        p = sub.add_parser(name, help=get_command(name).summary)
        p.add_argument("scenario", help="Path to a JSON scenario file")
        p.add_argument("--out", default=".", help="Output directory (default: current directory)")
        p.add_argument("--steps", type=int, help="Wilson-loop steps per segment")
        p.add_argument("--samples", type=int, help="Trajectory samples per element")
        p.add_argument("--tol", type=float, help="Closure tolerance")
        p.add_argument("--close", action="store_true", help="Append the auto-closing absorber")
        p.add_argument("--verbose", "-v", action="count", default=0, help="-v for progress, -vv for debug detail on stderr")
    return parser


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        config = CliConfig(
            subcommand=args.subcommand,
            scenario_path=Path(args.scenario),
            output_dir=Path(args.out),
            wilson_steps=args.steps,
            trace_samples=args.samples,
            tolerance=args.tol,
            close=args.close,
        )
    except ValidationError as exc:
        err = exc.errors()[0]
        print(json.dumps({"error": f"--{_field_path(err['loc'])}: {err['msg']}", "kind": "usage"}), file=sys.stdout)
        return 1
    return get_command(config.subcommand).handler(config)
