"""Scenario runner: trajectories of input states through an element sequence."""

import logging
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from config import DEFAULT_TOLERANCE, DEFAULT_TRACE_SAMPLES, DEFAULT_WILSON_STEPS
from errors import ClosureError, DomainError
from jones import (
    AbsorberSpec,
    PoincarePoint,
    RetarderSpec,
    element_matrix,
    jones_of_poincare,
    poincare_of_jones,
)
from lorentz import (
    LorentzMatrix,
    RotationResult,
    lorentz_of_jones,
    polar_decompose,
    reorthogonalize,
    residual_rapidity,
    rotation_axis_angle,
)
from phases import (
    ClosedSequence,
    PhaseReport,
    closure_drift,
    complete_closure,
    overall_insertion_loss_db,
    thomas_report,
    total_overall_absorption,
)

logger = logging.getLogger(__name__)

LIMIT_RETARDERS = "retarders present: dynamic phase not subtracted, no phase report"
LIMIT_NONPLANAR = "closed loop is not planar: no fixed-point poles, no phase report"
LIMIT_CLOSURE = "closure requested but the sequence contains retarders"


class ScenarioOptions(BaseModel):
    """Numerical knobs of a scenario run."""

    model_config = ConfigDict(extra="forbid")

    trace_samples: int = Field(default=DEFAULT_TRACE_SAMPLES, ge=2, description="Samples per element along each trajectory")
    wilson_steps: int = Field(default=DEFAULT_WILSON_STEPS, ge=1, description="Midpoint steps per Wilson-loop segment")
    complete_closure: bool = Field(default=False, description="Append the absorber that closes the sequence")
    tolerance: float = Field(default=DEFAULT_TOLERANCE, gt=0.0, description="Closure tolerance")


class Scenario(BaseModel):
    """An element sequence, the states sent through it, and run options."""

    elements: list[Union[AbsorberSpec, RetarderSpec]] = Field(min_length=1, description="Elements in application order")
    inputs: list[PoincarePoint] = Field(default_factory=list, description="Input polarization states")
    options: ScenarioOptions = Field(default_factory=ScenarioOptions)

    @property
    def is_pure_absorber(self) -> bool:
        return all(isinstance(e, AbsorberSpec) for e in self.elements)


class TrajectoryRecord(BaseModel):
    """One sample of one input state partway through one element."""

    model_config = ConfigDict(frozen=True)

    state_index: int = Field(ge=0)
    element_index: int = Field(ge=0)
    t: float = Field(ge=0.0, le=1.0, description="Fraction of the element applied")
    point: PoincarePoint
    intensity: float = Field(ge=0.0, description="Intensity relative to the input")

    def csv_row(self) -> list:
        return [self.state_index, self.element_index, self.t, *self.point.s, self.intensity]


class ScenarioReport(BaseModel):
    """Outcome of a scenario run; rotation and phases only when the sequence closes."""

    status: Literal["closed", "open", "degenerate"]
    elements: list[Union[AbsorberSpec, RetarderSpec]] = Field(description="Elements actually run, closing element included")
    closing_element: Optional[AbsorberSpec] = None
    rotation: Optional[RotationResult] = None
    residual_rapidity: float = Field(default=0.0, description="Rapidity of the leftover boost")
    phase: Optional[PhaseReport] = None
    final_intensities: list[float] = Field(default_factory=list)
    total_overall_absorption: float = 0.0
    total_insertion_loss_db: float = 0.0
    limitations: list[str] = Field(default_factory=list)

    @property
    def is_closed(self) -> bool:
        return self.status != "open"

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        return {
            "status": self.status,
            "elements": [e.to_dict() for e in self.elements],
            "closing_element": self.closing_element.to_dict() if self.closing_element else None,
            "rotation": self.rotation.to_dict() if self.rotation else None,
            "residual_rapidity": self.residual_rapidity,
            "phase": self.phase.to_dict() if self.phase else None,
            "final_intensities": self.final_intensities,
            "total_overall_absorption": self.total_overall_absorption,
            "total_insertion_loss_db": self.total_insertion_loss_db,
            "limitations": self.limitations,
        }


def trace_inputs(elements: list, inputs: list[PoincarePoint], samples: int) -> tuple[list[TrajectoryRecord], list[float]]:
    """Sample every input along every element with fractional elements."""
    ts = np.linspace(0.0, 1.0, samples)
    records = []
    finals = []
    for i, p in enumerate(inputs):
        state = jones_of_poincare(p).c
        intensity = 1.0
        for k, element in enumerate(elements):
            base = float(np.vdot(state, state).real)
            for t in ts:
                out = element_matrix(element.scaled(float(t))).m @ state
                records.append(
                    TrajectoryRecord(
                        state_index=i,
                        element_index=k,
                        t=float(t),
                        point=poincare_of_jones(out),
                        intensity=intensity * float(np.vdot(out, out).real) / base,
                    )
                )
            state = element_matrix(element).m @ state
            intensity *= float(np.vdot(state, state).real) / base
        finals.append(intensity)
    return records, finals


def chain_lorentz(elements: list) -> LorentzMatrix:
    """Lorentz image of the whole sequence, kept on the group at every step."""
    running = LorentzMatrix.identity()
    for element in elements:
        running = reorthogonalize(lorentz_of_jones(element_matrix(element)) @ running)
    return running


def run_scenario(s: Scenario) -> tuple[list[TrajectoryRecord], ScenarioReport]:
    """Trace every input and report the rotation (or leftover boost) of the sequence."""
    options = s.options
    elements = list(s.elements)
    limitations = []
    closing = None
    status = None

    if options.complete_closure:
        if s.is_pure_absorber:
            closing, _ = complete_closure(elements, options.tolerance)
            elements.append(closing)
        else:
            logger.warning("Cannot auto-close a sequence containing retarders")
            limitations.append(LIMIT_CLOSURE)
            status = "degenerate"

    logger.info(f"Running {len(elements)} elements on {len(s.inputs)} inputs")
    records, finals = trace_inputs(elements, s.inputs, options.trace_samples)

    product = chain_lorentz(elements)
    residual = residual_rapidity(product)
    closed = closure_drift(product.L) <= options.tolerance
    report = {
        "elements": elements,
        "closing_element": closing,
        "residual_rapidity": residual,
        "final_intensities": finals,
        "total_overall_absorption": total_overall_absorption(elements),
        "total_insertion_loss_db": overall_insertion_loss_db(elements),
    }
    if status is None and not closed:
        status = "open"
    if status is not None or not closed:
        logger.info(f"Sequence is {status}: residual boost rapidity {residual:.6g}")
        return records, ScenarioReport(status=status, limitations=limitations, **report)

    _, rotation_part = polar_decompose(product)
    rotation = rotation_axis_angle(rotation_part)
    phase = None
    status = "closed"
    if not s.is_pure_absorber:
        limitations.append(LIMIT_RETARDERS)
    else:
        try:
            seq = ClosedSequence.from_elements(elements, options.tolerance)
            if seq.degenerate:
                status = "degenerate"
                rotation = RotationResult(axis=(0.0, 0.0, 1.0), angle=0.0)
            phase = thomas_report(seq, options.trace_samples, options.tolerance)
        except DomainError:
            limitations.append(LIMIT_NONPLANAR)
        except ClosureError as exc:
            logger.warning(f"Closure check disagreed with the chained product: {exc}")
            limitations.append(str(exc))
    return records, ScenarioReport(status=status, rotation=rotation, phase=phase, limitations=limitations, **report)
