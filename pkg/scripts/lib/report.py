"""Command result envelope written to report.json and echoed on stdout."""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, Field


class CommandStatus(str, Enum):
    """Outcome of one CLI subcommand."""

    OK = "ok"
    ERROR = "error"
    NUMERIC_FAILURE = "numeric_failure"


EXIT_CODES = {
    CommandStatus.OK: 0,
    CommandStatus.ERROR: 1,
    CommandStatus.NUMERIC_FAILURE: 2,
}


class CommandReport(BaseModel):
    """Result of a subcommand run."""

    command: str = Field(description="Subcommand name (e.g., 'simulate', 'wilson')")
    status: CommandStatus = Field(default=CommandStatus.OK, description="Outcome")
    scenario: Optional[str] = Field(default=None, description="Scenario file name")
    result: dict = Field(default_factory=dict, description="Subcommand-specific payload")
    outputs: list[str] = Field(default_factory=list, description="Files written, relative to the output directory")
    error: Optional[dict] = Field(default=None, description="Machine-readable error object")

    @property
    def is_error(self) -> bool:
        """Check if the command failed."""
        return self.status != CommandStatus.OK

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        return {
            "command": self.command,
            "status": self.status.value,
            "scenario": self.scenario,
            "result": self.result,
            "outputs": self.outputs,
            "error": self.error,
            "exit_code": self.exit_code,
        }
