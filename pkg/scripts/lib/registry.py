"""Subcommand registry for discovery and dispatch."""

from dataclasses import dataclass
from typing import Callable


@dataclass(frozen=True)
class Command:
    """A named subcommand and the handler that runs it."""

    name: str
    handler: Callable[..., int]
    summary: str = ""


# Registry of available subcommands, filled by cli at import
COMMANDS: dict[str, Command] = {}


def get_command(name: str) -> Command:
    """Get a subcommand by name.

    Args:
        name: Subcommand name (e.g., "simulate", "closure")

    Returns:
        The registered command

    Raises:
        ValueError: If the subcommand name is unknown
    """
    if name not in COMMANDS:
        available = ", ".join(COMMANDS.keys())
        raise ValueError(f"Unknown command: {name}. Available commands: {available}")

    return COMMANDS[name]


def register_command(name: str, handler: Callable[..., int], summary: str = "") -> None:
    """Register a new subcommand.

    Args:
        name: Name to register the command under
        handler: Callable taking a CliConfig and returning an exit status
        summary: One-line help text
    """
    if not callable(handler):
        raise TypeError(f"{handler!r} is not callable")

    COMMANDS[name] = Command(name=name, handler=handler, summary=summary)


def list_commands() -> list[str]:
    """List all registered command names."""
    return list(COMMANDS.keys())
