"""Single exception type carrying a machine-readable error code."""

from __future__ import annotations

from typing import Any


class GraphError(Exception):
    """Raised for invalid inputs, unsupported requests and failed preconditions.

    `code` is a stable identifier (e.g. "DANGLING_ENDPOINT", "T_NOT_ACYCLIC");
    `context` holds the offending elements so callers can report them.
    """

    def __init__(self, code: str, message: str, **context: Any):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.context = context
