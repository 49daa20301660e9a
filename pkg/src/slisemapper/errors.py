from __future__ import annotations

from typing import Any, Dict, Optional


class SlisemapError(Exception):
    """Base error; `exit_code` is what the CLI returns for it."""

    exit_code = 1


class InputError(SlisemapError, ValueError):
    exit_code = 1


class OptimisationError(SlisemapError, RuntimeError):
    exit_code = 2

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ProvenanceError(SlisemapError):
    exit_code = 3
