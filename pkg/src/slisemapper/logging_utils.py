from __future__ import annotations

import json
import os
from datetime import datetime, timezone
from typing import Any, Dict, Optional

import numpy as np


def _utc_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def _plain(value: Any) -> Any:
    """Make numpy values and non-finite floats JSON-safe."""
    if isinstance(value, np.ndarray):
        value = value.tolist()
    elif isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and value != value:
        return None
    if isinstance(value, float) and value in (float("inf"), float("-inf")):
        return str(value)
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


class JsonLinesLogger:
    """Append-only NDJSON event log, one compact record per line."""

    def __init__(self, path: str) -> None:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        self.path = path

    def _write(self, record: Dict[str, Any]) -> None:
        record.setdefault("ts", _utc_iso())
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(json.dumps(_plain(record), separators=(",", ":")) + "\n")

    def start(
        self,
        *,
        command: str,
        dataset_checksum: Optional[str] = None,
        hyperparameters: Optional[Dict[str, Any]] = None,
        config: Optional[Dict[str, Any]] = None,
    ) -> None:
        record: Dict[str, Any] = {"event": "start", "command": command}
        if dataset_checksum:
            record["dataset_checksum"] = dataset_checksum
        if hyperparameters:
            record["hyperparameters"] = hyperparameters
        if config:
            record["config"] = config
        self._write(record)

    def phase(self, *, phase: str, loss: float, iterations: int, gradient_norm: float) -> None:
        self._write(
            {
                "event": "phase",
                "phase": phase,
                "loss": loss,
                "iterations": iterations,
                "gradient_norm": gradient_norm,
            }
        )

    def escape(
        self,
        *,
        round_no: int,
        relocated: int,
        loss_before: float,
        loss_after: float,
        improved: bool,
    ) -> None:
        self._write(
            {
                "event": "escape",
                "round": round_no,
                "relocated": relocated,
                "loss_before": loss_before,
                "loss_after": loss_after,
                "improved": improved,
            }
        )

    def metric(self, *, name: str, value: Optional[float], **context: Any) -> None:
        self._write({"event": "metric", "name": name, "value": value, **context})

    def completed(self, *, command: str, outputs: Dict[str, str], loss: Optional[float] = None):
        record: Dict[str, Any] = {"event": "completed", "command": command, "outputs": outputs}
        if loss is not None:
            record["loss"] = loss
        self._write(record)

    def failed(self, *, command: str, reason: str, exit_code: int) -> None:
        self._write(
            {"event": "failed", "command": command, "reason": reason, "exit_code": exit_code}
        )
