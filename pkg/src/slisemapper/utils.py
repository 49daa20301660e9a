"""Shared utility functions."""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

ENV_PREFIX = "SLISEMAP_"


def load_dotenv(path: str = ".env") -> List[str]:
    """
    Read KEY=VALUE lines (optionally prefixed with `export`) into os.environ without
    overriding variables that are already set. Returns the keys that were set.
    """
    if not os.path.isfile(path):
        return []
    loaded: List[str] = []
    with open(path, encoding="utf-8") as f:
        for raw in f:
            line = raw.strip()
            if line.startswith("export "):
                line = line[len("export ") :].lstrip()
            key, sep, value = line.partition("=")
            key = key.strip()
            if line.startswith("#") or not sep or not key:
                continue
            if key not in os.environ:
                os.environ[key] = value.strip().strip("\"'")
                loaded.append(key)
    return loaded


def env(name: str, default: str) -> str:
    """Read `SLISEMAP_<name>` from the environment."""
    return os.getenv(ENV_PREFIX + name, default)


def validate_param(
    name: str,
    value: float | int | None,
    min_val: Optional[float] = None,
    max_val: Optional[float] = None,
    min_exclusive: bool = False,
) -> None:
    """
    Raise ValueError unless `value` is finite and inside [min_val, max_val]; the lower
    bound is strict with `min_exclusive`. None is accepted as "not set".
    """
    if value is None:
        return
    if isinstance(value, bool) or not np.isfinite(value):
        raise ValueError(f"{name} must be a finite number, got {value!r}")
    too_low = min_val is not None and (value <= min_val if min_exclusive else value < min_val)
    if too_low:
        op = ">" if min_exclusive else ">="
        raise ValueError(f"{name} must be {op} {min_val}, got {value}")
    if max_val is not None and value > max_val:
        raise ValueError(f"{name} must be <= {max_val}, got {value}")


def array_checksum(*arrays: np.ndarray, names: Sequence[str] = ()) -> str:
    """SHA-256 over the float64 bytes of the arrays (C order) and the names."""
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(a, dtype=np.float64)
        h.update(str(a.shape).encode("utf-8"))
        h.update(a.tobytes())
    for n in names:
        h.update(n.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()


def file_checksum(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def derive_seeds(master_seed: int, count: int) -> List[int]:
    """Independent child seeds, a pure function of (master_seed, count index)."""
    children = np.random.SeedSequence(master_seed).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]


def default_threads() -> int:
    return max(1, os.cpu_count() or 1)


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """Map preserving input order, so results do not depend on `threads`."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
