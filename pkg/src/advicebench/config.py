"""Enumeration caps, default seed and config loading."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from pathlib import Path

CAPS_ENV = "ADVICEBENCH_CAPS"
DEFAULT_SEED = 20240611


@dataclass(frozen=True)
class Caps:
    max_inputs: int = 2**20
    max_advice_bits: int = 20
    max_algorithms: int = 10**7
    max_subsets: int = 5 * 10**7
    max_verify: int = 2**20


def _overrides(raw: dict) -> dict:
    known = Caps.__dataclass_fields__
    bad = set(raw) - set(known)
    if bad:
        raise ValueError(f"unknown cap names: {sorted(bad)}")
    return {k: int(v) for k, v in raw.items()}


def load_caps(config: dict | None = None) -> Caps:
    """Defaults, then the config dict's "caps", then the environment."""
    caps = Caps()
    if config and "caps" in config:
        caps = replace(caps, **_overrides(config["caps"]))
    env = os.environ.get(CAPS_ENV)
    if env:
        caps = replace(caps, **_overrides(json.loads(env)))
    return caps


def load_config(path: str | Path | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    return data


_active: Caps | None = None


def set_caps(value: Caps | None) -> None:
    """Install caps for this process (None restores defaults plus environment)."""
    global _active
    _active = value


def caps() -> Caps:
    return _active if _active is not None else load_caps()


class CapExceeded(RuntimeError):
    """An enumeration would exceed a configured cap."""

    def __init__(self, what: str, size: int, cap: int, hint: str = ""):
        self.what, self.size, self.cap = what, size, cap
        msg = f"{what}: size {size} exceeds cap {cap}"
        super().__init__(msg + (f"; {hint}" if hint else ""))

    def as_dict(self) -> dict:
        return {"error": "cap_exceeded", "what": self.what, "size": self.size, "cap": self.cap}
