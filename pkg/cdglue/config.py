"""
Numeric settings with environment overrides.

Defaults live on :class:`Settings`; any field can be overridden by a
``CDGLUE_<FIELD>`` environment variable (a ``.env`` file is honoured).
"""
import logging
import os
from contextlib import contextmanager
from contextvars import ContextVar
from functools import lru_cache
from typing import Iterator, Optional, Tuple

from dotenv import load_dotenv
from pydantic import BaseModel, Field

load_dotenv()

logger = logging.getLogger(__name__)

ENV_PREFIX = "CDGLUE_"


class Settings(BaseModel):
    """Numeric defaults shared by the engine and the command line."""
    grid_resolution: int = Field(33, ge=3)
    tolerance: float = 1e-8
    mollifier_nodes: int = Field(32, ge=8)
    # h = delta^5 unless a factor is set, then h = factor * delta^4 (factor below 1/2)
    mollifier_width_factor: Optional[float] = Field(None, gt=0.0, lt=0.5)
    profile_constant: float = Field(1.0, gt=0.0)
    profile_sign: int = 1
    # Fc = delta^(p-2) t^2 eta(t/delta)
    profile_fc_power: float = Field(4.0, ge=2.0)
    transport_resolution: int = Field(17, ge=4)
    richardson_steps: Tuple[float, float, float] = (1e-3, 5e-4, 2.5e-4)
    albi_exponent: int = Field(1, ge=1, le=2)
    workers: int = Field(1, ge=1)
    seed: int = 0
    log_level: str = "INFO"


def _from_environment() -> dict:
    overrides = {}
    for name, field in Settings.model_fields.items():
        raw = os.environ.get(ENV_PREFIX + name.upper())
        if raw is None:
            continue
        if name == "richardson_steps":
            overrides[name] = tuple(float(v) for v in raw.split(","))
        else:
            overrides[name] = raw
    if overrides:
        logger.debug("Settings overridden from environment: %s", sorted(overrides))
    return overrides


_scoped: ContextVar[Optional[Settings]] = ContextVar("cdglue_settings", default=None)


@lru_cache(maxsize=1)
def _base_settings() -> Settings:
    return Settings(**_from_environment())


def get_settings() -> Settings:
    """Settings in effect: a scoped override if one is active, else defaults plus environment."""
    return _scoped.get() or _base_settings()


@contextmanager
def override_settings(**changes) -> Iterator[Settings]:
    """Run a block with some settings replaced; the process-wide settings are untouched."""
    scoped = Settings(**{**get_settings().model_dump(), **changes})
    token = _scoped.set(scoped)
    try:
        yield scoped
    finally:
        _scoped.reset(token)
