# SPDX-FileCopyrightText: 2025-present vortexlab contributors
# SPDX-License-Identifier: MIT

# Part of vortexlab, a numerical laboratory for nonlocal vortex energies.
# Copyright (C) 2025-present vortexlab contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this
# software and associated documentation files, to deal in the software without
# restriction, subject to the conditions of the MIT licence.  See LICENSES/MIT.txt.


"""Run configuration of the built-in experiments."""

from __future__ import annotations

import hashlib
import json
import tomllib
from enum import StrEnum
from pathlib import Path
from typing import TYPE_CHECKING, Any, Self, cast

from loguru import logger
from pydantic import ConfigDict, Field, TypeAdapter, field_validator, model_validator
from pydantic.dataclasses import dataclass

from vortexlab.api import parse_cutoff, parse_domain, parse_field, parse_kernel

if TYPE_CHECKING:
    from collections.abc import Callable

__all__ = ["ExperimentIds", "RunConfig", "config_hash", "load_run_configs"]

type JSONSerializableTypes = (
    str | int | float | bool | None | list[JSONSerializableTypes]
)


class ExperimentIds(StrEnum):
    """The built-in experiments."""

    # NOTE: Cannot use auto() here since that makes all values lower case.

    E1 = "E1"
    """Exactness of the quadrature for linear fields."""

    E2 = "E2"
    """Planar single-vortex sweep against the Gamma-limit constant."""

    E3 = "E3"
    """Discrete XY energy of the sampled single vortex."""

    E4 = "E4"
    """Vortex extraction and flat convergence of a dipole."""

    E5 = "E5"
    """Matching flat norm against exhaustive enumeration."""

    E6 = "E6"
    """Axis-aligned against rotated discretizations."""

    E7 = "E7"
    """Product vortex in three dimensions."""

    E8 = "E8"
    """Randomized inequality suite."""


def _check_spec(parse: Callable[[str], Any], spec: str) -> str:
    try:
        parse(spec)
    except (ValueError, TypeError) as e:
        message = f"Invalid specification: {spec}"
        raise ValueError(message) from e
    return spec


@dataclass(
    config=ConfigDict(
        revalidate_instances="always",
        extra="forbid",
        validate_default=True,
        frozen=True,
    ),
    kw_only=True,
    slots=True,
)
class RunConfig:
    """Everything that determines one experiment run.

    The spec strings use the formats of [parse_kernel][vortexlab.api.parse_kernel],
    [parse_domain][vortexlab.api.parse_domain] and
    [parse_field][vortexlab.api.parse_field].

    Note:
        Instances of this class are immutable and validated on creation.

    """

    experiment: ExperimentIds

    kernel: str = "indicator:1"
    domain: str = "ball:1"
    field: str = "vortex:0,0,1"
    """The field under test; ignored by experiments that build their own."""

    target: str | None = None
    """Target vortex current as a `vortex:` spec; None means the atoms of `field`."""

    cutoff: str = "log_log"
    """Core cutoff rule of the upper-bound sweeps."""

    eps_list: tuple[float, ...] = ()
    """Length scales, strictly decreasing, all in (0, 1)."""

    grid_factor: float = Field(default=8.0, ge=4.0)
    """The x-grid step is eps / grid_factor."""

    radial_nodes: int = Field(default=64, ge=1, le=4096)
    angular_nodes: int = Field(default=64, ge=1, le=4096)
    axial_nodes: int = Field(default=16, ge=1, le=4096)

    margins: tuple[float, ...] = (0.1, 0.2)
    """Boundary margins delta of the convergence check."""

    threshold: float = Field(default=0.5, gt=0.0, le=1.0)
    """Minimum cluster mass of the vortex extraction, as a fraction of pi."""

    rotation_degrees: float = Field(default=30.0, ge=-180.0, le=180.0)

    offset: tuple[float, float] = (0.5, 0.5)
    """Lattice translation z of the sampled discretizations."""

    bracket: tuple[float, float] = (0.7, 1.7)
    """Closed interval every ratio must fall in."""

    tolerance: float = Field(default=1e-3, gt=0.0)

    samples: int = Field(default=200, ge=1)
    """Number of random instances of the randomized experiments."""

    seed: int = Field(default=0, ge=0)

    record_timing: bool = False
    """Record wall times; off by default so reports are byte-identical."""

    output_dir: Path = Path("reports")

    def to_dict(self) -> dict[str, JSONSerializableTypes]:
        """Export the configuration as a dictionary of JSON-compatible values.

        `RunConfig(**cfg.to_dict())` rebuilds an equal configuration.
        """
        config_dict = cast(
            "dict[str, JSONSerializableTypes]",
            TypeAdapter(self.__class__).dump_python(self, mode="json"),
        )
        logger.debug(f"RunConfig dictionary created: {config_dict!s}")
        return config_dict

    @field_validator("kernel", mode="after")
    @classmethod
    def _validate_kernel(cls, kernel: str) -> str:
        return _check_spec(parse_kernel, kernel)

    @field_validator("domain", mode="after")
    @classmethod
    def _validate_domain(cls, domain: str) -> str:
        return _check_spec(parse_domain, domain)

    @field_validator("field", "target", mode="after")
    @classmethod
    def _validate_field(cls, field: str | None) -> str | None:
        return None if field is None else _check_spec(parse_field, field)

    @field_validator("cutoff", mode="after")
    @classmethod
    def _validate_cutoff(cls, cutoff: str) -> str:
        return _check_spec(parse_cutoff, cutoff)

    @field_validator("eps_list", mode="after")
    @classmethod
    def _validate_eps_list(cls, eps_list: tuple[float, ...]) -> tuple[float, ...]:
        if not all(0.0 < eps < 1.0 for eps in eps_list):
            message = f"Every eps must lie in (0, 1), got: {list(eps_list)}"
            raise ValueError(message)
        if any(a <= b for a, b in zip(eps_list, eps_list[1:], strict=False)):
            message = f"eps_list must be strictly decreasing, got: {list(eps_list)}"
            raise ValueError(message)
        return eps_list

    @field_validator("margins", mode="after")
    @classmethod
    def _validate_margins(cls, margins: tuple[float, ...]) -> tuple[float, ...]:
        if not margins or min(margins) <= 0:
            message = f"Margins must be positive and nonempty, got: {list(margins)}"
            raise ValueError(message)
        return margins

    @model_validator(mode="after")
    def _validate_bracket(self) -> Self:
        """Validate that the bracket is a proper interval."""
        low, high = self.bracket
        if not low < high:
            message = f"Invalid bracket: {self.bracket}"
            raise ValueError(message)
        return self


def config_hash(cfg: RunConfig) -> str:
    """Return the SHA-256 of the canonical JSON form of `cfg`."""
    canonical = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_run_configs(path: Path) -> list[RunConfig]:
    """Read a TOML file with one table per run, keyed by experiment ID.

    Example:
        ```toml
        [E2]
        eps_list = [0.02, 0.01, 0.005]
        bracket = [0.7, 1.7]
        ```

    Raises:
        ValueError: If the file is unreadable, is not valid TOML, or holds an invalid
            run table.

    """
    try:
        with path.open("rb") as stream:
            document = tomllib.load(stream)
    except (OSError, tomllib.TOMLDecodeError) as e:
        message = f"Unable to read run configuration: {path}"
        raise ValueError(message) from e
    configs = []
    for key, table in document.items():
        if not isinstance(table, dict):
            message = f"Expected a table per experiment, got a value for: {key}"
            raise ValueError(message)  # noqa: TRY004
        configs.append(RunConfig(experiment=key, **table))
    logger.debug(f"Loaded {len(configs)} run configurations from {path}")
    return configs
