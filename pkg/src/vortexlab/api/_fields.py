# SPDX-FileCopyrightText: 2025-present vortexlab contributors
# SPDX-License-Identifier: MIT

# Part of vortexlab, a numerical laboratory for nonlocal vortex energies.
# Copyright (C) 2025-present vortexlab contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this
# software and associated documentation files, to deal in the software without
# restriction, subject to the conditions of the MIT licence.  See LICENSES/MIT.txt.


"""Test fields: multi-vortex maps, constants, linear maps and sampled grids."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import StrEnum, auto
from pathlib import Path
from typing import TYPE_CHECKING, Protocol, runtime_checkable

import numpy as np
from loguru import logger
from scipy.interpolate import RegularGridInterpolator

from vortexlab.api._errors import SingularPointError

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

# Points closer than this to an atom are treated as sitting on it.
SINGULAR_RADIUS = 1e-9


class Codomains(StrEnum):
    """Where the values of a field live."""

    unit_circle = auto()
    """Values on S^1, i.e. |u| = 1."""

    plane = auto()
    """Unconstrained values in R^2."""


@dataclass(kw_only=True, frozen=True, slots=True)
class Atom:
    """A point vortex: a planar position with an integer degree."""

    position: tuple[float, float]
    degree: int


@runtime_checkable
class IField(Protocol):
    """Common interface of every field.

    Points are arrays of shape (N, d); values are arrays of shape (N, 2).  In three
    dimensions every planar field is extended to the product form u(x1, x2, x3) =
    w(x1, x2).
    """

    @property
    def codomain(self) -> Codomains:
        """Whether the values are unit vectors."""

    @property
    def atoms(self) -> tuple[Atom, ...]:
        """The singular points of the field (empty for smooth fields)."""

    @property
    def planar(self) -> bool:
        """Whether the field only depends on the first two coordinates."""

    def evaluate(self, points: ArrayLike) -> NDArray[np.float64]:
        """Return the field values at the points."""


def _as_points(points: ArrayLike) -> NDArray[np.float64]:
    array = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if array.shape[-1] not in {2, 3}:
        message = f"Points must be 2D or 3D, got shape {array.shape}"
        raise ValueError(message)
    return array


@dataclass(kw_only=True, frozen=True, slots=True)
class MultiVortex:
    """The S^1 field with phase phase + sum of degree * arg(x - position)."""

    atoms: tuple[Atom, ...]
    phase: float = 0.0

    @property
    def codomain(self) -> Codomains:
        """Always the unit circle."""
        return Codomains.unit_circle

    @property
    def planar(self) -> bool:
        """Always true."""
        return True

    def evaluate(self, points: ArrayLike) -> NDArray[np.float64]:
        """Return (cos theta, sin theta) at every point.

        Raises:
            SingularPointError: If a point lies on an atom.

        """
        planar = _as_points(points)[:, :2]
        theta = np.full(planar.shape[0], self.phase)
        for atom in self.atoms:
            offset = planar - np.asarray(atom.position)
            if np.any(np.hypot(offset[:, 0], offset[:, 1]) == 0):
                message = f"Field evaluated exactly at the atom {atom.position}"
                raise SingularPointError(message)
            theta += atom.degree * np.arctan2(offset[:, 1], offset[:, 0])
        return np.stack((np.cos(theta), np.sin(theta)), axis=-1)


@dataclass(kw_only=True, frozen=True, slots=True)
class Constant:
    """The constant field."""

    value: tuple[float, float]
    atoms: tuple[Atom, ...] = field(default=(), init=False)

    @property
    def codomain(self) -> Codomains:
        """The unit circle when |value| = 1, the plane otherwise."""
        norm = math.hypot(*self.value)
        return Codomains.unit_circle if math.isclose(norm, 1.0) else Codomains.plane

    @property
    def planar(self) -> bool:
        """Always true."""
        return True

    def evaluate(self, points: ArrayLike) -> NDArray[np.float64]:
        """Return the value at every point."""
        count = _as_points(points).shape[0]
        return np.tile(np.asarray(self.value, dtype=np.float64), (count, 1))


@dataclass(kw_only=True, frozen=True, slots=True)
class Linear:
    """The linear field u(x) = A x, with A of shape 2 x d."""

    matrix: tuple[tuple[float, ...], tuple[float, ...]]
    atoms: tuple[Atom, ...] = field(default=(), init=False)

    def __post_init__(self) -> None:
        """Validate the matrix shape."""
        widths = {len(row) for row in self.matrix}
        rows = len(self.matrix)
        if rows != 2 or len(widths) != 1 or widths - {2, 3}:  # noqa: PLR2004
            message = f"Linear fields need a 2x2 or 2x3 matrix, got: {self.matrix}"
            raise ValueError(message)

    @property
    def codomain(self) -> Codomains:
        """Always the plane."""
        return Codomains.plane

    @property
    def planar(self) -> bool:
        """Whether A has no dependence on a third coordinate."""
        return len(self.matrix[0]) == 2 or (  # noqa: PLR2004
            self.matrix[0][2] == 0 and self.matrix[1][2] == 0
        )

    def evaluate(self, points: ArrayLike) -> NDArray[np.float64]:
        """Return A x at every point."""
        array = _as_points(points)
        matrix = np.asarray(self.matrix, dtype=np.float64)
        if array.shape[1] != matrix.shape[1]:
            message = (
                f"Linear field of width {matrix.shape[1]} cannot act on points of "
                f"dimension {array.shape[1]}"
            )
            raise ValueError(message)
        return array @ matrix.T


@dataclass(kw_only=True, frozen=True, slots=True, eq=False)
class Sampled:
    """A field given by values on a regular planar grid, interpolated bilinearly.

    When `unit` is set, interpolated values are projected back onto S^1.
    """

    xs: NDArray[np.float64]
    ys: NDArray[np.float64]
    values: NDArray[np.float64]
    """Values of shape (len(xs), len(ys), 2)."""
    unit: bool = True
    atoms: tuple[Atom, ...] = field(default=(), init=False)
    _interpolator: RegularGridInterpolator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        """Validate the grid and build the interpolator."""
        if self.values.shape != (self.xs.size, self.ys.size, 2):
            message = (
                f"Sampled values of shape {self.values.shape} do not match a "
                f"{self.xs.size} x {self.ys.size} grid"
            )
            raise ValueError(message)
        # A frozen dataclass has to go through object.__setattr__.
        object.__setattr__(
            self,
            "_interpolator",
            RegularGridInterpolator(
                (self.xs, self.ys), self.values, method="linear", bounds_error=True
            ),
        )

    @property
    def spacing(self) -> float:
        """The grid step along the first axis."""
        return float(self.xs[1] - self.xs[0])

    @property
    def codomain(self) -> Codomains:
        """The unit circle when values are renormalized, the plane otherwise."""
        return Codomains.unit_circle if self.unit else Codomains.plane

    @property
    def planar(self) -> bool:
        """Always true."""
        return True

    def evaluate(self, points: ArrayLike) -> NDArray[np.float64]:
        """Return the interpolated values.

        Raises:
            ValueError: If a point is outside the grid, or if a unit field
                interpolates to 0.

        """
        planar = _as_points(points)[:, :2]
        values = np.asarray(self._interpolator(planar), dtype=np.float64)
        if not self.unit:
            return values
        norms = np.hypot(values[:, 0], values[:, 1])
        if np.any(norms == 0):
            message = "Sampled unit field interpolates to 0; cannot renormalize."
            raise SingularPointError(message)
        return values / norms[:, np.newaxis]


type Field = MultiVortex | Constant | Linear | Sampled


def single_vortex(
    center: tuple[float, float] = (0.0, 0.0), degree: int = 1
) -> MultiVortex:
    """Return the field with a single atom: ((x - c) / |x - c|)^degree."""
    return MultiVortex(atoms=(Atom(position=center, degree=degree),))


def evaluate_field(f: Field, x: ArrayLike) -> NDArray[np.float64]:
    """Return the value of `f` at the single point `x`.

    Raises:
        SingularPointError: If `x` is an atom of a vortex field.

    """
    return f.evaluate(np.asarray(x, dtype=np.float64)[np.newaxis, :])[0]


def winding_number(
    f: Field, center: tuple[float, float], radius: float, vertices: int = 360
) -> int:
    """Return the discrete winding of `f` along a polygonal circle.

    Angle increments between consecutive vertices are wrapped into (-pi, pi], so the
    result is exact as long as consecutive values are less than a half-turn apart.
    """
    angles = np.linspace(0.0, 2.0 * math.pi, vertices, endpoint=False)
    loop = np.asarray(center) + radius * np.stack(
        (np.cos(angles), np.sin(angles)), axis=-1
    )
    values = f.evaluate(loop)
    phases = np.arctan2(values[:, 1], values[:, 0])
    steps = np.diff(np.append(phases, phases[0]))
    wrapped = -np.remainder(-steps + math.pi, 2.0 * math.pi) + math.pi
    return round(float(np.sum(wrapped)) / (2.0 * math.pi))


def nudge_off_atoms(
    points: NDArray[np.float64], atoms: tuple[Atom, ...], step: float
) -> NDArray[np.float64]:
    """Move points within `SINGULAR_RADIUS` of an atom by `step` along +x1.

    The set of moved points has measure zero, and the move is deterministic.
    """
    if not atoms:
        return points
    moved = points.copy()
    for atom in atoms:
        offset = moved[:, :2] - np.asarray(atom.position)
        close = np.hypot(offset[:, 0], offset[:, 1]) < SINGULAR_RADIUS
        if np.any(close):
            logger.debug(f"Moving {int(np.sum(close))} points off atom {atom}.")
            moved[close, 0] += step
    return moved


### Spec strings ###


def _parse_atoms(text: str) -> tuple[Atom, ...]:
    atoms = []
    for chunk in text.split(";"):
        x, y, degree = chunk.split(",")
        if float(degree) != int(float(degree)):
            message = f"Vortex degrees must be integers, got: {degree}"
            raise ValueError(message)
        atoms.append(Atom(position=(float(x), float(y)), degree=int(float(degree))))
    return tuple(atoms)


def load_sampled_field(path: Path, *, unit: bool = True) -> Sampled:
    """Load a sampled field from a CSV file with the header `x,y,ux,uy`.

    The rows must cover a full regular grid, in any order.

    Raises:
        ValueError: If the file cannot be read or is not a full grid.

    """
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as e:
        message = f"Unable to read sampled field: {path}"
        raise ValueError(message) from e
    if data.shape[1] != 4:  # noqa: PLR2004
        message = f"Sampled field must have the columns x,y,ux,uy: {path}"
        raise ValueError(message)
    xs, x_index = np.unique(data[:, 0], return_inverse=True)
    ys, y_index = np.unique(data[:, 1], return_inverse=True)
    full = xs.size * ys.size == data.shape[0]
    if not full or min(xs.size, ys.size) < 2:  # noqa: PLR2004
        message = f"Sampled field rows do not form a full regular grid: {path}"
        raise ValueError(message)
    values = np.full((xs.size, ys.size, 2), np.nan)
    values[x_index, y_index] = data[:, 2:]
    logger.debug(f"Loaded a {xs.size} x {ys.size} sampled field from {path}")
    return Sampled(xs=xs, ys=ys, values=values, unit=unit)


def parse_field(spec: str) -> Field:
    """Build a field from a spec string.

    Accepted forms are `vortex:x,y,deg[;x,y,deg...]` (optionally followed by
    `@phase`), `const:ux,uy`, `linear:a11,a12,a21,a22` (or six entries for a 2x3
    matrix) and `sampled:path.csv`.

    Raises:
        ValueError: If the spec string is malformed.

    """
    kind, _, rest = spec.partition(":")
    try:
        match kind:
            case "vortex":
                atoms, _, phase = rest.partition("@")
                return MultiVortex(
                    atoms=_parse_atoms(atoms), phase=float(phase) if phase else 0.0
                )
            case "const":
                ux, uy = (float(part) for part in rest.split(","))
                return Constant(value=(ux, uy))
            case "linear":
                entries = [float(part) for part in rest.split(",")]
                width = len(entries) // 2
                if len(entries) not in {4, 6}:
                    message = "Linear fields take 4 or 6 matrix entries."
                    raise ValueError(message)  # noqa: TRY301
                return Linear(matrix=(tuple(entries[:width]), tuple(entries[width:])))
            case "sampled":
                return load_sampled_field(Path(rest))
    except ValueError as e:
        message = f"Invalid field spec: {spec}"
        raise ValueError(message) from e
    message = f"Unknown field kind: {kind}"
    raise ValueError(message)
