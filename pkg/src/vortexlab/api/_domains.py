# SPDX-FileCopyrightText: 2025-present vortexlab contributors
# SPDX-License-Identifier: MIT

# Part of vortexlab, a numerical laboratory for nonlocal vortex energies.
# Copyright (C) 2025-present vortexlab contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this
# software and associated documentation files, to deal in the software without
# restriction, subject to the conditions of the MIT licence.  See LICENSES/MIT.txt.


"""Bounded domains: balls, rectangles, annuli and planar-times-interval products."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Protocol, runtime_checkable

import numpy as np

from vortexlab.api._errors import OutsideDomainError

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

type Point = tuple[float, ...]
type BoundingBox = tuple[Point, Point]


@runtime_checkable
class IDomain(Protocol):
    """Common interface of every domain shape.

    All point arguments are arrays of shape (N, d) (or a single point of shape (d,)).
    Membership is closed: boundary points are members with boundary distance 0.
    """

    @property
    def dimension(self) -> int:
        """The ambient dimension d."""

    @property
    def bounding_box(self) -> BoundingBox:
        """The smallest axis-aligned box containing the closure of the domain."""

    @property
    def inradius(self) -> float:
        """The largest boundary distance of any member."""

    def contains(self, points: ArrayLike) -> NDArray[np.bool_]:
        """Return the membership flag of every point."""

    def distance_to_boundary(self, points: ArrayLike) -> NDArray[np.float64]:
        """Return the signed distance to the boundary, positive inside."""

    def shrink(self, delta: float) -> IDomain:
        """Return the subdomain at distance at least `delta` from the boundary."""


def _as_points(points: ArrayLike, dimension: int) -> NDArray[np.float64]:
    array = np.asarray(points, dtype=np.float64)
    if array.shape[-1] != dimension:
        message = f"Expected points of dimension {dimension}, got shape {array.shape}"
        raise ValueError(message)
    return array


def _check_shrink(domain: IDomain, delta: float) -> None:
    if not 0 < delta < domain.inradius:
        message = (
            f"Cannot shrink by {delta}: the margin must be positive and smaller than "
            f"the inradius {domain.inradius}."
        )
        raise ValueError(message)


@dataclass(kw_only=True, frozen=True, slots=True)
class Ball:
    """The disc of radius `radius` around `center`."""

    radius: float
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        """Validate the shape."""
        if not (math.isfinite(self.radius) and self.radius > 0):
            message = f"Ball radius must be positive, got: {self.radius}"
            raise ValueError(message)

    @property
    def dimension(self) -> int:
        """Always 2."""
        return 2

    @property
    def bounding_box(self) -> BoundingBox:
        """The square circumscribing the disc."""
        cx, cy = self.center
        r = self.radius
        return ((cx - r, cy - r), (cx + r, cy + r))

    @property
    def inradius(self) -> float:
        """The radius."""
        return self.radius

    @property
    def area(self) -> float:
        """The Lebesgue measure of the disc."""
        return math.pi * self.radius**2

    def contains(self, points: ArrayLike) -> NDArray[np.bool_]:
        """Return whether each point lies in the closed disc."""
        return self.distance_to_boundary(points) >= 0

    def distance_to_boundary(self, points: ArrayLike) -> NDArray[np.float64]:
        """Return R - |x - c|."""
        array = _as_points(points, 2)
        return self.radius - np.linalg.norm(array - np.asarray(self.center), axis=-1)

    def shrink(self, delta: float) -> Ball:
        """Return the concentric disc of radius R - delta."""
        _check_shrink(self, delta)
        return Ball(radius=self.radius - delta, center=self.center)


@dataclass(kw_only=True, frozen=True, slots=True)
class Rectangle:
    """The axis-aligned rectangle with corners `lo` and `hi`."""

    lo: tuple[float, float]
    hi: tuple[float, float]

    def __post_init__(self) -> None:
        """Validate the shape."""
        if not all(a < b for a, b in zip(self.lo, self.hi, strict=True)):
            message = (
                f"Rectangle corners must satisfy lo < hi, got: {self.lo}, {self.hi}"
            )
            raise ValueError(message)

    @property
    def dimension(self) -> int:
        """Always 2."""
        return 2

    @property
    def bounding_box(self) -> BoundingBox:
        """The rectangle itself."""
        return (self.lo, self.hi)

    @property
    def inradius(self) -> float:
        """Half of the shorter side."""
        return min(b - a for a, b in zip(self.lo, self.hi, strict=True)) / 2.0

    @property
    def area(self) -> float:
        """The Lebesgue measure of the rectangle."""
        return (self.hi[0] - self.lo[0]) * (self.hi[1] - self.lo[1])

    def contains(self, points: ArrayLike) -> NDArray[np.bool_]:
        """Return whether each point lies in the closed rectangle."""
        return self.distance_to_boundary(points) >= 0

    def distance_to_boundary(self, points: ArrayLike) -> NDArray[np.float64]:
        """Return the distance to the nearest face (negative outside)."""
        array = _as_points(points, 2)
        gaps = np.minimum(array - np.asarray(self.lo), np.asarray(self.hi) - array)
        return np.min(gaps, axis=-1)

    def shrink(self, delta: float) -> Rectangle:
        """Return the rectangle with every face moved inwards by `delta`."""
        _check_shrink(self, delta)
        return Rectangle(
            lo=(self.lo[0] + delta, self.lo[1] + delta),
            hi=(self.hi[0] - delta, self.hi[1] - delta),
        )


@dataclass(kw_only=True, frozen=True, slots=True)
class Annulus:
    """The ring inner <= |x - center| <= outer."""

    inner: float
    outer: float
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        """Validate the shape."""
        if not 0 < self.inner < self.outer:
            message = (
                f"Annulus radii must satisfy 0 < inner < outer, got: {self.inner}, "
                f"{self.outer}"
            )
            raise ValueError(message)

    @property
    def dimension(self) -> int:
        """Always 2."""
        return 2

    @property
    def bounding_box(self) -> BoundingBox:
        """The square circumscribing the outer circle."""
        cx, cy = self.center
        return ((cx - self.outer, cy - self.outer), (cx + self.outer, cy + self.outer))

    @property
    def inradius(self) -> float:
        """Half of the ring width."""
        return (self.outer - self.inner) / 2.0

    @property
    def area(self) -> float:
        """The Lebesgue measure of the ring."""
        return math.pi * (self.outer**2 - self.inner**2)

    def contains(self, points: ArrayLike) -> NDArray[np.bool_]:
        """Return whether each point lies in the closed ring."""
        return self.distance_to_boundary(points) >= 0

    def distance_to_boundary(self, points: ArrayLike) -> NDArray[np.float64]:
        """Return the smaller of the two radial gaps (negative outside)."""
        array = _as_points(points, 2)
        radii = np.linalg.norm(array - np.asarray(self.center), axis=-1)
        return np.minimum(radii - self.inner, self.outer - radii)

    def shrink(self, delta: float) -> Annulus:
        """Return the ring with both radii moved inwards by `delta`."""
        _check_shrink(self, delta)
        return Annulus(
            inner=self.inner + delta, outer=self.outer - delta, center=self.center
        )


type PlanarDomain = Ball | Rectangle | Annulus


@dataclass(kw_only=True, frozen=True, slots=True)
class Product2D:
    """The cylinder `base` x `interval` in three dimensions."""

    base: PlanarDomain
    interval: tuple[float, float]

    def __post_init__(self) -> None:
        """Validate the shape."""
        if not self.interval[0] < self.interval[1]:
            message = f"Interval must satisfy a < b, got: {self.interval}"
            raise ValueError(message)

    @property
    def dimension(self) -> int:
        """Always 3."""
        return 3

    @property
    def length(self) -> float:
        """The length of the interval factor."""
        return self.interval[1] - self.interval[0]

    @property
    def bounding_box(self) -> BoundingBox:
        """The base box times the interval."""
        lo, hi = self.base.bounding_box
        return ((*lo, self.interval[0]), (*hi, self.interval[1]))

    @property
    def inradius(self) -> float:
        """The smaller of the base inradius and half the interval length."""
        return min(self.base.inradius, self.length / 2.0)

    def contains(self, points: ArrayLike) -> NDArray[np.bool_]:
        """Return whether each point lies in the closed cylinder."""
        return self.distance_to_boundary(points) >= 0

    def distance_to_boundary(self, points: ArrayLike) -> NDArray[np.float64]:
        """Return the smaller of the base distance and the interval gaps."""
        array = _as_points(points, 3)
        axial = np.minimum(
            array[..., 2] - self.interval[0], self.interval[1] - array[..., 2]
        )
        return np.minimum(self.base.distance_to_boundary(array[..., :2]), axial)

    def shrink(self, delta: float) -> Product2D:
        """Return the base shrunk by `delta` times the shortened interval."""
        _check_shrink(self, delta)
        return Product2D(
            base=self.base.shrink(delta),
            interval=(self.interval[0] + delta, self.interval[1] - delta),
        )


type Domain = Ball | Rectangle | Annulus | Product2D


def boundary_distance(dom: Domain, x: ArrayLike) -> float:
    """Return dist(x, boundary of `dom`) for a member point `x`.

    Raises:
        OutsideDomainError: If `x` is not in the closed domain.

    """
    distance = float(dom.distance_to_boundary(x))
    if distance < 0:
        message = f"Point {np.asarray(x).tolist()} is outside the domain {dom}"
        raise OutsideDomainError(message)
    return distance


def shrink(dom: Domain, delta: float) -> Domain:
    """Return the subdomain at distance at least `delta` from the boundary of `dom`.

    Raises:
        ValueError: If `delta` is not positive or not smaller than the inradius.

    """
    return dom.shrink(delta)


def parse_domain(spec: str) -> Domain:
    """Build a domain from a spec string.

    Accepted forms are `ball:R`, `ball:R,cx,cy`, `rect:lx,ly`, `rect:x0,y0,x1,y1`,
    `annulus:r,R` and `cyl:R,h`.

    Raises:
        ValueError: If the spec string is malformed.

    """
    kind, _, rest = spec.partition(":")
    try:
        numbers = [float(part) for part in rest.split(",")]
        domain: Domain | None = None
        match kind, len(numbers):
            case "ball", 1:
                domain = Ball(radius=numbers[0])
            case "ball", 3:
                domain = Ball(radius=numbers[0], center=(numbers[1], numbers[2]))
            case "rect", 2:
                domain = Rectangle(lo=(0.0, 0.0), hi=(numbers[0], numbers[1]))
            case "rect", 4:
                domain = Rectangle(
                    lo=(numbers[0], numbers[1]), hi=(numbers[2], numbers[3])
                )
            case "annulus", 2:
                domain = Annulus(inner=numbers[0], outer=numbers[1])
            case "cyl", 2:
                domain = Product2D(
                    base=Ball(radius=numbers[0]), interval=(0.0, numbers[1])
                )
    except ValueError as e:
        message = f"Invalid domain spec: {spec}"
        raise ValueError(message) from e
    if domain is None:
        message = f"Invalid domain spec: {spec}"
        raise ValueError(message)
    return domain
