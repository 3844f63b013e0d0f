# SPDX-FileCopyrightText: 2025-present vortexlab contributors
# SPDX-License-Identifier: MIT

# Part of vortexlab, a numerical laboratory for nonlocal vortex energies.
# Copyright (C) 2025-present vortexlab contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this
# software and associated documentation files, to deal in the software without
# restriction, subject to the conditions of the MIT licence.  See LICENSES/MIT.txt.


"""Radial interaction kernels and their moments."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import StrEnum, auto
from pathlib import Path
from typing import TYPE_CHECKING, Final

import numpy as np
from loguru import logger
from scipy import integrate

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from numpy.typing import ArrayLike, NDArray

SUPPORTED_DIMENSIONS: Final = frozenset({2, 3})

# Surface measure of the unit sphere S^(d-1).
_SPHERE_AREA: Final = {2: 2.0 * math.pi, 3: 4.0 * math.pi}


class KernelKinds(StrEnum):
    """The built-in kernel profile families."""

    indicator = auto()
    """rho(t) = 1 on [0, T], 0 beyond."""

    triangle = auto()
    """rho(t) = max(1 - t/T, 0)."""

    gauss = auto()
    """rho(t) = exp(-t^2 / (2 sigma^2)) on [0, T], 0 beyond."""

    table = auto()
    """Tabulated (t, rho) pairs with linear interpolation, 0 beyond the last knot."""


@dataclass(kw_only=True, frozen=True, slots=True)
class QuadratureSpec:
    """Settings for the adaptive radial quadrature (`scipy.integrate.quad`).

    Note:
        Instances of this class are immutable once created.

    """

    tolerance: float = 1e-8
    """Absolute error target of each piece."""

    max_subdivisions: int = 50
    """Subinterval budget after which the integrand is declared non-integrable."""

    def __post_init__(self) -> None:
        """Validate the settings."""
        if not self.tolerance > 0:
            message = f"Quadrature tolerance must be positive, got: {self.tolerance}"
            raise ValueError(message)
        if self.max_subdivisions < 1:
            message = (
                "Quadrature subdivisions must be at least 1, got: "
                f"{self.max_subdivisions}"
            )
            raise ValueError(message)


@dataclass(kw_only=True, frozen=True, slots=True)
class Kernel:
    """A nonnegative radial profile with compact support.

    The evaluated profile is `amplitude * base(t / dilation)` where `base` is the
    profile of `kind` with support `[0, support]`.  Dilation and amplitude default to
    1 and are only changed by
    [rescaled][vortexlab.api.Kernel.rescaled].

    Note:
        Instances of this class are immutable once created.  Use the factory functions
        ([indicator_kernel][vortexlab.api.indicator_kernel], etc.) to build them.

    """

    kind: KernelKinds
    """The profile family."""

    support: float
    """Support radius of the undilated profile."""

    sigma: float | None = None
    """Standard deviation, only for Gaussian profiles."""

    knots: tuple[tuple[float, float], ...] = ()
    """(t, rho) pairs, only for tabulated profiles."""

    dilation: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        """Validate the profile parameters."""
        if not (math.isfinite(self.support) and self.support > 0):
            message = f"Kernel support must be positive, got: {self.support}"
            raise ValueError(message)
        if not (self.dilation > 0 and self.amplitude > 0):
            message = "Kernel dilation and amplitude must be positive."
            raise ValueError(message)
        if self.kind is KernelKinds.gauss and not (
            self.sigma is not None and self.sigma > 0
        ):
            message = f"Gaussian kernels need a positive sigma, got: {self.sigma}"
            raise ValueError(message)
        if self.kind is KernelKinds.table:
            _validate_knots(self.knots)

    @property
    def support_radius(self) -> float:
        """The radius T beyond which the profile is exactly 0."""
        return self.support * self.dilation

    @property
    def lower_bound(self) -> tuple[float, float] | None:
        """A pair (rho0, r0) with rho >= rho0 > 0 on [0, r0], or None if rho(0) = 0."""
        match self.kind:
            case KernelKinds.indicator:
                bound = (1.0, self.support)
            case KernelKinds.triangle:
                bound = (0.5, self.support / 2.0)
            case KernelKinds.gauss:
                sigma = _sigma_of(self.sigma)
                bound = (math.exp(-(self.support**2) / (2.0 * sigma**2)), self.support)
            case KernelKinds.table:
                table_bound = _table_lower_bound(self.knots)
                if table_bound is None:
                    return None
                bound = table_bound
        return (bound[0] * self.amplitude, bound[1] * self.dilation)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Points of [0, T] where the profile may fail to be smooth."""
        if self.kind is KernelKinds.table:
            return tuple(t * self.dilation for t, _ in self.knots)
        return (0.0, self.support_radius)

    def __call__(self, t: ArrayLike) -> NDArray[np.float64]:
        """Evaluate the profile at every entry of `t` (vectorized)."""
        radii = np.asarray(t, dtype=np.float64)
        if np.any(radii < 0):
            message = "Kernel profiles are only defined for t >= 0."
            raise ValueError(message)
        scaled = radii / self.dilation
        inside = scaled <= self.support
        match self.kind:
            case KernelKinds.indicator:
                values = np.ones_like(scaled)
            case KernelKinds.triangle:
                values = 1.0 - scaled / self.support
            case KernelKinds.gauss:
                sigma = _sigma_of(self.sigma)
                values = np.exp(-(scaled**2) / (2.0 * sigma**2))
            case KernelKinds.table:
                ts, rhos = zip(*self.knots, strict=True)
                values = np.interp(scaled, ts, rhos, right=0.0)
        return np.where(inside, self.amplitude * values, 0.0)

    def rescaled(self, s: float, d: int) -> Kernel:
        """Return the kernel t -> rho(t/s) / s^(d+2).

        The second moment in dimension `d` is unchanged by this rescaling.
        """
        _check_dimension(d)
        if not s > 0:
            message = f"Rescaling factor must be positive, got: {s}"
            raise ValueError(message)
        return replace(
            self, dilation=self.dilation * s, amplitude=self.amplitude / s ** (d + 2)
        )

    def satisfies_normalization(self, d: int) -> bool:
        """Whether rho(|xi|) >= rho0 on the whole cube [-1, 1]^d for some rho0 > 0."""
        _check_dimension(d)
        bound = self.lower_bound
        return bound is not None and bound[1] >= math.sqrt(d)

    def normalization_scale(self, d: int) -> float | None:
        """The dilation that would make the normalization hold, or None if impossible.

        Kernels are never rescaled behind the caller's back; this only reports the
        factor.
        """
        _check_dimension(d)
        bound = self.lower_bound
        if bound is None:
            return None
        return math.sqrt(d) / bound[1]


def _sigma_of(sigma: float | None) -> float:
    """Narrow an optional sigma that validation already guaranteed."""
    if sigma is None:  # pragma: no cover
        message = "Gaussian kernel without sigma."
        raise ValueError(message)
    return sigma


def _check_dimension(d: int) -> None:
    if d not in SUPPORTED_DIMENSIONS:
        message = f"Only dimensions 2 and 3 are supported, got: {d}"
        raise ValueError(message)


def _validate_knots(knots: Sequence[tuple[float, float]]) -> None:
    if len(knots) < 2:  # noqa: PLR2004
        message = "A tabulated kernel needs at least two knots."
        raise ValueError(message)
    ts = np.array([t for t, _ in knots], dtype=np.float64)
    rhos = np.array([rho for _, rho in knots], dtype=np.float64)
    if not (np.all(np.isfinite(ts)) and np.all(np.isfinite(rhos))):
        message = "Tabulated kernel knots must be finite."
        raise ValueError(message)
    if ts[0] != 0.0 or np.any(np.diff(ts) <= 0):
        message = "Tabulated kernel knots must start at t=0 and strictly increase."
        raise ValueError(message)
    if np.any(rhos < 0):
        message = "Tabulated kernel values must be nonnegative."
        raise ValueError(message)


def _table_lower_bound(
    knots: Sequence[tuple[float, float]],
) -> tuple[float, float] | None:
    # Piecewise linear, so the minimum over a run of positive knots is at a knot.
    rhos = [rho for _, rho in knots]
    if rhos[0] <= 0:
        return None
    last = 0
    while last + 1 < len(knots) and rhos[last + 1] > 0:
        last += 1
    if last == 0:
        return (rhos[0] / 2.0, knots[1][0] / 2.0)
    return (min(rhos[: last + 1]), knots[last][0])


### Factories ###


def indicator_kernel(support: float = 1.0) -> Kernel:
    """Return the indicator kernel of [0, support]."""
    return Kernel(kind=KernelKinds.indicator, support=support)


def triangle_kernel(support: float = 1.0) -> Kernel:
    """Return the triangular kernel max(1 - t/support, 0)."""
    return Kernel(kind=KernelKinds.triangle, support=support)


def gauss_kernel(sigma: float, support: float = 1.0) -> Kernel:
    """Return the Gaussian kernel with deviation `sigma`, truncated at `support`."""
    return Kernel(kind=KernelKinds.gauss, support=support, sigma=sigma)


def table_kernel(ts: Sequence[float], rhos: Sequence[float]) -> Kernel:
    """Return a kernel interpolating the (t, rho) pairs linearly.

    Raises:
        ValueError: If the pairs do not start at t=0, are not strictly increasing in t
            or hold negative values.

    """
    if len(ts) != len(rhos):
        message = "Kernel table columns must have the same length."
        raise ValueError(message)
    knots = tuple((float(t), float(rho)) for t, rho in zip(ts, rhos, strict=True))
    _validate_knots(knots)
    return Kernel(kind=KernelKinds.table, support=knots[-1][0], knots=knots)


def load_table_kernel(path: Path) -> Kernel:
    """Load a tabulated kernel from a CSV file with the header `t,rho`."""
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as e:
        message = f"Unable to read kernel table: {path}"
        raise ValueError(message) from e
    if data.shape[1] != 2:  # noqa: PLR2004
        message = f"Kernel table must have exactly two columns: {path}"
        raise ValueError(message)
    return table_kernel(data[:, 0].tolist(), data[:, 1].tolist())


def parse_kernel(spec: str) -> Kernel:
    """Build a kernel from a spec string.

    Accepted forms are `indicator:T`, `triangle:T`, `gauss:sigma:T` and
    `table:path.csv`.

    Raises:
        ValueError: If the spec string is malformed.

    """
    kind, _, rest = spec.partition(":")
    try:
        match kind:
            case "indicator":
                return indicator_kernel(float(rest))
            case "triangle":
                return triangle_kernel(float(rest))
            case "gauss":
                sigma, support = rest.split(":")
                return gauss_kernel(float(sigma), float(support))
            case "table":
                return load_table_kernel(Path(rest))
    except ValueError as e:
        message = f"Invalid kernel spec: {spec}"
        raise ValueError(message) from e
    message = f"Unknown kernel kind: {kind}"
    raise ValueError(message)


### Moments ###


def evaluate(k: Kernel, t: float) -> float:
    """Return rho(t), exactly 0 for t > T.

    Raises:
        ValueError: If `t` is negative.

    """
    return float(k(t))


def second_moment(
    k: Kernel, d: int, quadrature: QuadratureSpec | None = None
) -> float:
    """Return the integral of rho(|xi|)|xi|^2 over R^d.

    The integral is reduced to the radial integral of rho(r) r^(d+1) over [0, T], taken
    piece by piece between the profile breakpoints with `scipy.integrate.quad`, times
    the area of the unit sphere.

    Raises:
        ValueError: If `d` is not 2 or 3, or if the quadrature does not converge.

    """
    _check_dimension(d)
    quadrature = quadrature or QuadratureSpec()

    def integrand(r: float) -> float:
        return float(k(r)) * r ** (d + 1)

    points = sorted(set(k.breakpoints))
    radial = math.fsum(
        _radial_integral(integrand, lo, hi, quadrature)
        for lo, hi in zip(points, points[1:], strict=False)
    )
    moment = _SPHERE_AREA[d] * radial
    logger.debug(f"Second moment of {k.kind} kernel in d={d}: {moment}")
    return moment


def gamma_limit_constant(
    k: Kernel, d: int, quadrature: QuadratureSpec | None = None
) -> float:
    """Return the limit constant C_rho = (2 pi / d) * second_moment(k, d)."""
    return 2.0 * math.pi / d * second_moment(k, d, quadrature)


def _radial_integral(
    func: Callable[[float], float], lo: float, hi: float, quadrature: QuadratureSpec
) -> float:
    result = integrate.quad(
        func,
        lo,
        hi,
        epsabs=quadrature.tolerance,
        epsrel=0.0,
        limit=quadrature.max_subdivisions,
        full_output=1,
    )
    # QUADPACK appends a message when it gives up.
    if len(result) > 3 or not math.isfinite(result[0]):  # noqa: PLR2004
        message = "Non-integrable kernel profile: radial quadrature did not converge."
        raise ValueError(message)
    return float(result[0])
