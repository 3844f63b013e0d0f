# SPDX-FileCopyrightText: 2025-present vortexlab contributors
# SPDX-License-Identifier: MIT

# Part of vortexlab, a numerical laboratory for nonlocal vortex energies.
# Copyright (C) 2025-present vortexlab contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this
# software and associated documentation files, to deal in the software without
# restriction, subject to the conditions of the MIT licence.  See LICENSES/MIT.txt.


"""Nonlocal energies: the vortex-scaled energy, the BBM energy and their oracles.

The production evaluator works in the xi-form

    F = scale * sum_xi w_xi rho(|xi|) sum_x h^d |u(x + eps xi) - u(x)|^2,

where x runs over a midpoint grid of step h and only pairs with both points in the
localization set are counted.  The pairwise oracle sums the same functional directly
over (x, y) grid pairs found with a k-d tree.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from enum import StrEnum, auto
from typing import TYPE_CHECKING, Final, Self

import numpy as np
from loguru import logger
from pydantic import ConfigDict, Field
from pydantic import dataclass as pydantic_dataclass
from pydantic import model_validator
from scipy import integrate
from scipy.spatial import cKDTree

from vortexlab._utils import fixed_chunks, ordered_map
from vortexlab.api._domains import (
    Annulus,
    Ball,
    Domain,
    PlanarDomain,
    Product2D,
    Rectangle,
)
from vortexlab.api._errors import InfeasibleGridError
from vortexlab.api._fields import IField, nudge_off_atoms, single_vortex
from vortexlab.api._kernels import Kernel, gamma_limit_constant
from vortexlab.api._lattice import discretize
from vortexlab.api._reports import SweepReport, SweepRow

if TYPE_CHECKING:
    from collections.abc import Sequence

    from numpy.typing import NDArray

DEFAULT_GRID_FACTOR: Final = 8.0
PAIRWISE_NODE_LIMIT: Final = 100_000

# Bytes per grid node: coordinates, values, shifted copies and masks.
_BYTES_PER_NODE: Final = 96


class Scalings(StrEnum):
    """The normalization applied to the double integral."""

    vortex = auto()
    """Divide by eps^(d+2) |log eps|."""

    bbm = auto()
    """Divide by eps^(d+2)."""


class CutoffKinds(StrEnum):
    """Families of core radii r_eps used by the upper-bound sweep."""

    log_log = auto()
    """r = eps * log|log eps|."""

    power = auto()
    """r = eps^a with 0 < a < 1."""

    multiple = auto()
    """r = c * eps with c > 0."""


@dataclass(kw_only=True, frozen=True, slots=True)
class CutoffRule:
    """A rule for the core radius r_eps around a vortex."""

    kind: CutoffKinds = CutoffKinds.log_log
    parameter: float = 0.5
    """The exponent for `power`, the factor for `multiple`; unused for `log_log`."""

    def __post_init__(self) -> None:
        """Validate the parameter."""
        if self.kind is CutoffKinds.power and not 0 < self.parameter < 1:
            message = f"Power cutoffs need an exponent in (0, 1), got: {self.parameter}"
            raise ValueError(message)
        if self.kind is CutoffKinds.multiple and not self.parameter > 0:
            message = f"Multiple cutoffs need a positive factor, got: {self.parameter}"
            raise ValueError(message)

    def radius(self, eps: float) -> float:
        """Return r_eps.

        Raises:
            ValueError: If the rule gives no positive radius at this eps.

        """
        match self.kind:
            case CutoffKinds.log_log:
                radius = eps * math.log(abs(math.log(eps)))
            case CutoffKinds.power:
                radius = eps**self.parameter
            case CutoffKinds.multiple:
                radius = self.parameter * eps
        if not radius > 0:
            message = f"Cutoff {self.kind} gives no positive radius at eps={eps}"
            raise ValueError(message)
        return radius


def parse_cutoff(spec: str) -> CutoffRule:
    """Build a cutoff rule from `log_log`, `power:a` or `multiple:c`."""
    kind, _, parameter = spec.partition(":")
    try:
        if parameter:
            return CutoffRule(kind=CutoffKinds(kind), parameter=float(parameter))
        return CutoffRule(kind=CutoffKinds(kind))
    except ValueError as e:
        message = f"Invalid cutoff spec: {spec}"
        raise ValueError(message) from e


@pydantic_dataclass(
    config=ConfigDict(
        revalidate_instances="always",
        extra="forbid",
        validate_default=True,
        frozen=True,
    ),
    kw_only=True,
    slots=True,
)
class EnergySpec:
    """Everything that determines an energy evaluation except the field.

    Note:
        Instances of this class are immutable and validated on creation.

    """

    kernel: Kernel
    domain: Domain
    epsilon: float = Field(gt=0.0, lt=1.0)
    """The interaction length; strictly between 0 and 1 so that |log eps| > 0."""

    scaling: Scalings = Scalings.vortex

    grid_step: float | None = Field(default=None, gt=0.0)
    """The x-grid step h; None means eps / 8."""

    localization: Domain | None = None
    """The set V of the localized energy; None means the whole domain."""

    radial_nodes: int = Field(default=64, ge=1, le=4096)
    angular_nodes: int = Field(default=64, ge=1, le=4096)
    axial_nodes: int = Field(default=16, ge=1, le=4096)
    """Nodes along the third xi-axis, only used in three dimensions."""

    max_nodes: int = Field(default=50_000_000, ge=1)
    """Grid sizes beyond this are rejected as infeasible."""

    @property
    def h(self) -> float:
        """The effective x-grid step."""
        if self.grid_step is None:
            return self.epsilon / DEFAULT_GRID_FACTOR
        return self.grid_step

    @property
    def region(self) -> Domain:
        """The set over which both points of a pair must lie."""
        return self.localization if self.localization is not None else self.domain

    @property
    def scale(self) -> float:
        """The factor in front of the xi-form sum: 1/eps^2, times 1/|log eps|."""
        factor = 1.0 / self.epsilon**2
        if self.scaling is Scalings.vortex:
            factor /= abs(math.log(self.epsilon))
        return factor

    @model_validator(mode="after")
    def _validate_grid(self) -> Self:
        """Validate the grid step and the localization."""
        if self.h > self.epsilon / 4.0 * (1.0 + 1e-12):
            message = (
                f"Grid step {self.h} is too coarse for eps={self.epsilon}; "
                "it must be at most eps / 4."
            )
            raise ValueError(message)
        if self.region.dimension != self.domain.dimension:
            message = "The localization must have the dimension of the domain."
            raise ValueError(message)
        planar_region = not isinstance(self.region, Product2D)
        if self.domain.dimension == 3 and planar_region:  # noqa: PLR2004
            message = "Three-dimensional energies need a Product2D localization."
            raise ValueError(message)
        return self


@dataclass(kw_only=True, frozen=True, slots=True)
class EnergyEvaluation:
    """The value of an energy plus the size of the quadrature behind it."""

    value: float
    grid_step: float
    nodes: int
    """Number of x-grid nodes inside the localization set."""
    quadrature_nodes: int
    """Number of xi-quadrature nodes with nonzero kernel weight."""


@dataclass(kw_only=True, frozen=True, slots=True)
class PairwiseEvaluation:
    """The pairwise double sum together with its ordered and unordered forms."""

    value: float
    ordered_sum: float
    unordered_sum: float
    nodes: int
    pairs: int


### Grids ###


def _axis_nodes(lo: float, hi: float, h: float) -> NDArray[np.float64]:
    count = math.ceil((hi - lo) / h - 1e-9)
    nodes = lo + (np.arange(count) + 0.5) * h
    return nodes[nodes <= hi]


def midpoint_grid(region: PlanarDomain, h: float) -> NDArray[np.float64]:
    """Return the midpoint nodes of step `h` of the bounding box inside `region`."""
    (x0, y0), (x1, y1) = region.bounding_box
    xs, ys = _axis_nodes(x0, x1, h), _axis_nodes(y0, y1, h)
    grid = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
    return grid[region.contains(grid)]


def _estimate_nodes(region: Domain, h: float) -> int:
    lo, hi = region.bounding_box
    return math.prod(math.ceil((b - a) / h) for a, b in zip(lo, hi, strict=True))


def _check_feasible(region: Domain, h: float, limit: int) -> None:
    estimate = _estimate_nodes(region, h)
    if estimate > limit:
        estimated_bytes = estimate * _BYTES_PER_NODE
        message = (
            f"Grid of about {estimate} nodes (about {estimated_bytes / 2**30:.1f} GiB) "
            f"exceeds the limit of {limit} nodes; increase the grid step or shrink "
            "the domain."
        )
        raise InfeasibleGridError(
            message, nodes=estimate, estimated_bytes=estimated_bytes
        )


def polar_nodes(
    kernel: Kernel, radial: int, angular: int
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Return planar xi-nodes and weights for the integral of rho(|xi|) g(xi) dxi.

    Midpoints in radius and angle over a half-turn; the weights are doubled because
    xi and -xi contribute the same inner sum.  Nodes with rho = 0 are dropped.
    """
    dr = kernel.support_radius / radial
    dphi = math.pi / angular
    radii = (np.arange(radial) + 0.5) * dr
    angles = (np.arange(angular) + 0.5) * dphi
    r, phi = (a.ravel() for a in np.meshgrid(radii, angles, indexing="ij"))
    weights = 2.0 * kernel(r) * r * dr * dphi
    keep = weights > 0
    nodes = np.stack((r * np.cos(phi), r * np.sin(phi)), axis=-1)
    return nodes[keep], weights[keep]


### xi-form evaluator ###


def _planar_sums(
    field: IField,
    region: PlanarDomain,
    points: NDArray[np.float64],
    shifts: NDArray[np.float64],
    h: float,
) -> NDArray[np.float64]:
    """Return, per shift s, the sum over x of |u(x + s) - u(x)|^2 with x, x + s in V."""
    values = field.evaluate(nudge_off_atoms(points, field.atoms, h / 2.0))

    def chunk_sums(chunk: range) -> NDArray[np.float64]:
        sums = np.zeros(len(chunk))
        for slot, index in enumerate(chunk):
            shifted = points + shifts[index]
            inside = region.contains(shifted)
            if not np.any(inside):
                continue
            moved = field.evaluate(
                nudge_off_atoms(shifted[inside], field.atoms, h / 2.0)
            )
            sums[slot] = np.sum((moved - values[inside]) ** 2)
        return sums

    parts = ordered_map(chunk_sums, fixed_chunks(shifts.shape[0]))
    return np.concatenate(parts) if parts else np.zeros(0)


def evaluate_energy(spec: EnergySpec, field: IField) -> EnergyEvaluation:
    """Evaluate the energy of `field` and report the quadrature size.

    The result is bit-identical for any thread count: the xi-nodes are split into
    fixed chunks and the per-node sums are reduced in node order.

    Raises:
        InfeasibleGridError: If the x-grid has more than `spec.max_nodes` nodes.
        ValueError: If a three-dimensional field is not of product form.

    """
    region = spec.region
    if isinstance(region, Product2D):
        return _evaluate_product(spec, field, region)
    _check_feasible(region, spec.h, spec.max_nodes)
    points = midpoint_grid(region, spec.h)
    nodes, weights = polar_nodes(spec.kernel, spec.radial_nodes, spec.angular_nodes)
    sums = _planar_sums(field, region, points, spec.epsilon * nodes, spec.h)
    value = float(np.sum(weights * sums)) * spec.h**2 * spec.scale
    logger.debug(
        f"Energy at eps={spec.epsilon}: {value} ({points.shape[0]} x-nodes, "
        f"{nodes.shape[0]} xi-nodes)"
    )
    return EnergyEvaluation(
        value=value,
        grid_step=spec.h,
        nodes=points.shape[0],
        quadrature_nodes=nodes.shape[0],
    )


def _evaluate_product(
    spec: EnergySpec, field: IField, region: Product2D
) -> EnergyEvaluation:
    # u(x', x3) = w(x'), so the x3-sum only counts nodes whose shift stays in the
    # interval and the planar sum is shared by every axial node of a xi-column.
    if not field.planar:
        message = "Three-dimensional energies need a field of product form."
        raise ValueError(message)
    _check_feasible(region, spec.h, spec.max_nodes)
    points = midpoint_grid(region.base, spec.h)
    a, b = region.interval
    axial = _axis_nodes(a, b, spec.h)
    support = spec.kernel.support_radius
    ds = support / spec.radial_nodes
    dphi = math.pi / spec.angular_nodes
    radii = (np.arange(spec.radial_nodes) + 0.5) * ds
    angles = (np.arange(spec.angular_nodes) + 0.5) * dphi
    r, phi = (a.ravel() for a in np.meshgrid(radii, angles, indexing="ij"))
    planar_nodes = np.stack((r * np.cos(phi), r * np.sin(phi)), axis=-1)
    # Axial factor per radius: sum_k dzeta rho(sqrt(s^2 + zeta_k^2)) h #{x3 kept}.
    factors = np.zeros(spec.radial_nodes)
    for i, s in enumerate(radii):
        half = math.sqrt(max(support**2 - s**2, 0.0))
        dzeta = 2.0 * half / spec.axial_nodes
        zetas = -half + (np.arange(spec.axial_nodes) + 0.5) * dzeta
        rho = spec.kernel(np.hypot(s, zetas))
        shifted = axial[np.newaxis, :] + spec.epsilon * zetas[:, np.newaxis]
        kept = np.sum((shifted >= a) & (shifted <= b), axis=1)
        factors[i] = float(np.sum(dzeta * rho * spec.h * kept))
    radial_weight = 2.0 * ds * dphi * np.repeat(radii * factors, spec.angular_nodes)
    keep = radial_weight > 0
    sums = _planar_sums(
        field, region.base, points, spec.epsilon * planar_nodes[keep], spec.h
    )
    value = float(np.sum(radial_weight[keep] * sums)) * spec.h**2 * spec.scale
    nodes = points.shape[0] * axial.size
    logger.debug(
        f"Product energy at eps={spec.epsilon}: {value} ({nodes} x-nodes, "
        f"{int(np.sum(keep))} xi-columns)"
    )
    return EnergyEvaluation(
        value=value,
        grid_step=spec.h,
        nodes=nodes,
        quadrature_nodes=int(np.sum(keep)) * spec.axial_nodes,
    )


def energy(spec: EnergySpec, f: IField) -> float:
    """Return the quadrature value of the energy of `f`.

    Raises:
        InfeasibleGridError: If the x-grid is too large.

    """
    return evaluate_energy(spec, f).value


### Pairwise oracle ###


def _full_grid(region: Domain, h: float) -> NDArray[np.float64]:
    if isinstance(region, Product2D):
        planar = midpoint_grid(region.base, h)
        axial = _axis_nodes(*region.interval, h)
        return np.column_stack(
            (np.repeat(planar, axial.size, axis=0), np.tile(axial, planar.shape[0]))
        )
    return midpoint_grid(region, h)


def evaluate_energy_pairwise(
    spec: EnergySpec, field: IField, max_nodes: int = PAIRWISE_NODE_LIMIT
) -> PairwiseEvaluation:
    """Evaluate the energy by the direct double sum over grid pairs within eps * T.

    Raises:
        InfeasibleGridError: If the grid has more than `max_nodes` nodes.

    """
    region = spec.region
    _check_feasible(region, spec.h, max_nodes)
    points = _full_grid(region, spec.h)
    if points.shape[0] > max_nodes:
        message = f"Pairwise oracle is limited to {max_nodes} nodes."
        raise InfeasibleGridError(
            message,
            nodes=points.shape[0],
            estimated_bytes=points.shape[0] * _BYTES_PER_NODE,
        )
    values = field.evaluate(nudge_off_atoms(points, field.atoms, spec.h / 2.0))
    tree = cKDTree(points)
    pairs = tree.query_pairs(
        r=spec.epsilon * spec.kernel.support_radius, output_type="ndarray"
    )
    first, second = pairs[:, 0], pairs[:, 1]
    distances = np.linalg.norm(points[first] - points[second], axis=-1)
    terms = spec.kernel(distances / spec.epsilon) * np.sum(
        (values[first] - values[second]) ** 2, axis=-1
    )
    unordered = float(np.sum(terms))
    # Both orientations of every pair, as in the double integral.
    ordered = float(np.sum(np.concatenate((terms, terms))))
    d = points.shape[1]
    value = ordered * spec.h ** (2 * d) * spec.scale / spec.epsilon**d
    logger.debug(
        f"Pairwise energy at eps={spec.epsilon}: {value} ({points.shape[0]} nodes, "
        f"{pairs.shape[0]} pairs)"
    )
    return PairwiseEvaluation(
        value=value,
        ordered_sum=ordered,
        unordered_sum=unordered,
        nodes=points.shape[0],
        pairs=pairs.shape[0],
    )


def energy_pairwise_oracle(
    spec: EnergySpec, f: IField, max_nodes: int = PAIRWISE_NODE_LIMIT
) -> float:
    """Return the energy of `f` computed by the pairwise double sum."""
    return evaluate_energy_pairwise(spec, f, max_nodes).value


### References ###


def bbm_linear_reference(
    kernel: Kernel, matrix: Sequence[Sequence[float]], rect: Rectangle, eps: float
) -> float:
    """Return the exact BBM energy of x -> A x on a rectangle.

    For a linear field the energy is the integral of rho(|xi|) |A xi|^2 times the
    overlap area (l1 - eps|xi1|)(l2 - eps|xi2|), computed here by adaptive polar
    quadrature over one quadrant (the cross term of |A xi|^2 is odd and drops out).
    """
    gram = np.asarray(matrix, dtype=np.float64).T @ np.asarray(matrix, dtype=np.float64)
    if gram.shape != (2, 2):
        message = "The linear reference needs a 2x2 matrix."
        raise ValueError(message)
    sides = (rect.hi[0] - rect.lo[0], rect.hi[1] - rect.lo[1])

    def integrand(r: float, phi: float) -> float:
        c, s = math.cos(phi), math.sin(phi)
        overlap = max(sides[0] - eps * r * c, 0.0) * max(sides[1] - eps * r * s, 0.0)
        quadratic = gram[0, 0] * c * c + gram[1, 1] * s * s
        return float(kernel(r)) * r**3 * quadratic * overlap

    points = sorted(set(kernel.breakpoints))
    total = math.fsum(
        integrate.dblquad(
            integrand, 0.0, math.pi / 2.0, lo, hi, epsabs=1e-13, epsrel=1e-11
        )[0]
        for lo, hi in zip(points, points[1:], strict=False)
    )
    return 4.0 * total


def upper_bound_report(  # noqa: PLR0913
    k: Kernel,
    dom: Domain,
    eps_list: Sequence[float],
    cutoff: CutoffRule | None = None,
    *,
    grid_factor: float = DEFAULT_GRID_FACTOR,
    radial_nodes: int = 64,
    angular_nodes: int = 64,
    axial_nodes: int = 16,
    core_excised: bool = True,
    record_timing: bool = False,
) -> SweepReport:
    """Sweep the energy of the centred single vortex against C_rho times its mass.

    Every row carries the extras `r_eps`, `predicted` (|log r_eps| / |log eps|) and,
    when `core_excised` is set, `core_ratio`: the energy localized to the domain
    minus the core disc of radius r_eps, over the same reference.

    Raises:
        ValueError: If `dom` is not a ball or a ball-based cylinder, or if `eps_list`
            is not strictly decreasing.

    """
    base = dom.base if isinstance(dom, Product2D) else dom
    if not isinstance(base, Ball):
        message = "The upper-bound sweep needs a Ball or a Ball-based Product2D."
        raise ValueError(message)  # noqa: TRY004
    if any(a <= b for a, b in zip(eps_list, eps_list[1:], strict=False)):
        message = f"eps_list must be strictly decreasing, got: {list(eps_list)}"
        raise ValueError(message)
    cutoff = cutoff or CutoffRule()
    field = single_vortex(base.center)
    mass = dom.length if isinstance(dom, Product2D) else 1.0
    reference = gamma_limit_constant(k, dom.dimension) * mass
    rows = []
    for eps in eps_list:
        start = time.perf_counter()
        spec = EnergySpec(
            kernel=k,
            domain=dom,
            epsilon=eps,
            grid_step=eps / grid_factor,
            radial_nodes=radial_nodes,
            angular_nodes=angular_nodes,
            axial_nodes=axial_nodes,
        )
        value = energy(spec, field)
        r_eps = cutoff.radius(eps)
        extras = [("r_eps", r_eps), ("predicted", math.log(r_eps) / math.log(eps))]
        if core_excised and r_eps < base.radius:
            ring: Domain = Annulus(inner=r_eps, outer=base.radius, center=base.center)
            if isinstance(dom, Product2D):
                ring = Product2D(base=ring, interval=dom.interval)
            core_spec = EnergySpec(
                kernel=k,
                domain=dom,
                epsilon=eps,
                grid_step=eps / grid_factor,
                localization=ring,
                radial_nodes=radial_nodes,
                angular_nodes=angular_nodes,
                axial_nodes=axial_nodes,
            )
            extras.append(("core_ratio", energy(core_spec, field) / reference))
        wall_ms = (time.perf_counter() - start) * 1e3 if record_timing else 0.0
        rows.append(
            SweepRow(
                eps=eps,
                value=value,
                reference=reference,
                wall_ms=wall_ms,
                extras=tuple(extras),
            )
        )
        logger.debug(f"Upper-bound row at eps={eps}: ratio {value / reference}")
    return SweepReport(rows=tuple(rows))


### Jensen cell inequality ###


def jensen_cell_gaps(
    f: IField,
    dom: PlanarDomain,
    eps: float,
    direction: int = 0,
    points_per_side: int = 4,
) -> NDArray[np.float64]:
    """Return the slack of the Jensen inequality on every admissible lattice cell.

    For each cell Q = eps(k + [0,1]^2) such that Q and Q + eps e lie inside `dom`, the
    slack is the quadrature value of the integral over Q of |u(x + eps e) - u(x)|^2
    minus eps^2 |I(u)(k + e) - I(u)(k)|^2, where I(u) is
    [discretize][vortexlab.api.discretize] with the same uniform m x m midpoint rule.
    Every entry is nonnegative up to rounding.

    Raises:
        ValueError: If `direction` is not 0 or 1, or eps is not below the inradius.

    """
    if direction not in {0, 1}:
        message = f"Direction must be 0 or 1, got: {direction}"
        raise ValueError(message)
    m = points_per_side
    lattice = discretize(f, dom, eps, points_per_side=m, refined_points_per_side=m)
    head: list[slice] = [slice(None), slice(None)]
    tail: list[slice] = [slice(None), slice(None)]
    head[direction], tail[direction] = slice(None, -1), slice(1, None)
    admissible = lattice.interior[tuple(head)] & lattice.interior[tuple(tail)]
    if not np.any(admissible):
        return np.zeros(0)
    values = lattice.values
    jumps = values[tuple(tail)][admissible] - values[tuple(head)][admissible]
    lhs = eps**2 * np.sum(jumps**2, axis=-1)
    corners = np.argwhere(admissible) + lattice.origin
    offsets = (np.arange(m) + 0.5) / m
    local = np.stack(np.meshgrid(offsets, offsets, indexing="ij"), axis=-1).reshape(
        -1, 2
    )
    step = np.zeros(2)
    step[direction] = eps
    points = eps * (corners[:, np.newaxis, :] + local[np.newaxis, :, :])
    nudge = eps / (2.0 * m)
    flat = f.evaluate(nudge_off_atoms(points.reshape(-1, 2), f.atoms, nudge))
    moved = f.evaluate(nudge_off_atoms((points + step).reshape(-1, 2), f.atoms, nudge))
    diff = (moved - flat).reshape(points.shape[0], m * m, 2)
    rhs = eps**2 * np.mean(np.sum(diff**2, axis=-1), axis=1)
    logger.debug(
        f"Jensen gaps on {rhs.size} cells at eps={eps} in direction {direction}"
    )
    return rhs - lhs
