# SPDX-FileCopyrightText: 2025-present vortexlab contributors
# SPDX-License-Identifier: MIT

# Part of vortexlab, a numerical laboratory for nonlocal vortex energies.
# Copyright (C) 2025-present vortexlab contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this
# software and associated documentation files, to deal in the software without
# restriction, subject to the conditions of the MIT licence.  See LICENSES/MIT.txt.


"""Jacobian measures, atomic vortex currents and their flat norms."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from enum import StrEnum, auto
from typing import TYPE_CHECKING, Final

import numpy as np
from loguru import logger
from scipy import ndimage
from scipy.optimize import linear_sum_assignment

from vortexlab._utils import cross2d, ordered_map
from vortexlab.api._domains import Annulus, Ball, Rectangle
from vortexlab.api._errors import DegreeUndefinedError, OutsideDomainError
from vortexlab.api._fields import Atom
from vortexlab.api._lattice import discretize

if TYPE_CHECKING:
    from collections.abc import Sequence

    from numpy.typing import NDArray

    from vortexlab.api._domains import Domain, PlanarDomain
    from vortexlab.api._fields import IField
    from vortexlab.api._lattice import LatticeField

MAX_UNIT_CHARGES_PER_ATOM: Final = 20
EXHAUSTIVE_CHARGE_LIMIT: Final = 8
SEED_FRACTION: Final = 0.02
MERGE_RADIUS: Final = 2
QUANTIZATION_SLACK: Final = 0.25
_ANTIPODAL_TOLERANCE: Final = 1e-12


### Atomic currents ###


@dataclass(kw_only=True, frozen=True, slots=True)
class AtomicCurrent:
    """The measure pi * sum_l d_l delta_(x_l) of finitely many point vortices.

    Degrees are stored as integers; the factor pi is applied when norms are taken.
    """

    atoms: tuple[Atom, ...] = ()

    def __post_init__(self) -> None:
        """Validate the degrees."""
        if any(atom.degree == 0 for atom in self.atoms):
            message = "Atomic currents only hold atoms with nonzero degree."
            raise ValueError(message)

    @property
    def mass(self) -> int:
        """The mass sum_l |d_l| of the integer current."""
        return sum(abs(atom.degree) for atom in self.atoms)

    @property
    def degrees(self) -> tuple[int, ...]:
        """The degrees in increasing order."""
        return tuple(sorted(atom.degree for atom in self.atoms))


### Jacobian measures ###


@dataclass(kw_only=True, frozen=True, slots=True, eq=False)
class JacobianMeasure:
    """Per-cell masses of the Jacobian of a piecewise-affine planar interpolant.

    Cell j (a 2-index into `masses`) is the lattice cell with base node origin + j.
    """

    spacing: float
    frame: NDArray[np.float64]
    offset: NDArray[np.float64]
    origin: NDArray[np.int64]
    masses: NDArray[np.float64]
    """Signed cell masses; NaN for cells that are not fully populated."""
    variation: NDArray[np.float64]
    """Sum of the absolute simplex masses of every cell (0 when unpopulated)."""
    populated: NDArray[np.bool_]
    skipped: int
    """Cells with some, but not all, corners populated."""

    @property
    def total(self) -> float:
        """The sum of all cell masses."""
        return float(np.sum(self.masses[self.populated]))

    @property
    def total_variation(self) -> float:
        """The total variation of the Jacobian density."""
        return float(np.sum(self.variation[self.populated]))

    @property
    def cell_radius(self) -> float:
        """Half of the cell diagonal: every cell point is this close to its centre."""
        basis = self.spacing * self.frame
        return 0.5 * max(
            float(np.linalg.norm(basis[:, 0] + basis[:, 1])),
            float(np.linalg.norm(basis[:, 0] - basis[:, 1])),
        )

    def cell_centres(self) -> NDArray[np.float64]:
        """Return the physical centre of every cell, shape (*masses.shape, 2)."""
        indices = np.moveaxis(np.indices(self.masses.shape), 0, -1) + self.origin
        return (indices + self.offset + 0.5) @ (self.spacing * self.frame).T

    def restricted(self, U: PlanarDomain) -> JacobianMeasure:  # noqa: N803
        """Return the measure restricted to the cells with all four corners in `U`."""
        basis = self.spacing * self.frame
        indices = np.moveaxis(np.indices(self.masses.shape), 0, -1) + self.origin
        keep = self.populated.copy()
        for corner in itertools.product((0.0, 1.0), repeat=2):
            keep &= U.contains((indices + self.offset + corner) @ basis.T)
        return replace(
            self,
            masses=np.where(keep, self.masses, np.nan),
            variation=np.where(keep, self.variation, 0.0),
            populated=keep,
        )

    def block_total(self, lo: Sequence[int], hi: Sequence[int]) -> float:
        """Return the total mass of the cells with base nodes lo <= k < hi."""
        first = np.asarray(lo) - self.origin
        last = np.asarray(hi) - self.origin
        block = self.masses[first[0] : last[0], first[1] : last[1]]
        return float(np.sum(block))


def _frame_sign(frame: NDArray[np.float64]) -> float:
    return float(np.sign(np.linalg.det(frame)))


def _corner_window(
    values: NDArray[np.float64], corner: Sequence[int]
) -> NDArray[np.float64]:
    n1, n2 = values.shape[:2]
    return values[corner[0] : n1 - 1 + corner[0], corner[1] : n2 - 1 + corner[1]]


def jacobian_measure(lf: LatticeField) -> JacobianMeasure:
    """Return the cell masses of the Jacobian of the interpolant of `lf`.

    On a triangle with vertex values a, b, c the interpolant has the Jacobian
    integral 1/2 cross(b - a, c - a), signed by the orientation of the triangle.  A
    cell's mass is the sum over its two triangles.

    Raises:
        ValueError: If the lattice is not planar.

    """
    if lf.dimension != 2:  # noqa: PLR2004
        message = "Jacobian measures are only implemented in two dimensions."
        raise ValueError(message)
    mesh = lf.mesh
    complete = lf.cell_populated()
    touched = np.zeros_like(complete)
    for corner in itertools.product((0, 1), repeat=2):
        touched |= _corner_window(lf.populated, corner)
    values = np.nan_to_num(lf.values)
    sign = _frame_sign(lf.frame)
    masses = np.zeros(complete.shape)
    variation = np.zeros(complete.shape)
    for chain, orientation in zip(mesh.simplices, mesh.orientations, strict=True):
        a, b, c = (_corner_window(values, vertex) for vertex in chain)
        simplex_mass = 0.5 * sign * orientation * cross2d(b - a, c - a)
        masses += simplex_mass
        variation += np.abs(simplex_mass)
    skipped = int(np.sum(touched & ~complete))
    if skipped:
        logger.debug(f"Skipped {skipped} partially populated cells.")
    return JacobianMeasure(
        spacing=lf.spacing,
        frame=lf.frame,
        offset=lf.offset,
        origin=lf.origin,
        masses=np.where(complete, masses, np.nan),
        variation=np.where(complete, variation, 0.0),
        populated=complete,
        skipped=skipped,
    )


def boundary_circulation(
    lf: LatticeField, lo: Sequence[int], hi: Sequence[int]
) -> float:
    """Return 1/2 sum cross(v_n, v_n+1) around the block of cells lo <= k < hi.

    The walk follows the block boundary counterclockwise in lattice coordinates.  By
    the discrete Stokes theorem it equals the total Jacobian mass of the block.

    Raises:
        ValueError: If the block is empty or a boundary node is unpopulated.

    """
    (i0, j0), (i1, j1) = lo, hi
    if not (i1 > i0 and j1 > j0):
        message = f"Empty block: {lo} to {hi}"
        raise ValueError(message)
    loop = (
        [(i, j0) for i in range(i0, i1)]
        + [(i1, j) for j in range(j0, j1)]
        + [(i, j1) for i in range(i1, i0, -1)]
        + [(i0, j) for j in range(j1, j0, -1)]
    )
    values = lf.gather(np.asarray(loop, dtype=np.int64))
    following = np.roll(values, -1, axis=0)
    return 0.5 * _frame_sign(lf.frame) * float(np.sum(cross2d(values, following)))


### Vortex extraction ###


class ClusterQuality(StrEnum):
    """Whether a cluster's mass is close to a multiple of pi."""

    quantized = auto()
    non_quantized = auto()


@dataclass(kw_only=True, frozen=True, slots=True)
class VortexCluster:
    """A group of cells whose Jacobian mass adds up to a vortex."""

    position: tuple[float, float]
    degree: int
    mass: float
    """The signed cluster mass (about pi times the degree)."""
    cells: int
    quality: ClusterQuality


@dataclass(kw_only=True, frozen=True, slots=True)
class VortexExtraction:
    """An atomic current extracted from a Jacobian measure, with its error bounds."""

    current: AtomicCurrent
    clusters: tuple[VortexCluster, ...]
    residual_mass: float
    """Total variation of the cells outside the kept clusters."""
    residual_bound: float
    """Upper bound on the flat norm of the residual: sum over its cells of variation
    times (boundary distance + cell radius)."""
    certified_bound: float
    """Upper bound on the flat distance between the whole measure and `current`."""

    @property
    def non_quantized(self) -> bool:
        """Whether some cluster mass is far from a multiple of pi."""
        return any(c.quality is ClusterQuality.non_quantized for c in self.clusters)


def _bounding_rectangle(centres: NDArray[np.float64], pad: float) -> Rectangle:
    lo = centres.min(axis=0) - pad
    hi = centres.max(axis=0) + pad
    return Rectangle(lo=(float(lo[0]), float(lo[1])), hi=(float(hi[0]), float(hi[1])))


def extract_vortices(  # noqa: PLR0914, PLR0915
    jm: JacobianMeasure,
    threshold: float = 0.5,
    *,
    domain: PlanarDomain | None = None,
    seed_fraction: float = SEED_FRACTION,
    merge_radius: int = MERGE_RADIUS,
) -> VortexExtraction:
    """Group the Jacobian mass into point vortices.

    Cells with |mass| > seed_fraction * pi seed clusters; seeds closer than
    `merge_radius` cells merge, and each cluster takes every populated cell within
    `merge_radius` cells of its seeds.  A cluster with |mass| >= threshold * pi
    becomes an atom of degree round(mass / pi) at its |mass|-weighted centroid.
    A cluster of degree 0 whose variation reaches threshold * pi (opposite charges
    closer than the merge radius) is logged and left in the residual.

    Two flat-norm certificates are computed and the smaller one is kept: moving every
    leftover cell to the boundary, or moving it to the nearest atom when that is
    closer and routing each atom's quantization error to the boundary.

    Args:
        jm: The Jacobian measure.
        threshold: Minimum cluster mass, as a fraction of pi.
        domain: The set U the flat norm is taken in; cells with centres outside it
            are ignored.  Defaults to the box of the populated cells.
        seed_fraction: Minimum seed cell mass, as a fraction of pi.
        merge_radius: Merge and growth radius, in cells.

    """
    centres = jm.cell_centres()
    active = jm.populated.copy()
    radius = jm.cell_radius
    if domain is not None:
        active &= domain.contains(centres)
    if not np.any(active):
        return VortexExtraction(
            current=AtomicCurrent(),
            clusters=(),
            residual_mass=0.0,
            residual_bound=0.0,
            certified_bound=0.0,
        )
    region = domain or _bounding_rectangle(centres[active], radius)
    masses = np.where(active, np.nan_to_num(jm.masses), 0.0)
    variation = np.where(active, jm.variation, 0.0)
    boundary = np.clip(region.distance_to_boundary(centres), 0.0, None)
    seeds = active & (np.abs(masses) > seed_fraction * math.pi)
    reach = np.ones((2 * merge_radius + 1,) * 2, dtype=bool)
    grown = ndimage.binary_dilation(seeds, structure=reach) & active
    labels, count = ndimage.label(grown, structure=np.ones((3, 3), dtype=bool))
    clusters: list[VortexCluster] = []
    kept = np.zeros_like(active)
    net: list[float] = []
    spread = 0.0
    for label in range(1, count + 1):
        cells = labels == label
        total = float(np.sum(masses[cells]))
        degree = round(total / math.pi)
        if abs(total) < threshold * math.pi or degree == 0:
            cancelled = float(np.sum(variation[cells]))
            if cancelled >= threshold * math.pi:
                centre = variation[cells] @ centres[cells] / cancelled
                logger.debug(
                    f"Dropped a neutral cluster of variation {cancelled:.4g} "
                    f"at ({centre[0]:.4g}, {centre[1]:.4g})"
                )
            continue
        weights = np.abs(masses[cells])
        position = weights @ centres[cells] / np.sum(weights)
        error = abs(total - math.pi * degree)
        quality = (
            ClusterQuality.non_quantized
            if error > QUANTIZATION_SLACK * math.pi
            else ClusterQuality.quantized
        )
        clusters.append(
            VortexCluster(
                position=(float(position[0]), float(position[1])),
                degree=degree,
                mass=total,
                cells=int(np.sum(cells)),
                quality=quality,
            )
        )
        kept |= cells
        net.append(total)
        distances = np.linalg.norm(centres[cells] - position, axis=-1)
        spread += float(np.sum(variation[cells] * (distances + radius)))
    residual = active & ~kept
    residual_mass = float(np.sum(variation[residual]))
    residual_bound = float(np.sum(variation[residual] * (boundary[residual] + radius)))
    positions = np.array([c.position for c in clusters]).reshape(-1, 2)
    atom_boundary = np.clip(region.distance_to_boundary(positions), 0.0, None)
    errors = np.abs(np.asarray(net) - math.pi * np.array([c.degree for c in clusters]))
    to_boundary = spread + residual_bound + float(np.sum(errors * atom_boundary))
    attached = to_boundary
    if clusters:
        gaps = np.linalg.norm(
            centres[residual][:, np.newaxis, :] - positions[np.newaxis, :, :], axis=-1
        )
        nearest = np.argmin(gaps, axis=1)
        closest = gaps[np.arange(nearest.size), nearest]
        attach = closest < boundary[residual]
        absorbed = np.asarray(net) + np.bincount(
            nearest[attach], weights=masses[residual][attach], minlength=len(clusters)
        )
        routes = np.where(attach, closest, boundary[residual]) + radius
        attached = (
            spread
            + float(np.sum(variation[residual] * routes))
            + float(
                np.sum(
                    np.abs(absorbed - math.pi * np.array([c.degree for c in clusters]))
                    * atom_boundary
                )
            )
        )
    current = AtomicCurrent(
        atoms=tuple(Atom(position=c.position, degree=c.degree) for c in clusters)
    )
    extraction = VortexExtraction(
        current=current,
        clusters=tuple(clusters),
        residual_mass=residual_mass,
        residual_bound=residual_bound,
        certified_bound=min(to_boundary, attached),
    )
    logger.debug(
        f"Extracted degrees {current.degrees} from {count} clusters; residual mass "
        f"{residual_mass}, certified bound {extraction.certified_bound}"
    )
    return extraction


### Winding oracle ###


def _wrap(angles: NDArray[np.float64]) -> NDArray[np.float64]:
    """Map angle differences into (-pi, pi]."""
    return -np.remainder(-angles + math.pi, 2.0 * math.pi) + math.pi


def plaquette_degrees(lf: LatticeField) -> NDArray[np.int64]:
    """Return the winding degree of every fully populated cell (0 elsewhere).

    Raises:
        ValueError: If the field is not a planar S^1-valued lattice field.
        DegreeUndefinedError: If a bond of a populated cell joins antipodal values.

    """
    if lf.dimension != 2 or not lf.unit:  # noqa: PLR2004
        message = "The winding oracle needs a planar lattice field with unit values."
        raise ValueError(message)
    complete = lf.cell_populated()
    values = np.nan_to_num(lf.values)
    loop = [_corner_window(values, c) for c in ((0, 0), (1, 0), (1, 1), (0, 1))]
    circulation = np.zeros(complete.shape)
    for start, end in itertools.pairwise([*loop, loop[0]]):
        antipodal = complete & (
            np.linalg.norm(end - start, axis=-1) >= 2.0 - _ANTIPODAL_TOLERANCE
        )
        if np.any(antipodal):
            cell = np.argwhere(antipodal)[0] + lf.origin
            message = f"Antipodal bond on the plaquette {cell.tolist()}"
            raise DegreeUndefinedError(message)
        steps = np.arctan2(end[..., 1], end[..., 0]) - np.arctan2(
            start[..., 1], start[..., 0]
        )
        circulation += _wrap(steps)
    degrees = np.rint(circulation / (2.0 * math.pi)).astype(np.int64)
    return np.where(complete, degrees * int(_frame_sign(lf.frame)), 0)


def winding_oracle(lf: LatticeField) -> AtomicCurrent:
    """Return one atom per plaquette with nonzero winding, at the plaquette centre."""
    degrees = plaquette_degrees(lf)
    basis = lf.spacing * lf.frame
    atoms = []
    for local in np.argwhere(degrees != 0):
        centre = (local + lf.origin + lf.offset + 0.5) @ basis.T
        atoms.append(
            Atom(
                position=(float(centre[0]), float(centre[1])),
                degree=int(degrees[tuple(local)]),
            )
        )
    return AtomicCurrent(atoms=tuple(atoms))


### Flat norm ###


@dataclass(kw_only=True, frozen=True, slots=True)
class TransportLeg:
    """One unit charge routed to an opposite charge or to the boundary."""

    source: tuple[float, float]
    target: tuple[float, float] | None
    """The opposite charge, or None for the boundary."""
    mass: float
    length: float


@dataclass(kw_only=True, frozen=True, slots=True)
class FlatNormResult:
    """The flat norm of a difference of atomic currents and an optimal plan."""

    value: float
    plan: tuple[TransportLeg, ...]


def path_length(
    U: PlanarDomain,  # noqa: N803
    p: NDArray[np.float64],
    q: NDArray[np.float64],
) -> float:
    """Return the length of the shortest path from p to q inside `U`.

    Straight for convex domains; around the hole (tangent, arc, tangent) for an
    annulus when the segment would cross it.
    """
    segment = q - p
    straight = float(np.linalg.norm(segment))
    if not isinstance(U, Annulus) or straight == 0:
        return straight
    centre = np.asarray(U.center)
    a, b = p - centre, q - centre
    t = float(np.clip(-(a @ segment) / (segment @ segment), 0.0, 1.0))
    if np.linalg.norm(a + t * segment) >= U.inner:
        return straight
    r = U.inner
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    angle = math.acos(max(-1.0, min(1.0, float(a @ b) / (na * nb))))
    arc = r * (angle - math.acos(r / na) - math.acos(r / nb))
    return math.sqrt(na**2 - r**2) + math.sqrt(nb**2 - r**2) + arc


def _unit_charges(
    a: AtomicCurrent, b: AtomicCurrent, U: Domain  # noqa: N803
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Expand a - b into positive and negative unit charge positions."""
    if not isinstance(U, Ball | Rectangle | Annulus):
        message = "Flat norms are only implemented for planar domains."
        raise ValueError(message)  # noqa: TRY004
    positive: list[tuple[float, float]] = []
    negative: list[tuple[float, float]] = []
    for sign, current in ((1, a), (-1, b)):
        for atom in current.atoms:
            if abs(atom.degree) > MAX_UNIT_CHARGES_PER_ATOM:
                message = (
                    f"Atom degree {atom.degree} exceeds the limit of "
                    f"{MAX_UNIT_CHARGES_PER_ATOM} unit charges."
                )
                raise ValueError(message)
            if not float(U.distance_to_boundary(np.asarray(atom.position))) > 0:
                message = f"Atom at {atom.position} is not inside the domain {U}"
                raise OutsideDomainError(message)
            target = positive if sign * atom.degree > 0 else negative
            target.extend([atom.position] * abs(atom.degree))
    return (
        np.asarray(positive, dtype=np.float64).reshape(-1, 2),
        np.asarray(negative, dtype=np.float64).reshape(-1, 2),
    )


def _distances(
    U: PlanarDomain,  # noqa: N803
    positive: NDArray[np.float64],
    negative: NDArray[np.float64],
) -> NDArray[np.float64]:
    return np.array(
        [[path_length(U, p, q) for q in negative] for p in positive]
    ).reshape(positive.shape[0], negative.shape[0])


def flat_norm(
    a: AtomicCurrent,
    b: AtomicCurrent,
    U: Domain,  # noqa: N803
) -> FlatNormResult:
    """Return the flat norm of a - b in `U` and an optimal transport plan.

    Every unit charge (weight pi) either pairs with an opposite charge along a
    shortest path in U or leaves through the nearest boundary point.  The optimal
    choice is a min-cost perfect matching on a square matrix that adds one boundary
    slot per charge.

    Raises:
        OutsideDomainError: If an atom is not strictly inside `U`.
        ValueError: If `U` is not planar or a degree exceeds the unit-charge cap.

    """
    positive, negative = _unit_charges(a, b, U)
    region: PlanarDomain = U  # type: ignore[assignment]
    n_pos, n_neg = positive.shape[0], negative.shape[0]
    if n_pos + n_neg == 0:
        return FlatNormResult(value=0.0, plan=())
    pair = _distances(region, positive, negative)
    exit_pos = np.atleast_1d(region.distance_to_boundary(positive))
    exit_neg = np.atleast_1d(region.distance_to_boundary(negative))
    # Finite stand-in for forbidden assignments; any feasible plan is far cheaper.
    forbidden = 1e6 * (1.0 + float(np.sum(exit_pos)) + float(np.sum(exit_neg)))
    size = n_pos + n_neg
    cost = np.zeros((size, size))
    cost[:n_pos, :n_neg] = pair
    cost[:n_pos, n_neg:] = forbidden
    cost[n_pos:, :n_neg] = forbidden
    cost[np.arange(n_pos), n_neg + np.arange(n_pos)] = exit_pos
    cost[n_pos + np.arange(n_neg), np.arange(n_neg)] = exit_neg
    rows, cols = linear_sum_assignment(cost)
    plan = []
    for row, col in zip(rows.tolist(), cols.tolist(), strict=True):
        if row < n_pos and col < n_neg:
            source, target, length = positive[row], negative[col], pair[row, col]
        elif row < n_pos:
            source, target, length = positive[row], None, exit_pos[row]
        elif col < n_neg:
            source, target, length = negative[col], None, exit_neg[col]
        else:
            continue
        plan.append(
            TransportLeg(
                source=(float(source[0]), float(source[1])),
                target=None if target is None else (float(target[0]), float(target[1])),
                mass=math.pi,
                length=float(length),
            )
        )
    value = math.fsum(leg.mass * leg.length for leg in plan)
    return FlatNormResult(value=value, plan=tuple(plan))


def flat_norm_exhaustive(
    a: AtomicCurrent,
    b: AtomicCurrent,
    U: Domain,  # noqa: N803
) -> float:
    """Return the flat norm of a - b by enumerating every routing of unit charges.

    Raises:
        ValueError: If there are more than 8 unit charges.

    """
    positive, negative = _unit_charges(a, b, U)
    region: PlanarDomain = U  # type: ignore[assignment]
    if positive.shape[0] + negative.shape[0] > EXHAUSTIVE_CHARGE_LIMIT:
        message = f"Exhaustive routing is capped at {EXHAUSTIVE_CHARGE_LIMIT} charges."
        raise ValueError(message)
    pair = _distances(region, positive, negative)
    exit_pos = np.atleast_1d(region.distance_to_boundary(positive)).tolist()
    exit_neg = np.atleast_1d(region.distance_to_boundary(negative)).tolist()

    def best(index: int, free: frozenset[int]) -> float:
        if index == positive.shape[0]:
            return math.fsum(exit_neg[j] for j in free)
        options = [exit_pos[index] + best(index + 1, free)]
        options += [
            float(pair[index, j]) + best(index + 1, free - {j}) for j in sorted(free)
        ]
        return min(options)

    return math.pi * best(0, frozenset(range(negative.shape[0])))


### Convergence ###


class ConvergenceFlags(StrEnum):
    """The verdict on one (eps, margin) row."""

    ok = auto()
    non_quantized = auto()
    non_convergent = auto()


@dataclass(kw_only=True, frozen=True, slots=True)
class ConvergenceRow:
    """The certified flat distance to the target at one eps and margin."""

    eps: float
    delta: float
    flat_distance: float
    flag: ConvergenceFlags
    degrees: tuple[int, ...]
    """Degrees of the extracted atoms."""


@dataclass(kw_only=True, frozen=True, slots=True)
class ConvergenceReport:
    """All rows of a convergence check plus the per-margin monotonicity verdicts."""

    rows: tuple[ConvergenceRow, ...]
    decreasing: tuple[tuple[float, bool], ...]
    """Per margin: whether the distance decreases as eps decreases."""

    @property
    def converged(self) -> bool:
        """Whether every row is ok and every margin shows decreasing distances."""
        return all(row.flag is ConvergenceFlags.ok for row in self.rows) and all(
            flag for _, flag in self.decreasing
        )


def convergence_check(  # noqa: PLR0913
    f_sequence: Sequence[tuple[float, IField]],
    target: AtomicCurrent,
    dom: PlanarDomain,
    margins: Sequence[float],
    *,
    threshold: float = 0.5,
    tolerance_factor: float = 10.0,
) -> ConvergenceReport:
    """Certify the flat convergence of the Jacobians of a field sequence to `target`.

    For every eps and margin delta, the fields are discretized, interpolated and
    reduced to an atomic current in U = shrink(dom, delta); the row distance is its
    flat norm to `target` in U plus the extraction certificate.  Rows above
    `tolerance_factor * eps * pi` are flagged non-convergent.

    Raises:
        ValueError: If a target atom is within max(margins) of the boundary.

    """
    if not margins:
        message = "At least one margin is needed."
        raise ValueError(message)
    widest = max(margins)
    for atom in target.atoms:
        if not float(dom.distance_to_boundary(np.asarray(atom.position))) > widest:
            message = f"Target atom {atom.position} is within {widest} of the boundary."
            raise ValueError(message)
    sequence = sorted(f_sequence, key=lambda item: -item[0])

    def rows_for(item: tuple[float, IField]) -> list[ConvergenceRow]:
        eps, f = item
        jm = jacobian_measure(discretize(f, dom, eps))
        rows = []
        for delta in margins:
            region = dom.shrink(delta)
            extraction = extract_vortices(
                jm.restricted(region), threshold, domain=region
            )
            distance = (
                flat_norm(extraction.current, target, region).value
                + extraction.certified_bound
            )
            if extraction.non_quantized:
                flag = ConvergenceFlags.non_quantized
            elif distance > tolerance_factor * eps * math.pi:
                flag = ConvergenceFlags.non_convergent
            else:
                flag = ConvergenceFlags.ok
            rows.append(
                ConvergenceRow(
                    eps=eps,
                    delta=delta,
                    flat_distance=distance,
                    flag=flag,
                    degrees=extraction.current.degrees,
                )
            )
            logger.debug(f"Convergence row eps={eps}, delta={delta}: {distance} {flag}")
        return rows

    rows = [row for part in ordered_map(rows_for, sequence) for row in part]
    decreasing = []
    for delta in margins:
        distances = [row.flat_distance for row in rows if row.delta == delta]
        monotone = all(
            b <= a + 1e-12 for a, b in zip(distances, distances[1:], strict=False)
        )
        decreasing.append((delta, monotone))
    return ConvergenceReport(rows=tuple(rows), decreasing=tuple(decreasing))
