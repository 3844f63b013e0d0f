# SPDX-FileCopyrightText: 2025-present vortexlab contributors
# SPDX-License-Identifier: MIT

# Part of vortexlab, a numerical laboratory for nonlocal vortex energies.
# Copyright (C) 2025-present vortexlab contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this
# software and associated documentation files, to deal in the software without
# restriction, subject to the conditions of the MIT licence.  See LICENSES/MIT.txt.


"""Lattice fields: cell-average discretization, Kuhn interpolation and the XY energy.

A lattice field lives on the points eps * L (k + z) for integer indices k, where L is
the frame (the identity, or the rotation-and-dilation matrix of a vector xi) and z is
a fixed offset in cell units.  The value at index k is attached to the node
eps * L (k + z); for cell averages it is the average over the cell
eps * L (k + z + [0, 1]^d) spanned from that node.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import StrEnum, auto
from functools import cache
from typing import TYPE_CHECKING, Final

import numpy as np
from loguru import logger

from vortexlab._utils import cross2d, fixed_chunks, ordered_map
from vortexlab.api._errors import InfeasibleGridError
from vortexlab.api._fields import Codomains, nudge_off_atoms

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path

    from numpy.typing import ArrayLike, NDArray

    from vortexlab.api._domains import Domain
    from vortexlab.api._fields import IField

LATTICE_NODE_LIMIT: Final = 50_000_000
POINTS_PER_SIDE: Final = 4
REFINED_POINTS_PER_SIDE: Final = 16
_CELL_CHUNK: Final = 4096
_NODE_CHUNK: Final = 1 << 16
_TOLERANCE: Final = 1e-12


class DiagonalSplits(StrEnum):
    """How the unit square is cut into triangles (cubes always use Kuhn)."""

    kuhn = auto()
    """Along the main diagonal: {x1 >= x2} and {x1 <= x2}."""

    anti_diagonal = auto()
    """Along the anti-diagonal: {x1 + x2 <= 1} and {x1 + x2 >= 1}."""


### Kuhn mesh ###


@dataclass(kw_only=True, frozen=True, slots=True, eq=False)
class KuhnMesh:
    """The split of the unit d-cube into simplices, with their barycentric maps.

    Note:
        Build meshes with [kuhn_mesh][vortexlab.api.kuhn_mesh], which caches them.

    """

    dimension: int
    split: DiagonalSplits
    simplices: tuple[tuple[tuple[int, ...], ...], ...]
    """Vertex chains: simplex s has the vertices simplices[s][0..d] in {0,1}^d."""
    _origins: NDArray[np.float64] = field(init=False, repr=False)
    _inverses: NDArray[np.float64] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        """Precompute the inverse edge matrices."""
        chains = np.asarray(self.simplices, dtype=np.float64)
        edges = np.transpose(chains[:, 1:, :] - chains[:, :1, :], (0, 2, 1))
        object.__setattr__(self, "_origins", chains[:, 0, :])
        object.__setattr__(self, "_inverses", np.linalg.inv(edges))

    @property
    def vertices(self) -> NDArray[np.int64]:
        """Vertex chains as an int array of shape (simplices, d + 1, d)."""
        return np.asarray(self.simplices, dtype=np.int64)

    @property
    def edge_inverses(self) -> NDArray[np.float64]:
        """Inverse of the edge matrix [v1 - v0, ..., vd - v0] of every simplex."""
        return self._inverses

    @property
    def volumes(self) -> NDArray[np.float64]:
        """The volume of every simplex."""
        return np.abs(1.0 / np.linalg.det(self._inverses)) / math.factorial(
            self.dimension
        )

    @property
    def orientations(self) -> NDArray[np.float64]:
        """+1 for positively oriented vertex chains, -1 otherwise."""
        return np.sign(np.linalg.det(self._inverses))

    def barycentric(
        self, local: ArrayLike
    ) -> tuple[NDArray[np.int64], NDArray[np.float64]]:
        """Locate points of the unit cube and return their simplex and weights.

        Args:
            local: Points of shape (N, d) in [0, 1]^d.

        Returns:
            The index of the first simplex containing each point, and the weights of
                its d + 1 vertices (nonnegative, summing to 1).

        Raises:
            ValueError: If a point is outside the unit cube.

        """
        points = np.atleast_2d(np.asarray(local, dtype=np.float64))
        relative = points[np.newaxis, :, :] - self._origins[:, np.newaxis, :]
        tail = np.einsum("sij,snj->sni", self._inverses, relative)
        weights = np.concatenate(
            (1.0 - np.sum(tail, axis=-1, keepdims=True), tail), axis=-1
        )
        inside = np.min(weights, axis=-1) >= -_TOLERANCE
        if not np.all(np.any(inside, axis=0)):
            message = "Points must lie in the unit cube."
            raise ValueError(message)
        chosen = np.argmax(inside, axis=0)
        return chosen, weights[chosen, np.arange(points.shape[0])]


@cache
def kuhn_mesh(dimension: int, split: DiagonalSplits = DiagonalSplits.kuhn) -> KuhnMesh:
    """Return the simplicial split of the unit cube.

    The Kuhn split has one simplex {x_s(1) >= ... >= x_s(d)} per permutation s, whose
    vertex chain adds the unit vectors e_s(1), ..., e_s(d) in turn.  The
    anti-diagonal split exists for squares only.
    """
    if split is DiagonalSplits.anti_diagonal:
        if dimension != 2:  # noqa: PLR2004
            message = "The anti-diagonal split is only defined for squares."
            raise ValueError(message)
        simplices = (((0, 0), (1, 0), (0, 1)), ((1, 0), (1, 1), (0, 1)))
        return KuhnMesh(dimension=2, split=split, simplices=simplices)
    chains = []
    for order in itertools.permutations(range(dimension)):
        vertex = [0] * dimension
        chain = [tuple(vertex)]
        for axis in order:
            vertex[axis] = 1
            chain.append(tuple(vertex))
        chains.append(tuple(chain))
    return KuhnMesh(dimension=dimension, split=split, simplices=tuple(chains))


### Lattice fields ###


@dataclass(kw_only=True, frozen=True, slots=True)
class SimplexId:
    """A simplex of the interpolation mesh: a lattice cell and a simplex number."""

    cell: tuple[int, ...]
    """Lattice index of the cell's base node."""

    simplex: int


@dataclass(kw_only=True, frozen=True, slots=True, eq=False)
class LatticeField:
    """Vector values on a finite box of lattice indices.

    Note:
        Instances of this class are immutable once created; the arrays must not be
        modified.

    """

    spacing: float
    """The lattice scale eps."""

    frame: NDArray[np.float64]
    """The d x d matrix L whose columns are the lattice directions (in units of eps)."""

    offset: NDArray[np.float64]
    """The translation z in cell units."""

    origin: NDArray[np.int64]
    """The lattice index of values[0, ..., 0]."""

    values: NDArray[np.float64]
    """Values of shape (*shape, 2); NaN where unpopulated."""

    populated: NDArray[np.bool_]
    """Which indices carry a value."""

    interior: NDArray[np.bool_]
    """Which indices belong to cells (or nodes) wholly inside the domain."""

    unit: bool
    """Whether all values lie on S^1."""

    split: DiagonalSplits = DiagonalSplits.kuhn

    @property
    def dimension(self) -> int:
        """The lattice dimension d."""
        return self.frame.shape[0]

    @property
    def shape(self) -> tuple[int, ...]:
        """The shape of the index box."""
        return self.populated.shape

    @property
    def index_count(self) -> int:
        """The number of populated indices."""
        return int(np.sum(self.populated))

    @property
    def mesh(self) -> KuhnMesh:
        """The interpolation mesh of a lattice cell."""
        return kuhn_mesh(self.dimension, self.split)

    @property
    def basis(self) -> NDArray[np.float64]:
        """The physical lattice basis eps * L."""
        return self.spacing * self.frame

    def positions(self) -> NDArray[np.float64]:
        """Return the physical position of every node, shape (*shape, d)."""
        indices = np.moveaxis(np.indices(self.shape), 0, -1) + self.origin
        return (indices + self.offset) @ self.basis.T

    def to_lattice(self, points: ArrayLike) -> NDArray[np.float64]:
        """Return lattice coordinates y with point = eps L (y + z)."""
        array = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return np.linalg.solve(self.basis, array.T).T - self.offset

    def cell_populated(self) -> NDArray[np.bool_]:
        """Return, per cell, whether all 2^d corners are populated.

        The result has shape `shape - 1` along every axis; entry j is the cell with
        base node origin + j.
        """
        d = self.dimension
        full = np.ones(tuple(n - 1 for n in self.shape), dtype=bool)
        for corner in itertools.product((0, 1), repeat=d):
            window = tuple(
                slice(c, n - 1 + c) for c, n in zip(corner, self.shape, strict=True)
            )
            full &= self.populated[window]
        return full

    def gather(self, indices: NDArray[np.int64]) -> NDArray[np.float64]:
        """Return the values at absolute lattice indices of shape (..., d).

        Raises:
            ValueError: If an index is outside the box or unpopulated.

        """
        local = indices - self.origin
        inside = np.all((local >= 0) & (local < np.asarray(self.shape)), axis=-1)
        if not np.all(inside):
            message = "Lattice index outside the populated box."
            raise ValueError(message)
        position = tuple(np.moveaxis(local, -1, 0))
        if not np.all(self.populated[position]):
            message = "Lattice index is not populated."
            raise ValueError(message)
        return self.values[position]


def rotated_frame(xi: ArrayLike) -> NDArray[np.float64]:
    """Return the frame whose columns are xi and its counterclockwise perpendicular.

    Raises:
        ValueError: If xi is zero.

    """
    x1, x2 = (float(c) for c in np.asarray(xi, dtype=np.float64))
    if x1 == 0 and x2 == 0:
        message = "The lattice direction xi must be nonzero."
        raise ValueError(message)
    return np.array([[x1, -x2], [x2, x1]])


def _index_box(
    dom: Domain, eps: float, frame: NDArray[np.float64], offset: NDArray[np.float64]
) -> tuple[NDArray[np.int64], tuple[int, ...]]:
    lo, hi = dom.bounding_box
    corners = np.array(list(itertools.product(*zip(lo, hi, strict=True))))
    lattice = np.linalg.solve(eps * frame, corners.T).T - offset
    first = np.floor(np.min(lattice, axis=0)).astype(np.int64) - 1
    last = np.ceil(np.max(lattice, axis=0)).astype(np.int64) + 1
    shape = tuple(int(n) for n in last - first + 1)
    count = math.prod(shape)
    if count > LATTICE_NODE_LIMIT:
        estimated_bytes = count * 8 * (2 * dom.dimension + 4)
        message = (
            f"Lattice of {count} nodes (about {estimated_bytes / 2**30:.1f} GiB) "
            f"exceeds the limit of {LATTICE_NODE_LIMIT} nodes."
        )
        raise InfeasibleGridError(
            message, nodes=count, estimated_bytes=estimated_bytes
        )
    return first, shape


def _unit_points(per_side: int, d: int) -> NDArray[np.float64]:
    ticks = (np.arange(per_side) + 0.5) / per_side
    return np.array(list(itertools.product(ticks, repeat=d)))


def _frame_and_offset(
    d: int, xi: ArrayLike | None, offset: ArrayLike | None
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    if xi is None:
        frame = np.eye(d)
    else:
        if d != 2:  # noqa: PLR2004
            message = "Rotated lattices are only defined in two dimensions."
            raise ValueError(message)
        frame = rotated_frame(xi)
    shift = np.zeros(d) if offset is None else np.asarray(offset, dtype=np.float64)
    if shift.shape != (d,):
        message = f"Offset must have {d} entries, got: {shift.tolist()}"
        raise ValueError(message)
    return frame, shift


def _cell_averages(  # noqa: PLR0913
    f: IField,
    dom: Domain,
    eps: float,
    frame: NDArray[np.float64],
    offset: NDArray[np.float64],
    points_per_side: int,
    refined_points_per_side: int,
) -> LatticeField:
    d = dom.dimension
    origin, shape = _index_box(dom, eps, frame, offset)
    indices = np.moveaxis(np.indices(shape), 0, -1).reshape(-1, d) + origin
    basis = eps * frame
    coarse = _unit_points(points_per_side, d)
    fine = _unit_points(refined_points_per_side, d)
    corners = np.array(list(itertools.product((0.0, 1.0), repeat=d)))
    # Cells whose centre is within one cell diameter of an atom get the fine rule.
    centres = (indices + offset + 0.5) @ basis.T
    near = np.zeros(indices.shape[0], dtype=bool)
    reach = np.linalg.norm(basis, 2) * math.sqrt(d)
    for atom in f.atoms:
        near |= np.hypot(*(centres[:, :2] - np.asarray(atom.position)).T) < reach

    def average(
        base: NDArray[np.float64], local: NDArray[np.float64], per_side: int
    ) -> tuple[NDArray[np.float64], NDArray[np.bool_], NDArray[np.bool_]]:
        points = (base[:, np.newaxis, :] + local[np.newaxis, :, :]) @ basis.T
        inside = dom.contains(points)
        samples = np.zeros((*inside.shape, 2))
        if np.any(inside):
            samples[inside] = f.evaluate(
                nudge_off_atoms(points[inside], f.atoms, eps / (2.0 * per_side))
            )
        # Divide by the full cell, also for cells cut by the boundary.
        return samples.mean(axis=1), inside.any(axis=1), inside.all(axis=1)

    def chunk(rows: range) -> tuple[NDArray[np.float64], ...]:
        base = indices[rows.start : rows.stop] + offset
        means, touched, whole = average(base, coarse, points_per_side)
        refine = near[rows.start : rows.stop]
        if np.any(refine):
            means[refine], touched[refine], whole[refine] = average(
                base[refine], fine, refined_points_per_side
            )
        corner_points = (base[:, np.newaxis, :] + corners) @ basis.T
        whole &= np.all(dom.contains(corner_points), axis=1)
        return means, touched, whole

    parts = ordered_map(chunk, fixed_chunks(indices.shape[0], _CELL_CHUNK))
    means = np.concatenate([p[0] for p in parts]).reshape(*shape, 2)
    populated = np.concatenate([p[1] for p in parts]).reshape(shape)
    interior = np.concatenate([p[2] for p in parts]).reshape(shape)
    means[~populated] = np.nan
    logger.debug(
        f"Discretized on {int(np.sum(populated))} cells at eps={eps} "
        f"({int(np.sum(near))} refined)"
    )
    return LatticeField(
        spacing=eps,
        frame=frame,
        offset=offset,
        origin=origin,
        values=means,
        populated=populated,
        interior=interior,
        unit=False,
    )


def discretize(
    f: IField,
    dom: Domain,
    eps: float,
    *,
    points_per_side: int = POINTS_PER_SIDE,
    refined_points_per_side: int = REFINED_POINTS_PER_SIDE,
) -> LatticeField:
    """Return the cell averages of `f` on the lattice eps Z^d.

    The value at index i is (1 / eps^d) times the integral of `f` over the part of the
    cell eps(i + [0,1]^d) inside `dom`, by an m^d-point midpoint rule (m^d refined
    near atoms).  Cells that miss the domain are left unpopulated.

    Raises:
        ValueError: If eps is not smaller than the domain inradius.

    """
    if not 0 < eps < dom.inradius:
        message = f"eps={eps} must be positive and smaller than the inradius."
        raise ValueError(message)
    frame, offset = _frame_and_offset(dom.dimension, None, None)
    return _cell_averages(
        f, dom, eps, frame, offset, points_per_side, refined_points_per_side
    )


def discretize_rotated(  # noqa: PLR0913
    f: IField,
    dom: Domain,
    eps: float,
    xi: ArrayLike,
    z: ArrayLike = (0.0, 0.0),
    *,
    points_per_side: int = POINTS_PER_SIDE,
    refined_points_per_side: int = REFINED_POINTS_PER_SIDE,
) -> LatticeField:
    """Return the averages of `f` over the squares eps(k + z + [0,1] xi + [0,1] xi').

    Here xi' = (-xi_2, xi_1) is xi turned a quarter-turn counterclockwise, so the
    lattice is Z xi + Z xi' (the columns of
    [rotated_frame][vortexlab.api.rotated_frame]), and xi = (1, 0), z = 0 gives back
    [discretize][vortexlab.api.discretize].  Averages divide by the square's area
    eps^2 |xi|^2.

    Raises:
        ValueError: If xi is zero or the domain is not planar.

    """
    if dom.dimension != 2:  # noqa: PLR2004
        message = "Rotated discretizations are only defined in two dimensions."
        raise ValueError(message)
    if not 0 < eps < dom.inradius:
        message = f"eps={eps} must be positive and smaller than the inradius."
        raise ValueError(message)
    frame, offset = _frame_and_offset(2, xi, z)
    return _cell_averages(
        f, dom, eps, frame, offset, points_per_side, refined_points_per_side
    )


def sample(
    f: IField,
    dom: Domain,
    eps: float,
    offset: ArrayLike | None = None,
    xi: ArrayLike | None = None,
) -> LatticeField:
    """Return the point values u(eps L (k + z)) at the lattice nodes inside `dom`.

    Nodes within 1e-9 of an atom are moved by eps / 2 along +x1.
    """
    d = dom.dimension
    frame, shift = _frame_and_offset(d, xi, offset)
    origin, shape = _index_box(dom, eps, frame, shift)
    count = math.prod(shape)
    basis = eps * frame

    def chunk(rows: range) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
        flat = np.arange(rows.start, rows.stop)
        indices = np.stack(np.unravel_index(flat, shape), axis=-1) + origin
        points = (indices + shift) @ basis.T
        inside = dom.contains(points)
        values = np.full((flat.size, 2), np.nan)
        if np.any(inside):
            values[inside] = f.evaluate(
                nudge_off_atoms(points[inside], f.atoms, eps / 2.0)
            )
        return values, inside

    parts = ordered_map(chunk, fixed_chunks(count, _NODE_CHUNK))
    values = np.concatenate([p[0] for p in parts]).reshape(*shape, 2)
    populated = np.concatenate([p[1] for p in parts]).reshape(shape)
    logger.debug(f"Sampled {int(np.sum(populated))} nodes at eps={eps}")
    return LatticeField(
        spacing=eps,
        frame=frame,
        offset=shift,
        origin=origin,
        values=values,
        populated=populated,
        interior=populated.copy(),
        unit=f.codomain is Codomains.unit_circle,
    )


### Interpolation ###


def _locate(
    lf: LatticeField, points: ArrayLike
) -> tuple[NDArray[np.int64], NDArray[np.float64]]:
    """Return the local cell index and in-cell coordinates of every point."""
    lattice = lf.to_lattice(points) - lf.origin
    cells = np.floor(lattice).astype(np.int64)
    local = lattice - cells
    populated = lf.cell_populated()
    limits = np.asarray(populated.shape)

    def valid(candidate: NDArray[np.int64]) -> NDArray[np.bool_]:
        inside = np.all((candidate >= 0) & (candidate < limits), axis=-1)
        flags = np.zeros(candidate.shape[0], dtype=bool)
        flags[inside] = populated[tuple(candidate[inside].T)]
        return flags

    ok = valid(cells)
    # A point on the upper face of a populated cell may round into the next cell.
    on_face = (local <= _TOLERANCE) & ~ok[:, np.newaxis]
    retry = np.any(on_face, axis=1)
    if np.any(retry):
        shifted = cells[retry] - on_face[retry]
        recovered = valid(shifted)
        rows = np.flatnonzero(retry)[recovered]
        cells[rows] = shifted[recovered]
        local[rows] += on_face[rows]
        ok[rows] = True
    if not np.all(ok):
        message = "Point lies in an unpopulated lattice cell."
        raise ValueError(message)
    return cells, np.clip(local, 0.0, 1.0)


def interpolate_points(lf: LatticeField, points: ArrayLike) -> NDArray[np.float64]:
    """Return the piecewise-affine interpolant of `lf` at every point.

    Raises:
        ValueError: If a point lies in a cell with an unpopulated corner.

    """
    cells, local = _locate(lf, points)
    simplex, weights = lf.mesh.barycentric(local)
    corners = lf.mesh.vertices[simplex]
    vertex_values = lf.gather(cells[:, np.newaxis, :] + corners + lf.origin)
    return np.einsum("nv,nvc->nc", weights, vertex_values)


def interpolate(lf: LatticeField, x: ArrayLike) -> NDArray[np.float64]:
    """Return the piecewise-affine interpolant of `lf` at the point `x`."""
    return interpolate_points(lf, np.asarray(x, dtype=np.float64)[np.newaxis, :])[0]


def locate_simplex(lf: LatticeField, x: ArrayLike) -> SimplexId:
    """Return the mesh simplex containing the point `x`."""
    cells, local = _locate(lf, np.asarray(x, dtype=np.float64)[np.newaxis, :])
    simplex, _ = lf.mesh.barycentric(local)
    cell = tuple(int(c) for c in cells[0] + lf.origin)
    return SimplexId(cell=cell, simplex=int(simplex[0]))


def interpolation_gradient(
    lf: LatticeField, simplex_id: SimplexId
) -> NDArray[np.float64]:
    """Return the constant 2 x d gradient of the interpolant on one simplex.

    Raises:
        ValueError: If a vertex of the simplex is unpopulated.

    """
    mesh = lf.mesh
    corners = mesh.vertices[simplex_id.simplex]
    vertex_values = lf.gather(np.asarray(simplex_id.cell) + corners)
    lattice_gradient = (vertex_values[1:] - vertex_values[0]).T @ mesh.edge_inverses[
        simplex_id.simplex
    ]
    return lattice_gradient @ np.linalg.inv(lf.basis)


### XY energy ###


@dataclass(kw_only=True, frozen=True, slots=True)
class XYEnergy:
    """The XY energy and the number of nearest-neighbour bonds it sums."""

    value: float
    bonds: int
    """Unordered bonds; the energy counts each of them twice."""


def evaluate_xy_energy(
    lf: LatticeField,
    U: Domain | None = None,  # noqa: N803
) -> XYEnergy:
    """Return (1/|log eps|) sum over ordered neighbour pairs of eps^(d-2)|v_i - v_j|^2.

    Only pairs with both nodes populated (and inside `U`, when given) count.
    """
    selected = lf.populated.copy()
    if U is not None:
        selected &= U.contains(lf.positions())
    d = lf.dimension
    squares = []
    bonds = 0
    for axis in range(d):
        head = tuple(slice(1, None) if a == axis else slice(None) for a in range(d))
        tail = tuple(slice(None, -1) if a == axis else slice(None) for a in range(d))
        both = selected[head] & selected[tail]
        difference = lf.values[head][both] - lf.values[tail][both]
        squares.append(np.sum(difference**2, axis=-1))
        bonds += int(np.sum(both))
    unordered = float(np.sum(np.concatenate(squares))) if squares else 0.0
    eps = lf.spacing
    value = 2.0 * unordered * eps ** (d - 2) / abs(math.log(eps))
    logger.debug(f"XY energy at eps={eps}: {value} over {bonds} bonds")
    return XYEnergy(value=value, bonds=bonds)


def xy_energy(lf: LatticeField, U: Domain | None = None) -> float:  # noqa: N803
    """Return the XY energy of `lf` on `U` with the ordered-pair convention."""
    return evaluate_xy_energy(lf, U).value


def translated_xy_average(
    f: IField, dom: Domain, eps: float, n_offsets: int = 4
) -> float:
    """Return the mean XY energy of the point samples over an n x n grid of offsets.

    The offsets are the cell-unit midpoints ((i + 1/2)/n, (j + 1/2)/n).
    """
    ticks = (np.arange(n_offsets) + 0.5) / n_offsets
    energies = [
        xy_energy(sample(f, dom, eps, offset=(a, b)))
        for a, b in itertools.product(ticks, repeat=2)
    ]
    return math.fsum(energies) / len(energies)


### Discrepancy between interpolants ###


def _triangles(
    lf: LatticeField, U: Domain | None
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Return vertex positions and values of every fully populated mesh triangle.

    With `U`, only triangles whose three vertices are in `U` are kept.
    """
    cells = np.argwhere(lf.cell_populated()) + lf.origin
    corners = lf.mesh.vertices
    indices = (cells[np.newaxis, :, np.newaxis, :] + corners[:, np.newaxis]).reshape(
        -1, 3, 2
    )
    positions = (indices + lf.offset) @ lf.basis.T
    values = lf.gather(indices)
    if U is not None:
        keep = np.all(U.contains(positions), axis=1)
        positions, values = positions[keep], values[keep]
    return positions, values


def _affine(
    positions: NDArray[np.float64], values: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Return (G, c) with u(x) = G x + c on each triangle."""
    edges = np.transpose(positions[:, 1:] - positions[:, :1], (0, 2, 1))
    jumps = np.transpose(values[:, 1:] - values[:, :1], (0, 2, 1))
    gradients = jumps @ np.linalg.inv(edges)
    constants = values[:, 0] - np.einsum("nij,nj->ni", gradients, positions[:, 0])
    return gradients, constants


def _area(triangles: NDArray[np.float64]) -> NDArray[np.float64]:
    a, b, c = triangles[:, 0], triangles[:, 1], triangles[:, 2]
    return 0.5 * np.abs(cross2d(b - a, c - a))


def _quadratic_integral(
    area: NDArray[np.float64], d: NDArray[np.float64]
) -> NDArray[np.float64]:
    """Integral of |D|^2 over triangles with D affine and vertex values d (n, 3, 2)."""
    return (
        area
        / 12.0
        * (np.sum(d**2, axis=(1, 2)) + np.sum(np.sum(d, axis=1) ** 2, axis=-1))
    )


def _same_mesh(a: LatticeField, b: LatticeField) -> bool:
    return (
        a.spacing == b.spacing
        and a.split is b.split
        and np.array_equal(a.frame, b.frame)
        and np.array_equal(a.offset, b.offset)
    )


def _clip(
    polygons: NDArray[np.float64],
    counts: NDArray[np.int64],
    a: NDArray[np.float64],
    b: NDArray[np.float64],
) -> tuple[NDArray[np.float64], NDArray[np.int64]]:
    """Clip convex polygons to the half-planes left of the edges a -> b."""
    rows = np.arange(polygons.shape[0])
    clipped = np.zeros_like(polygons)
    kept = np.zeros_like(counts)
    direction = b - a

    def side(points: NDArray[np.float64]) -> NDArray[np.float64]:
        return cross2d(direction, points - a)

    def emit(mask: NDArray[np.bool_], points: NDArray[np.float64]) -> None:
        clipped[rows[mask], kept[mask]] = points[mask]
        kept[mask] += 1

    for k in range(polygons.shape[1]):
        active = k < counts
        current = polygons[:, k]
        following = polygons[rows, (k + 1) % np.maximum(counts, 1)]
        s_current, s_following = side(current), side(following)
        current_in = s_current >= 0
        emit(active & current_in, current)
        crossing = active & (current_in != (s_following >= 0))
        denominator = np.where(crossing, s_current - s_following, 1.0)
        t = np.where(crossing, s_current / denominator, 0.0)
        emit(crossing, current + t[:, np.newaxis] * (following - current))
    return clipped, kept


def _refined_integrals(
    a_positions: NDArray[np.float64],
    a_values: NDArray[np.float64],
    lf_b: LatticeField,
) -> tuple[float, float, float]:
    """Integrate |A - B|^2 and |grad A - grad B|^2 over the common refinement."""
    b_positions, b_values = _triangles(lf_b, None)
    b_cells = np.floor(lf_b.to_lattice(b_positions.mean(axis=1))).astype(np.int64)
    lookup: dict[tuple[int, int], list[int]] = {}
    for number, (cx, cy) in enumerate(b_cells.tolist()):
        lookup.setdefault((cx, cy), []).append(number)
    a_grad, a_const = _affine(a_positions, a_values)
    b_grad, b_const = _affine(b_positions, b_values)
    # Orient every B triangle counterclockwise so "inside" means left of each edge.
    b_ccw = b_positions.copy()
    flip = cross2d(b_ccw[:, 1] - b_ccw[:, 0], b_ccw[:, 2] - b_ccw[:, 0]) < 0
    b_ccw[flip] = b_ccw[flip][:, [0, 2, 1]]
    pair_a, pair_b = [], []
    lattice = lf_b.to_lattice(a_positions.reshape(-1, 2)).reshape(-1, 3, 2)
    first = np.floor(lattice.min(axis=1)).astype(np.int64)
    last = np.floor(lattice.max(axis=1)).astype(np.int64)
    for index in range(a_positions.shape[0]):
        for cx in range(first[index, 0], last[index, 0] + 1):
            for cy in range(first[index, 1], last[index, 1] + 1):
                candidates = lookup.get((cx, cy), [])
                pair_a.extend([index] * len(candidates))
                pair_b.extend(candidates)
    ia, ib = np.asarray(pair_a, dtype=np.int64), np.asarray(pair_b, dtype=np.int64)
    polygons = np.zeros((ia.size, 9, 2))
    polygons[:, :3] = a_positions[ia]
    counts = np.full(ia.size, 3, dtype=np.int64)
    for edge in range(3):
        polygons, counts = _clip(
            polygons, counts, b_ccw[ib, edge], b_ccw[ib, (edge + 1) % 3]
        )
    value_sum = gradient_sum = covered = 0.0
    for fan in range(1, polygons.shape[1] - 1):
        use = counts > fan + 1
        if not np.any(use):
            continue
        triangles = np.stack(
            (polygons[use, 0], polygons[use, fan], polygons[use, fan + 1]), axis=1
        )
        area = _area(triangles)
        ga, gb = a_grad[ia[use]], b_grad[ib[use]]
        difference = (
            np.einsum("nij,nvj->nvi", ga - gb, triangles)
            + (a_const[ia[use]] - b_const[ib[use]])[:, np.newaxis, :]
        )
        value_sum += float(np.sum(_quadratic_integral(area, difference)))
        gradient_sum += float(np.sum(area * np.sum((ga - gb) ** 2, axis=(1, 2))))
        covered += float(np.sum(area))
    return value_sum, gradient_sum, covered


def interpolant_discrepancy(
    lf_a: LatticeField,
    lf_b: LatticeField,
    U: Domain,  # noqa: N803
    eps: float | None = None,
) -> tuple[float, float]:
    """Return the scaled L2 and H1 distances between two interpolants on `U`.

    The pair is ((1 / eps^2 |log eps|) int_U |A - B|^2, (1 / |log eps|)
    int_U |grad A - grad B|^2), where A and B interpolate `lf_a` and `lf_b`.  Here
    int_U runs over the union of the triangles of `lf_a` whose vertices all lie in U,
    so |U| in these integrals is the area those triangles cover, which falls short of
    the area of U by a boundary layer about one cell wide.  Both integrands are
    polynomial on each triangle of the common refinement, so the integrals are exact.

    Raises:
        ValueError: If the lattices are not planar or `lf_b` does not cover the
            triangles of `lf_a` in U.

    """
    if lf_a.dimension != 2 or lf_b.dimension != 2:  # noqa: PLR2004
        message = "Interpolant discrepancies are only implemented in two dimensions."
        raise ValueError(message)
    eps = lf_a.spacing if eps is None else eps
    positions, values = _triangles(lf_a, U)
    areas = _area(positions)
    if _same_mesh(lf_a, lf_b):
        cells = np.rint(lf_a.to_lattice(positions.reshape(-1, 2))).astype(np.int64)
        other = lf_b.gather(cells.reshape(-1, 3, 2))
        a_grad, _ = _affine(positions, values)
        b_grad, _ = _affine(positions, other)
        value_sum = float(np.sum(_quadratic_integral(areas, values - other)))
        squares = np.sum((a_grad - b_grad) ** 2, axis=(1, 2))
        gradient_sum = float(np.sum(areas * squares))
        covered = float(np.sum(areas))
    else:
        value_sum, gradient_sum, covered = _refined_integrals(positions, values, lf_b)
    total = float(np.sum(areas))
    if not math.isclose(covered, total, rel_tol=1e-9, abs_tol=1e-15):
        message = (
            f"Second lattice covers {covered} of the {total} area of U; it is not "
            "interpolable there."
        )
        raise ValueError(message)
    log = abs(math.log(eps))
    return value_sum / (eps**2 * log), gradient_sum / log


### Dumps ###


def dump_lattice(lf: LatticeField, path: Path) -> None:
    """Write the populated nodes of a planar lattice field as CSV `i,j,vx,vy`.

    Raises:
        ValueError: If the field is not planar or the file cannot be written.

    """
    if lf.dimension != 2:  # noqa: PLR2004
        message = "Only planar lattice fields can be dumped."
        raise ValueError(message)
    local = np.argwhere(lf.populated)
    values = lf.values[tuple(local.T)]
    table = np.column_stack((local + lf.origin, values))
    try:
        np.savetxt(
            path,
            table,
            delimiter=",",
            header="i,j,vx,vy",
            comments="",
            fmt=("%d", "%d", "%.17g", "%.17g"),
        )
    except OSError as e:
        message = f"Unable to write lattice dump: {path}"
        raise ValueError(message) from e


def lattice_from_values(
    values: Sequence[Sequence[Sequence[float]]],
    eps: float,
    *,
    split: DiagonalSplits = DiagonalSplits.kuhn,
    unit: bool = False,
) -> LatticeField:
    """Build a fully populated planar lattice field with origin 0 from a value grid.

    Args:
        values: Nested values of shape (n1, n2, 2); values[i][j] sits at eps(i, j).
        eps: The lattice spacing.
        split: The diagonal split of the interpolation mesh.
        unit: Whether the values lie on S^1.

    """
    array = np.asarray(values, dtype=np.float64)
    if array.ndim != 3 or array.shape[-1] != 2:  # noqa: PLR2004
        message = f"Values must have shape (n1, n2, 2), got: {array.shape}"
        raise ValueError(message)
    populated = np.ones(array.shape[:2], dtype=bool)
    return LatticeField(
        spacing=eps,
        frame=np.eye(2),
        offset=np.zeros(2),
        origin=np.zeros(2, dtype=np.int64),
        values=array,
        populated=populated,
        interior=populated.copy(),
        unit=unit,
        split=split,
    )
