# SPDX-FileCopyrightText: 2025-present vortexlab contributors
# SPDX-License-Identifier: MIT

# Part of vortexlab, a numerical laboratory for nonlocal vortex energies.
# Copyright (C) 2025-present vortexlab contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this
# software and associated documentation files, to deal in the software without
# restriction, subject to the conditions of the MIT licence.  See LICENSES/MIT.txt.


"""Unit tests for the .api._currents module."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING, Final

import numpy as np
import pytest
from logot import Logot, logged

from tests.unit.conftest import SQUARE, UNIT_BALL, UNIT_SQUARE
from vortexlab.api import (
    Annulus,
    Atom,
    AtomicCurrent,
    Ball,
    ClusterQuality,
    Constant,
    ConvergenceFlags,
    DegreeUndefinedError,
    DiagonalSplits,
    JacobianMeasure,
    MultiVortex,
    OutsideDomainError,
    PlanarDomain,
    Product2D,
    Rectangle,
    TransportLeg,
    boundary_circulation,
    convergence_check,
    discretize,
    discretize_rotated,
    extract_vortices,
    flat_norm,
    flat_norm_exhaustive,
    jacobian_measure,
    lattice_from_values,
    path_length,
    plaquette_degrees,
    sample,
    single_vortex,
    winding_oracle,
)

if TYPE_CHECKING:
    from vortexlab.api import LatticeField


CELL: Final = 0.1
CELL_RADIUS: Final = 0.5 * math.sqrt(2.0) * CELL
EMPTY: Final = AtomicCurrent()
ORIGIN_VORTEX: Final = AtomicCurrent(atoms=(Atom(position=(0.0, 0.0), degree=1),))
DIPOLE: Final = AtomicCurrent(
    atoms=(
        Atom(position=(-0.2, 0.0), degree=1),
        Atom(position=(0.2, 0.0), degree=-1),
    )
)
RING: Final = Annulus(inner=0.5, outer=1.0)


def _measure(cells: dict[tuple[int, int], float], n: int = 10) -> JacobianMeasure:
    masses = np.zeros((n, n))
    for index, mass in cells.items():
        masses[index] = mass
    return JacobianMeasure(
        spacing=CELL,
        frame=np.eye(2),
        offset=np.zeros(2),
        origin=np.zeros(2, dtype=np.int64),
        masses=masses,
        variation=np.abs(masses),
        populated=np.ones((n, n), dtype=bool),
        skipped=0,
    )


def _random_current(
    rng: np.random.Generator, dom: PlanarDomain, atoms: int
) -> AtomicCurrent:
    lo, hi = dom.bounding_box
    chosen: list[Atom] = []
    while len(chosen) < atoms:
        point = rng.uniform(lo, hi)
        if dom.distance_to_boundary(point) > 0.05:
            degree = int(rng.choice([-2, -1, 1, 2]))
            chosen.append(
                Atom(position=(float(point[0]), float(point[1])), degree=degree)
            )
    return AtomicCurrent(atoms=tuple(chosen))


### AtomicCurrent Tests ###


def test_atomiccurrent_should_reject_zero_degrees() -> None:
    with pytest.raises(ValueError, match="nonzero degree"):
        AtomicCurrent(atoms=(Atom(position=(0.0, 0.0), degree=0),))


def test_atomiccurrent_should_report_mass_and_sorted_degrees() -> None:
    current = AtomicCurrent(
        atoms=(
            Atom(position=(0.0, 0.0), degree=2),
            Atom(position=(0.5, 0.0), degree=-3),
        )
    )
    assert current.mass == 5
    assert current.degrees == (-3, 2)
    assert EMPTY.mass == 0


### Jacobian Measure Tests ###


def test_jacobian_measure_should_give_eps_squared_det_for_affine_data() -> None:
    matrix = np.array([[1.0, 2.0], [-0.5, 3.0]])
    nodes = 0.25 * np.moveaxis(np.indices((5, 5)), 0, -1).astype(np.float64)
    lf = lattice_from_values((nodes @ matrix.T).tolist(), 0.25)
    jm = jacobian_measure(lf)
    np.testing.assert_allclose(jm.masses, 0.0625 * np.linalg.det(matrix))
    assert jm.skipped == 0


def test_jacobian_measure_should_vanish_for_constant_data() -> None:
    jm = jacobian_measure(sample(Constant(value=(1.0, 0.0)), SQUARE, 0.1))
    assert jm.total == 0.0
    assert jm.total_variation == 0.0


@pytest.mark.parametrize("split", list(DiagonalSplits))
def test_jacobian_measure_should_sum_the_triangle_cross_products(
    split: DiagonalSplits,
) -> None:
    values = [[[1.0, 0.0], [-1.0, 0.0]], [[0.0, 1.0], [-0.5, 0.5]]]
    jm = jacobian_measure(lattice_from_values(values, 1.0, split=split))
    assert jm.masses.shape == (1, 1)
    assert jm.masses[0, 0] == pytest.approx(1.0)


def test_jacobian_measure_should_not_depend_on_the_diagonal_split() -> None:
    rng = np.random.default_rng(21)
    values = rng.normal(size=(6, 6, 2)).tolist()
    kuhn = jacobian_measure(lattice_from_values(values, 0.5))
    anti = jacobian_measure(
        lattice_from_values(values, 0.5, split=DiagonalSplits.anti_diagonal)
    )
    np.testing.assert_allclose(kuhn.masses, anti.masses, atol=1e-12)


def test_jacobian_measure_should_skip_and_log_partial_cells(logot: Logot) -> None:
    jm = jacobian_measure(discretize(single_vortex(), UNIT_BALL, 0.1))
    assert jm.skipped > 0
    assert np.all(np.isnan(jm.masses[~jm.populated]))
    logot.assert_logged(logged.debug("Skipped %s partially populated cells."))


def test_jacobian_measure_should_reject_cylinders() -> None:
    cylinder = Product2D(base=UNIT_BALL, interval=(0.0, 1.0))
    with pytest.raises(ValueError, match="only implemented in two dimensions"):
        jacobian_measure(sample(Constant(value=(1.0, 0.0)), cylinder, 0.25))


def test_jacobian_measure_total_should_add_up_the_cells() -> None:
    jm = jacobian_measure(sample(single_vortex((0.013, 0.021)), SQUARE, 0.1))
    assert jm.total == pytest.approx(
        float(np.sum(jm.masses[jm.populated])), abs=1e-12
    )
    assert jm.total_variation >= abs(jm.total)


@pytest.mark.parametrize(
    "lattice",
    [
        sample(single_vortex((0.013, 0.021)), SQUARE, 0.1),
        discretize(single_vortex((0.013, 0.021)), SQUARE, 0.1),
        discretize_rotated(
            MultiVortex(atoms=(Atom(position=(0.1, -0.05), degree=-2),)),
            SQUARE,
            0.1,
            (math.cos(0.4), math.sin(0.4)),
        ),
    ],
)
def test_block_total_should_equal_the_boundary_circulation(
    lattice: LatticeField,
) -> None:
    jm = jacobian_measure(lattice)
    lo, hi = (-4, -3), (4, 5)
    assert jm.block_total(lo, hi) == pytest.approx(
        boundary_circulation(lattice, lo, hi),
        abs=1e-9,
    )


def test_boundary_circulation_should_count_the_enclosed_vortex() -> None:
    lf = sample(single_vortex((0.013, 0.021)), SQUARE, 0.05)
    assert boundary_circulation(lf, (-10, -10), (10, 10)) == pytest.approx(
        math.pi, rel=1e-2
    )


def test_boundary_circulation_should_reject_empty_blocks() -> None:
    lf = sample(single_vortex((0.013, 0.021)), SQUARE, 0.1)
    with pytest.raises(ValueError, match="Empty block"):
        boundary_circulation(lf, (0, 0), (0, 3))


def test_restricted_should_keep_cells_inside_the_set() -> None:
    jm = jacobian_measure(sample(single_vortex((0.013, 0.021)), SQUARE, 0.05))
    inner = jm.restricted(Ball(radius=0.5))
    assert 0 < int(np.sum(inner.populated)) < int(np.sum(jm.populated))
    centres = inner.cell_centres()[inner.populated]
    assert np.all(np.hypot(centres[:, 0], centres[:, 1]) < 0.5)
    assert inner.total == pytest.approx(math.pi, rel=2e-2)


def test_cell_radius_should_be_half_the_diagonal() -> None:
    assert _measure({}).cell_radius == pytest.approx(CELL_RADIUS)


### Extraction Tests ###


def test_extract_vortices_should_find_a_single_vortex() -> None:
    eps = 1.0 / 64.0
    truth = np.array([0.1, -0.05])
    jm = jacobian_measure(discretize(single_vortex((0.1, -0.05)), SQUARE, eps))
    extraction = extract_vortices(jm)
    assert extraction.current.degrees == (1,)
    position = np.asarray(extraction.current.atoms[0].position)
    assert np.linalg.norm(position - truth) <= 3.0 * eps
    assert not extraction.non_quantized


def test_extract_vortices_should_find_both_charges_of_a_dipole() -> None:
    eps = 1.0 / 64.0
    field = MultiVortex(atoms=DIPOLE.atoms)
    extraction = extract_vortices(jacobian_measure(discretize(field, SQUARE, eps)))
    assert extraction.current.degrees == (-1, 1)
    for atom in extraction.current.atoms:
        truth = (-0.2, 0.0) if atom.degree == 1 else (0.2, 0.0)
        assert math.dist(atom.position, truth) <= 3.0 * eps


def test_extract_vortices_should_return_nothing_for_a_constant_field() -> None:
    jm = jacobian_measure(discretize(Constant(value=(0.0, 1.0)), SQUARE, 0.1))
    extraction = extract_vortices(jm)
    assert extraction.current == EMPTY
    assert extraction.residual_mass == 0.0
    assert extraction.certified_bound == 0.0


def test_extract_vortices_should_bound_the_residual_by_boundary_transport() -> None:
    extraction = extract_vortices(
        _measure({(7, 7): math.pi, (1, 1): 0.1 * math.pi}), domain=UNIT_SQUARE
    )
    assert extraction.current == AtomicCurrent(
        atoms=(Atom(position=(0.75, 0.75), degree=1),)
    )
    assert extraction.clusters[0].quality is ClusterQuality.quantized
    assert extraction.clusters[0].cells == 25
    assert extraction.residual_mass == pytest.approx(0.1 * math.pi)
    residual_bound = 0.1 * math.pi * (0.15 + CELL_RADIUS)
    assert extraction.residual_bound == pytest.approx(residual_bound)
    assert extraction.certified_bound == pytest.approx(
        math.pi * CELL_RADIUS + residual_bound
    )


def test_extract_vortices_should_attach_residual_mass_to_a_nearby_atom() -> None:
    cells = {(10, 10): math.pi, (10, 13): 0.01 * math.pi, (10, 7): -0.01 * math.pi}
    extraction = extract_vortices(
        _measure(cells, n=20), domain=Rectangle(lo=(0.0, 0.0), hi=(2.0, 2.0))
    )
    # Both leftover cells are 0.3 from the atom and further from the boundary.
    assert extraction.current.degrees == (1,)
    assert extraction.residual_bound == pytest.approx(
        0.01 * math.pi * (1.4 + 2.0 * CELL_RADIUS)
    )
    assert extraction.certified_bound == pytest.approx(
        math.pi * CELL_RADIUS + 0.01 * math.pi * (0.6 + 2.0 * CELL_RADIUS)
    )


def test_extract_vortices_should_flag_non_quantized_clusters() -> None:
    extraction = extract_vortices(_measure({(5, 5): 0.6 * math.pi}))
    assert extraction.current.degrees == (1,)
    assert extraction.clusters[0].quality is ClusterQuality.non_quantized
    assert extraction.non_quantized


def test_extract_vortices_should_drop_clusters_below_the_threshold() -> None:
    extraction = extract_vortices(_measure({(5, 5): 0.6 * math.pi}), threshold=0.7)
    assert extraction.current == EMPTY
    assert extraction.residual_mass == pytest.approx(0.6 * math.pi)


def test_extract_vortices_should_log_a_merged_neutral_dipole(logot: Logot) -> None:
    extraction = extract_vortices(_measure({(5, 5): math.pi, (5, 6): -math.pi}))
    assert extraction.current == EMPTY
    assert extraction.residual_mass == pytest.approx(2.0 * math.pi)
    logot.assert_logged(
        logged.debug("Dropped a neutral cluster of variation 6.283 at (0.55, 0.6)")
    )


def test_extract_vortices_should_not_log_a_weak_cluster(logot: Logot) -> None:
    extract_vortices(_measure({(5, 5): 0.6 * math.pi}), threshold=0.7)
    logot.assert_not_logged(logged.debug("Dropped a neutral cluster%s"))


def test_extract_vortices_should_ignore_cells_outside_the_domain() -> None:
    extraction = extract_vortices(
        _measure({(8, 8): math.pi}), domain=Rectangle(lo=(0.0, 0.0), hi=(0.5, 0.5))
    )
    assert extraction.current == EMPTY
    assert extraction.certified_bound == 0.0


def test_extract_vortices_should_log_the_degrees(logot: Logot) -> None:
    extract_vortices(_measure({(5, 5): -math.pi}))
    logot.assert_logged(logged.debug("Extracted degrees (-1,) from %s"))


### Winding Oracle Tests ###


def test_winding_oracle_should_find_the_plaquette_holding_the_vortex() -> None:
    lf = sample(single_vortex(), SQUARE, 0.1, offset=(0.5, 0.5))
    current = winding_oracle(lf)
    assert current.degrees == (1,)
    np.testing.assert_allclose(current.atoms[0].position, (0.0, 0.0), atol=1e-12)


def test_winding_oracle_should_total_a_double_vortex() -> None:
    field = MultiVortex(atoms=(Atom(position=(0.013, 0.021), degree=-2),))
    degrees = plaquette_degrees(sample(field, SQUARE, 0.1, offset=(0.3, 0.6)))
    assert int(np.sum(degrees)) == -2


def test_winding_oracle_should_be_empty_for_a_constant_field() -> None:
    assert winding_oracle(sample(Constant(value=(1.0, 0.0)), SQUARE, 0.1)) == EMPTY


def test_winding_oracle_should_reject_antipodal_bonds() -> None:
    values = [[[1.0, 0.0], [0.0, 1.0]], [[-1.0, 0.0], [0.0, 1.0]]]
    lf = lattice_from_values(values, 1.0, unit=True)
    with pytest.raises(DegreeUndefinedError, match="Antipodal bond"):
        winding_oracle(lf)


def test_winding_oracle_should_reject_non_unit_fields() -> None:
    lf = sample(Constant(value=(2.0, 0.0)), SQUARE, 0.1)
    with pytest.raises(ValueError, match="with unit values"):
        winding_oracle(lf)


def test_winding_oracle_should_agree_with_the_quantized_jacobian() -> None:
    field = MultiVortex(
        atoms=(
            Atom(position=(0.113, 0.021), degree=1),
            Atom(position=(-0.31, -0.2), degree=1),
        )
    )
    lf = sample(field, SQUARE, 0.02, offset=(0.3, 0.6))
    degrees = plaquette_degrees(lf)
    jm = jacobian_measure(lf)
    lo, hi = (-40, -40), (40, 40)
    first, last = np.asarray(lo) - lf.origin, np.asarray(hi) - lf.origin
    winding = int(np.sum(degrees[first[0] : last[0], first[1] : last[1]]))
    assert winding == 2
    assert abs(jm.block_total(lo, hi) / math.pi - winding) < 0.5


### Flat Norm Tests ###


def test_flat_norm_should_route_a_lone_charge_to_the_boundary() -> None:
    result = flat_norm(ORIGIN_VORTEX, EMPTY, UNIT_BALL)
    assert result.value == pytest.approx(math.pi)
    assert len(result.plan) == 1
    assert result.plan[0].target is None
    assert result.plan[0].length == pytest.approx(1.0)


def test_flat_norm_should_pair_a_close_dipole() -> None:
    result = flat_norm(DIPOLE, EMPTY, UNIT_BALL)
    assert result.value == pytest.approx(0.4 * math.pi)
    assert [(leg.source, leg.target) for leg in result.plan] == [
        ((-0.2, 0.0), (0.2, 0.0))
    ]


def test_flat_norm_plan_should_spell_out_every_transport_leg() -> None:
    a = AtomicCurrent(atoms=(Atom(position=(0.6, 0.0), degree=1),))
    b = AtomicCurrent(atoms=(Atom(position=(-0.6, 0.0), degree=1),))
    # Leaving through the circle (0.4 each) beats pairing across 1.2.
    plan = flat_norm(a, b, UNIT_BALL).plan
    assert all(isinstance(leg, TransportLeg) for leg in plan)
    assert [(leg.source, leg.target, leg.mass) for leg in plan] == [
        ((0.6, 0.0), None, math.pi),
        ((-0.6, 0.0), None, math.pi),
    ]
    assert [leg.length for leg in plan] == pytest.approx([0.4, 0.4])


def test_flat_norm_plan_should_carry_the_paired_leg_of_a_dipole() -> None:
    (leg,) = flat_norm(DIPOLE, EMPTY, UNIT_BALL).plan
    assert leg == TransportLeg(
        source=(-0.2, 0.0), target=(0.2, 0.0), mass=math.pi, length=leg.length
    )
    assert leg.length == pytest.approx(0.4)


def test_flat_norm_should_vanish_for_equal_currents() -> None:
    assert flat_norm(DIPOLE, DIPOLE, UNIT_BALL).value == 0.0
    assert flat_norm(EMPTY, EMPTY, UNIT_BALL).plan == ()


def test_flat_norm_value_should_be_the_plan_cost() -> None:
    rng = np.random.default_rng(31)
    a, b = _random_current(rng, UNIT_BALL, 3), _random_current(rng, UNIT_BALL, 2)
    result = flat_norm(a, b, UNIT_BALL)
    assert result.value == pytest.approx(
        sum(leg.mass * leg.length for leg in result.plan)
    )
    assert all(leg.mass == pytest.approx(math.pi) for leg in result.plan)


@pytest.mark.parametrize("dom", [UNIT_BALL, SQUARE, RING])
def test_flat_norm_should_be_a_metric(dom: PlanarDomain) -> None:
    rng = np.random.default_rng(41)
    for _ in range(30):
        a, b, c = (_random_current(rng, dom, int(rng.integers(0, 3))) for _ in "abc")
        ab = flat_norm(a, b, dom).value
        assert ab == pytest.approx(flat_norm(b, a, dom).value, abs=1e-9)
        assert ab <= flat_norm(a, c, dom).value + flat_norm(c, b, dom).value + 1e-9


def test_flat_norm_should_be_at_most_the_boundary_routing() -> None:
    rng = np.random.default_rng(42)
    for _ in range(20):
        a = _random_current(rng, UNIT_BALL, 3)
        bound = math.pi * sum(
            abs(atom.degree) * (1.0 - math.hypot(*atom.position)) for atom in a.atoms
        )
        assert flat_norm(a, EMPTY, UNIT_BALL).value <= bound + 1e-9


@pytest.mark.parametrize("dom", [UNIT_BALL, SQUARE, RING])
def test_flat_norm_should_match_exhaustive_routing(dom: PlanarDomain) -> None:
    rng = np.random.default_rng(43)
    for _ in range(25):
        a = AtomicCurrent(
            atoms=tuple(
                Atom(position=atom.position, degree=int(np.sign(atom.degree)))
                for atom in _random_current(rng, dom, int(rng.integers(1, 3))).atoms
            )
        )
        b = AtomicCurrent(
            atoms=tuple(
                Atom(position=atom.position, degree=int(np.sign(atom.degree)))
                for atom in _random_current(rng, dom, int(rng.integers(0, 3))).atoms
            )
        )
        assert flat_norm(a, b, dom).value == pytest.approx(
            flat_norm_exhaustive(a, b, dom), abs=1e-12
        )


def test_flat_norm_should_reject_atoms_outside_the_domain() -> None:
    outside = AtomicCurrent(atoms=(Atom(position=(1.0, 0.0), degree=1),))
    with pytest.raises(OutsideDomainError, match="is not inside the domain"):
        flat_norm(outside, EMPTY, UNIT_BALL)


def test_flat_norm_should_cap_the_degree_per_atom() -> None:
    heavy = AtomicCurrent(atoms=(Atom(position=(0.0, 0.0), degree=21),))
    with pytest.raises(ValueError, match="exceeds the limit of 20 unit charges"):
        flat_norm(heavy, EMPTY, UNIT_BALL)


def test_flat_norm_should_reject_cylinders() -> None:
    cylinder = Product2D(base=UNIT_BALL, interval=(0.0, 1.0))
    with pytest.raises(ValueError, match="only implemented for planar domains"):
        flat_norm(EMPTY, EMPTY, cylinder)


def test_flat_norm_exhaustive_should_cap_the_charge_count() -> None:
    many = AtomicCurrent(atoms=(Atom(position=(0.0, 0.0), degree=9),))
    with pytest.raises(ValueError, match="capped at 8 charges"):
        flat_norm_exhaustive(many, EMPTY, UNIT_BALL)


def test_path_length_should_go_around_the_hole_of_an_annulus() -> None:
    expected = 2.0 * math.sqrt(0.75**2 - 0.25) + 0.5 * (
        math.pi - 2.0 * math.acos(0.5 / 0.75)
    )
    length = path_length(RING, np.array([-0.75, 0.0]), np.array([0.75, 0.0]))
    assert length == pytest.approx(expected)


@pytest.mark.parametrize("dom", [UNIT_BALL, RING])
def test_path_length_should_be_straight_when_the_segment_stays_inside(
    dom: PlanarDomain,
) -> None:
    length = path_length(dom, np.array([0.75, 0.0]), np.array([0.75, 0.3]))
    assert length == pytest.approx(0.3)


### Convergence Tests ###


def test_convergence_check_should_report_zero_for_constant_fields() -> None:
    field = Constant(value=(1.0, 0.0))
    report = convergence_check(
        [(1.0 / 16.0, field), (1.0 / 32.0, field)], EMPTY, SQUARE, [0.1, 0.2]
    )
    assert [row.flat_distance for row in report.rows] == [0.0] * 4
    assert report.converged
    assert report.decreasing == ((0.1, True), (0.2, True))


def test_convergence_check_should_certify_a_single_vortex() -> None:
    field = single_vortex((0.013, -0.021))
    target = AtomicCurrent(atoms=(Atom(position=(0.013, -0.021), degree=1),))
    sequence = [(1.0 / 64.0, field), (1.0 / 32.0, field)]
    report = convergence_check(sequence, target, SQUARE, [0.1, 0.2])
    assert [row.eps for row in report.rows] == [1 / 32, 1 / 32, 1 / 64, 1 / 64]
    for row in report.rows:
        assert row.flag is ConvergenceFlags.ok
        assert row.degrees == (1,)
        assert row.flat_distance <= 10.0 * row.eps * math.pi


def test_convergence_check_should_flag_a_wrong_target() -> None:
    field = single_vortex((0.013, -0.021))
    target = AtomicCurrent(atoms=(Atom(position=(0.0, 0.0), degree=2),))
    report = convergence_check([(1.0 / 32.0, field)], target, SQUARE, [0.2])
    (row,) = report.rows
    assert row.flag is ConvergenceFlags.non_convergent
    assert row.flat_distance >= math.pi * 0.7
    assert not report.converged


def test_convergence_check_should_reject_targets_near_the_boundary() -> None:
    target = AtomicCurrent(atoms=(Atom(position=(0.85, 0.0), degree=1),))
    with pytest.raises(ValueError, match="within 0.2 of the boundary"):
        convergence_check([(0.1, single_vortex())], target, SQUARE, [0.1, 0.2])


def test_convergence_check_should_need_a_margin() -> None:
    with pytest.raises(ValueError, match="At least one margin"):
        convergence_check([(0.1, single_vortex())], EMPTY, SQUARE, [])
