# SPDX-FileCopyrightText: 2025-present vortexlab contributors
# SPDX-License-Identifier: MIT

# Part of vortexlab, a numerical laboratory for nonlocal vortex energies.
# Copyright (C) 2025-present vortexlab contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this
# software and associated documentation files, to deal in the software without
# restriction, subject to the conditions of the MIT licence.  See LICENSES/MIT.txt.


"""Unit tests for the .api._energy module."""

from __future__ import annotations

import math
from dataclasses import replace
from typing import TYPE_CHECKING, Any, Final

import numpy as np
import pytest
from logot import Logot, logged

import vortexlab.api._energy as energy_module
from tests.unit.conftest import SQUARE, UNIT_BALL, UNIT_SQUARE
from vortexlab.api import (
    Annulus,
    Atom,
    Constant,
    CutoffKinds,
    CutoffRule,
    EnergySpec,
    IField,
    InfeasibleGridError,
    Kernel,
    Linear,
    MultiVortex,
    Product2D,
    Rectangle,
    Sampled,
    Scalings,
    bbm_linear_reference,
    discretize,
    energy,
    energy_pairwise_oracle,
    evaluate_energy,
    evaluate_energy_pairwise,
    gamma_limit_constant,
    indicator_kernel,
    jensen_cell_gaps,
    midpoint_grid,
    parse_cutoff,
    polar_nodes,
    single_vortex,
    table_kernel,
    triangle_kernel,
    upper_bound_report,
)

if TYPE_CHECKING:
    from pytest_mock import MockerFixture


IDENTITY: Final = Linear(matrix=((1.0, 0.0), (0.0, 1.0)))
IDENTITY_3D: Final = Linear(matrix=((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)))


def _indicator_identity_reference(eps: float) -> float:
    # Integral of |xi|^2 (1 - eps|xi1|)(1 - eps|xi2|) over the unit disc.
    return math.pi / 2.0 - 8.0 * eps / 5.0 + eps**2 / 3.0


def _bbm_spec(eps: float, kernel: Kernel | None = None, **overrides: Any) -> EnergySpec:
    return EnergySpec(
        kernel=kernel or indicator_kernel(),
        domain=UNIT_SQUARE,
        epsilon=eps,
        scaling=Scalings.bbm,
        **overrides,
    )


def _random_linear(seed: int) -> Linear:
    matrix = np.random.default_rng(seed).normal(size=(2, 2))
    return Linear(matrix=(tuple(matrix[0].tolist()), tuple(matrix[1].tolist())))


def _random_vortices(seed: int) -> MultiVortex:
    rng = np.random.default_rng(seed)
    positions = rng.uniform(0.1, 0.9, size=(3, 2))
    degrees = rng.choice([-1, 1], size=3)
    return MultiVortex(
        atoms=tuple(
            Atom(position=(float(x), float(y)), degree=int(d))
            for (x, y), d in zip(positions, degrees, strict=True)
        )
    )


def _random_sampled(seed: int, *, unit: bool) -> Sampled:
    ticks = np.linspace(0.0, 1.0, 6)
    values = np.random.default_rng(seed).normal(size=(6, 6, 2))
    return Sampled(xs=ticks, ys=ticks.copy(), values=values, unit=unit)


RANDOM_FIELDS: Final = [
    pytest.param(_random_linear(seed), id=f"linear-{seed}") for seed in (1, 2)
] + [
    pytest.param(_random_vortices(seed), id=f"vortices-{seed}") for seed in (3, 4)
] + [
    pytest.param(_random_sampled(5, unit=False), id="sampled-plane"),
    pytest.param(_random_sampled(6, unit=True), id="sampled-circle"),
]

KERNEL_PAIRS: Final = [
    pytest.param(
        indicator_kernel(), table_kernel([0.0, 1.0], [2.0, 2.0]), id="doubled"
    ),
    pytest.param(indicator_kernel(0.5), indicator_kernel(1.0), id="half-ball"),
    pytest.param(triangle_kernel(), indicator_kernel(), id="triangle"),
]


### EnergySpec Tests ###


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.1, 2.0])
def test_energyspec_should_reject_eps_outside_the_unit_interval(eps: float) -> None:
    with pytest.raises(ValueError, match="epsilon"):
        EnergySpec(kernel=indicator_kernel(), domain=UNIT_BALL, epsilon=eps)


def test_energyspec_should_default_the_grid_step_to_an_eighth_of_eps() -> None:
    spec = EnergySpec(kernel=indicator_kernel(), domain=UNIT_BALL, epsilon=0.2)
    assert spec.h == pytest.approx(0.025)
    assert spec.region == UNIT_BALL


def test_energyspec_should_reject_a_coarse_grid_step() -> None:
    with pytest.raises(ValueError, match="too coarse"):
        EnergySpec(
            kernel=indicator_kernel(), domain=UNIT_BALL, epsilon=0.2, grid_step=0.1
        )


def test_energyspec_should_reject_a_localization_of_another_dimension() -> None:
    with pytest.raises(ValueError, match="dimension of the domain"):
        EnergySpec(
            kernel=indicator_kernel(),
            domain=Product2D(base=UNIT_BALL, interval=(0.0, 1.0)),
            epsilon=0.2,
            localization=UNIT_BALL,
        )


@pytest.mark.parametrize(
    ("scaling", "expected"),
    [(Scalings.bbm, 25.0), (Scalings.vortex, 25.0 / abs(math.log(0.2)))],
)
def test_energyspec_scale_should_follow_the_scaling(
    scaling: Scalings, expected: float
) -> None:
    spec = EnergySpec(
        kernel=indicator_kernel(), domain=UNIT_BALL, epsilon=0.2, scaling=scaling
    )
    assert spec.scale == pytest.approx(expected)


def test_energyspec_should_be_immutable() -> None:
    spec = EnergySpec(kernel=indicator_kernel(), domain=UNIT_BALL, epsilon=0.2)
    with pytest.raises((AttributeError, ValueError)):
        spec.epsilon = 0.1  # type: ignore[misc]


### Cutoff Tests ###


@pytest.mark.parametrize(
    ("rule", "eps", "expected"),
    [
        (CutoffRule(), 0.01, 0.01 * math.log(abs(math.log(0.01)))),
        (CutoffRule(kind=CutoffKinds.power, parameter=0.5), 0.01, 0.1),
        (CutoffRule(kind=CutoffKinds.multiple, parameter=3.0), 0.01, 0.03),
    ],
)
def test_cutoffrule_radius_should_match_its_formula(
    rule: CutoffRule, eps: float, expected: float
) -> None:
    assert rule.radius(eps) == pytest.approx(expected)


def test_cutoffrule_log_log_should_fail_when_log_log_is_not_positive() -> None:
    with pytest.raises(ValueError, match="gives no positive radius"):
        CutoffRule().radius(0.5)


@pytest.mark.parametrize(
    ("kind", "parameter"), [(CutoffKinds.power, 1.0), (CutoffKinds.multiple, 0.0)]
)
def test_cutoffrule_should_reject_invalid_parameters(
    kind: CutoffKinds, parameter: float
) -> None:
    with pytest.raises(ValueError, match="cutoffs need"):
        CutoffRule(kind=kind, parameter=parameter)


def test_parse_cutoff_should_accept_every_form() -> None:
    assert parse_cutoff("log_log") == CutoffRule()
    assert parse_cutoff("power:0.25") == CutoffRule(
        kind=CutoffKinds.power, parameter=0.25
    )
    assert parse_cutoff("multiple:2") == CutoffRule(
        kind=CutoffKinds.multiple, parameter=2.0
    )


@pytest.mark.parametrize("spec", ["spiral", "power:2", "multiple:x"])
def test_parse_cutoff_should_reject_malformed_specs(spec: str) -> None:
    with pytest.raises(ValueError, match="Invalid cutoff spec"):
        parse_cutoff(spec)


### Grid Tests ###


def test_midpoint_grid_should_cover_the_region_with_cell_centres() -> None:
    grid = midpoint_grid(UNIT_SQUARE, 0.25)
    assert grid.shape == (16, 2)
    assert grid.min() == pytest.approx(0.125)
    assert grid.max() == pytest.approx(0.875)


def test_midpoint_grid_should_drop_nodes_outside_the_region() -> None:
    grid = midpoint_grid(UNIT_BALL, 0.1)
    assert np.all(np.hypot(grid[:, 0], grid[:, 1]) <= 1.0)
    assert grid.shape[0] * 0.01 == pytest.approx(math.pi, rel=0.05)


def test_polar_nodes_should_integrate_the_kernel_exactly_for_indicators() -> None:
    nodes, weights = polar_nodes(indicator_kernel(), 16, 8)
    assert float(np.sum(weights)) == pytest.approx(math.pi)
    assert np.all(nodes[:, 1] >= 0)


def test_polar_nodes_should_approximate_the_second_moment() -> None:
    nodes, weights = polar_nodes(triangle_kernel(), 64, 32)
    moment = float(np.sum(weights * np.sum(nodes**2, axis=-1)))
    assert moment == pytest.approx(2.0 * math.pi / 20.0, rel=1e-3)


### xi-form Evaluator Tests ###


def test_energy_should_vanish_for_a_constant_field() -> None:
    assert energy(_bbm_spec(0.2), Constant(value=(1.0, 0.0))) == 0.0


@pytest.mark.parametrize("eps", [0.2, 0.1])
def test_energy_should_match_the_linear_closed_form(eps: float) -> None:
    value = energy(_bbm_spec(eps), IDENTITY)
    assert value == pytest.approx(_indicator_identity_reference(eps), rel=0.02)


def test_energy_should_log_its_result(logot: Logot) -> None:
    energy(_bbm_spec(0.2), IDENTITY)
    logot.assert_logged(logged.debug("Energy at eps=0.2: %s"))


def test_evaluate_energy_should_report_the_quadrature_size() -> None:
    evaluation = evaluate_energy(
        _bbm_spec(0.2, radial_nodes=8, angular_nodes=4), IDENTITY
    )
    assert evaluation.grid_step == pytest.approx(0.025)
    assert evaluation.nodes == 40 * 40
    assert evaluation.quadrature_nodes == 32


def test_energy_should_localize_to_a_subset() -> None:
    whole = energy(_bbm_spec(0.2), IDENTITY)
    half = energy(
        _bbm_spec(0.2, localization=Rectangle(lo=(0.0, 0.0), hi=(0.5, 1.0))),
        IDENTITY,
    )
    assert 0 < half < whole


def test_vortex_scaling_should_divide_by_the_log() -> None:
    bbm = energy(_bbm_spec(0.2), IDENTITY)
    vortex = energy(
        EnergySpec(kernel=indicator_kernel(), domain=UNIT_SQUARE, epsilon=0.2),
        IDENTITY,
    )
    assert vortex == pytest.approx(bbm / abs(math.log(0.2)))


def test_energy_should_reject_infeasible_grids() -> None:
    with pytest.raises(InfeasibleGridError, match="exceeds the limit of 10") as info:
        energy(_bbm_spec(0.2, max_nodes=10), IDENTITY)
    assert info.value.nodes > 10
    assert info.value.estimated_bytes > 0


def test_energy_should_be_finite_for_a_vortex_on_the_grid() -> None:
    spec = EnergySpec(
        kernel=indicator_kernel(),
        domain=SQUARE,
        epsilon=0.25,
        radial_nodes=16,
        angular_nodes=16,
    )
    assert math.isfinite(energy(spec, single_vortex()))


def test_energy_should_not_depend_on_the_thread_count(
    monkeypatch: pytest.MonkeyPatch,
) -> None:
    spec = EnergySpec(
        kernel=indicator_kernel(),
        domain=UNIT_BALL,
        epsilon=0.25,
        radial_nodes=16,
        angular_nodes=16,
    )
    single = energy(spec, single_vortex())
    monkeypatch.setenv("VORTEXLAB_THREADS", "4")
    assert energy(spec, single_vortex()) == single


### Monotonicity and Sign Tests ###


@pytest.mark.parametrize("field", RANDOM_FIELDS)
@pytest.mark.parametrize("scaling", list(Scalings))
def test_energy_should_be_nonnegative(field: IField, scaling: Scalings) -> None:
    spec = EnergySpec(
        kernel=indicator_kernel(),
        domain=UNIT_SQUARE,
        epsilon=0.2,
        scaling=scaling,
        radial_nodes=12,
        angular_nodes=12,
    )
    assert energy(spec, field) >= 0.0


@pytest.mark.parametrize(("smaller", "larger"), KERNEL_PAIRS)
@pytest.mark.parametrize("field", RANDOM_FIELDS)
def test_energy_should_be_monotone_in_the_kernel(
    field: IField, smaller: Kernel, larger: Kernel
) -> None:
    low = energy(_bbm_spec(0.2, smaller, radial_nodes=12, angular_nodes=12), field)
    high = energy(_bbm_spec(0.2, larger, radial_nodes=12, angular_nodes=12), field)
    assert low <= high


def test_energy_should_double_with_a_doubled_kernel() -> None:
    field = _random_vortices(7)
    single = energy(_bbm_spec(0.2, indicator_kernel()), field)
    doubled = energy(_bbm_spec(0.2, table_kernel([0.0, 1.0], [2.0, 2.0])), field)
    assert doubled == pytest.approx(2.0 * single, rel=1e-12)


### Product Form Tests ###


def test_product_energy_should_match_the_first_order_expansion() -> None:
    spec = EnergySpec(
        kernel=indicator_kernel(),
        domain=Product2D(base=UNIT_SQUARE, interval=(0.0, 1.0)),
        epsilon=0.1,
        scaling=Scalings.bbm,
        radial_nodes=32,
        angular_nodes=16,
        axial_nodes=16,
    )
    # 8 pi / 15 is the eps -> 0 limit; overlap losses lower it by about eps 2 pi / 3.
    ratio = energy(spec, IDENTITY_3D) / (8.0 * math.pi / 15.0)
    assert 0.85 < ratio < 0.91


def test_product_energy_should_reject_non_planar_fields() -> None:
    spec = EnergySpec(
        kernel=indicator_kernel(),
        domain=Product2D(base=UNIT_SQUARE, interval=(0.0, 1.0)),
        epsilon=0.2,
    )
    with pytest.raises(ValueError, match="field of product form"):
        energy(spec, Linear(matrix=((1.0, 0.0, 1.0), (0.0, 1.0, 0.0))))


### Pairwise Oracle Tests ###


def test_pairwise_oracle_should_match_the_linear_reference() -> None:
    kernel = triangle_kernel()
    reference = bbm_linear_reference(kernel, ((1.0, 0.0), (0.0, 1.0)), UNIT_SQUARE, 0.2)
    value = energy_pairwise_oracle(_bbm_spec(0.2, kernel=kernel), IDENTITY)
    assert value == pytest.approx(reference, rel=0.05)


def test_pairwise_oracle_should_agree_with_the_xi_form() -> None:
    spec = _bbm_spec(0.2, kernel=triangle_kernel())
    field = single_vortex((0.5, 0.5))
    assert energy_pairwise_oracle(spec, field) == pytest.approx(
        energy(spec, field), rel=0.1
    )


def test_pairwise_sums_should_count_both_orientations() -> None:
    evaluation = evaluate_energy_pairwise(_bbm_spec(0.2), IDENTITY)
    assert evaluation.ordered_sum == pytest.approx(2.0 * evaluation.unordered_sum)
    assert evaluation.nodes == 1600
    assert evaluation.pairs > 0


def test_pairwise_oracle_should_enforce_its_node_limit() -> None:
    with pytest.raises(InfeasibleGridError, match="exceeds the limit of 100"):
        energy_pairwise_oracle(_bbm_spec(0.2), IDENTITY, max_nodes=100)


### Reference Tests ###


@pytest.mark.parametrize("eps", [1e-9, 0.1, 0.2, 0.5])
def test_bbm_linear_reference_should_match_the_indicator_closed_form(
    eps: float,
) -> None:
    value = bbm_linear_reference(
        indicator_kernel(), ((1.0, 0.0), (0.0, 1.0)), UNIT_SQUARE, eps
    )
    assert value == pytest.approx(_indicator_identity_reference(eps), rel=1e-8)


def test_bbm_linear_reference_should_reject_non_square_matrices() -> None:
    with pytest.raises(ValueError, match="needs a 2x2 matrix"):
        bbm_linear_reference(
            indicator_kernel(), ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)), UNIT_SQUARE, 0.1
        )


### upper_bound_report Tests ###


def test_upper_bound_report_should_build_one_row_per_eps() -> None:
    report = upper_bound_report(
        indicator_kernel(),
        UNIT_BALL,
        [0.3, 0.2],
        CutoffRule(kind=CutoffKinds.multiple, parameter=2.0),
        radial_nodes=8,
        angular_nodes=8,
    )
    reference = gamma_limit_constant(indicator_kernel(), 2)
    assert [row.eps for row in report.rows] == [0.3, 0.2]
    for row in report.rows:
        assert row.reference == pytest.approx(reference)
        assert row.value > 0
        assert row.wall_ms == 0.0
        assert row.extra("r_eps") == pytest.approx(2.0 * row.eps)
        assert 0 < row.extra("core_ratio") < row.ratio


def test_upper_bound_report_should_scale_the_reference_by_the_cylinder_length() -> (
    None
):
    report = upper_bound_report(
        indicator_kernel(),
        Product2D(base=UNIT_BALL, interval=(0.0, 2.0)),
        [0.3],
        CutoffRule(kind=CutoffKinds.multiple, parameter=2.0),
        radial_nodes=4,
        angular_nodes=4,
        axial_nodes=4,
        core_excised=False,
    )
    row = report.rows[0]
    reference = 2.0 * gamma_limit_constant(indicator_kernel(), 3)
    assert row.reference == pytest.approx(reference)
    assert [name for name, _ in row.extras] == ["r_eps", "predicted"]


def test_upper_bound_report_should_reject_non_ball_domains() -> None:
    with pytest.raises(ValueError, match="needs a Ball"):
        upper_bound_report(indicator_kernel(), Annulus(inner=0.5, outer=1.0), [0.1])


def test_upper_bound_report_should_reject_unsorted_eps() -> None:
    with pytest.raises(ValueError, match="strictly decreasing"):
        upper_bound_report(indicator_kernel(), UNIT_BALL, [0.1, 0.2])


### Jensen Tests ###


def test_jensen_cell_gaps_should_be_nonnegative_for_a_vortex() -> None:
    gaps = jensen_cell_gaps(single_vortex((0.03, 0.01)), SQUARE, 0.1)
    assert gaps.size > 0
    assert np.all(gaps >= -1e-12)
    assert np.max(gaps) > 0


@pytest.mark.parametrize("direction", [0, 1])
def test_jensen_cell_gaps_should_vanish_for_a_linear_field(direction: int) -> None:
    gaps = jensen_cell_gaps(IDENTITY, SQUARE, 0.1, direction)
    np.testing.assert_allclose(gaps, 0.0, atol=1e-12)


def test_jensen_cell_gaps_should_reject_other_directions() -> None:
    with pytest.raises(ValueError, match="Direction must be 0 or 1"):
        jensen_cell_gaps(IDENTITY, SQUARE, 0.1, 2)


@pytest.mark.parametrize("field", RANDOM_FIELDS)
@pytest.mark.parametrize("direction", [0, 1])
def test_jensen_cell_gaps_should_be_nonnegative_for_random_fields(
    field: IField, direction: int
) -> None:
    gaps = jensen_cell_gaps(field, UNIT_SQUARE, 0.1, direction)
    assert gaps.size > 0
    assert np.all(gaps >= -1e-12)


def test_jensen_cell_gaps_should_compare_against_the_discretization(
    mocker: MockerFixture,
) -> None:
    field = single_vortex((0.03, 0.01))
    spy = mocker.spy(energy_module, "discretize")
    jensen_cell_gaps(field, SQUARE, 0.1, points_per_side=3)
    spy.assert_called_once_with(
        field, SQUARE, 0.1, points_per_side=3, refined_points_per_side=3
    )


def test_jensen_cell_gaps_should_grow_when_the_lattice_jumps_vanish(
    mocker: MockerFixture,
) -> None:
    field = single_vortex((0.03, 0.01))
    gaps = jensen_cell_gaps(field, SQUARE, 0.1)
    lattice = discretize(
        field, SQUARE, 0.1, points_per_side=4, refined_points_per_side=4
    )
    flat = replace(lattice, values=np.zeros_like(lattice.values))
    mocker.patch.object(energy_module, "discretize", return_value=flat)
    upper = jensen_cell_gaps(field, SQUARE, 0.1)
    assert np.all(upper >= gaps)
    assert np.max(upper - gaps) > 0


def test_jensen_cell_gaps_should_log_the_cell_count(logot: Logot) -> None:
    jensen_cell_gaps(IDENTITY, SQUARE, 0.1)
    logot.assert_logged(
        logged.debug("Jensen gaps on %d cells at eps=0.1 in direction 0")
    )
