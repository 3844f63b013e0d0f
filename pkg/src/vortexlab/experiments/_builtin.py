# SPDX-FileCopyrightText: 2025-present vortexlab contributors
# SPDX-License-Identifier: MIT

# Part of vortexlab, a numerical laboratory for nonlocal vortex energies.
# Copyright (C) 2025-present vortexlab contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this
# software and associated documentation files, to deal in the software without
# restriction, subject to the conditions of the MIT licence.  See LICENSES/MIT.txt.


"""The built-in acceptance experiments."""

from __future__ import annotations

import math
import time
from typing import TYPE_CHECKING, Final

import numpy as np
from loguru import logger

from vortexlab.api import (
    Annulus,
    Atom,
    AtomicCurrent,
    Ball,
    ConvergenceFlags,
    DiagonalSplits,
    EnergySpec,
    Linear,
    MultiVortex,
    Product2D,
    Rectangle,
    Scalings,
    SweepReport,
    SweepRow,
    bbm_linear_reference,
    convergence_check,
    discretize,
    discretize_rotated,
    energy,
    extract_vortices,
    flat_norm,
    flat_norm_exhaustive,
    interpolate_points,
    jacobian_measure,
    jensen_cell_gaps,
    kuhn_mesh,
    lattice_from_values,
    parse_cutoff,
    parse_domain,
    parse_field,
    parse_kernel,
    plaquette_degrees,
    sample,
    upper_bound_report,
    xy_energy,
)
from vortexlab.experiments.settings import ExperimentIds

__all__ = [
    "FlatConvergence",
    "FlatNormOracle",
    "InequalitySuite",
    "LinearExactness",
    "RotationIndependence",
    "VortexSweep",
    "XYSweep",
    "builtin_experiments",
]

if TYPE_CHECKING:
    from collections.abc import Callable

    from vortexlab.api import Domain, IExperiment, IField, PlanarDomain
    from vortexlab.experiments.settings import RunConfig

EXACT_TOLERANCE: Final = 1e-9
CONVERGENCE_FACTOR: Final = 10.0
"""Flat distances must stay below this many eps * pi."""
_SLACK: Final = 1e-12


### Shared helpers ###


def _elapsed_ms(cfg: RunConfig, start: float) -> float:
    return (time.perf_counter() - start) * 1e3 if cfg.record_timing else 0.0


def _planar(dom: Domain) -> PlanarDomain:
    if not isinstance(dom, Ball | Rectangle | Annulus):
        message = f"This experiment needs a planar domain, got: {dom}"
        raise ValueError(message)  # noqa: TRY004
    return dom


def _in_bracket(report: SweepReport, cfg: RunConfig) -> bool:
    low, high = cfg.bracket
    return all(low <= ratio <= high for ratio in report.ratios)


def _approaches_one(report: SweepReport) -> bool:
    """Whether |ratio - 1| does not grow as eps decreases."""
    gaps = [abs(ratio - 1.0) for ratio in report.ratios]
    return all(b <= a + 1e-9 for a, b in zip(gaps, gaps[1:], strict=False))


def _ratios_at_most_one(report: SweepReport) -> bool:
    return all(row.value <= row.reference for row in report.rows)


def _all_flagged(report: SweepReport, name: str) -> bool:
    return all(row.extra(name) == 1.0 for row in report.rows)


### E1 ###


class LinearExactness:
    """The BBM quadrature of a linear field against its closed form."""

    @property
    def id(self) -> str:
        """The experiment ID."""
        return str(ExperimentIds.E1)

    @property
    def description(self) -> str:
        """A one-line summary."""
        return "BBM energy of a linear field on a rectangle against the closed form"

    def run(self, cfg: RunConfig) -> SweepReport:
        """Return one row per eps: quadrature value against the reference.

        Raises:
            ValueError: If the domain is not a rectangle or the field is not a planar
                linear field.

        """
        kernel = parse_kernel(cfg.kernel)
        dom = parse_domain(cfg.domain)
        f = parse_field(cfg.field)
        if not isinstance(dom, Rectangle) or not isinstance(f, Linear):
            message = "E1 needs a rectangle domain and a linear field."
            raise ValueError(message)
        if len(f.matrix[0]) != 2:  # noqa: PLR2004
            message = "E1 needs a 2x2 matrix."
            raise ValueError(message)
        rows = []
        for eps in cfg.eps_list:
            start = time.perf_counter()
            spec = EnergySpec(
                kernel=kernel,
                domain=dom,
                epsilon=eps,
                scaling=Scalings.bbm,
                grid_step=eps / cfg.grid_factor,
                radial_nodes=cfg.radial_nodes,
                angular_nodes=cfg.angular_nodes,
            )
            value = energy(spec, f)
            reference = bbm_linear_reference(kernel, f.matrix, dom, eps)
            rows.append(
                SweepRow(
                    eps=eps,
                    value=value,
                    reference=reference,
                    wall_ms=_elapsed_ms(cfg, start),
                )
            )
        return SweepReport(rows=tuple(rows))

    def check(self, report: SweepReport, cfg: RunConfig) -> bool:
        """Every ratio within the configured tolerance of 1."""
        return all(abs(ratio - 1.0) <= cfg.tolerance for ratio in report.ratios)


### E2 and E7 ###


class VortexSweep:
    """Energy sweep of the straight single vortex against C_rho times its mass."""

    def __init__(self, experiment: ExperimentIds, dimension: int) -> None:
        self._experiment = experiment
        self._dimension = dimension

    @property
    def id(self) -> str:
        """The experiment ID."""
        return str(self._experiment)

    @property
    def description(self) -> str:
        """A one-line summary."""
        if self._dimension == 2:  # noqa: PLR2004
            return "Planar single-vortex energy sweep against the Gamma-limit"
        return "Product vortex energy sweep in three dimensions against the Gamma-limit"

    def run(self, cfg: RunConfig) -> SweepReport:
        """Return the upper-bound sweep over the configured eps list.

        Raises:
            ValueError: If the domain dimension does not match the experiment.

        """
        dom = parse_domain(cfg.domain)
        if dom.dimension != self._dimension:
            message = f"{self.id} needs a domain of dimension {self._dimension}."
            raise ValueError(message)
        if self._dimension == 3 and not isinstance(dom, Product2D):  # noqa: PLR2004
            message = f"{self.id} needs a cylinder domain."
            raise ValueError(message)
        return upper_bound_report(
            parse_kernel(cfg.kernel),
            dom,
            cfg.eps_list,
            parse_cutoff(cfg.cutoff),
            grid_factor=cfg.grid_factor,
            radial_nodes=cfg.radial_nodes,
            angular_nodes=cfg.angular_nodes,
            axial_nodes=cfg.axial_nodes,
            record_timing=cfg.record_timing,
        )

    def check(self, report: SweepReport, cfg: RunConfig) -> bool:
        """Ratios inside the bracket, approaching 1 as eps decreases."""
        return _in_bracket(report, cfg) and _approaches_one(report)


### E3 ###


class XYSweep:
    """The discrete XY energy of point samples against 4 pi times the mass."""

    @property
    def id(self) -> str:
        """The experiment ID."""
        return str(ExperimentIds.E3)

    @property
    def description(self) -> str:
        """A one-line summary."""
        return "Discrete XY energy of the sampled field against 4 pi times its mass"

    def run(self, cfg: RunConfig) -> SweepReport:
        """Return one row per eps: X_eps against 4 pi sum |d|."""
        dom = _planar(parse_domain(cfg.domain))
        f = parse_field(cfg.field)
        reference = 4.0 * math.pi * AtomicCurrent(atoms=f.atoms).mass
        rows = []
        for eps in cfg.eps_list:
            start = time.perf_counter()
            value = xy_energy(sample(f, dom, eps, offset=cfg.offset))
            rows.append(
                SweepRow(
                    eps=eps,
                    value=value,
                    reference=reference,
                    wall_ms=_elapsed_ms(cfg, start),
                )
            )
        return SweepReport(rows=tuple(rows))

    def check(self, report: SweepReport, cfg: RunConfig) -> bool:
        """Ratios inside the bracket, approaching 1 as eps decreases."""
        return _in_bracket(report, cfg) and _approaches_one(report)


### E4 ###


def _target(cfg: RunConfig, f: IField) -> AtomicCurrent:
    atoms = parse_field(cfg.target).atoms if cfg.target is not None else f.atoms
    return AtomicCurrent(atoms=tuple(atom for atom in atoms if atom.degree != 0))


class FlatConvergence:
    """Extraction of the cell-average Jacobians and their flat distance to a target."""

    @property
    def id(self) -> str:
        """The experiment ID."""
        return str(ExperimentIds.E4)

    @property
    def description(self) -> str:
        """A one-line summary."""
        return "Certified flat distance of extracted vortices to the target current"

    def run(self, cfg: RunConfig) -> SweepReport:
        """Return one row per (eps, margin) with the certified flat distance.

        Extras are `delta`, `exact` (1 when the extracted degrees equal the target
        degrees) and `quantized`.
        """
        dom = _planar(parse_domain(cfg.domain))
        f = parse_field(cfg.field)
        target = _target(cfg, f)
        start = time.perf_counter()
        result = convergence_check(
            [(eps, f) for eps in cfg.eps_list],
            target,
            dom,
            cfg.margins,
            threshold=cfg.threshold,
            tolerance_factor=CONVERGENCE_FACTOR,
        )
        flagged = ConvergenceFlags.non_quantized
        wall_ms = _elapsed_ms(cfg, start)
        rows = tuple(
            SweepRow(
                eps=row.eps,
                value=row.flat_distance,
                reference=CONVERGENCE_FACTOR * row.eps * math.pi,
                wall_ms=wall_ms,
                extras=(
                    ("delta", row.delta),
                    ("exact", float(row.degrees == target.degrees)),
                    ("quantized", float(row.flag is not flagged)),
                ),
            )
            for row in result.rows
        )
        return SweepReport(rows=rows)

    def check(self, report: SweepReport, cfg: RunConfig) -> bool:  # noqa: ARG002
        """Exact degrees and distances within 10 eps pi on every row."""
        return (
            _ratios_at_most_one(report)
            and _all_flagged(report, "exact")
            and _all_flagged(report, "quantized")
        )


### E5 ###


def _random_point(rng: np.random.Generator, dom: PlanarDomain) -> tuple[float, float]:
    (x0, y0), (x1, y1) = dom.bounding_box
    while True:
        point = (float(rng.uniform(x0, x1)), float(rng.uniform(y0, y1)))
        if float(dom.distance_to_boundary(np.asarray(point))) > 1e-3:  # noqa: PLR2004
            return point


def _random_current(
    rng: np.random.Generator, dom: PlanarDomain, count: int, max_degree: int = 1
) -> AtomicCurrent:
    atoms = []
    for _ in range(count):
        degree = int(rng.integers(1, max_degree + 1)) * int(rng.choice((-1, 1)))
        atoms.append(Atom(position=_random_point(rng, dom), degree=degree))
    return AtomicCurrent(atoms=tuple(atoms))


_ORACLE_DOMAINS: Final[tuple[PlanarDomain, ...]] = (
    Ball(radius=1.0),
    Rectangle(lo=(-1.0, -1.0), hi=(1.0, 1.0)),
)


class FlatNormOracle:
    """The matching flat norm against exhaustive enumeration on random instances."""

    @property
    def id(self) -> str:
        """The experiment ID."""
        return str(ExperimentIds.E5)

    @property
    def description(self) -> str:
        """A one-line summary."""
        return "Matching flat norm against exhaustive routing on random instances"

    def run(self, cfg: RunConfig) -> SweepReport:
        """Return one row per instance: |matching - exhaustive| against 1e-9."""
        rng = np.random.default_rng(cfg.seed)
        rows = []
        for index in range(cfg.samples):
            dom = _ORACLE_DOMAINS[index % len(_ORACLE_DOMAINS)]
            charges = int(rng.integers(1, 5))
            split = int(rng.integers(0, charges + 1))
            a = _random_current(rng, dom, split)
            b = _random_current(rng, dom, charges - split)
            start = time.perf_counter()
            matched = flat_norm(a, b, dom).value
            exhaustive = flat_norm_exhaustive(a, b, dom)
            rows.append(
                SweepRow(
                    eps=0.0,
                    value=abs(matched - exhaustive),
                    reference=EXACT_TOLERANCE,
                    wall_ms=_elapsed_ms(cfg, start),
                    extras=(("matching", matched), ("exhaustive", exhaustive)),
                )
            )
        return SweepReport(rows=tuple(rows))

    def check(self, report: SweepReport, cfg: RunConfig) -> bool:  # noqa: ARG002
        """Every instance agrees to 1e-9."""
        return _ratios_at_most_one(report)


### E6 ###


class RotationIndependence:
    """Vortices extracted from axis-aligned and rotated cell averages."""

    @property
    def id(self) -> str:
        """The experiment ID."""
        return str(ExperimentIds.E6)

    @property
    def description(self) -> str:
        """A one-line summary."""
        return "Flat distance between axis-aligned and rotated extractions"

    def run(self, cfg: RunConfig) -> SweepReport:
        """Return one row per eps: flat distance of the two extracted currents.

        Both currents are extracted in the domain shrunk by the smallest margin.
        Extras are `same_degrees` and the two certified bounds.
        """
        dom = _planar(parse_domain(cfg.domain))
        f = parse_field(cfg.field)
        angle = math.radians(cfg.rotation_degrees)
        xi = (math.cos(angle), math.sin(angle))
        region = dom.shrink(min(cfg.margins))
        rows = []
        for eps in cfg.eps_list:
            start = time.perf_counter()
            extractions = [
                extract_vortices(
                    jacobian_measure(lf).restricted(region),
                    cfg.threshold,
                    domain=region,
                )
                for lf in (discretize(f, dom, eps), discretize_rotated(f, dom, eps, xi))
            ]
            axis, rotated = extractions
            value = flat_norm(axis.current, rotated.current, region).value
            rows.append(
                SweepRow(
                    eps=eps,
                    value=value,
                    reference=CONVERGENCE_FACTOR * eps * math.pi,
                    wall_ms=_elapsed_ms(cfg, start),
                    extras=(
                        (
                            "same_degrees",
                            float(axis.current.degrees == rotated.current.degrees),
                        ),
                        ("axis_bound", axis.certified_bound),
                        ("rotated_bound", rotated.certified_bound),
                    ),
                )
            )
        return SweepReport(rows=tuple(rows))

    def check(self, report: SweepReport, cfg: RunConfig) -> bool:  # noqa: ARG002
        """Same degrees and distances within 10 eps pi."""
        return _ratios_at_most_one(report) and _all_flagged(report, "same_degrees")


### E8 ###


def _jensen_suite(rng: np.random.Generator, count: int) -> tuple[int, int]:
    violations = checks = 0
    dom = Ball(radius=1.0)
    for _ in range(count):
        f = MultiVortex(
            atoms=(Atom(position=_random_point(rng, Ball(radius=0.5)), degree=1),)
        )
        eps = float(rng.uniform(0.05, 0.1))
        for direction in (0, 1):
            gaps = jensen_cell_gaps(f, dom, eps, direction)
            checks += gaps.size
            violations += int(np.sum(gaps < -_SLACK))
    return violations, checks


def _partition_suite(rng: np.random.Generator, count: int) -> tuple[int, int]:
    violations = checks = 0
    meshes = [
        kuhn_mesh(2, DiagonalSplits.kuhn),
        kuhn_mesh(2, DiagonalSplits.anti_diagonal),
        kuhn_mesh(3, DiagonalSplits.kuhn),
    ]
    for mesh in meshes:
        _, weights = mesh.barycentric(rng.uniform(size=(count, mesh.dimension)))
        bad = (np.abs(np.sum(weights, axis=1) - 1.0) > EXACT_TOLERANCE) | (
            np.min(weights, axis=1) < -EXACT_TOLERANCE
        )
        checks += count
        violations += int(np.sum(bad))
    return violations, checks


def _affine_suite(rng: np.random.Generator, count: int) -> tuple[int, int]:
    violations = checks = 0
    eps, nodes = 0.1, 6
    grid = eps * np.moveaxis(np.indices((nodes, nodes)), 0, -1).astype(np.float64)
    for split in DiagonalSplits:
        matrix = rng.normal(size=(2, 2))
        shift = rng.normal(size=2)
        lf = lattice_from_values(grid @ matrix.T + shift, eps, split=split)
        points = rng.uniform(0.0, eps * (nodes - 1), size=(count, 2))
        errors = np.abs(interpolate_points(lf, points) - (points @ matrix.T + shift))
        checks += count
        violations += int(np.sum(np.max(errors, axis=1) > EXACT_TOLERANCE))
    return violations, checks


def _metric_suite(rng: np.random.Generator, count: int) -> tuple[int, int]:
    violations = checks = 0
    dom = Ball(radius=1.0)
    empty = AtomicCurrent()
    for _ in range(count):
        a, b, c = (
            _random_current(rng, dom, int(rng.integers(0, 3)), max_degree=2)
            for _ in range(3)
        )
        ab = flat_norm(a, b, dom).value
        ba = flat_norm(b, a, dom).value
        bc = flat_norm(b, c, dom).value
        ac = flat_norm(a, c, dom).value
        sink = math.pi * math.fsum(
            abs(atom.degree) * float(dom.distance_to_boundary(atom.position))
            for atom in a.atoms
        )
        results = (
            flat_norm(a, a, dom).value == 0.0,
            abs(ab - ba) <= EXACT_TOLERANCE,
            ac <= ab + bc + EXACT_TOLERANCE,
            flat_norm(a, empty, dom).value <= sink + EXACT_TOLERANCE,
        )
        checks += len(results)
        violations += sum(not ok for ok in results)
    return violations, checks


def _quantization_suite(rng: np.random.Generator, count: int) -> tuple[int, int]:
    violations = checks = 0
    dom = Rectangle(lo=(-1.0, -1.0), hi=(1.0, 1.0))
    for _ in range(count):
        atoms = tuple(
            Atom(
                position=_random_point(rng, Ball(radius=0.5)),
                degree=int(rng.choice((-2, -1, 1, 2))),
            )
            for _ in range(int(rng.integers(1, 3)))
        )
        lf = sample(
            MultiVortex(atoms=atoms),
            dom,
            1.0 / 32.0,
            offset=tuple(rng.uniform(size=2)),
        )
        winding = int(np.sum(plaquette_degrees(lf)))
        total = jacobian_measure(lf).total
        checks += 1
        violations += int(abs(winding - total / math.pi) >= 0.5)  # noqa: PLR2004
    return violations, checks


_SUITES: Final[tuple[tuple[str, Callable[..., tuple[int, int]]], ...]] = (
    ("jensen", _jensen_suite),
    ("partition_of_unity", _partition_suite),
    ("affine_reproduction", _affine_suite),
    ("flat_norm_metric", _metric_suite),
    ("quantization", _quantization_suite),
)


class InequalitySuite:
    """Randomized checks of the inequalities the other experiments rely on."""

    @property
    def id(self) -> str:
        """The experiment ID."""
        return str(ExperimentIds.E8)

    @property
    def description(self) -> str:
        """A one-line summary."""
        return "Randomized inequality and identity checks"

    def run(self, cfg: RunConfig) -> SweepReport:
        """Return one row per suite: violations against checks.

        The Jensen and quantization suites draw samples / 10 instances (at least
        one); the others draw `samples`.
        """
        rng = np.random.default_rng(cfg.seed)
        heavy = max(1, cfg.samples // 10)
        counts = {"jensen": heavy, "quantization": heavy}
        rows = []
        for index, (name, suite) in enumerate(_SUITES):
            start = time.perf_counter()
            violations, checks = suite(rng, counts.get(name, cfg.samples))
            logger.debug(f"Suite {name}: {violations} violations in {checks} checks")
            rows.append(
                SweepRow(
                    eps=0.0,
                    value=float(violations),
                    reference=float(checks),
                    wall_ms=_elapsed_ms(cfg, start),
                    extras=(("suite", float(index)),),
                )
            )
        return SweepReport(rows=tuple(rows))

    def check(self, report: SweepReport, cfg: RunConfig) -> bool:  # noqa: ARG002
        """No violations at all."""
        return all(row.value == 0 for row in report.rows)


def builtin_experiments() -> list[IExperiment]:
    """Return one instance of every built-in experiment."""
    return [
        LinearExactness(),
        VortexSweep(ExperimentIds.E2, 2),
        XYSweep(),
        FlatConvergence(),
        FlatNormOracle(),
        RotationIndependence(),
        VortexSweep(ExperimentIds.E7, 3),
        InequalitySuite(),
    ]
