# SPDX-FileCopyrightText: 2025-present vortexlab contributors
# SPDX-License-Identifier: MIT

# Part of vortexlab, a numerical laboratory for nonlocal vortex energies.
# Copyright (C) 2025-present vortexlab contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this
# software and associated documentation files, to deal in the software without
# restriction, subject to the conditions of the MIT licence.  See LICENSES/MIT.txt.


"""Public API for *vortexlab*.

Everything is meant to be used through this package.

Example:
    ```python linenums="1"
    kernel = indicator_kernel()
    domain = Ball(radius=1.0)
    spec = EnergySpec(kernel=kernel, domain=domain, epsilon=0.02)
    ratio = energy(spec, single_vortex()) / gamma_limit_constant(kernel, 2)

    lf = discretize(single_vortex(), Rectangle(lo=(-1, -1), hi=(1, 1)), 1 / 64)
    extraction = extract_vortices(jacobian_measure(lf))
    print(extraction.current.degrees, extraction.certified_bound)
    ```

"""

from __future__ import annotations

from vortexlab.api._currents import (
    EXHAUSTIVE_CHARGE_LIMIT,
    MAX_UNIT_CHARGES_PER_ATOM,
    MERGE_RADIUS,
    QUANTIZATION_SLACK,
    SEED_FRACTION,
    AtomicCurrent,
    ClusterQuality,
    ConvergenceFlags,
    ConvergenceReport,
    ConvergenceRow,
    FlatNormResult,
    JacobianMeasure,
    TransportLeg,
    VortexCluster,
    VortexExtraction,
    boundary_circulation,
    convergence_check,
    extract_vortices,
    flat_norm,
    flat_norm_exhaustive,
    jacobian_measure,
    path_length,
    plaquette_degrees,
    winding_oracle,
)
from vortexlab.api._domains import (
    Annulus,
    Ball,
    BoundingBox,
    Domain,
    IDomain,
    PlanarDomain,
    Point,
    Product2D,
    Rectangle,
    boundary_distance,
    parse_domain,
    shrink,
)
from vortexlab.api._energy import (
    DEFAULT_GRID_FACTOR,
    PAIRWISE_NODE_LIMIT,
    CutoffKinds,
    CutoffRule,
    EnergyEvaluation,
    EnergySpec,
    PairwiseEvaluation,
    Scalings,
    bbm_linear_reference,
    energy,
    energy_pairwise_oracle,
    evaluate_energy,
    evaluate_energy_pairwise,
    jensen_cell_gaps,
    midpoint_grid,
    parse_cutoff,
    polar_nodes,
    upper_bound_report,
)
from vortexlab.api._errors import (
    DegreeUndefinedError,
    InfeasibleGridError,
    OutsideDomainError,
    SingularPointError,
)
from vortexlab.api._experiments import (
    REPORT_SCRIPT_NAME,
    REPORT_TABLE_NAME,
    ExperimentRegistry,
    IExperiment,
    experiment_hookimpl,
    run_experiment,
)
from vortexlab.api._fields import (
    SINGULAR_RADIUS,
    Atom,
    Codomains,
    Constant,
    Field,
    IField,
    Linear,
    MultiVortex,
    Sampled,
    evaluate_field,
    load_sampled_field,
    nudge_off_atoms,
    parse_field,
    single_vortex,
    winding_number,
)
from vortexlab.api._kernels import (
    SUPPORTED_DIMENSIONS,
    Kernel,
    KernelKinds,
    QuadratureSpec,
    evaluate,
    gamma_limit_constant,
    gauss_kernel,
    indicator_kernel,
    load_table_kernel,
    parse_kernel,
    second_moment,
    table_kernel,
    triangle_kernel,
)
from vortexlab.api._lattice import (
    LATTICE_NODE_LIMIT,
    POINTS_PER_SIDE,
    REFINED_POINTS_PER_SIDE,
    DiagonalSplits,
    KuhnMesh,
    LatticeField,
    SimplexId,
    XYEnergy,
    discretize,
    discretize_rotated,
    dump_lattice,
    evaluate_xy_energy,
    interpolant_discrepancy,
    interpolate,
    interpolate_points,
    interpolation_gradient,
    kuhn_mesh,
    lattice_from_values,
    locate_simplex,
    rotated_frame,
    sample,
    translated_xy_average,
    xy_energy,
)
from vortexlab.api._reports import (
    TABLE_HEADER,
    ReportMetadata,
    SweepReport,
    SweepRow,
    emit_plot_script,
    emit_table,
    load_table,
)

__all__ = [
    "DEFAULT_GRID_FACTOR",
    "EXHAUSTIVE_CHARGE_LIMIT",
    "LATTICE_NODE_LIMIT",
    "MAX_UNIT_CHARGES_PER_ATOM",
    "MERGE_RADIUS",
    "PAIRWISE_NODE_LIMIT",
    "POINTS_PER_SIDE",
    "QUANTIZATION_SLACK",
    "REFINED_POINTS_PER_SIDE",
    "REPORT_SCRIPT_NAME",
    "REPORT_TABLE_NAME",
    "SEED_FRACTION",
    "SINGULAR_RADIUS",
    "SUPPORTED_DIMENSIONS",
    "TABLE_HEADER",
    "Annulus",
    "Atom",
    "AtomicCurrent",
    "Ball",
    "BoundingBox",
    "ClusterQuality",
    "Codomains",
    "Constant",
    "ConvergenceFlags",
    "ConvergenceReport",
    "ConvergenceRow",
    "CutoffKinds",
    "CutoffRule",
    "DegreeUndefinedError",
    "DiagonalSplits",
    "Domain",
    "EnergyEvaluation",
    "EnergySpec",
    "ExperimentRegistry",
    "Field",
    "FlatNormResult",
    "IDomain",
    "IExperiment",
    "IField",
    "InfeasibleGridError",
    "JacobianMeasure",
    "Kernel",
    "KernelKinds",
    "KuhnMesh",
    "LatticeField",
    "Linear",
    "MultiVortex",
    "OutsideDomainError",
    "PairwiseEvaluation",
    "PlanarDomain",
    "Point",
    "Product2D",
    "QuadratureSpec",
    "Rectangle",
    "ReportMetadata",
    "Sampled",
    "Scalings",
    "SimplexId",
    "SingularPointError",
    "SweepReport",
    "SweepRow",
    "TransportLeg",
    "VortexCluster",
    "VortexExtraction",
    "XYEnergy",
    "bbm_linear_reference",
    "boundary_circulation",
    "boundary_distance",
    "convergence_check",
    "discretize",
    "discretize_rotated",
    "dump_lattice",
    "emit_plot_script",
    "emit_table",
    "energy",
    "energy_pairwise_oracle",
    "evaluate",
    "evaluate_energy",
    "evaluate_energy_pairwise",
    "evaluate_field",
    "evaluate_xy_energy",
    "experiment_hookimpl",
    "extract_vortices",
    "flat_norm",
    "flat_norm_exhaustive",
    "gamma_limit_constant",
    "gauss_kernel",
    "indicator_kernel",
    "interpolant_discrepancy",
    "interpolate",
    "interpolate_points",
    "interpolation_gradient",
    "jacobian_measure",
    "jensen_cell_gaps",
    "kuhn_mesh",
    "lattice_from_values",
    "load_sampled_field",
    "load_table",
    "load_table_kernel",
    "locate_simplex",
    "midpoint_grid",
    "nudge_off_atoms",
    "parse_cutoff",
    "parse_domain",
    "parse_field",
    "parse_kernel",
    "path_length",
    "plaquette_degrees",
    "polar_nodes",
    "rotated_frame",
    "run_experiment",
    "sample",
    "second_moment",
    "shrink",
    "single_vortex",
    "table_kernel",
    "translated_xy_average",
    "triangle_kernel",
    "upper_bound_report",
    "winding_number",
    "winding_oracle",
    "xy_energy",
]
