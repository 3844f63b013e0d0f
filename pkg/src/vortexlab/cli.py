# SPDX-FileCopyrightText: 2025-present vortexlab contributors
# SPDX-License-Identifier: MIT

# Part of vortexlab, a numerical laboratory for nonlocal vortex energies.
# Copyright (C) 2025-present vortexlab contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this
# software and associated documentation files, to deal in the software without
# restriction, subject to the conditions of the MIT licence.  See LICENSES/MIT.txt.


"""Command line interface: `vortexlab <command> ...`."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path
from typing import TYPE_CHECKING, Final

import numpy as np
from loguru import logger

from vortexlab.__about__ import __version__
from vortexlab.api import (
    Atom,
    AtomicCurrent,
    EnergySpec,
    ExperimentRegistry,
    Scalings,
    convergence_check,
    discretize,
    dump_lattice,
    evaluate_energy,
    evaluate_xy_energy,
    extract_vortices,
    flat_norm,
    jacobian_measure,
    parse_domain,
    parse_field,
    parse_kernel,
    run_experiment,
    sample,
)
from vortexlab.experiments.settings import load_run_configs

if TYPE_CHECKING:
    from collections.abc import Sequence

    from vortexlab.api import Domain, PlanarDomain

EXIT_OK: Final = 0
EXIT_ERROR: Final = 1
EXIT_REJECTED: Final = 2
"""An experiment missed its acceptance threshold."""


### Helpers ###


def _pair(text: str) -> tuple[float, float]:
    try:
        first, second = (float(part) for part in text.split(","))
    except ValueError as e:
        message = f"Expected two comma separated numbers, got: {text}"
        raise argparse.ArgumentTypeError(message) from e
    return first, second


def _planar(dom: Domain) -> PlanarDomain:
    if dom.dimension != 2:  # noqa: PLR2004
        message = f"This command needs a planar domain, got: {dom}"
        raise ValueError(message)
    return dom  # type: ignore[return-value]


def _number(value: float) -> str:
    return repr(float(value))


def load_atoms(path: Path) -> AtomicCurrent:
    """Read an atom table with the header `x,y,degree`.

    Raises:
        ValueError: If the file cannot be read or a row is malformed.

    """
    try:
        lines = path.read_text(encoding="utf-8").splitlines()[1:]
        rows = [line for line in lines if line.strip()]
        table = np.loadtxt(rows, delimiter=",", ndmin=2) if rows else np.empty((0, 3))
    except (OSError, ValueError) as e:
        message = f"Unable to read atoms: {path}"
        raise ValueError(message) from e
    if table.size and table.shape[1] != 3:  # noqa: PLR2004
        message = f"Atom tables need the columns x,y,degree: {path}"
        raise ValueError(message)
    atoms = []
    for x, y, degree in table.reshape(-1, 3):
        if degree != round(degree):
            message = f"Degrees must be integers, got {degree} in {path}"
            raise ValueError(message)
        atoms.append(Atom(position=(float(x), float(y)), degree=round(degree)))
    return AtomicCurrent(atoms=tuple(atoms))


### Commands ###


def _energy(args: argparse.Namespace) -> int:
    domain = parse_domain(args.domain)
    spec = EnergySpec(
        kernel=parse_kernel(args.kernel),
        domain=domain,
        epsilon=args.eps,
        scaling=Scalings(args.scaling),
        grid_step=args.grid_h,
        localization=None if args.local is None else parse_domain(args.local),
        radial_nodes=args.radial_nodes,
        angular_nodes=args.angular_nodes,
        axial_nodes=args.axial_nodes,
    )
    result = evaluate_energy(spec, parse_field(args.field))
    csv.writer(sys.stdout, lineterminator="\n").writerow(
        [
            _number(args.eps),
            _number(result.value),
            _number(result.grid_step),
            result.nodes,
        ]
    )
    return EXIT_OK


def _xy(args: argparse.Namespace) -> int:
    lf = sample(
        parse_field(args.field),
        parse_domain(args.domain),
        args.eps,
        offset=args.offset,
        xi=args.xi,
    )
    result = evaluate_xy_energy(lf)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow([_number(args.eps), _number(result.value), result.bonds])
    if args.dump is not None:
        dump_lattice(lf, args.dump)
    return EXIT_OK


def _detect(args: argparse.Namespace) -> int:
    dom = _planar(parse_domain(args.domain))
    jm = jacobian_measure(discretize(parse_field(args.field), dom, args.eps))
    region = dom if args.margin is None else dom.shrink(args.margin)
    extraction = extract_vortices(
        jm.restricted(region), args.threshold, domain=region
    )
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["x", "y", "degree"])
    for atom in extraction.current.atoms:
        writer.writerow([*map(_number, atom.position), atom.degree])
    logger.info(
        f"Residual mass {extraction.residual_mass}, certified bound "
        f"{extraction.certified_bound}"
    )
    return EXIT_OK


def _flatnorm(args: argparse.Namespace) -> int:
    a, b = load_atoms(args.a), load_atoms(args.b)
    result = flat_norm(a, b, parse_domain(args.domain))
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["value", _number(result.value)])
    writer.writerow(
        ["source_x", "source_y", "target_x", "target_y", "mass", "length"]
    )
    for leg in result.plan:
        target = ("", "") if leg.target is None else tuple(map(_number, leg.target))
        writer.writerow(
            [
                *map(_number, leg.source),
                *target,
                _number(leg.mass),
                _number(leg.length),
            ]
        )
    return EXIT_OK


def _converge(args: argparse.Namespace) -> int:
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["eps", "delta", "flat_distance", "flag"])
    converged = True
    for cfg in load_run_configs(args.config):
        dom = _planar(parse_domain(cfg.domain))
        f = parse_field(cfg.field)
        target = parse_field(cfg.target).atoms if cfg.target is not None else f.atoms
        report = convergence_check(
            [(eps, f) for eps in cfg.eps_list],
            AtomicCurrent(atoms=target),
            dom,
            cfg.margins,
            threshold=cfg.threshold,
        )
        for row in report.rows:
            writer.writerow(
                [
                    _number(row.eps),
                    _number(row.delta),
                    _number(row.flat_distance),
                    str(row.flag),
                ]
            )
        converged &= report.converged
    return EXIT_OK if converged else EXIT_REJECTED


def _run(args: argparse.Namespace) -> int:
    configs = load_run_configs(args.config)
    registry = ExperimentRegistry()
    registry.load_experiments()
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["experiment", "rows", "passed", "output_dir"])
    status = EXIT_OK
    for cfg in configs:
        if args.only and str(cfg.experiment) not in args.only:
            continue
        output_dir = (
            None if args.out is None else Path(args.out) / str(cfg.experiment)
        )
        report = run_experiment(cfg, registry, output_dir)
        directory = output_dir or cfg.output_dir
        writer.writerow(
            [str(cfg.experiment), len(report.rows), report.passed, str(directory)]
        )
        if not report.passed:
            status = EXIT_REJECTED
    return status


### Parser ###


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser of the `vortexlab` command."""
    parser = argparse.ArgumentParser(
        prog="vortexlab",
        description="Nonlocal vortex energies, lattice discretizations and flat norms.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument(
        "-v", "--verbose", action="store_true", help="Log debug messages to stderr."
    )
    verbosity.add_argument(
        "-q", "--quiet", action="store_true", help="Only log errors to stderr."
    )
    commands = parser.add_subparsers(dest="command", required=True)

    energy = commands.add_parser("energy", help="Evaluate a nonlocal energy.")
    energy.add_argument("--kernel", required=True, help="e.g. indicator:1")
    energy.add_argument("--domain", required=True, help="e.g. ball:1")
    energy.add_argument("--field", required=True, help="e.g. vortex:0,0,1")
    energy.add_argument("--eps", type=float, required=True)
    energy.add_argument(
        "--scaling", choices=[str(s) for s in Scalings], default=str(Scalings.vortex)
    )
    energy.add_argument("--grid-h", type=float, default=None)
    energy.add_argument("--local", default=None, help="Localization domain spec.")
    energy.add_argument("--radial-nodes", type=int, default=64)
    energy.add_argument("--angular-nodes", type=int, default=64)
    energy.add_argument("--axial-nodes", type=int, default=16)
    energy.set_defaults(handler=_energy)

    xy = commands.add_parser("xy", help="Evaluate the XY energy of point samples.")
    xy.add_argument("--field", required=True)
    xy.add_argument("--domain", required=True)
    xy.add_argument("--eps", type=float, required=True)
    xy.add_argument("--xi", type=_pair, default=None, help="Lattice direction a,b.")
    xy.add_argument("--offset", type=_pair, default=None, help="Translation z1,z2.")
    xy.add_argument("--dump", type=Path, default=None, help="Write i,j,vx,vy here.")
    xy.set_defaults(handler=_xy)

    detect = commands.add_parser("detect", help="Extract point vortices.")
    detect.add_argument("--field", required=True)
    detect.add_argument("--domain", required=True)
    detect.add_argument("--eps", type=float, required=True)
    detect.add_argument("--threshold", type=float, default=0.5)
    detect.add_argument("--margin", type=float, default=None)
    detect.set_defaults(handler=_detect)

    flatnorm = commands.add_parser("flatnorm", help="Flat norm of a - b.")
    flatnorm.add_argument("--a", type=Path, required=True, help="CSV x,y,degree")
    flatnorm.add_argument("--b", type=Path, required=True, help="CSV x,y,degree")
    flatnorm.add_argument("--domain", required=True)
    flatnorm.set_defaults(handler=_flatnorm)

    converge = commands.add_parser("converge", help="Certify flat convergence.")
    converge.add_argument("--config", type=Path, required=True)
    converge.set_defaults(handler=_converge)

    run = commands.add_parser("run", help="Run configured experiments.")
    run.add_argument("--config", type=Path, required=True)
    run.add_argument("--out", type=Path, default=None, help="Output directory.")
    run.add_argument("--only", nargs="*", default=None, help="Experiment IDs.")
    run.set_defaults(handler=_run)
    return parser


def _configure_logging(*, verbose: bool, quiet: bool) -> None:
    logger.remove()
    level = "DEBUG" if verbose else "ERROR" if quiet else "INFO"
    logger.add(sys.stderr, level=level)
    logger.enable("vortexlab")


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line interface and return the exit status.

    Statuses are 0 on success, 1 on invalid input or I/O failure and 2 when an
    experiment or convergence check misses its threshold.
    """
    args = build_parser().parse_args(argv)
    _configure_logging(verbose=args.verbose, quiet=args.quiet)
    try:
        return int(args.handler(args))
    except ValueError as e:
        sys.stderr.write(f"vortexlab: error: {e}\n")
        return EXIT_ERROR
