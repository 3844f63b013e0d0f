# SPDX-FileCopyrightText: 2025-present vortexlab contributors
# SPDX-License-Identifier: MIT

# Part of vortexlab, a numerical laboratory for nonlocal vortex energies.
# Copyright (C) 2025-present vortexlab contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this
# software and associated documentation files, to deal in the software without
# restriction, subject to the conditions of the MIT licence.  See LICENSES/MIT.txt.


"""Registry of acceptance experiments, discovered through plugin entry points."""

from __future__ import annotations

import sys
from pathlib import Path
from typing import TYPE_CHECKING, Any, Never, Protocol, runtime_checkable

from loguru import logger
from pluggy import HookimplMarker, HookspecMarker, PluginManager

from vortexlab.__about__ import __name__ as distribution_name
from vortexlab.api._reports import ReportMetadata, emit_plot_script, emit_table

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from vortexlab.api._reports import SweepReport
    from vortexlab.experiments.settings import RunConfig

REPORT_TABLE_NAME = "report.csv"
REPORT_SCRIPT_NAME = "report.gp"

_experiment_hookspec = HookspecMarker(distribution_name)
experiment_hookimpl = HookimplMarker(_experiment_hookspec.project_name)

# NOTE: Only here for the API docs, which are built from the AST.
if False:

    def experiment_hookimpl(**kwargs: Any) -> Callable[[], Sequence[IExperiment] | None]:  # type: ignore  # noqa: ANN401, PGH003  # pragma: no cover
        """Decorate a function to mark it as an experiment registration hook.

        The decorated function takes no arguments and returns a sequence of
        [IExperiment][vortexlab.api.IExperiment] objects, or [None][] to register
        nothing.

        Example:
            ```python linenums="1"
            @experiment_hookimpl
            def register_experiments() -> Sequence[IExperiment] | None:
                from package.experiments import MySweep

                return [MySweep()]
            ```

        """


@runtime_checkable
class IExperiment(Protocol):
    """Common interface for all runnable experiments."""

    @property
    def id(self) -> str:
        """The experiment identifier used in run configurations, e.g. `E2`."""

    @property
    def description(self) -> str:
        """A one-line human readable summary."""

    def run(self, cfg: RunConfig) -> SweepReport:
        """Execute the experiment and return its rows.

        The result must be a deterministic function of `cfg` (wall times excepted
        when timing is requested).

        Raises:
            ValueError: If the configuration does not suit the experiment.

        """

    def check(self, report: SweepReport, cfg: RunConfig) -> bool:
        """Return whether `report` meets the experiment's acceptance threshold."""


class ExperimentRegistry:
    """Registry of all experiments found through the `vortexlab` entry points."""

    def __init__(self) -> None:
        self._experiments: dict[str, IExperiment] = {}

    def load_experiments(self, *, validate: bool = True) -> None:
        """Load every experiment exposed by a `vortexlab` entry point hook.

        The built-in experiments are always registered, even when the package is used
        from a source tree without installed entry points.

        Args:
            validate: Whether to reject hook functions that do not match the hook
                specification.

        Raises:
            pluggy.PluginValidationError: If `validate` is [True][] and a hook
                function does not conform.
            ValueError: If two experiments share an ID.

        """
        from vortexlab.experiments import _hook  # noqa: PLC0415

        logger.debug(f"Loading experiments for {_experiment_hookspec.project_name}...")
        manager = PluginManager(_experiment_hookspec.project_name)
        manager.add_hookspecs(sys.modules[__name__])
        manager.load_setuptools_entrypoints(experiment_hookimpl.project_name)
        if not manager.is_registered(_hook):
            manager.register(_hook)
        if validate:
            manager.check_pending()
        # Hooks that return None are filtered out by pluggy.
        groups: list[Sequence[IExperiment]] = manager.hook.register_experiments()
        for experiment in (item for group in groups for item in group):
            if experiment.id in self._experiments:
                message = f"Duplicate experiment ID: {experiment.id}"
                raise ValueError(message)
            self._experiments[experiment.id] = experiment
            logger.debug(f"Registered experiment: {experiment.id}")
        logger.debug(f"Total experiments registered: {len(self._experiments)}")

    def list_experiment_ids(self) -> list[str]:
        """Return the registered experiment IDs in sorted order."""
        return sorted(self._experiments)

    def get_experiment(self, id_: str) -> IExperiment:
        """Return the experiment with the given ID.

        Raises:
            ValueError: If no experiment has that ID.

        """
        try:
            return self._experiments[id_]
        except KeyError:
            self._raise_experiment_not_found(id_)

    ## Internal methods

    def _raise_experiment_not_found(self, id_: str) -> Never:
        message = f"Experiment not found: {id_}"
        raise ValueError(message)

    def _register_test_experiment(self, experiment: IExperiment) -> None:
        """Support for unit testing this class."""
        self._experiments[experiment.id] = experiment


def run_experiment(
    cfg: RunConfig,
    registry: ExperimentRegistry | None = None,
    output_dir: Path | None = None,
) -> SweepReport:
    """Run the configured experiment and write `report.csv` and `report.gp`.

    Args:
        cfg: The run configuration.
        registry: Where to look up the experiment; a freshly loaded registry by
            default.
        output_dir: Overrides the configured output directory.

    Returns:
        The report, carrying its metadata and acceptance outcome.  An empty eps list
            gives an empty report that passes.

    Raises:
        ValueError: If the experiment is unknown, the configuration does not suit it,
            a grid is infeasible or the outputs cannot be written.

    """
    from vortexlab.experiments.settings import config_hash  # noqa: PLC0415

    if registry is None:
        registry = ExperimentRegistry()
        registry.load_experiments()
    experiment = registry.get_experiment(str(cfg.experiment))
    logger.debug(f"Running experiment {experiment.id}: {experiment.description}")
    report = experiment.run(cfg)
    passed = not report.rows or experiment.check(report, cfg)
    report = report.with_metadata(
        ReportMetadata(
            experiment=experiment.id, config_hash=config_hash(cfg), seed=cfg.seed
        )
    ).with_outcome(passed=passed)
    directory = Path(output_dir or cfg.output_dir)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        message = f"Unable to create the output directory: {directory}"
        raise ValueError(message) from e
    table = directory / REPORT_TABLE_NAME
    emit_table(report, table)
    emit_plot_script(report, table, directory / REPORT_SCRIPT_NAME)
    logger.debug(f"Experiment {experiment.id} finished; passed={passed}")
    return report


@_experiment_hookspec
def register_experiments() -> Sequence[IExperiment] | None:
    """Plugin hook to register experiments.

    Implementations return a sequence of IExperiment objects, or None to register
    nothing.
    """
