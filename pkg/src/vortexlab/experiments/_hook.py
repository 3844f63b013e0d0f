# SPDX-FileCopyrightText: 2025-present vortexlab contributors
# SPDX-License-Identifier: MIT

# Part of vortexlab, a numerical laboratory for nonlocal vortex energies.
# Copyright (C) 2025-present vortexlab contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this
# software and associated documentation files, to deal in the software without
# restriction, subject to the conditions of the MIT licence.  See LICENSES/MIT.txt.


"""Built-in experiments hook implementation."""

from __future__ import annotations

from typing import TYPE_CHECKING

from loguru import logger

from vortexlab.api import experiment_hookimpl

if TYPE_CHECKING:
    from collections.abc import Sequence

    from vortexlab.api import IExperiment


@experiment_hookimpl
def register_experiments() -> Sequence[IExperiment] | None:
    """Return the built-in experiments."""
    # NOTE: Imported here so that loading the hook stays cheap.
    from vortexlab.experiments._builtin import builtin_experiments  # noqa: PLC0415

    logger.debug("Registering the built-in experiments.")
    return builtin_experiments()
