# noqa: INP001

# SPDX-FileCopyrightText: 2025-present vortexlab contributors
# SPDX-License-Identifier: MIT

# Part of vortexlab, a numerical laboratory for nonlocal vortex energies.
# Copyright (C) 2025-present vortexlab contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this
# software and associated documentation files, to deal in the software without
# restriction, subject to the conditions of the MIT licence.  See LICENSES/MIT.txt.


"""mkdocs-macros-plugin macros."""

from __future__ import annotations

from typing import TYPE_CHECKING

from vortexlab.__about__ import __version__
from vortexlab.experiments.settings import ExperimentIds

if TYPE_CHECKING:
    from mkdocs_macros import MacrosPlugin


def define_env(env: MacrosPlugin) -> None:
    """Define variables and macros available in the templates."""
    env.variables.version = __version__
    env.variables.experiment_ids = ", ".join(str(id_) for id_ in ExperimentIds)
