# SPDX-FileCopyrightText: 2025-present vortexlab contributors
# SPDX-License-Identifier: MIT

# Part of vortexlab, a numerical laboratory for nonlocal vortex energies.
# Copyright (C) 2025-present vortexlab contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this
# software and associated documentation files, to deal in the software without
# restriction, subject to the conditions of the MIT licence.  See LICENSES/MIT.txt.


"""Numerical laboratory for nonlocal vortex energies.

All interaction with this package should generally be done through the public
[api][vortexlab.api] sub-package, or through the `vortexlab` command line tool.

"""

from __future__ import annotations

from loguru import logger

# Silence all vortexlab logging by default.  We are a library, not an application.
logger.disable(__name__)
