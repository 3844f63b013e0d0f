# SPDX-FileCopyrightText: 2025-present vortexlab contributors
# SPDX-License-Identifier: MIT

# Part of vortexlab, a numerical laboratory for nonlocal vortex energies.
# Copyright (C) 2025-present vortexlab contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this
# software and associated documentation files, to deal in the software without
# restriction, subject to the conditions of the MIT licence.  See LICENSES/MIT.txt.


"""Provides package metadata at runtime."""

from __future__ import annotations

__name__ = "vortexlab"
__version__ = "0.1.0"
