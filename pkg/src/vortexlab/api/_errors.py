# SPDX-FileCopyrightText: 2025-present vortexlab contributors
# SPDX-License-Identifier: MIT

# Part of vortexlab, a numerical laboratory for nonlocal vortex energies.
# Copyright (C) 2025-present vortexlab contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this
# software and associated documentation files, to deal in the software without
# restriction, subject to the conditions of the MIT licence.  See LICENSES/MIT.txt.


"""Exceptions raised by *vortexlab*.

All of them derive from [ValueError][] so callers that only care about "bad input"
can keep catching that.

"""

from __future__ import annotations


class SingularPointError(ValueError):
    """A field was evaluated exactly at one of its vortex atoms."""


class OutsideDomainError(ValueError):
    """A point was required to lie inside a domain but does not."""


class DegreeUndefinedError(ValueError):
    """A lattice plaquette has an antipodal bond, so its degree is undefined."""


class InfeasibleGridError(ValueError):
    """A requested quadrature grid is too large to evaluate.

    Attributes:
        nodes: The number of grid nodes that would have been needed.
        estimated_bytes: Rough memory estimate for those nodes.

    """

    def __init__(self, message: str, *, nodes: int, estimated_bytes: int) -> None:
        super().__init__(message)
        self.nodes = nodes
        self.estimated_bytes = estimated_bytes
