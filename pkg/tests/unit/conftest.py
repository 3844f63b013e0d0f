# SPDX-FileCopyrightText: 2025-present vortexlab contributors
# SPDX-License-Identifier: MIT

# Part of vortexlab, a numerical laboratory for nonlocal vortex energies.
# Copyright (C) 2025-present vortexlab contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this
# software and associated documentation files, to deal in the software without
# restriction, subject to the conditions of the MIT licence.  See LICENSES/MIT.txt.


"""PyTest Configuration for all tests."""

from __future__ import annotations

from typing import Final

import pytest
from loguru import logger

from vortexlab.api import Ball, Rectangle

UNIT_BALL: Final = Ball(radius=1.0)
SQUARE: Final = Rectangle(lo=(-1.0, -1.0), hi=(1.0, 1.0))
UNIT_SQUARE: Final = Rectangle(lo=(0.0, 0.0), hi=(1.0, 1.0))

DIPOLE_SPEC: Final = "vortex:-0.2,0,1;0.2,0,-1"


@pytest.fixture(autouse=True)
def enable_logging() -> None:
    """Enable logging for all tests."""
    logger.enable("vortexlab")


@pytest.fixture(autouse=True)
def single_thread(monkeypatch: pytest.MonkeyPatch) -> None:
    """Run library work on a single thread."""
    monkeypatch.setenv("VORTEXLAB_THREADS", "1")
