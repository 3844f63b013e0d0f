# SPDX-FileCopyrightText: 2025-present vortexlab contributors
# SPDX-License-Identifier: MIT

# Part of vortexlab, a numerical laboratory for nonlocal vortex energies.
# Copyright (C) 2025-present vortexlab contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this
# software and associated documentation files, to deal in the software without
# restriction, subject to the conditions of the MIT licence.  See LICENSES/MIT.txt.


"""Utility functions for *vortexlab*."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import TYPE_CHECKING, Final

import numpy as np
from loguru import logger

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from numpy.typing import NDArray

THREADS_ENV_VAR: Final = "VORTEXLAB_THREADS"

# Work is split into chunks of this size whatever the thread count.
CHUNK_SIZE: Final = 8


def thread_count() -> int:
    """Return the number of worker threads to use.

    The value comes from the `VORTEXLAB_THREADS` environment variable when it is set,
    otherwise from the number of CPUs.

    Raises:
        ValueError: If `VORTEXLAB_THREADS` is not a positive integer.

    """
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None:
        return max(1, os.cpu_count() or 1)
    try:
        count = int(raw)
    except ValueError as e:
        message = f"{THREADS_ENV_VAR} must be an integer, got: {raw}"
        raise ValueError(message) from e
    if count < 1:
        message = f"{THREADS_ENV_VAR} must be at least 1, got: {count}"
        raise ValueError(message)
    return count


def fixed_chunks(count: int, size: int = CHUNK_SIZE) -> list[range]:
    """Partition `range(count)` into consecutive ranges of at most `size` items."""
    return [range(start, min(start + size, count)) for start in range(0, count, size)]


def ordered_map[T, R](func: Callable[[T], R], items: Sequence[T]) -> list[R]:
    """Apply `func` to every item on a thread pool, preserving the input order."""
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [func(item) for item in items]
    logger.debug(f"Running {len(items)} work items on {workers} threads.")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def cross2d(a: NDArray[np.float64], b: NDArray[np.float64]) -> NDArray[np.float64]:
    """Return the z-component of the cross products of planar vectors (..., 2)."""
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
