"""Restarted GMRES on matrix-free operators, with inner-iteration counting."""

import math
from collections.abc import Callable

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .config import GMRES_RESTART


def operator_from(shape: tuple[int, ...], apply: Callable[[np.ndarray], np.ndarray]) -> LinearOperator:
    """Wraps a field-shaped map as a LinearOperator on flattened vectors."""
    size = int(np.prod(shape))

    def matvec(x: np.ndarray) -> np.ndarray:
        return apply(x.reshape(shape)).ravel()

    return LinearOperator((size, size), matvec=matvec, dtype=complex)


def solve(
    operator: LinearOperator,
    rhs: np.ndarray,
    rtol: float,
    max_iter: int,
    x0: np.ndarray | None = None,
) -> tuple[np.ndarray, int, int]:
    """
    Returns (solution, info, inner iterations). `max_iter` bounds inner
    iterations; scipy counts restart cycles, so it is converted.
    """
    count = [0]

    def callback(_residual_norm):
        count[0] += 1

    cycles = max(1, math.ceil(max_iter / GMRES_RESTART))
    x, info = gmres(
        operator,
        rhs,
        x0=x0,
        rtol=rtol,
        atol=0.0,
        restart=GMRES_RESTART,
        maxiter=cycles,
        callback=callback,
        callback_type="pr_norm",
    )
    return x, info, count[0]
