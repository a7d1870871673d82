"""Explicit Runge-Kutta scheme descriptions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SchemeSpec:
    """Butcher table of an explicit one-step scheme.

    ``a`` must be strictly lower triangular: every stage depends only on
    earlier stages, which is what makes sampled evaluation possible.
    """

    kind: str
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        c = np.asarray(self.c, dtype=np.float64)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        k = len(b)
        if a.shape != (k, k) or c.shape != (k,):
            raise ValueError("inconsistent Butcher table shapes")
        if np.any(np.triu(a) != 0.0):
            raise ValueError("scheme must be explicit (strictly lower-triangular table)")

    @property
    def stages(self) -> int:
        return len(self.b)


_TABLES = {
    "euler": SchemeSpec(
        kind="euler",
        a=[[0.0]],
        b=[1.0],
        c=[0.0],
    ),
    "rk2_midpoint": SchemeSpec(
        kind="rk2_midpoint",
        a=[[0.0, 0.0], [0.5, 0.0]],
        b=[0.0, 1.0],
        c=[0.0, 0.5],
    ),
    "rk4_classic": SchemeSpec(
        kind="rk4_classic",
        a=[
            [0.0, 0.0, 0.0, 0.0],
            [0.5, 0.0, 0.0, 0.0],
            [0.0, 0.5, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ],
        b=[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
        c=[0.0, 0.5, 0.5, 1.0],
    ),
}


def scheme(kind: str) -> SchemeSpec:
    """Look up a scheme by name: euler, rk2_midpoint or rk4_classic."""
    try:
        return _TABLES[kind]
    except KeyError:
        raise ValueError(f"unknown scheme {kind!r}; choose from {sorted(_TABLES)}") from None
