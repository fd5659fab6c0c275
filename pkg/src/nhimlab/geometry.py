"""Coordinate containers and the sup-norm toolbox.

Phase space splits into a stable block s, an unstable block u, and manifold
coordinates x living on R^a x T^b.  Every vector norm here is the sup norm and
every matrix norm is the induced maximum absolute row sum; higher-order
derivative tensors use the same "max over output row, sum over inputs" rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .exceptions import ContractError

TWO_PI = 2.0 * np.pi

ANGLE = "angle"
LINEAR = "linear"


def _as_float_vector(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    return arr


@dataclass(frozen=True)
class Dimensions:
    """Block sizes (n_s, n_u, m) of the chart."""

    n_s: int
    n_u: int
    m: int

    def __post_init__(self):
        for label, value in (("n_s", self.n_s), ("n_u", self.n_u), ("m", self.m)):
            if int(value) < 1 or int(value) != value:
                raise ContractError(f"{label} must be a positive integer, got {value!r}")

    @property
    def n(self) -> int:
        return self.n_s + self.n_u + self.m

    def split(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Split a length-n vector into its (s, u, x) blocks."""
        z = _as_float_vector(z)
        if z.size != self.n:
            raise ContractError(f"expected a vector of length {self.n}, got {z.size}")
        return z[: self.n_s], z[self.n_s : self.n_s + self.n_u], z[self.n_s + self.n_u :]

    def join(self, s, u, x) -> np.ndarray:
        return np.concatenate([_as_float_vector(s), _as_float_vector(u), _as_float_vector(x)])


@dataclass(frozen=True)
class ChartTopology:
    """Per-coordinate topology of the manifold factor: ``angle`` or ``linear``."""

    kinds: tuple[str, ...]

    def __post_init__(self):
        if len(self.kinds) == 0:
            raise ContractError("topology needs at least one coordinate")
        for kind in self.kinds:
            if kind not in (ANGLE, LINEAR):
                raise ContractError(f"coordinate kind must be 'angle' or 'linear', got {kind!r}")

    @classmethod
    def angles(cls, m: int) -> "ChartTopology":
        return cls((ANGLE,) * m)

    @classmethod
    def lines(cls, m: int) -> "ChartTopology":
        return cls((LINEAR,) * m)

    @classmethod
    def of(cls, kinds: Iterable[str]) -> "ChartTopology":
        return cls(tuple(kinds))

    @property
    def m(self) -> int:
        return len(self.kinds)

    @property
    def is_angle(self) -> np.ndarray:
        return np.array([k == ANGLE for k in self.kinds], dtype=bool)

    def canonicalize(self, x) -> np.ndarray:
        """Wrap angle coordinates into [0, 2*pi); leave linear ones untouched."""
        x = _as_float_vector(x).copy()
        if x.size != self.m:
            raise ContractError(f"expected {self.m} manifold coordinates, got {x.size}")
        mask = self.is_angle
        wrapped = np.mod(x[mask], TWO_PI)
        # np.mod can round a tiny negative argument up to the full period
        wrapped[wrapped >= TWO_PI] = 0.0
        x[mask] = wrapped
        return x


def _frozen_array(v) -> np.ndarray:
    arr = np.array(v, dtype=float).reshape(-1)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ChartPoint:
    """A point (s, u, x); angle coordinates are stored canonically in [0, 2*pi)."""

    s: np.ndarray
    u: np.ndarray
    x: np.ndarray
    topology: ChartTopology

    def __post_init__(self):
        object.__setattr__(self, "s", _frozen_array(self.s))
        object.__setattr__(self, "u", _frozen_array(self.u))
        object.__setattr__(self, "x", _frozen_array(self.topology.canonicalize(self.x)))

    @property
    def normal_norm(self) -> float:
        """max(|s|_sup, |u|_sup), the norm deciding membership in B_rho."""
        return max(vec_sup_norm(self.s), vec_sup_norm(self.u))

    def in_ball(self, rho: float) -> bool:
        return self.normal_norm < rho

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.s, self.u, self.x])


@dataclass(frozen=True, eq=False)
class TangentVector:
    """Tangent components (v_s, v_u, v_x) at a chart point."""

    v_s: np.ndarray
    v_u: np.ndarray
    v_x: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v_s", _frozen_array(self.v_s))
        object.__setattr__(self, "v_u", _frozen_array(self.v_u))
        object.__setattr__(self, "v_x", _frozen_array(self.v_x))

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.v_s, self.v_u, self.v_x])

    def sup_norm(self) -> float:
        return vec_sup_norm(self.as_array())

    def block_norms(self) -> tuple[float, float, float]:
        """(|v_s|, |v_u|, |v_x|), each a sup norm; empty-block guard not needed."""
        return (vec_sup_norm(self.v_s), vec_sup_norm(self.v_u), vec_sup_norm(self.v_x))

    def scaled(self, factor: float) -> "TangentVector":
        return TangentVector(self.v_s * factor, self.v_u * factor, self.v_x * factor)


def vec_sup_norm(v) -> float:
    """Sup norm max_i |v_i| of a nonempty vector."""
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.size == 0:
        raise ContractError("sup norm of an empty vector is undefined")
    return float(np.max(np.abs(arr)))


def mat_row_sup_norm(a) -> float:
    """Maximum absolute row sum, the operator norm induced by the sup norm."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.size == 0:
        raise ContractError("matrix norm needs a nonempty 2-d array")
    return float(np.max(np.sum(np.abs(arr), axis=1)))


def tensor_row_sup_norm(t) -> float:
    """Max over the first (output) axis of the total absolute mass of the rest.

    Reduces to ``vec_sup_norm`` for 1-d input and ``mat_row_sup_norm`` for 2-d;
    for higher-order derivative tensors it is the Lipschitz constant the
    mean-value estimates need under sup norms.
    """
    arr = np.asarray(t, dtype=float)
    if arr.size == 0:
        raise ContractError("tensor norm needs a nonempty array")
    if arr.ndim == 1:
        return float(np.max(np.abs(arr)))
    flat = np.abs(arr).reshape(arr.shape[0], -1)
    return float(np.max(np.sum(flat, axis=1)))


def manifold_distance(x1, x2, topo: ChartTopology) -> float:
    """Sup distance on the manifold factor honoring per-coordinate topology."""
    a = _as_float_vector(x1)
    b = _as_float_vector(x2)
    if a.size != b.size or a.size != topo.m:
        raise ContractError(f"expected two vectors of length {topo.m}, got {a.size} and {b.size}")
    diff = np.abs(a - b)
    wrap = np.mod(diff, TWO_PI)
    circ = np.minimum(wrap, TWO_PI - wrap)
    per_coord = np.where(topo.is_angle, circ, diff)
    return float(np.max(per_coord))
