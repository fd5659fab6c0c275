"""Normal-form maps near a compact invariant manifold.

A map is stored in the block form

    f(s, u, x) = (A_s(x) s,  A_u(x) u,  g(x)) + r(s, u, x)

on U = B_rho x M, with the remainder r subject to five structural conditions:

    a) r(0, 0, x) = 0                   (the manifold itself is invariant)
    b) r_u(s, 0, x) = 0                 (the stable slice {u = 0} is invariant)
    c) r_s(0, u, x) = 0                 (the unstable slice {s = 0} is invariant)
    d) r_x(0, u, x) = r_x(s, 0, x) = 0  (on both slices the x-dynamics is g)
    e) ||A_s(x)|| <= lambda < 1 and ||A_u(x)^-1|| <= lambda < 1

This module evaluates such maps, assembles the exact block Jacobian, checks
the conditions numerically on quasi-random samples, and measures the constant
budget (k, C, C~, D, ...) that the inclination estimates run on.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.stats import qmc

from .exceptions import ContractError, OutOfNeighborhoodError
from .geometry import (
    TWO_PI,
    ChartPoint,
    ChartTopology,
    Dimensions,
    mat_row_sup_norm,
    tensor_row_sup_norm,
    vec_sup_norm,
)

# Central-difference defaults: balance truncation against roundoff at 64 bit.
FD_STEP_FIRST = 1e-6
FD_STEP_SECOND = 1e-4


@dataclass(frozen=True, eq=False)
class MapSpec:
    """Immutable description of one normal-form map.

    The four defining callables take and return plain 1-d/2-d float arrays:
    ``A_s(x)``, ``A_u(x)`` yield the normal blocks, ``g_map(x)`` the manifold
    image (un-wrapped; angles are canonicalized only when points are built),
    and ``r_map(s, u, x)`` the remainder triple ``(r_s, r_u, r_x)``.

    Analytic derivatives are optional.  When present they must follow the
    block order (s, u, x): ``d_r`` is the full n x n Jacobian of r, ``d2_r``
    the n x n x n second-derivative tensor T[i, j, k] = d2 r_i / dz_j dz_k,
    ``d_A_s``/``d_A_u`` are (n_s, n_s, m)/(n_u, n_u, m) tensors of
    d A / d x_k, and ``d_g``/``d2_g`` differentiate the manifold map.
    Everything must be pure; evaluation order is never guaranteed.
    """

    dims: Dimensions
    topo: ChartTopology
    rho: float
    lam: float
    A_s: Callable[[np.ndarray], np.ndarray]
    A_u: Callable[[np.ndarray], np.ndarray]
    g_map: Callable[[np.ndarray], np.ndarray]
    r_map: Callable[[np.ndarray, np.ndarray, np.ndarray], tuple]
    d_r: Optional[Callable] = None
    d2_r: Optional[Callable] = None
    d_A_s: Optional[Callable] = None
    d_A_u: Optional[Callable] = None
    d_g: Optional[Callable] = None
    d2_g: Optional[Callable] = None
    x_box: Optional[tuple] = None  # sampling ranges for linear manifold coords
    name: str = ""

    def __post_init__(self):
        if self.rho <= 0:
            raise ContractError(f"rho must be positive, got {self.rho}")
        if not (0.0 < self.lam < 1.0):
            raise ContractError(f"lambda must lie in (0, 1), got {self.lam}")
        if self.topo.m != self.dims.m:
            raise ContractError("topology and dimensions disagree on m")
        if self.x_box is not None and len(self.x_box) != self.dims.m:
            raise ContractError("x_box must list one (lo, hi) range per manifold coordinate")

    def point(self, s, u, x) -> ChartPoint:
        return ChartPoint(np.atleast_1d(s), np.atleast_1d(u), np.atleast_1d(x), self.topo)

    def r_concat(self, s, u, x) -> np.ndarray:
        r_s, r_u, r_x = self.r_map(s, u, x)
        return self.dims.join(r_s, r_u, r_x)

    def x_ranges(self) -> list:
        """Per-coordinate sampling ranges: angles get [0, 2*pi), linear
        coordinates their declared box (default (-1, 1))."""
        ranges = []
        for i, kind in enumerate(self.topo.kinds):
            if kind == "angle":
                ranges.append((0.0, TWO_PI))
            elif self.x_box is not None:
                ranges.append(tuple(map(float, self.x_box[i])))
            else:
                ranges.append((-1.0, 1.0))
        return ranges


def apply_map(f: MapSpec, p: ChartPoint) -> ChartPoint:
    """Evaluate f at p; raises if p leaves the working ball."""
    if not p.in_ball(f.rho):
        raise OutOfNeighborhoodError(p.normal_norm, f.rho)
    r_s, r_u, r_x = f.r_map(p.s, p.u, p.x)
    s_new = f.A_s(p.x) @ p.s + np.asarray(r_s, dtype=float).reshape(-1)
    u_new = f.A_u(p.x) @ p.u + np.asarray(r_u, dtype=float).reshape(-1)
    x_new = np.asarray(f.g_map(p.x), dtype=float).reshape(-1) + np.asarray(r_x, dtype=float).reshape(-1)
    return ChartPoint(s_new, u_new, x_new, f.topo)


def _fd_first(func, z: np.ndarray, h: float, inside=None) -> np.ndarray:
    """Columnwise central difference of a vector function, with a one-sided
    fallback on coordinates where a probe would leave the admissible set."""
    z = np.asarray(z, dtype=float)
    base = None
    cols = []
    for j in range(z.size):
        zp = z.copy()
        zm = z.copy()
        zp[j] += h
        zm[j] -= h
        ok_p = inside is None or inside(zp)
        ok_m = inside is None or inside(zm)
        if ok_p and ok_m:
            cols.append((func(zp) - func(zm)) / (2.0 * h))
        elif ok_p:
            if base is None:
                base = func(z)
            cols.append((func(zp) - base) / h)
        elif ok_m:
            if base is None:
                base = func(z)
            cols.append((base - func(zm)) / h)
        else:
            raise ContractError("finite-difference step does not fit inside the neighborhood; reduce h")
    return np.stack(cols, axis=1)


def _fd_second(func, z: np.ndarray, h: float) -> np.ndarray:
    """Full symmetric second-derivative tensor T[i, j, k] by central stencils."""
    z = np.asarray(z, dtype=float)
    nz = z.size
    f0 = func(z)
    out = np.empty((f0.size, nz, nz))
    for j in range(nz):
        zp = z.copy()
        zm = z.copy()
        zp[j] += h
        zm[j] -= h
        out[:, j, j] = (func(zp) - 2.0 * f0 + func(zm)) / (h * h)
        for k in range(j + 1, nz):
            zpp = z.copy()
            zpm = z.copy()
            zmp = z.copy()
            zmm = z.copy()
            zpp[[j, k]] += h
            zmm[[j, k]] -= h
            zpm[j] += h
            zpm[k] -= h
            zmp[j] -= h
            zmp[k] += h
            mixed = (func(zpp) - func(zpm) - func(zmp) + func(zmm)) / (4.0 * h * h)
            out[:, j, k] = mixed
            out[:, k, j] = mixed
    return out


def _r_jacobian(f: MapSpec, s, u, x, h: float) -> np.ndarray:
    if f.d_r is not None:
        return np.asarray(f.d_r(s, u, x), dtype=float)
    dims = f.dims

    def func(z):
        zs, zu, zx = dims.split(z)
        return f.r_concat(zs, zu, zx)

    def inside(z):
        zs, zu, _ = dims.split(z)
        return max(vec_sup_norm(zs), vec_sup_norm(zu)) < f.rho

    return _fd_first(func, dims.join(s, u, x), h, inside=inside)


def _g_jacobian(f: MapSpec, x, h: float) -> np.ndarray:
    if f.d_g is not None:
        return np.asarray(f.d_g(x), dtype=float)
    return _fd_first(lambda z: np.asarray(f.g_map(z), dtype=float).reshape(-1), x, h)


def _a_tensor(f: MapSpec, which: str, x, h: float) -> np.ndarray:
    """d A / d x as an (n, n, m) tensor, analytic when available."""
    fun = f.A_s if which == "s" else f.A_u
    der = f.d_A_s if which == "s" else f.d_A_u
    if der is not None:
        return np.asarray(der(x), dtype=float)
    x = np.asarray(x, dtype=float)
    size = f.dims.n_s if which == "s" else f.dims.n_u
    out = np.empty((size, size, x.size))
    for c in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[c] += h
        xm[c] -= h
        out[:, :, c] = (np.asarray(fun(xp), dtype=float) - np.asarray(fun(xm), dtype=float)) / (2.0 * h)
    return out


def jacobian(f: MapSpec, p: ChartPoint, h: float = FD_STEP_FIRST) -> np.ndarray:
    """Exact block Jacobian of f at p in (s, u, x) layout.

    Row by row:

        [ A_s + d_s r_s   d_u r_s   d_x r_s + (d_x A_s) s ]
        [     d_s r_u   A_u + d_u r_u   d_x r_u + (d_x A_u) u ]
        [     d_s r_x       d_u r_x     d_x g + d_x r_x    ]

    Analytic derivatives are used when the MapSpec carries them; otherwise
    central differences with step h (one-sided next to the boundary of U).
    """
    if not p.in_ball(f.rho):
        raise OutOfNeighborhoodError(p.normal_norm, f.rho)
    if h <= 0:
        raise ContractError(f"finite-difference step must be positive, got {h}")
    dims = f.dims
    n_s, n_u, m = dims.n_s, dims.n_u, dims.m
    sl_s = slice(0, n_s)
    sl_u = slice(n_s, n_s + n_u)
    sl_x = slice(n_s + n_u, dims.n)

    jac = _r_jacobian(f, p.s, p.u, p.x, h)
    jac = np.array(jac, dtype=float)
    jac[sl_s, sl_s] += f.A_s(p.x)
    jac[sl_u, sl_u] += f.A_u(p.x)
    jac[sl_x, sl_x] += _g_jacobian(f, p.x, h)
    jac[sl_s, sl_x] += np.einsum("ijk,j->ik", _a_tensor(f, "s", p.x, h), p.s)
    jac[sl_u, sl_x] += np.einsum("ijk,j->ik", _a_tensor(f, "u", p.x, h), p.u)
    return jac


# ---------------------------------------------------------------------------
# Condition validation


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    description: str
    max_violation: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "max_violation": self.max_violation,
            "tol": self.tol,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class ConditionReport:
    checks: tuple
    sample_count: int
    tol: float
    seed: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> ConditionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "sample_count": self.sample_count,
            "tol": self.tol,
            "seed": self.seed,
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def _unit_samples(dim: int, count: int, seed: int) -> np.ndarray:
    """Deterministic low-discrepancy samples in the open unit cube."""
    sampler = qmc.Halton(d=dim, scramble=True, seed=seed)
    return sampler.random(count)


def _scale_normal(t: np.ndarray, rho: float) -> np.ndarray:
    # strictly inside the open ball
    return (2.0 * t - 1.0) * rho * (1.0 - 1e-9)


def _scale_manifold(t: np.ndarray, ranges: list) -> np.ndarray:
    out = np.empty_like(t)
    for i, (lo, hi) in enumerate(ranges):
        out[:, i] = lo + t[:, i] * (hi - lo)
    return out


def validate_conditions(f: MapSpec, sample_count: int = 256, tol: float = 1e-10, seed: int = 0) -> ConditionReport:
    """Check conditions a)-e) plus their first-order consequences on samples.

    Violations are measured in sup norms; condition e) additionally covers
    singular A_u(x) (reported as an infinite violation rather than raised).
    The derivative consequences are the slice identities d_s r_u = d_x r_u = 0
    on {u=0}, d_u r_s = d_x r_s = 0 on {s=0}, and the matching r_x blocks.
    """
    if sample_count < 1:
        raise ContractError("sample_count must be at least 1")
    if tol <= 0:
        raise ContractError("tol must be positive")
    dims = f.dims
    n_s, n_u, m = dims.n_s, dims.n_u, dims.m
    ranges = f.x_ranges()

    t = _unit_samples(n_s + n_u + m, sample_count, seed)
    s_samp = _scale_normal(t[:, :n_s], f.rho)
    u_samp = _scale_normal(t[:, n_s : n_s + n_u], f.rho)
    x_samp = _scale_manifold(t[:, n_s + n_u :], ranges)
    zero_s = np.zeros(n_s)
    zero_u = np.zeros(n_u)

    viol_a = 0.0
    viol_b = 0.0
    viol_c = 0.0
    viol_d = 0.0
    for i in range(sample_count):
        s_i, u_i, x_i = s_samp[i], u_samp[i], x_samp[i]
        viol_a = max(viol_a, vec_sup_norm(np.concatenate([np.atleast_1d(np.asarray(b, dtype=float)) for b in f.r_map(zero_s, zero_u, x_i)])))
        r_s_b, r_u_b, r_x_b = f.r_map(s_i, zero_u, x_i)
        viol_b = max(viol_b, vec_sup_norm(np.atleast_1d(np.asarray(r_u_b, dtype=float))))
        viol_d = max(viol_d, vec_sup_norm(np.atleast_1d(np.asarray(r_x_b, dtype=float))))
        r_s_c, r_u_c, r_x_c = f.r_map(zero_s, u_i, x_i)
        viol_c = max(viol_c, vec_sup_norm(np.atleast_1d(np.asarray(r_s_c, dtype=float))))
        viol_d = max(viol_d, vec_sup_norm(np.atleast_1d(np.asarray(r_x_c, dtype=float))))

    viol_e = 0.0
    for i in range(sample_count):
        x_i = x_samp[i]
        viol_e = max(viol_e, mat_row_sup_norm(f.A_s(x_i)) - f.lam)
        a_u = np.asarray(f.A_u(x_i), dtype=float)
        try:
            inv = np.linalg.inv(a_u)
        except np.linalg.LinAlgError:
            viol_e = math.inf
            continue
        viol_e = max(viol_e, mat_row_sup_norm(inv) - f.lam)
    viol_e = max(viol_e, 0.0)

    # First-order consequences, on a smaller derivative sample.
    deriv_count = min(sample_count, 32)
    sl_s = slice(0, n_s)
    sl_u = slice(n_s, n_s + n_u)
    sl_x = slice(n_s + n_u, dims.n)
    viol_bc = 0.0
    viol_dd = 0.0
    for i in range(deriv_count):
        jac_stable = _r_jacobian(f, s_samp[i], zero_u, x_samp[i], FD_STEP_FIRST)
        viol_bc = max(
            viol_bc,
            float(np.max(np.abs(jac_stable[sl_u, sl_s]))),
            float(np.max(np.abs(jac_stable[sl_u, sl_x]))),
        )
        viol_dd = max(
            viol_dd,
            float(np.max(np.abs(jac_stable[sl_x, sl_s]))),
            float(np.max(np.abs(jac_stable[sl_x, sl_x]))),
        )
        jac_unstable = _r_jacobian(f, zero_s, u_samp[i], x_samp[i], FD_STEP_FIRST)
        viol_bc = max(
            viol_bc,
            float(np.max(np.abs(jac_unstable[sl_s, sl_u]))),
            float(np.max(np.abs(jac_unstable[sl_s, sl_x]))),
        )
        viol_dd = max(
            viol_dd,
            float(np.max(np.abs(jac_unstable[sl_x, sl_u]))),
            float(np.max(np.abs(jac_unstable[sl_x, sl_x]))),
        )

    checks = (
        ConditionCheck("a", "r(0,0,x) = 0: the manifold is invariant", viol_a, tol),
        ConditionCheck("b", "r_u(s,0,x) = 0: stable slice is straight", viol_b, tol),
        ConditionCheck("c", "r_s(0,u,x) = 0: unstable slice is straight", viol_c, tol),
        ConditionCheck("d", "r_x = 0 on both slices: x-dynamics conjugate to g", viol_d, tol),
        ConditionCheck("e", "||A_s|| <= lambda and ||A_u^-1|| <= lambda", viol_e, tol),
        ConditionCheck("derivatives_bc", "slice remainder Jacobian blocks vanish (b, c)", viol_bc, tol),
        ConditionCheck("derivatives_d", "slice r_x derivative blocks vanish (d)", viol_dd, tol),
    )
    return ConditionReport(checks=checks, sample_count=sample_count, tol=tol, seed=seed)


# ---------------------------------------------------------------------------
# Constant budget


@dataclass(frozen=True)
class BoundSet:
    """Measured constants of one map plus the derived slab quantities.

    ``eps_s`` is the half-width of the stable slab on which the persistence
    argument runs, chosen as the infimum of the two admissible branches
    (capped at rho); ``delta = (C+1) eps_s`` bounds the slice-vanishing first
    derivatives there, and ``mu_star`` is the inclination-denominator factor
    at the stored ``target_eps``.  ``c_excluded`` reports the second-derivative
    mass of the (sigma' = s) blocks, which the budget deliberately leaves out.
    """

    lam: float
    k: float
    C: float
    C_tilde: float
    D: float
    rho: float
    eps_s: float
    delta: float
    mu_star: float
    target_eps: float
    c_excluded: float = 0.0

    @classmethod
    def from_constants(
        cls,
        lam: float,
        k: float,
        C: float,
        C_tilde: float,
        D: float,
        rho: float,
        target_eps: float,
        c_excluded: float = 0.0,
    ) -> "BoundSet":
        gap = 1.0 / lam - k
        eps = target_eps
        denom = 1.0 - ((2.0 * k + C * rho) / gap) * eps
        if denom <= 0.0:
            mu_star = math.inf
            eps_s = 0.0
        else:
            mu_star = 1.0 / denom
            branch_x = eps * (gap / mu_star) * (1.0 - k * mu_star / gap) / (C + 1.0 + eps * (C_tilde + C + 1.0))
            branch_s = eps * (1.0 - (lam + k) * mu_star / gap) / (C + 1.0 + (2.0 * C + 1.0) * eps)
            eps_s = max(0.0, min(branch_x, branch_s, rho))
        return cls(
            lam=lam,
            k=k,
            C=C,
            C_tilde=C_tilde,
            D=D,
            rho=rho,
            eps_s=eps_s,
            delta=(C + 1.0) * eps_s,
            mu_star=mu_star,
            target_eps=eps,
            c_excluded=c_excluded,
        )

    @property
    def gap(self) -> float:
        """lambda^-1 - k, the effective one-step expansion floor."""
        return 1.0 / self.lam - self.k

    @property
    def lk1_ok(self) -> bool:
        return 0.0 < self.lam + self.k < 1.0

    @property
    def lk2_ok(self) -> bool:
        return self.gap > 1.0

    @property
    def slab_ok(self) -> bool:
        return self.eps_s > 0.0

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "k": self.k,
            "C": self.C,
            "C_tilde": self.C_tilde,
            "D": self.D,
            "rho": self.rho,
            "eps_s": self.eps_s,
            "delta": self.delta,
            "mu_star": self.mu_star,
            "target_eps": self.target_eps,
            "c_excluded": self.c_excluded,
            "lk1_ok": self.lk1_ok,
            "lk2_ok": self.lk2_ok,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    holds: bool
    slack: float

    def to_dict(self) -> dict:
        return {"name": self.name, "holds": self.holds, "slack": self.slack}


def check_constants(b: BoundSet) -> tuple:
    """Evaluate the four standing inequalities with their numeric slack."""
    lk1 = 1.0 - (b.lam + b.k)
    lk2 = b.gap - 1.0
    rate = (b.k + b.lam) - b.k / b.gap
    contraction = 1.0 - ((b.lam + b.k) / b.gap) * b.mu_star
    return (
        ConstraintCheck("lambda_plus_k_below_one", 0.0 < b.lam + b.k < 1.0, lk1),
        ConstraintCheck("inverse_gap_above_one", lk2 > 0.0, lk2),
        ConstraintCheck("inclination_rate_below_budget", rate > 0.0, rate),
        ConstraintCheck("slab_contraction", contraction > 0.0, contraction),
    )


def _bound_grid(f: MapSpec, density: int, margin: float) -> np.ndarray:
    """Regular product grid over the sampling box.

    ``density`` counts subdivisions per axis: bounded axes get density+1 nodes
    including both endpoints, periodic axes density nodes without the wrap
    duplicate.  Doubling the density therefore refines every axis in place,
    which keeps the sampled sups monotone under refinement.
    """
    dims = f.dims
    half = f.rho * (1.0 - 1e-9) - margin
    if half <= 0:
        half = 0.5 * f.rho
    axes = []
    for _ in range(dims.n_s + dims.n_u):
        axes.append(np.linspace(-half, half, density + 1))
    for (lo, hi), kind in zip(f.x_ranges(), f.topo.kinds):
        if kind == "angle":
            axes.append(np.linspace(lo, hi, density, endpoint=False))
        else:
            axes.append(np.linspace(lo, hi, density + 1))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def _second_tensor(f: MapSpec, s, u, x, h2: float) -> np.ndarray:
    if f.d2_r is not None:
        return np.asarray(f.d2_r(s, u, x), dtype=float)
    dims = f.dims

    def func(z):
        zs, zu, zx = dims.split(z)
        return f.r_concat(zs, zu, zx)

    return _fd_second(func, dims.join(s, u, x), h2)


def _g_second_tensor(f: MapSpec, x, h2: float) -> np.ndarray:
    if f.d2_g is not None:
        return np.asarray(f.d2_g(x), dtype=float)
    return _fd_second(lambda z: np.asarray(f.g_map(z), dtype=float).reshape(-1), x, h2)


def estimate_bounds(
    f: MapSpec,
    grid_density: int = 7,
    target_eps: float = 1e-2,
    h2: float = FD_STEP_SECOND,
) -> BoundSet:
    """Sample the constant budget on a regular grid and derive the slab.

    k is the sup of ||Dr||; C sups the second derivatives of r_s and r_x over
    differentiation pairs (sigma in {s,u,x}, sigma' in {u,x}); C~ sups the
    second derivative of g; D sups ||d_x A_s||.  Sampling (from below) is
    monotone under grid-density doubling.  Whether the
    measured k actually satisfies the standing inequalities is reported by
    ``check_constants`` / the BoundSet flags, never raised.
    """
    if grid_density < 2:
        raise ContractError("grid_density must be at least 2 per axis")
    if target_eps <= 0:
        raise ContractError("target_eps must be positive")
    dims = f.dims
    n_s, n_u = dims.n_s, dims.n_u
    sl_s = slice(0, n_s)
    sl_u = slice(n_s, n_s + n_u)
    sl_x = slice(n_s + n_u, dims.n)
    margin = 0.0 if (f.d_r is not None and f.d2_r is not None) else 2.5 * h2
    grid = _bound_grid(f, grid_density, margin)

    k = 0.0
    c_listed = 0.0
    c_excluded = 0.0
    c_tilde = 0.0
    d_bound = 0.0
    row_blocks = (sl_s, sl_x)  # i in {s, x}
    col_blocks = {"s": sl_s, "u": sl_u, "x": sl_x}
    seen_x = set()
    for row in grid:
        s_i, u_i, x_i = dims.split(row)
        k = max(k, mat_row_sup_norm(_r_jacobian(f, s_i, u_i, x_i, FD_STEP_FIRST)))
        t2 = _second_tensor(f, s_i, u_i, x_i, h2)
        for rows in row_blocks:
            for sig in ("s", "u", "x"):
                for sig2 in ("u", "x"):
                    c_listed = max(c_listed, tensor_row_sup_norm(t2[rows, col_blocks[sig], col_blocks[sig2]]))
                c_excluded = max(c_excluded, tensor_row_sup_norm(t2[rows, col_blocks[sig], sl_s]))
        x_key = x_i.tobytes()
        if x_key not in seen_x:
            seen_x.add(x_key)
            c_tilde = max(c_tilde, tensor_row_sup_norm(_g_second_tensor(f, x_i, h2)))
            d_bound = max(d_bound, tensor_row_sup_norm(_a_tensor(f, "s", x_i, FD_STEP_FIRST)))
    return BoundSet.from_constants(
        lam=f.lam,
        k=k,
        C=c_listed,
        C_tilde=c_tilde,
        D=d_bound,
        rho=f.rho,
        target_eps=target_eps,
        c_excluded=c_excluded,
    )
