"""Built-in model zoo.

Three closed-form normal-form maps exercise the map-side experiments: a
linear reference, a bilinear coupling that switches on every remainder block
allowed by the structural conditions, and a perturbed twist on an annulus
whose boundary circles stay exactly invariant.  The flow side is a
three-degree-of-freedom Hamiltonian: a pendulum factor carrying the saddle,
two rotor angles, and a coupling that vanishes on the cylinder {p = q = 0} to
an even contact order, integrated by a fixed-step symmetric splitting.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .exceptions import ContractError
from .geometry import TWO_PI, ChartTopology, Dimensions
from .normalform import BoundSet, MapSpec, check_constants

_SCALAR_DIMS = Dimensions(1, 1, 1)


def _check_rates(lambda_s: float, lambda_u: float) -> float:
    if not (0.0 < lambda_s < 1.0 < lambda_u):
        raise ContractError(
            f"need 0 < lambda_s < 1 < lambda_u, got lambda_s={lambda_s}, lambda_u={lambda_u}"
        )
    return max(lambda_s, 1.0 / lambda_u)


def make_linear(lambda_s: float = 0.5, lambda_u: float = 2.0, omega: float = 0.0, rho: float = 0.5) -> MapSpec:
    """Zero-remainder reference map: constant normal blocks, rigid rotation."""
    lam = _check_rates(lambda_s, lambda_u)
    a_s = np.array([[lambda_s]])
    a_u = np.array([[lambda_u]])
    return MapSpec(
        dims=_SCALAR_DIMS,
        topo=ChartTopology.angles(1),
        rho=rho,
        lam=lam,
        A_s=lambda x: a_s,
        A_u=lambda x: a_u,
        g_map=lambda x: x + omega,
        r_map=lambda s, u, x: (np.zeros(1), np.zeros(1), np.zeros(1)),
        d_r=lambda s, u, x: np.zeros((3, 3)),
        d2_r=lambda s, u, x: np.zeros((3, 3, 3)),
        d_A_s=lambda x: np.zeros((1, 1, 1)),
        d_A_u=lambda x: np.zeros((1, 1, 1)),
        d_g=lambda x: np.eye(1),
        d2_g=lambda x: np.zeros((1, 1, 1)),
        name="linear",
    )


def make_poly(c: float, lambda_s: float = 0.5, lambda_u: float = 2.0, rho: float = 0.5) -> MapSpec:
    """Bilinear coupling r_s = r_u = r_x = c*s*u on scalar blocks.

    The product s*u vanishes on both slices, so every structural condition
    holds exactly; the analytic budget is k = 2*c*rho, C = c.  Construction
    is refused when that budget breaks any standing inequality.
    """
    if c < 0:
        raise ContractError(f"coupling c must be nonnegative, got {c}")
    lam = _check_rates(lambda_s, lambda_u)
    probe = BoundSet.from_constants(lam=lam, k=2.0 * c * rho, C=c, C_tilde=0.0, D=0.0, rho=rho, target_eps=1e-2)
    broken = [chk.name for chk in check_constants(probe) if not chk.holds]
    if broken:
        raise ContractError(
            f"coupling c={c} with rho={rho} breaks {', '.join(broken)} "
            f"(k = 2*c*rho = {2.0 * c * rho:.6g})"
        )
    a_s = np.array([[lambda_s]])
    a_u = np.array([[lambda_u]])

    def r_map(s, u, x):
        w = c * s[0] * u[0]
        return (np.array([w]), np.array([w]), np.array([w]))

    def d_r(s, u, x):
        row = np.array([c * u[0], c * s[0], 0.0])
        return np.tile(row, (3, 1))

    def d2_r(s, u, x):
        t = np.zeros((3, 3, 3))
        t[:, 0, 1] = c
        t[:, 1, 0] = c
        return t

    return MapSpec(
        dims=_SCALAR_DIMS,
        topo=ChartTopology.angles(1),
        rho=rho,
        lam=lam,
        A_s=lambda x: a_s,
        A_u=lambda x: a_u,
        g_map=lambda x: np.asarray(x, dtype=float),
        r_map=r_map,
        d_r=d_r,
        d2_r=d2_r,
        d_A_s=lambda x: np.zeros((1, 1, 1)),
        d_A_u=lambda x: np.zeros((1, 1, 1)),
        d_g=lambda x: np.eye(1),
        d2_g=lambda x: np.zeros((1, 1, 1)),
        name="poly",
    )


def make_twist_annulus(
    eps_twist: float,
    y0: float,
    y1: float,
    lambda_s: float = 0.5,
    lambda_u: float = 2.0,
    omega_fn=None,
    rho: float = 0.5,
) -> MapSpec:
    """Twist map on the annulus T x [y0, y1] with exactly invariant edges.

    The base dynamics is (x, y) -> (x + omega(y), y) plus an eps_twist-sized
    perturbation proportional to (y - y0)(y1 - y), so both boundary circles
    are fixed setwise to the last bit.  Default omega(y) = 2*pi*y (the
    time-2*pi advance of a unit rotor).  Normal directions are constant and
    uncoupled, as in ``make_linear``.
    """
    if not y0 < y1:
        raise ContractError(f"need y0 < y1, got y0={y0}, y1={y1}")
    lam = _check_rates(lambda_s, lambda_u)

    if omega_fn is None:
        omega = lambda y: TWO_PI * y
        omega_d1 = lambda y: TWO_PI
        analytic_g = True
    else:
        omega = omega_fn
        omega_d1 = lambda y: (omega(y + 1e-6) - omega(y - 1e-6)) / 2e-6
        analytic_g = False

    y_grid = np.linspace(y0, y1, 101)
    slopes = np.array([omega_d1(y) for y in y_grid])
    if np.min(np.abs(slopes)) < 1e-9:
        raise ContractError("twist condition fails: omega'(y) vanishes on [y0, y1]")

    def g_map(x):
        ang, y = float(x[0]), float(x[1])
        bump = (y - y0) * (y1 - y)
        return np.array(
            [ang + omega(y) + eps_twist * bump * math.cos(ang), y + eps_twist * bump * math.sin(ang)]
        )

    def d_g(x):
        ang, y = float(x[0]), float(x[1])
        bump = (y - y0) * (y1 - y)
        dbump = y0 + y1 - 2.0 * y
        return np.array(
            [
                [1.0 - eps_twist * bump * math.sin(ang), omega_d1(y) + eps_twist * dbump * math.cos(ang)],
                [eps_twist * bump * math.cos(ang), 1.0 + eps_twist * dbump * math.sin(ang)],
            ]
        )

    def d2_g(x):
        ang, y = float(x[0]), float(x[1])
        bump = (y - y0) * (y1 - y)
        dbump = y0 + y1 - 2.0 * y
        t = np.empty((2, 2, 2))
        t[0, 0, 0] = -eps_twist * bump * math.cos(ang)
        t[0, 0, 1] = -eps_twist * dbump * math.sin(ang)
        t[0, 1, 0] = t[0, 0, 1]
        t[0, 1, 1] = -2.0 * eps_twist * math.cos(ang)
        t[1, 0, 0] = -eps_twist * bump * math.sin(ang)
        t[1, 0, 1] = eps_twist * dbump * math.cos(ang)
        t[1, 1, 0] = t[1, 0, 1]
        t[1, 1, 1] = -2.0 * eps_twist * math.sin(ang)
        return t

    a_s = np.array([[lambda_s]])
    a_u = np.array([[lambda_u]])
    n = 4
    return MapSpec(
        dims=Dimensions(1, 1, 2),
        topo=ChartTopology.of(("angle", "linear")),
        rho=rho,
        lam=lam,
        A_s=lambda x: a_s,
        A_u=lambda x: a_u,
        g_map=g_map,
        r_map=lambda s, u, x: (np.zeros(1), np.zeros(1), np.zeros(2)),
        d_r=lambda s, u, x: np.zeros((n, n)),
        d2_r=lambda s, u, x: np.zeros((n, n, n)),
        d_A_s=lambda x: np.zeros((1, 1, 2)),
        d_A_u=lambda x: np.zeros((1, 1, 2)),
        d_g=d_g if analytic_g else None,
        d2_g=d2_g if analytic_g else None,
        x_box=((0.0, TWO_PI), (y0, y1)),
        name="twist_annulus",
    )


def make_defective(condition: str = "b", amp: float = 0.025, rho: float = 0.5) -> MapSpec:
    """Deliberately broken map for testing the validators and margin checks.

    condition "b": r_u = amp*s, so the stable slice {u = 0} is not invariant.
    condition "d": r_x = amp*s, so the base dynamics leaks off the slices and
    the manifold-inclination bound must eventually be violated.
    """
    if condition not in ("b", "d"):
        raise ContractError(f"condition must be 'b' or 'd', got {condition!r}")
    a_s = np.array([[0.5]])
    a_u = np.array([[2.0]])
    row = 1 if condition == "b" else 2

    def r_map(s, u, x):
        out = [np.zeros(1), np.zeros(1), np.zeros(1)]
        out[row] = np.array([amp * s[0]])
        return tuple(out)

    def d_r(s, u, x):
        jac = np.zeros((3, 3))
        jac[row, 0] = amp
        return jac

    return MapSpec(
        dims=_SCALAR_DIMS,
        topo=ChartTopology.angles(1),
        rho=rho,
        lam=0.5,
        A_s=lambda x: a_s,
        A_u=lambda x: a_u,
        g_map=lambda x: np.asarray(x, dtype=float),
        r_map=r_map,
        d_r=d_r,
        d2_r=lambda s, u, x: np.zeros((3, 3, 3)),
        d_A_s=lambda x: np.zeros((1, 1, 1)),
        d_A_u=lambda x: np.zeros((1, 1, 1)),
        d_g=lambda x: np.eye(1),
        d2_g=lambda x: np.zeros((1, 1, 1)),
        name=f"defective_{condition}",
    )


# ---------------------------------------------------------------------------
# Hamiltonian side


def contact_order(nu: float, sigma_param: float, log_base: str = "natural") -> int:
    """Even order 2*floor(log(nu)/(4*sigma) + 1) of cylinder tangency.

    Natural log by default; the base-10 reading is exposed as an experimental
    switch.  Any nu >= 1 is accepted (the floor form already yields the
    minimal order 2 whenever log(nu) < 4*sigma).
    """
    if nu < 1:
        raise ContractError(f"nu must be at least 1, got {nu}")
    if sigma_param <= 0:
        raise ContractError(f"sigma_param must be positive, got {sigma_param}")
    if log_base == "natural":
        lg = math.log(nu)
    elif log_base == "base10":
        lg = math.log10(nu)
    else:
        raise ContractError(f"log_base must be 'natural' or 'base10', got {log_base!r}")
    return 2 * int(math.floor(lg / (4.0 * sigma_param) + 1.0))


DEFAULT_F_COEFFS = ((1, 0, 1.0, 0.0), (0, 1, 1.0, 0.0))  # cos(theta) + cos(phi)
DEFAULT_G_COEFFS = ((1, 0, 1.0, 0.0), (1, -1, 1.0, 0.0))  # cos(theta) + cos(theta - phi)


def _coeff_tables(coeffs):
    arr = np.asarray(coeffs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise ContractError("Fourier table rows must be (k1, k2, cos_coeff, sin_coeff)")
    k1 = arr[:, 0].astype(np.int64)
    k2 = arr[:, 1].astype(np.int64)
    if not (np.all(k1 == arr[:, 0]) and np.all(k2 == arr[:, 1])):
        raise ContractError("Fourier mode numbers k1, k2 must be integers")
    return k1, k2, np.ascontiguousarray(arr[:, 2]), np.ascontiguousarray(arr[:, 3])


def _fourier(coeffs, theta: float, phi: float):
    """(value, d/dtheta, d/dphi) of a finite Fourier sum."""
    k1, k2, c, s = _coeff_tables(coeffs)
    arg = k1 * theta + k2 * phi
    ca = np.cos(arg)
    sa = np.sin(arg)
    val = float(np.sum(c * ca + s * sa))
    dmode = -c * sa + s * ca
    return val, float(np.sum(k1 * dmode)), float(np.sum(k2 * dmode))


@dataclass(frozen=True)
class HamiltonianSpec:
    """Pendulum-plus-rotors Hamiltonian with a cylinder-flat coupling.

        H = p^2/2 + I^2/2 + J + eps*(cos q - 1) + eps*f(theta, phi)
            + mu*(sin q)^order * g(theta, phi)

    f and g are finite Fourier tables in the two rotor angles; the coupling
    exponent (``contact_order``) is derived from (nu, sigma_param) and is
    always an even integer >= 2, which keeps {p = q = 0} exactly invariant.
    """

    eps: float
    mu: float
    nu: float = 55.0
    sigma_param: float = 1.0
    f_coeffs: tuple = DEFAULT_F_COEFFS
    g_coeffs: tuple = DEFAULT_G_COEFFS
    energy: float = 0.0
    log_base: str = "natural"

    def __post_init__(self):
        if self.eps < 0:
            raise ContractError(f"eps must be nonnegative, got {self.eps}")
        if self.mu < 0:
            raise ContractError(f"mu must be nonnegative, got {self.mu}")
        if self.mu > self.eps:
            raise ContractError(f"mu must not exceed eps, got mu={self.mu} > eps={self.eps}")
        if self.eps > 0 and self.mu > self.eps / 10.0:
            warnings.warn(
                f"mu={self.mu} is not small against eps={self.eps}; the coupling "
                "is meant to be a higher-order perturbation",
                stacklevel=2,
            )
        _coeff_tables(self.f_coeffs)
        _coeff_tables(self.g_coeffs)
        contact_order(self.nu, self.sigma_param, self.log_base)

    @property
    def contact_order(self) -> int:
        return contact_order(self.nu, self.sigma_param, self.log_base)

    def kernel_args(self) -> tuple:
        fk1, fk2, fc, fs = _coeff_tables(self.f_coeffs)
        gk1, gk2, gc, gs = _coeff_tables(self.g_coeffs)
        return (self.eps, self.mu, self.contact_order, fk1, fk2, fc, fs, gk1, gk2, gc, gs)


def _canonical_angle(a: float) -> float:
    w = math.fmod(a, TWO_PI)
    if w < 0.0:
        w += TWO_PI
    if w >= TWO_PI:
        w = 0.0
    return w


@dataclass(frozen=True)
class FlowState:
    """Flow state (p, q, I, theta, J, phi); the three angles live in [0, 2*pi)."""

    p: float
    q: float
    I: float
    theta: float
    J: float
    phi: float

    def __post_init__(self):
        for label, value in (("p", self.p), ("I", self.I), ("J", self.J)):
            if not math.isfinite(value):
                raise ContractError(f"momentum {label} must be finite, got {value}")
        for label, value in (("q", self.q), ("theta", self.theta), ("phi", self.phi)):
            if not math.isfinite(value):
                raise ContractError(f"angle {label} must be finite, got {value}")
            object.__setattr__(self, label, _canonical_angle(value))

    def as_array(self) -> np.ndarray:
        return np.array([self.p, self.q, self.I, self.theta, self.J, self.phi])

    @classmethod
    def from_array(cls, arr) -> "FlowState":
        p, q, act, th, jj, ph = (float(v) for v in np.asarray(arr, dtype=float))
        return cls(p=p, q=q, I=act, theta=th, J=jj, phi=ph)


def hamiltonian_energy(hs: HamiltonianSpec, st: FlowState) -> float:
    fval, _, _ = _fourier(hs.f_coeffs, st.theta, st.phi)
    gval, _, _ = _fourier(hs.g_coeffs, st.theta, st.phi)
    order = hs.contact_order
    return (
        0.5 * st.p * st.p
        + 0.5 * st.I * st.I
        + st.J
        + hs.eps * (math.cos(st.q) - 1.0)
        + hs.eps * fval
        + hs.mu * math.sin(st.q) ** order * gval
    )


def ham_vector_field(hs: HamiltonianSpec, st: FlowState) -> np.ndarray:
    """Time derivative (dp, dq, dI, dtheta, dJ, dphi) of the canonical flow."""
    order = hs.contact_order
    sq = math.sin(st.q)
    cq = math.cos(st.q)
    _, f_th, f_ph = _fourier(hs.f_coeffs, st.theta, st.phi)
    g_val, g_th, g_ph = _fourier(hs.g_coeffs, st.theta, st.phi)
    sq_pow = sq ** (order - 1)
    return np.array(
        [
            hs.eps * sq - hs.mu * order * sq_pow * cq * g_val,
            st.p,
            -hs.eps * f_th - hs.mu * sq_pow * sq * g_th,
            st.I,
            -hs.eps * f_ph - hs.mu * sq_pow * sq * g_ph,
            1.0,
        ]
    )


def symplectic_step(hs: HamiltonianSpec, st: FlowState, h: float) -> FlowState:
    """One kick(h/2)-drift(h)-kick(h/2) step of the separable splitting."""
    if h <= 0:
        raise ContractError(f"step size must be positive, got {h}")
    out = _kernels.advance(st.as_array(), float(h), 1, *hs.kernel_args())
    return FlowState.from_array(out)


def integrate(hs: HamiltonianSpec, st: FlowState, h: float, n_steps: int) -> FlowState:
    """n_steps splitting steps in one kernel call."""
    if h <= 0 or n_steps < 0:
        raise ContractError("need h > 0 and n_steps >= 0")
    out = _kernels.advance(st.as_array(), float(h), int(n_steps), *hs.kernel_args())
    return FlowState.from_array(out)


def integrate_series(hs: HamiltonianSpec, st: FlowState, h: float, n_blocks: int, stride: int) -> np.ndarray:
    """Raw (n_blocks+1, 6) state record every ``stride`` steps, initial row included.

    Rows are kernel output: angles accumulate without wrapping, which is what
    growth-rate fits and drift audits want.
    """
    if h <= 0 or n_blocks < 0 or stride < 1:
        raise ContractError("need h > 0, n_blocks >= 0, stride >= 1")
    return _kernels.advance_sampled(st.as_array(), float(h), int(n_blocks), int(stride), *hs.kernel_args())


def poincare_map(hs: HamiltonianSpec, st: FlowState, h: float = 1e-3) -> tuple:
    """First return to the section {phi = 0}.

    The last angle advances at unit rate, so the return time is exactly
    2*pi: we take floor(2*pi/h) full steps plus one remainder step, then pin
    phi back to 0.  Returns (state, energy_drift).
    """
    if abs(st.phi) > 1e-12 and abs(st.phi - TWO_PI) > 1e-12:
        raise ContractError(f"state must start on the section phi=0, got phi={st.phi}")
    if h <= 0 or h > TWO_PI:
        raise ContractError(f"step size must lie in (0, 2*pi], got {h}")
    e0 = hamiltonian_energy(hs, st)
    args = hs.kernel_args()
    n_full = int(math.floor(TWO_PI / h))
    rem = TWO_PI - n_full * h
    arr = _kernels.advance(st.as_array(), float(h), n_full, *args)
    if rem > 0.0:
        arr = _kernels.advance(arr, float(rem), 1, *args)
    ret = FlowState.from_array(arr)
    ret = FlowState(p=ret.p, q=ret.q, I=ret.I, theta=ret.theta, J=ret.J, phi=0.0)
    return ret, hamiltonian_energy(hs, ret) - e0


def pendulum_local_coords(hs: HamiltonianSpec, st: FlowState) -> tuple:
    """Saddle eigencoordinates s = (q - p/sqrt(eps))/2, u = (q + p/sqrt(eps))/2.

    q is read as its signed representative in (-pi, pi] so that the saddle at
    the origin looks linear; exponents of the linearized flow are -sqrt(eps)
    along s and +sqrt(eps) along u.
    """
    if hs.eps <= 0:
        raise ContractError("local hyperbolic coordinates need eps > 0")
    root = math.sqrt(hs.eps)
    q_signed = st.q if st.q <= math.pi else st.q - TWO_PI
    return ((q_signed - st.p / root) / 2.0, (q_signed + st.p / root) / 2.0)


def pendulum_local_inverse(hs: HamiltonianSpec, s: float, u: float) -> tuple:
    """(p, q) from the saddle eigencoordinates."""
    if hs.eps <= 0:
        raise ContractError("local hyperbolic coordinates need eps > 0")
    root = math.sqrt(hs.eps)
    return (root * (u - s), s + u)
