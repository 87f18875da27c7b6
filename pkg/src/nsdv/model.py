"""Model parameters, grid/state containers and the closed-form constitutive laws.

The fluid is governed by a pressure law P(rho) = rho**gamma and a viscosity
law mu(rho) = rho**alpha with alpha > 1/2 and gamma >= max(1, alpha).  All the
auxiliary functions below are elementary consequences of those two powers:

    f1(rho)   = P'(rho)*rho/mu(rho)          = gamma * rho**(gamma-alpha)
    f2(rho)   solves rho*f2'(rho) = f1/rho   (two branches, log at gamma=alpha+1)
    phi(rho)  solves phi'(rho) = mu/rho**2   (two branches, log at alpha=1)

f2 shifts the scaled velocity gradient into the quantity obeying a maximum
principle; phi couples density gradients into the effective velocity.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InputError

# Branch selection tolerance for gamma == alpha + 1 (and gamma == 1, alpha == 1).
BRANCH_TOL = 1e-12
# |gamma - alpha - 1| below this (but nonzero) makes f2's coefficient blow up.
CONDITIONING_TOL = 1e-6
# Density at or below this is reported as blow-up, never clamped.
RHO_FLOOR = 1e-10


@dataclass(frozen=True)
class ModelParams:
    """Exponents and domain geometry; fixes every constitutive law.

    The far-field state is pinned to (rho, u) = (1, 0): the estimates the
    diagnostics check all assume rho - 1 and u are square integrable.
    """

    alpha: float
    gamma: float
    half_length: float
    farfield_density: float = 1.0
    farfield_velocity: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0.5:
            raise InputError(f"alpha must exceed 1/2, got {self.alpha}")
        if self.gamma < max(1.0, self.alpha):
            raise InputError(
                f"gamma must be >= max(1, alpha) = {max(1.0, self.alpha)}, got {self.gamma}"
            )
        if not self.half_length > 0:
            raise InputError(f"half_length must be positive, got {self.half_length}")
        if self.farfield_density != 1.0 or self.farfield_velocity != 0.0:
            raise InputError("far-field state is fixed at (rho, u) = (1, 0)")
        gap = self.gamma - self.alpha - 1.0
        if BRANCH_TOL < abs(gap) < CONDITIONING_TOL:
            warnings.warn(
                f"gamma - alpha - 1 = {gap:.3e}: f2 coefficient is ill conditioned",
                RuntimeWarning,
                stacklevel=2,
            )

    @property
    def log_branch(self) -> bool:
        """True when gamma = alpha + 1 within 1e-12: f2 takes its log form."""
        return abs(self.gamma - self.alpha - 1.0) <= BRANCH_TOL


@dataclass(frozen=True)
class Grid1D:
    """Uniform node grid on [-L, L]; x_i = -L + i*dx with dx = 2L/(n-1)."""

    n_cells: int
    half_length: float
    dx: float = field(init=False)
    coords: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_cells < 3:
            raise InputError(f"need at least 3 nodes, got {self.n_cells}")
        if not self.half_length > 0:
            raise InputError("half_length must be positive")
        dx = 2.0 * self.half_length / (self.n_cells - 1)
        coords = -self.half_length + dx * np.arange(self.n_cells)
        coords[-1] = self.half_length  # pin the last node exactly at +L
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "coords", coords)


@dataclass(frozen=True)
class FluidState:
    """Sampled (rho, u) at one time instant.  rho must be strictly positive:
    vacuum aborts a run, it never silently propagates."""

    time: float
    rho: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        u = np.asarray(self.u, dtype=float)
        if rho.shape != u.shape or rho.ndim != 1:
            raise InputError(f"rho/u must be equal-length 1D arrays, got {rho.shape} vs {u.shape}")
        if np.any(rho <= 0.0):
            i = int(np.argmin(rho))
            raise DomainError(f"non-positive density {rho[i]} at node {i} (t={self.time})")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "u", u)

    @property
    def n(self) -> int:
        return self.rho.shape[0]


def _check_positive(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0.0):
        raise DomainError("density must be strictly positive")
    return rho


def pressure(rho, p: ModelParams):
    """P(rho) = rho**gamma."""
    return _check_positive(rho) ** p.gamma


def viscosity(rho, p: ModelParams):
    """mu(rho) = rho**alpha."""
    return _check_positive(rho) ** p.alpha


def f1(rho, p: ModelParams):
    """Damping coefficient P'(rho)*rho/mu(rho) = gamma * rho**(gamma-alpha); >= 0."""
    return p.gamma * _check_positive(rho) ** (p.gamma - p.alpha)


def f2(rho, p: ModelParams):
    """Effective-pressure offset: the antiderivative fixed by rho*f2' = f1/rho.

    gamma/(gamma-alpha-1) * rho**(gamma-alpha-1) off the degenerate line,
    gamma*log(rho) on it.
    """
    rho = _check_positive(rho)
    if p.log_branch:
        return p.gamma * np.log(rho)
    e = p.gamma - p.alpha - 1.0
    return (p.gamma / e) * rho**e


def f1f2(rho, p: ModelParams):
    """Product f1*f2 in closed form (source term of the effective-pressure equation)."""
    rho = _check_positive(rho)
    if p.log_branch:
        return p.gamma**2 * np.log(rho) * rho ** (p.gamma - p.alpha)
    e = p.gamma - p.alpha - 1.0
    return (p.gamma**2 / e) * rho ** (2.0 * p.gamma - 2.0 * p.alpha - 1.0)


def f1prime_rho_over_mu(rho, p: ModelParams):
    """f1'(rho)*rho/mu(rho) = gamma*(gamma-alpha)*rho**(gamma-2*alpha).

    Coefficient of the quadratic (v-u)**2 term; identically zero when gamma = alpha.
    """
    rho = _check_positive(rho)
    if p.gamma == p.alpha:
        return np.zeros_like(rho)
    return p.gamma * (p.gamma - p.alpha) * rho ** (p.gamma - 2.0 * p.alpha)


def phi(rho, p: ModelParams):
    """Density potential with phi'(rho) = mu(rho)/rho**2 = rho**(alpha-2).

    rho**(alpha-1)/(alpha-1) for alpha != 1, log(rho) for alpha = 1.  Its spatial
    gradient is exactly the gap between effective and actual velocity.
    """
    rho = _check_positive(rho)
    if abs(p.alpha - 1.0) <= BRANCH_TOL:
        return np.log(rho)
    return rho ** (p.alpha - 1.0) / (p.alpha - 1.0)


def internal_energy(rho, p: ModelParams):
    """Relative internal energy Pi(rho) - Pi(1) - Pi'(1)(rho - 1).

    Pi(s) = s**gamma/(gamma-1) for gamma > 1 and s*log(s) for gamma = 1; the
    relative form is the unique (up to affine terms) convex integrand with
    rho*Pi''(rho) = P'(rho), nonnegative and vanishing only at rho = 1, so the
    integral over the line converges with the (1, 0) far field.
    """
    rho = _check_positive(rho)
    if abs(p.gamma - 1.0) <= BRANCH_TOL:
        return rho * np.log(rho) - rho + 1.0
    g = p.gamma
    return (rho**g - g * rho + g - 1.0) / (g - 1.0)


def sound_speed(rho, p: ModelParams):
    """c(rho) = sqrt(P'(rho)) = sqrt(gamma * rho**(gamma-1))."""
    return np.sqrt(p.gamma * _check_positive(rho) ** (p.gamma - 1.0))
