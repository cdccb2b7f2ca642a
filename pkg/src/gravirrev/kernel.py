"""Mass lattices, positive kernels and spatially correlated Newton noise.

The Newtonian kernel ``G/|x - y|`` diverges at coincidence. Each cell is
smeared into an isotropic Gaussian of width ``sigma_reg``; the mutual
gravitational energy of two such blobs gives the regularized kernel::

    K_ij = G erf(d_ij / (2 sigma_reg)) / d_ij,     K_ii = G / (sigma_reg sqrt(pi))

which is positive definite for any set of distinct cells.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from ._rng import substream
from .constants import G, HBAR
from .errors import DegenerateConfigurationError, DomainError, InvariantError, NumericalError, ValidationError

SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-10
FACTOR_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class MassConfiguration:
    positions: np.ndarray   # (N, 3) m
    masses: np.ndarray      # (N,) kg
    label: str = ""

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float).reshape(-1, 3)
        m = np.array(self.masses, dtype=float).reshape(-1)
        if pos.shape[0] == 0:
            raise InvariantError("a mass configuration needs at least one cell")
        if pos.shape[0] != m.size:
            raise InvariantError("positions and masses have different lengths")
        if not np.all(np.isfinite(pos)):
            raise InvariantError("cell positions must be finite")
        if not np.all(m > 0):
            raise InvariantError("cell masses must be positive")
        pos.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "masses", m)

    @property
    def n(self):
        return self.masses.size

    @classmethod
    def from_json(cls, obj):
        cells = obj["cells"]
        pos = [[c["x_m"], c["y_m"], c["z_m"]] for c in cells]
        return cls(pos, [c["mass_kg"] for c in cells], obj.get("label", ""))

    def to_json(self):
        return {
            "label": self.label,
            "cells": [
                {"x_m": float(p[0]), "y_m": float(p[1]), "z_m": float(p[2]), "mass_kg": float(m)}
                for p, m in zip(self.positions, self.masses)
            ],
        }


def pairwise_distances(positions):
    pos = np.asarray(positions, dtype=float).reshape(-1, 3)
    diff = pos[:, None, :] - pos[None, :, :]
    return np.sqrt(np.sum(diff**2, axis=-1))


@dataclass(frozen=True, eq=False)
class Kernel:
    matrix: np.ndarray
    kind: str = "custom"
    regularization_sigma: float = float("nan")
    eigenvalues: np.ndarray = field(init=False, repr=False)
    eigenvectors: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        k = np.array(self.matrix, dtype=float)
        if k.ndim != 2 or k.shape[0] != k.shape[1]:
            raise InvariantError(f"kernel must be square, got shape {k.shape}")
        if not np.all(np.isfinite(k)):
            raise ValidationError("kernel has non-finite entries")
        scale = np.max(np.abs(k), initial=0.0)
        asym = np.max(np.abs(k - k.T), initial=0.0)
        if asym > SYMMETRY_TOL * scale:
            raise ValidationError(f"kernel not symmetric (max asymmetry {asym:.3e})")
        k = 0.5 * (k + k.T)
        lam, vec = np.linalg.eigh(k)
        radius = np.max(np.abs(lam), initial=0.0)
        if lam.size and lam[0] < -PSD_TOL * radius:
            raise ValidationError(
                f"kernel is not positive semidefinite: eigenvalue {lam[0]:.6e} "
                f"(spectral radius {radius:.6e})")
        for arr in (k, lam, vec):
            arr.setflags(write=False)
        object.__setattr__(self, "matrix", k)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "eigenvectors", vec)

    @property
    def n(self):
        return self.matrix.shape[0]

    def factor(self):
        """Square root ``L`` with ``L @ L.T == K`` (tiny negative eigenvalues clipped)."""
        L = self.eigenvectors * np.sqrt(np.clip(self.eigenvalues, 0.0, None))
        err = np.linalg.norm(L @ L.T - self.matrix)
        if err > FACTOR_TOL * max(np.linalg.norm(self.matrix), np.finfo(float).tiny):
            raise NumericalError(f"kernel factorization residual {err:.3e} too large")
        return L

    def to_json(self):
        return {
            "kind": self.kind,
            "sigma_reg_m": None if np.isnan(self.regularization_sigma) else self.regularization_sigma,
            "n": self.n,
            "matrix": self.matrix.tolist(),
        }

    @classmethod
    def from_json(cls, obj):
        sigma = obj.get("sigma_reg_m")
        return cls(np.array(obj["matrix"], dtype=float), obj.get("kind", "custom"),
                   float("nan") if sigma is None else float(sigma))


def newton_kernel_matrix(positions, sigma_reg, G=G):
    if not sigma_reg > 0:
        raise DomainError(f"sigma_reg must be positive, got {sigma_reg!r}")
    d = pairwise_distances(positions)
    n = d.shape[0]
    off = ~np.eye(n, dtype=bool)
    if np.any(d[off] == 0):
        i, j = np.argwhere((d == 0) & off)[0]
        raise DegenerateConfigurationError(f"cells {i} and {j} coincide")
    k = np.full((n, n), G / (sigma_reg * np.sqrt(np.pi)))
    k[off] = G * erf(d[off] / (2 * sigma_reg)) / d[off]
    return k


def build_newton_kernel(config: MassConfiguration, sigma_reg, G=G) -> Kernel:
    positions = config.positions if isinstance(config, MassConfiguration) else config
    return Kernel(newton_kernel_matrix(positions, sigma_reg, G), "newton", float(sigma_reg))


def build_custom_kernel(positions, h) -> Kernel:
    """Kernel ``K_ij = h(|x_i - x_j|)`` from a radial profile.

    ``h`` is either a vectorized callable of the distance or a tabulated
    profile ``(r_values, h_values)`` that is linearly interpolated.
    """
    d = pairwise_distances(positions)
    if callable(h):
        k = np.asarray(h(d), dtype=float) * np.ones_like(d)
    else:
        r_tab, h_tab = (np.asarray(a, dtype=float) for a in h)
        if np.any(np.diff(r_tab) <= 0):
            raise ValidationError("tabulated radii must be strictly increasing")
        if d.max() > r_tab[-1] or d.min() < r_tab[0]:
            raise ValidationError("tabulated profile does not cover all pair distances")
        k = np.interp(d, r_tab, h_tab)
    return Kernel(k, "custom")


@dataclass(frozen=True, eq=False)
class NoiseTrajectory:
    dt: float
    increments: np.ndarray   # (steps, N) potential impulses, J s / kg
    seed: int
    index: int = 0

    @property
    def steps(self):
        return self.increments.shape[0]


def sample_noise(kernel: Kernel, hbar_scaling, dt, steps, seed, index=0, hbar=HBAR) -> NoiseTrajectory:
    """White-in-time Gaussian impulses with ``E[W_i W_j] = hbar K_ij dt``.

    Without ``hbar_scaling`` the covariance is ``K_ij dt``. ``index`` selects
    the trajectory substream.
    """
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt!r}")
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps!r}")
    L = kernel.factor()
    scale = np.sqrt((hbar if hbar_scaling else 1.0) * dt)
    z = substream(seed, index).standard_normal((steps, kernel.n))
    w = scale * (z @ L.T)
    return NoiseTrajectory(float(dt), w, int(seed), int(index))
