"""Ground state of the Schroedinger-Newton equation.

A single body of mass ``m`` bound by the Newton potential of its own density::

    -hbar^2/(2m) u'' + Phi[u] u = E u,
    Phi(r) = -G m^2 [ (1/r) int_0^r u^2 dr' + int_r^inf u^2/r' dr' ]

with ``u = r R`` the reduced radial wavefunction. Internally everything is in
units ``hbar = G = m = 1``; lengths scale as ``hbar^2/(G m^3)`` and energies
as ``G^2 m^5 / hbar^2``, so one dimensionless problem serves every mass.
"""
from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad, solve_ivp
from scipy.linalg import eigh_tridiagonal

from .constants import G, HBAR
from .errors import ConvergenceError, DomainError, InvariantError

NORM_TOL = 1e-8
TAIL_TOL = 1e-6
MIN_POINTS = 200
POINTS_PER_WIDTH = 50


def length_unit(mass, hbar=HBAR, G=G):
    return hbar**2 / (G * mass**3)


def energy_unit(mass, hbar=HBAR, G=G):
    return G**2 * mass**5 / hbar**2


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Uniform grid ``r_k = k * r_max / n_points``, ``k = 1..n_points``."""
    r_max: float
    n_points: int
    r: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_points < MIN_POINTS:
            raise DomainError(f"n_points must be >= {MIN_POINTS}, got {self.n_points}")
        if not self.r_max > 0:
            raise DomainError(f"r_max must be positive, got {self.r_max!r}")
        r = self.r_max * np.arange(1, self.n_points + 1) / self.n_points
        r.setflags(write=False)
        object.__setattr__(self, "r", r)

    @property
    def spacing(self):
        return self.r_max / self.n_points

    @classmethod
    def for_mass(cls, mass, r_max_dimensionless, n_points):
        return cls(r_max_dimensionless * length_unit(mass), n_points)


def _trapz_norm(u, h):
    # u vanishes at r = 0 and r = r_max, so the trapezoid rule is a plain sum
    return h * float(np.sum(u**2))


def _mean_field(u, r):
    """``-[(1/r) int_0^r u^2 + int_r^rmax u^2/r']`` on grid ``r`` (``u(0) = 0`` implied)."""
    rr = np.concatenate(([0.0], r))
    u2 = np.concatenate(([0.0], u**2))
    inner = cumulative_trapezoid(u2, rr, initial=0.0)
    # u^2 / r -> 0 at the origin since u ~ r
    w = np.concatenate(([0.0], u2[1:] / rr[1:]))
    cum = cumulative_trapezoid(w, rr, initial=0.0)
    outer = cum[-1] - cum
    return -(inner[1:] / r + outer[1:])


def sn_potential(u, grid: RadialGrid, m, G=G):
    """Self-gravity potential energy (J) of a normalized radial density ``u``.

    ``u`` is sampled on ``grid.r`` and is zero at ``grid.r_max``.
    """
    u = np.asarray(u, dtype=float)
    norm = _trapz_norm(u, grid.spacing)
    if abs(norm - 1.0) > 1e-6:
        raise DomainError(f"u is not normalized: int u^2 dr = {norm!r}")
    return G * m**2 * _mean_field(u, grid.r)


@dataclass(frozen=True, eq=False)
class SolitonSolution:
    grid: RadialGrid
    u: np.ndarray                 # m^-1/2
    phi: np.ndarray               # J
    energy_eigenvalue: float      # J
    binding_energy: float         # J
    kinetic_energy: float         # J
    potential_energy: float       # J, <Phi>
    dimensionless_eigenvalue: float
    mass: float
    iterations: int
    residual: float
    residual_history: list = field(repr=False, default_factory=list)
    coarse_grid: bool = False
    tail_ok: bool = True

    @property
    def peak_radius(self):
        """Radius of maximal ``u^2``, refined by a parabola through the top three samples."""
        u2 = self.u**2
        k = int(np.argmax(u2))
        r = self.grid.r
        if 0 < k < len(r) - 1:
            a, b, c = u2[k - 1], u2[k], u2[k + 1]
            denom = a - 2 * b + c
            if denom != 0:
                return float(r[k] + 0.5 * self.grid.spacing * (a - c) / denom)
        return float(r[k])

    def summary(self):
        return {
            "mass_kg": self.mass,
            "energy_eigenvalue_J": self.energy_eigenvalue,
            "binding_energy_J": self.binding_energy,
            "iterations": self.iterations,
            "residual": self.residual,
            "dimensionless_eigenvalue": self.dimensionless_eigenvalue,
        }


def _kinetic_tridiagonal(n, h):
    diag = np.full(n, 1.0 / h**2)
    off = np.full(n - 1, -0.5 / h**2)
    return diag, off


def _initial_guess(r):
    # hydrogen-like 1s shape with roughly the right width
    u = r * np.exp(-0.6 * r)
    u[-1] = 0.0
    return u


def solve_ground_state(m, grid: RadialGrid, tol=1e-10, max_iter=500, mixing=0.5) -> SolitonSolution:
    """Self-consistent field iteration for the nodeless ground state.

    Alternates the lowest eigenpair of ``-u''/2 + Phi u`` (second-order finite
    differences, Dirichlet at ``0`` and ``r_max``) with a rebuild of ``Phi``
    from the new density, mixed linearly. Stops when the relative change of the
    eigenvalue falls below ``tol``.
    """
    if not 0 < tol <= 1e-4:
        raise DomainError(f"tol must lie in (0, 1e-4], got {tol!r}")
    if not 0 < mixing <= 1:
        raise DomainError(f"mixing must lie in (0, 1], got {mixing!r}")
    if not m > 0:
        raise DomainError(f"mass must be positive, got {m!r}")
    a = length_unit(m)
    e0 = energy_unit(m)
    r = grid.r / a
    h = grid.spacing / a
    coarse = (1.0 / h) < POINTS_PER_WIDTH * (1 - 1e-9)
    if coarse:
        warnings.warn(f"grid spacing resolves the soliton width with only {1 / h:.1f} points",
                      RuntimeWarning, stacklevel=2)

    n_in = grid.n_points - 1   # interior unknowns; u(r_max) = 0
    kd, ko = _kinetic_tridiagonal(n_in, h)
    u = _initial_guess(r)
    u /= math.sqrt(_trapz_norm(u, h))
    phi = _mean_field(u, r)
    eps_prev = None
    history = []
    for it in range(1, max_iter + 1):
        vals, vecs = eigh_tridiagonal(kd + phi[:n_in], ko, select="i", select_range=(0, 0))
        eps = float(vals[0])
        u = np.zeros_like(r)
        u[:n_in] = vecs[:, 0]
        if u.sum() < 0:
            u = -u
        u /= math.sqrt(_trapz_norm(u, h))
        if np.any(u < -1e-12 * u.max()):
            # a sign-changing vector is not the ground state; keep its positive projection
            u = np.abs(u)
            u /= math.sqrt(_trapz_norm(u, h))
        phi_new = _mean_field(u, r)
        residual = float(np.max(np.abs(phi_new - phi)) / np.max(np.abs(phi_new)))
        history.append(residual)
        phi = (1.0 - mixing) * phi + mixing * phi_new
        if eps_prev is not None and abs(eps - eps_prev) < tol * abs(eps):
            break
        eps_prev = eps
    else:
        raise ConvergenceError(f"SCF did not converge in {max_iter} iterations "
                               f"(last residual {history[-1]:.3e})", history)

    norm = _trapz_norm(u, h)
    if abs(norm - 1.0) > NORM_TOL:
        raise InvariantError(f"solution lost normalization: {norm!r}")
    phi_sc = _mean_field(u, r)
    lap = np.zeros_like(u)
    lap[:n_in] = (np.concatenate(([0.0], u[:n_in - 1])) - 2 * u[:n_in] + u[1:n_in + 1]) / h**2
    t_kin = -0.5 * h * float(np.sum(u * lap))
    v_pot = h * float(np.sum(phi_sc * u**2))
    tail_ok = bool(abs(u[n_in - 1]) <= TAIL_TOL * np.max(np.abs(u)))

    return SolitonSolution(
        grid=grid,
        u=u / math.sqrt(a),
        phi=e0 * phi_sc,
        energy_eigenvalue=e0 * eps,
        binding_energy=e0 * (t_kin + 0.5 * v_pot),
        kinetic_energy=e0 * t_kin,
        potential_energy=e0 * v_pot,
        dimensionless_eigenvalue=eps,
        mass=float(m),
        iterations=it,
        residual=history[-1],
        residual_history=history,
        coarse_grid=coarse,
        tail_ok=tail_ok,
    )


def _shoot(s0, r_end):
    """Integrate the radial pair from the origin with ``psi(0) = 1``, ``S(0) = s0``.

    ``S = V - E`` obeys ``S'' + 2S'/r = 4 pi psi^2``. Returns -1 if ``psi``
    crosses zero, +1 if it turns upward, 0 if neither happens before ``r_end``.
    """
    def rhs(r, y):
        p, dp, s, ds = y
        return [dp, -2.0 / r * dp + 2.0 * s * p, ds, -2.0 / r * ds + 4.0 * np.pi * p * p]

    def node(r, y):
        return y[0]
    node.terminal = True

    def turn(r, y):
        return y[1]
    turn.terminal = True
    turn.direction = 1

    r0 = 1e-5
    y0 = [1.0 + s0 * r0**2 / 3, 2.0 * s0 * r0 / 3, s0 + 2.0 * np.pi * r0**2 / 3, 4.0 * np.pi * r0 / 3]
    sol = solve_ivp(rhs, (r0, r_end), y0, method="DOP853", rtol=1e-13, atol=1e-15,
                    events=[node, turn], dense_output=True)
    if sol.t_events[0].size:
        return -1, sol
    if sol.t_events[1].size:
        return 1, sol
    return 0, sol


def shooting_eigenvalue(bracket=(-3.0, -2.0), r_end=60.0):
    """Dimensionless ground-state eigenvalue by shooting and bisection.

    Works with the unnormalized solution ``psi(0) = 1`` and uses the scaling
    symmetry ``psi -> l^2 psi(l r)``, ``E -> l^2 E`` (norm ``N -> l N``) to
    normalize afterwards, so ``E = E_raw / N^2``.
    """
    lo, hi = bracket
    if _shoot(lo, r_end)[0] >= 0 or _shoot(hi, r_end)[0] <= 0:
        raise DomainError("bracket does not enclose the ground-state shooting parameter")
    while hi - lo > 4 * np.finfo(float).eps * abs(lo):
        mid = 0.5 * (lo + hi)
        if _shoot(mid, r_end)[0] < 0:
            lo = mid
        else:
            hi = mid
    _, sol = _shoot(hi, r_end)
    rr = np.linspace(sol.t[0], sol.t[-1], 20001)
    psi = sol.sol(rr)[0]
    # stop well inside the region where the truncated solution is still decaying
    r_cut = 0.8 * rr[int(np.argmin(np.abs(psi)))]
    norm = quad(lambda x: 4 * np.pi * x * x * sol.sol(x)[0] ** 2, sol.t[0], r_cut,
                limit=500, epsabs=1e-14, epsrel=1e-13)[0]
    y = sol.sol(r_cut)
    e_raw = -(y[2] + r_cut * y[3])   # (r S)' = -E once the density has died off
    return e_raw / norm**2
