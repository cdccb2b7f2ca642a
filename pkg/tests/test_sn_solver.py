import warnings

import numpy as np
import pytest

from gravirrev.constants import G, HBAR
from gravirrev.errors import ConvergenceError, DomainError
from gravirrev.sn_solver import (RadialGrid, energy_unit, length_unit, shooting_eigenvalue, sn_potential,
                                 solve_ground_state)

# shooting oracle, rtol 1e-13 ODE integration with eigenvalue bisection
SHOOTING_EIGENVALUE = -0.1627692078423792


@pytest.fixture(scope="module")
def unit_solution():
    return solve_ground_state(1.0, RadialGrid.for_mass(1.0, 30.0, 2000), tol=1e-11)


def test_shooting_oracle_value():
    # literature value of the dimensionless ground-state eigenvalue is about -0.163
    e = shooting_eigenvalue()
    assert e == pytest.approx(SHOOTING_EIGENVALUE, rel=1e-9)
    assert e == pytest.approx(-0.163, abs=5e-4)


def test_shooting_bad_bracket():
    with pytest.raises(DomainError):
        shooting_eigenvalue(bracket=(-2.0, -1.0))


def test_grid_contract():
    g = RadialGrid(10.0, 200)
    assert g.r[0] == pytest.approx(g.spacing) and g.r[-1] == 10.0
    assert np.allclose(np.diff(g.r), g.spacing, rtol=1e-12)
    with pytest.raises(DomainError):
        RadialGrid(10.0, 199)
    with pytest.raises(DomainError):
        RadialGrid(0.0, 500)


def _point_like(grid):
    u = np.zeros(grid.n_points)
    u[:3] = [1.0, 2.0, 1.0]
    return u / np.sqrt(grid.spacing * np.sum(u**2))


def test_potential_point_mass_limit():
    m = 2e-17
    grid = RadialGrid(1e-6, 1000)
    phi = sn_potential(_point_like(grid), grid, m)
    assert phi[-1] == pytest.approx(-G * m**2 / grid.r_max, rel=5e-3)
    assert np.all(np.diff(phi) >= 0)


def test_potential_mass_scaling_and_domain():
    grid = RadialGrid(1e-6, 1000)
    u = _point_like(grid)
    assert np.allclose(sn_potential(u, grid, 2e-17), 4 * sn_potential(u, grid, 1e-17), rtol=1e-14)
    with pytest.raises(DomainError):
        sn_potential(2 * u, grid, 1e-17)


def test_potential_non_decreasing_for_solution(unit_solution):
    assert np.all(np.diff(unit_solution.phi) >= 0)


def test_solution_invariants(unit_solution):
    s = unit_solution
    h = s.grid.spacing
    assert h * np.sum(s.u**2) == pytest.approx(1.0, abs=1e-8)
    assert np.all(s.u >= 0)           # nodeless
    assert s.u[-1] == 0.0
    assert s.tail_ok and not s.coarse_grid


def test_eigenvalue_matches_shooting_oracle(unit_solution):
    assert unit_solution.dimensionless_eigenvalue == pytest.approx(SHOOTING_EIGENVALUE, rel=1e-4)


def test_energy_bookkeeping(unit_solution):
    s = unit_solution
    assert s.energy_eigenvalue == pytest.approx(s.kinetic_energy + s.potential_energy, rel=1e-9)
    assert s.binding_energy == pytest.approx(s.kinetic_energy + 0.5 * s.potential_energy, rel=1e-12)
    # scaling (virial) balance 2T + W/2 = 0, hence E = eps / 3
    assert s.kinetic_energy == pytest.approx(-0.25 * s.potential_energy, rel=1e-4)
    assert s.binding_energy == pytest.approx(s.energy_eigenvalue / 3, rel=1e-4)


def test_mass_scaling():
    m = 1e-17
    s1 = solve_ground_state(m, RadialGrid.for_mass(m, 30.0, 2000), tol=1e-10)
    s2 = solve_ground_state(2 * m, RadialGrid.for_mass(2 * m, 30.0, 2000), tol=1e-10)
    assert s2.peak_radius == pytest.approx(s1.peak_radius / 8, rel=1e-2)
    assert s2.energy_eigenvalue == pytest.approx(32 * s1.energy_eigenvalue, rel=1e-2)
    assert s1.energy_eigenvalue == pytest.approx(s1.dimensionless_eigenvalue * G**2 * m**5 / HBAR**2, rel=1e-12)
    assert length_unit(m) == pytest.approx(HBAR**2 / (G * m**3))
    assert energy_unit(2 * m) == pytest.approx(32 * energy_unit(m))


def test_second_order_convergence():
    e = {}
    for n in (500, 1000, 2000):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            e[n] = solve_ground_state(1.0, RadialGrid.for_mass(1.0, 30.0, n), tol=1e-11).dimensionless_eigenvalue
    est = abs(e[1000] - e[500]) / 3     # error of the n=1000 result under h^2 scaling
    assert abs(e[2000] - e[1000]) < 4 * est
    assert abs(e[2000] - SHOOTING_EIGENVALUE) < abs(e[1000] - SHOOTING_EIGENVALUE)


def test_coarse_grid_flagged():
    with pytest.warns(RuntimeWarning):
        s = solve_ground_state(1.0, RadialGrid.for_mass(1.0, 30.0, 300), tol=1e-8)
    assert s.coarse_grid


def test_non_convergence_carries_history():
    with pytest.raises(ConvergenceError) as info:
        solve_ground_state(1.0, RadialGrid.for_mass(1.0, 30.0, 2000), tol=1e-12, max_iter=5)
    assert len(info.value.residual_history) == 5


def test_solver_domain_checks():
    grid = RadialGrid.for_mass(1.0, 30.0, 2000)
    for kwargs in ({"tol": 0.0}, {"tol": 1e-3}, {"mixing": 0.0}):
        with pytest.raises(DomainError):
            solve_ground_state(1.0, grid, **kwargs)
    with pytest.raises(DomainError):
        solve_ground_state(-1.0, grid)


def test_summary_fields(unit_solution):
    assert set(unit_solution.summary()) == {"mass_kg", "energy_eigenvalue_J", "binding_energy_J", "iterations",
                                            "residual", "dimensionless_eigenvalue"}
