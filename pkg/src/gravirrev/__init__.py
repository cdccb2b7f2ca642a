"""Numerical laboratory for gravity-related decoherence and Schroedinger-Newton solitons."""
from .constants import CODATA2018, PhysConstants, bekenstein_entropy, de_broglie_wavelength, planck_regime_report
from .dephasing import (DeltaDistribution, EnergySpectrum, analytic_averaged_density, ensemble_density,
                        ensemble_series, phase_evolve)
from .errors import (ContractError, ConvergenceError, DegenerateConfigurationError, DomainError,
                     GravirrevError, InvariantError, NumericalError, ValidationError)
from .kernel import (Kernel, MassConfiguration, NoiseTrajectory, build_custom_kernel, build_newton_kernel,
                     sample_noise)
from .master_eq import (EvolutionResult, OpenSystem, SuperscatteringMap, cat_decay_rate, cat_system,
                        dissipator, evolve, fit_decay_rate, heating_rate, lattice_particle_system,
                        pointer_decay_rates, superscattering_map, unravel, unraveled_evolve)
from .qstate import DensityMatrix, HermitianOperator, StateVector, projector, purity
from .sn_solver import RadialGrid, SolitonSolution, shooting_eigenvalue, sn_potential, solve_ground_state

__version__ = "0.1.0"
