"""Parametrically driven, classically forced harmonic oscillator.

Jost solutions of ``xi'' + omega^2(t) xi = 0``, closed forms for the sech^2
drive and its limits, and the resulting Bogolyubov map, displacement and
squeezed coherent state.
"""

__version__ = "0.1.0"

from .errors import (ConfigError, ConvergenceError, DomainError, InconsistencyError,
                     OutOfRangeError, ParamDriveError, PreconditionError)
from .profiles import (MINUS, PLUS, ForceProfile, FrequencyProfile, TimeGrid, default_grid,
                       force_fourier, force_value, omega_squared)
from .kernels import BACKEND
from .jost import (JostSolution, classical_trajectory, impulse_response, scattering_flux_defect,
                   solve_jost, solve_jost_adaptive, solve_jost_reversed)
from .special import gamma, hyp2f1, loggamma, rgamma
from .exact import SechParams, exact_coefficients, exact_jost_solution, exact_xi
from .approx import (AdiabaticParams, abrupt_coefficients, abrupt_displacement, abrupt_xi,
                     adiabatic_B, adiabatic_displacement, adiabatic_xi, born_coefficients,
                     born_displacement, born_xi, response_function)
from .quantum import (LadderMap, OscillatorState, bogolyubov_from_scattering, displacement,
                      displacement_sweep, early_force_displacement, ladder_map,
                      late_force_displacement, occupation_coherent, occupation_fock,
                      occupation_vacuum, state_from_map)
from .multimode import (MultimodeJost, MultimodeSystem, SechPulse, multimode_evolution,
                        multimode_green, solve_multimode_jost, unitarity_defect)
