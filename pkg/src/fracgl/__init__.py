"""fracgl: boundary-driven long-range Ginzburg-Landau lattice dynamics.

Exact non-equilibrium steady states, stochastic simulation with Girsanov
tilting, fractional-Laplacian operator calculus with Dirichlet boundary,
hydrodynamic (fractional heat) evolution, and the large-deviations layer:
dynamical rate functional, static rate, and quasi-potential.
"""

from .params import ModelParams, as_grid_function
from .kernel import (kernel_constant, kernel_row, truncation_error_bound,
                     DriftSystem, build_drift_system,
                     discrete_fractional_laplacian, discrete_inner_seminorm,
                     dirichlet_energy)
from .operators import (TestFunction, SmoothBump, PolyBump, SineMode,
                        regional_laplacian_pointwise, continuum_seminorm,
                        SpectralData, dirichlet_spectrum,
                        inverse_dirichlet_apply)
from .ness import (StationaryProfile, solve_stationary_profile,
                   absorbed_walk_oracle, sample_ness, static_cumulant)
from .simulate import (FieldState, ExternalField, Trajectory,
                       euler_stability_limit, step_euler, propagate_exact,
                       simulate_trajectory, euler_ensemble, empirical_pairing,
                       boundary_block_average, martingale_qv_rate,
                       dynkin_diagnostics)
from .hydro import (DeterministicTrajectory, solve_hydrodynamic,
                    weak_residual, relaxation_rate, l2_distance)
from .ldp import (RateReport, rate_from_field, j_functional, static_rate_w,
                  gamma_identity_defect, clever_path, quasipotential)
from .diagnostics import (PolyObservableBasis, generator_matrix_poly2,
                          adjoint_matrix_poly2, adjoint_defect,
                          dirichlet_form_linear)

__version__ = "0.1.0"
