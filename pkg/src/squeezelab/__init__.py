"""squeezelab: squeezing-based quantum metrology on finite Hilbert spaces."""

__version__ = "0.1.0"

from .errors import (DegenerateProbeError, DimensionError, EstimateRangeError,
                     HermiticityError, InfeasibleError, NoEigenstateError,
                     RegimeError, SqueezelabError, TruncationError,
                     UnusableProbeError)
from .hilbert import (HilbertSpec, MomentReport, Operator, StateVector,
                      basis_state, build_fock_operator, build_spin_operator,
                      anticommutator, check_sgur, commutator, make_operator,
                      moment_report, operator_from_dict, operator_to_dict,
                      scaled, state_from_dict, state_to_dict, state_vector,
                      vacuum_state)
from .intelligent import (BogoliubovPair, IntelligentState, SqueezingParameter,
                          bogoliubov_from_lambda, default_lambda_grid,
                          displaced_squeezed_state, solve_intelligent_states,
                          spin_squeezed_search, su2_coherent_state,
                          suggested_fock_dim)
from .estimation import (EstimationRun, ResponseCurve, analytic_delta_phi,
                         derivative_identity_check, estimate_phi, evolve,
                         response_curve, run_estimation, sample_outcomes)
from .resources import (BoundConstants, GainReport, StrategyProfile,
                        classify_strategy, gain_report, ground_energy,
                        heisenberg_lower_bound, probe_count)
from .scenarios import (ScenarioConfig, ScenarioResult, design_protocol,
                        fit_loglog, run_position, run_quadrature_phase,
                        run_scenario, run_sg_phase, run_spin, run_sweep)
