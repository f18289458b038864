"""couplelab: a sampling laboratory for unadjusted and exact Hamiltonian
Monte Carlo, one-shot coupling maps, Gaussian divergence oracles, and
bound verification at desk scale."""

from .bounds import (BoundParams, BoundReport, contraction_factor,
                     gaussian_norm_mgf_bound, gradient_complexity,
                     kl_bias_bound, kl_mixing_bound, kl_mixing_iterations,
                     log_harnack_check_1d, mi_contraction_bound,
                     orlicz_mgf_bound, quadratic_root_threshold,
                     renyi_bias_bound, renyi_mixing_bound,
                     renyi_mixing_iterations, wasserstein_props)
from .couplings import (CouplingSolution, CouplingSolveError, LEMMA_IDS,
                        RegularityReport, SamplerConfig,
                        first_order_map_constants, map_jacobian,
                        operator_norm, solve_bias_map, solve_cross_map,
                        solve_mixing_map, verify_regularity)
from .divergences import (DivergenceValue, gaussian_kl, gaussian_renyi,
                          mi_gaussian, mi_gaussian_pairwise,
                          orlicz_coupling_bound, orlicz_norm,
                          perturbed_gaussian_kl_bound,
                          perturbed_gaussian_renyi_bound, tv_kl_r2_demo, w2)
from .flows import (FlowParams, PhasePoint, StabilityFlags, exact_flow,
                    flow, flow_jacobian_v, phase_jacobian,
                    phase_jacobian_det, position_flow,
                    quadratic_flow_coefficients, verlet_flow)
from .gaussians import GaussianLaw, point_law, standard_law
from .experiments import ula_vs_langevin_kl
from .kernels import (EHMC, ULA, UHMC_V, KernelSpec, chain_coefficients,
                      gaussian_chain_law, joint_chain_law, kernel_step,
                      langevin_exact_law, run_chain, stationary_law,
                      synchronous_coupled_step, ula_step_law)
from .potentials import (Potential, hamiltonian, logcosh_potential,
                         quadratic_potential, validate_curvature)
from .rng import RngStream

__version__ = "0.1.0"
