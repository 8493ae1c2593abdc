"""Two-qubit polarization state tomography with dark-count correction."""
from ._accel import USE_NUMBA, backend_name
from .estimation import (ALL_SPECS, CountModel, EstimatorSpec, FitConfig, LossKind,
                         ParamVector, TrialEnsemble, TrialResult, average_state,
                         default_bounds, estimate, loss, summarize)
from .linalg import hermitian_eig, kron, mat_trace, sqrt_psd
from .metrics import (concurrence, coincidence_curve, fidelity, fidelity_bell,
                      merit_report, purity, spin_flip)
from .model import (CountSet, NoiseModel, Sampling, apply_dark_mixture, expected_ideal,
                    expected_noisy, simulate_counts)
from .states import (bell_state, cholesky_from_density, density_from_cholesky,
                     maximally_mixed, single_projectors, two_qubit_operators)
from .de import minimize_de

__version__ = "0.1.0"
