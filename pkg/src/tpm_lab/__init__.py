"""Exact and Monte Carlo verification of exponential averages in
two-point-measurement experiments on finite-dimensional quantum systems.

The identity under test: the exponentiated negative single-trial mutual
information of the outcome pair averages to one, ⟨e^{−I}⟩ = 1, by
conservation of probability alone. With Gibbs initial states and energy
measurements it specializes to the Jarzynski equality
⟨e^{−βW}⟩ = Z'/Z. Both are checked exactly by enumeration
(:mod:`tpm_lab.tpm`) and statistically by sampling
(:mod:`tpm_lab.sampler`); :mod:`tpm_lab.cli` runs declarative JSON
scenarios from the command line.
"""

from .errors import ConfigError, ValidationError
from .linalg import (
    EigenDecomposition,
    func_of_hermitian,
    haar_random_unitary,
    hermitian_eig,
    kron,
    random_hermitian,
)
from .quantum import (
    DensityMatrix,
    GibbsEnsemble,
    KrausChannel,
    ProjectorFamily,
    apply_channel,
    channel_from_unitary,
    eigen_measurement,
    gibbs_ensemble,
    maximally_mixed,
    random_density_matrix,
    standard_channel,
    unitary_from_hamiltonian,
)
from .sampler import (
    EstimatorReport,
    TrajectorySample,
    estimate_exponential_average,
    sample_trajectories,
)
from .scenarios import (
    BuiltScenario,
    ScenarioConfig,
    build_scenario,
    derive_seed,
    load_scenario,
    scenario_from_dict,
)
from .tpm import (
    JointDistribution,
    MutualInformationTable,
    TpmExperiment,
    WorkStatistics,
    compare_mi_to_dissipation,
    distribution_from_joint,
    exp_average_with_reference,
    joint_distribution,
    mutual_information_table,
    work_statistics,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ValidationError",
    "EigenDecomposition",
    "hermitian_eig",
    "func_of_hermitian",
    "haar_random_unitary",
    "random_hermitian",
    "kron",
    "DensityMatrix",
    "ProjectorFamily",
    "KrausChannel",
    "GibbsEnsemble",
    "gibbs_ensemble",
    "eigen_measurement",
    "channel_from_unitary",
    "unitary_from_hamiltonian",
    "standard_channel",
    "apply_channel",
    "maximally_mixed",
    "random_density_matrix",
    "TpmExperiment",
    "JointDistribution",
    "MutualInformationTable",
    "WorkStatistics",
    "joint_distribution",
    "distribution_from_joint",
    "mutual_information_table",
    "exp_average_with_reference",
    "work_statistics",
    "compare_mi_to_dissipation",
    "TrajectorySample",
    "EstimatorReport",
    "sample_trajectories",
    "estimate_exponential_average",
    "ScenarioConfig",
    "BuiltScenario",
    "load_scenario",
    "scenario_from_dict",
    "build_scenario",
    "derive_seed",
    "__version__",
]
