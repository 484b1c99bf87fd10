"""Certified spectral solver for the angular oblate spheroidal wave operator.

Eigenvalues and eigenfunctions for real aspherical parameter via complex
Riccati phase shooting, invariant-disk enclosures along the computed
trajectories, uniform eigenvalue-gap diagnostics, and holomorphic
continuation of eigenvalue branches into a complex-parameter strip.
"""

from .errors import (BracketError, ConfigError, ContourError,
                     DegeneratePartitionError, DomainError, HypothesisError,
                     IntegrationError, SeriesTruncationError, SpheroidalError,
                     TruncationNotConvergedError)
from .potential import (ProblemParams, PotentialEval, RegionPartition,
                        SpheroidalPotential, compute_K, compute_L,
                        eval_potential, partition_regions)
from .riccati import (IntegratorOptions, RiccatiState, Trajectory,
                      init_at_singularity, init_wkb, integrate,
                      sensitivity_integral)
from .invariant_disk import (AlphaProfile, DiskEstimate, build_disk,
                             certify_containment, convexity_integral_bound,
                             convexity_lower_bound, pole_enclosure,
                             quantum_enclosure, wkb_enclosure)
from .eigensolver import (EigenvalueRecord, count_nodes, find_eigenvalue,
                          gap_scan, phase_shift, reconstruct_eigenfunction)
from .oracle import OracleMatrix, assemble, oracle_eigenvalues
from .continuation import (ComplexEigenPath, PerturbationSplit, StripSpec,
                           continue_eigenvalue, projector_diagnostics,
                           shooting_function, verify_holomorphy)
from .certification import CertificationReport, certify_branch

__version__ = "0.1.0"

__all__ = [
    "AlphaProfile", "BracketError", "CertificationReport", "ComplexEigenPath",
    "ConfigError", "ContourError", "DegeneratePartitionError", "DiskEstimate",
    "DomainError", "EigenvalueRecord", "HypothesisError", "IntegrationError",
    "IntegratorOptions", "OracleMatrix", "PerturbationSplit", "PotentialEval",
    "ProblemParams", "RegionPartition", "RiccatiState", "SeriesTruncationError",
    "SpheroidalError", "SpheroidalPotential", "StripSpec", "Trajectory",
    "TruncationNotConvergedError", "assemble", "build_disk",
    "certify_branch", "certify_containment", "compute_K", "compute_L",
    "continue_eigenvalue", "convexity_integral_bound",
    "convexity_lower_bound", "count_nodes", "eval_potential",
    "find_eigenvalue", "gap_scan", "init_at_singularity", "init_wkb",
    "integrate", "oracle_eigenvalues", "partition_regions", "phase_shift",
    "pole_enclosure", "projector_diagnostics", "quantum_enclosure",
    "reconstruct_eigenfunction", "sensitivity_integral", "shooting_function",
    "verify_holomorphy", "wkb_enclosure",
]
