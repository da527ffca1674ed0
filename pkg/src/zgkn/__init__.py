"""Bound states of a Dirac electron on the zero-gravity Kerr-Newman ring
spacetime, computed by phase-plane shooting for heteroclinic connectors of
two cylinder flows and a coupled fixed-point iteration.
"""

from .eigenmaps import (
    DegenerateTopError,
    NoSignChangeError,
    dE_dlambda,
    dLambda_dE,
    energy_of_lambda,
    lambda_of_E,
)
from .flows import (
    DegenerateEquilibriaError,
    FlowKind,
    FlowParams,
    NullclineReport,
    RangeError,
    Regime,
    classify_nullclines,
    equilibria,
    sample_nullclines,
)
from .model import (
    AdmissibilityReport,
    ModelParams,
    NormalizedParams,
    ParameterError,
    RingSingularityError,
    check_admissibility,
    coupling_bound,
    normalize,
    oblate_to_cylindrical,
    sommerfeld_potential,
    winklmeier_eigenvalue,
)
from .orbits import (
    ConnectorDiagnostics,
    IntegrationError,
    IntegratorControls,
    Orbit,
    integrate_distinguished,
    mismatch,
    mismatch_value,
    signed_area,
    winding_number,
)
from .spectrum import (
    AdmissibilityError,
    ConvergenceError,
    EigenResult,
    SpectrumSummary,
    explore,
    mirror_eigenvalue,
    solve_ground_pair,
    spectrum_summary,
)
from .wavefunction import (
    AngularProfile,
    BispinorSamples,
    NormReport,
    RadialProfile,
    angular_profile,
    assemble_bispinor,
    hilbert_norm,
    radial_profile,
    residuals,
)

__version__ = "0.1.0"
