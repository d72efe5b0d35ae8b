"""dispersia: passivity certification and modal energy-decay simulation
for Maxwell media with dispersive memory kernels."""

from .kernels import (
    GAUSSIAN,
    CertificationFailure,
    ClassKCertificate,
    DampedTerm,
    ExpPolyKernel,
    KernelError,
    NotInClassK,
    SampledKernel,
    certify_class_K,
    debye,
    drude,
    eval_kernel,
    laplace,
    lorentz,
)
from .dispersion import (
    OmegaRational,
    PassivityError,
    PassivityReport,
    analyze,
    check_passivity,
    check_strict_passivity,
    decay_exponent,
    omega_form,
)
from .modal import (
    EnergyTrace,
    HistoryState,
    MediumSpec,
    ModeSystem,
    build_mode,
    cavity_modes,
    dispersion_roots,
    initial_history,
    run_multimode,
    spectral_abscissa,
    step_exact,
    step_history,
)
from .decay import DecayReport, ExpectedDecay, fit_decay, predict

__all__ = [
    "GAUSSIAN",
    "CertificationFailure",
    "ClassKCertificate",
    "DampedTerm",
    "DecayReport",
    "EnergyTrace",
    "ExpPolyKernel",
    "ExpectedDecay",
    "HistoryState",
    "KernelError",
    "MediumSpec",
    "ModeSystem",
    "NotInClassK",
    "OmegaRational",
    "PassivityError",
    "PassivityReport",
    "SampledKernel",
    "analyze",
    "build_mode",
    "cavity_modes",
    "certify_class_K",
    "check_passivity",
    "check_strict_passivity",
    "debye",
    "decay_exponent",
    "dispersion_roots",
    "drude",
    "eval_kernel",
    "fit_decay",
    "initial_history",
    "laplace",
    "lorentz",
    "omega_form",
    "predict",
    "run_multimode",
    "spectral_abscissa",
    "step_exact",
    "step_history",
]
