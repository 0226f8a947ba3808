"""Demodulated 1QC/2QC fluorescence spectra of two dipole-coupled atoms,
non-perturbative in the pulse area."""

__version__ = "0.1.0"

from .averaging import (
    DopplerModel,
    SphereQuadrature,
    maxwell_boltzmann_sigma,
    orientation_average,
    voigt_convolve,
)
from .hilbert import (
    DetectionOperator,
    DipoleOperators,
    build_dipole_operators,
    detection_operator,
    embed,
)
from .liouville import (
    InteractionTensor,
    PhysicalParams,
    Superoperator,
    interaction_generator,
    interaction_tensor,
    relaxation_generator,
    resolvent_apply,
)
from .pulses import (
    KickHarmonics,
    PulseSpec,
    area_from_gaussian,
    kick_superop_harmonics,
    kick_unitary,
)
from .scattering import (
    ChannelConfig,
    HarmonicLedger,
    apply_selection_rules,
    intensity_images,
    stroboscopic_compose,
)
from .spectra import (
    PeakScan,
    SpectrumResult,
    analytic_peak_amplitude,
    harmonic_coefficients,
    peak_amplitude,
    peak_scan,
    single_config_spectrum,
    spectrum,
    time_domain_spectrum,
    voigt_peak,
)
