"""Simulation and analysis tools for a four-wave-mixing twin-beam squeezed-light source."""

from .errors import ConfigError, DomainError, FitError, LeakageError, ScanFormatError
from .medium import (
    C,
    ComplexIndexSample,
    MediumModel,
    SourceConfig,
    SpectralLine,
    complex_index,
    conjugate_frequency,
    group_index,
    index_shift,
    intensity_transmission,
    load_medium,
    rb85_preset,
)
from .pulse import Pulse, PropagationReport, gaussian_pulse, measure, propagate, scan_pulse_widths, transfer_function
from .scan import (
    FitResult,
    GroupIndexProfile,
    ScanData,
    emit_scan,
    fit_lines,
    group_index_profile,
    kramers_kronig,
    load_scan,
)
from .twin_beam import (
    AmplifierParams,
    ChannelLosses,
    NoiseSpectrum,
    TwinBeamState,
    amplify,
    apply_losses,
    delay_from_media,
    difference_noise_db,
    squeezing_spectrum,
)

__version__ = "0.1.0"
