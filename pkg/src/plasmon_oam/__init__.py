"""Plasmon-assisted transmission of OAM-entangled photon pairs.

Qutrit pair states, fork-hologram mode detectors, mode-dependent loss
through a perforated metal film, and the coincidence experiments used to
certify entanglement.
"""

__version__ = "0.1.0"

from .channel import (
    FilterDesign,
    LossChannel,
    apply_channel,
    apply_channel_mixed,
    bethe_baseline,
    design_concentration_filter,
    paper_channel,
)
from .errors import (
    BoundaryMinimumError,
    ConfigError,
    DegenerateCurveError,
    DimensionMismatchError,
    DomainError,
    UnreachableError,
    ZeroNormError,
)
from .experiment import (
    CoincidenceMatrix,
    RunConfig,
    ScanCurve,
    ScanSetup,
    calibrate_noise,
    coincidence_prob,
    find_dip,
    mode_matrix,
    sample_counts,
    scan_dip,
    visibility,
)
from .optics import (
    DetectionProjector,
    HologramSpec,
    LGMode,
    displaced_projector,
    hologram_shift,
    lg_field,
    projector_from_coefficients,
    pure_projector,
)
from .states import (
    BipartitePureState,
    DensityOperator,
    EntanglementReport,
    ModeSpectrum,
    make_paper_state,
    maximally_entangled,
    mix_with_white_noise,
    normalize,
    schmidt_decompose,
)
