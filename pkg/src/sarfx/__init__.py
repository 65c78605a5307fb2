"""sarfx: counter-forensic re-acquisition toolkit for SAR amplitude imagery.

Library layout mirrors the processing chain: raster containers and tiling,
spectral transforms, speckle synthesis, system-response estimation, splice
forgery creation, the attack pipeline itself, and the quality/detection
metric stack. The ``sarfx`` console script exposes each stage.
"""

__version__ = "0.1.0"

from .raster import (
    AmplitudeImage,
    ComplexImage,
    RasterError,
    RasterHeader,
    TamperMask,
    read_raster,
    tile,
    write_mask_pgm,
    write_raster,
)
from .spectral import (
    RadialProfile,
    Spectrum,
    azimuthal_profile,
    central_flip,
    forward_dft,
    inverse_dft,
    smooth_spectrum,
)
from .speckle import (
    DEFAULT_SIGMA_S,
    MODE_FULL,
    MODE_PHASE_ONLY,
    SpeckleField,
    generate_speckle,
    inject_speckle,
)
from .sysid import (
    FitNonConvergenceError,
    GaussianFitParams,
    RaisedCosineFitParams,
    TransferFunction,
    default_smoothing,
    estimate_direct,
    estimate_transfer_function,
    fit_gaussian,
    fit_raised_cosine,
    gaussian_response,
    magnitude_spectrum,
    normalize_energy,
    normalized_cross_correlation,
    raised_cosine_response,
)
from .forgery import (
    EditOp,
    GlobalEditOp,
    SpliceSpec,
    edit_donor,
    global_edit,
    random_splice,
    sample_edit_parameter,
    splice,
    transform_stencil,
)
from .attack import (
    AttackConfig,
    AttackResult,
    apply_system,
    histogram_match,
    register_despeckler,
    run_attack,
    simulate_pristine,
)
from .metrics import (
    DegenerateRegionError,
    FingerprintMap,
    MetricReport,
    auc_roc,
    delta_enl,
    enl,
    evaluate_pair,
    ms_ssim,
    ssim,
)
from .experiment import ExperimentConfig, derive_seed, run_experiment
