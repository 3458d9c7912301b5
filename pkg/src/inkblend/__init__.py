"""inkblend: synthetic facial-tattoo blending and evaluation toolkit."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    InkblendError,
    InvalidInputError,
    InvalidLandmarksError,
    InvalidPairError,
    InvalidParameterError,
    NoSpaceError,
    TooSmallError,
)
from .imaging import Image, Mask, Rect, crop_inner, gaussian_blur, jpeg_roundtrip  # noqa: F401
from .geometry import (  # noqa: F401
    REGION_IDS,
    ExtendedLandmarks,
    Landmarks68,
    RegionSet,
    TriangleSet,
    build_regions,
    combine_regions,
    extend_forehead,
    fixed_triangulation,
    load_landmarks,
    save_landmarks,
)
from .placement import (  # noqa: F401
    CoverageTarget,
    FixedRegion,
    GenerationStrategy,
    Placement,
    PlacementPlan,
    SingleTattoo,
    TattooTemplate,
    coverage,
    fit_tattoo,
    largest_empty_rect,
    load_catalog,
    parse_strategy,
    plan_placements,
)
from .blending import (  # noqa: F401
    BlendConfig,
    DepthMap,
    adjust_black_ink,
    apply_cutout,
    compose,
    displace_layer,
    displacement,
    landmark_depth_fallback,
    transform_depth,
)
from .quality import QualityReport, SsimConfig, evaluate_removal, mssim, psnr, vif_p  # noqa: F401
from .biometrics import (  # noqa: F401
    BiometricReport,
    ScoreSet,
    eer,
    error_rates,
    euclidean_distance,
    evaluate_scores,
    threshold_at_fmr,
)
from .dataset import (  # noqa: F401
    AugmentRanges,
    DatasetConfig,
    DatasetManifest,
    augment_pair,
    generate_dataset,
    generate_pair,
    validate_manifest,
)
