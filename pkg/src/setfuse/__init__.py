"""Image-set classification with fused Riemannian kernels.

The pipeline: each labeled image set becomes three descriptors (regularized
covariance, dominant subspace, embedded Gaussian); three matching kernels
turn a gallery into Gram matrices; training learns a discriminative
projection of Gram columns together with softmax gating weights over the
kernels; classification is gated nearest neighbor in the projected space.
"""

from .classify import Prediction, distance_profile, predict, set_distance
from .config import DESCRIPTOR_NAMES, TrainConfig
from .data import (
    DatasetManifest,
    ManifestEntry,
    generate_synthetic,
    load_dataset,
    load_manifest,
    save_dataset,
)
from .descriptors import (
    DescriptorTriple,
    GaussianDescriptor,
    GrassmannPoint,
    ImageSet,
    covariance_descriptor,
    embed_gaussian,
    encode_set,
    gaussian_descriptor,
    sample_mean,
    subspace_descriptor,
)
from .experiment import (
    ExperimentReport,
    SplitResult,
    encode_gallery,
    run_dimension_sweep,
    run_experiment,
    split_sets,
    train_on_sets,
)
from .gating import (
    GatingParams,
    gating_gradients,
    gating_weights,
    gradient_ascent_step,
    init_gating_params,
    pair_counts,
)
from .kernels import (
    ALL_KERNELS,
    KernelBank,
    KernelId,
    build_kernel_bank,
    cross_kernel_vector,
    gaussian_embedding_kernel,
    gram_matrix,
    log_euclidean_kernel,
    projection_kernel,
)
from .persistence import load_model, save_model
from .spd import (
    EigenPair,
    is_spd,
    regularize_spd,
    spd_exp,
    spd_log,
    sym_eig,
)
from .trainer import (
    ModelState,
    ScatterPair,
    TraceRatioResult,
    remove_null_space,
    scatter_matrices,
    solve_trace_ratio,
    trace_ratio_objective,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_KERNELS",
    "DESCRIPTOR_NAMES",
    "DatasetManifest",
    "DescriptorTriple",
    "EigenPair",
    "ExperimentReport",
    "GatingParams",
    "GaussianDescriptor",
    "GrassmannPoint",
    "ImageSet",
    "KernelBank",
    "KernelId",
    "ManifestEntry",
    "ModelState",
    "Prediction",
    "ScatterPair",
    "SplitResult",
    "TraceRatioResult",
    "TrainConfig",
    "build_kernel_bank",
    "covariance_descriptor",
    "cross_kernel_vector",
    "distance_profile",
    "embed_gaussian",
    "encode_gallery",
    "encode_set",
    "gaussian_descriptor",
    "gaussian_embedding_kernel",
    "gating_gradients",
    "gating_weights",
    "generate_synthetic",
    "gradient_ascent_step",
    "gram_matrix",
    "init_gating_params",
    "is_spd",
    "load_dataset",
    "load_manifest",
    "load_model",
    "log_euclidean_kernel",
    "pair_counts",
    "predict",
    "projection_kernel",
    "regularize_spd",
    "remove_null_space",
    "run_dimension_sweep",
    "run_experiment",
    "sample_mean",
    "save_dataset",
    "save_model",
    "scatter_matrices",
    "set_distance",
    "solve_trace_ratio",
    "spd_exp",
    "spd_log",
    "split_sets",
    "subspace_descriptor",
    "sym_eig",
    "trace_ratio_objective",
    "train",
    "train_on_sets",
]
