"""Combustor health monitoring from exhaust thermocouple-ring profiles.

The package covers the whole experiment loop: simulate ring-of-thermocouple
data with injected combustion faults, learn a compact profile representation
with a stacked denoising autoencoder, classify health with a weighted extreme
learning machine, and compare learned against hand-crafted features by
repeated stratified cross-validation with ROC analysis.
"""

from .dae import (
    Corruption,
    DaeConfig,
    DaeParams,
    DaeTrainResult,
    corrupt,
    decode,
    encode,
    gradients,
    mean_clean_loss,
    reconstruction_loss,
    train_dae,
)
from .elm import (
    ElmModel,
    class_weights,
    fit_elm,
    fit_output_weights,
    hidden_matrix,
    init_elm,
    score,
)
from .evaluation import (
    CvEntry,
    CvReport,
    RocCurve,
    auc,
    repeated_stratified_cv,
    roc,
    tpr_at_fpr,
)
from .features_hand import (
    HAND_FEATURE_NAMES,
    circular_windows,
    compute_hand_features,
    hand_feature_matrix,
    zero_crossings,
)
from .pipeline import (
    ModelBundle,
    PipelineConfig,
    RescaleStats,
    load_model,
    preprocess,
    save_model,
    score_records,
    train_bundle,
)
from ._rng import derive_seed, make_rng
from .profiles import (
    Dataset,
    TcRecord,
    filter_records,
    load_csv,
    mean_normalize,
    save_csv,
)
from .sdae import SdaeModel, extract, train_sdae
from .simdata import (
    DEFAULT_FAULTS,
    FaultDistribution,
    FaultSpec,
    SimConfig,
    gen_dataset,
    gen_normal,
    inject_fault,
)

__version__ = "0.1.0"

__all__ = [
    "Corruption", "DaeConfig", "DaeParams", "DaeTrainResult", "corrupt",
    "decode", "encode", "gradients", "mean_clean_loss", "reconstruction_loss",
    "train_dae",
    "ElmModel", "class_weights", "fit_elm", "fit_output_weights",
    "hidden_matrix", "init_elm", "score",
    "CvEntry", "CvReport", "RocCurve", "auc", "repeated_stratified_cv",
    "roc", "tpr_at_fpr",
    "HAND_FEATURE_NAMES", "circular_windows", "compute_hand_features",
    "hand_feature_matrix", "zero_crossings",
    "ModelBundle", "PipelineConfig", "RescaleStats", "load_model",
    "preprocess", "save_model", "score_records", "train_bundle",
    "derive_seed", "make_rng",
    "Dataset", "TcRecord", "filter_records", "load_csv", "mean_normalize",
    "save_csv",
    "SdaeModel", "extract", "train_sdae",
    "DEFAULT_FAULTS", "FaultDistribution", "FaultSpec", "SimConfig",
    "gen_dataset", "gen_normal", "inject_fault",
    "__version__",
]
