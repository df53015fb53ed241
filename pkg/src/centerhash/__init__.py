"""centerhash: well-separated binary hash centers, a small trained hash
function over feature vectors, and Hamming-space retrieval evaluation."""

from .centers import (
    CenterMethod,
    CenterSet,
    SemanticCenterMap,
    ValidityReport,
    assign_multi_label,
    assign_single_label,
    generate_centers,
    generate_centers_balanced,
    generate_centers_bernoulli,
    hadamard_matrix,
    load_centers,
    save_centers,
    validate_centers,
)
from .config import RunConfig, load_run_config
from .data_io import Dataset, load_dataset, load_features, load_labels, save_features, save_labels
from .hamming import PackedCode, binarize, hamming_distance, load_codes, save_codes, unpack
from .model import (
    EpochLog,
    HashModel,
    TrainConfig,
    backward,
    central_loss,
    encode,
    forward,
    load_model,
    quantization_loss,
    save_model,
    total_loss,
    train,
)
from .pipeline import PipelineResult, run_pipeline
from .retrieval import (
    CodeIndex,
    EvalReport,
    average_precision_at_n,
    center_distance_matrix,
    evaluate,
    mean_average_precision,
    pr_curve,
    precision_at_n_curve,
    precision_within_radius,
    rank_by_distance,
    relevant,
    write_report,
)
from .synthetic import make_synthetic_blobs

__version__ = "0.1.0"
