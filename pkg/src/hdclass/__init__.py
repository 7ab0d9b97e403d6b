"""Generalized distance based classifiers for high-dimension, low-sample-size data."""

from .classifiers import (
    AvgVariant,
    Dataset,
    Family,
    FittedModel,
    NnVariant,
    classify_avg_family,
    classify_nn_family,
    fit,
    gsavg_discriminant,
    madd_dissimilarity,
    predict_avg_family,
    predict_nn_family,
    within_class_average,
)
from .clustering import (
    CorrelationMethod,
    CutSelection,
    DEFAULT_P_GRID,
    Dendrogram,
    average_linkage,
    correlation_dissimilarity,
    cut_at_height,
    partition_at_percentile,
    percentile_height,
    select_p_by_loocv,
)
from .dissimilarity import (
    BlockPartition,
    DissimilaritySpec,
    Gamma,
    Phi,
    gamma_eval,
    h_blocked,
    h_componentwise,
    pairwise_blocked,
    pairwise_componentwise,
)
from .harness import (
    Blocking,
    Cell,
    ConfigError,
    EvalReport,
    ExperimentConfig,
    IngestError,
    emit_report,
    read_labeled_csv,
    report_from_json,
    run_experiment,
    stratified_split,
)
from .populations import (
    BayesRiskEstimate,
    Example,
    ExampleSpec,
    SeparabilityEstimate,
    average_variance,
    default_train_sizes,
    estimate_bayes_risk,
    estimate_separability,
    generate,
    log_density,
    true_partition,
)

__version__ = "0.1.0"
