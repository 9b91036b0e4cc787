"""Fairness-aware detection of AI-generated images over frozen encoder
embeddings: residual adapter training with a dynamically re-weighted
per-category loss, plus group-fairness evaluation metrics."""

from .embeddings import (
    EmbeddingFormatError,
    EmbeddingRecord,
    EmbeddingSet,
    SynthConfig,
    read_embedding_set,
    split_set,
    synth_generate,
    validate_set,
    write_embedding_set,
)
from .nn import (
    AdamState,
    AdapterParams,
    HeadParams,
    ModelParams,
    adam_step,
    adapter_forward,
    head_forward,
    init_adapter,
    init_head,
    init_model,
    read_checkpoint,
    softmax_ce,
    write_checkpoint,
)
from .training import (
    VARIANTS,
    DegenerateLambdaError,
    HybridBatch,
    LossState,
    TrainConfig,
    TrainHistory,
    build_hybrid_batch,
    classify_forward,
    classify_loss,
    enhance,
    fair_loss,
    lambda_weight,
    load_history,
    round_category_losses,
    save_history,
    score,
    train,
)
from .metrics import (
    FairnessReport,
    PredictionRecord,
    UndefinedMetricError,
    auc_gap,
    auc_rank,
    evaluate_report,
    f_auc,
    f_fpr,
    fpr,
    predict_set,
    write_category_table,
    write_predictions,
    write_report,
)

__version__ = "0.1.0"
