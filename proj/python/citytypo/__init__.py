"""City typology prediction from encyclopedia text.

Thin Python layer over the C++ core: sentence similarity, keyline
max-pooling features, logistic training, ranking metrics and the Via
contingency ratio.
"""

from citytypo._core import (
    FixtureEncoder,
    bayes_ratio,
    classification_scores,
    cosine_similarity,
    default_anchor_text,
    extract_infobox_numerics,
    extract_sentences,
    gmean_threshold,
    keyline_feature,
    predict_proba,
    roc_auc,
    similarity_matrix,
    train_logistic,
)

__all__ = [
    "FixtureEncoder",
    "bayes_ratio",
    "classification_scores",
    "cosine_similarity",
    "default_anchor_text",
    "extract_infobox_numerics",
    "extract_sentences",
    "gmean_threshold",
    "keyline_feature",
    "predict_proba",
    "roc_auc",
    "similarity_matrix",
    "train_logistic",
]
