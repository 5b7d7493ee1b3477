"""Skip-gram word vectors and PAC-Bayes sentence vectors."""

from ._pbsv import (
    catoni_bound,
    compute_idf,
    gaussian_kl,
    normalize_text,
    pb_idf_l2,
    pb_l2,
    run_cli,
    train_skipgram,
)

__all__ = [
    "catoni_bound",
    "compute_idf",
    "gaussian_kl",
    "normalize_text",
    "pb_idf_l2",
    "pb_l2",
    "run_cli",
    "train_skipgram",
]
