"""Sequential sentence classification toolkit: python surface of the C++ core."""

from ssc._core import (
    Vocab,
    abstract_rouge,
    aggregate,
    bisect_split,
    crf_log_partition,
    crf_nll,
    gelu,
    gen_synthetic,
    gen_synthetic_summ,
    lcs_length,
    micro_f1,
    pack,
    qualify,
    rouge_l,
    rouge_n,
    run,
    sentence_targets,
    softmax,
    tokenize,
    viterbi,
)

__all__ = [
    "Vocab",
    "abstract_rouge",
    "aggregate",
    "bisect_split",
    "crf_log_partition",
    "crf_nll",
    "gelu",
    "gen_synthetic",
    "gen_synthetic_summ",
    "lcs_length",
    "micro_f1",
    "pack",
    "qualify",
    "rouge_l",
    "rouge_n",
    "run",
    "sentence_targets",
    "softmax",
    "tokenize",
    "viterbi",
]
