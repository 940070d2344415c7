"""Content-introducing dialogue generation.

Replies are produced in two steps: a noun keyword is predicted by summed
pointwise mutual information against the query words, then a pair of GRU
encoder-decoders generates a fluent reply containing that keyword — the
backward generator emits the reply's first half ending at the keyword
(decoded in reverse), the forward generator completes the rest.
"""

from .bf import (
    BackwardExample,
    Bundle,
    KeywordError,
    ReplyResult,
    Seq2BF,
    backward_target,
    generate_backward,
    generate_forward,
    joint_logprob,
    load_bundle,
    make_backward_example,
    reply,
    reply_seq2seq,
    reply_without_keyword,
    write_manifest,
)
from .corpus import (
    BOS,
    EOS,
    PAD,
    UNK,
    Batch,
    ConfigError,
    CorpusFormatError,
    DialoguePair,
    NounLexicon,
    Vocab,
    build_vocab,
    encode_chars,
    load_pairs,
    make_batches,
)
from .metrics import (
    MetricsReport,
    UnigramModel,
    avg_length,
    bleu2_char,
    decomposed_entropy,
    entropy,
)
from .nn import (
    EmbeddingTable,
    GruCell,
    NumericalError,
    RmspropState,
    embedding_sgd_step,
    grad_check,
    gru_step,
    init_params,
    rmsprop_step,
    softmax_xent,
)
from .pmi import (
    CooccurrenceStats,
    KeywordPrediction,
    accumulate_stats,
    merge_stats,
    pmi_score,
    predict_keyword,
    query_pmi,
)
from .seq2seq import (
    DecodeConfig,
    EncoderDecoder,
    Hypothesis,
    TrainConfig,
    TrainResult,
    decode_beam,
    decode_greedy,
    decode_step,
    encode,
    sequence_logprob,
    train,
)

__version__ = "0.1.0"
