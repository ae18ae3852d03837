"""Time-domain target speaker extraction with a speaker-conditioned Conv-TasNet.

Everything here is implemented in the C++ core and re-exported. Typical use::

    import tdspkbeam as tb
    tb.build_corpus("corpus", speakers=8, mixtures=16, test_mixtures=4)
    tb.train("corpus/train.tsv", "model.ckpt", max_epochs=2)
    tb.evaluate("model.ckpt", "corpus/test.tsv")["summary"]["avg"]
"""

from ._core import (
    DataError,
    Model,
    NumericError,
    ShapeError,
    TdsbError,
    UsageError,
    build_corpus,
    evaluate,
    gradcheck,
    ipd_features,
    read_wav,
    sisnr_db,
    stft,
    train,
    write_wav,
)

__all__ = [
    "DataError",
    "Model",
    "NumericError",
    "ShapeError",
    "TdsbError",
    "UsageError",
    "build_corpus",
    "evaluate",
    "gradcheck",
    "ipd_features",
    "read_wav",
    "sisnr_db",
    "stft",
    "train",
    "write_wav",
]
