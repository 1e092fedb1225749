from .masking import MaskingOutcome, apply_mlm_mask
from .tokens import TokenSequence, tokenize, tokenize_corpus
from .vocabulary import Vocabulary, build_vocab


__all__ = (
    "MaskingOutcome",
    "TokenSequence",
    "Vocabulary",
    "apply_mlm_mask",
    "build_vocab",
    "tokenize",
    "tokenize_corpus",
)
