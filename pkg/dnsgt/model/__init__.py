from .base import ForwardOutput, SequenceModel
from .batch import TokenBatch
from .checkpoint import build_model, load_checkpoint, read_checkpoint, save_checkpoint
from .dns_gt import DnsGtModel


__all__ = (
    "DnsGtModel",
    "ForwardOutput",
    "SequenceModel",
    "TokenBatch",
    "build_model",
    "load_checkpoint",
    "read_checkpoint",
    "save_checkpoint",
)
