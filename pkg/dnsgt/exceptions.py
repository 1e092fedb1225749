class DnsGtException(Exception):
    """All exceptions from this library inherit from here"""

    # Process exit code used by the CLI when the exception escapes a subcommand.
    exit_code = 2


class InvalidInputException(DnsGtException, ValueError):
    """Raise when an object is instantiated or a function called with invalid inputs"""

    exit_code = 1


class FileNotFoundException(InvalidInputException, FileNotFoundError):
    """Raise when a required input file cannot be found"""


class BadConfig(InvalidInputException):
    """Raise when a configuration value is out of range or fails schema validation"""


class BadMagic(DnsGtException):
    """Raise when a capture file does not start with a classic pcap magic number"""


class UnsupportedLinkType(BadMagic):
    """Raise when a pcap file uses a link type other than Ethernet"""


class TruncatedHeader(DnsGtException):
    """Raise when a capture file is shorter than the pcap global header"""


class SchemaError(DnsGtException):
    """Raise when a query-log line fails validation (recorded per line by the JSONL parser, not raised)"""


class DegenerateStream(DnsGtException):
    """Raise when a query stream is too short for density clustering (fewer than two timestamps)"""


class EmptyCorpus(DnsGtException):
    """Raise when a vocabulary or model is requested from a corpus without any sequences"""


class SequenceTooLong(DnsGtException):
    """Raise when a sequence holds more queries than the configured capacity"""


class EmptySequence(DnsGtException):
    """Raise when a sequence without any query is tokenized"""


class BadProbabilities(InvalidInputException):
    """Raise when masking probabilities are outside [0, 1] or the corruption split does not sum to one"""


class BadLength(InvalidInputException):
    """Raise when a true sequence length is outside [1, L]"""


class BadPermutation(InvalidInputException):
    """Raise when a permutation is not a bijection of the position indices"""


class ShapeMismatch(DnsGtException, ValueError):
    """Raise when tensor operands have incompatible shapes"""

    exit_code = 3


class NonFiniteDetected(DnsGtException, FloatingPointError):
    """Raise when a tensor operation produces a NaN or infinite value"""

    exit_code = 3


class NotScalar(DnsGtException, ValueError):
    """Raise when backpropagation is started from a tensor that is not a scalar"""

    exit_code = 3


class IdOutOfRange(DnsGtException, IndexError):
    """Raise when a token id falls outside the embedding table it indexes"""


class NoMaskedPositions(DnsGtException):
    """Raise when a masked-language-model loss is requested for a batch without masked positions"""


class NoMaskPresent(InvalidInputException):
    """Raise when masked prediction is requested for a sequence without a MASK token"""


class MissingLabels(DnsGtException):
    """Raise when a fine-tuning forward pass is given a batch without labels"""


class VocabMismatch(DnsGtException):
    """Raise when a checkpoint was trained against a different vocabulary from the one supplied"""


class NonFiniteLoss(DnsGtException, FloatingPointError):
    """Raise when a training loss becomes NaN or infinite"""

    exit_code = 3


class DegenerateLabels(DnsGtException, ValueError):
    """Raise when a binary metric is requested for labels of a single class"""


class MissingDomain(DnsGtException, KeyError):
    """Raise when an embedding is requested for a domain that has none"""


class InvalidCheckpoint(DnsGtException):
    """Raise when a checkpoint container is malformed or its parameters do not match its configuration"""
