import json
import logging
import os

import yaml

import twined.exceptions
from dnsgt.definitions import DEFAULT_MASK_PROBABILITY, DEFAULT_MASK_SPLIT
from dnsgt.exceptions import BadConfig, FileNotFoundException
from dnsgt.mixins import Serialisable
from twined import Twine


logger = logging.getLogger(__name__)

TWINE_PATH = os.path.join(os.path.dirname(__file__), "schema", "twine.json")

SEQUENCING_STRATEGIES = ("fixed", "time", "density")
ARCHITECTURES = ("dnsgt", "cbow", "skipgram")

PRESETS = {
    "tiny": {
        "N": 32,
        "L": 8,
        "blocks": 2,
        "heads": 2,
        "max_domains": 50,
        "batch_size": 32,
        "lr": 3e-3,
        "max_steps": 500,
        "eval_every": 100,
        "log_every": 50,
    },
    "paper": {
        "N": 256,
        "L": 32,
        "blocks": 8,
        "heads": 8,
        "max_domains": 30000,
        "batch_size": 256,
        "lr": 1e-4,
        "max_steps": 1000000,
        "eval_every": 10000,
        "log_every": 1000,
    },
}


class ModelConfig(Serialisable):
    """The architecture of a DNS-GT model or of a Word2Vec baseline.

    :param int N: embedding dimension
    :param int L: sequence capacity
    :param int blocks: number of graph-attention blocks
    :param int heads: number of attention heads per block (must divide `N`)
    :param float omega: weight of the domain embedding in the host/domain merge
    :param float dropout_embed: dropout rate applied after the embedding merge
    :param float dropout_finetune: dropout rate applied before a fine-tuning head
    :param float batch_norm_momentum: weight kept by the running batch-norm statistics at each update
    :param iter(str) topology: names of registered topologies gating the attention
    :param bool attention: if `False`, the attention output is forced to zero (only the residual path remains)
    :param str architecture: one of "dnsgt", "cbow" or "skipgram"
    :param int|None bandwidth: Word2Vec context bandwidth `r`; `None` means `L`
    :param int|None n_domains: domain vocabulary size including the special tokens
    :param int|None n_hosts: host vocabulary size including the special token
    :return None:
    """

    _SERIALISE_FIELDS = (
        "N",
        "L",
        "blocks",
        "heads",
        "omega",
        "dropout_embed",
        "dropout_finetune",
        "batch_norm_momentum",
        "topology",
        "attention",
        "architecture",
        "bandwidth",
        "n_domains",
        "n_hosts",
    )

    def __init__(
        self,
        N=256,
        L=32,
        blocks=8,
        heads=8,
        omega=1.0,
        dropout_embed=0.15,
        dropout_finetune=0.2,
        batch_norm_momentum=0.9,
        topology=("pad_full",),
        attention=True,
        architecture="dnsgt",
        bandwidth=None,
        n_domains=None,
        n_hosts=None,
    ):
        self.N = int(N)
        self.L = int(L)
        self.blocks = int(blocks)
        self.heads = int(heads)
        self.omega = float(omega)
        self.dropout_embed = float(dropout_embed)
        self.dropout_finetune = float(dropout_finetune)
        self.batch_norm_momentum = float(batch_norm_momentum)
        self.topology = tuple(topology)
        self.attention = bool(attention)
        self.architecture = architecture
        self.bandwidth = bandwidth if bandwidth is None else int(bandwidth)
        self.n_domains = n_domains if n_domains is None else int(n_domains)
        self.n_hosts = n_hosts if n_hosts is None else int(n_hosts)
        super().__init__()
        self._validate()

    @property
    def head_dimension(self):
        """Get the width of a single attention head.

        :return int:
        """
        return self.N // self.heads

    @property
    def context_bandwidth(self):
        """Get the Word2Vec context bandwidth, defaulting to the sequence capacity.

        :return int:
        """
        return self.L if self.bandwidth is None else self.bandwidth

    def with_vocabulary(self, n_domains, n_hosts):
        """Get a copy of the configuration sized for the given vocabulary.

        :param int n_domains:
        :param int n_hosts:
        :return ModelConfig:
        """
        primitive = self.to_primitive()
        primitive.update(n_domains=n_domains, n_hosts=n_hosts)
        return ModelConfig(**primitive)

    def _validate(self):
        if self.N < 1 or self.L < 1 or self.blocks < 0 or self.heads < 1:
            raise BadConfig(f"Model dimensions must be positive; received N={self.N}, L={self.L}, heads={self.heads}.")

        if self.N % self.heads != 0:
            raise BadConfig(f"The embedding dimension N={self.N} must be divisible by the {self.heads} heads.")

        if not 0 <= self.omega <= 1:
            raise BadConfig(f"omega must be in [0, 1]; received {self.omega}.")

        for name in ("dropout_embed", "dropout_finetune"):
            if not 0 <= getattr(self, name) < 1:
                raise BadConfig(f"{name} must be in [0, 1); received {getattr(self, name)}.")

        if not self.topology:
            raise BadConfig("At least one topology must be named.")

        if self.architecture not in ARCHITECTURES:
            raise BadConfig(f"architecture must be one of {ARCHITECTURES!r}; received {self.architecture!r}.")

        if self.bandwidth is not None and self.bandwidth < 1:
            raise BadConfig(f"The context bandwidth must be at least 1; received {self.bandwidth}.")


class TrainConfig(Serialisable):
    """Optimisation, masking and data-splitting settings shared by pre-training and fine-tuning.

    :param float lr: Adam learning rate
    :param int batch_size:
    :param int max_steps:
    :param int seed: seed of the run's random generator
    :param float beta1:
    :param float beta2:
    :param float eps:
    :param int eval_every: checkpoint (and evaluation) period in steps
    :param int log_every: loss logging period in steps
    :param float|None clip_grad_norm: if given, clip the global gradient norm to this value
    :param str|None checkpoint_path: where periodic checkpoints are written
    :param float mask_probability: probability of selecting an eligible position for masking
    :param iter(float) mask_split: probabilities of replacing a selected position with MASK, a random domain, or itself
    :param int max_domains: number of real domains kept in the vocabulary
    :param int folds: number of domain folds for cross-validation
    :param int|None active_fold: the held-out fold used while fine-tuning a binary head
    :param float split_fraction: fraction of the time range assigned to the training side of the temporal split
    :param bool freeze_embeddings: if `True`, embedding tables are not updated during fine-tuning
    :return None:
    """

    _SERIALISE_FIELDS = (
        "lr",
        "batch_size",
        "max_steps",
        "seed",
        "beta1",
        "beta2",
        "eps",
        "eval_every",
        "log_every",
        "clip_grad_norm",
        "checkpoint_path",
        "mask_probability",
        "mask_split",
        "max_domains",
        "folds",
        "active_fold",
        "split_fraction",
        "freeze_embeddings",
    )

    def __init__(
        self,
        lr=1e-4,
        batch_size=256,
        max_steps=1000,
        seed=0,
        beta1=0.9,
        beta2=0.999,
        eps=1e-8,
        eval_every=100,
        log_every=10,
        clip_grad_norm=None,
        checkpoint_path=None,
        mask_probability=DEFAULT_MASK_PROBABILITY,
        mask_split=DEFAULT_MASK_SPLIT,
        max_domains=30000,
        folds=5,
        active_fold=None,
        split_fraction=0.7,
        freeze_embeddings=False,
    ):
        self.lr = float(lr)
        self.batch_size = int(batch_size)
        self.max_steps = int(max_steps)
        self.seed = int(seed)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.eval_every = int(eval_every)
        self.log_every = int(log_every)
        self.clip_grad_norm = clip_grad_norm if clip_grad_norm is None else float(clip_grad_norm)
        self.checkpoint_path = checkpoint_path
        self.mask_probability = float(mask_probability)
        self.mask_split = tuple(float(probability) for probability in mask_split)
        self.max_domains = int(max_domains)
        self.folds = int(folds)
        self.active_fold = active_fold if active_fold is None else int(active_fold)
        self.split_fraction = float(split_fraction)
        self.freeze_embeddings = bool(freeze_embeddings)
        super().__init__()
        self._validate()

    def _validate(self):
        if self.lr < 0:
            raise BadConfig(f"The learning rate must not be negative; received {self.lr}.")

        if self.batch_size < 1:
            raise BadConfig(f"The batch size must be at least 1; received {self.batch_size}.")

        if self.folds < 2:
            raise BadConfig(f"At least two folds are needed; received {self.folds}.")

        if self.active_fold is not None and not 0 <= self.active_fold < self.folds:
            raise BadConfig(f"The active fold must be in [0, {self.folds}); received {self.active_fold}.")

        if not 0 < self.split_fraction < 1:
            raise BadConfig(f"The split fraction must be in (0, 1); received {self.split_fraction}.")

        if self.eval_every < 1 or self.log_every < 1:
            raise BadConfig("eval_every and log_every must be at least 1.")


class SequencingConfig(Serialisable):
    """Settings of the three sequencing strategies. The time deltas are in seconds.

    :param str strategy: one of "fixed", "time" or "density"
    :param int L: maximum sequence length
    :param int|None stride: window stride of the fixed strategy; `None` means `L`
    :param float delta_intra: maximum gap to the previous query (greedy strategy)
    :param float delta_base: maximum span from the first query of a sequence (greedy strategy)
    :param float delta_inter: gap under which a query joins even after `delta_base` has elapsed (greedy strategy)
    :param int min_pts: DBSCAN density threshold (density strategy)
    :return None:
    """

    _SERIALISE_FIELDS = ("strategy", "L", "stride", "delta_intra", "delta_base", "delta_inter", "min_pts")

    def __init__(
        self,
        strategy="density",
        L=32,
        stride=None,
        delta_intra=30.0,
        delta_base=300.0,
        delta_inter=2.0,
        min_pts=1,
    ):
        self.strategy = strategy
        self.L = int(L)
        self.stride = self.L if stride is None else int(stride)
        self.delta_intra = float(delta_intra)
        self.delta_base = float(delta_base)
        self.delta_inter = float(delta_inter)
        self.min_pts = int(min_pts)
        super().__init__()
        self._validate()

    def _validate(self):
        if self.strategy not in SEQUENCING_STRATEGIES:
            raise BadConfig(f"strategy must be one of {SEQUENCING_STRATEGIES!r}; received {self.strategy!r}.")

        if self.L < 1 or self.stride < 1 or self.min_pts < 1:
            raise BadConfig("L, stride and min_pts must all be at least 1.")

        if min(self.delta_intra, self.delta_base, self.delta_inter) <= 0:
            raise BadConfig("The sequencing time deltas must be positive.")


class RunConfiguration:
    """The model, training and sequencing configurations of a run, loaded from a flat key-value document.

    :param ModelConfig model:
    :param TrainConfig train:
    :param SequencingConfig sequencing:
    :param dict|None extra: recognised keys that configure no object (e.g. input paths)
    :return None:
    """

    def __init__(self, model, train, sequencing, extra=None):
        self.model = model
        self.train = train
        self.sequencing = sequencing
        self.extra = extra or {}

    @classmethod
    def from_flat(cls, values):
        """Build the configurations from a flat dictionary, routing each key to the configuration that declares it.

        :param dict values:
        :return RunConfiguration:
        """
        values = dict(values)
        preset = values.pop("preset", None)

        model_values = {key: values.pop(key) for key in ModelConfig._SERIALISE_FIELDS if key in values}
        train_values = {key: values.pop(key) for key in TrainConfig._SERIALISE_FIELDS if key in values}
        sequencing_values = {key: values.pop(key) for key in SequencingConfig._SERIALISE_FIELDS if key in values}

        if "L" in model_values:
            sequencing_values.setdefault("L", model_values["L"])

        if preset is not None:
            values["preset"] = preset

        return cls(
            model=ModelConfig(**model_values),
            train=TrainConfig(**train_values),
            sequencing=SequencingConfig(**sequencing_values),
            extra=values,
        )

    def to_flat(self):
        """Convert the configurations back to a single flat dictionary.

        :return dict:
        """
        flat = dict(self.extra)
        flat.update(self.sequencing.to_primitive())
        flat.update(self.train.to_primitive())
        flat.update(self.model.to_primitive())
        flat.pop("n_domains", None)
        flat.pop("n_hosts", None)
        return flat

    def to_primitive(self):
        return {
            "model": self.model.to_primitive(),
            "train": self.train.to_primitive(),
            "sequencing": self.sequencing.to_primitive(),
            "extra": self.extra,
        }


def read_configuration_file(path):
    """Read a flat configuration document from a JSON or YAML file.

    :param str path:
    :raise dnsgt.exceptions.FileNotFoundException: if the file doesn't exist
    :raise dnsgt.exceptions.BadConfig: if the file isn't a key-value document
    :return dict:
    """
    if not os.path.isfile(path):
        raise FileNotFoundException(f"No configuration file at {path!r}.")

    with open(path) as f:
        if path.endswith((".yaml", ".yml")):
            values = yaml.load(f, Loader=yaml.SafeLoader)
        else:
            try:
                values = json.load(f)
            except json.JSONDecodeError as error:
                raise BadConfig(f"The configuration file {path!r} is not valid JSON: {error}.")

    if not isinstance(values, dict):
        raise BadConfig(f"The configuration file {path!r} must contain a key-value document.")

    logger.info("Configuration loaded from %r.", os.path.abspath(path))
    return values


def validate_configuration_values(values):
    """Validate flat configuration values against the configuration schema.

    :param dict values:
    :raise dnsgt.exceptions.BadConfig: if the values fail validation
    :return dict:
    """
    twine = Twine(source=TWINE_PATH)

    try:
        twine.validate_configuration_values(source=_json_compatible(values))
    except twined.exceptions.InvalidValuesContents as error:
        raise BadConfig(f"Invalid configuration values: {error}")

    return values


def load_run_configuration(path=None, preset=None, overrides=None):
    """Load a run configuration. Values are layered: the named preset first, then the configuration file, then the
    overrides (typically CLI flags; `None` values are ignored).

    :param str|None path: path to a JSON or YAML configuration file
    :param str|None preset: "tiny" or "paper"; if `None`, the file's own "preset" key is used if present
    :param dict|None overrides:
    :return RunConfiguration:
    """
    file_values = {}

    if path is not None:
        file_values = validate_configuration_values(read_configuration_file(path))

    preset = preset or file_values.get("preset")
    values = {}

    if preset is not None:
        if preset not in PRESETS:
            raise BadConfig(f"Unknown preset {preset!r}; available presets are {sorted(PRESETS)!r}.")
        values.update(PRESETS[preset], preset=preset)

    values.update(file_values)
    values.update({key: value for key, value in (overrides or {}).items() if value is not None})
    validate_configuration_values(values)
    return RunConfiguration.from_flat(values)


def _json_compatible(values):
    return {key: list(value) if isinstance(value, tuple) else value for key, value in values.items()}
