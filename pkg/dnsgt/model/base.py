import collections
import logging

import numpy as np
from scipy import special

from dnsgt.definitions import FIRST_REAL_DOMAIN_ID, MASK_ID
from dnsgt.exceptions import BadConfig, InvalidCheckpoint, MissingLabels, NoMaskPresent
from dnsgt.model.batch import TokenBatch
from dnsgt.tensor import Parameter, functional as F


logger = logging.getLogger(__name__)

TASKS = ("mlm", "binary", "hostclass")
EMBEDDING_STD = 0.02
HEAD_STD = 0.02


class ForwardOutput:
    """The result of a forward pass.

    :param dnsgt.tensor.Tensor token_states: (B, L, N) final token representations
    :param dnsgt.tensor.Tensor logits: (B, L, V) for the masked-language-model head, (B, L) for the binary head or
        (B, C) for the host-class head
    :param numpy.ndarray|None probabilities: the head's output probabilities
    :param dnsgt.tensor.Tensor|None loss: scalar loss, if labels were available
    :param list(list(numpy.ndarray))|None attention_maps: per block, per head (B, L, L) attention weights
    :return None:
    """

    def __init__(self, token_states, logits, probabilities=None, loss=None, attention_maps=None):
        self.token_states = token_states
        self.logits = logits
        self.probabilities = probabilities
        self.loss = loss
        self.attention_maps = attention_maps


class SequenceModel:
    """Machinery shared by the graph-attention model and the Word2Vec baselines: parameter creation and
    initialisation, train/eval modes, head swapping, parameter state for checkpoints, and the prediction helpers.

    Subclasses define `body_shapes` and `encode_batch`.

    :param dnsgt.configuration.ModelConfig config: must carry the vocabulary sizes
    :param str task: "mlm", "binary" or "hostclass"
    :param int|None n_classes: number of host classes (host-class task only)
    :param list(str)|None class_names:
    :param int seed: seed of the parameter initialisation and of the dropout draws
    :return None:
    """

    def __init__(self, config, task="mlm", n_classes=None, class_names=None, seed=0):
        if config.n_domains is None or config.n_hosts is None:
            raise BadConfig("The model configuration must be sized for a vocabulary (n_domains and n_hosts).")

        self.config = config
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.training = False
        self.parameters = collections.OrderedDict()

        for name, (shape, initialisation) in self.body_shapes(config).items():
            self.parameters[name] = Parameter(name, self._initial_value(shape, initialisation))

        self.task = None
        self.n_classes = None
        self.class_names = None
        self.swap_head(task, n_classes=n_classes, class_names=class_names)

    def __repr__(self):
        return f"<{type(self).__name__}(task={self.task!r}, parameters={self.parameter_count()})>"

    @classmethod
    def body_shapes(cls, config):
        """Get the name, shape and initialisation of every parameter outside the task head.

        :param dnsgt.configuration.ModelConfig config:
        :return collections.OrderedDict:
        """
        raise NotImplementedError

    @classmethod
    def head_shapes(cls, config, task, n_classes=None):
        """Get the name, shape and initialisation of the parameters of a task head.

        :param dnsgt.configuration.ModelConfig config:
        :param str task:
        :param int|None n_classes:
        :return collections.OrderedDict:
        """
        if task not in TASKS:
            raise BadConfig(f"Unknown task {task!r}; choose from {TASKS!r}.")

        outputs = {"mlm": config.n_domains, "binary": 1, "hostclass": n_classes}[task]

        if outputs is None or outputs < 1:
            raise BadConfig("The host-class head needs at least one class.")

        return collections.OrderedDict(
            [("head.weight", ((config.N, outputs), "head")), ("head.bias", ((outputs,), "zeros"))]
        )

    @classmethod
    def parameter_shapes(cls, config, task="mlm", n_classes=None):
        shapes = cls.body_shapes(config)
        shapes.update(cls.head_shapes(config, task, n_classes))
        return collections.OrderedDict((name, shape) for name, (shape, _) in shapes.items())

    @classmethod
    def count_parameters(cls, config, task="mlm", n_classes=None):
        """Count the trainable parameters of a model from its configuration alone.

        :param dnsgt.configuration.ModelConfig config:
        :param str task:
        :param int|None n_classes:
        :return int:
        """
        return int(sum(np.prod(shape) for shape in cls.parameter_shapes(config, task, n_classes).values()))

    def parameter_count(self):
        return int(sum(parameter.size for parameter in self.parameters.values()))

    def _initial_value(self, shape, initialisation):
        if initialisation in {"normal", "head"}:
            return self.rng.normal(0, EMBEDDING_STD if initialisation == "normal" else HEAD_STD, size=shape)

        if initialisation == "xavier":
            limit = np.sqrt(6 / (shape[0] + shape[1]))
            return self.rng.uniform(-limit, limit, size=shape)

        if initialisation == "ones":
            return np.ones(shape)

        return np.zeros(shape)

    def train(self):
        self.training = True
        return self

    def eval(self):
        self.training = False
        return self

    def parameter(self, name):
        return self.parameters[name]

    def trainable_parameters(self, freeze_embeddings=False):
        """Get the parameters an optimiser should update.

        :param bool freeze_embeddings: leave the embedding tables out
        :return list(dnsgt.tensor.Parameter):
        """
        return [
            parameter
            for name, parameter in self.parameters.items()
            if not (freeze_embeddings and name.startswith("embedding."))
        ]

    def swap_head(self, task, n_classes=None, class_names=None):
        """Replace the task head with a freshly initialised one, keeping the rest of the model.

        :param str task: "mlm", "binary" or "hostclass"
        :param int|None n_classes:
        :param list(str)|None class_names:
        :return None:
        """
        if class_names is not None:
            n_classes = len(class_names)

        shapes = self.head_shapes(self.config, task, n_classes)

        for name in [name for name in self.parameters if name.startswith("head.")]:
            del self.parameters[name]

        for name, (shape, initialisation) in shapes.items():
            self.parameters[name] = Parameter(name, self._initial_value(shape, initialisation))

        self.task = task
        self.n_classes = n_classes if task == "hostclass" else None
        self.class_names = list(class_names) if class_names is not None and task == "hostclass" else None
        logger.debug("Attached a %r head to %r.", task, self)

    def buffers(self):
        """Get the non-trainable state saved with the parameters.

        :return dict(str, numpy.ndarray):
        """
        return {}

    def load_buffers(self, buffers):
        pass

    def state_arrays(self):
        """Get every array needed to restore the model, in a fixed order.

        :return collections.OrderedDict:
        """
        arrays = collections.OrderedDict((name, parameter.data) for name, parameter in self.parameters.items())
        arrays.update(self.buffers())
        return arrays

    def load_state_arrays(self, arrays):
        """Restore the model from arrays produced by `state_arrays`.

        :param dict(str, numpy.ndarray) arrays:
        :raise dnsgt.exceptions.InvalidCheckpoint: if names or shapes don't match the configuration
        :return None:
        """
        expected = self.state_arrays()

        if set(arrays) != set(expected):
            missing = sorted(set(expected) - set(arrays))
            unexpected = sorted(set(arrays) - set(expected))
            raise InvalidCheckpoint(
                f"Parameter names don't match the configuration (missing {missing}, unexpected {unexpected})."
            )

        for name, array in arrays.items():
            if tuple(np.shape(array)) != tuple(expected[name].shape):
                raise InvalidCheckpoint(
                    f"Parameter {name!r} has shape {np.shape(array)} but the configuration needs "
                    f"{expected[name].shape}."
                )

        for name, parameter in self.parameters.items():
            parameter.data = np.array(arrays[name], dtype=np.float64)
            parameter.grad = None

        self.load_buffers({name: np.array(arrays[name], dtype=np.float64) for name in self.buffers()})

    def encode_batch(self, batch, capture_attention=False):
        """Compute the final token representations of a batch.

        :param TokenBatch batch:
        :param bool capture_attention:
        :return (dnsgt.tensor.Tensor, list|None):
        """
        raise NotImplementedError

    def head_logits(self, token_states, batch):
        """Apply the task head to the token representations.

        :param dnsgt.tensor.Tensor token_states: (B, L, N)
        :param TokenBatch batch:
        :return dnsgt.tensor.Tensor:
        """
        weight = self.parameters["head.weight"]
        bias = self.parameters["head.bias"]

        if self.task == "mlm":
            return F.matmul(token_states, weight) + bias

        if self.task == "binary":
            hidden = F.dropout(token_states, self.config.dropout_finetune, self.rng, self.training)
            logits = F.matmul(hidden, weight) + bias
            return F.reshape(logits, logits.shape[:-1])

        pooled = F.mean_pool_rows(token_states, batch.real_mask)
        pooled = F.dropout(pooled, self.config.dropout_finetune, self.rng, self.training)
        return F.matmul(pooled, weight) + bias

    def forward(self, batch, capture_attention=False):
        """Run the model and its head without computing a loss.

        :param TokenBatch batch:
        :param bool capture_attention:
        :return ForwardOutput:
        """
        token_states, attention_maps = self.encode_batch(batch, capture_attention=capture_attention)
        logits = self.head_logits(token_states, batch)
        probabilities = _probabilities(self.task, logits.data)
        return ForwardOutput(token_states, logits, probabilities, attention_maps=attention_maps)

    def _require_task(self, task):
        if self.task != task:
            raise BadConfig(f"This operation needs a {task!r} head but the model carries a {self.task!r} head.")

    def forward_pretrain(self, batch):
        """Forward pass with the masked-language-model loss averaged over the masked positions.

        :param TokenBatch batch: built from masking outcomes
        :raise dnsgt.exceptions.NoMaskedPositions: if the batch has no masked position
        :return ForwardOutput:
        """
        self._require_task("mlm")
        output = self.forward(batch)
        output.loss = F.cross_entropy_masked(output.logits, batch.target_ids, batch.masked)
        return output

    def forward_binary(self, batch):
        """Forward pass of the binary head with the cross-entropy averaged over labelled non-PAD positions.

        :param TokenBatch batch:
        :raise dnsgt.exceptions.MissingLabels: if the batch carries no labels
        :return ForwardOutput:
        """
        self._require_task("binary")

        if batch.labels is None or batch.label_mask is None:
            raise MissingLabels("Binary fine-tuning needs per-token labels.")

        output = self.forward(batch)
        output.loss = F.binary_cross_entropy(output.logits, batch.labels, batch.label_mask & batch.real_mask)
        return output

    def forward_hostclass(self, batch):
        """Forward pass of the host-class head with the cross-entropy against each sequence's host class.

        :param TokenBatch batch:
        :raise dnsgt.exceptions.MissingLabels: if the batch carries no host classes
        :return ForwardOutput:
        """
        self._require_task("hostclass")

        if batch.host_classes is None:
            raise MissingLabels("Host-class fine-tuning needs the class of every sequence's host.")

        output = self.forward(batch)
        output.loss = F.cross_entropy_masked(output.logits, batch.host_classes, np.ones(len(batch), dtype=bool))
        return output

    def forward_task(self, batch):
        """Forward pass with the loss of the attached head.

        :param TokenBatch batch:
        :return ForwardOutput:
        """
        return {"mlm": self.forward_pretrain, "binary": self.forward_binary, "hostclass": self.forward_hostclass}[
            self.task
        ](batch)

    def predict_probabilities(self, batch):
        """Get the output probabilities of the attached head in eval mode.

        :param TokenBatch batch:
        :return numpy.ndarray:
        """
        training = self.training
        self.eval()

        try:
            return self.forward(batch).probabilities
        finally:
            self.training = training

    def score_tokens(self, batch):
        """Get the per-token probabilities of the binary head in eval mode.

        :param TokenBatch batch:
        :return numpy.ndarray: float[B, L]
        """
        self._require_task("binary")
        return self.predict_probabilities(batch)

    def predict_positions(self, sequence, vocabulary, k=5, positions=None):
        """Get the top-k domain predictions at the positions of a sequence. Special tokens are never candidates and the
        probabilities come from a softmax over the full domain vocabulary.

        :param dnsgt.vocab.tokens.TokenSequence sequence:
        :param dnsgt.vocab.vocabulary.Vocabulary vocabulary:
        :param int k: clamped to the number of real domains
        :param iter(int)|None positions: defaults to every real position
        :return list(tuple(int, list(tuple(str, float)))): `(position, [(domain, probability), ...])` pairs
        """
        self._require_task("mlm")
        probabilities = self.predict_probabilities(TokenBatch.from_sequences([sequence], self.config.topology))[0]

        positions = range(sequence.length) if positions is None else positions
        k = min(k, probabilities.shape[-1] - FIRST_REAL_DOMAIN_ID)
        predictions = []

        for position in positions:
            candidates = probabilities[position, FIRST_REAL_DOMAIN_ID:]
            order = np.argsort(-candidates, kind="stable")[:k]
            top = [(vocabulary.id_to_domain[FIRST_REAL_DOMAIN_ID + index], float(candidates[index])) for index in order]
            predictions.append((int(position), top))

        return predictions

    def predict_masked(self, sequence, vocabulary, k=5):
        """Get the top-k predictions at the MASK positions of a sequence.

        :param dnsgt.vocab.tokens.TokenSequence sequence:
        :param dnsgt.vocab.vocabulary.Vocabulary vocabulary:
        :param int k:
        :raise dnsgt.exceptions.NoMaskPresent: if the sequence has no MASK token
        :return list(tuple(int, list(tuple(str, float)))):
        """
        positions = np.flatnonzero(sequence.domain_ids[: sequence.length] == MASK_ID)

        if len(positions) == 0:
            raise NoMaskPresent("The sequence has no MASK token to predict.")

        return self.predict_positions(sequence, vocabulary, k=k, positions=positions)

    def export_embeddings(self, vocabulary):
        """Get the embedding of every real domain, in vocabulary order.

        :param dnsgt.vocab.vocabulary.Vocabulary vocabulary:
        :return collections.OrderedDict(str, numpy.ndarray):
        """
        table = self.parameters["embedding.domain"].data
        return collections.OrderedDict(
            (domain, table[FIRST_REAL_DOMAIN_ID + index].copy()) for index, domain in enumerate(vocabulary.domains)
        )


def _probabilities(task, logits):
    if task == "binary":
        return special.expit(logits)

    return special.softmax(logits, axis=-1)
