import collections
import logging

import numpy as np

from dnsgt.exceptions import BadConfig
from dnsgt.model.base import SequenceModel
from dnsgt.tensor import Tensor, functional as F


logger = logging.getLogger(__name__)

VARIANTS = ("cbow", "skipgram")


def band_matrix(L, r):
    """Get the binary band matrix with bandwidth `r`: entry `[i, j]` is 1 iff `|i - j| <= r`.

    :param int L:
    :param int r:
    :return numpy.ndarray: float[L, L]
    """
    positions = np.arange(L)
    return (np.abs(positions[:, None] - positions[None, :]) <= r).astype(np.float64)


def context_matrix(L, r):
    """Get the band matrix without its diagonal, so a position is never part of its own context.

    :param int L:
    :param int r:
    :return numpy.ndarray: float[L, L]
    """
    return band_matrix(L, r) - np.eye(L)


def cbow_context(embeddings, r, token_mask=None):
    """Sum the embeddings within distance `r` of every position, excluding the position itself. PAD rows are zeroed
    first so padding never contributes.

    :param dnsgt.tensor.Tensor|numpy.ndarray embeddings: (..., L, N)
    :param int r: bandwidth, at least 1
    :param numpy.ndarray|None token_mask: bool (..., L) non-PAD positions
    :return dnsgt.tensor.Tensor: (..., L, N)
    """
    if r < 1:
        raise BadConfig(f"The context bandwidth must be at least 1; received {r}.")

    embeddings = F.as_tensor(embeddings)
    L = embeddings.shape[-2]

    if token_mask is not None:
        embeddings = F.mul(embeddings, np.asarray(token_mask, dtype=np.float64)[..., None])

    return F.matmul(Tensor(context_matrix(L, r)), embeddings)


class W2VModel(SequenceModel):
    """Word2Vec baselines over domain sequences (no host information) with a full softmax. CBOW predicts each token
    from the sum of its context embeddings; SkipGram predicts every context token from the token's own embedding. Both
    project their input with a hidden layer before the output head.

    :param dnsgt.configuration.ModelConfig config: `architecture` is "cbow" or "skipgram"
    :param str task:
    :param int|None n_classes:
    :param list(str)|None class_names:
    :param int seed:
    :return None:
    """

    def __init__(self, config, task="mlm", n_classes=None, class_names=None, seed=0):
        if config.architecture not in VARIANTS:
            raise BadConfig(f"A Word2Vec model needs architecture in {VARIANTS!r}; received {config.architecture!r}.")

        super().__init__(config, task=task, n_classes=n_classes, class_names=class_names, seed=seed)

    @property
    def variant(self):
        return self.config.architecture

    @classmethod
    def body_shapes(cls, config):
        N = config.N
        shapes = collections.OrderedDict()
        shapes["embedding.domain"] = ((config.n_domains, N), "normal")
        shapes["projection.weight"] = ((N, N), "xavier")
        shapes["projection.bias"] = ((N,), "zeros")
        return shapes

    def _projected_table(self):
        projected = F.matmul(self.parameters["embedding.domain"], self.parameters["projection.weight"])
        return projected + self.parameters["projection.bias"]

    def encode_batch(self, batch, capture_attention=False):
        """Compute the projected representation `H` of every position. SkipGram rows come from a table indexed by
        domain id, so a token's representation depends on nothing but the token.

        :param dnsgt.model.batch.TokenBatch batch:
        :param bool capture_attention: ignored
        :return (dnsgt.tensor.Tensor, None):
        """
        ids = batch.target_ids

        if self.variant == "skipgram":
            return F.embedding_gather(self._projected_table(), ids), None

        embeddings = F.embedding_gather(self.parameters["embedding.domain"], ids)
        context = cbow_context(embeddings, self.config.context_bandwidth, token_mask=batch.real_mask)
        projected = F.matmul(context, self.parameters["projection.weight"]) + self.parameters["projection.bias"]
        return projected, None

    def head_logits(self, token_states, batch):
        if self.variant == "skipgram" and self.task == "binary":
            table = F.dropout(self._projected_table(), self.config.dropout_finetune, self.rng, self.training)
            scores = F.matmul(table, self.parameters["head.weight"]) + self.parameters["head.bias"]
            return F.reshape(F.embedding_gather(scores, batch.target_ids), batch.target_ids.shape)

        return super().head_logits(token_states, batch)

    def context_weights(self, batch):
        """Get, for every position, which positions of its sequence are context targets.

        :param dnsgt.model.batch.TokenBatch batch:
        :return numpy.ndarray: float[B, L, L]
        """
        real = batch.real_mask.astype(np.float64)
        L = real.shape[-1]
        return context_matrix(L, self.config.context_bandwidth)[None] * real[:, :, None] * real[:, None, :]

    def forward_pretrain(self, batch):
        """Forward pass with the Word2Vec loss. CBOW: cross-entropy of every non-PAD token that has context against
        its prediction from the context. SkipGram: mean cross-entropy over every (token, context token) pair of
        non-PAD positions; single-token sequences contribute nothing.

        :param dnsgt.model.batch.TokenBatch batch:
        :return dnsgt.model.base.ForwardOutput:
        """
        self._require_task("mlm")
        output = self.forward(batch)
        weights = self.context_weights(batch)

        if self.variant == "cbow":
            has_context = weights.sum(axis=-1) > 0
            output.loss = F.cross_entropy_masked(output.logits, batch.target_ids, has_context)
            return output

        pairs = weights.sum()

        if pairs == 0:
            output.loss = Tensor(0.0)
            return output

        L = batch.target_ids.shape[-1]
        targets = np.broadcast_to(batch.target_ids[:, None, :], batch.target_ids.shape[:1] + (L, L))
        log_probabilities = F.log_softmax_rows(output.logits)
        output.loss = F.scale(F.weighted_sum(F.gather_last_axis(log_probabilities, targets), weights), -1 / pairs)
        return output
