import collections
import logging

import numpy as np

from dnsgt.exceptions import ShapeMismatch
from dnsgt.model.base import SequenceModel
from dnsgt.tensor import Tensor, functional as F


logger = logging.getLogger(__name__)

FFN_EXPANSION = 4


class DnsGtModel(SequenceModel):
    """The graph-attention transformer over DNS query sequences. Host and domain embeddings are merged, regularised
    with dropout and batch normalisation, then passed through stacked blocks of multi-head attention gated by the
    topologies, each followed by a residual connection, layer normalisation and a position-wise feed-forward network.
    There are no positional encodings, so the model is equivariant to permutations of the tokens.

    :param dnsgt.configuration.ModelConfig config:
    :param str task: "mlm", "binary" or "hostclass"
    :param int|None n_classes:
    :param list(str)|None class_names:
    :param int seed:
    :return None:
    """

    def __init__(self, config, task="mlm", n_classes=None, class_names=None, seed=0):
        super().__init__(config, task=task, n_classes=n_classes, class_names=class_names, seed=seed)
        self.batch_norm_state = F.BatchNormState(config.N, momentum=config.batch_norm_momentum)

    @classmethod
    def body_shapes(cls, config):
        N = config.N
        d = config.head_dimension
        shapes = collections.OrderedDict()
        shapes["embedding.host"] = ((config.n_hosts, N), "normal")
        shapes["embedding.domain"] = ((config.n_domains, N), "normal")
        shapes["batch_norm.gamma"] = ((N,), "ones")
        shapes["batch_norm.beta"] = ((N,), "zeros")

        for block in range(config.blocks):
            prefix = f"block{block}"

            for head in range(config.heads):
                for role in ("query", "key", "value"):
                    shapes[f"{prefix}.head{head}.{role}"] = ((N, d), "xavier")

            shapes[f"{prefix}.output"] = ((N, N), "xavier")
            shapes[f"{prefix}.norm1.gain"] = ((N,), "ones")
            shapes[f"{prefix}.norm1.bias"] = ((N,), "zeros")
            shapes[f"{prefix}.ffn.w1"] = ((N, N), "xavier")
            shapes[f"{prefix}.ffn.b1"] = ((N,), "zeros")
            shapes[f"{prefix}.ffn.w2"] = ((N, FFN_EXPANSION * N), "xavier")
            shapes[f"{prefix}.ffn.b2"] = ((FFN_EXPANSION * N,), "zeros")
            shapes[f"{prefix}.ffn.w3"] = ((FFN_EXPANSION * N, N), "xavier")
            shapes[f"{prefix}.ffn.b3"] = ((N,), "zeros")
            shapes[f"{prefix}.norm2.gain"] = ((N,), "ones")
            shapes[f"{prefix}.norm2.bias"] = ((N,), "zeros")

        return shapes

    def buffers(self):
        return {
            "batch_norm.running_mean": self.batch_norm_state.running_mean,
            "batch_norm.running_var": self.batch_norm_state.running_var,
        }

    def load_buffers(self, buffers):
        self.batch_norm_state.running_mean = buffers["batch_norm.running_mean"]
        self.batch_norm_state.running_var = buffers["batch_norm.running_var"]

    def merge_embeddings(self, host_ids, domain_ids, token_mask=None):
        """Blend the domain and host embeddings of every position (`omega * domain + (1 - omega) * host`), then apply
        dropout (training only) and batch normalisation over the non-PAD positions.

        :param numpy.ndarray host_ids: int[B, L]
        :param numpy.ndarray domain_ids: int[B, L]
        :param numpy.ndarray|None token_mask: bool[B, L] non-PAD positions
        :raise dnsgt.exceptions.IdOutOfRange: if an id is outside its vocabulary
        :return dnsgt.tensor.Tensor: (B, L, N)
        """
        omega = self.config.omega
        domains = F.embedding_gather(self.parameters["embedding.domain"], domain_ids)
        hosts = F.embedding_gather(self.parameters["embedding.host"], host_ids)
        merged = F.scale(domains, omega) + F.scale(hosts, 1 - omega)
        merged = F.dropout(merged, self.config.dropout_embed, self.rng, self.training)

        return F.batch_norm(
            merged,
            self.parameters["batch_norm.gamma"],
            self.parameters["batch_norm.beta"],
            self.batch_norm_state,
            token_mask=token_mask,
            training=self.training,
        )

    def attention(self, x, topology, block, capture=False):
        """Multi-head masked attention of one block, summed over the topologies.

        :param dnsgt.tensor.Tensor x: (B, L, N)
        :param numpy.ndarray topology: bool[B, K, L, L]; entry `[b, k, i, j]` allows position `i` to attend to `j`
        :param int block:
        :param bool capture: also return the attention weights
        :return (dnsgt.tensor.Tensor, list(numpy.ndarray)): the (B, L, N) output and, if captured, the (B, K, L, L)
            attention weights of each head
        """
        topology = np.asarray(topology, dtype=bool)

        if topology.ndim != 4 or topology.shape[0] != x.shape[0] or topology.shape[2:] != (x.shape[1], x.shape[1]):
            raise ShapeMismatch(f"A topology of shape {topology.shape} doesn't fit inputs of shape {x.shape}.")

        if not self.config.attention:
            return Tensor(np.zeros(x.shape)), []

        prefix = f"block{block}"
        scale = 1 / np.sqrt(self.config.head_dimension)
        projections = [
            (
                F.matmul(x, self.parameters[f"{prefix}.head{head}.query"]),
                F.matmul(x, self.parameters[f"{prefix}.head{head}.key"]),
                F.matmul(x, self.parameters[f"{prefix}.head{head}.value"]),
            )
            for head in range(self.config.heads)
        ]

        output = None
        maps = [[] for _ in range(self.config.heads)]

        for k in range(topology.shape[1]):
            heads = []

            for head, (query, key, value) in enumerate(projections):
                scores = F.scale(F.matmul(query, F.transpose_last(key)), scale)
                weights = F.masked_softmax_rows(scores, topology[:, k])
                heads.append(F.matmul(weights, value))

                if capture:
                    maps[head].append(weights.data)

            projected = F.matmul(F.concat_last_axis(heads), self.parameters[f"{prefix}.output"])
            output = projected if output is None else output + projected

        if capture:
            maps = [np.stack(head_maps, axis=1) for head_maps in maps]

        return output, maps

    def gat_block(self, x, topology, block, capture=False):
        """One block: attention, residual and layer norm, then the feed-forward network with a second residual and
        layer norm.

        :param dnsgt.tensor.Tensor x: (B, L, N)
        :param numpy.ndarray topology: bool[B, K, L, L]
        :param int block:
        :param bool capture:
        :return (dnsgt.tensor.Tensor, list(numpy.ndarray)):
        """
        prefix = f"block{block}"
        attended, maps = self.attention(x, topology, block, capture=capture)
        x = F.layer_norm_rows(
            x + attended, self.parameters[f"{prefix}.norm1.gain"], self.parameters[f"{prefix}.norm1.bias"]
        )

        hidden = F.matmul(x, self.parameters[f"{prefix}.ffn.w1"]) + self.parameters[f"{prefix}.ffn.b1"]
        hidden = F.relu(F.matmul(hidden, self.parameters[f"{prefix}.ffn.w2"]) + self.parameters[f"{prefix}.ffn.b2"])
        hidden = F.matmul(hidden, self.parameters[f"{prefix}.ffn.w3"]) + self.parameters[f"{prefix}.ffn.b3"]

        output = F.layer_norm_rows(
            x + hidden, self.parameters[f"{prefix}.norm2.gain"], self.parameters[f"{prefix}.norm2.bias"]
        )
        return output, maps

    def encode(self, host_ids, domain_ids, topology, token_mask=None, capture_attention=False):
        """Compute the final token representations.

        :param numpy.ndarray host_ids: int[B, L]
        :param numpy.ndarray domain_ids: int[B, L]
        :param numpy.ndarray topology: bool[B, K, L, L]
        :param numpy.ndarray|None token_mask: bool[B, L] non-PAD positions (used by batch normalisation)
        :param bool capture_attention:
        :return (dnsgt.tensor.Tensor, list|None):
        """
        x = self.merge_embeddings(host_ids, domain_ids, token_mask=token_mask)
        attention_maps = [] if capture_attention else None

        for block in range(self.config.blocks):
            x, maps = self.gat_block(x, topology, block, capture=capture_attention)

            if capture_attention:
                attention_maps.append(maps)

        return x, attention_maps

    def encode_batch(self, batch, capture_attention=False):
        return self.encode(
            batch.host_ids,
            batch.domain_ids,
            batch.topology,
            token_mask=batch.real_mask,
            capture_attention=capture_attention,
        )

    def forward_mlm(self, batch):
        return self.forward_pretrain(batch)
