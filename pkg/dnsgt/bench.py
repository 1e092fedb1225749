import logging
import time

import numpy as np
import pandas as pd

from dnsgt.definitions import BENCH_EXECUTIONS, BENCH_WARMUP_BATCHES, FIRST_REAL_DOMAIN_ID, MASK_ID, MASK_TOKEN, UNK_ID
from dnsgt.exceptions import InvalidInputException
from dnsgt.mixins import Serialisable
from dnsgt.model.batch import TokenBatch
from dnsgt.tensor import Adam, backward
from dnsgt.topology import topology_batch


logger = logging.getLogger(__name__)

MODES = ("train", "infer")
METRICS = ("cold_start", "latency", "throughput")


class BenchReport(Serialisable):
    """Timings of a model per batch size and mode.

    Each row holds the cold start (seconds from invoking the model to the first processed batch), the latency (mean
    wall time of a batch over every execution, cold start included) and the throughput (batches per second once the
    warm-up batches are skipped).

    :param list(dict) rows: `{batch_size, mode, cold_start, latency, throughput}` objects
    :param int executions:
    :param int warmup:
    :return None:
    """

    _SERIALISE_FIELDS = ("rows", "executions", "warmup")

    def __init__(self, rows, executions=BENCH_EXECUTIONS, warmup=BENCH_WARMUP_BATCHES):
        super().__init__()
        self.rows = list(rows)
        self.executions = executions
        self.warmup = warmup

    def to_dataframe(self):
        return pd.DataFrame(self.rows, columns=["batch_size", "mode", *METRICS])

    def to_csv(self, path):
        """Write the report as CSV.

        :param str path:
        :return None:
        """
        self.to_dataframe().to_csv(path, index=False, lineterminator="\n")


def random_batch(model, batch_size, rng, mask_probability=0.1):
    """Build a full-length batch of random tokens suited to the model's head.

    :param dnsgt.model.base.SequenceModel model:
    :param int batch_size:
    :param numpy.random.Generator rng:
    :param float mask_probability: share of positions masked for a masked-language-model head
    :return dnsgt.model.batch.TokenBatch:
    """
    config = model.config
    shape = (batch_size, config.L)

    if config.n_domains > FIRST_REAL_DOMAIN_ID:
        target_ids = rng.integers(FIRST_REAL_DOMAIN_ID, config.n_domains, size=shape)
    else:
        target_ids = np.full(shape, UNK_ID)

    host_ids = rng.integers(0, config.n_hosts, size=shape[0])[:, np.newaxis].repeat(config.L, axis=1)
    domain_ids = target_ids.copy()
    masked = labels = label_mask = host_classes = None

    if model.task == "mlm":
        masked = rng.random(shape) < mask_probability
        masked[:, 0] = True
        domain_ids[masked] = MASK_ID
    elif model.task == "binary":
        labels = rng.integers(0, 2, size=shape).astype(np.float64)
        label_mask = np.ones(shape, dtype=bool)
    else:
        host_classes = rng.integers(0, model.n_classes, size=batch_size)

    domain_lists = [
        [MASK_TOKEN if domain_id == MASK_ID else f"bench{domain_id}.invalid" for domain_id in row] for row in domain_ids
    ]

    return TokenBatch(
        host_ids=host_ids,
        domain_ids=domain_ids,
        topology=topology_batch(domain_lists, config.topology, config.L),
        target_ids=target_ids,
        masked=masked,
        labels=labels,
        label_mask=label_mask,
        host_classes=host_classes,
    )


def _time_mode(model, mode, batch_size, executions, warmup, seed):
    rng = np.random.default_rng(seed)
    invoked = time.perf_counter()

    if mode == "train":
        model.train()
        optimizer = Adam(model.trainable_parameters(), lr=1e-4)

        def step(batch):
            optimizer.zero_grad()
            backward(model.forward_task(batch).loss)
            optimizer.step()

    else:
        model.eval()

        def step(batch):
            model.predict_probabilities(batch)

    latencies = []
    cold_start = None

    for execution in range(executions):
        start = time.perf_counter()
        step(random_batch(model, batch_size, rng))
        end = time.perf_counter()
        latencies.append(end - start)

        if execution == 0:
            cold_start = end - invoked
            latencies[0] = cold_start

    steady = latencies[warmup:]

    return {
        "batch_size": batch_size,
        "mode": mode,
        "cold_start": cold_start,
        "latency": float(np.mean(latencies)),
        "throughput": len(steady) / sum(steady) if steady and sum(steady) > 0 else float("nan"),
    }


def bench(model, batch_sizes, executions=BENCH_EXECUTIONS, warmup=BENCH_WARMUP_BATCHES, modes=MODES, seed=0):
    """Time a training step and an inference step of a model for each batch size. The model's parameters and running
    statistics are restored afterwards, so training steps leave no trace.

    :param dnsgt.model.base.SequenceModel model:
    :param iter(int) batch_sizes:
    :param int executions: batches timed per batch size and mode
    :param int warmup: leading batches left out of the throughput
    :param iter(str) modes: "train" and/or "infer"
    :param int seed:
    :raise dnsgt.exceptions.InvalidInputException: if a batch size or the execution counts are invalid
    :return BenchReport:
    """
    batch_sizes = [int(batch_size) for batch_size in batch_sizes]

    if not batch_sizes or any(batch_size < 1 for batch_size in batch_sizes):
        raise InvalidInputException(f"Batch sizes must be positive integers; received {batch_sizes!r}.")

    if executions < 1 or not 0 <= warmup < executions:
        raise InvalidInputException("Benchmarks need at least one execution and fewer warm-up batches than executions.")

    if any(mode not in MODES for mode in modes):
        raise InvalidInputException(f"Benchmark modes must be among {MODES}; received {modes!r}.")

    saved_state = {name: np.array(array, copy=True) for name, array in model.state_arrays().items()}
    training = model.training
    rows = []

    try:
        for batch_size in batch_sizes:
            for mode in modes:
                row = _time_mode(model, mode, batch_size, executions, warmup, seed)
                logger.info(
                    "Batch size %d (%s): cold start %.4f s, latency %.4f s, throughput %.2f batches/s.",
                    batch_size,
                    mode,
                    row["cold_start"],
                    row["latency"],
                    row["throughput"],
                )
                rows.append(row)
    finally:
        model.load_state_arrays(saved_state)
        model.training = training

    return BenchReport(rows, executions=executions, warmup=warmup)
