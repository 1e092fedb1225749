import logging
import math
import time

import numpy as np

from dnsgt.exceptions import EmptyCorpus, MissingLabels, NonFiniteDetected, NonFiniteLoss, VocabMismatch
from dnsgt.model.batch import TokenBatch
from dnsgt.model.checkpoint import load_checkpoint, save_checkpoint
from dnsgt.tensor import Adam, backward
from dnsgt.training.curves import LossCurve
from dnsgt.vocab.masking import apply_mlm_mask


logger = logging.getLogger(__name__)


class TrainingRun:
    """The outcome of a training loop.

    :param dnsgt.model.base.SequenceModel model:
    :param LossCurve curve:
    :param float training_time: wall-clock seconds spent in the loop
    :param str|None checkpoint_path: where the last checkpoint was written
    :return None:
    """

    def __init__(self, model, curve, training_time, checkpoint_path=None):
        self.model = model
        self.curve = curve
        self.training_time = training_time
        self.checkpoint_path = checkpoint_path

    def __repr__(self):
        return f"<TrainingRun(steps={len(self.curve)}, training_time={self.training_time:.2f}s)>"

    @property
    def initial_loss(self):
        return self.curve.losses[0]

    @property
    def final_loss(self):
        return self.curve.losses[-1]


def _sample(rng, count, batch_size):
    return rng.choice(count, size=min(batch_size, count), replace=False)


def _make_optimizer(model, train_config):
    return Adam(
        model.trainable_parameters(freeze_embeddings=train_config.freeze_embeddings),
        lr=train_config.lr,
        beta1=train_config.beta1,
        beta2=train_config.beta2,
        eps=train_config.eps,
        clip_grad_norm=train_config.clip_grad_norm,
    )


def _run_loop(model, make_batch, forward, train_config, checkpoint_path, checkpoint_metadata, description):
    optimizer = _make_optimizer(model, train_config)
    curve = LossCurve()
    model.train()
    start = time.perf_counter()

    try:
        for step in range(1, train_config.max_steps + 1):
            batch = make_batch()
            optimizer.zero_grad()

            try:
                output = forward(batch)
            except NonFiniteDetected as error:
                raise NonFiniteLoss(f"{description} diverged at step {step}: {error}")

            loss = output.loss.item()

            if not math.isfinite(loss):
                raise NonFiniteLoss(f"{description} diverged at step {step} (loss {loss}).")

            backward(output.loss)
            optimizer.step()
            curve.record(step, loss)

            if step % train_config.log_every == 0 or step == 1:
                logger.info("%s step %d/%d: loss %.6f.", description, step, train_config.max_steps, loss)

            if checkpoint_path and step % train_config.eval_every == 0:
                save_checkpoint(model, checkpoint_path, **checkpoint_metadata)

    finally:
        model.eval()

    training_time = time.perf_counter() - start

    if checkpoint_path:
        save_checkpoint(model, checkpoint_path, **checkpoint_metadata)

    logger.info("%s finished %d steps in %.2f s.", description, len(curve), training_time)
    return TrainingRun(model, curve, training_time, checkpoint_path=checkpoint_path)


def pretrain(model, sequences, vocabulary, train_config, checkpoint_path=None):
    """Pre-train a model with masked-language modelling. Every step samples a batch without replacement from the
    corpus, masks it afresh and takes one optimiser step; batch sampling and masking draw from one generator seeded by
    `train_config.seed`, so runs with equal seeds are identical. A checkpoint is written every `eval_every` steps and at
    the end; if the loss diverges the last checkpoint written is kept.

    :param dnsgt.model.base.SequenceModel model: carrying a masked-language-model head
    :param list(dnsgt.vocab.tokens.TokenSequence) sequences:
    :param dnsgt.vocab.vocabulary.Vocabulary vocabulary:
    :param dnsgt.configuration.TrainConfig train_config:
    :param str|None checkpoint_path:
    :raise dnsgt.exceptions.NonFiniteLoss: if the loss becomes NaN or infinite
    :return TrainingRun:
    """
    if not sequences:
        raise EmptyCorpus("Pre-training needs at least one sequence.")

    rng = np.random.default_rng(train_config.seed)
    p_mask, p_random, p_same = train_config.mask_split

    def make_batch():
        outcomes = [
            apply_mlm_mask(
                sequences[index],
                rng,
                vocabulary.domain_vocab_size,
                p=train_config.mask_probability,
                p_mask=p_mask,
                p_random=p_random,
                p_same=p_same,
            )
            for index in _sample(rng, len(sequences), train_config.batch_size)
        ]
        return TokenBatch.from_masking_outcomes(outcomes, model.config.topology, vocabulary)

    return _run_loop(
        model,
        make_batch,
        model.forward_pretrain,
        train_config,
        checkpoint_path,
        {"vocab_hash": vocabulary.hash_value},
        "Pre-training",
    )


def load_for_finetuning(checkpoint_path, vocabulary, task, class_names=None):
    """Load a pre-trained checkpoint and replace its head for a fine-tuning task.

    :param str checkpoint_path:
    :param dnsgt.vocab.vocabulary.Vocabulary vocabulary: the vocabulary of the fine-tuning corpus
    :param str task: "binary" or "hostclass"
    :param list(str)|None class_names: host classes (host-class task only)
    :raise dnsgt.exceptions.VocabMismatch: if the checkpoint was trained with another vocabulary
    :return dnsgt.model.base.SequenceModel:
    """
    model, metadata = load_checkpoint(checkpoint_path)

    if metadata.get("vocab_hash") != vocabulary.hash_value:
        raise VocabMismatch(
            f"The checkpoint {checkpoint_path!r} was trained with vocabulary {metadata.get('vocab_hash')!r}, not "
            f"{vocabulary.hash_value!r}."
        )

    model.swap_head(task, class_names=class_names)
    return model


def finetune(model, sequences, train_config, checkpoint_path=None, vocab_hash=None, fold=None):
    """Fine-tune every parameter of a model on labelled sequences with the loss of its head (binary or host class).
    Labels must already be restricted to the training fold.

    :param dnsgt.model.base.SequenceModel model:
    :param list(dnsgt.vocab.tokens.TokenSequence) sequences: labelled sequences
    :param dnsgt.configuration.TrainConfig train_config:
    :param str|None checkpoint_path:
    :param str|None vocab_hash:
    :param dict|None fold: fold information recorded in the checkpoint
    :raise dnsgt.exceptions.MissingLabels: if there are no labelled sequences
    :return TrainingRun:
    """
    if not sequences:
        raise MissingLabels("Fine-tuning needs at least one labelled sequence.")

    rng = np.random.default_rng(train_config.seed)

    def make_batch():
        chosen = [sequences[index] for index in _sample(rng, len(sequences), train_config.batch_size)]
        return TokenBatch.from_sequences(chosen, model.config.topology)

    return _run_loop(
        model,
        make_batch,
        model.forward_task,
        train_config,
        checkpoint_path,
        {"vocab_hash": vocab_hash, "fold": fold},
        f"Fine-tuning ({model.task})",
    )
