"""Differentiable operations. Each operation computes its forward value with numpy, checks it is finite and records a
backward rule mapping the output gradient to one gradient per input.
"""
import numpy as np
from scipy import special

from dnsgt.exceptions import IdOutOfRange, MissingLabels, NoMaskedPositions, ShapeMismatch
from dnsgt.tensor.tensor import Tensor, as_tensor, make_result


LAYER_NORM_EPS = 1e-5
BATCH_NORM_EPS = 1e-5


def unbroadcast(gradient, shape):
    """Sum a gradient over the axes along which an input of `shape` was broadcast.

    :param numpy.ndarray gradient:
    :param tuple(int) shape:
    :return numpy.ndarray:
    """
    while gradient.ndim > len(shape):
        gradient = gradient.sum(axis=0)

    for axis, size in enumerate(shape):
        if size == 1 and gradient.shape[axis] != 1:
            gradient = gradient.sum(axis=axis, keepdims=True)

    return gradient


def _broadcast_shape(op, *shapes):
    try:
        return np.broadcast_shapes(*shapes)
    except ValueError:
        raise ShapeMismatch(f"{op!r} can't broadcast shapes {shapes!r} together.")


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("add", a.shape, b.shape)

    def rule(gradient):
        return unbroadcast(gradient, a.shape), unbroadcast(gradient, b.shape)

    return make_result(a.data + b.data, (a, b), rule, "add")


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("sub", a.shape, b.shape)

    def rule(gradient):
        return unbroadcast(gradient, a.shape), unbroadcast(-gradient, b.shape)

    return make_result(a.data - b.data, (a, b), rule, "sub")


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("mul", a.shape, b.shape)

    def rule(gradient):
        return unbroadcast(gradient * b.data, a.shape), unbroadcast(gradient * a.data, b.shape)

    return make_result(a.data * b.data, (a, b), rule, "mul")


def neg(x):
    x = as_tensor(x)
    return make_result(-x.data, (x,), lambda gradient: (-gradient,), "neg")


def scale(x, factor):
    """Multiply a tensor by a constant.

    :param Tensor x:
    :param float factor:
    :return Tensor:
    """
    x = as_tensor(x)
    return make_result(x.data * factor, (x,), lambda gradient: (gradient * factor,), "scale")


def matmul(a, b):
    """Matrix product over the last two axes, broadcasting the leading ones.

    :param Tensor a: (..., n, k)
    :param Tensor b: (..., k, m)
    :raise dnsgt.exceptions.ShapeMismatch:
    :return Tensor: (..., n, m)
    """
    a, b = as_tensor(a), as_tensor(b)

    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeMismatch(f"matmul can't multiply shapes {a.shape} and {b.shape}.")

    _broadcast_shape("matmul", a.shape[:-2], b.shape[:-2])

    def rule(gradient):
        grad_a = unbroadcast(gradient @ np.swapaxes(b.data, -1, -2), a.shape)
        grad_b = unbroadcast(np.swapaxes(a.data, -1, -2) @ gradient, b.shape)
        return grad_a, grad_b

    return make_result(a.data @ b.data, (a, b), rule, "matmul")


def transpose_last(x):
    x = as_tensor(x)
    data = np.swapaxes(x.data, -1, -2)
    return make_result(data, (x,), lambda gradient: (np.swapaxes(gradient, -1, -2),), "transpose")


def reshape(x, shape):
    x = as_tensor(x)

    try:
        data = x.data.reshape(shape)
    except ValueError:
        raise ShapeMismatch(f"Can't reshape {x.shape} into {tuple(shape)}.")

    return make_result(data, (x,), lambda gradient: (gradient.reshape(x.shape),), "reshape")


def sum(x, axis=None, keepdims=False):
    x = as_tensor(x)

    def rule(gradient):
        if axis is not None and not keepdims:
            gradient = np.expand_dims(gradient, axis)
        return (np.broadcast_to(gradient, x.shape).copy(),)

    return make_result(x.data.sum(axis=axis, keepdims=keepdims), (x,), rule, "sum")


def mean(x):
    x = as_tensor(x)
    count = x.size
    return make_result(x.data.mean(), (x,), lambda gradient: (np.full(x.shape, gradient / count),), "mean")


def relu(x):
    x = as_tensor(x)
    active = x.data > 0
    return make_result(np.where(active, x.data, 0.0), (x,), lambda gradient: (gradient * active,), "relu")


def sigmoid(x):
    x = as_tensor(x)
    output = special.expit(x.data)
    return make_result(output, (x,), lambda gradient: (gradient * output * (1 - output),), "sigmoid")


def masked_softmax_rows(scores, allowed=None):
    """Softmax over the last axis restricted to the allowed entries. Disallowed entries get probability exactly zero;
    the row maximum is taken over allowed entries only. A row with nothing allowed is all zeros.

    :param Tensor scores: (..., n)
    :param numpy.ndarray|None allowed: boolean, broadcastable to the shape of `scores`
    :raise dnsgt.exceptions.ShapeMismatch:
    :return Tensor:
    """
    scores = as_tensor(scores)

    if allowed is None:
        allowed = np.ones(scores.shape, dtype=bool)
    else:
        try:
            allowed = np.broadcast_to(np.asarray(allowed, dtype=bool), scores.shape)
        except ValueError:
            raise ShapeMismatch(f"A mask of shape {np.shape(allowed)} doesn't fit scores of shape {scores.shape}.")

    masked = np.where(allowed, scores.data, -np.inf)
    row_max = masked.max(axis=-1, keepdims=True)
    row_max = np.where(np.isfinite(row_max), row_max, 0.0)
    exponentials = np.where(allowed, np.exp(masked - row_max), 0.0)
    totals = exponentials.sum(axis=-1, keepdims=True)
    output = np.where(totals > 0, exponentials / np.where(totals > 0, totals, 1.0), 0.0)

    def rule(gradient):
        return (output * (gradient - (gradient * output).sum(axis=-1, keepdims=True)),)

    return make_result(output, (scores,), rule, "masked_softmax")


def softmax_rows(x):
    return masked_softmax_rows(x, None)


def log_softmax_rows(x):
    x = as_tensor(x)
    output = special.log_softmax(x.data, axis=-1)

    def rule(gradient):
        return (gradient - np.exp(output) * gradient.sum(axis=-1, keepdims=True),)

    return make_result(output, (x,), rule, "log_softmax")


def layer_norm_rows(x, gain, bias, eps=LAYER_NORM_EPS):
    """Normalise each row (last axis) to zero mean and unit variance, then apply a learned gain and bias.

    :param Tensor x: (..., N)
    :param Tensor gain: (N,)
    :param Tensor bias: (N,)
    :param float eps:
    :return Tensor:
    """
    x, gain, bias = as_tensor(x), as_tensor(gain), as_tensor(bias)
    width = x.shape[-1]

    if gain.shape != (width,) or bias.shape != (width,):
        raise ShapeMismatch(f"Layer norm over width {width} needs a gain and bias of shape ({width},).")

    centred = x.data - x.data.mean(axis=-1, keepdims=True)
    inverse_std = 1 / np.sqrt((centred**2).mean(axis=-1, keepdims=True) + eps)
    normalised = centred * inverse_std

    def rule(gradient):
        grad_normalised = gradient * gain.data
        grad_x = (inverse_std / width) * (
            width * grad_normalised
            - grad_normalised.sum(axis=-1, keepdims=True)
            - normalised * (grad_normalised * normalised).sum(axis=-1, keepdims=True)
        )
        grad_gain = (gradient * normalised).reshape(-1, width).sum(axis=0)
        grad_bias = gradient.reshape(-1, width).sum(axis=0)
        return grad_x, grad_gain, grad_bias

    return make_result(normalised * gain.data + bias.data, (x, gain, bias), rule, "layer_norm")


class BatchNormState:
    """Running statistics of a batch normalisation layer.

    :param int width:
    :param float momentum: weight of the old running value in each update
    :return None:
    """

    def __init__(self, width, momentum=0.9):
        self.momentum = momentum
        self.running_mean = np.zeros(width)
        self.running_var = np.ones(width)

    def update(self, batch_mean, batch_var):
        self.running_mean = self.momentum * self.running_mean + (1 - self.momentum) * batch_mean
        self.running_var = self.momentum * self.running_var + (1 - self.momentum) * batch_var


def batch_norm(x, gamma, beta, state, token_mask=None, training=False, eps=BATCH_NORM_EPS):
    """Normalise each feature over all selected rows. In training mode the statistics come from the selected rows of
    the batch (PAD positions are left out) and the running statistics are updated; in eval mode the running statistics
    are used and nothing is updated.

    :param Tensor x: (..., N)
    :param Tensor gamma: (N,)
    :param Tensor beta: (N,)
    :param BatchNormState state:
    :param numpy.ndarray|None token_mask: boolean of shape `x.shape[:-1]`; rows used for the statistics
    :param bool training:
    :param float eps:
    :return Tensor:
    """
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    width = x.shape[-1]

    if token_mask is None:
        token_mask = np.ones(x.shape[:-1], dtype=bool)
    elif np.shape(token_mask) != x.shape[:-1]:
        raise ShapeMismatch(f"A token mask of shape {np.shape(token_mask)} doesn't fit input of shape {x.shape}.")

    selected = np.asarray(token_mask, dtype=bool)
    count = int(selected.sum())

    if training and count > 0:
        rows = x.data[selected]
        mean_ = rows.mean(axis=0)
        var = rows.var(axis=0)
        state.update(mean_, var)
    else:
        mean_ = state.running_mean
        var = state.running_var

    inverse_std = 1 / np.sqrt(var + eps)
    normalised = (x.data - mean_) * inverse_std
    batch_statistics = training and count > 0

    def rule(gradient):
        grad_normalised = gradient * gamma.data
        grad_x = inverse_std * grad_normalised

        if batch_statistics:
            flat_gradient = grad_normalised.reshape(-1, width)
            total = flat_gradient.sum(axis=0)
            weighted_total = (flat_gradient * normalised.reshape(-1, width)).sum(axis=0)
            correction = inverse_std * (total + normalised * weighted_total) / count
            grad_x = grad_x - selected[..., None] * correction

        grad_gamma = (gradient * normalised).reshape(-1, width).sum(axis=0)
        grad_beta = gradient.reshape(-1, width).sum(axis=0)
        return grad_x, grad_gamma, grad_beta

    return make_result(normalised * gamma.data + beta.data, (x, gamma, beta), rule, "batch_norm")


def dropout(x, rate, rng, training):
    """Inverted dropout: in training mode each entry is zeroed with probability `rate` and survivors are scaled by
    `1 / (1 - rate)`. Outside training (or with a zero rate) the input is returned unchanged.

    :param Tensor x:
    :param float rate:
    :param numpy.random.Generator rng:
    :param bool training:
    :return Tensor:
    """
    x = as_tensor(x)

    if not training or rate == 0:
        return x

    keep = (rng.random(x.shape) >= rate) / (1 - rate)
    return make_result(x.data * keep, (x,), lambda gradient: (gradient * keep,), "dropout")


def embedding_gather(table, ids):
    """Look up rows of an embedding table.

    :param Tensor table: (V, N)
    :param numpy.ndarray ids: integer array of any shape
    :raise dnsgt.exceptions.IdOutOfRange: if an id isn't a row of the table
    :return Tensor: ids.shape + (N,)
    """
    table = as_tensor(table)
    ids = np.asarray(ids, dtype=np.int64)

    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        raise IdOutOfRange(f"Ids must be in [0, {table.shape[0]}); received range [{ids.min()}, {ids.max()}].")

    def rule(gradient):
        grad_table = np.zeros(table.shape)
        np.add.at(grad_table, ids, gradient)
        return (grad_table,)

    return make_result(table.data[ids], (table,), rule, "embedding_gather")


def concat_last_axis(tensors):
    tensors = [as_tensor(tensor) for tensor in tensors]
    leading = {tensor.shape[:-1] for tensor in tensors}

    if len(leading) != 1:
        raise ShapeMismatch(f"Can't concatenate shapes {[tensor.shape for tensor in tensors]!r} on the last axis.")

    boundaries = np.cumsum([tensor.shape[-1] for tensor in tensors])[:-1]

    def rule(gradient):
        return tuple(np.split(gradient, boundaries, axis=-1))

    return make_result(np.concatenate([tensor.data for tensor in tensors], axis=-1), tensors, rule, "concat")


def cross_entropy_masked(logits, targets, mask):
    """Mean cross-entropy over the selected positions. Unselected positions take no part in the value or the gradient.

    :param Tensor logits: (..., V)
    :param numpy.ndarray targets: integer array of shape `logits.shape[:-1]`
    :param numpy.ndarray mask: boolean array of shape `logits.shape[:-1]`
    :raise dnsgt.exceptions.NoMaskedPositions: if nothing is selected
    :return Tensor: scalar
    """
    logits = as_tensor(logits)
    targets = np.asarray(targets, dtype=np.int64)
    mask = np.asarray(mask, dtype=bool)

    if targets.shape != logits.shape[:-1] or mask.shape != logits.shape[:-1]:
        raise ShapeMismatch(f"Targets {targets.shape} and mask {mask.shape} must match logits {logits.shape[:-1]}.")

    count = int(mask.sum())

    if count == 0:
        raise NoMaskedPositions("The cross-entropy needs at least one selected position.")

    selected_logits = logits.data[mask]
    selected_targets = targets[mask]
    log_probabilities = special.log_softmax(selected_logits, axis=-1)
    loss = -log_probabilities[np.arange(count), selected_targets].sum() / count

    def rule(gradient):
        grad_selected = np.exp(log_probabilities)
        grad_selected[np.arange(count), selected_targets] -= 1
        grad_logits = np.zeros(logits.shape)
        grad_logits[mask] = grad_selected * (gradient / count)
        return (grad_logits,)

    return make_result(loss, (logits,), rule, "cross_entropy")


def binary_cross_entropy(logits, labels, mask):
    """Mean binary cross-entropy between `sigmoid(logits)` and the labels over the selected positions, computed from
    the logits directly so saturated predictions stay finite.

    :param Tensor logits:
    :param numpy.ndarray labels: values in [0, 1], same shape as `logits`
    :param numpy.ndarray mask: boolean, same shape as `logits`
    :raise dnsgt.exceptions.MissingLabels: if nothing is selected
    :return Tensor: scalar
    """
    logits = as_tensor(logits)
    labels = np.asarray(labels, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)

    if labels.shape != logits.shape or mask.shape != logits.shape:
        raise ShapeMismatch(f"Labels {labels.shape} and mask {mask.shape} must match logits {logits.shape}.")

    count = int(mask.sum())

    if count == 0:
        raise MissingLabels("The binary cross-entropy needs at least one labelled position.")

    z = logits.data[mask]
    y = labels[mask]
    losses = np.maximum(z, 0) - y * z + np.log1p(np.exp(-np.abs(z)))
    loss = losses.sum() / count

    def rule(gradient):
        grad_logits = np.zeros(logits.shape)
        grad_logits[mask] = (special.expit(z) - y) * (gradient / count)
        return (grad_logits,)

    return make_result(loss, (logits,), rule, "binary_cross_entropy")


def mean_pool_rows(x, mask):
    """Average the rows of each sequence over its selected positions.

    :param Tensor x: (batch, L, N)
    :param numpy.ndarray mask: boolean (batch, L); every sequence needs at least one selected row
    :return Tensor: (batch, N)
    """
    x = as_tensor(x)
    mask = np.asarray(mask, dtype=bool)

    if mask.shape != x.shape[:-1]:
        raise ShapeMismatch(f"A mask of shape {mask.shape} doesn't fit rows of shape {x.shape}.")

    weights = mask[..., None] / np.maximum(mask.sum(axis=-1), 1)[..., None, None]

    def rule(gradient):
        return (gradient[..., None, :] * weights,)

    return make_result((x.data * weights).sum(axis=-2), (x,), rule, "mean_pool")


def gather_last_axis(x, indices):
    """Pick entries along the last axis: `out[..., k] = x[..., indices[..., k]]`.

    :param Tensor x: (..., V)
    :param numpy.ndarray indices: integer (..., K)
    :return Tensor: (..., K)
    """
    x = as_tensor(x)
    indices = np.asarray(indices, dtype=np.int64)

    if indices.shape[:-1] != x.shape[:-1]:
        raise ShapeMismatch(f"Indices {indices.shape} don't match the leading axes of {x.shape}.")

    def rule(gradient):
        grad_x = np.zeros(x.shape)
        leading = np.indices(indices.shape, sparse=True)[:-1]
        np.add.at(grad_x, (*leading, indices), gradient)
        return (grad_x,)

    return make_result(np.take_along_axis(x.data, indices, axis=-1), (x,), rule, "gather")


def weighted_sum(x, weights):
    """Sum of the entries of `x` weighted by a constant array.

    :param Tensor x:
    :param numpy.ndarray weights: broadcastable to the shape of `x`
    :return Tensor: scalar
    """
    x = as_tensor(x)
    weights = np.broadcast_to(np.asarray(weights, dtype=np.float64), x.shape)
    return make_result((x.data * weights).sum(), (x,), lambda gradient: (gradient * weights,), "weighted_sum")


__all__ = (
    "BatchNormState",
    "Tensor",
    "add",
    "batch_norm",
    "binary_cross_entropy",
    "concat_last_axis",
    "cross_entropy_masked",
    "dropout",
    "embedding_gather",
    "gather_last_axis",
    "layer_norm_rows",
    "log_softmax_rows",
    "masked_softmax_rows",
    "matmul",
    "mean",
    "mean_pool_rows",
    "mul",
    "neg",
    "relu",
    "reshape",
    "scale",
    "sigmoid",
    "softmax_rows",
    "sub",
    "sum",
    "transpose_last",
    "unbroadcast",
    "weighted_sum",
)
