import logging

import numpy as np

from dnsgt.exceptions import NonFiniteDetected, NotScalar


logger = logging.getLogger(__name__)


class Tensor:
    """A dense double-precision array that records how it was computed so gradients can be propagated back to the
    leaves it depends on.

    :param array-like data:
    :param bool requires_grad: whether gradients should flow to (or through) this tensor
    :param tuple(Tensor) parents: the inputs of the operation that produced this tensor
    :param callable|None backward_rule: maps the gradient of this tensor to a tuple of gradients (one per parent)
    :param str|None op: name of the producing operation
    :return None:
    """

    __array_priority__ = 100

    def __init__(self, data, requires_grad=False, parents=(), backward_rule=None, op=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.parents = tuple(parents)
        self.backward_rule = backward_rule
        self.op = op
        self.grad = None

    def __repr__(self):
        return f"<{type(self).__name__}(shape={self.shape}, op={self.op!r})>"

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def is_leaf(self):
        return not self.parents

    def item(self):
        """Get the value of a single-element tensor.

        :return float:
        """
        return float(self.data.reshape(-1)[0]) if self.size == 1 else self.data.item()

    def numpy(self):
        return self.data

    def zero_grad(self):
        self.grad = None

    def backward(self):
        backward(self)

    def __add__(self, other):
        from dnsgt.tensor import functional

        return functional.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from dnsgt.tensor import functional

        return functional.sub(self, other)

    def __rsub__(self, other):
        from dnsgt.tensor import functional

        return functional.sub(other, self)

    def __mul__(self, other):
        from dnsgt.tensor import functional

        return functional.mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        from dnsgt.tensor import functional

        return functional.neg(self)

    def __matmul__(self, other):
        from dnsgt.tensor import functional

        return functional.matmul(self, other)

    def __rmatmul__(self, other):
        from dnsgt.tensor import functional

        return functional.matmul(other, self)

    def sum(self, axis=None, keepdims=False):
        from dnsgt.tensor import functional

        return functional.sum(self, axis=axis, keepdims=keepdims)

    def mean(self):
        from dnsgt.tensor import functional

        return functional.mean(self)

    def reshape(self, *shape):
        from dnsgt.tensor import functional

        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])

        return functional.reshape(self, shape)

    def transpose_last(self):
        from dnsgt.tensor import functional

        return functional.transpose_last(self)


class Parameter(Tensor):
    """A named trainable leaf tensor.

    :param str name: unique within a model
    :param array-like data:
    :return None:
    """

    def __init__(self, name, data):
        super().__init__(np.array(data, dtype=np.float64), requires_grad=True)
        self.name = name

    def __repr__(self):
        return f"<Parameter({self.name!r}, shape={self.shape})>"


def as_tensor(value):
    """Wrap a value in a constant tensor unless it already is a tensor.

    :param Tensor|array-like|float value:
    :return Tensor:
    """
    if isinstance(value, Tensor):
        return value

    return Tensor(value)


def check_finite(data, op):
    """Abort if an operation produced a NaN or an infinity.

    :param numpy.ndarray data:
    :param str op:
    :raise dnsgt.exceptions.NonFiniteDetected:
    :return None:
    """
    if not np.isfinite(data).all():
        bad = np.argwhere(~np.isfinite(data))
        raise NonFiniteDetected(
            f"The output of {op!r} (shape {data.shape}) has {len(bad)} non-finite entries; the first is at index "
            f"{tuple(int(index) for index in bad[0])}."
        )


def make_result(data, parents, backward_rule, op):
    """Wrap the output of an operation, recording the backward rule only if a parent needs gradients.

    :param numpy.ndarray data:
    :param iter(Tensor) parents:
    :param callable backward_rule:
    :param str op:
    :return Tensor:
    """
    data = np.asarray(data, dtype=np.float64)
    check_finite(data, op)
    parents = tuple(parents)

    if not any(parent.requires_grad for parent in parents):
        return Tensor(data, op=op)

    return Tensor(data, requires_grad=True, parents=parents, backward_rule=backward_rule, op=op)


def _topological_order(root):
    order = []
    visited = set()
    stack = [(root, False)]

    while stack:
        node, expanded = stack.pop()

        if expanded:
            order.append(node)
            continue

        if id(node) in visited:
            continue

        visited.add(id(node))
        stack.append((node, True))

        for parent in node.parents:
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))

    return order


def backward(loss):
    """Propagate the gradient of a scalar loss to every leaf tensor that requires gradients. Gradients accumulate into
    the leaves' `grad` attribute; clearing them beforehand is the caller's job (see `zero_grads`).

    :param Tensor loss:
    :raise dnsgt.exceptions.NotScalar: if the loss has more than one element
    :return None:
    """
    if loss.size != 1:
        raise NotScalar(f"Backward needs a scalar loss; received shape {loss.shape}.")

    if not loss.requires_grad:
        return

    gradients = {id(loss): np.ones_like(loss.data)}

    for node in reversed(_topological_order(loss)):
        gradient = gradients.pop(id(node), None)

        if gradient is None:
            continue

        if node.is_leaf:
            node.grad = gradient.copy() if node.grad is None else node.grad + gradient
            continue

        for parent, parent_gradient in zip(node.parents, node.backward_rule(gradient)):
            if parent_gradient is None or not parent.requires_grad:
                continue

            if id(parent) in gradients:
                gradients[id(parent)] = gradients[id(parent)] + parent_gradient
            else:
                gradients[id(parent)] = parent_gradient


def zero_grads(parameters):
    """Clear the gradients of the given parameters.

    :param iter(Tensor) parameters:
    :return None:
    """
    for parameter in parameters:
        parameter.grad = None
