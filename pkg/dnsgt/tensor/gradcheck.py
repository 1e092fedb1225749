import logging

import numpy as np

from dnsgt.tensor.tensor import backward


logger = logging.getLogger(__name__)

RELATIVE_ERROR_FLOOR = 1e-8


class GradCheckReport:
    """The comparison of an analytic gradient with its central-difference estimate.

    :param numpy.ndarray analytic:
    :param numpy.ndarray numeric:
    :param float tol:
    :return None:
    """

    def __init__(self, analytic, numeric, tol):
        self.analytic = analytic
        self.numeric = numeric
        self.tol = tol
        self.relative_errors = np.abs(analytic - numeric) / np.maximum(
            np.maximum(np.abs(analytic), np.abs(numeric)), RELATIVE_ERROR_FLOOR
        )

    def __repr__(self):
        return f"<GradCheckReport(max_relative_error={self.max_relative_error:.3e}, passed={self.passed})>"

    @property
    def max_relative_error(self):
        if self.relative_errors.size == 0:
            return 0.0
        return float(self.relative_errors.max())

    @property
    def passed(self):
        return self.max_relative_error < self.tol


def grad_check(f, x, h=1e-5, tol=1e-4):
    """Compare the gradient of a scalar function computed by backpropagation with central differences
    `(f(x + h e_i) - f(x - h e_i)) / 2h` for every coordinate of `x`. `x` is perturbed in place and restored.

    :param callable f: takes no arguments and returns a scalar tensor depending on `x`
    :param dnsgt.tensor.tensor.Tensor x: a leaf tensor requiring gradients
    :param float h:
    :param float tol: maximum accepted relative error
    :return GradCheckReport:
    """
    previous_gradient = x.grad
    x.grad = None
    backward(f())
    analytic = np.zeros(x.shape) if x.grad is None else x.grad.copy()
    x.grad = previous_gradient

    numeric = np.zeros(x.shape)
    flat_data = x.data.reshape(-1)
    flat_numeric = numeric.reshape(-1)

    for index in range(flat_data.size):
        original = flat_data[index]
        flat_data[index] = original + h
        forward = f().item()
        flat_data[index] = original - h
        backward_ = f().item()
        flat_data[index] = original
        flat_numeric[index] = (forward - backward_) / (2 * h)

    report = GradCheckReport(analytic, numeric, tol)
    logger.debug("Gradient check of %d coordinates: %r.", flat_data.size, report)
    return report
