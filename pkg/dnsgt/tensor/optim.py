import logging

import numpy as np


logger = logging.getLogger(__name__)


class Adam:
    """The Adam optimiser with bias correction and optional clipping of the global gradient norm.

    :param list(dnsgt.tensor.tensor.Parameter) parameters:
    :param float lr:
    :param float beta1:
    :param float beta2:
    :param float eps:
    :param float|None clip_grad_norm: if given, gradients are rescaled so their global norm is at most this value
    :return None:
    """

    def __init__(self, parameters, lr=1e-4, beta1=0.9, beta2=0.999, eps=1e-8, clip_grad_norm=None):
        self.parameters = list(parameters)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.clip_grad_norm = clip_grad_norm
        self.step_count = 0
        self._first_moments = [np.zeros(parameter.shape) for parameter in self.parameters]
        self._second_moments = [np.zeros(parameter.shape) for parameter in self.parameters]

    def zero_grad(self):
        for parameter in self.parameters:
            parameter.grad = None

    def gradient_norm(self):
        """Get the global L2 norm of the current gradients.

        :return float:
        """
        squares = [float((parameter.grad**2).sum()) for parameter in self.parameters if parameter.grad is not None]
        return float(np.sqrt(sum(squares)))

    def step(self):
        """Update every parameter that has a gradient.

        :return None:
        """
        self.step_count += 1
        factor = 1.0

        if self.clip_grad_norm is not None:
            norm = self.gradient_norm()

            if norm > self.clip_grad_norm:
                factor = self.clip_grad_norm / norm
                logger.debug("Clipped the gradient norm from %.4g to %.4g.", norm, self.clip_grad_norm)

        bias_correction1 = 1 - self.beta1**self.step_count
        bias_correction2 = 1 - self.beta2**self.step_count

        for parameter, first, second in zip(self.parameters, self._first_moments, self._second_moments):
            if parameter.grad is None:
                continue

            gradient = parameter.grad * factor
            first *= self.beta1
            first += (1 - self.beta1) * gradient
            second *= self.beta2
            second += (1 - self.beta2) * gradient**2

            parameter.data -= self.lr * (first / bias_correction1) / (np.sqrt(second / bias_correction2) + self.eps)
