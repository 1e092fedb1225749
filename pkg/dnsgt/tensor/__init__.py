from . import functional
from .gradcheck import GradCheckReport, grad_check
from .optim import Adam
from .tensor import Parameter, Tensor, as_tensor, backward, zero_grads


__all__ = (
    "Adam",
    "GradCheckReport",
    "Parameter",
    "Tensor",
    "as_tensor",
    "backward",
    "functional",
    "grad_check",
    "zero_grads",
)
