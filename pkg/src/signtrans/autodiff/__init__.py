from .tensor import (
    Parameter,
    Tensor,
    add,
    backward,
    concat,
    cross_entropy,
    dropout,
    embedding_lookup,
    expand,
    gru_sequence,
    layer_norm,
    log_softmax,
    masked_fill,
    matmul,
    multiply,
    no_grad,
    reduce_mean,
    reduce_sum,
    relu,
    reshape,
    scale,
    sigmoid,
    slice_axis0,
    softmax,
    tanh,
    transpose,
)
from .gradcheck import grad_check

__all__ = [
    "Parameter", "Tensor", "add", "backward", "concat", "cross_entropy",
    "dropout", "embedding_lookup", "expand", "grad_check", "gru_sequence",
    "layer_norm", "log_softmax", "masked_fill", "matmul", "multiply",
    "no_grad", "reduce_mean", "reduce_sum", "relu", "reshape", "scale",
    "sigmoid", "slice_axis0", "softmax", "tanh", "transpose",
]
