"""Central-difference verification of analytic gradients."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor, backward


def grad_check(f: Callable[[], Tensor], params: Sequence[Tensor],
               h: float = 1e-5) -> float:
    """Compare analytic gradients of a scalar function against central
    differences (f(x+h) - f(x-h)) / 2h, perturbing every parameter entry.

    ``f`` must be deterministic (disable dropout) and rebuild its graph on
    every call.  Returns the worst normalized error
    |analytic - numeric| / max(1, |analytic|, |numeric|).
    """
    params = list(params)
    for p in params:
        p.zero_grad()
    loss = f()
    backward(loss)
    analytic = [np.zeros_like(p.data) if p.grad is None else p.grad.copy()
                for p in params]

    worst = 0.0
    for p, ga in zip(params, analytic):
        flat = p.data.reshape(-1)
        gflat = ga.reshape(-1)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + h
            f_plus = float(f().data)
            flat[i] = keep - h
            f_minus = float(f().data)
            flat[i] = keep
            numeric = (f_plus - f_minus) / (2.0 * h)
            err = abs(gflat[i] - numeric) / max(1.0, abs(gflat[i]), abs(numeric))
            worst = max(worst, err)
    for p in params:
        p.zero_grad()
    return worst
