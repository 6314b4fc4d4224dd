"""
Finite-difference checks of analytic gradients.
"""

import numpy as np

from signet.nn import NonFiniteGradientError


def grad_check(model, inputs, targets, eps=1e-5, sample=None, seed=0):
    """
    Largest relative difference between the analytic gradient and the
    central difference `(L(p + eps) - L(p - eps)) / (2 eps)` over all
    parameter entries (or `sample` random entries per parameter). The
    relative difference of `a` and `n` is `|a - n| / max(|a|, |n|, 1e-8)`.
    """
    _, grads = model.loss_and_grads(inputs, targets)
    for name, g in grads.items():
        if not np.isfinite(g).all():
            raise NonFiniteGradientError(f"Gradient of {name} is not finite")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for name, p in model.params().items():
        flat = p.reshape(-1)
        entries = np.arange(flat.size)
        if sample is not None and sample < flat.size:
            entries = np.sort(rng.choice(flat.size, size=sample, replace=False))
        analytic = grads[name].reshape(-1)
        for i in entries.tolist():
            saved = flat[i]
            flat[i] = saved + eps
            up = model.loss(inputs, targets)
            flat[i] = saved - eps
            down = model.loss(inputs, targets)
            flat[i] = saved
            numeric = (up - down) / (2 * eps)
            if not np.isfinite(numeric):
                raise NonFiniteGradientError(f"Finite difference of {name}[{i}] is not finite")
            a = analytic[i]
            worst = max(worst, abs(a - numeric) / max(abs(a), abs(numeric), 1e-8))
    return worst
