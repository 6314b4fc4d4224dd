"""
Small neural-network kernels written directly against numpy.

Models in signet follow one protocol: `params()` returns a dictionary of
the live parameter arrays (optimizers update them in place), `loss(X, T)`
evaluates the mean training loss, and `loss_and_grads(X, T)` also returns
the gradient of that loss for every entry of `params()`. All arithmetic is
float64.
"""


class ShapeError(ValueError):
    pass


class DivergenceError(ArithmeticError):
    pass


class NonFiniteGradientError(ArithmeticError):
    pass
