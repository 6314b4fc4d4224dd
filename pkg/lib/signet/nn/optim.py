"""
First-order optimizers. Both update the parameter arrays in place and keep
their state keyed by parameter name.
"""

import numpy as np

OPTIMIZERS = ("sgd", "adam")


class Sgd:
    def __init__(self, learning_rate=1e-3):
        self.learning_rate = learning_rate

    def step(self, params, grads):
        for name, p in params.items():
            p -= self.learning_rate * grads[name]


class Adam:
    def __init__(self, learning_rate=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {}
        self.v = {}

    def step(self, params, grads):
        self.t += 1
        correction1 = 1.0 - self.beta1**self.t
        correction2 = 1.0 - self.beta2**self.t
        for name, p in params.items():
            g = grads[name]
            m = self.m.setdefault(name, np.zeros_like(p))
            v = self.v.setdefault(name, np.zeros_like(p))
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + self.eps)


def make_optimizer(name, learning_rate):
    if name == "sgd":
        return Sgd(learning_rate)
    elif name == "adam":
        return Adam(learning_rate)
    raise ValueError(f"Unknown optimizer '{name}'")
