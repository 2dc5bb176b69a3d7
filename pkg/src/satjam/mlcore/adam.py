"""Adam optimizer with bias-corrected moments.

Given gradient g at step t:

    m <- beta1*m + (1-beta1)*g        mhat = m / (1 - beta1^t)
    v <- beta2*v + (1-beta2)*g^2      vhat = v / (1 - beta2^t)
    p <- p - lr * mhat / (sqrt(vhat) + eps)

so the very first update is lr * g / (|g| + eps), i.e. nearly a signed
step of size lr.
"""

import numpy as np

from ..errors import DomainError


class Adam:
    def __init__(self, lr: float = 1e-4, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        if lr <= 0:
            raise DomainError(f"lr must be > 0, got {lr}")
        if not (0 <= beta1 < 1 and 0 <= beta2 < 1):
            raise DomainError("betas must be in [0, 1)")
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: list[np.ndarray] | None = None
        self._v: list[np.ndarray] | None = None

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        """Update params in place from matching grads."""
        if len(params) != len(grads):
            raise DomainError("params and grads must pair up")
        if self._m is None:
            self._m = [np.zeros_like(p, dtype=np.float64) for p in params]
            self._v = [np.zeros_like(p, dtype=np.float64) for p in params]
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self._m, self._v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * np.square(g)
            p -= (self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)).astype(p.dtype)
