"""SGD with classic momentum and global gradient-norm clipping."""

from typing import Optional

import numpy as np

from ..errors import ModelShapeError
from .params import ModelParams


def clip_gradient(gradient: np.ndarray, max_norm: float) -> np.ndarray:
    """Rescale so the L2 norm is at most max_norm; max_norm <= 0 leaves it alone."""
    if max_norm <= 0:
        return gradient
    norm = float(np.linalg.norm(gradient))
    if norm > max_norm:
        return gradient * (max_norm / norm)
    return gradient


def sgd_step(
    params: ModelParams,
    gradient: np.ndarray,
    velocity: Optional[np.ndarray] = None,
    lr: float = 0.1,
    momentum: float = 0.9,
    weight_decay: float = 1e-4,
    max_grad_norm: float = 0.0,
):
    """v <- momentum*v + (clip(g) + weight_decay*theta); theta <- theta - lr*v. Returns (params, velocity)."""
    gradient = np.asarray(gradient, dtype=np.float64)
    if gradient.shape != params.theta.shape:
        raise ModelShapeError("Gradient shape mismatch", expected=params.theta.shape, got=gradient.shape)
    if velocity is None:
        velocity = np.zeros_like(params.theta)
    gradient = clip_gradient(gradient, max_grad_norm)
    velocity = momentum * velocity + gradient + weight_decay * params.theta
    theta = params.theta - lr * velocity
    return params.replace(theta=theta, version=params.version + 1), velocity


class SGD:
    """Stateful wrapper holding the momentum buffer between steps."""

    def __init__(self, lr: float = 0.1, momentum: float = 0.9, weight_decay: float = 1e-4, max_grad_norm: float = 0.0):
        self.lr = lr
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.max_grad_norm = max_grad_norm
        self.velocity: Optional[np.ndarray] = None

    def step(self, params: ModelParams, gradient: np.ndarray) -> ModelParams:
        params, self.velocity = sgd_step(
            params, gradient, self.velocity, self.lr, self.momentum, self.weight_decay, self.max_grad_norm
        )
        return params
