"""Pure-numpy kernels for the dense-network hot path.

Mirrors the signatures of the compiled ``_mlpcore`` extension; one of the
two is selected at import time by ``hrisac.nn._backend``.
"""

import numpy as np


def dense_forward(x, w, bias):
    """(B, din) @ (dout, din)^T + bias -> (B, dout)."""
    return x @ w.T + bias


def relu(z):
    return np.maximum(z, 0.0)


def tanh_act(z):
    return np.tanh(z)


def dense_backward_params(x, dout):
    """Gradients of weights and bias: (dout^T @ x, column sums)."""
    return dout.T @ x, dout.sum(axis=0)


def dense_backward_input(dout, w):
    return dout @ w


def relu_backward(dout, z):
    return dout * (z > 0.0)


def tanh_backward(dout, y):
    """y is the forward tanh output."""
    return dout * (1.0 - y * y)


def adam_update(param, grad, m, v, t, lr, beta1, beta2, eps):
    """One bias-corrected moment update, in place on param/m/v."""
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * (grad * grad)
    m_hat = m / (1.0 - beta1 ** t)
    v_hat = v / (1.0 - beta2 ** t)
    param -= lr * m_hat / (np.sqrt(v_hat) + eps)


def blend(dst, src, tau):
    """dst <- (1 - tau) * dst + tau * src, in place."""
    dst *= (1.0 - tau)
    dst += tau * src
