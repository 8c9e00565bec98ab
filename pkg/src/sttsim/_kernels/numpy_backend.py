"""Pure-numpy reference implementation of the learner kernels.

The contract shared with the compiled backend:

- forward_mlp: two ReLU hidden layers plus a linear output layer, returning
  all intermediate activations for the backward pass.
- adam_step: backpropagate an output-side gradient through the cached
  forward pass and apply one Adam ascent step to every parameter in place.
"""

from __future__ import annotations

import numpy as np


def forward_mlp(w0, b0, w1, b1, w2, b2, v):
    """Forward pass. Returns (h1, a1, h2, a2, o); o is the linear output."""
    h1 = w0 @ v + b0
    a1 = np.maximum(h1, 0.0)
    h2 = w1 @ a1 + b1
    a2 = np.maximum(h2, 0.0)
    o = w2 @ a2 + b2
    return h1, a1, h2, a2, o


def _adam_update(param, grad, m, v, lr, c1, c2, beta1, beta2, eps):
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    param += lr * (m / c1) / (np.sqrt(v / c2) + eps)


def adam_step(weights, biases, m_w, v_w, m_b, v_b, v_in, cache, go, lr, t,
              beta1=0.9, beta2=0.999, eps=1e-8):
    """Backward pass plus one in-place Adam ascent step.

    Args:
        weights: [w0, w1, w2] parameter matrices (updated in place).
        biases: [b0, b1, b2] bias vectors (updated in place).
        m_w, v_w, m_b, v_b: Adam moment buffers matching the parameters.
        v_in: network input of the cached forward pass.
        cache: (h1, a1, h2, a2) from forward_mlp.
        go: gradient of the objective with respect to the linear output.
        lr: learning rate.
        t: 1-based Adam step counter (bias correction).
        beta1, beta2, eps: Adam constants.
    """
    h1, a1, h2, a2 = cache
    w0, w1, w2 = weights
    c1 = 1.0 - beta1**t
    c2 = 1.0 - beta2**t

    ga2 = w2.T @ go
    gh2 = ga2 * (h2 > 0)
    ga1 = w1.T @ gh2
    gh1 = ga1 * (h1 > 0)

    _adam_update(w2, np.outer(go, a2), m_w[2], v_w[2], lr, c1, c2, beta1, beta2, eps)
    _adam_update(biases[2], go, m_b[2], v_b[2], lr, c1, c2, beta1, beta2, eps)
    _adam_update(w1, np.outer(gh2, a1), m_w[1], v_w[1], lr, c1, c2, beta1, beta2, eps)
    _adam_update(biases[1], gh2, m_b[1], v_b[1], lr, c1, c2, beta1, beta2, eps)
    _adam_update(w0, np.outer(gh1, v_in), m_w[0], v_w[0], lr, c1, c2, beta1, beta2, eps)
    _adam_update(biases[0], gh1, m_b[0], v_b[0], lr, c1, c2, beta1, beta2, eps)
