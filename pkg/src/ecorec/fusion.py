"""Modality projection and cross-modal fusion of pattern features.

Methods:

* ``sum``       -- PR = IF + TF
* ``concat``    -- PR = concat(raw_image, raw_text) @ W_c (bypasses projections)
* ``gated``     -- PR = sigmoid(gate modality) * other modality
* ``attention`` -- scalar scores s_m = tanh(F_m @ W_a) @ q, (alpha, beta) =
                   softmax(s_image, s_text), PR = alpha*IF + beta*TF

All forwards return (PR, cache); the matching backward maps dPR to gradients
of the projected inputs and the fusion parameters.
"""

import numpy as np

from .errors import ConfigError, DimensionError

METHODS = ("sum", "concat", "gated", "attention")
GATE_DIRECTIONS = ("image_gates_text", "text_gates_image")


def project_features(raw, w, b):
    """Linear spatial mapping raw @ w + b (no activation)."""
    if raw.shape[1] != w.shape[0]:
        raise DimensionError(f"raw dim {raw.shape[1]} does not match weight rows {w.shape[0]}")
    if w.shape[1] != b.shape[0]:
        raise DimensionError(f"weight cols {w.shape[1]} do not match bias length {b.shape[0]}")
    return raw @ w + b


def project_backward(raw, d_out):
    """Gradients of the projection w.r.t. weights and bias."""
    return raw.T @ d_out, d_out.sum(axis=0)


def sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def fuse_forward(method, ifeat, tfeat, raw_image, raw_text, params):
    """Fuse projected (and for concat, raw) modality features into PR rows.

    ``params`` holds the fusion tensors: ``W_concat`` for concat,
    ``W_attn``/``q_attn`` for attention, and the gate direction for gated.
    """
    if method == "sum":
        return ifeat + tfeat, None

    if method == "concat":
        w = params["W_concat"]
        cat = np.concatenate([raw_image, raw_text], axis=1)
        if cat.shape[1] != w.shape[0]:
            raise DimensionError(
                f"concat weight has {w.shape[0]} rows, raw dims sum to {cat.shape[1]}")
        return cat @ w, cat

    if method == "gated":
        gate_in = ifeat if params.get("gate_direction", "image_gates_text") == "image_gates_text" else tfeat
        modulated = tfeat if gate_in is ifeat else ifeat
        g = sigmoid(gate_in)
        return g * modulated, (g, gate_in is ifeat, modulated)

    if method == "attention":
        w, q = params["W_attn"], params["q_attn"]
        h_i = np.tanh(ifeat @ w)
        h_t = np.tanh(tfeat @ w)
        s = np.stack([h_i @ q, h_t @ q], axis=1)
        s_shift = s - s.max(axis=1, keepdims=True)
        ex = np.exp(s_shift)
        ab = ex / ex.sum(axis=1, keepdims=True)
        alpha, beta = ab[:, 0], ab[:, 1]
        pr = alpha[:, None] * ifeat + beta[:, None] * tfeat
        return pr, (h_i, h_t, alpha, beta)

    raise ConfigError(f"unknown fusion method {method!r} (expected one of {METHODS})")


def fuse_backward(method, d_pr, ifeat, tfeat, raw_image, raw_text, params, cache):
    """Map dPR to (d_ifeat, d_tfeat, param gradient dict)."""
    grads = {}
    if method == "sum":
        return d_pr, d_pr, grads

    if method == "concat":
        cat = cache
        grads["W_concat"] = cat.T @ d_pr
        return None, None, grads

    if method == "gated":
        g, image_is_gate, modulated = cache
        d_gate_in = d_pr * modulated * g * (1.0 - g)
        d_mod = d_pr * g
        if image_is_gate:
            return d_gate_in, d_mod, grads
        return d_mod, d_gate_in, grads

    if method == "attention":
        w, q = params["W_attn"], params["q_attn"]
        h_i, h_t, alpha, beta = cache
        d_alpha = np.einsum("pd,pd->p", d_pr, ifeat)
        d_beta = np.einsum("pd,pd->p", d_pr, tfeat)
        # 2-way softmax: ds_i = alpha*beta*(d_alpha - d_beta), ds_t = -ds_i
        ds_i = alpha * beta * (d_alpha - d_beta)
        ds_t = -ds_i
        dh_i = ds_i[:, None] * q[None, :] * (1.0 - h_i ** 2)
        dh_t = ds_t[:, None] * q[None, :] * (1.0 - h_t ** 2)
        grads["q_attn"] = h_i.T @ ds_i + h_t.T @ ds_t
        grads["W_attn"] = ifeat.T @ dh_i + tfeat.T @ dh_t
        d_if = alpha[:, None] * d_pr + dh_i @ w.T
        d_tf = beta[:, None] * d_pr + dh_t @ w.T
        return d_if, d_tf, grads

    raise ConfigError(f"unknown fusion method {method!r} (expected one of {METHODS})")
