"""Pure numpy kernels for the small dense and recurrent nets.

This is the fallback backend; the compiled module in _kern_cy.pyx exposes
the same functions with the same semantics. Keep the two in sync.
"""

from __future__ import annotations

import numpy as np

ACT_IDENTITY = 0
ACT_RELU = 1
ACT_SIGMOID = 2
ACT_TANH = 3


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def act_forward(kind: int, z: np.ndarray) -> np.ndarray:
    if kind == ACT_IDENTITY:
        return z.copy()
    if kind == ACT_RELU:
        return np.maximum(z, 0.0)
    if kind == ACT_SIGMOID:
        return _sigmoid(z)
    if kind == ACT_TANH:
        return np.tanh(z)
    raise ValueError(f"unknown activation kind {kind}")


def act_backward(kind: int, a: np.ndarray, da: np.ndarray) -> np.ndarray:
    """Gradient through an activation given its output a and upstream da."""
    if kind == ACT_IDENTITY:
        return da.copy()
    if kind == ACT_RELU:
        return da * (a > 0.0)
    if kind == ACT_SIGMOID:
        return da * a * (1.0 - a)
    if kind == ACT_TANH:
        return da * (1.0 - a * a)
    raise ValueError(f"unknown activation kind {kind}")


def dense_forward(
    x: np.ndarray, ws: list[np.ndarray], bs: list[np.ndarray], kinds: list[int]
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Forward pass through a fully connected stack.

    Returns the output and the list of layer activations starting with the
    input (needed by dense_backward).
    """
    acts = [np.asarray(x, dtype=np.float64)]
    a = acts[0]
    for w, b, kind in zip(ws, bs, kinds):
        z = a @ w.T + b
        a = act_forward(kind, z)
        acts.append(a)
    return a, acts


def dense_backward(
    ws: list[np.ndarray],
    kinds: list[int],
    acts: list[np.ndarray],
    dy: np.ndarray,
) -> tuple[list[np.ndarray], list[np.ndarray], np.ndarray]:
    """Backward pass matching dense_forward. Returns (dws, dbs, dx)."""
    num_layers = len(ws)
    dws: list[np.ndarray] = [None] * num_layers  # type: ignore[list-item]
    dbs: list[np.ndarray] = [None] * num_layers  # type: ignore[list-item]
    da = np.asarray(dy, dtype=np.float64)
    for layer in range(num_layers - 1, -1, -1):
        dz = act_backward(kinds[layer], acts[layer + 1], da)
        dws[layer] = dz.T @ acts[layer]
        dbs[layer] = dz.sum(axis=0)
        da = dz @ ws[layer]
    return dws, dbs, da


def lstm_seq_forward(
    wg: np.ndarray,
    bg: np.ndarray,
    xs: np.ndarray,
    h0: np.ndarray,
    c0: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run a gated recurrent cell over a sequence.

    wg stacks the four gate weight blocks [forget; input; candidate; output]
    over the concatenated (previous hidden, current input) vector. Returns
    hidden states hs (T+1, k with hs[0] = h0), cell states cs, and the
    post-activation gate values (T, 4k) for the backward pass.
    """
    t_len, d_in = xs.shape
    k = h0.size
    hs = np.empty((t_len + 1, k))
    cs = np.empty((t_len + 1, k))
    gates = np.empty((t_len, 4 * k))
    hs[0] = h0
    cs[0] = c0
    for t in range(t_len):
        z = np.concatenate([hs[t], xs[t]])
        pre = wg @ z + bg
        f = _sigmoid(pre[:k])
        r = _sigmoid(pre[k : 2 * k])
        cbar = np.tanh(pre[2 * k : 3 * k])
        o = _sigmoid(pre[3 * k :])
        c_new = f * cs[t] + r * cbar
        hs[t + 1] = o * np.tanh(c_new)
        cs[t + 1] = c_new
        gates[t, :k] = f
        gates[t, k : 2 * k] = r
        gates[t, 2 * k : 3 * k] = cbar
        gates[t, 3 * k :] = o
    return hs, cs, gates


def lstm_seq_backward(
    wg: np.ndarray,
    xs: np.ndarray,
    hs: np.ndarray,
    cs: np.ndarray,
    gates: np.ndarray,
    dhs: np.ndarray | None,
    dh_last: np.ndarray,
    dc_last: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Backpropagate through lstm_seq_forward.

    dhs carries per-step gradients on the hidden outputs (may be None);
    dh_last/dc_last are gradients on the final hidden and cell state.
    Returns (dwg, dbg, dh0, dc0, dxs).
    """
    t_len, d_in = xs.shape
    k = dh_last.size
    dwg = np.zeros_like(wg)
    dbg = np.zeros(4 * k)
    dxs = np.zeros_like(xs)
    dh = dh_last.copy()
    dc = dc_last.copy()
    for t in range(t_len - 1, -1, -1):
        if dhs is not None:
            dh = dh + dhs[t]
        f = gates[t, :k]
        r = gates[t, k : 2 * k]
        cbar = gates[t, 2 * k : 3 * k]
        o = gates[t, 3 * k :]
        tanh_c = np.tanh(cs[t + 1])
        do = dh * tanh_c
        dc = dc + dh * o * (1.0 - tanh_c * tanh_c)
        df = dc * cs[t]
        dr = dc * cbar
        dcbar = dc * r
        dc_prev = dc * f
        da = np.concatenate(
            [
                df * f * (1.0 - f),
                dr * r * (1.0 - r),
                dcbar * (1.0 - cbar * cbar),
                do * o * (1.0 - o),
            ]
        )
        z = np.concatenate([hs[t], xs[t]])
        dwg += np.outer(da, z)
        dbg += da
        dz = wg.T @ da
        dh = dz[:k]
        dc = dc_prev
        dxs[t] = dz[k:]
    return dwg, dbg, dh, dc, dxs
