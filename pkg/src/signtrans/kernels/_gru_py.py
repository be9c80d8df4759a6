"""Pure-numpy GRU sequence kernels (fallback backend).

The gate equations, with xp holding the precomputed input projections
(x @ [Wz | Wr | Wh] + b) for the whole sequence:

    z_t = sigmoid(xp_z[t] + h_{t-1} Uz)
    r_t = sigmoid(xp_r[t] + h_{t-1} Ur)
    hc_t = tanh(xp_h[t] + (r_t * h_{t-1}) Uh)
    h_t = (1 - z_t) * h_{t-1} + z_t * hc_t

The forward returns every gate activation so the backward pass can run
truncated-free BPTT without recomputation.
"""

from __future__ import annotations

import numpy as np


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # numerically safe for large |x|
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def gru_forward(xp, h0, uz, ur, uh):
    """Run the gate recurrence over a whole sequence.

    xp: (T, B, 3H) input preactivations; h0: (B, H); uz/ur/uh: (H, H).
    Returns (hs, zs, rs, hcs), each (T, B, H).
    """
    T, B, H3 = xp.shape
    H = H3 // 3
    hs = np.empty((T, B, H), dtype=xp.dtype)
    zs = np.empty_like(hs)
    rs = np.empty_like(hs)
    hcs = np.empty_like(hs)
    h = h0
    for t in range(T):
        z = _sigmoid(xp[t, :, :H] + h @ uz)
        r = _sigmoid(xp[t, :, H : 2 * H] + h @ ur)
        hc = np.tanh(xp[t, :, 2 * H :] + (r * h) @ uh)
        h = (1.0 - z) * h + z * hc
        zs[t] = z
        rs[t] = r
        hcs[t] = hc
        hs[t] = h
    return hs, zs, rs, hcs


def gru_backward(h0, hs, zs, rs, hcs, uz, ur, uh, d_hs):
    """BPTT through the recurrence.

    d_hs: (T, B, H) upstream gradient on every hidden state.
    Returns (d_xp, d_h0, d_uz, d_ur, d_uh).
    """
    T, B, H = hs.shape
    d_xp = np.empty((T, B, 3 * H), dtype=hs.dtype)
    d_uz = np.zeros_like(uz)
    d_ur = np.zeros_like(ur)
    d_uh = np.zeros_like(uh)
    dh = np.zeros((B, H), dtype=hs.dtype)
    for t in range(T - 1, -1, -1):
        dht = d_hs[t] + dh
        h_prev = hs[t - 1] if t > 0 else h0
        z, r, hc = zs[t], rs[t], hcs[t]
        dz = dht * (hc - h_prev) * z * (1.0 - z)
        dhc = dht * z * (1.0 - hc * hc)
        da = dhc @ uh.T  # gradient w.r.t. (r * h_prev)
        dr = da * h_prev * r * (1.0 - r)
        dh = dht * (1.0 - z) + da * r + dz @ uz.T + dr @ ur.T
        d_xp[t, :, :H] = dz
        d_xp[t, :, H : 2 * H] = dr
        d_xp[t, :, 2 * H :] = dhc
        d_uz += h_prev.T @ dz
        d_ur += h_prev.T @ dr
        d_uh += (r * h_prev).T @ dhc
    return d_xp, dh, d_uz, d_ur, d_uh
