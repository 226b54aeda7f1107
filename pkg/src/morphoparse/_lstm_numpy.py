"""Pure-numpy LSTM recurrence, the portable fallback backend.

The layer wrapper batches the input projection (x @ w_ih) and the parameter
gradient reductions into single BLAS calls; these two functions cover only
the inherently sequential part.  Gate order inside the width-4H axis is
[input, forget, cell-candidate, output].
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def recurrent_forward(xw, w_hh, b, reverse=False):
    """Run the recurrence over precomputed input projections.

    xw: (T, 4H) rows of x_t @ w_ih; w_hh: (H, 4H); b: (4H,).
    Returns (h, acts, cells, tanhc), each stored at position t regardless
    of scan direction.  Initial hidden and cell states are zero.
    """
    T, four_h = xw.shape
    H = four_h // 4
    dtype = xw.dtype
    h = np.zeros((T, H), dtype=dtype)
    acts = np.empty((T, four_h), dtype=dtype)
    cells = np.empty((T, H), dtype=dtype)
    tanhc = np.empty((T, H), dtype=dtype)
    h_prev = np.zeros(H, dtype=dtype)
    c_prev = np.zeros(H, dtype=dtype)
    order = range(T - 1, -1, -1) if reverse else range(T)
    for t in order:
        z = xw[t] + h_prev @ w_hh + b
        i = _sigmoid(z[:H])
        f = _sigmoid(z[H:2 * H])
        g = np.tanh(z[2 * H:3 * H])
        o = _sigmoid(z[3 * H:])
        c = f * c_prev + i * g
        tc = np.tanh(c)
        acts[t, :H] = i
        acts[t, H:2 * H] = f
        acts[t, 2 * H:3 * H] = g
        acts[t, 3 * H:] = o
        cells[t] = c
        tanhc[t] = tc
        h[t] = o * tc
        h_prev = h[t]
        c_prev = c
    return h, acts, cells, tanhc


def recurrent_backward(acts, cells, tanhc, w_hh, dh_out, reverse=False):
    """Backpropagate through the recurrence.

    dh_out: (T, H) upstream gradients on the hidden states.  Returns the
    (T, 4H) gradients on the pre-activation gates; the caller turns those
    into dx, dw_ih, dw_hh and db with batched matrix products.
    """
    T, four_h = acts.shape
    H = four_h // 4
    dz = np.zeros((T, four_h), dtype=acts.dtype)
    dh_rec = np.zeros(H, dtype=acts.dtype)
    dc_rec = np.zeros(H, dtype=acts.dtype)
    idxs = list(range(T - 1, -1, -1)) if reverse else list(range(T))
    for k in range(T - 1, -1, -1):
        t = idxs[k]
        i = acts[t, :H]
        f = acts[t, H:2 * H]
        g = acts[t, 2 * H:3 * H]
        o = acts[t, 3 * H:]
        tc = tanhc[t]
        dh = dh_out[t] + dh_rec
        do = dh * tc
        dc = dh * o * (1.0 - tc * tc) + dc_rec
        c_prev = cells[idxs[k - 1]] if k > 0 else np.zeros(H, dtype=acts.dtype)
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dz[t, :H] = di * i * (1.0 - i)
        dz[t, H:2 * H] = df * f * (1.0 - f)
        dz[t, 2 * H:3 * H] = dg * (1.0 - g * g)
        dz[t, 3 * H:] = do * o * (1.0 - o)
        dh_rec = dz[t] @ w_hh.T
        dc_rec = dc * f
    return dz
