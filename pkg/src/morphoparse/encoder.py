"""LSTM sequence encoders.

Sentences are processed one at a time (no cross-sentence batching); a
layer's input is a (T, D) matrix and its output a (T, H) or (T, 2H)
matrix.  The recurrence itself runs in the selected kernels backend; this
module wraps it as a differentiable op and stacks layers/directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from . import kernels


class EncoderError(ValueError):
    pass


@dataclass
class LstmSpec:
    layers: int
    hidden: int
    bidirectional: bool
    input_dim: int

    def __post_init__(self):
        if self.layers < 1 or self.hidden < 1:
            raise EncoderError(f"bad LSTM spec: {self}")

    @property
    def output_dim(self) -> int:
        return self.hidden * (2 if self.bidirectional else 1)


def lstm_layer(x: ad.Value, w_ih: ad.Value, w_hh: ad.Value, b: ad.Value,
               reverse: bool = False) -> ad.Value:
    """One LSTM direction over a (T, D) input; zero initial states."""
    if x.data.ndim != 2 or x.shape[0] == 0:
        raise EncoderError(f"LSTM input must be a non-empty (T, D) matrix, got {x.shape}")
    if w_ih.shape[0] != x.shape[1] or w_ih.shape[1] != w_hh.shape[1] \
            or w_hh.shape[0] * 4 != w_hh.shape[1] or b.shape[0] != w_ih.shape[1]:
        raise ad.ShapeMismatch("lstm", x.shape, w_ih.shape, w_hh.shape, b.shape)
    xw = x.data @ w_ih.data
    h, acts, cells, tanhc = kernels.recurrent_forward(xw, w_hh.data, b.data, reverse)

    def bw(g):
        dz = kernels.recurrent_backward(acts, cells, tanhc, w_hh.data,
                                        np.ascontiguousarray(g), reverse)
        dx = dz @ w_ih.data.T
        dw_ih = x.data.T @ dz
        db = dz.sum(axis=0)
        h_prev = np.zeros_like(h)
        if reverse:
            h_prev[:-1] = h[1:]
        else:
            h_prev[1:] = h[:-1]
        dw_hh = h_prev.T @ dz
        return ((x, dx), (w_ih, dw_ih), (w_hh, dw_hh), (b, db))

    return ad.Value(h, op="lstm", parents=(x, w_ih, w_hh, b), backward=bw)


def init_lstm_direction(input_dim: int, hidden: int, rng: np.random.Generator,
                        dtype=np.float32, prefix: str = "lstm") -> dict[str, ad.Value]:
    """Uniform +-1/sqrt(hidden) weights; forget-gate bias starts at 1."""
    scale = 1.0 / np.sqrt(hidden)
    w_ih = rng.uniform(-scale, scale, (input_dim, 4 * hidden)).astype(dtype)
    w_hh = rng.uniform(-scale, scale, (hidden, 4 * hidden)).astype(dtype)
    b = np.zeros(4 * hidden, dtype=dtype)
    b[hidden:2 * hidden] = 1.0
    return {
        f"{prefix}.w_ih": ad.param(w_ih, name=f"{prefix}.w_ih"),
        f"{prefix}.w_hh": ad.param(w_hh, name=f"{prefix}.w_hh"),
        f"{prefix}.b": ad.param(b, name=f"{prefix}.b"),
    }


class LstmEncoder:
    """Stacked (optionally bidirectional) LSTM."""

    def __init__(self, spec: LstmSpec, rng: np.random.Generator, dtype=np.float32,
                 prefix: str = "enc"):
        self.spec = spec
        self.params: dict[str, ad.Value] = {}
        directions = ("fwd", "bwd") if spec.bidirectional else ("fwd",)
        in_dim = spec.input_dim
        for layer in range(spec.layers):
            for d in directions:
                self.params.update(init_lstm_direction(
                    in_dim, spec.hidden, rng, dtype,
                    prefix=f"{prefix}.l{layer}.{d}",
                ))
            in_dim = spec.output_dim
        self.prefix = prefix

    def forward(self, x: ad.Value) -> ad.Value:
        spec = self.spec
        out = x
        for layer in range(spec.layers):
            fwd = self._run(out, layer, "fwd", reverse=False)
            if spec.bidirectional:
                bwd = self._run(out, layer, "bwd", reverse=True)
                out = ad.concat([fwd, bwd], axis=-1)
            else:
                out = fwd
        return out

    def _run(self, x, layer, d, reverse):
        p = f"{self.prefix}.l{layer}.{d}"
        return lstm_layer(x, self.params[f"{p}.w_ih"], self.params[f"{p}.w_hh"],
                          self.params[f"{p}.b"], reverse=reverse)

    def named_parameters(self) -> dict[str, ad.Value]:
        return dict(self.params)


def lstm_forward(inputs, spec: LstmSpec, encoder: LstmEncoder) -> ad.Value:
    """Encode a sequence of per-token vectors (list of arrays or a (T, D)
    matrix) with an existing encoder's parameters."""
    if isinstance(inputs, ad.Value):
        x = inputs
    else:
        arr = np.asarray(inputs)
        if arr.ndim != 2:
            arr = np.stack(list(inputs))
        x = ad.const(arr)
    if x.shape[0] == 0:
        raise EncoderError("empty sequence")
    if x.shape[1] != spec.input_dim:
        raise ad.ShapeMismatch("lstm_forward", x.shape, (spec.input_dim,))
    return encoder.forward(x)


class InputLstm:
    """Optional extra unidirectional layer at the input level; its hidden
    state is concatenated onto each token's embedded vector."""

    def __init__(self, input_dim: int, hidden: int, rng: np.random.Generator,
                 dtype=np.float32, prefix: str = "inlstm"):
        self.hidden = hidden
        self.prefix = prefix
        self.params = init_lstm_direction(input_dim, hidden, rng, dtype, prefix=prefix)

    def forward(self, x: ad.Value) -> ad.Value:
        h = lstm_layer(x, self.params[f"{self.prefix}.w_ih"],
                       self.params[f"{self.prefix}.w_hh"],
                       self.params[f"{self.prefix}.b"], reverse=False)
        return ad.concat([x, h], axis=-1)

    def named_parameters(self) -> dict[str, ad.Value]:
        return dict(self.params)
