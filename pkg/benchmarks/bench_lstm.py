"""Benchmark the compiled LSTM kernel against the pure-numpy fallback.

Times one forward+backward pass through a single LSTM direction across a
grid of sequence lengths and hidden sizes, mirroring the shapes the
parser and tagger training loops produce.

Usage: python benchmarks/bench_lstm.py [--repeats 50] [--dtype f32|f64]
"""

import argparse
import time

import numpy as np

from morphoparse import _lstm_numpy

try:
    from morphoparse import _lstm_fast
except ImportError:
    _lstm_fast = None


def bench_one(impl, T, D, H, dtype, repeats):
    rng = np.random.default_rng(0)
    x = rng.standard_normal((T, D)).astype(dtype)
    w_ih = (rng.standard_normal((D, 4 * H)) * 0.3).astype(dtype)
    w_hh = (rng.standard_normal((H, 4 * H)) * 0.3).astype(dtype)
    b = np.zeros(4 * H, dtype=dtype)
    dh = rng.standard_normal((T, H)).astype(dtype)
    xw = x @ w_ih
    # warmup
    h, acts, cells, tanhc = impl.recurrent_forward(xw, w_hh, b, False)
    impl.recurrent_backward(acts, cells, tanhc, w_hh, dh, False)
    start = time.perf_counter()
    for _ in range(repeats):
        h, acts, cells, tanhc = impl.recurrent_forward(xw, w_hh, b, False)
        dz = impl.recurrent_backward(acts, cells, tanhc, w_hh, dh, False)
        dz @ w_ih.T            # the gemms the layer wrapper performs
        x.T @ dz
    return (time.perf_counter() - start) / repeats


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=50)
    ap.add_argument("--dtype", choices=["f32", "f64"], default="f32")
    args = ap.parse_args()
    dtype = np.float32 if args.dtype == "f32" else np.float64

    grid = [(10, 64, 64), (20, 128, 128), (20, 430, 400), (40, 430, 400)]
    print(f"dtype={args.dtype} repeats={args.repeats}")
    header = f"{'T':>4} {'D':>5} {'H':>5} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for T, D, H in grid:
        t_np = bench_one(_lstm_numpy, T, D, H, dtype, args.repeats) * 1e3
        if _lstm_fast is not None:
            t_cy = bench_one(_lstm_fast, T, D, H, dtype, args.repeats) * 1e3
            print(f"{T:>4} {D:>5} {H:>5} {t_np:>10.3f} {t_cy:>10.3f} {t_np / t_cy:>7.1f}x")
        else:
            print(f"{T:>4} {D:>5} {H:>5} {t_np:>10.3f} {'n/a':>10} {'n/a':>8}")


if __name__ == "__main__":
    main()
