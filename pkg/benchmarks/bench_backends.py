"""Compare the compiled kernel backend against the pure-Python fallback.

Runs the dense and recurrent forward/backward kernels at a few
representative shapes and reports per-call wall time for both backends
plus the speedup. The numbers cover exactly the operations the training
loops spend their time in.

Usage: python benchmarks/bench_backends.py [--repeats 200]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from aoiplan.nnet import _kern_py

try:
    from aoiplan.nnet import _kern_cy
except ImportError:
    _kern_cy = None


def _time(fn, repeats: int) -> float:
    fn()  # warm up
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def bench_dense(mod, batch: int, sizes: tuple[int, ...], repeats: int) -> tuple[float, float]:
    rng = np.random.default_rng(0)
    ws = [rng.standard_normal((sizes[i + 1], sizes[i])) for i in range(len(sizes) - 1)]
    bs = [rng.standard_normal(sizes[i + 1]) for i in range(len(sizes) - 1)]
    kinds = [1] * (len(sizes) - 2) + [0]
    x = rng.standard_normal((batch, sizes[0]))
    out, acts = mod.dense_forward(x, ws, bs, kinds)
    dy = rng.standard_normal(out.shape)
    fwd = _time(lambda: mod.dense_forward(x, ws, bs, kinds), repeats)
    bwd = _time(lambda: mod.dense_backward(ws, kinds, acts, dy), repeats)
    return fwd, bwd


def bench_lstm(mod, steps: int, input_size: int, hidden: int, repeats: int) -> tuple[float, float]:
    rng = np.random.default_rng(0)
    wg = rng.standard_normal((4 * hidden, hidden + input_size)) * 0.2
    bg = rng.standard_normal(4 * hidden) * 0.1
    xs = rng.standard_normal((steps, input_size))
    h0 = np.zeros(hidden)
    c0 = np.zeros(hidden)
    hs, cs, gates = mod.lstm_seq_forward(wg, bg, xs, h0, c0)
    dh = rng.standard_normal(hidden)
    dc = np.zeros(hidden)
    fwd = _time(lambda: mod.lstm_seq_forward(wg, bg, xs, h0, c0), repeats)
    bwd = _time(
        lambda: mod.lstm_seq_backward(wg, xs, hs, cs, gates, None, dh, dc), repeats
    )
    return fwd, bwd


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    if _kern_cy is None:
        print("compiled backend unavailable; showing pure-Python timings only")
    backends = [("py", _kern_py)] + ([("ext", _kern_cy)] if _kern_cy else [])

    print(f"{'case':<34} " + " ".join(f"{name + ' (us)':>12}" for name, _ in backends)
          + ("  speedup" if _kern_cy else ""))
    dense_cases = [(32, (3, 64, 3)), (32, (16, 64, 64, 17)), (256, (16, 128, 17))]
    for batch, sizes in dense_cases:
        for label, idx in (("fwd", 0), ("bwd", 1)):
            row = [bench_dense(mod, batch, sizes, args.repeats)[idx] for _, mod in backends]
            name = f"dense {sizes} b={batch} {label}"
            cells = " ".join(f"{v * 1e6:12.1f}" for v in row)
            speed = f"  {row[0] / row[-1]:6.2f}x" if len(row) == 2 else ""
            print(f"{name:<34} {cells}{speed}")
    lstm_cases = [(5, 3, 8), (20, 4, 16), (50, 8, 32)]
    for steps, d_in, hidden in lstm_cases:
        for label, idx in (("fwd", 0), ("bwd", 1)):
            row = [bench_lstm(mod, steps, d_in, hidden, args.repeats)[idx] for _, mod in backends]
            name = f"lstm T={steps} d={d_in} k={hidden} {label}"
            cells = " ".join(f"{v * 1e6:12.1f}" for v in row)
            speed = f"  {row[0] / row[-1]:6.2f}x" if len(row) == 2 else ""
            print(f"{name:<34} {cells}{speed}")


if __name__ == "__main__":
    main()
