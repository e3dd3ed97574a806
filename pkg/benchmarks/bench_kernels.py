"""Compare the compiled gate kernel against the pure-python fallback.

Usage: python benchmarks/bench_kernels.py [repeats]
"""

import sys
import time

import numpy as np

from qhrolab._kernels import BACKEND, apply_gate
from qhrolab._kernels._fallback import apply_gate as apply_gate_py


def bench(fn, vec, gate, targets, n, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(vec, gate, targets, n)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 7
    rng = np.random.default_rng(0)
    print(f"active backend: {BACKEND}")
    print(f"{'n':>3} {'gate':>5} {'compiled':>12} {'fallback':>12} {'speedup':>8}")
    for n, k in [(10, 1), (12, 2), (14, 2), (16, 3), (18, 2)]:
        vec = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
        vec /= np.linalg.norm(vec)
        g = rng.standard_normal((2**k, 2**k)) + 1j * rng.standard_normal((2**k, 2**k))
        q, _ = np.linalg.qr(g)
        targets = list(range(k))
        a = apply_gate(vec, q, targets, n)
        b = apply_gate_py(vec, q, targets, n)
        assert np.max(np.abs(a - b)) < 1e-10, "backends disagree"
        tc = bench(apply_gate, vec, q, targets, n, repeats)
        tp = bench(apply_gate_py, vec, q, targets, n, repeats)
        print(f"{n:>3} {2**k:>4}x{2**k} {tc*1e3:>10.3f}ms {tp*1e3:>10.3f}ms {tp/tc:>7.2f}x")


if __name__ == "__main__":
    main()
