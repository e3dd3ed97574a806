"""Pure-numpy gate application kernel.

Reference implementation; the compiled kernel in _core.pyx computes the same
thing. Qubit order is big-endian: qubit 0 is the most significant bit of the
basis index.
"""

import numpy as np

BACKEND = "python"


def apply_gate(vec, gate, targets, n):
    """Apply a 2^k x 2^k gate to the `targets` qubits of an n-qubit vector.

    Args:
        vec: complex amplitude vector of length 2^n
        gate: (2^k, 2^k) complex matrix; local index bit 0 (MSB) is targets[0]
        targets: list of distinct qubit indices (big-endian)
        n: total qubit count

    Returns:
        New vector of length 2^n.
    """
    k = len(targets)
    tens = np.asarray(vec, dtype=complex).reshape((2,) * n)
    tens = np.moveaxis(tens, targets, range(k))
    shape = tens.shape
    out = (np.asarray(gate, dtype=complex) @ tens.reshape(2**k, -1)).reshape(shape)
    out = np.moveaxis(out, range(k), targets)
    return out.reshape(2**n).copy()
