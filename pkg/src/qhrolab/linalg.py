"""Dense complex linear algebra substrate.

Conventions used throughout the package:

- big-endian qubit order: qubit 0 is the most significant bit of a basis
  index, so basis_state(2, 1) is |01>.
- registers are capped at QUBIT_CAP qubits per dense object.
- exact identities are checked at 1e-9 (1e-10 where stated); statistical
  assertions carry explicit sample counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import BACKEND, apply_gate

QUBIT_CAP = 14
VEC_QUBIT_CAP = 24  # pure vectors may be larger than matrix-backed objects

__all__ = [
    "QUBIT_CAP",
    "VEC_QUBIT_CAP",
    "BACKEND",
    "StateVector",
    "UnitaryMatrix",
    "DensityMatrix",
    "trial_rng",
    "basis_state",
    "haar_unitary",
    "pauli_string",
    "epr_state",
    "choi_state",
    "swap_test_prob",
    "partial_trace",
    "trace_distance",
    "mean_density",
    "apply_unitary",
    "tensor",
]


def trial_rng(master_seed: int, trial_index: int = 0) -> np.random.Generator:
    """Deterministic per-trial generator from (master_seed, trial_index)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=(int(master_seed), int(trial_index))))


def _check_cap(qubits: int) -> None:
    if qubits > QUBIT_CAP:
        raise ValueError(f"register of {qubits} qubits exceeds the {QUBIT_CAP}-qubit cap")


@dataclass(frozen=True)
class StateVector:
    """A dense pure state on `qubit_count` qubits."""

    amplitudes: np.ndarray
    qubit_count: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if self.qubit_count > VEC_QUBIT_CAP:
            raise ValueError(f"register of {self.qubit_count} qubits exceeds the {VEC_QUBIT_CAP}-qubit cap")
        if amps.ndim != 1 or amps.size != 2**self.qubit_count:
            raise ValueError("amplitude vector length must be 2^qubit_count")
        if not np.all(np.isfinite(amps)):
            raise ValueError("non-finite amplitudes")

    @classmethod
    def from_array(cls, amps) -> "StateVector":
        amps = np.asarray(amps, dtype=complex)
        n = int(round(math.log2(amps.size)))
        if 2**n != amps.size:
            raise ValueError("length is not a power of two")
        return cls(amps, n)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        nrm = self.norm()
        if nrm < 1e-12:
            raise ValueError("cannot normalize a zero vector")
        return StateVector(self.amplitudes / nrm, self.qubit_count)

    def density(self) -> "DensityMatrix":
        v = self.amplitudes
        return DensityMatrix(np.outer(v, v.conj()), self.qubit_count)

    def overlap(self, other: "StateVector") -> complex:
        if other.qubit_count != self.qubit_count:
            raise ValueError("dimension mismatch")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class UnitaryMatrix:
    """A dense unitary; qubit_count is None for non-power-of-two dimensions."""

    entries: np.ndarray
    qubit_count: int | None

    def __post_init__(self):
        mat = np.asarray(self.entries, dtype=complex)
        object.__setattr__(self, "entries", mat)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("unitary must be square")
        if self.qubit_count is not None:
            _check_cap(self.qubit_count)
            if mat.shape[0] != 2**self.qubit_count:
                raise ValueError("dimension must be 2^qubit_count")
        dev = np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])))
        if dev > 1e-9:
            raise ValueError(f"matrix is not unitary (deviation {dev:.2e})")

    @classmethod
    def from_array(cls, mat) -> "UnitaryMatrix":
        mat = np.asarray(mat, dtype=complex)
        d = mat.shape[0]
        n = int(round(math.log2(d)))
        return cls(mat, n if 2**n == d else None)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def dagger(self) -> "UnitaryMatrix":
        return UnitaryMatrix(self.entries.conj().T, self.qubit_count)

    def __matmul__(self, other: "UnitaryMatrix") -> "UnitaryMatrix":
        return UnitaryMatrix(self.entries @ other.entries, self.qubit_count)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian PSD matrix; trace 1 or a declared subnormalization."""

    entries: np.ndarray
    qubit_count: int

    def __post_init__(self):
        mat = np.asarray(self.entries, dtype=complex)
        object.__setattr__(self, "entries", mat)
        _check_cap(self.qubit_count)
        if mat.shape != (2**self.qubit_count, 2**self.qubit_count):
            raise ValueError("dimension must be 2^qubit_count")
        if np.max(np.abs(mat - mat.conj().T)) > 1e-9:
            raise ValueError("density matrix must be Hermitian")

    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))


def basis_state(n: int, x: int) -> StateVector:
    """Computational basis state |x> on n qubits (big-endian)."""
    if not 0 <= x < 2**n:
        raise ValueError(f"basis index {x} out of range for {n} qubits")
    amps = np.zeros(2**n, dtype=complex)
    amps[x] = 1.0
    return StateVector(amps, n)


def haar_unitary(dim: int, rng: np.random.Generator) -> UnitaryMatrix:
    """Haar sample via Ginibre + QR with diagonal phase correction.

    Plain QR is biased; multiplying Q by diag(r_ii/|r_ii|) makes the
    distribution exactly Haar.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(a)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return UnitaryMatrix.from_array(q)


def pauli_string(kind: str, k: int, lam: int, n: int) -> UnitaryMatrix:
    """X^k tensor I or Z^k tensor I on n qubits, key k on the lam-bit prefix."""
    if lam > n:
        raise ValueError("key length exceeds register size")
    if not 0 <= k < 2**lam:
        raise ValueError("key out of range")
    dim = 2**n
    mask = k << (n - lam)
    if kind == "X":
        mat = np.zeros((dim, dim), dtype=complex)
        idx = np.arange(dim)
        mat[idx ^ mask, idx] = 1.0
        return UnitaryMatrix(mat, n)
    if kind == "Z":
        idx = np.arange(dim)
        phases = (-1.0) ** np.array([bin(mask & y).count("1") for y in idx])
        return UnitaryMatrix(np.diag(phases.astype(complex)), n)
    raise ValueError(f"unknown Pauli kind {kind!r}")


def epr_state(n: int) -> StateVector:
    """|Omega> = 2^{-n/2} sum_x |x>|x> on 2n qubits."""
    if n < 1:
        raise ValueError("n must be >= 1")
    dim = 2**n
    amps = np.zeros(dim * dim, dtype=complex)
    amps[np.arange(dim) * dim + np.arange(dim)] = dim**-0.5
    return StateVector(amps, 2 * n)


def choi_state(u: UnitaryMatrix) -> StateVector:
    """|Phi_U> = (I tensor U)|Omega>; the left half stays untouched."""
    n = u.qubit_count
    if n is None:
        raise ValueError("Choi state needs a qubit-register unitary")
    omega = epr_state(n).amplitudes.reshape(2**n, 2**n)
    return StateVector((u.entries @ omega.T).T.reshape(-1), 2 * n)


def swap_test_prob(psi: StateVector, phi: StateVector) -> float:
    """SWAP-test acceptance probability (1 + |<psi|phi>|^2)/2."""
    if psi.qubit_count != phi.qubit_count:
        raise ValueError("dimension mismatch")
    return 0.5 * (1.0 + abs(psi.overlap(phi)) ** 2)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out every qubit not in `keep`; order of kept qubits preserved."""
    q = rho.qubit_count
    keep = list(keep)
    if any(not 0 <= i < q for i in keep) or len(set(keep)) != len(keep):
        raise ValueError("invalid qubit indices")
    drop = [i for i in range(q) if i not in keep]
    tens = rho.entries.reshape((2,) * (2 * q))
    for off, i in enumerate(sorted(drop)):
        ax = i - off
        tens = np.trace(tens, axis1=ax, axis2=ax + (q - off))
    # remaining axes follow the original relative order of kept qubits
    order = np.argsort(np.argsort(keep))
    kq = len(keep)
    tens = np.moveaxis(tens, list(range(kq)), list(order))
    tens = np.moveaxis(tens, list(range(kq, 2 * kq)), [kq + o for o in order])
    return DensityMatrix(tens.reshape(2**kq, 2**kq), kq)


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """TD(rho, sigma) = half the trace norm of the difference."""
    if rho.qubit_count != sigma.qubit_count:
        raise ValueError("dimension mismatch")
    eig = np.linalg.eigvalsh(rho.entries - sigma.entries)
    return float(0.5 * np.sum(np.abs(eig)))


def mean_density(samples) -> DensityMatrix:
    """(1/M) sum |psi_i><psi_i| over a non-empty equal-dimension sample."""
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one sample")
    q = samples[0].qubit_count
    acc = np.zeros((2**q, 2**q), dtype=complex)
    for s in samples:
        if s.qubit_count != q:
            raise ValueError("dimension mismatch")
        acc += np.outer(s.amplitudes, s.amplitudes.conj())
    return DensityMatrix(acc / len(samples), q)


def apply_unitary(state: StateVector, u: UnitaryMatrix, targets=None) -> StateVector:
    """Apply u to the given target qubits (defaults to the whole register)."""
    n = state.qubit_count
    if targets is None:
        targets = list(range(n))
    targets = list(targets)
    if u.entries.shape[0] != 2 ** len(targets):
        raise ValueError("gate size does not match target count")
    out = apply_gate(state.amplitudes, u.entries, targets, n)
    return StateVector(out, n)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    return StateVector(np.kron(a.amplitudes, b.amplitudes), a.qubit_count + b.qubit_count)
