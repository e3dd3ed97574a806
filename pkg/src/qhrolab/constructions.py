"""Keyed constructions over a common oracle unitary.

Each construction exists in two forms: a concrete matrix (given a sampled U
and an integer key) and an oracle descriptor interpreted by the harness as a
sequence of recording steps and key-controlled Pauli layers for exact
purified simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import StateVector, UnitaryMatrix, apply_unitary, basis_state, pauli_string
from .relstate import CFParams

__all__ = [
    "OracleDescriptor",
    "pru_two_query",
    "pru_one_query",
    "haar_slot",
    "concrete_oracle",
    "prs_output",
    "prfs_output",
    "spru",
    "spru_concrete",
    "stretch_output_qubits",
    "stretch_key_bits",
    "gluing_bound",
]


@dataclass(frozen=True)
class OracleDescriptor:
    """A keyed oracle as a sequence of steps applied left to right.

    Steps: ('pr', slot) one recording query; ('cfpr', slot, CFParams) a
    collision-free recording query; ('pauli', 'X'|'Z') a key-controlled
    Pauli layer on the lam-bit register prefix. `shared_slots` lists the
    label slots whose joint image/collision-freeness every recording step
    respects (defaults to each step's own slot).
    """

    n: int
    lam: int = 0
    steps: tuple = ()
    key_slot: int | None = None
    shared_slots: tuple | None = None
    label: str = ""

    def record_slots(self):
        return tuple(s[1] for s in self.steps if s[0] in ("pr", "cfpr"))

    def to_json_dict(self):
        enc = []
        for s in self.steps:
            if s[0] == "cfpr":
                enc.append(["cfpr", s[1], [s[2].fold, s[2].prefix, s[2].n]])
            else:
                enc.append(list(s))
        return {
            "n": self.n,
            "lam": self.lam,
            "steps": enc,
            "key_slot": self.key_slot,
            "shared_slots": list(self.shared_slots) if self.shared_slots else None,
            "label": self.label,
        }


def pru_two_query(n: int, lam: int, slot: int = 0, shared_slots=None) -> OracleDescriptor:
    """U (X^k tensor I) U: two queries to the common oracle per call."""
    if lam > n or lam < 1:
        raise ValueError("key length must satisfy 1 <= lam <= n")
    return OracleDescriptor(
        n=n,
        lam=lam,
        steps=(("pr", slot), ("pauli", "X"), ("pr", slot)),
        shared_slots=tuple(shared_slots) if shared_slots else None,
        label="two-query keyed oracle",
    )


def pru_one_query(n: int, lam: int, slot: int = 0, cf: CFParams | None = None, shared_slots=None) -> OracleDescriptor:
    """(Z^k tensor I) U: a single query followed by a key phase."""
    if lam > n:
        raise ValueError("key length exceeds register size")
    record = ("cfpr", slot, cf) if cf is not None else ("pr", slot)
    return OracleDescriptor(
        n=n,
        lam=lam,
        steps=(record, ("pauli", "Z")),
        shared_slots=tuple(shared_slots) if shared_slots else None,
        label="one-query keyed oracle",
    )


def haar_slot(n: int, slot: int = 0, cf: CFParams | None = None, shared_slots=None) -> OracleDescriptor:
    """The bare common oracle (one recording query, no key layers)."""
    record = ("cfpr", slot, cf) if cf is not None else ("pr", slot)
    return OracleDescriptor(
        n=n,
        steps=(record,),
        shared_slots=tuple(shared_slots) if shared_slots else None,
        label="bare oracle",
    )


def concrete_oracle(desc: OracleDescriptor, u: UnitaryMatrix, k: int = 0) -> UnitaryMatrix:
    """Instantiate a descriptor as a matrix: recording steps become U."""
    if u.qubit_count != desc.n:
        raise ValueError("oracle register mismatch")
    mat = np.eye(2**desc.n, dtype=complex)
    for step in desc.steps:
        if step[0] in ("pr", "cfpr"):
            mat = u.entries @ mat
        elif step[0] == "pauli":
            mat = pauli_string(step[1], k, desc.lam, desc.n).entries @ mat
        else:
            raise ValueError(f"unknown step {step!r}")
    return UnitaryMatrix(mat, desc.n)


def prs_output(u: UnitaryMatrix, k: int, n: int, lam: int) -> StateVector:
    """U |k || 0^{n-lam}>."""
    if lam > n:
        raise ValueError("key length exceeds register size")
    if not 0 <= k < 2**lam:
        raise ValueError("key out of range")
    return apply_unitary(basis_state(n, k << (n - lam)), u)


def prfs_output(u: UnitaryMatrix, k: int, w: int, n: int, lam: int, m: int) -> StateVector:
    """U |k || w || 0^{n-lam-m}>."""
    if n < lam + m:
        raise ValueError("need n >= lam + m")
    if not 0 <= w < 2**m:
        raise ValueError("function input out of range")
    if not 0 <= k < 2**lam:
        raise ValueError("key out of range")
    x = (k << m | w) << (n - lam - m)
    return apply_unitary(basis_state(n, x), u)


@dataclass(frozen=True)
class SpruLayout:
    """Register bookkeeping for the two-block staircase composition."""

    n_block: int
    overlap: int
    lam_small: int
    total_qubits: int = field(init=False)

    def __post_init__(self):
        if not 0 < self.overlap < self.n_block:
            raise ValueError("overlap must satisfy 0 < overlap < n_block")
        total = 2 * self.n_block - self.overlap
        if total > 12:
            raise ValueError("joint register exceeds the 12-qubit cap")
        if self.lam_small > self.n_block:
            raise ValueError("inner key longer than a block")
        object.__setattr__(self, "total_qubits", total)

    @property
    def ab_qubits(self):
        return list(range(self.n_block))

    @property
    def bc_qubits(self):
        return list(range(self.n_block - self.overlap, self.total_qubits))


def spru(n_block: int, overlap: int, lam_small: int) -> SpruLayout:
    return SpruLayout(n_block, overlap, lam_small)


def spru_concrete(layout: SpruLayout, u: UnitaryMatrix, k: int, k1: int, k2: int) -> UnitaryMatrix:
    """Two keyed two-query blocks glued on the overlap register.

    Applies the AB block, an X^{k1} layer on AB, the AB block again, then the
    same staircase on BC with k2.
    """
    nb = layout.n_block
    if u.qubit_count != nb:
        raise ValueError("block unitary register mismatch")
    lam = max(layout.lam_small, 1)
    block = (u.entries @ pauli_string("X", k, lam, nb).entries @ u.entries)
    x1 = pauli_string("X", k1, lam, nb).entries
    x2 = pauli_string("X", k2, lam, nb).entries
    rest = 2 ** (layout.total_qubits - nb)
    ab = np.kron(block @ x1 @ block, np.eye(rest))
    bc = np.kron(np.eye(rest), block @ x2 @ block)
    return UnitaryMatrix(bc @ ab, layout.total_qubits)


def stretch_output_qubits(t: int, lam: int, rounds: int) -> int:
    """Register size after `rounds` doubling steps starting from t qubits."""
    b = math.ceil(math.log2(lam)) ** 2 if lam > 1 else 1
    if t <= b:
        raise ValueError("block must be smaller than the register")
    return (2**rounds) * (t - b) + b


def stretch_key_bits(lam: int, rounds: int) -> int:
    """Total key bits consumed: lam plus two fresh small keys per round."""
    l3 = math.ceil(math.log2(lam)) ** 3 if lam > 1 else 1
    return lam + 2 * rounds * l3


def gluing_bound(k: int, b_qubits: int) -> float:
    """Moment-closeness slack for gluing on a b-qubit overlap register."""
    return 5.0 * k * k / 2**b_qubits
