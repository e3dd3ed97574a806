"""Keyed constructions: descriptor/matrix agreement and register bookkeeping."""

import numpy as np
import pytest

from qhrolab.constructions import (
    concrete_oracle,
    gluing_bound,
    haar_slot,
    prfs_output,
    prs_output,
    pru_one_query,
    pru_two_query,
    spru,
    spru_concrete,
    stretch_key_bits,
    stretch_output_qubits,
)
from qhrolab.linalg import UnitaryMatrix, basis_state, haar_unitary, pauli_string, trial_rng
from qhrolab.relstate import CFParams


def test_two_query_concrete_matrix():
    rng = trial_rng(1)
    n, lam = 3, 2
    u = haar_unitary(2**n, rng)
    desc = pru_two_query(n, lam)
    for k in (0, 3):
        g = concrete_oracle(desc, u, k)
        expect = u.entries @ pauli_string("X", k, lam, n).entries @ u.entries
        assert np.max(np.abs(g.entries - expect)) < 1e-10
    with pytest.raises(ValueError):
        pru_two_query(2, 3)
    with pytest.raises(ValueError):
        pru_two_query(2, 0)


def test_one_query_concrete_matrix():
    rng = trial_rng(2)
    n, lam = 2, 2
    u = haar_unitary(2**n, rng)
    desc = pru_one_query(n, lam)
    g = concrete_oracle(desc, u, 1)
    expect = pauli_string("Z", 1, lam, n).entries @ u.entries
    assert np.max(np.abs(g.entries - expect)) < 1e-10
    with pytest.raises(ValueError):
        pru_one_query(2, 3)


def test_haar_slot_concrete_is_u():
    rng = trial_rng(3)
    u = haar_unitary(4, rng)
    g = concrete_oracle(haar_slot(2), u)
    assert np.max(np.abs(g.entries - u.entries)) < 1e-12
    with pytest.raises(ValueError):
        concrete_oracle(haar_slot(3), u)


def test_descriptor_metadata():
    cf = CFParams(1, 2, 2)
    desc = pru_one_query(2, 2, slot=1, cf=cf)
    assert desc.record_slots() == (1,)
    d = desc.to_json_dict()
    assert d["steps"][0] == ["cfpr", 1, [1, 2, 2]]
    assert d["steps"][1] == ["pauli", "Z"]
    assert pru_two_query(3, 2).record_slots() == (0, 0)


def test_prs_output_column():
    rng = trial_rng(4)
    n, lam = 3, 2
    u = haar_unitary(2**n, rng)
    for k in range(4):
        out = prs_output(u, k, n, lam)
        assert np.max(np.abs(out.amplitudes - u.entries[:, k << (n - lam)])) < 1e-12
    with pytest.raises(ValueError):
        prs_output(u, 4, n, lam)
    with pytest.raises(ValueError):
        prs_output(u, 0, 2, 3)


def test_prfs_output_column():
    rng = trial_rng(5)
    n, lam, m = 4, 2, 1
    u = haar_unitary(2**n, rng)
    out = prfs_output(u, 2, 1, n, lam, m)
    x = (2 << m | 1) << (n - lam - m)
    assert np.max(np.abs(out.amplitudes - u.entries[:, x])) < 1e-12
    with pytest.raises(ValueError):
        prfs_output(u, 0, 0, 2, 1, 2)
    with pytest.raises(ValueError):
        prfs_output(u, 0, 2, n, lam, m)


def test_spru_layout():
    lay = spru(3, 1, 2)
    assert lay.total_qubits == 5
    assert lay.ab_qubits == [0, 1, 2]
    assert lay.bc_qubits == [2, 3, 4]
    with pytest.raises(ValueError):
        spru(3, 0, 1)
    with pytest.raises(ValueError):
        spru(3, 3, 1)
    with pytest.raises(ValueError):
        spru(8, 1, 1)
    with pytest.raises(ValueError):
        spru(3, 1, 4)


def test_spru_concrete_zero_keys():
    # with all keys zero each arm collapses to u^4 on its block
    rng = trial_rng(6)
    lay = spru(2, 1, 1)
    u = haar_unitary(4, rng)
    w = spru_concrete(lay, u, 0, 0, 0)
    p4 = np.linalg.matrix_power(u.entries, 4)
    expect = np.kron(np.eye(2), p4) @ np.kron(p4, np.eye(2))
    assert np.max(np.abs(w.entries - expect)) < 1e-9
    with pytest.raises(ValueError):
        spru_concrete(lay, haar_unitary(8, rng), 0, 0, 0)


def test_spru_concrete_keyed_arm():
    rng = trial_rng(7)
    lay = spru(2, 1, 1)
    u = haar_unitary(4, rng)
    w = spru_concrete(lay, u, 1, 1, 0)
    block = u.entries @ pauli_string("X", 1, 1, 2).entries @ u.entries
    x1 = pauli_string("X", 1, 1, 2).entries
    arm_ab = block @ x1 @ block
    arm_bc = block @ block
    expect = np.kron(np.eye(2), arm_bc) @ np.kron(arm_ab, np.eye(2))
    assert np.max(np.abs(w.entries - expect)) < 1e-9


def test_stretch_arithmetic():
    assert stretch_output_qubits(8, 4, 2) == 20
    assert stretch_output_qubits(8, 4, 0) == 8
    assert stretch_key_bits(4, 2) == 36
    assert stretch_key_bits(1, 3) == 7
    with pytest.raises(ValueError):
        stretch_output_qubits(4, 4, 1)


def test_gluing_bound():
    assert gluing_bound(2, 2) == 5.0
    assert gluing_bound(2, 10) == 20.0 / 1024.0
    # tightens exponentially in the overlap register
    assert gluing_bound(3, 8) < gluing_bound(3, 4)
