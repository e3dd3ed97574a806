"""Adversary harness: concrete vs purified execution, views, Monte Carlo."""

import numpy as np
import pytest

from qhrolab.constructions import haar_slot, pru_two_query
from qhrolab.harness import (
    AdversaryProgram,
    ClassicalConcreteOracle,
    ClassicalPROracle,
    ClassicalQuery,
    Interleave,
    KeyInit,
    QuantumQuery,
    bootstrap_td_pair,
    bootstrap_td_stderr,
    fourier_interleave,
    haar_interleave,
    haar_view_mc,
    identity_interleave,
    phased_permutation_interleave,
    reduce_view,
    run_concrete,
    run_pr,
    view_of_state,
)
from qhrolab.linalg import (
    DensityMatrix,
    UnitaryMatrix,
    basis_state,
    haar_unitary,
    trace_distance,
    trial_rng,
)
from qhrolab.relstate import CFParams, PurifiedState, Rel, label_rewrite, relation_state_vector


def test_program_validation():
    with pytest.raises(ValueError):
        AdversaryProgram(n=2, steps=(QuantumQuery("U"),))
    with pytest.raises(ValueError):
        Interleave()
    with pytest.raises(ValueError):
        Interleave(u=UnitaryMatrix.from_array(np.eye(2)), sparse_map=lambda v: (v, 1.0))
    prog = AdversaryProgram(n=2, m_anc=1, steps=(identity_interleave(3), QuantumQuery("U"), QuantumQuery("U")))
    assert prog.reg_qubits == 3
    assert prog.query_counts() == {"U": 2}


def test_run_concrete_matches_matrix():
    rng = trial_rng(21)
    n = 2
    a = haar_unitary(4, rng)
    u = haar_unitary(4, rng)
    prog = AdversaryProgram(n=n, steps=(Interleave(u=a), QuantumQuery("U")))
    out = run_concrete(prog, {"U": u})
    expect = u.entries @ a.entries[:, 0]
    assert np.max(np.abs(out.amplitudes - expect)) < 1e-10
    with pytest.raises(ValueError):
        run_concrete(prog, {"U": "nope"})


def test_run_concrete_sparse_interleave():
    # sparse phased-permutation layers agree with their dense matrix
    rng = trial_rng(22)
    n = 3
    step = phased_permutation_interleave(n, rng, targets=[0, 2])
    dense = np.zeros((4, 4), dtype=complex)
    for val in range(4):
        nv, ph = step.sparse_map(val)
        dense[nv, val] = ph
    prog_sparse = AdversaryProgram(n=n, steps=(haar_interleave(n, trial_rng(23)), step))
    prog_dense = AdversaryProgram(
        n=n,
        steps=(haar_interleave(n, trial_rng(23)), Interleave(u=UnitaryMatrix.from_array(dense), targets=(0, 2))),
    )
    va = run_concrete(prog_sparse, {})
    vb = run_concrete(prog_dense, {})
    assert np.max(np.abs(va.amplitudes - vb.amplitudes)) < 1e-10


def test_classical_concrete_appends_register():
    oracle = ClassicalConcreteOracle(n=2, answer=lambda w: basis_state(2, w))
    prog = AdversaryProgram(n=1, steps=(identity_interleave(1), ClassicalQuery("O", 3)))
    out = run_concrete(prog, {"O": oracle})
    assert out.qubit_count == 3
    assert abs(out.amplitudes[0b011] - 1.0) < 1e-12


def test_key_init_expansion():
    prog = AdversaryProgram(n=1, steps=(identity_interleave(1),))
    psi = run_pr(prog, {}, (Rel(), KeyInit(2)))
    assert psi.label_count() == 4
    for vec in psi.terms.values():
        assert abs(vec[0] - 0.5) < 1e-12


def test_single_query_view_is_mixed():
    # one recording query from a basis state: the view is I/N exactly
    for n in (1, 2, 3):
        prog = AdversaryProgram(n=n, steps=(identity_interleave(n), QuantumQuery("U")))
        view = reduce_view(run_pr(prog, {"U": haar_slot(n)}, (Rel(),))).reduced
        mixed = DensityMatrix(np.eye(2**n) / 2**n, n)
        assert trace_distance(view, mixed) <= 1e-10


def test_purified_full_hilbert_cross_check():
    # embed each relation label as its symmetric register state and compare
    # the label-traced view against a genuine partial trace
    n, t = 2, 2
    rng = trial_rng(31)
    prog = AdversaryProgram(
        n=n,
        steps=(haar_interleave(n, rng), QuantumQuery("U"), fourier_interleave((0,)), QuantumQuery("U")),
    )
    psi = run_pr(prog, {"U": haar_slot(n)}, (Rel(),))
    dim_rel = 2 ** (2 * n * t)
    full = np.zeros(2**n * dim_rel, dtype=complex)
    for (rel,), vec in psi.terms.items():
        assert len(rel) == t
        rv = relation_state_vector(rel, n).amplitudes
        for i, a in vec.items():
            full[i * dim_rel : (i + 1) * dim_rel] += a * rv
    from qhrolab.linalg import StateVector

    rho_full = view_of_state(StateVector.from_array(full), keep=[0, 1])
    rho_lab = reduce_view(psi).reduced
    assert trace_distance(rho_full, rho_lab) <= 1e-9


def test_label_rewrite_invisible_in_view():
    n = 2
    rng = trial_rng(37)
    prog = AdversaryProgram(
        n=n, steps=(haar_interleave(n, rng), QuantumQuery("U"), haar_interleave(n, rng), QuantumQuery("U"))
    )
    psi = run_pr(prog, {"U": haar_slot(n)}, (Rel(),))
    before = reduce_view(psi).reduced
    moved = label_rewrite(psi, lambda lab: (lab[0], "tag"))
    after = reduce_view(moved).reduced
    assert np.max(np.abs(before.entries - after.entries)) <= 1e-12


def test_reduce_view_diagnostics_and_cap():
    psi = PurifiedState(13, {("a",): {0: 1.0}})
    with pytest.raises(ValueError):
        reduce_view(psi)
    small = reduce_view(psi, keep=[0, 1])
    assert abs(small.diagnostics["mass"] - 1.0) < 1e-12
    assert small.diagnostics["label_count"] == 1


def test_recording_bound_small_n():
    # TD(Haar MC mean, recording view) within 2t(t-1)/(N+1) + 3 stderr
    n, t, trials = 2, 2, 2000
    prog = AdversaryProgram(n=n, steps=tuple([identity_interleave(n)] + [QuantumQuery("U")] * t))
    exact = reduce_view(run_pr(prog, {"U": haar_slot(n)}, (Rel(),))).reduced
    mean, batches = haar_view_mc(prog, lambda rng: {"U": haar_unitary(2**n, rng)}, trials, 71)
    td = trace_distance(mean, exact)
    se = bootstrap_td_stderr(batches, exact, 71)
    assert td <= 2.0 * t * (t - 1) / (2**n + 1) + 3.0 * se


def test_two_oracle_recording_bound():
    # independent oracles share one output space: the two-slot recording
    # tracks a pair of Haar unitaries within 4q(q-1)/(N+1)
    n, trials = 2, 2000
    prog = AdversaryProgram(
        n=n, steps=(identity_interleave(n), QuantumQuery("U"), QuantumQuery("V"))
    )
    bindings = {
        "U": haar_slot(n, slot=0, shared_slots=(0, 1)),
        "V": haar_slot(n, slot=1, shared_slots=(0, 1)),
    }
    exact = reduce_view(run_pr(prog, bindings, (Rel(), Rel()))).reduced

    def sampler(rng):
        return {"U": haar_unitary(2**n, rng), "V": haar_unitary(2**n, rng)}

    mean, batches = haar_view_mc(prog, sampler, trials, 73)
    td = trace_distance(mean, exact)
    se = bootstrap_td_stderr(batches, exact, 73)
    assert td <= 4.0 * 2 * 1 / (2**n + 1) + 3.0 * se


def test_cf_recording_matches_plain_at_full_prefix():
    # fold-1 with a full-length prefix avoids exactly the image: identical views;
    # shorter prefixes move the view monotonically away
    n = 4
    steps = [identity_interleave(n)]
    for _ in range(2):
        steps += [QuantumQuery("U"), fourier_interleave((0, 1))]
    prog = AdversaryProgram(n=n, steps=tuple(steps))
    plain = reduce_view(run_pr(prog, {"U": haar_slot(n)}, (Rel(),))).reduced
    tds = []
    for lam in (2, 3, 4):
        cf = CFParams(1, lam, n)
        v = reduce_view(run_pr(prog, {"U": haar_slot(n, cf=cf)}, (Rel(),))).reduced
        td = trace_distance(plain, v)
        assert td <= 5.0 * 2 ** 2 / 2 ** (lam / 2.0)
        tds.append(td)
    assert tds[2] <= 1e-10
    assert tds[0] > tds[1] > tds[2]


def test_classical_recording_per_w_slots():
    oracle = ClassicalPROracle(n=1, rel_slot=0, input_of=lambda k, w: w, avoid="per_w")
    prog = AdversaryProgram(
        n=1, steps=(identity_interleave(1), ClassicalQuery("O", 0), ClassicalQuery("O", 1))
    )
    psi = run_pr(prog, {"O": oracle}, ((Rel(), Rel()),))
    # each component records independently: both (x=w, y) pairs present
    assert psi.n_qubits == 3
    for (fam,), _ in psi.terms.items():
        assert len(fam[0]) == 1 and len(fam[1]) == 1
        assert fam[0].pairs[0][0] == 0 and fam[1].pairs[0][0] == 1


def test_classical_recording_keyed_and_global():
    oracle = ClassicalPROracle(
        n=1, rel_slot=0, input_of=lambda k, w: k ^ w, key_slot=1, avoid="global", avoid_slots=(2,)
    )
    prog = AdversaryProgram(n=1, steps=(identity_interleave(1), ClassicalQuery("O", 1)))
    psi = run_pr(prog, {"O": oracle}, (Rel(), 1, Rel([(0, 0)])))
    # key 1, w 1 -> recorded input 0; output must dodge the avoid slot image {0}
    ((lab, vec),) = psi.terms.items()
    assert lab[0] == Rel([(0, 1)])
    assert abs(vec[0b01] - 1.0) < 1e-12


def test_haar_view_mc_determinism_and_jobs():
    n, trials = 2, 40
    prog = AdversaryProgram(n=n, steps=(identity_interleave(n), QuantumQuery("U")))

    def sampler(rng):
        return {"U": haar_unitary(4, rng)}

    m1, b1 = haar_view_mc(prog, sampler, trials, 5)
    m2, _ = haar_view_mc(prog, sampler, trials, 5, jobs=2)
    m3, _ = haar_view_mc(prog, sampler, trials, 6)
    assert np.array_equal(m1.entries, m2.entries)
    assert not np.array_equal(m1.entries, m3.entries)
    with pytest.raises(ValueError):
        haar_view_mc(prog, sampler, 0, 5)
    # bootstrap statistics are seeded too
    ref = DensityMatrix(np.eye(4) / 4, 2)
    assert bootstrap_td_stderr(b1, ref, 9) == bootstrap_td_stderr(b1, ref, 9)
    assert bootstrap_td_pair(b1, b1, 9) == bootstrap_td_pair(b1, b1, 9)


def test_keyed_descriptor_needs_key_slot():
    prog = AdversaryProgram(n=2, steps=(identity_interleave(2), QuantumQuery("G")))
    with pytest.raises(ValueError):
        run_pr(prog, {"G": pru_two_query(2, 2)}, (Rel(),))
