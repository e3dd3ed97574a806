"""Adversary programs and their execution.

A program is data: an ordered list of interleaving unitaries and oracle
queries. It can run against concrete sampled unitaries (run_concrete),
against exact purified recording oracles (run_pr), or against classical-query
function-state oracles, producing the adversary's view as a density matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constructions import OracleDescriptor
from .linalg import (
    DensityMatrix,
    StateVector,
    UnitaryMatrix,
    apply_unitary,
    basis_state,
    haar_unitary,
    trace_distance,
    trial_rng,
)
from .relstate import CFParams, PurifiedState, Rel, _deposit, _extract, cf_set, is_collision_free

__all__ = [
    "Interleave",
    "QuantumQuery",
    "ClassicalQuery",
    "AdversaryProgram",
    "KeyInit",
    "ClassicalPROracle",
    "ClassicalConcreteOracle",
    "ViewResult",
    "run_concrete",
    "run_pr",
    "reduce_view",
    "view_of_state",
    "haar_view_mc",
    "bootstrap_td_stderr",
    "bootstrap_td_pair",
    "haar_interleave",
    "phased_permutation_interleave",
    "identity_interleave",
    "fourier_interleave",
]


@dataclass(frozen=True)
class Interleave:
    """A fixed unitary layer; dense matrix or a sparse permutation/phase map.

    Exactly one of `u` and `sparse_map` is set. `sparse_map` maps the basis
    value of `targets` to (new value, phase) and keeps purified vectors
    sparse.
    """

    u: UnitaryMatrix | None = None
    targets: tuple | None = None
    sparse_map: object = None

    def __post_init__(self):
        if (self.u is None) == (self.sparse_map is None):
            raise ValueError("exactly one of u / sparse_map must be given")


@dataclass(frozen=True)
class QuantumQuery:
    oracle_id: str
    input_qubits: tuple | None = None  # defaults to the first n qubits


@dataclass(frozen=True)
class ClassicalQuery:
    oracle_id: str
    w: int


@dataclass(frozen=True)
class AdversaryProgram:
    """n oracle qubits, m_anc ancillas, and an ordered step list."""

    n: int
    m_anc: int = 0
    steps: tuple = ()

    def __post_init__(self):
        if self.steps and not isinstance(self.steps[0], Interleave):
            raise ValueError("the first step must be an Interleave")

    @property
    def reg_qubits(self):
        return self.n + self.m_anc

    def query_counts(self):
        counts = {}
        for s in self.steps:
            if isinstance(s, (QuantumQuery, ClassicalQuery)):
                counts[s.oracle_id] = counts.get(s.oracle_id, 0) + 1
        return counts


@dataclass(frozen=True)
class KeyInit:
    """Marks a label slot initialized to the uniform key superposition."""

    lam: int


@dataclass(frozen=True)
class ClassicalPROracle:
    """Recording semantics for a classical query.

    input_of(k, w) builds the recorded oracle input. avoid selects output
    distinctness: 'slot' (this relation only), 'global' (union over
    avoid_slots), or 'per_w' (the slot holds a tuple of per-w relations and
    only component w is avoided; 'per_w_global' avoids the whole family
    plus avoid_slots).
    """

    n: int
    rel_slot: int
    input_of: object
    key_slot: int | None = None
    avoid: str = "slot"
    avoid_slots: tuple = ()
    transcript_slot: int | None = None


@dataclass(frozen=True)
class ClassicalConcreteOracle:
    """Concrete classical oracle: answer(w) returns the n-qubit reply state."""

    n: int
    answer: object
    transcript: bool = True


@dataclass
class ViewResult:
    reduced: DensityMatrix
    diagnostics: dict


def _input_qubits(program, q):
    return tuple(q.input_qubits) if q.input_qubits is not None else tuple(range(program.n))


# ---------------------------------------------------------------- concrete


def view_of_state(state: StateVector, keep=None) -> DensityMatrix:
    """Density of a pure state, optionally partial-traced to `keep` qubits."""
    n = state.qubit_count
    if keep is None:
        return state.density()
    keep = list(keep)
    drop = [i for i in range(n) if i not in keep]
    tens = state.amplitudes.reshape((2,) * n)
    tens = np.moveaxis(tens, keep + drop, list(range(n)))
    m = tens.reshape(2 ** len(keep), -1)
    return DensityMatrix(m @ m.conj().T, len(keep))


def _concrete_sparse(state: StateVector, sp, targets) -> StateVector:
    """Apply a phased permutation of the target-qubit basis to a dense state."""
    n = state.qubit_count
    k = len(targets)
    rest = [q for q in range(n) if q not in targets]
    tens = np.moveaxis(state.amplitudes.reshape((2,) * n), targets + rest, range(n))
    mat = tens.reshape(2**k, -1)
    out = np.zeros_like(mat)
    for val in range(2**k):
        nv, ph = sp(val)
        out[nv] = ph * mat[val]
    tens = np.moveaxis(out.reshape((2,) * n), range(n), targets + rest)
    return StateVector(tens.reshape(-1), n)


def run_concrete(program: AdversaryProgram, bindings: dict) -> StateVector:
    """Execute against concrete unitaries; classical answers grow the register."""
    state = basis_state(program.reg_qubits, 0)
    for step in program.steps:
        if isinstance(step, Interleave):
            targets = list(step.targets) if step.targets is not None else list(range(program.reg_qubits))
            if step.u is None:
                state = _concrete_sparse(state, step.sparse_map, targets)
            else:
                state = apply_unitary(state, step.u, targets)
        elif isinstance(step, QuantumQuery):
            u = bindings[step.oracle_id]
            if not isinstance(u, UnitaryMatrix):
                raise ValueError(f"oracle {step.oracle_id!r} is not a unitary")
            state = apply_unitary(state, u, list(_input_qubits(program, step)))
        elif isinstance(step, ClassicalQuery):
            oracle = bindings[step.oracle_id]
            if not isinstance(oracle, ClassicalConcreteOracle):
                raise ValueError(f"oracle {step.oracle_id!r} is not classical")
            ans = oracle.answer(step.w)
            state = StateVector(np.kron(state.amplitudes, ans.amplitudes), state.qubit_count + ans.qubit_count)
        else:
            raise ValueError(f"unknown step {step!r}")
    return state


# ---------------------------------------------------------------- purified


def _apply_interleave(state: PurifiedState, step: Interleave) -> PurifiedState:
    targets = list(step.targets) if step.targets is not None else list(range(state.n_qubits))
    if step.sparse_map is not None:
        return state.apply_sparse_map(step.sparse_map, targets)
    return state.apply_matrix(step.u.entries, targets)


def _key_pauli(state, kind, lam, key_slot, input_qubits, n_oracle):
    """Key-controlled X^k / Z^k on the lam-bit prefix of the oracle register."""
    n = state.n_qubits
    prefix_shifts = [n - 1 - q for q in input_qubits[:lam]]
    out = {}
    for lab, vec in state.terms.items():
        k = lab[key_slot]
        nv = {}
        for i, a in vec.items():
            if kind == "X":
                j = _deposit(i, prefix_shifts, _extract(i, prefix_shifts) ^ k)
                nv[j] = nv.get(j, 0) + a
            else:
                sign = -1.0 if bin(_extract(i, prefix_shifts) & k).count("1") % 2 else 1.0
                nv[i] = nv.get(i, 0) + sign * a
        out[lab] = nv
    return PurifiedState(n, out, state.entry_cap)


def _quantum_query_pr(state, desc: OracleDescriptor, input_qubits):
    from .relstate import pcfpr_apply, pr_apply

    for s in desc.steps:
        if s[0] == "pr":
            shared = desc.shared_slots if desc.shared_slots else None
            state = pr_apply(state, s[1], list(input_qubits), 2**desc.n, shared_slots=shared)
        elif s[0] == "cfpr":
            others = [x for x in (desc.shared_slots or (s[1],)) if x != s[1]]
            state = pcfpr_apply(state, s[1], others, list(input_qubits), s[2])
        elif s[0] == "pauli":
            if desc.key_slot is None:
                raise ValueError("key-controlled Pauli needs a key slot")
            state = _key_pauli(state, s[1], desc.lam, desc.key_slot, list(input_qubits), desc.n)
        else:
            raise ValueError(f"unknown descriptor step {s!r}")
    return state


def _classical_query_pr(state, oracle: ClassicalPROracle, w):
    """Append an answer register and record (input_of(k, w), y) per label."""
    n_old = state.n_qubits
    n = oracle.n
    N = 2**n
    out = {}
    count = 0
    for lab, vec in state.terms.items():
        k = lab[oracle.key_slot] if oracle.key_slot is not None else 0
        x = oracle.input_of(k, w)
        holder = lab[oracle.rel_slot]
        if oracle.avoid.startswith("per_w"):
            rel = holder[w]
        else:
            rel = holder
        avoid = set(rel.image)
        if oracle.avoid in ("global", "per_w_global"):
            if oracle.avoid == "per_w_global":
                for r in holder:
                    avoid |= set(r.image)
            for s in oracle.avoid_slots:
                avoid |= set(lab[s].image)
        cands = [y for y in range(N) if y not in avoid]
        if not cands:
            raise ValueError("classical recording undefined: no outputs left")
        norm = 1.0 / math.sqrt(len(cands))
        for y in cands:
            nl = list(lab)
            if oracle.avoid.startswith("per_w"):
                fam = list(holder)
                fam[w] = rel.add(x, y)
                nl[oracle.rel_slot] = tuple(fam)
            else:
                nl[oracle.rel_slot] = rel.add(x, y)
            if oracle.transcript_slot is not None:
                nl[oracle.transcript_slot] = nl[oracle.transcript_slot] + (w,)
            nl = tuple(nl)
            bucket = out.setdefault(nl, {})
            for i, a in vec.items():
                j = (i << n) | y
                bucket[j] = bucket.get(j, 0) + a * norm
                count += 1
                if count > state.entry_cap:
                    raise MemoryError(f"purified state exceeds the {state.entry_cap}-entry cap")
    return PurifiedState(n_old + n, out, state.entry_cap)


def run_pr(program: AdversaryProgram, bindings: dict, init_label) -> PurifiedState:
    """Exact purified execution.

    init_label is a tuple of initial slot values; KeyInit(lam) slots expand
    into the uniform key superposition.
    """
    labels = [()]
    amp = 1.0
    for slot in init_label:
        if isinstance(slot, KeyInit):
            labels = [l + (k,) for l in labels for k in range(2**slot.lam)]
            amp *= 2 ** (-slot.lam / 2.0)
        else:
            labels = [l + (slot,) for l in labels]
    state = PurifiedState(program.reg_qubits, {l: {0: complex(amp)} for l in labels})
    for step in program.steps:
        if isinstance(step, Interleave):
            state = _apply_interleave(state, step)
        elif isinstance(step, QuantumQuery):
            desc = bindings[step.oracle_id]
            if not isinstance(desc, OracleDescriptor):
                raise ValueError(f"oracle {step.oracle_id!r} is not a descriptor")
            state = _quantum_query_pr(state, desc, _input_qubits(program, step))
        elif isinstance(step, ClassicalQuery):
            oracle = bindings[step.oracle_id]
            if not isinstance(oracle, ClassicalPROracle):
                raise ValueError(f"oracle {step.oracle_id!r} is not a classical recorder")
            state = _classical_query_pr(state, oracle, step.w)
        else:
            raise ValueError(f"unknown step {step!r}")
    return state


def reduce_view(purified: PurifiedState, keep=None) -> ViewResult:
    """Trace out the purification labels (and optionally register qubits)."""
    n = purified.n_qubits
    if keep is None:
        keep = list(range(n))
    keep = list(keep)
    kq = len(keep)
    if kq > 12:
        raise ValueError("reduced view exceeds the 12-qubit density cap")
    keep_shifts = [n - 1 - q for q in keep]
    rho = np.zeros((2**kq, 2**kq), dtype=complex)
    mass = 0.0
    for vec in purified.terms.values():
        groups = {}
        for i, a in vec.items():
            kpart = _extract(i, keep_shifts)
            rest = i
            for s in keep_shifts:
                rest &= ~(1 << s)
            groups.setdefault(rest, []).append((kpart, a))
            mass += abs(a) ** 2
        for ents in groups.values():
            for ia, aa in ents:
                for ib, ab in ents:
                    rho[ia, ib] += aa * ab.conjugate()
    diag = {
        "label_count": purified.label_count(),
        "entry_count": purified.entry_count(),
        "mass": mass,
        "norm_deficit": 1.0 - mass,
    }
    return ViewResult(DensityMatrix(rho, kq), diag)


# ---------------------------------------------------------------- Monte Carlo


def haar_view_mc(program, sampler, trials, master_seed, keep=None, batches=20, jobs=1):
    """Mean adversary view over seeded trials, plus per-batch means.

    sampler(rng) returns the concrete bindings for one trial. Trials are
    combined in index order, so the result does not depend on `jobs`.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    batches = min(batches, trials)
    first = view_of_state(run_concrete(program, sampler(trial_rng(master_seed, 0))), keep)
    dim = first.entries.shape[0]
    sums = np.zeros((batches, dim, dim), dtype=complex)
    counts = np.zeros(batches, dtype=np.int64)

    def one(t):
        b = sampler(trial_rng(master_seed, t))
        return view_of_state(run_concrete(program, b), keep).entries

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as ex:
            results = ex.map(one, range(trials))
            for t, ent in enumerate(results):
                sums[t % batches] += ent
                counts[t % batches] += 1
    else:
        for t in range(trials):
            sums[t % batches] += one(t)
            counts[t % batches] += 1
    total = sums.sum(axis=0) / trials
    batch_means = [DensityMatrix(sums[b] / counts[b], first.qubit_count) for b in range(batches) if counts[b]]
    return DensityMatrix(total, first.qubit_count), batch_means


def bootstrap_td_pair(batches_a, batches_b, master_seed, resamples=200):
    """Bootstrap stderr of TD(mean A, mean B) over two batch-mean families."""
    ea = np.array([b.entries for b in batches_a])
    eb = np.array([b.entries for b in batches_b])
    q = batches_a[0].qubit_count
    rng = trial_rng(master_seed, 10**9 + 1)
    vals = []
    na, nb = len(batches_a), len(batches_b)
    for _ in range(resamples):
        ma = ea[rng.integers(0, na, size=na)].mean(axis=0)
        mb = eb[rng.integers(0, nb, size=nb)].mean(axis=0)
        vals.append(trace_distance(DensityMatrix(ma, q), DensityMatrix(mb, q)))
    return float(np.std(vals))


def bootstrap_td_stderr(batch_means, reference: DensityMatrix, master_seed, resamples=200):
    """Bootstrap stderr of TD(mean view, reference) over batch means."""
    ents = np.array([b.entries for b in batch_means])
    q = reference.qubit_count
    rng = trial_rng(master_seed, 10**9)
    vals = []
    nb = len(batch_means)
    for _ in range(resamples):
        idx = rng.integers(0, nb, size=nb)
        mean = ents[idx].mean(axis=0)
        vals.append(trace_distance(DensityMatrix(mean, q), reference))
    return float(np.std(vals))


# ---------------------------------------------------------------- programs


def haar_interleave(n_qubits, rng, targets=None):
    return Interleave(u=haar_unitary(2 ** (len(targets) if targets else n_qubits), rng), targets=tuple(targets) if targets else None)


def identity_interleave(n_qubits):
    return Interleave(u=UnitaryMatrix.from_array(np.eye(2**n_qubits)), targets=None)


def phased_permutation_interleave(n_qubits, rng, targets=None):
    """Random basis permutation with random phases; sparsity-preserving."""
    k = len(targets) if targets is not None else n_qubits
    perm = rng.permutation(2**k)
    phases = np.exp(2j * np.pi * rng.random(2**k))

    def sp(val, _perm=perm, _ph=phases):
        return int(_perm[val]), complex(_ph[val])

    return Interleave(sparse_map=sp, targets=tuple(targets) if targets is not None else tuple(range(n_qubits)))


def fourier_interleave(targets):
    """Hadamard layer on the given qubits (as a dense small gate)."""
    h = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    gate = np.array([[1.0]], dtype=complex)
    for _ in targets:
        gate = np.kron(gate, h)
    return Interleave(u=UnitaryMatrix.from_array(gate), targets=tuple(targets))
