"""Relation labels, relation states, and the recording maps.

A PurifiedState is a superposition over classical purification labels, each
label carrying a (sparse) amplitude vector on the adversary's registers.
Recording maps grow one relation slot per query; label-rewriting isometries
act on labels only and are invisible to the reduced adversary view.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import StateVector

ENTRY_CAP = 2**24  # total stored amplitude entries across all labels

__all__ = [
    "ENTRY_CAP",
    "Rel",
    "MSet",
    "CFParams",
    "PurifiedState",
    "relation_state_vector",
    "pr_apply",
    "cf_set",
    "cf_count",
    "is_collision_free",
    "pcfpr_apply",
    "corx",
    "good_keys",
    "project_good",
    "label_rewrite",
    "key_slot_hadamard",
    "partition_by_key",
    "apply_injection",
    "pair_multisets",
]


class Rel:
    """Injective relation: a multiset of (x, y) pairs with distinct y values.

    Canonical form is the lexicographically sorted pair tuple, so equal
    relations always compare and hash equal.
    """

    __slots__ = ("pairs",)

    def __init__(self, pairs=()):
        pairs = tuple(sorted(tuple(p) for p in pairs))
        ys = [p[1] for p in pairs]
        if len(set(ys)) != len(ys):
            raise ValueError("outputs of an injective relation must be distinct")
        object.__setattr__(self, "pairs", pairs)

    def __setattr__(self, *a):
        raise AttributeError("Rel is immutable")

    def __eq__(self, other):
        return isinstance(other, Rel) and self.pairs == other.pairs

    def __hash__(self):
        return hash(("Rel", self.pairs))

    def __repr__(self):
        return f"Rel({list(self.pairs)})"

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    @property
    def image(self):
        return frozenset(p[1] for p in self.pairs)

    @property
    def domain(self):
        return frozenset(p[0] for p in self.pairs)

    def add(self, x, y):
        return Rel(self.pairs + ((x, y),))

    def union(self, other):
        return Rel(self.pairs + tuple(other.pairs))


class MSet:
    """Canonically sorted multiset of integers or integer tuples."""

    __slots__ = ("elements",)

    def __init__(self, elements=()):
        object.__setattr__(self, "elements", tuple(sorted(elements)))

    def __setattr__(self, *a):
        raise AttributeError("MSet is immutable")

    def __eq__(self, other):
        return isinstance(other, MSet) and self.elements == other.elements

    def __hash__(self):
        return hash(("MSet", self.elements))

    def __repr__(self):
        return f"MSet({list(self.elements)})"

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def add(self, el):
        return MSet(self.elements + (el,))


@dataclass(frozen=True)
class CFParams:
    """Fold bound, prefix length, and string length for collision freeness."""

    fold: int
    prefix: int
    n: int

    def __post_init__(self):
        if self.prefix > self.n:
            raise ValueError("prefix length exceeds string length")
        if self.fold < 1:
            raise ValueError("fold bound must be >= 1")


@dataclass
class PurifiedState:
    """Superposition over purification labels with sparse register vectors.

    terms maps a label tuple (slots holding Rel, MSet, int keys, or nested
    tuples of those) to {basis index: amplitude}. `n_qubits` is the size of
    the adversary register the basis indices live on.
    """

    n_qubits: int
    terms: dict = field(default_factory=dict)
    entry_cap: int = ENTRY_CAP

    @property
    def dim(self):
        return 2**self.n_qubits

    @classmethod
    def initial(cls, n_qubits, label, index=0, amp=1.0, entry_cap=ENTRY_CAP):
        return cls(n_qubits, {tuple(label): {index: complex(amp)}}, entry_cap)

    def entry_count(self):
        return sum(len(v) for v in self.terms.values())

    def norm_sq(self):
        return float(sum(abs(a) ** 2 for v in self.terms.values() for a in v.values()))

    def label_count(self):
        return len(self.terms)

    def check_cap(self):
        if self.entry_count() > self.entry_cap:
            raise MemoryError(f"purified state exceeds the {self.entry_cap}-entry cap")

    def prune(self, tol=0.0):
        """Drop zero (or sub-tolerance) amplitudes and empty labels."""
        out = {}
        for lab, vec in self.terms.items():
            nv = {i: a for i, a in vec.items() if abs(a) > tol}
            if nv:
                out[lab] = nv
        return PurifiedState(self.n_qubits, out, self.entry_cap)

    def dense_vector(self, label):
        v = np.zeros(self.dim, dtype=complex)
        for i, a in self.terms.get(tuple(label), {}).items():
            v[i] = a
        return v

    def apply_matrix(self, mat, targets=None):
        """Apply a unitary to the adversary register of every label."""
        from ._kernels import apply_gate

        n = self.n_qubits
        if targets is None:
            targets = list(range(n))
        targets = list(targets)
        out = {}
        for lab, vec in self.terms.items():
            dense = np.zeros(self.dim, dtype=complex)
            for i, a in vec.items():
                dense[i] = a
            dense = apply_gate(dense, mat, targets, n)
            nz = np.nonzero(np.abs(dense) > 1e-15)[0]
            out[lab] = {int(i): complex(dense[i]) for i in nz}
        st = PurifiedState(self.n_qubits, out, self.entry_cap)
        st.check_cap()
        return st

    def apply_sparse_map(self, fn, targets):
        """Apply a basis-permutation-with-phase map on `targets`.

        fn maps the register value on `targets` to (new value, phase);
        keeps sparse vectors sparse.
        """
        n = self.n_qubits
        shifts = [n - 1 - q for q in targets]
        out = {}
        for lab, vec in self.terms.items():
            nv = {}
            for i, a in vec.items():
                val = 0
                for b, s in enumerate(shifts):
                    val = (val << 1) | ((i >> s) & 1)
                nval, phase = fn(val)
                j = i
                for b, s in enumerate(shifts):
                    bit = (nval >> (len(shifts) - 1 - b)) & 1
                    j = (j & ~(1 << s)) | (bit << s)
                nv[j] = nv.get(j, 0) + a * phase
            out[lab] = nv
        return PurifiedState(self.n_qubits, out, self.entry_cap)

    def global_phase_by_label(self, fn):
        """Multiply each label's vector by fn(label) (modulus <= 1 scalars)."""
        out = {lab: {i: a * fn(lab) for i, a in vec.items()} for lab, vec in self.terms.items()}
        return PurifiedState(self.n_qubits, out, self.entry_cap)

    def inner(self, other):
        if other.n_qubits != self.n_qubits:
            raise ValueError("register mismatch")
        acc = 0.0 + 0.0j
        for lab, vec in self.terms.items():
            ov = other.terms.get(lab)
            if not ov:
                continue
            for i, a in vec.items():
                b = ov.get(i)
                if b is not None:
                    acc += a.conjugate() * b
        return complex(acc)

    def max_diff(self, other):
        """Largest amplitude difference over the union of labels/entries."""
        keys = set(self.terms) | set(other.terms)
        worst = 0.0
        for lab in keys:
            va = self.terms.get(lab, {})
            vb = other.terms.get(lab, {})
            for i in set(va) | set(vb):
                worst = max(worst, abs(va.get(i, 0) - vb.get(i, 0)))
        return worst

    def to_json(self):
        """Debug serialization: labels as arrays, amplitudes as [re, im]."""

        def enc_label(x):
            if isinstance(x, Rel):
                return {"rel": [list(p) for p in x.pairs]}
            if isinstance(x, MSet):
                return {"mset": [list(e) if isinstance(e, tuple) else e for e in x.elements]}
            if isinstance(x, tuple):
                return {"tuple": [enc_label(e) for e in x]}
            return x

        items = []
        for lab in sorted(self.terms, key=repr):
            vec = self.terms[lab]
            items.append(
                {
                    "label": [enc_label(s) for s in lab],
                    "amplitudes": [[i, [a.real, a.imag]] for i, a in sorted(vec.items())],
                }
            )
        return json.dumps({"n_qubits": self.n_qubits, "terms": items}, sort_keys=True)


def relation_state_vector(rel, n: int) -> StateVector:
    """Symmetrized register encoding of a relation (or pair multiset).

    Returns the unit vector proportional to
    sum over permutations pi of |x_pi(1)..x_pi(t)> |y_pi(1)..y_pi(t)>,
    normalized by 1/sqrt(t! * prod_a m_a!) (m_a = pair multiplicities).
    """
    pairs = list(rel.pairs if isinstance(rel, Rel) else rel)
    t = len(pairs)
    if 2 * n * t > 24:
        raise ValueError("relation state exceeds the 24-qubit desk cap")
    mult = {}
    for p in pairs:
        mult[p] = mult.get(p, 0) + 1
    alpha = 1.0 / math.sqrt(math.factorial(t) * math.prod(math.factorial(m) for m in mult.values()))
    dim = 2 ** (2 * n * t) if t else 1
    amps = np.zeros(dim, dtype=complex)
    if t == 0:
        amps[0] = 1.0
        return StateVector(amps, 0)
    for perm in itertools.permutations(pairs):
        xs = 0
        ys = 0
        for (x, y) in perm:
            xs = (xs << n) | x
            ys = (ys << n) | y
        amps[(xs << (n * t)) | ys] += alpha
    return StateVector(amps, 2 * n * t)


def _extract(idx, shifts):
    val = 0
    for s in shifts:
        val = (val << 1) | ((idx >> s) & 1)
    return val


def _deposit(idx, shifts, val):
    nb = len(shifts)
    for b, s in enumerate(shifts):
        bit = (val >> (nb - 1 - b)) & 1
        idx = (idx & ~(1 << s)) | (bit << s)
    return idx


def _record(state, slot, input_qubits, candidates_fn):
    """Shared engine for all recording maps.

    candidates_fn(label) returns the candidate output list for that label;
    the appended amplitude factor is 1/sqrt(len(candidates)).
    """
    n = state.n_qubits
    shifts = [n - 1 - q for q in input_qubits]
    out = {}
    count = 0
    for lab, vec in state.terms.items():
        cands = candidates_fn(lab)
        if not cands:
            raise ValueError("recording map undefined: no available outputs")
        norm = 1.0 / math.sqrt(len(cands))
        rel = lab[slot]
        for i, a in vec.items():
            x = _extract(i, shifts)
            scaled = a * norm
            for y in cands:
                nl = list(lab)
                nl[slot] = rel.add(x, y)
                nl = tuple(nl)
                j = _deposit(i, shifts, y)
                bucket = out.setdefault(nl, {})
                if j in bucket:
                    bucket[j] += scaled
                else:
                    bucket[j] = scaled
                    count += 1
                    if count > state.entry_cap:
                        raise MemoryError(f"purified state exceeds the {state.entry_cap}-entry cap")
    return PurifiedState(n, out, state.entry_cap)


def pr_apply(state, relation_slot, input_qubits, N, shared_slots=None):
    """One recording query: |x>|R> -> (N-|R|)^{-1/2} sum_{y not in Im} |y>|R+(x,y)>.

    `shared_slots` lists the label slots whose joint image the fresh output
    must avoid (defaults to the target slot alone). The input register spans
    log2(N) qubits of the adversary register.
    """
    nq = N.bit_length() - 1
    if 2**nq != N:
        raise ValueError("oracle dimension must be a power of two")
    if len(input_qubits) != nq:
        raise ValueError("input register must span log2(N) qubits")
    slots = list(shared_slots) if shared_slots is not None else [relation_slot]
    if relation_slot not in slots:
        slots.append(relation_slot)

    def candidates(lab):
        im = set()
        for s in slots:
            im |= set(lab[s].image)
        if len(lab[relation_slot]) >= N:
            raise ValueError("relation is full: the recording map is undefined at |R| = N")
        return [y for y in range(N) if y not in im]

    return _record(state, relation_slot, input_qubits, candidates)


def _prefix(y, params: CFParams):
    return y >> (params.n - params.prefix)


def _subset_xors(strings, size, params):
    out = []
    for comb in itertools.combinations(strings, size):
        acc = 0
        for y in comb:
            acc ^= _prefix(y, params)
        out.append(acc)
    return out


def is_collision_free(strings, params: CFParams) -> bool:
    """Equal-size subset prefix-XORs are all distinct, for sizes <= fold."""
    strings = list(strings)
    if len(set(strings)) != len(strings):
        return False
    for size in range(1, min(params.fold, len(strings)) + 1):
        xors = _subset_xors(strings, size, params)
        if len(set(xors)) != len(xors):
            return False
    return True


def cf_set(strings, params: CFParams):
    """All y whose addition keeps the set collision-free (y not in S).

    Exhaustive over {0,1}^n, incremental per candidate: new subset XORs must
    avoid the existing same-size XORs (pairwise-new collisions would imply a
    collision already present in S).
    """
    s = set(strings)
    if not is_collision_free(s, params):
        raise ValueError("input set is not collision-free")
    if params.n > 12 or len(s) > 6 or params.fold > 3:
        raise ValueError("parameters beyond the brute-force envelope")
    old = {size: set(_subset_xors(s, size, params)) for size in range(1, params.fold + 1)}
    out = set()
    for y in range(2**params.n):
        if y in s:
            continue
        p = _prefix(y, params)
        ok = True
        for size in range(1, params.fold + 1):
            prev = _subset_xors(s, size - 1, params) if size - 1 <= len(s) else []
            new = {p ^ x for x in prev}
            if len(new) != len(prev):
                ok = False
                break
            cur = old.get(size, set())
            if new & cur:
                ok = False
                break
        if ok:
            out.add(y)
    return out


def cf_count(strings, params: CFParams) -> int:
    """|cf_set(strings)| via a vectorized sweep (same semantics, no set built).

    Used by the exhaustive bound experiment; cross-checked against cf_set.
    """
    s = list(strings)
    n = params.n
    ys = np.arange(2**n, dtype=np.int64)
    ok = np.ones(2**n, dtype=bool)
    if s:
        ok[np.array(s, dtype=np.int64)] = False
    yp = ys >> (n - params.prefix)
    for size in range(1, params.fold + 1):
        prev = np.array(_subset_xors(s, size - 1, params), dtype=np.int64)
        cur = np.array(sorted(set(_subset_xors(s, size, params))), dtype=np.int64)
        if prev.size == 0:
            continue
        mixed = yp[:, None] ^ prev[None, :]
        if cur.size:
            ok &= ~np.isin(mixed, cur).any(axis=1)
        # pairwise-new collisions cannot occur when the base set is cf
        dup = np.sort(mixed, axis=1)
        if prev.size > 1:
            ok &= ~(np.diff(dup, axis=1) == 0).any(axis=1)
    return int(ok.sum())


def pcfpr_apply(state, target_slot, other_slots, input_qubits, params: CFParams):
    """Collision-free recording across two (or more) relation slots.

    |x>|R1>|R2> -> |CF(Im(R1 u R2))|^{-1/2} sum_{y in CF} |y>, with (x, y)
    appended to the target slot. Preconditions (each slot's image, the joint
    image, and disjointness) are checked on every populated label.
    """
    if isinstance(other_slots, int):
        other_slots = [other_slots]
    slots = [target_slot] + [s for s in other_slots if s != target_slot]
    cache = {}

    def candidates(lab):
        images = [tuple(sorted(lab[s].image)) for s in slots]
        joint = [y for im in images for y in im]
        key = tuple(sorted(joint))
        if len(set(joint)) != len(joint):
            raise ValueError("relation slots are not disjoint")
        if key not in cache:
            for im in images:
                if not is_collision_free(im, params):
                    raise ValueError("a relation image is not collision-free")
            if not is_collision_free(joint, params):
                raise ValueError("the joint image is not collision-free")
            cache[key] = sorted(cf_set(joint, params))
        return cache[key]

    return _record(state, target_slot, input_qubits, candidates)


def corx(rel, k: int):
    """Ordered pairs ((u,v),(u',v')) in R x R with v xor u' = k."""
    pairs = list(rel.pairs if isinstance(rel, Rel) else rel)
    return {(p, q) for p in pairs for q in pairs if p[1] ^ q[0] == k}


def good_keys(rel, fold: int, key_count: int):
    return {k for k in range(key_count) if len(corx(rel, k)) == fold}


def project_good(state, predicate):
    """Keep only the terms whose label satisfies the predicate (subnormalized)."""
    out = {lab: dict(vec) for lab, vec in state.terms.items() if predicate(lab)}
    return PurifiedState(state.n_qubits, out, state.entry_cap)


def label_rewrite(state, rewriter, check_injective=True):
    """Relabel every term; amplitude vectors untouched.

    With check_injective, raises if two populated labels collide, which would
    make the rewrite non-isometric.
    """
    out = {}
    for lab, vec in state.terms.items():
        nl = tuple(rewriter(lab))
        if nl in out:
            if check_injective:
                raise ValueError(f"label rewrite is not injective at {nl!r}")
            dst = out[nl]
            for i, a in vec.items():
                dst[i] = dst.get(i, 0) + a
        else:
            out[nl] = dict(vec)
    return PurifiedState(state.n_qubits, out, state.entry_cap)


def key_slot_hadamard(state, key_slot, lam):
    """Hadamard transform of an integer key slot (2^lam keys)."""
    groups = {}
    for lab, vec in state.terms.items():
        k = lab[key_slot]
        rest = lab[:key_slot] + lab[key_slot + 1 :]
        groups.setdefault(rest, {})[k] = vec
    norm = 2 ** (-lam / 2.0)
    out = {}
    for rest, by_key in groups.items():
        for h in range(2**lam):
            acc = {}
            for k, vec in by_key.items():
                sign = -1.0 if bin(h & k).count("1") % 2 else 1.0
                for i, a in vec.items():
                    acc[i] = acc.get(i, 0) + sign * norm * a
            acc = {i: a for i, a in acc.items() if abs(a) > 1e-14}
            if acc:
                nl = rest[:key_slot] + (h,) + rest[key_slot:]
                out[nl] = acc
    return PurifiedState(state.n_qubits, out, state.entry_cap)


def partition_by_key(state, source_slot, selector, check_injective=True):
    """Split a relation slot in two by a label-dependent pair predicate.

    selector(pair, label) decides membership of the selected part; the label
    gains a new slot (inserted right after source_slot) holding the selected
    sub-relation. Inverse: merge_partition.
    """

    def rw(lab):
        rel = lab[source_slot]
        sel = [p for p in rel if selector(p, lab)]
        rest = list(rel.pairs)
        for p in sel:
            rest.remove(p)
        return lab[:source_slot] + (Rel(rest), Rel(sel)) + lab[source_slot + 1 :]

    return label_rewrite(state, rw, check_injective)


def merge_partition(state, slot_a, slot_b, check_injective=True):
    """Union two relation slots back into one (inverse of partition_by_key)."""

    def rw(lab):
        merged = lab[slot_a].union(lab[slot_b])
        keep = [s for i, s in enumerate(lab) if i not in (slot_a, slot_b)]
        keep.insert(min(slot_a, slot_b), merged)
        return tuple(keep)

    return label_rewrite(state, rw, check_injective)


def apply_injection(state, slot, func, key_slot=None, check_injective=True):
    """Map each element of a relation/multiset slot through an injection.

    func(element) or func(element, k) when key_slot is given. Works for Rel
    (elements are pairs) and MSet slots.
    """

    def rw(lab):
        obj = lab[slot]
        args = (lab[key_slot],) if key_slot is not None else ()
        if isinstance(obj, Rel):
            new = Rel(func(p, *args) for p in obj)
        else:
            new = MSet(func(e, *args) for e in obj)
        return lab[:slot] + (new,) + lab[slot + 1 :]

    return label_rewrite(state, rw, check_injective)


def pair_multisets(state, slot_a, slot_b, key_slot, match, check_injective=True):
    """Zip two equal-size multiset slots into one multiset of joined tuples.

    match(ea, eb, k) tells whether eb is the partner of ea; the pairing must
    be a unique perfect matching on every populated label, else an error.
    """

    def rw(lab):
        a = list(lab[slot_a])
        b = list(lab[slot_b])
        k = lab[key_slot]
        if len(a) != len(b):
            raise ValueError("multisets must have equal size")
        joined = []
        for ea in a:
            partners = [eb for eb in b if match(ea, eb, k)]
            if len(partners) != 1:
                raise ValueError("pairing is not a unique perfect matching")
            b.remove(partners[0])
            ea_t = ea if isinstance(ea, tuple) else (ea,)
            eb_t = partners[0] if isinstance(partners[0], tuple) else (partners[0],)
            joined.append(ea_t + eb_t)
        lo, hi = sorted((slot_a, slot_b))
        keep = [s for i, s in enumerate(lab) if i not in (slot_a, slot_b)]
        keep.insert(lo, MSet(joined))
        return tuple(keep)

    return label_rewrite(state, rw, check_injective)
