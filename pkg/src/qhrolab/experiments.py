"""Named desk-scale experiments with bounds, statistics, and pass rules.

Each experiment is deterministic given (params, seed): trials derive their
generators from (seed, trial_index) and results are combined in trial order.
Checks are labeled EXACT (absolute tolerance), MC (statistical, 3 stderr),
or ASYMPTOTIC (constant-slack policy C=5, flagged in every report).
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import attacks, constructions
from .constructions import (
    OracleDescriptor,
    concrete_oracle,
    haar_slot,
    prfs_output,
    prs_output,
    pru_one_query,
    pru_two_query,
    spru,
    spru_concrete,
)
from .harness import (
    AdversaryProgram,
    ClassicalConcreteOracle,
    ClassicalPROracle,
    ClassicalQuery,
    Interleave,
    KeyInit,
    QuantumQuery,
    bootstrap_td_pair,
    bootstrap_td_stderr,
    haar_interleave,
    haar_view_mc,
    identity_interleave,
    phased_permutation_interleave,
    reduce_view,
    run_concrete,
    run_pr,
    view_of_state,
)
from .linalg import (
    DensityMatrix,
    UnitaryMatrix,
    apply_unitary,
    basis_state,
    choi_state,
    haar_unitary,
    pauli_string,
    trace_distance,
    trial_rng,
)
from .relstate import (
    CFParams,
    MSet,
    PurifiedState,
    Rel,
    apply_injection,
    cf_count,
    cf_set,
    corx,
    is_collision_free,
    key_slot_hadamard,
    label_rewrite,
    pair_multisets,
    partition_by_key,
    project_good,
)

SLACK = 5.0  # constant-slack policy for O(.) bounds; an artifact convention

__all__ = ["SLACK", "ExperimentReport", "EXPERIMENTS", "run_experiment"]


@dataclass
class ExperimentReport:
    name: str
    seed: int
    params: dict
    grid: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for p in self.grid for c in p["checks"])

    def add_point(self, point: dict) -> dict:
        entry = {"point": point, "checks": []}
        self.grid.append(entry)
        return entry

    def to_json(self) -> str:
        obj = {
            "schema_version": 1,
            "experiment": self.name,
            "seed": self.seed,
            "params": self.params,
            "grid": self.grid,
            "notes": self.notes,
            "passed": self.passed,
        }
        return json.dumps(obj, sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        lines = ["point,check,kind,value,bound,stderr,passed"]
        for entry in self.grid:
            pt = ";".join(f"{k}={v}" for k, v in sorted(entry["point"].items()))
            for c in entry["checks"]:
                lines.append(
                    f"{pt},{c['name']},{c['kind']},{c['value']!r},{c['bound']!r},{c['stderr']!r},{int(c['passed'])}"
                )
        return "\n".join(lines) + "\n"


def _check(entry, name, kind, value, bound, stderr=0.0, passed=None):
    value = float(value)
    bound = float(bound)
    stderr = float(stderr)
    if passed is None:
        passed = value <= bound + 3.0 * stderr
    c = {"name": name, "kind": kind, "value": value, "bound": bound, "stderr": stderr, "passed": bool(passed)}
    entry["checks"].append(c)
    return c


def _check_ge(entry, name, kind, value, floor, stderr=0.0):
    """Lower-bound check; `bound` holds the floor and larger values pass."""
    return _check(
        entry, name, kind, value, floor, stderr,
        passed=float(value) >= float(floor) - 3.0 * float(stderr),
    )


# --------------------------------------------------------------- exp_mh_bound


def _generic_program(n, t):
    """t repeated queries starting from a basis state.

    Querying without basis rotation keeps the distinct-output signal of the
    recording oracle well above the Monte Carlo floor at 2e4 trials.
    """
    steps = [identity_interleave(n)]
    for _ in range(t):
        steps.append(QuantumQuery("U"))
    return AdversaryProgram(n=n, steps=tuple(steps))


def exp_mh_bound(params) -> ExperimentReport:
    seed = params["seed"]
    t = params.get("t", 2)
    trials = params.get("trials", 20000)
    jobs = params.get("jobs", 1)
    n_list = params.get("n_list", [2, 3, 4])
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rep = ExperimentReport("exp_mh_bound", seed, {"t": t, "trials": trials, "n_list": list(n_list)})
    rep.notes.append("recording-oracle view vs Haar Monte Carlo; bound 2t(t-1)/(N+1)")
    results = []
    for i, n in enumerate(n_list):
        prog = _generic_program(n, t)
        # the adversary outputs a fixed two-qubit register; the smaller view
        # keeps the estimator floor below the 1/N signal at every n
        keep = list(range(min(n, 2)))
        pr_view = reduce_view(run_pr(prog, {"U": haar_slot(n)}, (Rel(),)), keep).reduced

        def sampler(rng, n=n):
            return {"U": haar_unitary(2**n, rng)}

        mean, batches = haar_view_mc(prog, sampler, trials, seed + i, keep=keep, jobs=jobs)
        td = trace_distance(mean, pr_view)
        se = bootstrap_td_stderr(batches, pr_view, seed + i)
        bound = 2.0 * t * (t - 1) / (2**n + 1)
        entry = rep.add_point({"n": n, "N": 2**n})
        _check(entry, "td_haar_vs_recording", "MC", td, bound, se)
        results.append((n, td, se))
    for (n1, td1, se1), (n2, td2, se2) in zip(results, results[1:]):
        if se1 < td1 / 5 and se2 < td2 / 5 and td2 > 0:
            entry = rep.add_point({"n_pair": f"{n1}->{n2}"})
            _check_ge(entry, "td_ratio_scaling", "MC", td1 / td2, 1.3)
    return rep


# ----------------------------------------------------------------- exp_pru2


def _pru2_program(n, rng):
    """One keyed query then one direct query, mixed interleaves."""
    return AdversaryProgram(
        n=n,
        steps=(
            haar_interleave(n, rng),
            QuantumQuery("G"),
            phased_permutation_interleave(n, rng),
            QuantumQuery("U"),
        ),
    )


def exp_pru2(params) -> ExperimentReport:
    seed = params["seed"]
    t = params.get("t", 2)
    ell = params.get("ell", 1)
    trials = params.get("trials", 20000)
    jobs = params.get("jobs", 1)
    n_list = params.get("n_list", [3, 4])
    rep = ExperimentReport(
        "exp_pru2", seed, {"t": t, "ell": ell, "trials": trials, "n_list": list(n_list)}
    )
    rep.notes.append("two-query keyed construction; proof-internal identities exact, end-to-end MC")
    rep.notes.append(f"ASYMPTOTIC checks use the constant-slack policy C={SLACK}")
    ends = []
    for i, n in enumerate(n_list):
        N = 2**n
        lam = params.get("lam") or n
        prog = _pru2_program(n, trial_rng(seed, 20_000 + n))
        entry = rep.add_point({"n": n, "lam": lam, "t": t, "ell": ell})

        # exact hybrid identities at the smallest grid point
        desc_g = dataclasses.replace(pru_two_query(n, lam, slot=0), key_slot=1)
        psi2 = run_pr(prog, {"G": desc_g, "U": haar_slot(n, slot=0)}, (Rel(), KeyInit(lam)))
        good = project_good(psi2, lambda lab: len(corx(lab[0], lab[1])) == ell)
        mass = good.norm_sq()
        _check_ge(entry, "good_key_mass", "EXACT", mass, 1.0 - (t * t + t * ell) / N)

        psi3 = run_pr(
            prog,
            {
                "G": haar_slot(n, slot=0, shared_slots=(0, 1)),
                "U": haar_slot(n, slot=1, shared_slots=(0, 1)),
            },
            (Rel(), Rel()),
        )
        rho2 = reduce_view(psi2).reduced
        rho3 = reduce_view(psi3).reduced
        td23 = trace_distance(rho2, rho3)
        bound23 = 2.0 * math.sqrt((t * t + t * ell) / N)
        _check(entry, "td_hybrid2_vs_hybrid3", "EXACT", td23, bound23)

        # Monte Carlo against the exact hybrids
        def real_sampler(rng, n=n, lam=lam, desc=pru_two_query(n, lam)):
            u = haar_unitary(2**n, rng)
            k = int(rng.integers(0, 2**lam))
            return {"G": concrete_oracle(desc, u, k), "U": u}

        def ideal_sampler(rng, n=n):
            return {"G": haar_unitary(2**n, rng), "U": haar_unitary(2**n, rng)}

        m_real, b_real = haar_view_mc(prog, real_sampler, trials, seed + 31 * i, jobs=jobs)
        m_ideal, b_ideal = haar_view_mc(prog, ideal_sampler, trials, seed + 31 * i + 1, jobs=jobs)
        b1 = 4.0 * (t + ell) * (t + ell - 1) / (N + 1)
        b3 = (t + ell) ** 2 / math.sqrt(N)
        td12 = trace_distance(m_real, rho2)
        se12 = bootstrap_td_stderr(b_real, rho2, seed + 41 * i)
        _check(entry, "td_real_vs_hybrid2", "MC", td12, b1, se12)
        td34 = trace_distance(m_ideal, rho3)
        se34 = bootstrap_td_stderr(b_ideal, rho3, seed + 43 * i)
        _check(entry, "td_ideal_vs_hybrid3", "ASYMPTOTIC", td34, SLACK * b3, se34)

        # end-to-end on a three-query adversary (two keyed calls, one direct)
        # measured on a fixed two-qubit output register, where the signal
        # clears the Monte Carlo floor at the default trial count
        prog_end = AdversaryProgram(
            n=n,
            steps=(
                identity_interleave(n),
                QuantumQuery("G"),
                QuantumQuery("U"),
                QuantumQuery("G"),
            ),
        )
        keep = [0, 1]
        me_r, be_r = haar_view_mc(prog_end, real_sampler, trials, seed + 51 * i, keep=keep, jobs=jobs)
        me_i, be_i = haar_view_mc(prog_end, ideal_sampler, trials, seed + 53 * i, keep=keep, jobs=jobs)
        q = t + ell + 2
        end_bound = 4.0 * q * (q - 1) / (N + 1) + 2.0 * math.sqrt(q * q / N) + SLACK * q * q / math.sqrt(N)
        td_end = trace_distance(me_r, me_i)
        se_end = bootstrap_td_pair(be_r, be_i, seed + 47 * i)
        _check(entry, "td_end_to_end", "ASYMPTOTIC", td_end, end_bound, se_end)
        ends.append((n, td_end, se_end))
    for (n1, td1, se1), (n2, td2, se2) in zip(ends, ends[1:]):
        if se1 < td1 / 5 and se2 < td2 / 5 and td2 > 0:
            entry = rep.add_point({"n_pair": f"{n1}->{n2}"})
            _check_ge(entry, "end_to_end_scaling", "MC", td1 / td2, 1.3)
    return rep


# ----------------------------------------------------------------- exp_pru1


def _pru1_program(n, t, ell, rng):
    """ell keyed queries first, then t-ell direct queries."""
    steps = [haar_interleave(n, rng)]
    for _ in range(ell):
        steps.append(QuantumQuery("G"))
        steps.append(phased_permutation_interleave(n, rng))
    for _ in range(t - ell):
        steps.append(QuantumQuery("U"))
        steps.append(phased_permutation_interleave(n, rng))
    return AdversaryProgram(n=n, steps=tuple(steps))


def _unique_subset(rel, ell, h, n, lam):
    hits = []
    for comb in itertools.combinations(rel.pairs, ell):
        acc = 0
        for (_, y) in comb:
            acc ^= y >> (n - lam)
        if acc == h:
            hits.append(comb)
    if len(hits) != 1:
        raise ValueError("prefix-XOR subset is not unique; collision-freeness violated")
    return hits[0]


def exp_pru1(params) -> ExperimentReport:
    mode = params.get("mode", "secure")
    if mode == "break":
        return _pru1_break(params)
    seed = params["seed"]
    n = params.get("n", 3)
    lam = params.get("lam", n)
    ell = params.get("ell", 1)
    t = params.get("t", 3)
    trials = params.get("trials", 4000)
    jobs = params.get("jobs", 1)
    N = 2**n
    cf = CFParams(max(ell, 1), lam, n)
    rep = ExperimentReport(
        "exp_pru1", seed, {"n": n, "lam": lam, "ell": ell, "t": t, "mode": mode, "trials": trials}
    )
    rep.notes.append("one-query keyed construction; hybrid equality is exact via the key-Hadamard isometry")
    prog = _pru1_program(n, t, ell, trial_rng(seed, 30_000 + n))
    entry = rep.add_point({"n": n, "lam": lam, "t": t, "ell": ell})

    if ell > 0:
        desc_g = dataclasses.replace(pru_one_query(n, lam, slot=0, cf=cf), key_slot=1)
    else:
        desc_g = haar_slot(n, slot=0, cf=cf)
    psi2 = run_pr(prog, {"G": desc_g, "U": haar_slot(n, slot=0, cf=cf)}, (Rel(), KeyInit(lam)))
    psi3 = run_pr(
        prog,
        {
            "G": haar_slot(n, slot=0, cf=cf, shared_slots=(0, 1)),
            "U": haar_slot(n, slot=1, cf=cf, shared_slots=(0, 1)),
        },
        (Rel(), Rel()),
    )
    rho2 = reduce_view(psi2).reduced
    rho3 = reduce_view(psi3).reduced
    _check(entry, "td_hybrid2_vs_hybrid3", "EXACT", trace_distance(rho2, rho3), 1e-8)

    if ell > 0:
        mixed = key_slot_hadamard(psi2, 1, lam).prune(1e-12)

        def rewrite(lab):
            rel, h = lab
            sel = _unique_subset(rel, ell, h, n, lam)
            rest = list(rel.pairs)
            for p in sel:
                rest.remove(p)
            return (Rel(sel), Rel(rest))

        walked = label_rewrite(mixed, rewrite)
        _check(entry, "isometry_state_match", "EXACT", walked.max_diff(psi3), 1e-8)

    # end-to-end Monte Carlo against independent oracles
    def real_sampler(rng):
        u = haar_unitary(N, rng)
        k = int(rng.integers(0, 2**lam))
        g = pauli_string("Z", k, lam, n).entries @ u.entries
        return {"G": UnitaryMatrix(g, n), "U": u}

    def ideal_sampler(rng):
        return {"G": haar_unitary(N, rng), "U": haar_unitary(N, rng)}

    m_real, b_real = haar_view_mc(prog, real_sampler, trials, seed + 5, jobs=jobs)
    m_ideal, b_ideal = haar_view_mc(prog, ideal_sampler, trials, seed + 6, jobs=jobs)
    td_end = trace_distance(m_real, m_ideal)
    se_end = bootstrap_td_pair(b_real, b_ideal, seed + 7)
    per_side = math.sqrt(max(ell, 1)) * t ** (ell + 1) / 2 ** (lam / 2.0) + 4.0 * t * (t - 1) / (N + 1)
    _check(entry, "td_end_to_end", "ASYMPTOTIC", td_end, 2.0 * SLACK * per_side, se_end)
    return rep


def _pru1_break(params) -> ExperimentReport:
    seed = params["seed"]
    n = params.get("n", 2)
    lam = params.get("lam", n)
    trials = params.get("trials", 300)
    copies_per_key = params.get("copies_per_key", 4 * lam)
    rep = ExperimentReport(
        "exp_pru1",
        seed,
        {"n": n, "lam": lam, "mode": "break", "trials": trials, "copies_per_key": copies_per_key},
    )
    rep.notes.append("key search by per-key SWAP-test batteries on prepared Choi states")
    rep.notes.append(
        "the two-query arm uses the best single-call preparation (pre X^k); the construction is not of that form"
    )
    ident = UnitaryMatrix.from_array(np.eye(2**n))
    acc = {("one", "real"): 0, ("one", "null"): 0, ("two", "real"): 0, ("two", "null"): 0}
    for tr in range(trials):
        rng = trial_rng(seed, tr)
        u = haar_unitary(2**n, rng)
        v = haar_unitary(2**n, rng)
        kstar = int(rng.integers(0, 2**lam))
        phi_u = choi_state(u)
        cands_one = {}
        cands_two = {}
        for k in range(2**lam):
            zk = pauli_string("Z", k, lam, n)
            xk = pauli_string("X", k, lam, n)
            circ1 = attacks.NonAdaptiveCircuit(ident, zk, 1)
            circ2 = attacks.NonAdaptiveCircuit(xk, ident, 1)
            cands_one[k] = attacks.choi_from_copies(circ1, [phi_u])
            cands_two[k] = attacks.choi_from_copies(circ2, [phi_u])
        o_one = choi_state(UnitaryMatrix(pauli_string("Z", kstar, lam, n).entries @ u.entries, n))
        o_two = choi_state(
            UnitaryMatrix(u.entries @ pauli_string("X", kstar, lam, n).entries @ u.entries, n)
        )
        o_null = choi_state(v)
        for arm, cands, oracle in (
            ("one", cands_one, o_one),
            ("one", cands_one, o_null),
            ("two", cands_two, o_two),
            ("two", cands_two, o_null),
        ):
            which = "real" if oracle is not o_null else "null"
            r = attacks.swap_or_attack(oracle, cands, copies_per_key, rng)
            acc[(arm, which)] += r.success
    # both arms saw o_null once per trial
    adv_one = (acc[("one", "real")] - acc[("one", "null")]) / trials
    adv_two = (acc[("two", "real")] - acc[("two", "null")]) / trials
    entry = rep.add_point({"n": n, "lam": lam, "copies_per_key": copies_per_key})
    _check_ge(entry, "advantage_one_query_arm", "MC", adv_one, 0.9)
    _check(entry, "advantage_two_query_arm", "MC", adv_two, 0.2)
    return rep


# ------------------------------------------------------------------ exp_prs


def _prs_points(n, lam):
    return [(n, lam), (n, lam + 1), (n + 1, lam)]


def _prs_program(n, t, s):
    steps = [identity_interleave(n)]
    for _ in range(t):
        steps.append(ClassicalQuery("copy", 0))
    for _ in range(s):
        steps.append(QuantumQuery("U", tuple(range(n))))
    return AdversaryProgram(n=n, steps=tuple(steps))


def _prs_views(n, lam, t, s, want_mass):
    """Exact purified views: shared-slot keyed copies vs independent slots.

    The two purified states are built sequentially and freed right after
    reduction; at the largest grid point each holds a few million labels.
    """
    prog = _prs_program(n, t, s)
    keep = list(range(min(2 * n, n + t * n)))

    real_bind = {
        "copy": ClassicalPROracle(n=n, rel_slot=0, input_of=lambda k, w: k << (n - lam), key_slot=1),
        "U": haar_slot(n, slot=0),
    }
    real = run_pr(prog, real_bind, (Rel(), KeyInit(lam)))
    v_real = reduce_view(real, keep).reduced
    mass = None
    if want_mass:
        good = project_good(
            real, lambda lab: sum(1 for (x, _) in lab[0] if x == lab[1] << (n - lam)) == t
        )
        mass = good.norm_sq()
        del good
    del real

    ideal_bind = {
        "copy": ClassicalPROracle(n=n, rel_slot=0, input_of=lambda k, w: 0, key_slot=2),
        "U": haar_slot(n, slot=1),
    }
    ideal = run_pr(prog, ideal_bind, (Rel(), Rel(), KeyInit(lam)))
    v_ideal = reduce_view(ideal, keep).reduced
    del ideal
    return prog, v_real, v_ideal, mass, keep


def exp_prs(params) -> ExperimentReport:
    seed = params["seed"]
    n = params.get("n", 4)
    lam = params.get("lam", 2)
    t = params.get("t", 2)
    s = params.get("s", 2)
    trials = params.get("trials", 2000)
    jobs = params.get("jobs", 1)
    scaling = params.get("scaling", True)
    rep = ExperimentReport("exp_prs", seed, {"n": n, "lam": lam, "t": t, "s": s, "trials": trials})
    rep.notes.append("t keyed copies plus s oracle queries vs independent Haar-state copies")
    rep.notes.append("primary TD is exact between the two purified hybrid oracles, on the first 2n qubits")
    points = _prs_points(n, lam) if scaling else [(n, lam)]
    tds = {}
    for (nn, ll) in points:
        base = (nn, ll) == (n, lam)
        prog, v_real, v_ideal, mass, keep = _prs_views(nn, ll, t, s, want_mass=base)
        td = trace_distance(v_real, v_ideal)
        tds[(nn, ll)] = td
        bound = math.sqrt(s / 2**ll) + (t + s) ** 2 / 2 ** (nn / 2.0)
        entry = rep.add_point({"n": nn, "lam": ll, "t": t, "s": s})
        _check(entry, "td_hybrid_real_vs_ideal", "ASYMPTOTIC", td, SLACK * bound)
        if base:
            _check_ge(entry, "good_pair_mass", "EXACT", mass, 1.0 - s / 2**ll)

            # Monte Carlo cross-check against concrete sampling
            def real_sampler(rng, nn=nn, ll=ll):
                u = haar_unitary(2**nn, rng)
                k = int(rng.integers(0, 2**ll))
                return {
                    "copy": ClassicalConcreteOracle(nn, lambda w, u=u, k=k: prs_output(u, k, nn, ll)),
                    "U": u,
                }

            mean, batches = haar_view_mc(prog, real_sampler, trials, seed + 3, keep=keep, jobs=jobs)
            td_mc = trace_distance(mean, v_real)
            se = bootstrap_td_stderr(batches, v_real, seed + 3)
            q = t + s
            _check(entry, "mc_real_vs_purified", "MC", td_mc, 2.0 * q * (q - 1) / (2**nn + 1), se)
    if scaling:
        entry = rep.add_point({"scaling": "lam,n"})
        _check(
            entry,
            "td_strictly_decreasing_in_lam",
            "EXACT",
            tds[(n, lam + 1)],
            tds[(n, lam)],
            passed=tds[(n, lam + 1)] < tds[(n, lam)],
        )
        _check(
            entry,
            "td_strictly_decreasing_in_n",
            "EXACT",
            tds[(n + 1, lam)],
            tds[(n, lam)],
            passed=tds[(n + 1, lam)] < tds[(n, lam)],
        )
    return rep


# ----------------------------------------------------------------- exp_prfs


def _prfs_program(n, m, t):
    steps = [identity_interleave(n)]
    for i in range(t):
        steps.append(ClassicalQuery("O", i % max(2**m, 1)))
    for _ in range(t):
        steps.append(QuantumQuery("U", tuple(range(n))))
    return AdversaryProgram(n=n, steps=tuple(steps))


def _prfs_views(n, lam, m, t, want_mass):
    """Exact purified views: keyed shared-slot oracle vs per-input slots."""
    if n < lam + m:
        raise ValueError("need n >= lam + m_in")
    prog = _prfs_program(n, m, t)
    keep = list(range(min(2 * n, n + t * n)))
    shift = n - lam - m

    real_bind = {
        "O": ClassicalPROracle(
            n=n, rel_slot=0, input_of=lambda k, w: ((k << m) | w) << shift, key_slot=1
        ),
        "U": haar_slot(n, slot=0),
    }
    real = run_pr(prog, real_bind, (Rel(), KeyInit(lam)))
    v_real = reduce_view(real, keep).reduced
    mass = None
    if want_mass:
        good = project_good(
            real, lambda lab: sum(1 for (x, _) in lab[0] if (x >> (n - lam)) == lab[1]) == t
        )
        mass = good.norm_sq()
        del good
    del real

    ideal_bind = {
        "O": ClassicalPROracle(
            n=n, rel_slot=0, input_of=lambda k, w: w << shift, key_slot=2, avoid="per_w"
        ),
        "U": haar_slot(n, slot=1),
    }
    ideal = run_pr(prog, ideal_bind, (tuple(Rel() for _ in range(max(2**m, 1))), Rel(), KeyInit(lam)))
    v_ideal = reduce_view(ideal, keep).reduced
    del ideal
    return prog, v_real, v_ideal, mass, keep


def exp_prfs(params) -> ExperimentReport:
    seed = params["seed"]
    n = params.get("n", 4)
    lam = params.get("lam", 2)
    m = params.get("m_in", 1)
    t = params.get("t", 2)
    trials = params.get("trials", 2000)
    jobs = params.get("jobs", 1)
    scaling = params.get("scaling", True)
    if n < lam + m:
        raise ValueError("need n >= lam + m_in")
    rep = ExperimentReport("exp_prfs", seed, {"n": n, "lam": lam, "m_in": m, "t": t, "trials": trials})
    rep.notes.append("classical-query function-state oracle vs per-input independent Haar states")
    rep.notes.append("primary TD is exact between the two purified hybrid oracles, on the first 2n qubits")
    points = [(n, lam), (n, lam + 1), (n + 1, lam)] if scaling else [(n, lam)]
    tds = {}
    for (nn, ll) in points:
        if nn < ll + m:
            raise ValueError("scaling point violates n >= lam + m_in")
        base = (nn, ll) == (n, lam)
        prog, v_real, v_ideal, mass, keep = _prfs_views(nn, ll, m, t, want_mass=base)
        td = trace_distance(v_real, v_ideal)
        tds[(nn, ll)] = td
        bound = t * t / 2 ** (nn - m) + t * t / 2 ** (nn / 2.0) + math.sqrt(t / 2**ll)
        entry = rep.add_point({"n": nn, "lam": ll, "m_in": m, "t": t})
        _check(entry, "td_hybrid_real_vs_ideal", "ASYMPTOTIC", td, SLACK * bound)
        if base:
            _check_ge(entry, "good_pair_mass", "EXACT", mass, 1.0 - t / 2**ll)

            def real_sampler(rng, nn=nn, ll=ll):
                u = haar_unitary(2**nn, rng)
                k = int(rng.integers(0, 2**ll))
                return {
                    "O": ClassicalConcreteOracle(
                        nn, lambda w, u=u, k=k: prfs_output(u, k, w, nn, ll, m)
                    ),
                    "U": u,
                }

            mean, batches = haar_view_mc(prog, real_sampler, trials, seed + 4, keep=keep, jobs=jobs)
            td_mc = trace_distance(mean, v_real)
            se = bootstrap_td_stderr(batches, v_real, seed + 4)
            q = 2 * t
            _check(entry, "mc_real_vs_purified", "MC", td_mc, 2.0 * q * (q - 1) / (2**nn + 1), se)
    if scaling:
        entry = rep.add_point({"scaling": "lam,n"})
        _check(
            entry,
            "td_strictly_decreasing_in_lam",
            "EXACT",
            tds[(n, lam + 1)],
            tds[(n, lam)],
            passed=tds[(n, lam + 1)] < tds[(n, lam)],
        )
        _check(
            entry,
            "td_strictly_decreasing_in_n",
            "EXACT",
            tds[(n + 1, lam)],
            tds[(n, lam)],
            passed=tds[(n + 1, lam)] < tds[(n, lam)],
        )
    return rep


# -------------------------------------------------------------- exp_cf_bound


def exp_cf_bound(params) -> ExperimentReport:
    seed = params["seed"]
    n_max = params.get("n_max", 8)
    ell_max = params.get("ell_max", 2)
    smax = params.get("smax", 4)
    sample_count = params.get("samples", 300)
    exhaustive_cap = params.get("exhaustive_cap", 60000)
    rep = ExperimentReport(
        "exp_cf_bound", seed, {"n_max": n_max, "ell_max": ell_max, "smax": smax, "samples": sample_count}
    )
    rep.notes.append("set-size lower bound 2^n - l*|S|^{2l}*2^{n-lam}; zero violations required")
    rep.notes.append(
        "cells beyond the exhaustive cap are covered by the vacuity argument plus seeded sampling"
    )
    rng = trial_rng(seed, 777)
    violations = 0
    checked = 0
    vacuous = 0
    sampled = 0
    for n in range(1, n_max + 1):
        for size in range(0, min(smax, 2**n) + 1):
            cell = math.comb(2**n, size)
            exhaustive = cell <= exhaustive_cap
            for ell in range(1, ell_max + 1):
                for lam in range(1, n + 1):
                    bound = 2**n - ell * size ** (2 * ell) * 2 ** (n - lam)
                    if bound <= 0:
                        vacuous += 1
                        continue
                    cf = CFParams(ell, lam, n)
                    if exhaustive:
                        for s_tuple in itertools.combinations(range(2**n), size):
                            if not is_collision_free(s_tuple, cf):
                                continue
                            checked += 1
                            if cf_count(s_tuple, cf) < bound:
                                violations += 1
                    else:
                        for _ in range(sample_count):
                            s_tuple = tuple(sorted(rng.choice(2**n, size=size, replace=False)))
                            if not is_collision_free(s_tuple, cf):
                                continue
                            sampled += 1
                            if cf_count(s_tuple, cf) < bound:
                                violations += 1
    entry = rep.add_point({"grid": f"n<={n_max},|S|<={smax},l<={ell_max}"})
    _check(entry, "bound_violations", "EXACT", violations, 0)
    entry["point"]["instances_checked"] = checked
    entry["point"]["instances_sampled"] = sampled
    entry["point"]["vacuous_cells"] = vacuous

    # cross-check the vectorized counter against the set builder
    mism = 0
    for _ in range(100):
        n = int(rng.integers(2, 7))
        lam = int(rng.integers(1, n + 1))
        ell = int(rng.integers(1, 3))
        size = int(rng.integers(0, 4))
        s_tuple = tuple(sorted(rng.choice(2**n, size=size, replace=False)))
        cf = CFParams(ell, lam, n)
        if not is_collision_free(s_tuple, cf):
            continue
        if cf_count(s_tuple, cf) != len(cf_set(s_tuple, cf)):
            mism += 1
    entry2 = rep.add_point({"crosscheck": "vectorized vs exhaustive"})
    _check(entry2, "counter_mismatches", "EXACT", mism, 0)

    # closed form at lam=n, ell=1: everything outside S stays collision-free
    cl = 0
    for _ in range(50):
        n = int(rng.integers(2, 8))
        size = int(rng.integers(0, min(5, 2**n)))
        s_tuple = tuple(sorted(rng.choice(2**n, size=size, replace=False)))
        if cf_count(s_tuple, CFParams(1, n, n)) != 2**n - size:
            cl += 1
    entry3 = rep.add_point({"spotcheck": "lam=n,l=1 complement"})
    _check(entry3, "closed_form_mismatches", "EXACT", cl, 0)
    return rep


# --------------------------------------------------------- exp_split_augment


def exp_split_augment(params) -> ExperimentReport:
    seed = params["seed"]
    n = params.get("n", 3)
    t = params.get("t", 1)
    ell = params.get("ell", min(t, 1))
    N = 2**n
    lam = n
    rep = ExperimentReport("exp_split_augment", seed, {"n": n, "t": t, "ell": ell})
    rep.notes.append("label-isometry chain: split the keyed recording, augment the plain one")
    entry = rep.add_point({"n": n, "t": t, "ell": ell})
    if t == 0:
        _check(entry, "fidelity", "EXACT", -1.0, -1.0, passed=True)
        rep.notes.append("t=0: both sides are the empty-query state; fidelity 1 by construction")
        return rep
    if t != ell or ell != 1:
        raise ValueError("the desk-scale chain is implemented for t = ell = 1")

    rng = trial_rng(seed, 50_000 + n)
    prog = AdversaryProgram(n=n, steps=(haar_interleave(n, rng), QuantumQuery("G")))
    desc_g = dataclasses.replace(pru_two_query(n, lam, slot=0), key_slot=1)
    psi2 = run_pr(prog, {"G": desc_g}, (Rel(), KeyInit(lam)))
    rho2 = reduce_view(psi2).reduced

    good = project_good(psi2, lambda lab: len(corx(lab[0], lab[1])) == ell)

    # move the (x, z) pairs out, then the (z xor k, y) pairs
    st = partition_by_key(good, 0, lambda p, lab: any(p[1] ^ q[0] == lab[-1] for q in lab[0]))
    # slots now: (rest, selected=(x,z), key)
    st = partition_by_key(st, 0, lambda p, lab: any(p[0] ^ q[1] == lab[-1] for q in lab[1]))
    # slots: (rest(empty), (z^k,y), (x,z), key)
    st = pair_multisets(
        st,
        2,
        1,
        3,
        lambda ea, eb, k: ea[1] ^ k == eb[0],
    )
    # slots: (rest, joined MSet[(x,z,zk,y)], key)
    st = apply_injection(st, 1, lambda e, k: (e[0], e[1], e[3]), key_slot=2)

    def split(lab):
        rest, joined, k = lab
        xy = MSet((x, y) for (x, z, y) in joined)
        zs = MSet(z for (x, z, y) in joined)
        return (xy, zs, k)

    psi2p = label_rewrite(st, split)

    # augmented plain-recording side
    prog_v = AdversaryProgram(n=n, steps=prog.steps)
    psi3 = run_pr(prog_v, {"G": haar_slot(n, slot=0)}, (Rel(),))
    rho3 = reduce_view(psi3).reduced
    aug = {}
    for lab, vec in psi3.terms.items():
        rel = lab[0]
        (x, y) = rel.pairs[0]
        for z in range(N):
            if z in rel.image:
                continue
            goodk = []
            for k in range(2**lam):
                try:
                    assembled = Rel([(x, z), (z ^ k, y)])
                except ValueError:
                    continue
                if len(corx(assembled, k)) == ell:
                    goodk.append(k)
            amp = 1.0 / math.sqrt((N - t) * len(goodk))
            for k in goodk:
                nl = (MSet([(x, y)]), MSet([z]), k)
                bucket = aug.setdefault(nl, {})
                for i, a in vec.items():
                    bucket[i] = bucket.get(i, 0) + a * amp
    psi3p = PurifiedState(psi3.n_qubits, aug)

    fid = abs(psi2p.inner(psi3p))
    _check_ge(entry, "fidelity", "EXACT", fid, math.sqrt(1.0 - (t * t + t * ell) / N) - 1e-9)
    _check(
        entry,
        "reduced_view_invariance_split",
        "EXACT",
        trace_distance(reduce_view(psi2p).reduced, reduce_view(good).reduced),
        1e-8,
    )
    _check(
        entry,
        "reduced_view_invariance_augment",
        "EXACT",
        trace_distance(reduce_view(psi3p).reduced, rho3),
        1e-8,
    )
    entry["point"]["td_sides"] = float(trace_distance(rho2, rho3))
    return rep


# ------------------------------------------------------------------ exp_spru


def exp_spru(params) -> ExperimentReport:
    seed = params["seed"]
    n_block = params.get("n_block", 2)
    overlap = params.get("overlap", 1)
    lam_small = params.get("lam_small", 1)
    trials = params.get("trials", 1500)
    probes = params.get("probes", 6)
    layout = spru(n_block, overlap, lam_small)
    d = 2**layout.total_qubits
    rep = ExperimentReport(
        "exp_spru",
        seed,
        {"n_block": n_block, "overlap": overlap, "lam_small": lam_small, "trials": trials},
    )
    rep.notes.append("gluing second-moment check; the bound 5k^2/2^|B| is vacuous at desk scale and labeled so")

    rng = trial_rng(seed, 60_000)
    u = haar_unitary(2**n_block, rng)
    m0 = spru_concrete(layout, u, 0, 0, 0)
    rest = 2 ** (layout.total_qubits - n_block)
    # with every key zero each arm collapses to four plain oracle calls
    p4 = np.linalg.matrix_power(u.entries, 4)
    direct = np.kron(np.eye(rest), p4) @ np.kron(p4, np.eye(rest))
    entry = rep.add_point({"check": "zero_keys"})
    _check(entry, "zero_key_composition", "EXACT", float(np.max(np.abs(m0.entries - direct))), 1e-9)

    # probe operators for the two-fold moment comparison
    probe_ops = []
    prng = trial_rng(seed, 60_001)
    for _ in range(probes):
        a = prng.standard_normal((d * d, d * d)) + 1j * prng.standard_normal((d * d, d * d))
        h = (a + a.conj().T) / 2
        probe_ops.append(h / np.linalg.norm(h))

    def haar_twirl(x):
        swap = np.zeros((d * d, d * d))
        for i in range(d):
            for j in range(d):
                swap[i * d + j, j * d + i] = 1.0
        eye = np.eye(d * d)
        psym = (eye + swap) / 2
        panti = (eye - swap) / 2
        out = np.zeros_like(x, dtype=complex)
        for p in (psym, panti):
            dp = np.trace(p).real
            out += np.trace(p @ x) / dp * p
        return out

    acc = [np.zeros((d * d, d * d), dtype=complex) for _ in probe_ops]
    for tr in range(trials):
        trng = trial_rng(seed, 70_000 + tr)
        ua = haar_unitary(2**n_block, trng)
        ub = haar_unitary(2**n_block, trng)
        w = np.kron(np.eye(rest), ub.entries) @ np.kron(ua.entries, np.eye(rest))
        w2 = np.kron(w, w)
        for i, x in enumerate(probe_ops):
            acc[i] += w2 @ x @ w2.conj().T
    dist = 0.0
    for i, x in enumerate(probe_ops):
        diff = acc[i] / trials - haar_twirl(x)
        dist = max(dist, float(np.linalg.norm(diff, 2)))
    entry = rep.add_point({"check": "second_moment"})
    bound = constructions.gluing_bound(2, overlap)
    _check(entry, "moment_distance_vs_gluing_bound", "ASYMPTOTIC", dist, bound)
    entry["point"]["bound_is_vacuous"] = bound >= 1.0
    entry["point"]["arithmetic_output_qubits_example"] = constructions.stretch_output_qubits(8, 4, 2)
    entry["point"]["arithmetic_key_bits_example"] = constructions.stretch_key_bits(4, 2)
    return rep


# ----------------------------------------------------------------- registry


@dataclass(frozen=True)
class ExperimentDef:
    fn: object
    description: str
    bound: str
    pass_rule: str
    defaults: dict


EXPERIMENTS = {
    "exp_mh_bound": ExperimentDef(
        exp_mh_bound,
        "Haar Monte Carlo view vs exact recording-oracle view for a fixed 2-query adversary",
        "2t(t-1)/(N+1)",
        "TD <= bound + 3*stderr at every n; TD(n)/TD(n+1) >= 1.3 once stderr < TD/5",
        {"n_list": [2, 3, 4], "t": 2, "trials": 20000},
    ),
    "exp_pru2": ExperimentDef(
        exp_pru2,
        "two-query keyed construction U X^k U: exact hybrid identities plus end-to-end MC",
        "good mass >= 1-(t^2+t*l)/N; TD(h2,h3) <= 2*sqrt((t^2+t*l)/N); end-to-end sum of three bounds, C=5",
        "all exact identities hold; MC distances within bounds + 3*stderr",
        {"n_list": [3, 4], "t": 2, "ell": 1, "trials": 20000},
    ),
    "exp_pru1": ExperimentDef(
        exp_pru1,
        "one-query keyed construction (Z^k x I) U: exact hybrid equality via the key-Hadamard isometry, or break mode",
        "secure: TD(h2,h3) <= 1e-8 and sqrt(l)*t^(l+1)/2^(lam/2) end to end; break: advantage >= 0.9 vs <= 0.2",
        "secure: exact equality; break: SWAP-test key search separates the two constructions",
        {"n": 3, "lam": 3, "ell": 1, "t": 3, "trials": 4000, "mode": "secure"},
    ),
    "exp_prs": ExperimentDef(
        exp_prs,
        "multi-copy keyed state generator vs independent Haar state, with s oracle queries",
        "O(sqrt(s/2^lam) + (t+s)^2/sqrt(2^n)), C=5; good-pair mass >= 1 - s/2^lam",
        "exact hybrid TD <= C*bound, strictly decreasing in lam and n; MC cross-check within recording bound",
        {"n": 4, "lam": 2, "t": 2, "s": 2, "trials": 2000},
    ),
    "exp_prfs": ExperimentDef(
        exp_prfs,
        "classical-query keyed function-state oracle vs per-input independent Haar states",
        "O(t^2/2^(n-m) + t^2/sqrt(2^n) + sqrt(t/2^lam)), C=5; good-pair mass >= 1 - t/2^lam; needs n >= lam + m_in",
        "exact hybrid TD <= C*bound, strictly decreasing in lam and n; MC cross-check within recording bound",
        {"n": 4, "lam": 2, "m_in": 1, "t": 2, "trials": 2000},
    ),
    "exp_cf_bound": ExperimentDef(
        exp_cf_bound,
        "exhaustive/sampled verification of the collision-free set-size lower bound",
        "|CF(S)| >= 2^n - l*|S|^(2l)*2^(n-lam)",
        "zero violations over the grid",
        {"n_max": 8, "ell_max": 2, "smax": 4, "samples": 300},
    ),
    "exp_split_augment": ExperimentDef(
        exp_split_augment,
        "split the keyed recording into pair/input parts and compare with the augmented plain recording",
        "fidelity >= sqrt(1 - (t^2+t*l)/N)",
        "fidelity floor holds; the label chain leaves both reduced views unchanged (1e-8)",
        {"n": 3, "t": 1, "ell": 1},
    ),
    "exp_spru": ExperimentDef(
        exp_spru,
        "staircase composition: zero-key algebra plus the glued second-moment comparison",
        "5k^2/2^|B| with k=2 (vacuous at desk scale, labeled)",
        "zero-key algebra exact; moment distance <= bound",
        {"n_block": 2, "overlap": 1, "lam_small": 1, "trials": 1500},
    ),
}


def run_experiment(name, params) -> ExperimentReport:
    if name not in EXPERIMENTS:
        raise KeyError(f"unknown experiment {name!r}")
    merged = dict(EXPERIMENTS[name].defaults)
    merged.update(params)
    if "seed" not in merged:
        raise ValueError("a seed is required")
    return EXPERIMENTS[name].fn(merged)
