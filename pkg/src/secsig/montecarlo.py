"""Monte Carlo estimation with a counter-based generator.

Sampling is chunked; chunk c draws from Philox keyed (seed, c), and chunk
results are reduced in index order, so estimates are bit-reproducible for a
fixed seed regardless of worker count.  Mechanisms with closed-form signal
structure (the growing frontier rule and the sampling rules) have fast
vectorized samplers; anything else falls back to walking the policy per round,
which is only practical for small pools.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np
from numba import njit

from .core import (
    Action,
    Instance,
    Knowledge,
    MechanismPolicy,
    ScenarioSpec,
    SecsigError,
    SenderView,
    Signal,
    UtilityMode,
    best_candidates,
)
from .evaluate import EvalReport, _check_scenario

CHUNK = 8192
Z95 = 1.959963984540054  # normal 97.5% quantile


def philox(seed: int, stream: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


# ---------------------------------------------------------------------------
# Kernels.  Each consumes pre-drawn uniforms so randomness stays counter-based.
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _growing_frontier_kernel(rho, xi, ordinal, ts, shuffle_u, lottery_u, hired_out):
    n = rho.shape[0]
    b = ts.shape[0]
    idx = np.empty(n, dtype=np.int64)
    sub_r = np.empty(n, dtype=np.float64)
    sub_x = np.empty(n, dtype=np.float64)
    uniq_r = np.empty(n, dtype=np.float64)
    uniq_x = np.empty(n, dtype=np.float64)
    uniq_i = np.empty(n, dtype=np.int64)
    hull_r = np.empty(n, dtype=np.float64)
    hull_x = np.empty(n, dtype=np.float64)
    hull_i = np.empty(n, dtype=np.int64)
    for row in range(b):
        t = ts[row]
        for i in range(n):
            idx[i] = i
        for i in range(t):  # partial shuffle: first t entries are a uniform subset
            j = i + int(shuffle_u[row, i] * (n - i))
            if j >= n:
                j = n - 1
            tmp = idx[i]
            idx[i] = idx[j]
            idx[j] = tmp
        if t == n:
            hired_out[row] = idx[n - 1]  # reached the last round: its arrival is hired
            continue
        mu = 0.0
        for i in range(t):
            p = idx[i]
            sub_r[i] = rho[p]
            sub_x[i] = xi[p]
            mu += rho[p]
        mu /= t
        # sender-best in the subset (first maximum)
        cs = 0
        for i in range(1, t):
            if sub_x[i] > sub_x[cs]:
                cs = i
        if sub_x[cs] == 0.0 or sub_r[cs] >= mu:
            if sub_x[cs] > 0.0:
                hired_out[row] = idx[cs]
                continue
            # no sender value anywhere: the lottery collapses onto the
            # receiver-best candidate
            rb = 0
            for i in range(1, t):
                if sub_r[i] > sub_r[rb]:
                    rb = i
            hired_out[row] = idx[rb]
            continue
        if ordinal:
            rb = 0
            for i in range(1, t):
                if sub_r[i] > sub_r[rb]:
                    rb = i
            alpha = (mu - sub_r[rb]) / (sub_r[cs] - sub_r[rb])
            hired_out[row] = idx[cs] if lottery_u[row] <= alpha else idx[rb]
            continue
        # cardinal: upper frontier of the subset
        order = np.argsort(sub_r[:t])
        m = 0
        for k in range(t):  # collapse equal rho to the best xi
            i = order[k]
            if m > 0 and sub_r[i] == uniq_r[m - 1]:
                if sub_x[i] > uniq_x[m - 1]:
                    uniq_x[m - 1] = sub_x[i]
                    uniq_i[m - 1] = idx[i]
            else:
                uniq_r[m] = sub_r[i]
                uniq_x[m] = sub_x[i]
                uniq_i[m] = idx[i]
                m += 1
        w = 0
        best = -1.0
        for k in range(m - 1, -1, -1):  # drop dominated points, scanning rho desc
            if uniq_x[k] > best:
                hull_r[w] = uniq_r[k]
                hull_x[w] = uniq_x[k]
                hull_i[w] = uniq_i[k]
                best = uniq_x[k]
                w += 1
        # reverse into ascending rho and build the concave chain
        lo, hi = 0, w - 1
        while lo < hi:
            hull_r[lo], hull_r[hi] = hull_r[hi], hull_r[lo]
            hull_x[lo], hull_x[hi] = hull_x[hi], hull_x[lo]
            hull_i[lo], hull_i[hi] = hull_i[hi], hull_i[lo]
            lo += 1
            hi -= 1
        h = 0
        for k in range(w):
            while h >= 2 and ((hull_r[h - 1] - hull_r[h - 2]) * (hull_x[k] - hull_x[h - 2])
                              - (hull_r[k] - hull_r[h - 2]) * (hull_x[h - 1] - hull_x[h - 2])) >= 0:
                h -= 1
            hull_r[h] = hull_r[k]
            hull_x[h] = hull_x[k]
            hull_i[h] = hull_i[k]
            h += 1
        if mu <= hull_r[0]:
            hired_out[row] = hull_i[0]
            continue
        hired = hull_i[h - 1]
        for k in range(h - 1):
            if hull_r[k] <= mu <= hull_r[k + 1]:
                if mu == hull_r[k]:
                    hired = hull_i[k]
                elif mu == hull_r[k + 1]:
                    hired = hull_i[k + 1]
                else:
                    alpha = (mu - hull_r[k + 1]) / (hull_r[k] - hull_r[k + 1])
                    hired = hull_i[k] if lottery_u[row] <= alpha else hull_i[k + 1]
                break
        hired_out[row] = hired
    return


@njit(cache=True, nogil=True)
def _sampling_rule_kernel(val_a, val_b, use_b, combine_or, s, shuffle_u, hired_out, round_out):
    """First candidate after round s that leads the tracked value(s); forced
    hire in the last round.  ``use_b`` switches rows to the second value array;
    ``combine_or`` tracks both and fires on either lead."""
    n = val_a.shape[0]
    b = use_b.shape[0]
    idx = np.empty(n, dtype=np.int64)
    for row in range(b):
        for i in range(n):
            idx[i] = i
        for i in range(n):
            j = i + int(shuffle_u[row, i] * (n - i))
            if j >= n:
                j = n - 1
            tmp = idx[i]
            idx[i] = idx[j]
            idx[j] = tmp
        best_a = -1.0
        best_b = -1.0
        hired = idx[n - 1]
        hired_round = n
        for t in range(1, n + 1):
            p = idx[t - 1]
            lead_a = val_a[p] > best_a
            lead_b = val_b[p] > best_b
            if lead_a:
                best_a = val_a[p]
            if lead_b:
                best_b = val_b[p]
            if t <= s or t == n:
                continue
            if combine_or:
                fire = lead_a or lead_b
            elif use_b[row]:
                fire = lead_b
            else:
                fire = lead_a
            if fire:
                hired = p
                hired_round = t
                break
        hired_out[row] = hired
        round_out[row] = hired_round
    return


# ---------------------------------------------------------------------------
# Accumulation
# ---------------------------------------------------------------------------

class _Stats:
    def __init__(self, n: int):
        self.n_rounds = n
        self.count = 0
        self.sums = np.zeros(4)
        self.sumsq = np.zeros(4)
        self.pmf = np.zeros(n, dtype=np.int64)

    def add(self, hired_pos: np.ndarray, hired_round: np.ndarray,
            rho: np.ndarray, xi: np.ndarray, pos_s: int, pos_r: int):
        vals = np.empty((4, hired_pos.shape[0]))
        vals[0] = (hired_pos == pos_s)
        vals[1] = xi[hired_pos]
        vals[2] = (hired_pos == pos_r)
        vals[3] = rho[hired_pos]
        self.count += hired_pos.shape[0]
        self.sums += vals.sum(axis=1)
        self.sumsq += (vals * vals).sum(axis=1)
        self.pmf += np.bincount(hired_round - 1, minlength=self.n_rounds)

    def merge(self, other: "_Stats"):
        self.count += other.count
        self.sums += other.sums
        self.sumsq += other.sumsq
        self.pmf += other.pmf

    def report(self, samples: int, seed: int) -> EvalReport:
        mean = self.sums / self.count
        var = np.maximum(self.sumsq / self.count - mean**2, 0.0)
        hw = Z95 * np.sqrt(var / self.count)
        names = ("sender_success", "sender_eu", "receiver_success", "receiver_eu")
        return EvalReport(
            sender_success=float(mean[0]),
            sender_eu=float(mean[1]),
            receiver_success=float(mean[2]),
            receiver_eu=float(mean[3]),
            hire_round_pmf=tuple((self.pmf / self.count).tolist()),
            mode="monte-carlo",
            samples=samples,
            seed=seed,
            halfwidths={k: float(h) for k, h in zip(names, hw)},
        )


def _positions_of_best(inst: Instance) -> tuple[int, int]:
    c_s, c_r = best_candidates(inst)
    pos = {c.id: p for p, c in enumerate(inst.candidates)}
    return pos[c_s], pos[c_r]


def _run_chunks(samples: int, jobs: int, worker):
    chunks = [(c, min(CHUNK, samples - c * CHUNK)) for c in range((samples + CHUNK - 1) // CHUNK)]
    if jobs <= 1:
        return [worker(c, m) for c, m in chunks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(worker, c, m) for c, m in chunks]
        return [f.result() for f in futures]  # submission order == chunk order


def _fast_growing_frontier(inst: Instance, s: int, sender_mode: UtilityMode,
                           samples: int, seed: int, jobs: int) -> EvalReport:
    n = inst.n
    rho = np.array([float(c.rho) for c in inst.candidates])
    xi = np.array([float(c.xi) for c in inst.candidates])
    pos_s, pos_r = _positions_of_best(inst)
    ordinal = sender_mode is UtilityMode.ORDINAL

    def worker(chunk_idx: int, m: int) -> _Stats:
        rng = philox(seed, chunk_idx)
        # P[hire round <= t] = 1 - s/t for t <= n-1, so T = ceil(s / (1 - u))
        u = rng.random(m)
        ts = np.ceil(s / (1.0 - u)).astype(np.int64)
        ts = np.minimum(np.maximum(ts, s + 1), n)
        shuffle_u = rng.random((m, n))
        lottery_u = rng.random(m)
        hired = np.empty(m, dtype=np.int64)
        _growing_frontier_kernel(rho, xi, ordinal, ts, shuffle_u, lottery_u, hired)
        st = _Stats(n)
        st.add(hired, ts, rho, xi, pos_s, pos_r)
        return st

    total = _Stats(n)
    for st in _run_chunks(samples, jobs, worker):
        total.merge(st)
    return total.report(samples, seed)


def _fast_sampling_rule(inst: Instance, s: int, mode: str, receiver_weight: float,
                        samples: int, seed: int, jobs: int) -> EvalReport:
    n = inst.n
    rho = np.array([float(c.rho) for c in inst.candidates])
    xi = np.array([float(c.xi) for c in inst.candidates])
    pos_s, pos_r = _positions_of_best(inst)
    combine_or = mode == "either"

    def worker(chunk_idx: int, m: int) -> _Stats:
        rng = philox(seed, chunk_idx)
        if mode == "mix":
            use_b = rng.random(m) < receiver_weight
        elif mode == "receiver":
            use_b = np.ones(m, dtype=np.bool_)
        else:
            use_b = np.zeros(m, dtype=np.bool_)
        shuffle_u = rng.random((m, n))
        hired = np.empty(m, dtype=np.int64)
        rounds = np.empty(m, dtype=np.int64)
        _sampling_rule_kernel(xi, rho, use_b, combine_or, s, shuffle_u, hired, rounds)
        st = _Stats(n)
        st.add(hired, rounds, rho, xi, pos_s, pos_r)
        return st

    total = _Stats(n)
    for st in _run_chunks(samples, jobs, worker):
        total.merge(st)
    return total.report(samples, seed)


def _generic_walk(inst: Instance, policy: MechanismPolicy, scenario: ScenarioSpec,
                  samples: int, seed: int, jobs: int) -> EvalReport:
    n = inst.n
    rho = np.array([float(c.rho) for c in inst.candidates])
    xi = np.array([float(c.xi) for c in inst.candidates])
    pos_s, pos_r = _positions_of_best(inst)
    weights = np.cumsum([float(w) for w, _ in policy.branches])
    prior = inst if scenario.knowledge is Knowledge.BASIC else None

    def worker(chunk_idx: int, m: int) -> _Stats:
        rng = philox(seed, chunk_idx)
        st = _Stats(n)
        hired = np.empty(m, dtype=np.int64)
        rounds = np.empty(m, dtype=np.int64)
        for k in range(m):
            branch = int(np.searchsorted(weights, rng.random(), side="right"))
            branch = min(branch, len(policy.branches) - 1)
            pol = policy.branches[branch][1]
            perm = rng.permutation(n)
            hired_pos = int(perm[n - 1])
            hired_round = n
            for t in range(1, n + 1):
                arrived = tuple(inst.candidates[int(p)] for p in perm[:t])
                view = SenderView(
                    round=t, arrived=arrived,
                    past_signals=(Signal.NOT,) * (t - 1),
                    past_actions=(Action.REJECTED,) * (t - 1),
                    knowledge=scenario.knowledge, prior_instance=prior,
                )
                q = float(pol(view))
                if q >= 1.0 or (q > 0.0 and rng.random() < q):
                    hired_pos = int(perm[t - 1])
                    hired_round = t
                    break
            hired[k] = hired_pos
            rounds[k] = hired_round
        st.add(hired, rounds, rho, xi, pos_s, pos_r)
        return st

    total = _Stats(n)
    for st in _run_chunks(samples, jobs, worker):
        total.merge(st)
    return total.report(samples, seed)


def monte_carlo_evaluate(inst_source, policy_factory, scenario: ScenarioSpec,
                         samples: int, seed: int, jobs: int = 1) -> EvalReport:
    """Estimate the obedient-receiver objectives by simulation.

    ``inst_source`` is an Instance or a zero-argument callable producing one;
    ``policy_factory`` is a MechanismPolicy or a callable Instance -> policy.
    Known mechanisms dispatch to vectorized samplers; others walk the policy
    round by round.
    """
    if samples < 1:
        raise SecsigError("need at least one sample")
    inst = inst_source() if callable(inst_source) else inst_source
    policy = policy_factory(inst) if callable(policy_factory) else policy_factory
    _check_scenario(policy, scenario)

    name = policy.name
    if name == "growing-pareto":
        mode = UtilityMode(policy.param("sender_mode", "cardinal"))
        return _fast_growing_frontier(inst, policy.param("s"), mode, samples, seed, jobs)
    if name == "simple-secretary":
        w_r = float(Fraction(policy.branches[0][0]))
        return _fast_sampling_rule(inst, policy.param("s"), "mix", w_r, samples, seed, jobs)
    if name == "first-opt":
        return _fast_sampling_rule(inst, policy.param("s"), "either", 0.0, samples, seed, jobs)
    return _generic_walk(inst, policy, scenario, samples, seed, jobs)


def exact_opt_value(inst: Instance, sender_mode: UtilityMode) -> float:
    from .pareto import pareto_procedure

    return float(pareto_procedure(inst, sender_mode).opt_value)
