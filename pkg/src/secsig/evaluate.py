"""Exact evaluation and incentive checking.

Two engines cover the receiver's problem:

* without disclosure, information sets collapse to (round, compressed signal
  history), and forward reach-masses are aggregated over arrival *sets*;
* with disclosure, the rejected prefix is common knowledge, so node values
  depend only on (remaining set, per-branch likelihoods), giving a subset
  recursion.

Both rely on the policy contract from :class:`secsig.core.SenderView`: the
hire probability may depend on the past only through the set of arrived
candidates.  Everything here is exact rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import (
    ONE,
    ZERO,
    Action,
    Instance,
    Knowledge,
    MechanismPolicy,
    ScenarioMismatch,
    ScenarioSpec,
    SecsigError,
    SenderView,
    Signal,
    TooLarge,
    UtilityMode,
    ZeroBenchmark,
    best_candidates,
)
from .pareto import pareto_procedure

EXACT_CAP = 8
PERSUASION_CAP = 8


@dataclass(frozen=True)
class EvalReport:
    """Player objectives under an obedient receiver."""

    sender_success: Fraction | float
    sender_eu: Fraction | float
    receiver_success: Fraction | float
    receiver_eu: Fraction | float
    hire_round_pmf: tuple
    mode: str = "exact"
    samples: int | None = None
    seed: int | None = None
    halfwidths: dict | None = None

    def sender_objective(self, sender_mode: UtilityMode):
        return self.sender_success if sender_mode is UtilityMode.ORDINAL else self.sender_eu


@dataclass(frozen=True)
class InfoSetNote:
    """One receiver information set where the stated comparison holds."""

    round: int
    signal: Signal
    context: str
    obedient_value: Fraction
    deviation_value: Fraction


@dataclass(frozen=True)
class PersuasivenessReport:
    persuasive: bool
    v_obedient: Fraction
    v_best_response: Fraction
    violations: tuple[InfoSetNote, ...]
    indifferent: tuple[InfoSetNote, ...] = ()

    def __post_init__(self):
        if self.v_best_response < self.v_obedient:
            raise SecsigError("best response can never be worth less than obedience")


@dataclass(frozen=True)
class DPTable:
    """Best-so-far recursion values; index t-1 holds round t."""

    u: tuple[Fraction, ...]
    v: tuple[Fraction, ...]
    threshold: int


def _check_scenario(policy: MechanismPolicy, scenario: ScenarioSpec) -> None:
    if policy.knowledge is Knowledge.BASIC and scenario.knowledge is Knowledge.SECRETARY:
        raise ScenarioMismatch(
            f"mechanism {policy.name!r} reads the full pool and cannot run in the secretary scenario"
        )


class _PolicyTable:
    """On-path hire probabilities for one branch, cached by (arrived-set, current).

    The view handed to the policy lists the other arrived candidates in id
    order with the current one last; by the policy purity contract this
    canonical order is as good as any true arrival order.
    """

    def __init__(self, inst: Instance, policy, scenario: ScenarioSpec):
        self.inst = inst
        self.policy = policy
        self.knowledge = scenario.knowledge
        self.prior = inst if scenario.knowledge is Knowledge.BASIC else None
        self.cands = inst.candidates
        n = inst.n
        self._signals = [(Signal.NOT,) * k for k in range(n)]
        self._actions = [(Action.REJECTED,) * k for k in range(n)]
        self.cache: dict[tuple[int, int], Fraction] = {}

    def q(self, mask: int, pos: int) -> Fraction:
        key = (mask, pos)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        t = mask.bit_count()
        arrived = tuple(
            self.cands[p] for p in range(len(self.cands)) if (mask >> p) & 1 and p != pos
        ) + (self.cands[pos],)
        view = SenderView(
            round=t,
            arrived=arrived,
            past_signals=self._signals[t - 1],
            past_actions=self._actions[t - 1],
            knowledge=self.knowledge,
            prior_instance=self.prior,
        )
        q = self.policy(view)
        if not (0 <= q <= 1):
            raise SecsigError(f"policy returned hire probability {q} outside [0, 1]")
        self.cache[key] = q
        return q


def _payoff(inst: Instance, receiver_mode: UtilityMode):
    if receiver_mode is UtilityMode.CARDINAL:
        vals = [c.rho for c in inst.candidates]
    else:
        _, c_r = best_candidates(inst)
        pos_r = next(p for p, c in enumerate(inst.candidates) if c.id == c_r)
        vals = [ONE if p == pos_r else ZERO for p in range(inst.n)]
    return vals


def exact_evaluate(inst: Instance, policy: MechanismPolicy,
                   scenario: ScenarioSpec) -> EvalReport:
    """Exact objectives under obedience, averaging over all arrival orders,
    branch draws, and per-round lottery outcomes."""
    _check_scenario(policy, scenario)
    n = inst.n
    if n > EXACT_CAP:
        raise TooLarge(n, EXACT_CAP)
    c_s, c_r = best_candidates(inst)
    pos_s = next(p for p, c in enumerate(inst.candidates) if c.id == c_s)
    pos_r = next(p for p, c in enumerate(inst.candidates) if c.id == c_r)
    xi = [c.xi for c in inst.candidates]
    rho = [c.rho for c in inst.candidates]

    pmf = [ZERO] * (n + 1)
    s_succ = s_eu = r_succ = r_eu = ZERO
    for weight, branch in policy.branches:
        table = _PolicyTable(inst, branch, scenario)
        mass = {(1 << p, p): Fraction(1, n) for p in range(n)}
        for t in range(1, n + 1):
            nxt: dict[tuple[int, int], Fraction] = {}
            for (mask, pos), m in mass.items():
                q = table.q(mask, pos)
                if q > 0:
                    hm = weight * m * q
                    pmf[t] += hm
                    s_eu += hm * xi[pos]
                    r_eu += hm * rho[pos]
                    if pos == pos_s:
                        s_succ += hm
                    if pos == pos_r:
                        r_succ += hm
                if q < 1:
                    rem = m * (1 - q)
                    if t == n:
                        raise SecsigError(
                            f"mechanism {policy.name!r} leaves round-n mass unhired"
                        )
                    share = rem / (n - t)
                    for j in range(n):
                        if not (mask >> j) & 1:
                            key = (mask | (1 << j), j)
                            nxt[key] = nxt.get(key, ZERO) + share
            mass = nxt
    total = sum(pmf, ZERO)
    assert total == 1, "hire-round probabilities must sum to exactly 1"
    return EvalReport(
        sender_success=s_succ,
        sender_eu=s_eu,
        receiver_success=r_succ,
        receiver_eu=r_eu,
        hire_round_pmf=tuple(pmf[1:]),
    )


def _mean_over_mask(vals, mask: int) -> Fraction:
    if mask == 0:
        return ZERO
    k = mask.bit_count()
    total = ZERO
    p = 0
    m = mask
    while m:
        if m & 1:
            total += vals[p]
        m >>= 1
        p += 1
    return total / k


def _check_no_disclosure(inst, policy, scenario, pay) -> PersuasivenessReport:
    n = inst.n
    full = (1 << n) - 1
    acc_h = [ZERO] * (n + 2)
    rej_h = [ZERO] * (n + 2)
    mass_h = [ZERO] * (n + 2)
    acc_n = [ZERO] * (n + 2)
    mass_n = [ZERO] * (n + 2)
    mean_cache: dict[int, Fraction] = {}

    def mean_pay(mask: int) -> Fraction:
        v = mean_cache.get(mask)
        if v is None:
            v = _mean_over_mask(pay, mask)
            mean_cache[mask] = v
        return v

    for weight, branch in policy.branches:
        table = _PolicyTable(inst, branch, scenario)
        mass = {(1 << p, p): Fraction(1, n) for p in range(n)}
        for t in range(1, n + 1):
            nxt: dict[tuple[int, int], Fraction] = {}
            for (mask, pos), m in mass.items():
                q = table.q(mask, pos)
                wm = weight * m
                if q > 0:
                    hm = wm * q
                    acc_h[t] += hm * pay[pos]
                    rej_h[t] += hm * mean_pay(full ^ mask)
                    mass_h[t] += hm
                if q < 1:
                    nm = wm * (1 - q)
                    acc_n[t] += nm * pay[pos]
                    mass_n[t] += nm
                    if t < n:
                        share = m * (1 - q) / (n - t)
                        for j in range(n):
                            if not (mask >> j) & 1:
                                key = (mask | (1 << j), j)
                                nxt[key] = nxt.get(key, ZERO) + share
            mass = nxt

    violations: list[InfoSetNote] = []
    indifferent: list[InfoSetNote] = []
    v_hire = [ZERO] * (n + 2)
    v_not = [ZERO] * (n + 2)
    for t in range(n, 0, -1):
        v_hire[t] = max(acc_h[t], rej_h[t])
        cont = v_hire[t + 1] + v_not[t + 1]
        v_not[t] = max(acc_n[t], cont)
        if mass_h[t] > 0:
            note = InfoSetNote(t, Signal.HIRE, "signals: all NOT, then HIRE",
                               acc_h[t] / mass_h[t], rej_h[t] / mass_h[t])
            if rej_h[t] > acc_h[t]:
                violations.append(note)
            elif rej_h[t] == acc_h[t]:
                indifferent.append(note)
        if mass_n[t] > 0:
            note = InfoSetNote(t, Signal.NOT, "signals: all NOT so far",
                               cont / mass_n[t], acc_n[t] / mass_n[t])
            if acc_n[t] > cont:
                violations.append(note)
            elif acc_n[t] == cont:
                indifferent.append(note)

    v_best = v_hire[1] + v_not[1]
    v_obed = sum((acc_h[t] for t in range(1, n + 1)), ZERO)
    violations.sort(key=lambda v: v.round)
    indifferent.sort(key=lambda v: v.round)
    return PersuasivenessReport(
        persuasive=(v_best == v_obed),
        v_obedient=v_obed,
        v_best_response=v_best,
        violations=tuple(violations),
        indifferent=tuple(indifferent),
    )


def _check_disclosure(inst, policy, scenario, pay) -> PersuasivenessReport:
    n = inst.n
    full = (1 << n) - 1
    weights = [w for w, _ in policy.branches]
    tables = [_PolicyTable(inst, branch, scenario) for _, branch in policy.branches]
    nb = len(tables)
    ids = [c.id for c in inst.candidates]

    off_memo: dict[int, Fraction] = {0: ZERO}

    def v_off(mask: int) -> Fraction:
        v = off_memo.get(mask)
        if v is not None:
            return v
        k = mask.bit_count()
        accept = _mean_over_mask(pay, mask)
        cont = sum((v_off(mask & ~(1 << p)) for p in range(n) if (mask >> p) & 1),
                   ZERO) / k
        v = max(accept, cont)
        off_memo[mask] = v
        return v

    memo: dict[tuple[int, tuple[Fraction, ...]], tuple[Fraction, Fraction]] = {}
    violations: dict[tuple, InfoSetNote] = {}
    indifferent: dict[tuple, InfoSetNote] = {}

    def node(mask: int, likes: tuple[Fraction, ...]) -> tuple[Fraction, Fraction]:
        """(best, obedient) value sums for the round deciding on ``mask``,
        scaled by the per-branch reach likelihoods ``likes``."""
        key = (mask, likes)
        hit = memo.get(key)
        if hit is not None:
            return hit
        k = mask.bit_count()
        t = n - k + 1
        arrived_base = full ^ mask
        hire_acc = hire_rej = hire_mass = ZERO
        not_acc = not_mass = ZERO
        cont_best = cont_obed = ZERO
        for p in range(n):
            if not (mask >> p) & 1:
                continue
            amask = arrived_base | (1 << p)
            child_raw = []
            wq = wnq = ZERO
            for b in range(nb):
                q = tables[b].q(amask, p)
                wq += weights[b] * likes[b] * q
                wnq += weights[b] * likes[b] * (1 - q)
                child_raw.append(likes[b] * (1 - q))
            hire_acc += wq * pay[p]
            hire_rej += wq * v_off(mask & ~(1 << p))
            hire_mass += wq
            not_acc += wnq * pay[p]
            not_mass += wnq
            if k > 1 and any(c > 0 for c in child_raw):
                scale = max(child_raw)
                child_key = tuple(c / scale for c in child_raw)
                cb, co = node(mask & ~(1 << p), child_key)
                cont_best += scale * cb
                cont_obed += scale * co

        ctx = "remaining ids {" + ",".join(str(ids[p]) for p in range(n) if (mask >> p) & 1) + "}"
        if hire_mass > 0:
            note = InfoSetNote(t, Signal.HIRE, ctx,
                               hire_acc / hire_mass, hire_rej / hire_mass)
            if hire_rej > hire_acc:
                violations[(mask, likes, Signal.HIRE)] = note
            elif hire_rej == hire_acc:
                indifferent[(mask, likes, Signal.HIRE)] = note
        if not_mass > 0:
            note = InfoSetNote(t, Signal.NOT, ctx,
                               cont_best / not_mass, not_acc / not_mass)
            if not_acc > cont_best:
                violations[(mask, likes, Signal.NOT)] = note
            elif not_acc == cont_best:
                indifferent[(mask, likes, Signal.NOT)] = note

        v_best = (max(hire_acc, hire_rej) + max(not_acc, cont_best)) / k
        v_obed = (hire_acc + cont_obed) / k
        memo[key] = (v_best, v_obed)
        return v_best, v_obed

    v_best, v_obed = node(full, tuple([ONE] * nb))
    notes_v = sorted(violations.values(), key=lambda v: (v.round, v.context))
    notes_i = sorted(indifferent.values(), key=lambda v: (v.round, v.context))
    return PersuasivenessReport(
        persuasive=(v_best == v_obed),
        v_obedient=v_obed,
        v_best_response=v_best,
        violations=tuple(notes_v),
        indifferent=tuple(notes_i),
    )


def check_persuasive(inst: Instance, policy: MechanismPolicy,
                     scenario: ScenarioSpec) -> PersuasivenessReport:
    """Backward-induction best response over the receiver's information sets.

    Obedience must match the best response at the root for the mechanism to be
    persuasive; equalities resolve to obedience and are reported separately.
    """
    _check_scenario(policy, scenario)
    n = inst.n
    if n > PERSUASION_CAP:
        raise TooLarge(n, PERSUASION_CAP)
    pay = _payoff(inst, scenario.receiver_mode)
    if scenario.disclosure:
        return _check_disclosure(inst, policy, scenario, pay)
    return _check_no_disclosure(inst, policy, scenario, pay)


def best_so_far_dp(n: int) -> DPTable:
    """Backward recursion for the optimal best-so-far rule under exactly
    reversed rankings: u_t is the value when the newcomer leads one side,
    v_t the value after letting it go."""
    if n < 2:
        raise SecsigError("the recursion needs n >= 2")
    u = [ZERO] * (n + 1)
    v = [ZERO] * (n + 1)
    u[n] = Fraction(1, 2)
    v[n] = ZERO
    for t in range(n - 1, 0, -1):
        v[t] = Fraction(2, t + 1) * u[t + 1] + Fraction(t - 1, t + 1) * v[t + 1]
        u[t] = max(Fraction(t, 2 * n), v[t])
    threshold = next(t for t in range(1, n + 1) if Fraction(t, 2 * n) > v[t])
    return DPTable(u=tuple(u[1:]), v=tuple(v[1:]), threshold=threshold)


def benchmark_value(inst: Instance, sender_mode: UtilityMode,
                    receiver_mode: UtilityMode) -> Fraction:
    """Sender value of the optimal persuasive mechanism in the benchmark
    scenario (basic knowledge, no disclosure) for the given receiver."""
    if receiver_mode is UtilityMode.CARDINAL:
        return pareto_procedure(inst, sender_mode).opt_value
    # Ordinal receiver: waiting for the sender's best, with a 1/n side bet on
    # the receiver's best, is optimal; its value is what the mixture achieves.
    from .mechanisms import elementary

    scenario = ScenarioSpec(Knowledge.BASIC, False, sender_mode, receiver_mode)
    report = exact_evaluate(inst, elementary(inst), scenario)
    return report.sender_objective(sender_mode)


def approximation_ratio(inst: Instance, policy: MechanismPolicy,
                        scenario: ScenarioSpec) -> Fraction:
    """Sender objective of the policy divided by the benchmark optimum."""
    opt = benchmark_value(inst, scenario.sender_mode, scenario.receiver_mode)
    if opt == 0:
        raise ZeroBenchmark("benchmark optimum is 0; the ratio is undefined")
    report = exact_evaluate(inst, policy, scenario)
    return report.sender_objective(scenario.sender_mode) / opt


# ---------------------------------------------------------------------------
# Constrained search over recommendation tables on the two-pool construction
# ---------------------------------------------------------------------------

def incentive_constraint_search(n: int, grid_resolution: int = 4):
    """Maximize the probability of hiring the sender-only candidate on the
    pool with one receiver-favorite and mid-level fillers, over per-round
    recommendation tables obeying the cross-pool obedience inequalities.

    The search runs a backward induction over (round, who-arrived classes)
    with each class's probabilities drawn from a grid, then also evaluates
    the always-recommend table.  Returns (max success, argmax table).
    """
    if n > PERSUASION_CAP:
        raise TooLarge(n, PERSUASION_CAP)
    if n < 3:
        raise SecsigError("the construction needs n >= 3")
    g = grid_resolution
    grid = [Fraction(i, g) for i in range(g + 1)]

    # States with the sender-only candidate still unseen; b_seen flags the
    # receiver favorite.  Success is impossible once the target is rejected.
    w: dict[tuple[int, bool], Fraction] = {}
    argmax: dict[tuple[int, bool], tuple] = {}

    def seen_counts_ok(t: int, b_seen: bool) -> bool:
        c_seen = (t - 1) - (1 if b_seen else 0)
        return 0 <= c_seen <= n - 2

    for t in range(n, 0, -1):
        for b_seen in (False, True):
            if not seen_counts_ok(t, b_seen):
                continue
            rem = n - t + 1
            if t == n:
                w[(t, b_seen)] = ONE  # the target is the only one left
                continue
            if b_seen:
                # remaining: target + fillers; params (p_target, p_filler)
                best = None
                best_params = None
                nxt = w.get((t + 1, True), ZERO)
                for p_t in grid:
                    for p_f in grid:
                        if p_f < p_t:
                            continue  # obedience: fillers at least as likely
                        val = (Fraction(1, rem) * p_t
                               + Fraction(rem - 1, rem) * (1 - p_f) * nxt)
                        if best is None or val > best:
                            best, best_params = val, (p_t, p_f)
                w[(t, True)] = best
                argmax[(t, True)] = best_params
            else:
                # remaining: target, favorite, fillers; params ordered
                # (p_target, p_favorite, p_filler)
                best = None
                best_params = None
                nxt_same = w.get((t + 1, False), ZERO)
                nxt_b = w.get((t + 1, True), ZERO)
                for p_t in grid:
                    for p_b in grid:
                        if p_b < p_t:
                            continue
                        for p_f in grid:
                            if p_f < p_t:
                                continue
                            val = (Fraction(1, rem) * p_t
                                   + Fraction(1, rem) * (1 - p_b) * nxt_b
                                   + Fraction(rem - 2, rem) * (1 - p_f) * nxt_same)
                            if best is None or val > best:
                                best, best_params = val, (p_t, p_b, p_f)
                w[(t, False)] = best
                argmax[(t, False)] = best_params
    grid_best = w[(1, False)]
    always = Fraction(1, n)  # recommend round 1 outright: the target is first w.p. 1/n
    if always >= grid_best:
        ones = {(t, b): tuple([ONE] * (2 if b else 3)) for (t, b) in argmax}
        return always, {"policy": "always-recommend", "per_state": ones}
    return grid_best, {"policy": "grid", "per_state": argmax}
