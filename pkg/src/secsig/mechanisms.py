"""Every signaling mechanism as a MechanismPolicy behind one constructor each.

Policies are pure functions of the sender view; per-round lotteries are
marginalized into exact HIRE probabilities.  Up-front coin flips appear as
branch mixtures.  All constructors leave the off-path rule at the default:
after a refused HIRE the mechanism signals NOT forever.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .core import (
    ONE,
    ZERO,
    BehavioralPolicy,
    Instance,
    Knowledge,
    MechanismPolicy,
    SecsigError,
    SenderView,
    UtilityMode,
    best_candidates,
)
from .lp import NESTED_CAP, nested_lp_policy
from .pareto import ParetoResult, pareto_procedure

# e to twelve decimal digits; the complement branch weight is exact one-minus,
# so mixture weights still sum to exactly 1.
E_RATIONAL = Fraction(2_718_281_828_459, 10**12)


class Selector(Enum):
    SENDER_VALUES = "sender"
    RECEIVER_VALUES = "receiver"


@dataclass(frozen=True)
class SampleSize:
    """Number of guaranteed-NOT rounds at the start of a sampling mechanism."""

    s: int

    def validated(self, n: int, minimum: int = 0) -> int:
        if not (minimum <= self.s <= n - 1):
            raise SecsigError(f"sample size {self.s} out of range [{minimum}, {n - 1}]")
        return self.s


def sample_floor_inv_sqrt3(n: int) -> int:
    """floor(n / sqrt(3)), computed exactly."""
    return math.isqrt(n * n // 3)


def sample_floor_half(n: int) -> int:
    return n // 2


def sample_floor_inv_e(n: int) -> int:
    return int(n / E_RATIONAL)


@dataclass(frozen=True)
class BestSoFarTable:
    """Per-round HIRE probabilities for best-so-far candidates.

    ``p_sender[t-1]`` applies when the current candidate leads in sender value,
    ``p_receiver[t-1]`` when it leads in receiver value; with both leads the
    two chances compose as independent coins.  Symmetric tables use the same
    vector on both sides.
    """

    p_sender: tuple[Fraction, ...]
    p_receiver: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.p_sender) != len(self.p_receiver):
            raise SecsigError("both probability vectors must cover the same rounds")
        for p in self.p_sender + self.p_receiver:
            if not (0 <= p <= 1):
                raise SecsigError("table entries must lie in [0, 1]")

    @classmethod
    def symmetric(cls, p: list[Fraction] | tuple[Fraction, ...]) -> "BestSoFarTable":
        return cls(p_sender=tuple(p), p_receiver=tuple(p))


def _is_best_so_far(view: SenderView, value) -> bool:
    cur = view.current
    best = max(view.arrived, key=lambda c: (value(c), -c.id))
    return best.id == cur.id


def _lottery_prob(res: ParetoResult, cid: int) -> Fraction:
    p = ZERO
    if cid == res.a:
        p += res.alpha
    if cid == res.b:
        p += 1 - res.alpha
    return p


def _mixture(name: str, knowledge: Knowledge,
             branches: list[tuple[Fraction, BehavioralPolicy]],
             **params) -> MechanismPolicy:
    kept = tuple((w, pol) for w, pol in branches if w > 0)
    return MechanismPolicy(name=name, knowledge=knowledge, branches=kept,
                           params=tuple(sorted(params.items())))


def _target_policy(target_id: int) -> BehavioralPolicy:
    def policy(view: SenderView) -> Fraction:
        return ONE if view.current.id == target_id else ZERO
    return policy


def pareto_mechanism(inst: Instance, sender_mode: UtilityMode) -> MechanismPolicy:
    """Benchmark-optimal mechanism: draw the frontier lottery up front and
    signal HIRE exactly when the drawn candidate arrives."""
    res = pareto_procedure(inst, sender_mode)
    if res.a == res.b:
        branches = [(ONE, _target_policy(res.a))]
    else:
        branches = [(res.alpha, _target_policy(res.a)),
                    (1 - res.alpha, _target_policy(res.b))]
    return _mixture("pareto", Knowledge.BASIC, branches, sender_mode=sender_mode.value)


def growing_pareto(n: int, s: SampleSize | int,
                   sender_mode: UtilityMode = UtilityMode.CARDINAL) -> MechanismPolicy:
    """Sample s rounds, then per round rerun the frontier lottery on the set
    arrived so far and signal HIRE when the lottery picks the newcomer."""
    s_val = (s if isinstance(s, SampleSize) else SampleSize(s)).validated(n, minimum=1)
    # keyed by full value tuples: the policy is not bound to one instance
    cache: dict[tuple, ParetoResult] = {}

    def policy(view: SenderView) -> Fraction:
        t = view.round
        if t <= s_val:
            return ZERO
        if t == n:
            return ONE
        key = tuple(sorted((c.id, c.rho, c.xi) for c in view.arrived))
        res = cache.get(key)
        if res is None:
            res = pareto_procedure(Instance(tuple(sorted(view.arrived, key=lambda c: c.id))),
                                   sender_mode)
            cache[key] = res
        return _lottery_prob(res, view.current.id)

    return _mixture("growing-pareto", Knowledge.SECRETARY, [(ONE, policy)],
                    n=n, s=s_val, sender_mode=sender_mode.value)


def shrinking_pareto(inst: Instance, sender_mode: UtilityMode) -> MechanismPolicy:
    """Per round rerun the frontier lottery on the candidates still to come
    (including the current one) and signal HIRE when it picks the newcomer."""
    cache: dict[tuple[int, ...], ParetoResult] = {}

    def policy(view: SenderView) -> Fraction:
        seen_before = {c.id for c in view.arrived[:-1]}
        remaining = tuple(c for c in inst.candidates if c.id not in seen_before)
        key = tuple(c.id for c in remaining)
        res = cache.get(key)
        if res is None:
            res = pareto_procedure(Instance(remaining), sender_mode)
            cache[key] = res
        return _lottery_prob(res, view.current.id)

    return _mixture("shrinking-pareto", Knowledge.BASIC, [(ONE, policy)],
                    sender_mode=sender_mode.value)


def elementary(inst: Instance) -> MechanismPolicy:
    """Flip one coin up front: with probability 1/n wait for the receiver's
    best candidate, otherwise wait for the sender's best."""
    c_s, c_r = best_candidates(inst)
    n = inst.n
    if n == 1 or c_s == c_r:
        return _mixture("elementary", Knowledge.BASIC, [(ONE, _target_policy(c_s))])
    return _mixture("elementary", Knowledge.BASIC,
                    [(Fraction(1, n), _target_policy(c_r)),
                     (1 - Fraction(1, n), _target_policy(c_s))])


def adaptive_elementary(inst: Instance) -> MechanismPolicy:
    """Always recommend the sender's best on arrival; recommend the receiver's
    best with probability 1/(n-t) in round t.  Built for disclosure: the
    receiver-side chance exactly offsets what her best candidate's rejection
    would reveal."""
    c_s, c_r = best_candidates(inst)
    n = inst.n

    def policy(view: SenderView) -> Fraction:
        cur = view.current
        if cur.id == c_s or view.round == n:
            return ONE
        if cur.id == c_r:
            return Fraction(1, n - view.round)
        return ZERO

    return _mixture("adaptive-elementary", Knowledge.BASIC, [(ONE, policy)])


def dynkin(n: int, s: SampleSize | int, selector: Selector) -> BehavioralPolicy:
    """Classic sampling rule as a bare behavioral policy: reject the first s,
    then hire the first candidate that leads the chosen player's values."""
    s_val = (s if isinstance(s, SampleSize) else SampleSize(s)).validated(n)
    value = (lambda c: c.xi) if selector is Selector.SENDER_VALUES else (lambda c: c.rho)

    def policy(view: SenderView) -> Fraction:
        t = view.round
        if t <= s_val:
            return ZERO
        if t == n:
            return ONE
        return ONE if _is_best_so_far(view, value) else ZERO

    return policy


def simple_secretary(n: int) -> MechanismPolicy:
    """Mix the sender-value and receiver-value sampling rules with an up-front
    coin weighted e/n toward the receiver's variant."""
    if n < 3:
        raise SecsigError("the mixed sampling mechanism needs n >= 3 (weight e/n must be <= 1)")
    s = sample_floor_inv_e(n)
    w_r = E_RATIONAL / n
    return _mixture("simple-secretary", Knowledge.SECRETARY,
                    [(w_r, dynkin(n, s, Selector.RECEIVER_VALUES)),
                     (1 - w_r, dynkin(n, s, Selector.SENDER_VALUES))],
                    n=n, s=s)


def first_opt(n: int, s: SampleSize | int | None = None) -> MechanismPolicy:
    """Reject the first s, then hire the first candidate that leads either
    player's values."""
    s_val = (SampleSize(n // 2) if s is None
             else (s if isinstance(s, SampleSize) else SampleSize(s))).validated(n)

    def policy(view: SenderView) -> Fraction:
        t = view.round
        if t <= s_val:
            return ZERO
        if t == n:
            return ONE
        if _is_best_so_far(view, lambda c: c.xi) or _is_best_so_far(view, lambda c: c.rho):
            return ONE
        return ZERO

    return _mixture("first-opt", Knowledge.SECRETARY, [(ONE, policy)], n=n, s=s_val)


def trivial(n: int) -> MechanismPolicy:
    """Recommend a uniformly random round, committed up front."""
    def hire_at(k: int) -> BehavioralPolicy:
        def policy(view: SenderView) -> Fraction:
            return ONE if view.round == k else ZERO
        return policy

    return _mixture("trivial", Knowledge.SECRETARY,
                    [(Fraction(1, n), hire_at(k)) for k in range(1, n + 1)], n=n)


def nested_lp_mechanism(inst: Instance, sender_mode: UtilityMode,
                        cap: int = NESTED_CAP) -> MechanismPolicy:
    """Play the subset-LP tables: in each round look up the remaining set and
    signal HIRE with that subset's stored probability for the arrival."""
    tables = nested_lp_policy(inst, sender_mode, cap=cap)
    full = (1 << inst.n) - 1

    def policy(view: SenderView) -> Fraction:
        mask = full
        for c in view.arrived[:-1]:
            mask &= ~(1 << c.id)
        return tables.hire_probability(mask, view.current.id)

    return _mixture("nested-lp", Knowledge.BASIC, [(ONE, policy)],
                    sender_mode=sender_mode.value)


def best_so_far_mechanism(n: int, table: BestSoFarTable) -> MechanismPolicy:
    """Signal HIRE only on candidates that lead one player's values so far,
    with the table's per-round probabilities; always HIRE in the last round."""
    if len(table.p_sender) < n - 1:
        raise SecsigError(f"table must cover rounds 1..{n - 1}")

    def policy(view: SenderView) -> Fraction:
        t = view.round
        if t == n:
            return ONE
        p = ONE
        if _is_best_so_far(view, lambda c: c.xi):
            p *= 1 - table.p_sender[t - 1]
        if _is_best_so_far(view, lambda c: c.rho):
            p *= 1 - table.p_receiver[t - 1]
        return 1 - p

    return _mixture("best-so-far", Knowledge.SECRETARY, [(ONE, policy)], n=n)


MECHANISM_NAMES = (
    "pareto", "growing-pareto", "shrinking-pareto", "elementary",
    "adaptive-elementary", "simple-secretary", "first-opt", "trivial",
    "nested-lp", "best-so-far",
)


def default_sample_size(name: str, n: int, sender_mode: UtilityMode) -> int | None:
    """The sample sizes the guarantees are stated for."""
    if name == "growing-pareto":
        return sample_floor_inv_sqrt3(n) if sender_mode is UtilityMode.CARDINAL else n // 2
    if name == "first-opt":
        return n // 2
    if name == "simple-secretary":
        return sample_floor_inv_e(n)
    return None


def make_mechanism(name: str, *, inst: Instance | None = None, n: int | None = None,
                   s: int | None = None, sender_mode: UtilityMode = UtilityMode.CARDINAL,
                   table: BestSoFarTable | None = None) -> MechanismPolicy:
    """Uniform constructor used by the CLI: instance-based mechanisms require
    ``inst``; sampling mechanisms require ``n`` (and accept ``s``)."""
    def need_inst() -> Instance:
        if inst is None:
            raise SecsigError(f"mechanism {name!r} needs an instance")
        return inst

    def need_n() -> int:
        if n is not None:
            return n
        if inst is not None:
            return inst.n
        raise SecsigError(f"mechanism {name!r} needs n")

    if name == "pareto":
        return pareto_mechanism(need_inst(), sender_mode)
    if name == "growing-pareto":
        nn = need_n()
        s_val = s if s is not None else default_sample_size(name, nn, sender_mode)
        return growing_pareto(nn, s_val, sender_mode)
    if name == "shrinking-pareto":
        return shrinking_pareto(need_inst(), sender_mode)
    if name == "elementary":
        return elementary(need_inst())
    if name == "adaptive-elementary":
        return adaptive_elementary(need_inst())
    if name == "simple-secretary":
        return simple_secretary(need_n())
    if name == "first-opt":
        nn = need_n()
        return first_opt(nn, s if s is not None else nn // 2)
    if name == "trivial":
        return trivial(need_n())
    if name == "nested-lp":
        return nested_lp_mechanism(need_inst(), sender_mode)
    if name == "best-so-far":
        if table is None:
            raise SecsigError("best-so-far needs a probability table")
        return best_so_far_mechanism(need_n(), table)
    raise SecsigError(f"unknown mechanism {name!r}; choose from {', '.join(MECHANISM_NAMES)}")
