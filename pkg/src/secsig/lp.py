"""Exact solver for box-constrained single-inequality LPs and the subset
backward induction that yields the optimal persuasive mechanism for the
basic scenario with disclosure.

The LP family is: maximize c.x subject to w.x >= 0 and 0 <= x_i <= 1.
x = 0 is always feasible, and a basic optimum has at most one fractional
coordinate, so an exact parametric greedy suffices.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import ZERO, Instance, SecsigError, TooLarge, UtilityMode, best_candidates
from .pareto import LPSolution

NESTED_CAP = 16


@dataclass(frozen=True)
class BoxLP:
    c: tuple[Fraction, ...]
    w: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.c or len(self.c) != len(self.w):
            raise SecsigError("objective and constraint need the same positive length")


@dataclass(frozen=True)
class NestedLPPolicy:
    """Backward-induction tables keyed by candidate-subset bitmask.

    ``x[mask]`` holds hire probabilities for the members of ``mask`` in
    ascending candidate order; ``u_s``/``u_r`` are the sender's and receiver's
    expected continuation values when exactly that subset remains.
    """

    n: int
    u_s: dict[int, Fraction]
    u_r: dict[int, Fraction]
    x: dict[int, tuple[Fraction, ...]]

    def hire_probability(self, mask: int, member: int) -> Fraction:
        members = _members(mask)
        return self.x[mask][members.index(member)]


def _members(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


# Lexicographic objective keys: (true objective, tie-break, id preference).
# Tuples of Fractions compare lexicographically, which is exactly what the
# greedy needs to return one canonical optimum.

def _key(c: Fraction, tie: Fraction, i: int) -> tuple[Fraction, Fraction, Fraction]:
    return (c, tie, Fraction(1, 1 << (i + 1)))


def _scale(key, factor: Fraction):
    return tuple(k * factor for k in key)


def solve_box_lp(lp: BoxLP, tie: Sequence[Fraction] | None = None) -> LPSolution:
    """Exact optimum of max c.x s.t. w.x >= 0, x in [0,1]^m.

    Among optima the solution maximizing ``tie . x`` is returned, then the one
    preferring mass on lower indices; the result has at most one fractional
    coordinate.
    """
    m = len(lp.c)
    ties = tuple(tie) if tie is not None else (ZERO,) * m
    if len(ties) != m:
        raise SecsigError("tie-break vector length mismatch")
    keys = [_key(lp.c[i], ties[i], i) for i in range(m)]
    zero_key = (ZERO, ZERO, ZERO)

    x = [Fraction(1) if keys[i] > zero_key else ZERO for i in range(m)]
    slack = sum((lp.w[i] * x[i] for i in range(m)), ZERO)
    if slack < 0:
        # moves that raise the constraint value, cheapest per unit first
        moves = []  # (cost_key_per_unit_x, gain_per_unit_x, index, direction)
        for i in range(m):
            if x[i] == 1 and lp.w[i] < 0:
                moves.append((keys[i], -lp.w[i], i, -1))
            elif x[i] == 0 and lp.w[i] > 0:
                moves.append((_scale(keys[i], Fraction(-1)), lp.w[i], i, +1))

        def ratio_sort(mv):
            cost, gain, i, _ = mv
            # cost per unit of constraint gain, as a lex-comparable tuple
            return (_scale(cost, Fraction(1) / gain), i)

        moves.sort(key=ratio_sort)
        deficit = -slack
        for _, gain, i, direction in moves:
            if deficit == 0:
                break
            amount = min(Fraction(1), deficit / gain)
            x[i] += direction * amount
            deficit -= gain * amount
        assert deficit == 0, "x = 0 is feasible, so the greedy always closes the gap"

    fractional = sum(1 for v in x if 0 < v < 1)
    assert fractional <= 1, "basic optimum has at most one fractional coordinate"
    objective = sum((lp.c[i] * x[i] for i in range(m)), ZERO)
    return LPSolution(x=tuple(x), objective=objective)


def nested_lp_policy(inst: Instance, sender_mode: UtilityMode,
                     cap: int = NESTED_CAP) -> NestedLPPolicy:
    """Solve one LP per candidate subset, in increasing cardinality.

    For the subset C at round n-|C|+1, the LP objective trades hiring the
    current arrival against the best continuation; the single inequality keeps
    obedience worthwhile for the receiver after a HIRE.  Requires candidate
    ids 0..n-1.
    """
    n = inst.n
    if n > cap:
        raise TooLarge(n, cap)
    if [c.id for c in inst.candidates] != list(range(n)):
        raise SecsigError("nested induction expects contiguous ids 0..n-1")
    c_s, _ = best_candidates(inst)
    rho = [c.rho for c in inst.candidates]
    if sender_mode is UtilityMode.ORDINAL:
        xi = [Fraction(1) if c.id == c_s else ZERO for c in inst.candidates]
    else:
        xi = [c.xi for c in inst.candidates]

    u_s: dict[int, Fraction] = {}
    u_r: dict[int, Fraction] = {}
    xs: dict[int, tuple[Fraction, ...]] = {}

    masks_by_size: list[list[int]] = [[] for _ in range(n + 1)]
    for mask in range(1, 1 << n):
        masks_by_size[mask.bit_count()].append(mask)

    for i in range(n):
        mask = 1 << i
        u_s[mask] = xi[i]
        u_r[mask] = rho[i]
        xs[mask] = (Fraction(1),)

    for k in range(2, n + 1):
        for mask in masks_by_size[k]:
            members = _members(mask)
            rho_sum = sum((rho[i] for i in members), ZERO)
            cont = [u_s[mask & ~(1 << i)] for i in members]
            c_vec = tuple((xi[i] - cont[j]) / k for j, i in enumerate(members))
            w_vec = tuple(rho[i] - (rho_sum - rho[i]) / (k - 1) for i in members)
            sol = solve_box_lp(BoxLP(c=c_vec, w=w_vec), tie=tuple(rho[i] for i in members))
            u_s[mask] = sum(cont, ZERO) / k + sol.objective
            u_r[mask] = sum(
                (sol.x[j] * rho[i] + (1 - sol.x[j]) * u_r[mask & ~(1 << i)]
                 for j, i in enumerate(members)),
                ZERO,
            ) / k
            xs[mask] = sol.x
    return NestedLPPolicy(n=n, u_s=u_s, u_r=u_r, x=xs)


def check_redundancy(inst: Instance, policy: NestedLPPolicy) -> bool:
    """Verify that every stored subset solution also satisfies the
    NOT-signal obedience inequality under the computed receiver values."""
    rho = [c.rho for c in inst.candidates]
    for mask, x in policy.x.items():
        members = _members(mask)
        if len(members) < 2:
            continue  # vacuous for singletons
        k = len(members)
        rho_sum = sum((rho[i] for i in members), ZERO)
        hire_side = sum(
            (x[j] * (rho[i] - (rho_sum - rho[i]) / (k - 1)) for j, i in enumerate(members)),
            ZERO,
        )
        assert hire_side >= 0, "stored solutions must satisfy the HIRE constraint"
        lhs = sum(
            ((1 - x[j]) * policy.u_r[mask & ~(1 << i)] for j, i in enumerate(members)),
            ZERO,
        )
        rhs = sum(((1 - x[j]) * rho[i] for j, i in enumerate(members)), ZERO)
        if lhs < rhs:
            return False
    return True
