"""Domain types shared by every other module: candidates, instances, scenarios,
signals, sender/receiver views, and the mechanism-policy interface.

All values are arbitrary-precision rationals (fractions.Fraction); floats enter
only through the Monte Carlo path in :mod:`secsig.montecarlo`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Sequence

RationalLike = int | str | Fraction


class SecsigError(Exception):
    """Base class for all domain errors raised by this package."""


class EmptyInstance(SecsigError):
    pass


class NegativeValue(SecsigError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"candidate {index} has a negative value")


class DegenerateInstance(SecsigError):
    pass


class TooLarge(SecsigError):
    def __init__(self, n: int, cap: int):
        self.n = n
        self.cap = cap
        super().__init__(f"n={n} exceeds the exact-computation cap of {cap}")


class TooSmall(SecsigError):
    pass


class AllRemoved(SecsigError):
    pass


class ZeroBenchmark(SecsigError):
    pass


class ScenarioMismatch(TypeError, SecsigError):
    """A mechanism was evaluated under a scenario it cannot observe."""


class Knowledge(Enum):
    BASIC = "basic"          # sender knows the full candidate set upfront
    SECRETARY = "secretary"  # sender learns values only on arrival


class UtilityMode(Enum):
    ORDINAL = "ordinal"      # maximize probability of getting one's single best
    CARDINAL = "cardinal"    # maximize expected value of the hire


class Signal(Enum):
    HIRE = "HIRE"
    NOT = "NOT"


class Action(Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"


def parse_rational(raw: RationalLike) -> Fraction:
    """Parse an int, a 'p/q' string, or a decimal string into an exact Fraction."""
    if isinstance(raw, Fraction):
        return raw
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, str):
        return Fraction(raw)  # handles both "p/q" and exact decimal strings
    if isinstance(raw, float):
        raise TypeError("floats are not accepted; pass an int, Fraction, or string")
    raise TypeError(f"cannot parse {raw!r} as a rational")


def format_rational(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


@dataclass(frozen=True)
class Candidate:
    """One candidate: receiver utility ``rho`` and sender utility ``xi``."""

    id: int
    rho: Fraction
    xi: Fraction

    def __post_init__(self):
        if self.rho < 0 or self.xi < 0:
            raise NegativeValue(self.id)


@dataclass(frozen=True)
class Instance:
    """An ordered pool of candidates with unique ids.

    ``distinct_values`` records whether all rho values are pairwise distinct and
    all xi values are pairwise distinct.  The flag is informational: ties are
    always broken by smallest candidate id.
    """

    candidates: tuple[Candidate, ...]
    name: str | None = None

    def __post_init__(self):
        if not self.candidates:
            raise EmptyInstance("instance must contain at least one candidate")
        ids = [c.id for c in self.candidates]
        if len(set(ids)) != len(ids):
            raise SecsigError("candidate ids must be unique within an instance")

    @property
    def n(self) -> int:
        return len(self.candidates)

    @property
    def distinct_values(self) -> bool:
        rhos = [c.rho for c in self.candidates]
        xis = [c.xi for c in self.candidates]
        return len(set(rhos)) == len(rhos) and len(set(xis)) == len(xis)

    def rho_vector(self) -> tuple[Fraction, ...]:
        return tuple(c.rho for c in self.candidates)

    def xi_vector(self) -> tuple[Fraction, ...]:
        return tuple(c.xi for c in self.candidates)

    def by_id(self, cid: int) -> Candidate:
        for c in self.candidates:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def without_ids(self, removed: Iterable[int]) -> "Instance":
        gone = set(removed)
        kept = tuple(c for c in self.candidates if c.id not in gone)
        if not kept:
            raise AllRemoved("cannot remove every candidate")
        return Instance(kept)


@dataclass(frozen=True)
class ScenarioSpec:
    """Knowledge regime, disclosure flag, and both players' utility modes."""

    knowledge: Knowledge
    disclosure: bool
    sender_mode: UtilityMode
    receiver_mode: UtilityMode


@dataclass(frozen=True)
class SenderView:
    """Everything a signaling policy may read in a given round.

    ``arrived`` lists the candidates revealed so far; the current round's
    candidate is always ``arrived[-1]``.  ``prior_instance`` is present only
    under basic knowledge; constructing a secretary-knowledge view that carries
    one is rejected so a policy structurally cannot peek at unarrived values.

    Behavioral policies must be pure and may depend on the arrival history only
    through (round, set of arrived candidates, current candidate, signal and
    action history); the exact evaluators exploit this exchangeability.
    """

    round: int
    arrived: tuple[Candidate, ...]
    past_signals: tuple[Signal, ...]
    past_actions: tuple[Action, ...]
    knowledge: Knowledge
    prior_instance: Instance | None = None

    def __post_init__(self):
        if self.round < 1 or len(self.arrived) != self.round:
            raise SecsigError("view must contain exactly `round` arrived candidates")
        if len(self.past_signals) != self.round - 1 or len(self.past_actions) != self.round - 1:
            raise SecsigError("signal/action history must have length round - 1")
        if self.knowledge is Knowledge.SECRETARY and self.prior_instance is not None:
            raise SecsigError("secretary knowledge forbids a prior instance in the view")
        if Action.ACCEPTED in self.past_actions:
            raise SecsigError("an accepted candidate ends the process; no later view exists")

    @property
    def current(self) -> Candidate:
        return self.arrived[-1]


@dataclass(frozen=True)
class ReceiverView:
    """The receiver's information set: signals, disclosed rejects, and the pool."""

    round: int
    signals: tuple[Signal, ...]
    known_instance: Instance
    disclosure: bool
    disclosed: tuple[Candidate, ...] = ()

    def __post_init__(self):
        if len(self.signals) != self.round:
            raise SecsigError("receiver sees one signal per round up to the current one")
        if self.disclosure:
            if len(self.disclosed) != self.round - 1:
                raise SecsigError("disclosure reveals exactly the rejected candidates so far")
        elif self.disclosed:
            raise SecsigError("no candidates are disclosed without disclosure")


# A behavioral policy maps a sender view to an exact HIRE probability.
BehavioralPolicy = Callable[[SenderView], Fraction]

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class MechanismPolicy:
    """A mixture of behavioral signaling policies.

    Branch weights are positive rationals summing to exactly one; the up-front
    coin picks a branch, after which the branch's policy runs alone.  After the
    receiver refuses a HIRE the mechanism signals NOT in every remaining round
    (the evaluators enforce this off-path convention).
    """

    name: str
    knowledge: Knowledge
    branches: tuple[tuple[Fraction, BehavioralPolicy], ...]
    params: tuple[tuple[str, object], ...] = ()

    def __post_init__(self):
        if not self.branches:
            raise SecsigError("a mechanism needs at least one branch")
        total = ZERO
        for weight, _ in self.branches:
            if not (0 < weight <= 1):
                raise SecsigError("branch weights must lie in (0, 1]")
            total += weight
        if total != 1:
            raise SecsigError("branch weights must sum to exactly 1")

    def param(self, key: str, default=None):
        for k, v in self.params:
            if k == key:
                return v
        return default


def validate_instance(raw: Sequence[tuple[RationalLike, RationalLike]],
                      name: str | None = None) -> Instance:
    """Build an Instance from (rho, xi) pairs, assigning ids 0..n-1 in order."""
    if not raw:
        raise EmptyInstance("no candidates given")
    cands = []
    for idx, (rho, xi) in enumerate(raw):
        r, x = parse_rational(rho), parse_rational(xi)
        if r < 0 or x < 0:
            raise NegativeValue(idx)
        cands.append(Candidate(id=idx, rho=r, xi=x))
    return Instance(tuple(cands), name=name)


def mu_receiver(inst: Instance) -> Fraction:
    """Mean receiver value over the pool: the receiver's outside-option value."""
    return sum((c.rho for c in inst.candidates), ZERO) / inst.n


def best_candidates(inst: Instance) -> tuple[int, int]:
    """Ids of the sender-best (max xi) and receiver-best (max rho) candidates.

    Ties break toward the smallest id.
    """
    c_s = max(inst.candidates, key=lambda c: (c.xi, -c.id)).id
    c_r = max(inst.candidates, key=lambda c: (c.rho, -c.id)).id
    return c_s, c_r


def normalize_for_mode(inst: Instance, sender_mode: UtilityMode) -> Instance:
    """Scale rho and xi so both maxima equal 1; under an ordinal sender, zero
    out xi for everyone except the sender-best candidate first.

    Raises DegenerateInstance when either maximum is 0.
    """
    rho_max = max(c.rho for c in inst.candidates)
    xi_max = max(c.xi for c in inst.candidates)
    if rho_max == 0 or xi_max == 0:
        raise DegenerateInstance("both a positive rho and a positive xi are required")
    c_s, _ = best_candidates(inst)
    cands = []
    for c in inst.candidates:
        xi = c.xi
        if sender_mode is UtilityMode.ORDINAL and c.id != c_s:
            xi = ZERO
        cands.append(Candidate(id=c.id, rho=c.rho / rho_max, xi=xi / xi_max))
    return Instance(tuple(cands), name=inst.name)


# ---------------------------------------------------------------------------
# Instance file format
# ---------------------------------------------------------------------------

def instance_to_json(inst: Instance) -> str:
    doc = {
        "candidates": [
            {"rho": format_rational(c.rho), "xi": format_rational(c.xi)}
            for c in inst.candidates
        ]
    }
    if inst.name:
        doc["name"] = inst.name
    return json.dumps(doc, indent=2)


def instance_from_json(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SecsigError(f"instance file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "candidates" not in doc:
        raise SecsigError('instance file needs a top-level "candidates" list')
    pairs = []
    for entry in doc["candidates"]:
        if not isinstance(entry, dict) or "rho" not in entry or "xi" not in entry:
            raise SecsigError('each candidate needs "rho" and "xi" fields')
        pairs.append((entry["rho"], entry["xi"]))
    return validate_instance(pairs, name=doc.get("name"))


def load_instance(path) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_json(fh.read())


def save_instance(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(instance_to_json(inst))
        fh.write("\n")
