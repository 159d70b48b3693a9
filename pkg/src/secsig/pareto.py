"""Upper frontier geometry and the benchmark optimal signal.

The benchmark optimum is a lottery over at most two candidates on the upper
frontier of the (rho, xi) point cloud, chosen so the receiver's conditional
expected value is at least the pool mean.  All geometry uses exact rational
cross-product orientation tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import (
    ZERO,
    AllRemoved,
    Candidate,
    Instance,
    SecsigError,
    UtilityMode,
    best_candidates,
    mu_receiver,
)

Point = tuple[Fraction, Fraction]


@dataclass(frozen=True)
class FrontierPolyline:
    """Vertices of the non-dominated upper-convex boundary, rho ascending."""

    points: tuple[Point, ...]

    def __post_init__(self):
        pts = self.points
        if not pts:
            raise SecsigError("frontier cannot be empty")
        for (r0, x0), (r1, x1) in zip(pts, pts[1:]):
            if not (r0 < r1 and x1 <= x0):
                raise SecsigError("frontier must have strictly increasing rho and non-increasing xi")
        for (r0, x0), (r1, x1), (r2, x2) in zip(pts, pts[1:], pts[2:]):
            # concavity: slope(p0,p1) >= slope(p1,p2), denominators positive
            if (x1 - x0) * (r2 - r1) < (x2 - x1) * (r1 - r0):
                raise SecsigError("frontier segments must have non-increasing slope")


@dataclass(frozen=True)
class ParetoResult:
    """Optimal two-point lottery: candidate ``a`` with probability ``alpha``,
    candidate ``b`` with the rest.  ``a == b`` means a deterministic pick."""

    a: int
    b: int
    alpha: Fraction
    mu_r: Fraction
    opt_value: Fraction


@dataclass(frozen=True)
class LPSolution:
    """A feasible maximizer: per-candidate recommendation probabilities."""

    x: tuple[Fraction, ...]
    objective: Fraction


def upper_convex_frontier(points: Sequence[Point]) -> FrontierPolyline:
    """Maximal non-dominated upper-convex boundary of a point set.

    Duplicates collapse, dominated points drop out, and collinear interior
    points are removed, all with exact arithmetic.
    """
    if not points:
        raise SecsigError("need at least one point")
    # Sort by rho descending, xi descending; keep strict xi improvements.
    # This removes duplicates and dominated points in one scan.
    undominated: list[Point] = []
    best_xi: Fraction | None = None
    for p in sorted(set(points), key=lambda q: (-q[0], -q[1])):
        if best_xi is None or p[1] > best_xi:
            undominated.append(p)
            best_xi = p[1]
    undominated.reverse()  # rho ascending, xi strictly descending

    hull: list[Point] = []
    for p in undominated:
        while len(hull) >= 2:
            (r0, x0), (r1, x1) = hull[-2], hull[-1]
            # pop the middle point when it lies on or below the chord
            if (r1 - r0) * (p[1] - x0) - (p[0] - r0) * (x1 - x0) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return FrontierPolyline(tuple(hull))


def _lenient_normalize(inst: Instance, sender_mode: UtilityMode) -> Instance:
    """Normalization used inside the procedure: a zero maximum on either axis
    simply skips scaling for that axis instead of raising, so adaptive
    mechanisms can run on degenerate sub-pools."""
    rho_max = max(c.rho for c in inst.candidates)
    xi_max = max(c.xi for c in inst.candidates)
    c_s, _ = best_candidates(inst)
    cands = []
    for c in inst.candidates:
        xi = c.xi
        if sender_mode is UtilityMode.ORDINAL and c.id != c_s:
            xi = ZERO
        rho = c.rho / rho_max if rho_max > 0 else c.rho
        xi = xi / xi_max if xi_max > 0 else xi
        cands.append(Candidate(id=c.id, rho=rho, xi=xi))
    return Instance(tuple(cands))


def pareto_procedure(inst: Instance, sender_mode: UtilityMode) -> ParetoResult:
    """Compute the benchmark-optimal lottery (a, b, alpha).

    If the sender-best candidate already offers the receiver at least the pool
    mean it is picked deterministically.  Otherwise (a, b) is the frontier
    segment crossing the vertical line at the pool mean, with alpha solving the
    mean-value equation.  ``mu_r`` and ``opt_value`` are reported in the
    original, unscaled units.
    """
    norm = _lenient_normalize(inst, sender_mode)
    mu_norm = mu_receiver(norm)
    c_s, _ = best_candidates(inst)
    mu_orig = mu_receiver(inst)

    def result(a: int, b: int, alpha: Fraction) -> ParetoResult:
        if sender_mode is UtilityMode.ORDINAL:
            opt = alpha * (1 if a == c_s else 0) + (1 - alpha) * (1 if b == c_s else 0)
        else:
            opt = alpha * inst.by_id(a).xi + (1 - alpha) * inst.by_id(b).xi
        return ParetoResult(a=a, b=b, alpha=alpha, mu_r=mu_orig, opt_value=opt)

    if norm.by_id(c_s).rho >= mu_norm:
        return result(c_s, c_s, Fraction(1))

    # Smallest candidate id at each normalized point, for canonical endpoints.
    owner: dict[Point, int] = {}
    for c in norm.candidates:
        key = (c.rho, c.xi)
        if key not in owner or c.id < owner[key]:
            owner[key] = c.id
    frontier = upper_convex_frontier(list(owner.keys()))
    pts = frontier.points

    if mu_norm <= pts[0][0]:
        return result(owner[pts[0]], owner[pts[0]], Fraction(1))
    for left, right in zip(pts, pts[1:]):
        if left[0] <= mu_norm <= right[0]:
            if mu_norm == left[0]:
                return result(owner[left], owner[left], Fraction(1))
            if mu_norm == right[0]:
                return result(owner[right], owner[right], Fraction(1))
            a, b = owner[left], owner[right]
            rho_a, rho_b = left[0], right[0]
            if rho_a == rho_b:
                alpha = Fraction(1)
            elif left[1] == right[1]:
                alpha = Fraction(0)
            else:
                alpha = (mu_norm - rho_b) / (rho_a - rho_b)
            return result(a, b, alpha)
    raise SecsigError("pool mean exceeds the maximal receiver value")  # unreachable


def solve_benchmark_lp(inst: Instance, sender_mode: UtilityMode) -> LPSolution:
    """Benchmark optimum by direct vertex enumeration, independent of the
    frontier procedure: singletons plus all pairs with the mean-value
    constraint tight.  Serves as the oracle for the procedure."""
    mu = mu_receiver(inst)
    n = inst.n
    c_s, _ = best_candidates(inst)
    if sender_mode is UtilityMode.ORDINAL:
        xi = [Fraction(1) if c.id == c_s else ZERO for c in inst.candidates]
    else:
        xi = [c.xi for c in inst.candidates]
    rho = [c.rho for c in inst.candidates]

    best_obj: Fraction | None = None
    best_x: list[Fraction] | None = None

    def consider(x: list[Fraction], obj: Fraction):
        nonlocal best_obj, best_x
        if best_obj is None or obj > best_obj:
            best_obj, best_x = obj, x

    for i in range(n):
        if rho[i] >= mu:
            x = [ZERO] * n
            x[i] = Fraction(1)
            consider(x, xi[i])
    for i in range(n):
        for j in range(i + 1, n):
            if rho[i] == rho[j]:
                continue
            lam = (mu - rho[j]) / (rho[i] - rho[j])
            if 0 <= lam <= 1:
                x = [ZERO] * n
                x[i], x[j] = lam, 1 - lam
                consider(x, lam * xi[i] + (1 - lam) * xi[j])
    assert best_x is not None  # uniform x is always feasible, so a vertex exists
    return LPSolution(x=tuple(best_x), objective=best_obj)


def opt_minus(inst: Instance, removed: Iterable[int], sender_mode: UtilityMode) -> Fraction:
    """Benchmark optimum on the sub-pool with ``removed`` ids deleted.

    The pool mean is recomputed on the sub-pool.  Under an ordinal sender the
    value counts hires of the *original* sender-best candidate, so removing it
    yields 0.
    """
    gone = set(removed)
    kept = [c for c in inst.candidates if c.id not in gone]
    if not kept:
        raise AllRemoved("the sub-pool is empty")
    c_s, _ = best_candidates(inst)
    if sender_mode is UtilityMode.ORDINAL and c_s in gone:
        return ZERO
    return pareto_procedure(Instance(tuple(kept)), sender_mode).opt_value
