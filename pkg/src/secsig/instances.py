"""Generators for the named adversarial instance families and for random pools
used by the property tests.

Random generation runs on the same counter-based generator as the Monte Carlo
path (Philox keyed by seed and stream) so results are reproducible across
modules and worker counts.
"""

from __future__ import annotations

import math
from enum import Enum
from fractions import Fraction

import numpy as np

from .core import Instance, TooSmall, validate_instance


class RandomFamily(Enum):
    UNIFORM_GRID = "uniform-grid"
    ALIGNED = "aligned"
    INDEPENDENT = "independent"


def _rng(seed: int, stream: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def figure1_instance() -> Instance:
    """The eight-candidate pool used throughout the docs and tests."""
    rho = (1, 3, 6, 7, 12, 13, 14, 16)
    xi = (8, 1, 10, 4, 8, 5, 6, 2)
    return validate_instance(list(zip(rho, xi)), name="fig1")


def ub_disclosure_instance(n: int) -> Instance:
    """Pool on which announcing rejects costs the sender half the optimum:
    one valuable-but-slightly-sub-mean candidate, one worthless decoy, and
    n-2 receiver-perfect fillers."""
    if n < 3:
        raise TooSmall("the disclosure upper-bound family needs n >= 3")
    pairs = [(Fraction(n - 2, n - 1), Fraction(1)), (Fraction(0), Fraction(0))]
    pairs += [(Fraction(1), Fraction(0))] * (n - 2)
    return validate_instance(pairs, name=f"ub-disclosure-{n}")


def instance_I(n: int) -> Instance:
    """One sender-only candidate, one receiver-only candidate, fillers at 1/2."""
    if n < 3:
        raise TooSmall("instance I needs n >= 3")
    pairs = [(Fraction(0), Fraction(1)), (Fraction(1), Fraction(0))]
    pairs += [(Fraction(1, 2), Fraction(0))] * (n - 2)
    return validate_instance(pairs, name=f"instance-I-{n}")


def instance_II(n: int) -> Instance:
    """Like instance I but the receiver-only candidate is another filler."""
    if n < 3:
        raise TooSmall("instance II needs n >= 3")
    pairs = [(Fraction(0), Fraction(1))]
    pairs += [(Fraction(1, 2), Fraction(0))] * (n - 1)
    return validate_instance(pairs, name=f"instance-II-{n}")


def negatively_correlated(n: int, seed: int) -> Instance:
    """Random distinct values with the receiver ranking exactly reversing the
    sender ranking."""
    rng = _rng(seed, 101)
    k = max(4 * n, 64)
    xi_vals = sorted(int(v) + 1 for v in rng.choice(k, size=n, replace=False))
    rho_vals = sorted(int(v) + 1 for v in rng.choice(k, size=n, replace=False))
    order = rng.permutation(n)
    pairs: list[tuple[Fraction, Fraction]] = [None] * n  # type: ignore[list-item]
    for slot, rank in enumerate(order):
        # sender rank `rank` (0 = worst) gets receiver rank n-1-rank
        pairs[slot] = (Fraction(rho_vals[n - 1 - rank], k), Fraction(xi_vals[rank], k))
    return validate_instance(pairs, name=f"neg-corr-{n}-{seed}")


def adversarial_ratio_instance(n: int, seed: int) -> Instance:
    """Family on which the growing-frontier mechanism's value degrades fastest:
    one sender-only candidate at rho 0, one receiver anchor at rho 1, and
    fillers pinned to 1/2 up to a distinct o(1/n^2) jitter.  The jitter keeps
    rho values pairwise distinct without opening a frontier gap, so sub-pools
    missing the anchor are worth only ~1/t to the sender."""
    if n < 3:
        raise TooSmall("the adversarial ratio family needs n >= 3")
    rng = _rng(seed, 202)
    denom = 8 * n**3
    pairs = [(Fraction(0), Fraction(1)), (Fraction(1), Fraction(0))]
    jitters = rng.choice(2 * n, size=n - 2, replace=False) + 1
    pairs += [(Fraction(1, 2) + Fraction(int(j), denom), Fraction(0)) for j in sorted(jitters)]
    return validate_instance(pairs, name=f"adv-ratio-{n}-{seed}")


def random_instance(n: int, seed: int, family: RandomFamily = RandomFamily.UNIFORM_GRID,
                    k: int | None = None) -> Instance:
    """Reproducible random pool.

    UNIFORM_GRID draws distinct positive rationals i/k for each axis
    independently (requires k >= n); ALIGNED sets xi = rho so both players'
    incentives coincide; INDEPENDENT draws each value independently on a fine
    grid, allowing ties.
    """
    if family is RandomFamily.UNIFORM_GRID:
        k = k if k is not None else max(100, n)
        if k < n:
            raise TooSmall("uniform grid needs k >= n for distinct values")
        rng = _rng(seed, 303)
        rho = rng.choice(k, size=n, replace=False) + 1
        xi = rng.choice(k, size=n, replace=False) + 1
        pairs = [(Fraction(int(r), k), Fraction(int(x), k)) for r, x in zip(rho, xi)]
    elif family is RandomFamily.ALIGNED:
        k = k if k is not None else max(100, n)
        if k < n:
            raise TooSmall("uniform grid needs k >= n for distinct values")
        rng = _rng(seed, 404)
        rho = rng.choice(k, size=n, replace=False) + 1
        pairs = [(Fraction(int(r), k), Fraction(int(r), k)) for r in rho]
    elif family is RandomFamily.INDEPENDENT:
        m = 10**6
        rng = _rng(seed, 505)
        rho = rng.integers(1, m + 1, size=n)
        xi = rng.integers(1, m + 1, size=n)
        pairs = [(Fraction(int(r), m), Fraction(int(x), m)) for r, x in zip(rho, xi)]
    else:
        raise ValueError(f"unknown family {family}")
    return validate_instance(pairs, name=f"random-{family.value}-{n}-{seed}")


def ub_event_probability(n: int) -> Fraction:
    """Closed-form probability that the decoy precedes the valuable candidate
    and not both land in the final floor(sqrt(n)) rounds."""
    k = math.isqrt(n)
    return Fraction(1, 2) - Fraction(k * (k - 1), 2 * n * (n - 1))


FAMILIES = {
    "fig1": lambda n=8, seed=0: figure1_instance(),
    "ub-disclosure": lambda n, seed=0: ub_disclosure_instance(n),
    "instance-i": lambda n, seed=0: instance_I(n),
    "instance-ii": lambda n, seed=0: instance_II(n),
    "neg-corr": negatively_correlated,
    "adv-ratio": adversarial_ratio_instance,
    "uniform-grid": lambda n, seed: random_instance(n, seed, RandomFamily.UNIFORM_GRID),
    "aligned": lambda n, seed: random_instance(n, seed, RandomFamily.ALIGNED),
    "independent": lambda n, seed: random_instance(n, seed, RandomFamily.INDEPENDENT),
}
