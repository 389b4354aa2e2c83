"""
Seeded random instances for property runs.

Every generator takes a numpy Generator so that callers control the stream (one stream per trial).
"""

import itertools
import logging
from fractions import Fraction

import numpy as np

from .compression import CubeFamily, cube_from_codes, unbalanced_hypothesis, up_closure
from .core import Family, Restriction, code_array
from .measure import ProductMeasure

logger = logging.getLogger(__name__)


def random_family(box, rng, density=None, nonempty=True):
    """Each code kept independently; the density is drawn uniformly from [0.1, 0.9] when omitted."""
    p = rng.uniform(0.1, 0.9) if density is None else density
    mask = rng.random(box.size) < p
    if nonempty and not mask.any():
        mask[int(rng.integers(box.size))] = True
    return Family.from_mask(box, mask)


def random_measure(box, rng, denominator=12):
    """A product measure with random rational factors of the given denominator, all weights positive."""
    denominator = max(denominator, box.m)
    factors = []
    for _ in range(box.n):
        cuts = np.sort(rng.choice(np.arange(1, denominator), size=box.m - 1, replace=False))
        parts = np.diff(np.concatenate(([0], cuts, [denominator])))
        factors.append(tuple(Fraction(int(k), denominator) for k in parts))
    return ProductMeasure(box, tuple(factors))


def cross_agreeing_pair(box, rng, density=None):
    """F1 at random, F2 a random subset of the codes agreeing somewhere with every member of F1."""
    F1 = random_family(box, rng, density)
    arr = code_array(box)
    members = F1.code_array()
    allowed = np.ones(box.size, dtype=bool)
    for row in members:
        allowed &= (arr == row).any(axis=1)
    p = rng.uniform(0.2, 1.0) if density is None else density
    F2 = Family.from_mask(box, allowed & (rng.random(box.size) < p))
    return F1, F2


def avoiding_family(box, t, rng):
    """A maximal (t-1)-avoiding family grown greedily along a random code order."""
    arr = code_array(box)
    chosen = []
    for index in rng.permutation(box.size):
        row = arr[index]
        if chosen and ((arr[chosen] == row).sum(axis=1) == t - 1).any():
            continue
        chosen.append(int(index))
    mask = np.zeros(box.size, dtype=bool)
    mask[chosen] = True
    return Family.from_mask(box, mask)


def perturbed_star(star, rng, removed=1, added=1):
    """A star with a few members dropped and a few outside codes added."""
    box = star.box
    mask = star.mask().copy()
    inside = np.flatnonzero(mask)
    outside = np.flatnonzero(~mask)
    mask[rng.choice(inside, size=min(removed, inside.size), replace=False)] = False
    if outside.size:
        mask[rng.choice(outside, size=min(added, outside.size), replace=False)] = True
    return Family.from_mask(box, mask)


def monotone_cube_family(n, rng, generators=None):
    """The up-closure of a few random vectors of {0,1}^n."""
    count = int(rng.integers(1, n + 2)) if generators is None else generators
    vectors = [tuple(int(b) for b in rng.integers(0, 2, size=n)) for _ in range(count)]
    return up_closure(cube_from_codes(n, vectors))


def random_cube_family(n, rng, density=None):
    p = rng.uniform(0.1, 0.9) if density is None else density
    return CubeFamily.from_mask(n, rng.random(2 ** n) < p)


def random_restriction(box, size, rng):
    coords = tuple(sorted(int(c) + 1 for c in rng.choice(box.n, size=size, replace=False)))
    values = tuple(int(v) + 1 for v in rng.integers(0, box.m, size=size))
    return Restriction(coords, values)


def agreeing_restrictions(box, t, size, count, rng, tries=200):
    """Up to `count` restrictions of the given size, pairwise agreeing on >= t common coordinates."""
    chosen = []
    for _ in range(tries):
        if len(chosen) >= count:
            break
        r = random_restriction(box, size, rng)
        if r in chosen:
            continue
        ok = True
        for other in chosen:
            a, b = r.as_dict(), other.as_dict()
            if sum(1 for c in a if c in b and a[c] == b[c]) < t:
                ok = False
                break
        if ok:
            chosen.append(r)
    return chosen


def triangle_restrictions(values=(1, 1)):
    """Three 2-coordinate restrictions on coordinates 1..3, pairwise agreeing once, with no common pair."""
    pairs = list(itertools.combinations(range(1, 4), 2))
    return [Restriction(pair, tuple(values)) for pair in pairs]


def unbalanced_pair(box, rng, tries=1000):
    """Random F1, F2 with μ(F1) + μ(F2)^{log_m 2} > 1, or None when no draw satisfies it."""
    for _ in range(tries):
        F1 = random_family(box, rng, density=rng.uniform(0.3, 1.0))
        F2 = random_family(box, rng, density=rng.uniform(0.3, 1.0))
        mu1 = Fraction(len(F1), box.size)
        mu2 = Fraction(len(F2), box.size)
        if unbalanced_hypothesis(mu1, mu2, box.m)[0]:
            return F1, F2
    logger.debug("no hypothesis-satisfying pair in %d draws on %s", tries, box)
    return None
