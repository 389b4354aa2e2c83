"""
Exact product measures, balancedness and gluings.

All arithmetic here is exact (`fractions.Fraction`); tables are numpy object arrays so that
contractions over coordinates stay rational.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import Box, Family
from .errors import BudgetError, DimensionError, DomainError
from .report import Report

logger = logging.getLogger(__name__)


def as_fraction(value):
    """Parse an exact rational from a Fraction, int or "p/q" string."""
    if isinstance(value, float):
        if not math.isfinite(value):
            raise DomainError(f"non-finite weight {value!r}")
        return Fraction(value).limit_denominator(10 ** 12)
    try:
        return Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"not an exact rational: {value!r}") from exc


def integrate_axes(table, factors, keep=()):
    """Contract every axis of an (m,)*n table not listed in `keep` against its factor.

    Args:
        table: numpy array of shape (m,)*n (bool, int or object).
        factors: per-axis weight vectors (sequences of Fractions), one per axis.
        keep: axes left uncontracted, in increasing order.

    Returns:
        Object array over the kept axes, or a scalar when every axis is contracted.
    """
    result = np.asarray(table, dtype=object)
    keep = set(keep)
    for axis in reversed(range(result.ndim)):
        if axis in keep:
            continue
        shape = [1] * result.ndim
        shape[axis] = len(factors[axis])
        weights = np.array(factors[axis], dtype=object).reshape(shape)
        result = (result * weights).sum(axis=axis)
    if isinstance(result, np.ndarray) and result.ndim == 0:
        return result.item()
    return result


@dataclass(frozen=True)
class ProductMeasure:
    """ν(x) = Π ν_i(x_i) with exact rational factors."""

    box: Box
    factors: tuple

    def __post_init__(self):
        factors = tuple(tuple(as_fraction(w) for w in factor) for factor in self.factors)
        if len(factors) != self.box.n:
            raise DimensionError(f"{len(factors)} factors for box {self.box}")
        for i, factor in enumerate(factors, 1):
            if len(factor) != self.box.m:
                raise DimensionError(f"factor {i} has {len(factor)} weights, box has m={self.box.m}")
            if any(w < 0 for w in factor):
                raise DomainError(f"factor {i} has a negative weight")
            if sum(factor) != 1:
                raise DomainError(f"factor {i} sums to {sum(factor)}, not 1")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def uniform(cls, box):
        w = Fraction(1, box.m)
        return cls(box, tuple((w,) * box.m for _ in range(box.n)))

    @property
    def is_uniform(self):
        w = Fraction(1, self.box.m)
        return all(v == w for factor in self.factors for v in factor)

    def weight(self, x):
        return math.prod((f[s - 1] for f, s in zip(self.factors, x)), start=Fraction(1))

    def weight_table(self):
        """ν as an object array of shape (m,)*n."""
        table = np.array(Fraction(1), dtype=object).reshape(())
        for factor in self.factors:
            table = np.multiply.outer(table, np.array(factor, dtype=object))
        return table

    def restrict(self, coords):
        return restrict_measure(self, coords)


def _require_same_box(nu, F):
    if nu.box != F.box:
        raise DimensionError(f"measure on {nu.box} but family on {F.box}")


def measure_of(nu, F):
    """ν(F), exact."""
    _require_same_box(nu, F)
    if nu.is_uniform:
        return Fraction(len(F), F.box.size)
    if not F.is_dense:
        return sum((nu.weight(x) for x in F.codes()), Fraction(0))
    return Fraction(integrate_axes(F.tensor(), nu.factors))


def restrict_measure(nu, coords):
    """ν_{[n]\\Z}: the product of the factors outside Z."""
    coords = set(coords)
    if any(not 1 <= c <= nu.box.n for c in coords):
        raise DomainError(f"coordinates {sorted(coords)} outside [1, {nu.box.n}]")
    kept = tuple(f for i, f in enumerate(nu.factors, 1) if i not in coords)
    return ProductMeasure(Box(nu.box.m, len(kept)), kept)


def balancedness(nu):
    """The least b such that ν is b-balanced: m · max ν_i(x)."""
    heaviest = max((w for factor in nu.factors for w in factor), default=Fraction(1, nu.box.m))
    return nu.box.m * heaviest


@dataclass(frozen=True)
class Gluing:
    """Coordinatewise surjections [m1] -> [m2], stored as 1-based target tuples."""

    m1: int
    m2: int
    maps: tuple

    def __post_init__(self):
        maps = tuple(tuple(int(y) for y in mp) for mp in self.maps)
        if not 1 <= self.m2 <= self.m1:
            raise DomainError(f"gluing needs 1 <= m2 <= m1, got m1={self.m1}, m2={self.m2}")
        for i, mp in enumerate(maps, 1):
            if len(mp) != self.m1:
                raise DimensionError(f"map {i} has {len(mp)} entries, expected {self.m1}")
            if any(not 1 <= y <= self.m2 for y in mp):
                raise DomainError(f"map {i} has targets outside [1, {self.m2}]")
            if len(set(mp)) != self.m2:
                raise DomainError(f"map {i} is not surjective onto [{self.m2}]")
        object.__setattr__(self, "maps", maps)

    @classmethod
    def identity(cls, box):
        return cls(box.m, box.m, tuple(tuple(range(1, box.m + 1)) for _ in range(box.n)))

    @property
    def n(self):
        return len(self.maps)

    @property
    def source(self):
        return Box(self.m1, self.n)

    @property
    def target(self):
        return Box(self.m2, self.n)

    def fibers(self, i):
        """Preimages of each target symbol under the i-th map (1-based i)."""
        mp = self.maps[i - 1]
        return tuple(tuple(x for x in range(1, self.m1 + 1) if mp[x - 1] == y)
                     for y in range(1, self.m2 + 1))

    @property
    def max_fiber(self):
        return max((max(mp.count(y) for y in range(1, self.m2 + 1)) for mp in self.maps), default=1)

    def fiber_bound(self):
        """The least b for which this gluing is b-balanced."""
        return Fraction(self.max_fiber * self.m2, self.m1)

    def apply_code(self, x):
        return tuple(mp[s - 1] for mp, s in zip(self.maps, x))


def is_balanced_gluing(pi, b):
    return pi.max_fiber * pi.m2 <= as_fraction(b) * pi.m1


def compose(outer, inner):
    """outer ∘ inner, coordinatewise."""
    if outer.m1 != inner.m2 or outer.n != inner.n:
        raise DimensionError("gluings do not compose")
    maps = tuple(tuple(o[y - 1] for y in i) for o, i in zip(outer.maps, inner.maps))
    return Gluing(inner.m1, outer.m2, maps)


def apply_gluing(pi, F):
    """F^π = {π(x) : x ∈ F} on the target box."""
    if F.box != pi.source:
        raise DimensionError(f"gluing from {pi.source} applied to family on {F.box}")
    target = pi.target
    if not F.is_dense:
        return Family(target, {pi.apply_code(x) for x in F.codes()})
    mask = np.zeros(target.size, dtype=bool)
    arr = F.code_array()
    if len(arr):
        if target.n == 0:
            mask[0] = True
        else:
            images = np.stack([np.asarray((0,) + mp)[arr[:, i]] for i, mp in enumerate(pi.maps)])
            mask[np.ravel_multi_index(tuple(images - 1), target.shape)] = True
    return Family.from_mask(target, mask)


def push_measure(pi, nu):
    """ν^π({y}) = Π ν_i(π_i^{-1}(y_i))."""
    if nu.box != pi.source:
        raise DimensionError(f"gluing from {pi.source} applied to measure on {nu.box}")
    factors = []
    for mp, factor in zip(pi.maps, nu.factors):
        pushed = [Fraction(0)] * pi.m2
        for x, y in enumerate(mp):
            pushed[y - 1] += factor[x]
        factors.append(tuple(pushed))
    return ProductMeasure(pi.target, tuple(factors))


def _fiber_cap(m1, m2, b):
    b = as_fraction(b)
    if not 1 <= m2 <= m1:
        raise DomainError(f"no gluing [{m1}] -> [{m2}]: need 1 <= m2 <= m1")
    cap = math.floor(b * m1 / m2)
    if cap * m2 < m1:
        raise DomainError(f"no {b}-balanced gluing [{m1}] -> [{m2}]: fibers capped at {cap}")
    return cap


def coordinate_maps(m1, m2, cap):
    """All surjections [m1] -> [m2] with fibers <= cap, in lexicographic order of the map tuple."""
    counts = [0] * m2
    current = []

    def extend():
        k = len(current)
        if k == m1:
            yield tuple(current)
            return
        missing = sum(1 for c in counts if c == 0)
        for y in range(m2):
            if counts[y] >= cap:
                continue
            if m1 - k - 1 < missing - (counts[y] == 0):
                continue
            counts[y] += 1
            current.append(y + 1)
            yield from extend()
            current.pop()
            counts[y] -= 1

    return extend()


def _fiber_profiles(m1, m2, cap):
    """Fiber-size profiles (k_1..k_m2), each 1 <= k <= cap, summing to m1."""
    if m2 == 0:
        if m1 == 0:
            yield ()
        return
    for k in range(1, min(cap, m1) + 1):
        for rest in _fiber_profiles(m1 - k, m2 - 1, cap):
            yield (k,) + rest


def _multinomial(profile):
    total = math.factorial(sum(profile))
    for k in profile:
        total //= math.factorial(k)
    return total


def count_gluings(m1, m2, b, n):
    """Number of b-balanced gluings, from the multinomial formula over fiber-size profiles."""
    cap = _fiber_cap(m1, m2, b)
    per_coordinate = sum(_multinomial(p) for p in _fiber_profiles(m1, m2, cap))
    return per_coordinate ** n


def enumerate_gluings(m1, m2, b, n, start=0, stop=None):
    """Stream every b-balanced gluing [m1]^n -> [m2]^n exactly once.

    Coordinate maps are ordered lexicographically and tuples of maps lexicographically by
    coordinate, so `start`/`stop` select the same slice regardless of who consumes it.

    Raises:
        DomainError: no balanced surjection exists for these parameters.
    """
    cap = _fiber_cap(m1, m2, b)

    def product(depth):
        if depth == 0:
            yield ()
            return
        for head in coordinate_maps(m1, m2, cap):
            for tail in product(depth - 1):
                yield (head,) + tail

    for maps in itertools.islice(product(n), start, stop):
        yield Gluing(m1, m2, maps)


def first_gluing(m1, m2, b, n):
    """The lexicographically first balanced gluing (blockwise when m2 divides m1)."""
    return next(enumerate_gluings(m1, m2, b, n))


def sample_gluing(m1, m2, b, n, seed=0):
    """A uniformly random b-balanced gluing.

    Args:
        seed: int, sequence of ints, or a numpy Generator.
    """
    cap = _fiber_cap(m1, m2, b)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    profiles = list(_fiber_profiles(m1, m2, cap))
    weights = [_multinomial(p) for p in profiles]
    total = sum(weights)
    maps = []
    for _ in range(n):
        if total < 2 ** 62:
            pick = int(rng.integers(0, total))
            for profile, w in zip(profiles, weights):
                if pick < w:
                    break
                pick -= w
        else:
            probabilities = np.array([float(Fraction(w, total)) for w in weights])
            profile = profiles[int(rng.choice(len(profiles), p=probabilities / probabilities.sum()))]
        order = rng.permutation(m1)
        mp = [0] * m1
        pos = 0
        for y, size in enumerate(profile, 1):
            for x in order[pos:pos + size]:
                mp[int(x)] = y
            pos += size
        maps.append(tuple(mp))
    return Gluing(m1, m2, tuple(maps))


def check_gluing_budget(m1, m2, b, n, limit):
    total = count_gluings(m1, m2, b, n)
    if total > limit:
        raise BudgetError(f"{total} gluings [{m1}]^{n} -> [{m2}]^{n} exceed the budget of {limit}")
    return total


def check_measure_consistency(F, nu, gluings):
    """ν^π(F^π) >= ν(F) and balancedness(ν^π) <= balancedness(ν) · fiber bound, for every π given."""
    base = measure_of(nu, F)
    b_nu = balancedness(nu)
    checked, worst, witness = 0, None, None
    for pi in gluings:
        pushed = push_measure(pi, nu)
        gain = measure_of(pushed, apply_gluing(pi, F)) - base
        composed_ok = balancedness(pushed) <= b_nu * pi.fiber_bound()
        checked += 1
        if worst is None or gain < worst:
            worst = gain
        if (gain < 0 or not composed_ok) and witness is None:
            witness = {"maps": pi.maps, "gain": gain, "balanced": composed_ok}
    params = {"m": nu.box.m, "n": nu.box.n, "size": len(F)}
    return Report.verdict("measure-consistency", params, witness is None, margin=worst, witness=witness,
                          details={"gluings": checked, "measure": base})
