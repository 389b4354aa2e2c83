"""
Shadows and Kruskal-Katona bounds, spread approximation, restriction lemmas, sunflowers,
(S, s, t)-systems, covering numbers, star refinement and the simplification bound.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .analysis import homogeneity, homogeneous_restriction, iv_workdps, restricted_measure, restricted_measure_table
from .core import (
    Family,
    Restriction,
    agr_on,
    embed_code,
    embed_restriction,
    is_avoiding,
    match_mask,
    restrict_family,
)
from .errors import BudgetError, DomainError
from .measure import ProductMeasure, as_fraction, balancedness, integrate_axes, measure_of
from .report import Report

logger = logging.getLogger(__name__)

COVER_SET_LIMIT = 10 ** 4
EXHAUSTIVE_KK_LIMIT = 20
INCLUSION_EXCLUSION_LIMIT = 20


def _coordinate_sets(n, size):
    return itertools.combinations(range(1, n + 1), size)


def shadow(F, l, method="members"):
    """∂_l F: every size-l restriction extendable to a member of F.

    Args:
        method: "members" projects the member array onto each l-set of coordinates;
            "candidates" scans every candidate restriction against the dense tensor.

    Returns:
        frozenset of Restriction
    """
    box = F.box
    if not 0 <= l <= box.n:
        raise DomainError(f"shadow level {l} outside [0, {box.n}]")
    if not F:
        return frozenset()
    if l == 0:
        return frozenset({Restriction()})
    found = set()
    if method == "candidates" and F.is_dense:
        tensor = F.tensor()
        for coords in _coordinate_sets(box.n, l):
            others = tuple(a for a in range(box.n) if a + 1 not in coords)
            hit = np.any(tensor, axis=others) if others else tensor
            for values in np.argwhere(hit):
                found.add(Restriction(coords, tuple(int(v) + 1 for v in values)))
        return frozenset(found)
    if method not in ("members", "candidates"):
        raise DomainError(f"unknown shadow method {method!r}")
    arr = F.code_array()
    for coords in _coordinate_sets(box.n, l):
        for row in np.unique(arr[:, [c - 1 for c in coords]], axis=0):
            found.add(Restriction(coords, tuple(int(v) for v in row)))
    return frozenset(found)


def ambient_shadow_size(box, l):
    return math.comb(box.n, l) * box.m ** l


@dataclass(frozen=True)
class ShadowReport:
    level: int
    size: int
    ambient: int
    delta: Fraction


def shadow_report(F, l):
    return ShadowReport(l, len(shadow(F, l)), ambient_shadow_size(F.box, l), Fraction(len(F), F.box.size))


def _kk_holds(shadow_size, family_size, box, l):
    # |∂| >= δ^{l/n}·A  <=>  |∂|^n · (m^n)^l >= |F|^l · A^n
    ambient = ambient_shadow_size(box, l)
    return shadow_size ** box.n * box.size ** l >= family_size ** l * ambient ** box.n


def check_kk_direct(F, l):
    """|∂_l F| >= δ^{l/n} |∂_l [m]^n| with δ = |F|/m^n, compared by integer cross powers."""
    box = F.box
    if not 1 <= l <= box.n:
        raise DomainError(f"level {l} outside [1, {box.n}]")
    info = shadow_report(F, l)
    passed = _kk_holds(info.size, len(F), box, l)
    margin = info.size - float(info.delta) ** (l / box.n) * info.ambient
    return Report.verdict("kk", {"m": box.m, "n": box.n, "l": l, "size": len(F)}, passed, margin=margin,
                          witness=None if passed else {"codes": F},
                          details={"shadow": info.size, "ambient": info.ambient, "delta": info.delta})


def check_kk_exhaustive(box, l):
    """The direct bound over every one of the 2^(m^n) subfamilies of a tiny box, vectorized."""
    size = box.size
    if size > EXHAUSTIVE_KK_LIMIT:
        raise BudgetError(f"2^{size} subfamilies exceed the exhaustive limit 2^{EXHAUSTIVE_KK_LIMIT}")
    if not 1 <= l <= box.n:
        raise DomainError(f"level {l} outside [1, {box.n}]")
    masks = np.arange(1 << size, dtype=np.int64)
    members = ((masks[:, None] >> np.arange(size)) & 1).astype(np.int32)
    candidates = [Restriction(coords, values)
                  for coords in _coordinate_sets(box.n, l)
                  for values in itertools.product(range(1, box.m + 1), repeat=l)]
    stars = np.stack([match_mask(box, r) for r in candidates]).astype(np.int32)
    shadow_sizes = ((members @ stars.T) > 0).sum(axis=1)
    family_sizes = members.sum(axis=1)
    pairs = np.unique(np.stack([shadow_sizes, family_sizes], axis=1), axis=0)
    bad = {(int(s), int(k)) for s, k in pairs if not _kk_holds(int(s), int(k), box, l)}
    witness = None
    violations = 0
    if bad:
        flags = np.array([(int(s), int(k)) in bad for s, k in zip(shadow_sizes, family_sizes)])
        violations = int(flags.sum())
        first = int(np.flatnonzero(flags)[0])
        witness = {"codes": Family.from_mask(box, members[first].astype(bool))}
    logger.debug("exhaustive KK over %s at level %d: %d families", box, l, len(masks))
    return Report.verdict("kk", {"m": box.m, "n": box.n, "l": l, "exhaustive": True}, not bad,
                          witness=witness,
                          details={"families_checked": len(masks), "violations": violations})


def kk_contrapositive_bound(delta, l, box):
    """δ'^{n/l}·m^n as a certified mpmath interval."""
    delta = as_fraction(delta)
    if not 1 <= l < box.n:
        raise DomainError(f"level {l} must satisfy 1 <= l < n={box.n}")
    with iv_workdps(30) as iv:
        if delta == 0:
            return iv.mpf(0)
        d = iv.mpf(delta.numerator) / delta.denominator
        return iv.exp(iv.log(d) * box.n / l) * iv.mpf(box.m) ** box.n


def kk_contrapositive_holds(F, l):
    """|F| <= δ'^{n/l} m^n with δ' = |∂_l F| / |∂_l [m]^n|, exactly."""
    box = F.box
    if not 1 <= l < box.n:
        raise DomainError(f"level {l} must satisfy 1 <= l < n={box.n}")
    delta = Fraction(len(shadow(F, l)), ambient_shadow_size(box, l))
    return Fraction(len(F)) ** l <= delta ** box.n * Fraction(box.m) ** (box.n * l)


@dataclass(frozen=True)
class SpreadDecomposition:
    restrictions: tuple
    parts: tuple
    remainder: Family
    tau: Fraction
    q: int

    def __len__(self):
        return len(self.parts)

    def to_json(self):
        return {
            "tau": str(self.tau), "q": self.q,
            "parts": [{"Z": list(r.coords), "x": list(r.values), "codes": [list(x) for x in part.codes()]}
                      for r, part in zip(self.restrictions, self.parts)],
            "remainder": [list(x) for x in self.remainder.codes()],
        }


def spread_approximation(F, tau, q, nu=None):
    """Split F into homogeneous restricted parts plus a small remainder.

    At each step take the maximal τ-boosting restriction (Z, x) of the current family G. Stop
    (G becomes the remainder) once |Z| > q or the restricted measure is at most τ^{-q};
    otherwise peel off G[Z->x] as the next part.

    Raises:
        DomainError: τ <= 1 or q < 1.
    """
    tau = as_fraction(tau)
    if tau <= 1 or q < 1:
        raise DomainError(f"need tau > 1 and q >= 1, got tau={tau}, q={q}")
    nu = nu or ProductMeasure.uniform(F.box)
    floor = tau ** -q
    restrictions, parts = [], []
    current = F
    while current:
        r = homogeneous_restriction(current, nu, tau)
        if len(r) > q or restricted_measure(current, nu, r) <= floor:
            break
        part = restrict_family(current, r, "keep")
        restrictions.append(r)
        parts.append(part)
        current = current - part
        logger.debug("spread part %d: %s with %d codes", len(parts), r, len(part))
    return SpreadDecomposition(tuple(restrictions), tuple(parts), current, tau, int(q))


def verify_spread_decomposition(F, dec, nu=None):
    """Re-check the partition, |Z_i| <= q, part measures, remainder measure and part homogeneity."""
    nu = nu or ProductMeasure.uniform(F.box)
    floor = dec.tau ** -dec.q
    problems = []
    union = dec.remainder
    total = len(dec.remainder)
    for i, (r, part) in enumerate(zip(dec.restrictions, dec.parts)):
        union = union | part
        total += len(part)
        if len(r) > dec.q:
            problems.append({"part": i, "kind": "restriction longer than q"})
        if not part.issubset(restrict_family(F, r, "keep")):
            problems.append({"part": i, "kind": "part leaves its star"})
        if not part:
            problems.append({"part": i, "kind": "empty part"})
            continue
        if restricted_measure(part, nu, r) < floor:
            problems.append({"part": i, "kind": "part measure below tau^-q"})
        quotient = restrict_family(part, r, "quotient")
        if homogeneity(quotient, nu.restrict(r.coords)) > dec.tau:
            problems.append({"part": i, "kind": "part not tau-homogeneous"})
    if union != F or total != len(F):
        problems.append({"kind": "not a partition"})
    if measure_of(nu, dec.remainder) > floor:
        problems.append({"kind": "remainder measure above tau^-q"})
    params = {"m": F.box.m, "n": F.box.n, "tau": dec.tau, "q": dec.q, "size": len(F)}
    return Report.verdict("spread", params, not problems, witness={"problems": problems} if problems else None,
                          details={"parts": len(dec.parts), "remainder": len(dec.remainder),
                                   "decomposition": dec})


@dataclass(frozen=True)
class AveragingResult:
    restriction: Restriction
    achieved: Fraction
    mean: Fraction


def _measure_on(nu, coords):
    table = np.array(Fraction(1), dtype=object).reshape(())
    for c in coords:
        table = np.multiply.outer(table, np.array(nu.factors[c - 1], dtype=object))
    return table


def averaging_restriction(F, nu, H):
    """The lexicographically least x maximizing ν_{H->x}(F(H->x)).

    `mean` is Σ_x ν_H(x)·ν_{H->x}(F(H->x)), which always equals ν(F); so the achieved maximum
    is at least ν(F).
    """
    H = tuple(sorted(H))
    table = restricted_measure_table(F, nu, H)
    flat = table.reshape(-1)
    best = max(flat)
    position = next(i for i, v in enumerate(flat) if v == best)
    values = np.unravel_index(position, table.shape) if H else ()
    mean = integrate_axes(table, [nu.factors[c - 1] for c in H])
    return AveragingResult(Restriction(H, tuple(int(v) + 1 for v in values)), Fraction(best), Fraction(mean))


def restriction_success_probability(F, nu, H, threshold=None):
    """P_{x ~ ν_H}[ν_{H->x}(F(H->x)) >= threshold], exact; threshold defaults to ν(F)/2."""
    H = tuple(sorted(H))
    if threshold is None:
        threshold = measure_of(nu, F) / 2
    table = restricted_measure_table(F, nu, H)
    weights = _measure_on(nu, H)
    hits = np.asarray(table >= threshold, dtype=bool).reshape(table.shape)
    return sum(weights[hits].tolist(), Fraction(0)) if H else Fraction(int(bool(hits)))


def check_large_restriction(F, nu, H, p):
    """P[ν_{H->x}(F(H->x)) >= ν(F)/2] > p whenever τ^|H| < (1+p)/(2p), τ = homogeneity(F).

    The unconditional bound P >= 1/(2τ^|H| - 1) is asserted too.
    """
    nu = nu or ProductMeasure.uniform(F.box)
    H = tuple(sorted(H))
    p = as_fraction(p)
    params = {"m": F.box.m, "n": F.box.n, "H": list(H), "p": p, "size": len(F)}
    if not 0 <= p <= 1:
        raise DomainError(f"p={p} outside [0, 1]")
    if not F or measure_of(nu, F) == 0:
        return Report.unmet("restriction-prob", params, "homogeneity undefined for a null family")
    tau = homogeneity(F, nu)
    prob = restriction_success_probability(F, nu, H)
    problems = []
    if prob == 0 or tau.power_compare(len(H), (1 + 1 / prob) / 2) < 0:
        problems.append("probability below 1/(2 tau^|H| - 1)")
    applies = p == 0 or tau.power_compare(len(H), (1 + p) / (2 * p)) < 0
    if applies and not prob > p:
        problems.append("probability not above p")
    details = {"probability": prob, "tau": tau, "lemma_applies": applies}
    status = None if applies or problems else "hypotheses-unmet"
    return Report.verdict("restriction-prob", params, not problems, margin=prob - p,
                          witness={"problems": problems} if problems else None, details=details, status=status)


def avoid_values(F, nu, forbidden):
    """Drop every member using a forbidden value and certify measure and homogeneity.

    Args:
        forbidden: {coordinate: set of values}.

    Returns:
        (F', Report) where F' keeps the members with x_i not in X_i for every i.

    Raises:
        DomainError: Σ|X_i|·τ·b >= m, so the bound is void.
    """
    nu = nu or ProductMeasure.uniform(F.box)
    box = F.box
    params = {"m": box.m, "n": box.n, "forbidden": {c: sorted(v) for c, v in forbidden.items()}}
    if not F:
        return F, Report.unmet("avoid", params, "homogeneity undefined for the empty family")
    tau = homogeneity(F, nu).rational_upper()
    b = balancedness(nu)
    count = sum(len(v) for v in forbidden.values())
    eps = count * tau * b / box.m
    if eps >= 1:
        raise DomainError(f"sum |X_i|·tau·b / m = {eps} is not below 1")
    keep = np.ones(len(F), dtype=bool)
    arr = F.code_array()
    for c, values in forbidden.items():
        if not 1 <= c <= box.n:
            raise DomainError(f"coordinate {c} outside [1, {box.n}]")
        keep &= ~np.isin(arr[:, c - 1], sorted(values))
    kept = Family(box, [tuple(int(s) for s in row) for row in arr[keep]])
    alpha, alpha_kept = measure_of(nu, F), measure_of(nu, kept)
    problems = []
    if alpha_kept < (1 - eps) * alpha:
        problems.append("measure bound")
    bound = tau / (1 - eps)
    if not kept or homogeneity(kept, nu) > bound:
        problems.append("homogeneity bound")
    details = {"tau_upper": tau, "b": b, "eps": eps, "alpha": alpha, "alpha_kept": alpha_kept,
               "homogeneity_bound": bound, "kept": len(kept)}
    return kept, Report.verdict("avoid", params, not problems, margin=alpha_kept - (1 - eps) * alpha,
                                witness={"problems": problems} if problems else None, details=details)


def find_sunflower(sets, s, core_size=None):
    """s sets whose pairwise intersections all equal their common core.

    Returns:
        (indices, core) for the first sunflower in index order, or None.
    """
    if s < 2:
        raise DomainError(f"a sunflower needs s >= 2 petals, got {s}")
    sets = [frozenset(x) for x in sets]

    def extend(chosen, core):
        if len(chosen) == s:
            return tuple(chosen), core
        for k in range(chosen[-1] + 1, len(sets)):
            if all(sets[k] & sets[j] == core for j in chosen):
                found = extend(chosen + [k], core)
                if found:
                    return found
        return None

    for i, j in itertools.combinations(range(len(sets)), 2):
        core = sets[i] & sets[j]
        if core_size is not None and len(core) != core_size:
            continue
        found = extend([i, j], core)
        if found:
            return found
    return None


@dataclass(frozen=True)
class SunflowerQuery:
    """s petals among `sets`, optionally with a fixed core size."""

    sets: tuple
    s: int
    core_size: Optional[int] = None

    def __post_init__(self):
        if self.s < 2:
            raise DomainError(f"a sunflower needs s >= 2 petals, got {self.s}")
        if self.core_size is not None and self.core_size < 0:
            raise DomainError(f"core size must be >= 0, got {self.core_size}")
        object.__setattr__(self, "sets", tuple(frozenset(x) for x in self.sets))

    @classmethod
    def of_family(cls, F, s, core_size=None):
        return cls(tuple(embed_code(x, F.box.m) for x in F.codes()), s, core_size)

    def find(self):
        return find_sunflower(self.sets, self.s, self.core_size)


def _is_sunflower(sets):
    core = frozenset.intersection(*sets)
    return all(a & b == core for a, b in itertools.combinations(sets, 2)), core


def check_sst_system(parts, s, t):
    """Both conditions of an (S, s, t)-system over every s-tuple of index sets.

    Args:
        parts: {S: [B, ...]} with S and every B given as embedded sets.
    """
    keys = sorted(parts, key=sorted)
    problems = []
    for combo in itertools.combinations(keys, s):
        flower, core = _is_sunflower(combo)
        if not flower:
            continue
        if len(core) == t - 1:
            problems.append({"kind": "sunflower with core t-1", "S": [sorted(S) for S in combo]})
        elif len(core) <= t - 2:
            cap = t - len(combo[0] & combo[1]) - 2
            for members in itertools.product(*(parts[S] for S in combo)):
                common = frozenset.intersection(*map(frozenset, members))
                if len(common) > cap:
                    problems.append({"kind": "petal intersection too large", "S": [sorted(S) for S in combo],
                                     "B": [sorted(B) for B in members]})
                    break
    params = {"s": s, "t": t, "index_sets": len(keys)}
    return Report.verdict("sst", params, not problems, witness={"problems": problems[:5]} if problems else None,
                          details={"violations": len(problems)})


def sst_parts_from_decomposition(dec):
    """Embedded (S, B_S) parts of a spread decomposition, S = embedded restriction."""
    parts = {}
    for r, part in zip(dec.restrictions, dec.parts):
        S = embed_restriction(r, part.box.m)
        parts[S] = [embed_code(x, part.box.m) - S for x in part.codes()]
    return parts


def _greedy_cover(masks):
    chosen = 0
    remaining = list(masks)
    while remaining:
        counts = {}
        for mask in remaining:
            bits = mask
            while bits:
                low = bits & -bits
                counts[low] = counts.get(low, 0) + 1
                bits ^= low
        element = max(counts, key=lambda e: (counts[e], -e))
        remaining = [mask for mask in remaining if not mask & element]
        chosen += 1
    return chosen


def _packing_bound(masks):
    used, count = 0, 0
    for mask in sorted(masks, key=lambda x: bin(x).count("1")):
        if not mask & used:
            used |= mask
            count += 1
    return count


def covering_number(sets, cap=None):
    """Minimum size of a set hitting every member; exact branch-and-bound.

    Returns math.inf when some member is empty and 0 for no members. With `cap`, any value
    above cap is reported as cap + 1.

    Raises:
        BudgetError: more than 10^4 sets.
    """
    sets = [frozenset(x) for x in sets]
    if len(sets) > COVER_SET_LIMIT:
        raise BudgetError(f"{len(sets)} sets exceed the covering cap of {COVER_SET_LIMIT}")
    if not sets:
        return 0
    if any(not x for x in sets):
        return math.inf
    masks = list({sum(1 << e for e in x) for x in sets})
    best = _greedy_cover(masks)
    if cap is not None:
        best = min(best, cap + 1)

    def search(remaining, used):
        nonlocal best
        if not remaining:
            best = min(best, used)
            return
        if used + _packing_bound(remaining) >= best:
            return
        smallest = min(remaining, key=lambda x: (bin(x).count("1"), x))
        bits = smallest
        while bits:
            low = bits & -bits
            search([mask for mask in remaining if not mask & low], used + 1)
            bits ^= low

    search(masks, 0)
    return best


def _quotient_sets(family, coords):
    """Embedded images of quotient members, keeping the original coordinate numbers."""
    m = family.box.m
    return [frozenset((c - 1) * m + s for c, s in zip(coords, x)) for x in family.codes()]


def refine_star(quotient, t, n, coords=None):
    """F*_T: quotient members all of whose <= (t-1)-subsets X leave F_T(T ∪ X) with covering
    number at least n + 1.

    Args:
        quotient: F_T(T) over [m]^{n-t}.
        coords: original coordinate numbers of the quotient's coordinates (default 1..n-t).
    """
    k = quotient.box.n
    coords = tuple(coords or range(1, k + 1))
    cache = {}

    def covered(r):
        if r not in cache:
            rest = restrict_family(quotient, r, "quotient")
            free = [c for i, c in enumerate(coords, 1) if i not in r.coords]
            cache[r] = covering_number(_quotient_sets(rest, free), cap=n) >= n + 1
        return cache[r]

    kept = []
    for x in quotient.codes():
        if all(covered(Restriction.from_code(x, X))
               for size in range(min(t - 1, k) + 1)
               for X in itertools.combinations(range(1, k + 1), size)):
            kept.append(x)
    return Family(quotient.box, kept)


def union_of_stars_size(restrictions, box):
    """|∪ [m]^n[Z_i -> x_i]| by inclusion-exclusion, or a dense union for many restrictions."""
    restrictions = [r.check_in(box) for r in restrictions]
    if len(restrictions) > INCLUSION_EXCLUSION_LIMIT and box.dense:
        mask = np.zeros(box.size, dtype=bool)
        for r in restrictions:
            mask |= match_mask(box, r)
        return int(mask.sum())
    total = 0

    def walk(start, merged, depth):
        nonlocal total
        for k in range(start, len(restrictions)):
            if not merged.compatible(restrictions[k]):
                continue
            joined = merged.merge(restrictions[k])
            total += (-1) ** depth * box.m ** (box.n - len(joined))
            walk(k + 1, joined, depth + 1)

    walk(0, Restriction(), 0)
    return total


def _t_agreeing(restrictions, t):
    for a, b in itertools.combinations_with_replacement(restrictions, 2):
        common = sorted(set(a.coords) & set(b.coords))
        if agr_on(common, a, b) < t:
            return False
    return True


def _common_agreement(restrictions):
    shared = set(restrictions[0].as_dict().items())
    for r in restrictions[1:]:
        shared &= set(r.as_dict().items())
    return len(shared)


def check_simplification(restrictions, box, t, eps):
    """|[m]^n[S]| <= ε m^{n-t} for t-agreeing non-trivial S with ε m >= 24 q."""
    eps = as_fraction(eps)
    restrictions = list(restrictions)
    q = max((len(r) for r in restrictions), default=0)
    params = {"m": box.m, "n": box.n, "t": t, "eps": eps, "q": q, "restrictions": len(restrictions)}
    unmet = []
    if not restrictions:
        unmet.append("no restrictions")
    elif not _t_agreeing(restrictions, t):
        unmet.append("not t-agreeing")
    elif _common_agreement(restrictions) >= t:
        unmet.append("a common t-restriction exists")
    if eps * box.m < 24 * q:
        unmet.append("eps*m < 24q")
    if unmet:
        return Report.unmet("simplification", params, "; ".join(unmet))
    size = union_of_stars_size(restrictions, box)
    bound = eps * box.m ** (box.n - t)
    return Report.verdict("simplification", params, size <= bound, margin=bound - size,
                          details={"union": size, "bound": bound})


def _refined(F, T, t):
    quotient = restrict_family(F, T, "quotient")
    free = tuple(c for c in range(1, F.box.n + 1) if c not in T.coords)
    refined = refine_star(quotient, t, F.box.n, coords=free)
    return _quotient_sets(refined, free)


def _disjoint_shadow_problems(first, second, t):
    for a in first:
        for b in second:
            if len(a & b) >= t - 1:
                return {"F1": sorted(a), "F2": sorted(b)}
    return None


def check_disjoint_shadows(F, T1, T2, t):
    """Members of F*_{T1} and F*_{T2} meet in fewer than t-1 embedded elements."""
    box = F.box
    params = {"m": box.m, "n": box.n, "t": t, "T1": T1, "T2": T2}
    avoiding, _ = is_avoiding(F, t)
    level = shadow(F, t)
    if not avoiding:
        return Report.unmet("shadows-disjoint", params, "family is not (t-1)-avoiding")
    if T1 == T2 or T1 not in level or T2 not in level:
        return Report.unmet("shadows-disjoint", params, "T1, T2 must be distinct members of the t-shadow")
    first, second = _refined(F, T1, t), _refined(F, T2, t)
    bad = _disjoint_shadow_problems(first, second, t)
    return Report.verdict("shadows-disjoint", params, bad is None, witness=bad,
                          details={"refined1": len(first), "refined2": len(second)})


def check_all_disjoint_shadows(F, t):
    """check_disjoint_shadows over every pair T1 != T2 of the t-shadow, refining each T once."""
    box = F.box
    params = {"m": box.m, "n": box.n, "t": t, "size": len(F)}
    avoiding, _ = is_avoiding(F, t)
    if not avoiding:
        return Report.unmet("shadows-disjoint", params, "family is not (t-1)-avoiding")
    level = sorted(shadow(F, t))
    refined = {T: _refined(F, T, t) for T in level}
    for T1, T2 in itertools.combinations(level, 2):
        bad = _disjoint_shadow_problems(refined[T1], refined[T2], t)
        if bad:
            return Report.verdict("shadows-disjoint", params, False, witness={"T1": T1, "T2": T2, **bad},
                                  details={"pairs": math.comb(len(level), 2)})
    nonempty = sum(1 for v in refined.values() if v)
    return Report.verdict("shadows-disjoint", params, True,
                          details={"pairs": math.comb(len(level), 2), "nonempty_refinements": nonempty})


def check_double_counting(F, h):
    """Σ_{(H,x) in ∂_h F} |F(H->x)| = |F|·C(n, h)."""
    box = F.box
    if not 0 <= h <= box.n:
        raise DomainError(f"h={h} outside [0, {box.n}]")
    total = sum(len(restrict_family(F, r, "quotient")) for r in shadow(F, h))
    expected = len(F) * math.comb(box.n, h)
    return Report.verdict("double-counting", {"m": box.m, "n": box.n, "h": h, "size": len(F)},
                          total == expected, margin=total - expected,
                          details={"sum": total, "expected": expected})


def check_restriction_scaling(box, X, Y):
    """|C(X ∪ Y)| = m^{-|Y|} |C(X)| for restrictions on disjoint coordinate sets."""
    if set(X.coords) & set(Y.coords):
        raise DomainError("X and Y must fix disjoint coordinate sets")
    joined = X.merge(Y).check_in(box)
    lhs = box.m ** (box.n - len(joined))
    rhs = Fraction(box.m ** (box.n - len(X.check_in(box))), box.m ** len(Y))
    return Report.verdict("restriction-scaling", {"m": box.m, "n": box.n, "X": X, "Y": Y}, lhs == rhs,
                          margin=rhs - lhs, details={"lhs": lhs, "rhs": rhs})


def embedded_avoidance_agrees(F, t):
    """(t-1)-avoidance of F coincides with the absence of a 2-petal sunflower of core t-1."""
    avoiding, _ = is_avoiding(F, t)
    flower = SunflowerQuery.of_family(F, 2, t - 1).find() if len(F) > 1 else None
    return avoiding == (flower is None)
