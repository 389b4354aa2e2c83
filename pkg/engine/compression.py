"""
Compressions, monotonization onto the Boolean cube, p-biased measures and the unbalanced
cross-matching lemma.

Cube vectors are 0/1 tuples; a CubeFamily stores a boolean mask over the lexicographic index
Σ x_i 2^(n-i), so the all-ones vector has index 2^n - 1.
"""

import logging
from fractions import Fraction

import numpy as np
import sympy

from .analysis import iv_workdps
from .core import Family
from .errors import BudgetError, DimensionError, DomainError, PreconditionError
from .measure import as_fraction
from .report import Report

logger = logging.getLogger(__name__)

CUBE_LIMIT = 2 ** 20
INTERVAL_PRECISIONS = (30, 60, 120, 240)


class CubeFamily:
    """An immutable family of {0,1}-vectors of length n."""

    __slots__ = ("n", "_mask")

    def __init__(self, n, members=()):
        if n < 0 or 2 ** n > CUBE_LIMIT:
            raise BudgetError(f"cube dimension {n} outside [0, {CUBE_LIMIT.bit_length() - 1}]")
        self.n = n
        mask = np.zeros(2 ** n, dtype=bool)
        for v in members:
            v = tuple(int(b) for b in v)
            if len(v) != n or any(b not in (0, 1) for b in v):
                raise DimensionError(f"{v} is not a vector of {{0,1}}^{n}")
            mask[_cube_index(v)] = True
        mask.setflags(write=False)
        self._mask = mask

    @classmethod
    def from_mask(cls, n, mask):
        family = cls(n)
        mask = np.array(mask, dtype=bool)
        mask.setflags(write=False)
        family._mask = mask
        return family

    @classmethod
    def full(cls, n):
        return cls.from_mask(n, np.ones(2 ** n, dtype=bool))

    def mask(self):
        return self._mask

    def indices(self):
        return np.flatnonzero(self._mask)

    def vectors(self):
        return tuple(_cube_vector(int(i), self.n) for i in self.indices())

    def __len__(self):
        return int(self._mask.sum())

    def __bool__(self):
        return bool(self._mask.any())

    def __iter__(self):
        return iter(self.vectors())

    def __contains__(self, v):
        v = tuple(v)
        return len(v) == self.n and bool(self._mask[_cube_index(v)])

    def __eq__(self, other):
        if not isinstance(other, CubeFamily):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self._mask, other._mask))

    def __hash__(self):
        return hash((self.n, self._mask.tobytes()))

    def __repr__(self):
        return f"CubeFamily(n={self.n}, {len(self)} vectors)"

    def to_json(self):
        return {"n": self.n, "members": [list(v) for v in self.vectors()]}


def _cube_index(v):
    index = 0
    for b in v:
        index = 2 * index + b
    return index


def _cube_vector(index, n):
    return tuple((index >> (n - 1 - i)) & 1 for i in range(n))


def _popcounts(n):
    indices = np.arange(2 ** n)
    return ((indices[:, None] >> np.arange(n)) & 1).sum(axis=1)


def compress(F, i, j):
    """T_{i,j}(F) = {x in F : T_{i,j}(x) in F} ∪ {T_{i,j}(x) : x in F}, T_{i,j} moving value j to 1 at i.

    Raises:
        DomainError: j outside [2, m] or i outside [1, n].
    """
    box = F.box
    if not 2 <= j <= box.m:
        raise DomainError(f"j={j} outside [2, {box.m}]")
    if not 1 <= i <= box.n:
        raise DomainError(f"i={i} outside [1, {box.n}]")
    tensor = np.array(F.tensor())
    ones = np.take(tensor, 0, axis=i - 1)
    moved = np.take(tensor, j - 1, axis=i - 1)
    index = [slice(None)] * box.n
    index[i - 1] = 0
    tensor[tuple(index)] = ones | moved
    index[i - 1] = j - 1
    tensor[tuple(index)] = ones & moved
    return Family.from_mask(box, tensor.reshape(-1))


def full_compress(F):
    """T = T_1 ∘ ... ∘ T_n with T_i = T_{i,2} ∘ ... ∘ T_{i,m}; T_n (and T_{i,m}) act first."""
    for i in range(F.box.n, 0, -1):
        for j in range(F.box.m, 1, -1):
            F = compress(F, i, j)
    return F


def monotonize(F):
    """Image of F under h^{⊗n} with h(1) = 1 and h(a) = 0 otherwise."""
    n = F.box.n
    mask = np.zeros(2 ** n, dtype=bool)
    arr = F.code_array()
    if len(arr):
        weights = 2 ** np.arange(n - 1, -1, -1)
        mask[((arr == 1).astype(np.int64) * weights).sum(axis=1)] = True
    return CubeFamily.from_mask(n, mask)


def cube_from_codes(n, vectors):
    return CubeFamily(n, vectors)


def up_closure(A):
    mask = np.array(A.mask())
    indices = np.arange(2 ** A.n)
    for bit in range(A.n):
        low = indices[(indices >> bit) & 1 == 0]
        mask[low | (1 << bit)] |= mask[low]
    return CubeFamily.from_mask(A.n, mask)


def is_monotone(A):
    """Whether A is up-closed.

    Returns:
        (True, None) or (False, (x, y)) with x in A, y ⊇ x outside A.
    """
    mask = A.mask()
    indices = np.arange(2 ** A.n)
    for bit in range(A.n):
        low = indices[((indices >> bit) & 1 == 0) & mask]
        missing = low[~mask[low | (1 << bit)]]
        if missing.size:
            x = int(missing[0])
            return False, (_cube_vector(x, A.n), _cube_vector(x | (1 << bit), A.n))
    return True, None


def are_cross_agreeing_cube(A, B):
    """Whether every x in A and y in B share a coordinate equal to 1.

    Returns:
        (True, None) or (False, (x, y)).
    """
    if A.n != B.n:
        raise DimensionError(f"cube families of dimensions {A.n} and {B.n}")
    a, b = A.indices(), B.indices()
    for x in a:
        clash = b[(b & x) == 0]
        if clash.size:
            return False, (_cube_vector(int(x), A.n), _cube_vector(int(clash[0]), A.n))
    return True, None


def p_biased(A, p):
    """μ_p(A) = Σ p^|x| (1-p)^(n-|x|), exact."""
    p = as_fraction(p)
    if not 0 <= p <= 1:
        raise DomainError(f"p={p} outside [0, 1]")
    weights = [p ** k * (1 - p) ** (A.n - k) for k in range(A.n + 1)]
    counts = np.bincount(_popcounts(A.n)[A.mask()], minlength=A.n + 1)
    return sum((int(c) * w for c, w in zip(counts, weights)), Fraction(0))


def _iv_fraction(iv, value):
    return iv.mpf(value.numerator) / value.denominator


def check_monotone_shift(A, p, q, alpha=None):
    """For monotone A and p <= q: μ_p(A) >= p^α implies μ_q(A) >= q^α.

    A rational α is compared exactly (μ^b against p^a for α = a/b). Without α, α = log_p μ_p(A)
    and μ_q(A) >= q^α becomes ln μ_q · ln p <= ln μ_p · ln q, certified with interval
    arithmetic; a comparison still undecided at the highest precision counts as equality.

    Raises:
        PreconditionError: A is not monotone.
    """
    p, q = as_fraction(p), as_fraction(q)
    if not 0 <= p <= q <= 1:
        raise DomainError(f"need 0 <= p <= q <= 1, got p={p}, q={q}")
    monotone, witness = is_monotone(A)
    if not monotone:
        raise PreconditionError("family is not monotone", witness={"x": witness[0], "y": witness[1]})
    mu_p, mu_q = p_biased(A, p), p_biased(A, q)
    params = {"n": A.n, "p": p, "q": q, "size": len(A)}
    details = {"mu_p": mu_p, "mu_q": mu_q}
    if alpha is not None:
        alpha = as_fraction(alpha)
        a, b = alpha.numerator, alpha.denominator
        if a < 0:
            raise DomainError(f"alpha={alpha} must be >= 0")
        if mu_p ** b < p ** a:
            return Report.unmet("monotone-shift", params | {"alpha": alpha}, "mu_p(A) < p^alpha", details)
        passed = mu_q ** b >= q ** a
        return Report.verdict("monotone-shift", params | {"alpha": alpha}, passed, details=details)
    if not 0 < p < 1 or mu_p == 0:
        return Report.unmet("monotone-shift", params, "alpha = log_p mu_p(A) is undefined", details)
    if mu_p == 1 or q == 1:
        return Report.verdict("monotone-shift", params, mu_q == 1, details=details)
    if mu_q == 0:
        return Report.verdict("monotone-shift", params, False, details=details)
    decided = None
    for dps in INTERVAL_PRECISIONS:
        with iv_workdps(dps) as iv:
            lhs = iv.log(_iv_fraction(iv, mu_q)) * iv.log(_iv_fraction(iv, p))
            rhs = iv.log(_iv_fraction(iv, mu_p)) * iv.log(_iv_fraction(iv, q))
            decided = lhs <= rhs
        if decided is not None:
            break
    details["certified"] = decided is not None
    return Report.verdict("monotone-shift", params, decided is not False, details=details)


def _log_vector(value):
    """Exponent vector of a positive rational over its prime factors."""
    value = Fraction(value)
    vector = dict(sympy.factorint(value.numerator))
    for prime, exponent in sympy.factorint(value.denominator).items():
        vector[prime] = vector.get(prime, 0) - exponent
    return vector


def _log_products_equal(a, b, c, d):
    """ln a · ln b == ln c · ln d, tested as an identity in the logarithms of primes."""
    left, right = {}, {}
    for target, (x, y) in ((left, (a, b)), (right, (c, d))):
        vx, vy = _log_vector(x), _log_vector(y)
        for p, e in vx.items():
            for q, f in vy.items():
                key = (min(p, q), max(p, q))
                target[key] = target.get(key, 0) + e * f
    keys = set(left) | set(right)
    return all(left.get(k, 0) == right.get(k, 0) for k in keys)


def unbalanced_hypothesis(mu1, mu2, m):
    """Decide μ1 + μ2^{log_m 2} > 1 exactly.

    Returns:
        (holds, method) where method names how the comparison was settled.
    """
    c = 1 - mu1
    if c < 0:
        return True, "exact"
    if c == 0:
        return mu2 > 0, "exact"
    if mu2 == 0:
        return False, "exact"
    if mu2 == 1:
        return True, "exact"
    k = m.bit_length() - 1
    if m == 1 << k:
        return mu2 > c ** k, "exact"
    # μ2^{ln 2/ln m} > c  <=>  ln 2 · ln μ2 > ln m · ln c
    if _log_products_equal(2, mu2, m, c):
        return False, "exact"
    for dps in INTERVAL_PRECISIONS:
        with iv_workdps(dps) as iv:
            lhs = iv.log(2) * iv.log(_iv_fraction(iv, mu2))
            rhs = iv.log(m) * iv.log(_iv_fraction(iv, c))
            decided = lhs > rhs
        if decided is not None:
            return decided, f"interval@{dps}"
    logger.warning("cross-matching hypothesis undecided at %d digits; treated as not strict", dps)
    return False, "undecided"


def disagreeing_pair(F1, F2):
    """The lexicographically first x1 in F1, x2 in F2 with agr(x1, x2) = 0, or None."""
    A, B = F1.code_array(), F2.code_array()
    for row in A:
        apart = np.flatnonzero((B != row).all(axis=1))
        if apart.size:
            return tuple(int(v) for v in row), tuple(int(v) for v in B[apart[0]])
    return None


def check_unbalanced_cross_matching(F1, F2):
    """If μ(F1) + μ(F2)^{log_m 2} > 1 then some x1 in F1, x2 in F2 agree nowhere."""
    if F1.box != F2.box:
        raise DimensionError(f"families on {F1.box} and {F2.box}")
    box = F1.box
    mu1, mu2 = Fraction(len(F1), box.size), Fraction(len(F2), box.size)
    holds, method = unbalanced_hypothesis(mu1, mu2, box.m)
    params = {"m": box.m, "n": box.n, "size1": len(F1), "size2": len(F2)}
    pair = disagreeing_pair(F1, F2)
    details = {"mu1": mu1, "mu2": mu2, "hypothesis": holds, "decided_by": method}
    if F1 and F2:
        pipeline = check_compression_pipeline(F1, F2)
        details["pipeline"] = pipeline.details
        if not pipeline.passed:
            return Report.verdict("unbalanced", params, False, witness=pipeline.witness, details=details)
    if not holds:
        details["witness"] = pair
        return Report.unmet("unbalanced", params, "mu1 + mu2^log_m(2) <= 1", details)
    return Report.verdict("unbalanced", params, pair is not None,
                          witness={"x1": pair[0], "x2": pair[1]} if pair else None, details=details)


def check_compression_pipeline(F1, F2):
    """Compress, monotonize and compare measures for a pair of families in one box.

    Always: compression preserves measure, the images are monotone and μ_{1/m} of each image is
    at least the original measure. When F1, F2 are cross-agreeing: the images are cross-agreeing
    in the cube, μ_{1/2}(A) + μ_{1/2}(B) <= 1, and the monotone shift from p = 1/m to q = 1/2 holds.
    """
    if F1.box != F2.box:
        raise DimensionError(f"families on {F1.box} and {F2.box}")
    box = F1.box
    problems = []
    images = []
    for k, F in enumerate((F1, F2), 1):
        G = full_compress(F)
        if len(G) != len(F):
            problems.append({"family": k, "kind": "compression changed the measure"})
        A = monotonize(G)
        if not is_monotone(A)[0]:
            problems.append({"family": k, "kind": "image not monotone"})
        if p_biased(A, Fraction(1, box.m)) < Fraction(len(F), box.size):
            problems.append({"family": k, "kind": "mu_1/m below mu"})
        images.append(A)
    A, B = images
    cross = disagreeing_pair(F1, F2) is None
    details = {"cross_agreeing": cross, "mu_half": [p_biased(A, Fraction(1, 2)), p_biased(B, Fraction(1, 2))]}
    if cross:
        if not are_cross_agreeing_cube(A, B)[0]:
            problems.append({"kind": "cube images not cross-agreeing"})
        if sum(details["mu_half"]) > 1:
            problems.append({"kind": "mu_1/2(A) + mu_1/2(B) > 1"})
        for k, image in enumerate(images, 1):
            if image and is_monotone(image)[0] and box.m >= 2:
                shift = check_monotone_shift(image, Fraction(1, box.m), Fraction(1, 2))
                if not shift.passed:
                    problems.append({"family": k, "kind": "monotone shift"})
    params = {"m": box.m, "n": box.n, "size1": len(F1), "size2": len(F2)}
    return Report.verdict("compress", params, not problems, witness={"problems": problems} if problems else None,
                          details=details)


def compression_report(F):
    """Single-family compression facts: measure, idempotence, monotone image, μ_{1/m} >= μ."""
    G = full_compress(F)
    A = monotonize(G)
    problems = []
    if len(G) != len(F):
        problems.append("measure changed")
    if full_compress(G) != G:
        problems.append("not idempotent")
    if not is_monotone(A)[0]:
        problems.append("image not monotone")
    if p_biased(A, Fraction(1, F.box.m)) < Fraction(len(F), F.box.size):
        problems.append("mu_1/m below mu")
    return Report.verdict("compress", {"m": F.box.m, "n": F.box.n, "size": len(F)}, not problems,
                          witness={"problems": problems} if problems else None,
                          details={"compressed": G, "cube": A})
