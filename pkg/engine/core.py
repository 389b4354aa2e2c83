"""
Codes, restrictions and families over a box [m]^n.

Symbols are 1-based everywhere in the public API. Families over boxes with at most
DENSE_LIMIT codes are stored as a boolean mask over the lexicographic code index;
larger boxes fall back to a frozenset of codes. Both representations answer the
same queries; operations that need a dense table raise BudgetError on huge boxes.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BudgetError, DimensionError, DomainError

logger = logging.getLogger(__name__)

DENSE_LIMIT = 2 ** 24

Code = tuple


def as_code(symbols):
    """Convert any integer sequence (numpy rows included) into a Code tuple."""
    return tuple(int(s) for s in symbols)


@dataclass(frozen=True)
class Box:
    """The box [m]^n.

    m = 1 and n = 0 are accepted for internal values (gluing targets collapse the alphabet,
    restricting every coordinate leaves the point box); `require_public` enforces m >= 2, n >= 1.
    """

    m: int
    n: int

    def __post_init__(self):
        if isinstance(self.m, bool) or isinstance(self.n, bool):
            raise DomainError("box sizes must be integers")
        if int(self.m) != self.m or int(self.n) != self.n:
            raise DomainError(f"box sizes must be integers, got m={self.m!r}, n={self.n!r}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "n", int(self.n))
        if self.m < 1 or self.n < 0:
            raise DomainError(f"invalid box [{self.m}]^{self.n}")

    def require_public(self):
        if self.m < 2 or self.n < 1:
            raise DomainError(f"box [{self.m}]^{self.n} needs m >= 2 and n >= 1")
        return self

    @property
    def size(self):
        return self.m ** self.n

    @property
    def dense(self):
        return self.size <= DENSE_LIMIT

    @property
    def shape(self):
        return (self.m,) * self.n

    def check_code(self, x):
        """Validate a code against the box and return it as a tuple.

        Raises:
            DimensionError: wrong length.
            DomainError: a symbol outside [m].
        """
        code = as_code(x)
        if len(code) != self.n:
            raise DimensionError(f"code {code} has length {len(code)}, box has n={self.n}")
        for s in code:
            if not 1 <= s <= self.m:
                raise DomainError(f"symbol {s} of {code} outside [1, {self.m}]")
        return code

    def index(self, x):
        """Lexicographic index of a code (0-based)."""
        idx = 0
        for s in x:
            idx = idx * self.m + (s - 1)
        return idx

    def code_at(self, index):
        if not 0 <= index < self.size:
            raise DomainError(f"index {index} outside box of size {self.size}")
        symbols = []
        for _ in range(self.n):
            index, rem = divmod(index, self.m)
            symbols.append(rem + 1)
        return tuple(reversed(symbols))

    def codes(self):
        """Iterate all codes in lexicographic order."""
        return itertools.product(range(1, self.m + 1), repeat=self.n)

    def __str__(self):
        return f"[{self.m}]^{self.n}"


@lru_cache(maxsize=64)
def _code_table(m, n):
    if n == 0:
        table = np.zeros((1, 0), dtype=np.int32)
    else:
        table = np.indices((m,) * n, dtype=np.int32).reshape(n, -1).T + 1
    table.setflags(write=False)
    return table


def code_array(box):
    """All codes of a box as an (m^n, n) array of 1-based symbols, in lexicographic order."""
    if box.size > DENSE_LIMIT:
        raise BudgetError(f"box {box} too large for a dense code table")
    return _code_table(box.m, box.n)


@dataclass(frozen=True, order=True)
class Restriction:
    """A partial code: values fixed on a strictly increasing coordinate set.

    Ordering compares coordinates first and values second, which is the tie-break order used
    by every deterministic scan in the engine.
    """

    coords: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        coords = as_code(self.coords)
        values = as_code(self.values)
        if len(coords) != len(values):
            raise DomainError(f"restriction has {len(coords)} coordinates but {len(values)} values")
        if any(c < 1 for c in coords) or any(b <= a for a, b in zip(coords, coords[1:])):
            raise DomainError(f"restriction coordinates {coords} must be strictly increasing and >= 1")
        if any(v < 1 for v in values):
            raise DomainError(f"restriction values {values} must be >= 1")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "values", values)

    @classmethod
    def of(cls, mapping):
        """Build from a {coordinate: value} mapping."""
        items = sorted(mapping.items())
        return cls(tuple(k for k, _ in items), tuple(v for _, v in items))

    @classmethod
    def from_code(cls, x, coords):
        coords = tuple(sorted(coords))
        return cls(coords, tuple(x[c - 1] for c in coords))

    def __len__(self):
        return len(self.coords)

    def as_dict(self):
        return dict(zip(self.coords, self.values))

    def check_in(self, box):
        if self.coords and self.coords[-1] > box.n:
            raise DomainError(f"restriction coordinates {self.coords} outside [1, {box.n}]")
        if any(v > box.m for v in self.values):
            raise DomainError(f"restriction values {self.values} outside [1, {box.m}]")
        return self

    def matches(self, x):
        return all(x[c - 1] == v for c, v in zip(self.coords, self.values))

    def compatible(self, other):
        mine = self.as_dict()
        return all(mine.get(c, v) == v for c, v in zip(other.coords, other.values))

    def merge(self, other):
        if not self.compatible(other):
            raise DomainError(f"restrictions {self} and {other} disagree on a shared coordinate")
        merged = self.as_dict()
        merged.update(other.as_dict())
        return Restriction.of(merged)

    def __str__(self):
        body = ", ".join(f"{c}->{v}" for c, v in zip(self.coords, self.values))
        return "{" + body + "}"


def restriction_of(x, coords):
    """The restriction x|_Z of a code."""
    return Restriction.from_code(x, coords)


def match_mask(box, r):
    """Boolean mask (lexicographic order) of the codes of `box` matching restriction r."""
    r.check_in(box)
    tensor = np.zeros(box.shape, dtype=bool)
    tensor[_slice_for(box, r)] = True
    return tensor.reshape(-1)


def _slice_for(box, r):
    index = [slice(None)] * box.n
    for c, v in zip(r.coords, r.values):
        index[c - 1] = v - 1
    return tuple(index)


class Family:
    """An immutable set of codes in a declared box."""

    __slots__ = ("_box", "_mask", "_members")

    def __init__(self, box, codes=()):
        self._box = box
        checked = [box.check_code(x) for x in codes]
        if box.dense:
            mask = np.zeros(box.size, dtype=bool)
            if checked:
                mask[[box.index(x) for x in checked]] = True
            mask.setflags(write=False)
            self._mask = mask
            self._members = None
        else:
            self._mask = None
            self._members = frozenset(checked)

    @classmethod
    def from_mask(cls, box, mask):
        mask = np.array(mask, dtype=bool).reshape(-1)
        if mask.size != box.size:
            raise DimensionError(f"mask of length {mask.size} does not cover box {box}")
        family = cls.__new__(cls)
        family._box = box
        mask.setflags(write=False)
        family._mask = mask
        family._members = None
        return family

    @classmethod
    def full(cls, box):
        return cls.from_mask(box, np.ones(box.size, dtype=bool))

    @classmethod
    def empty(cls, box):
        if box.dense:
            return cls.from_mask(box, np.zeros(box.size, dtype=bool))
        return cls(box)

    @property
    def box(self):
        return self._box

    @property
    def is_dense(self):
        return self._mask is not None

    def mask(self):
        if self._mask is None:
            raise BudgetError(f"family over {self._box} has no dense mask")
        return self._mask

    def tensor(self):
        """The mask reshaped to (m,)*n."""
        return self.mask().reshape(self._box.shape)

    def indices(self):
        if self._mask is not None:
            return np.flatnonzero(self._mask)
        return np.array(sorted(self._box.index(x) for x in self._members), dtype=np.int64)

    def codes(self):
        """Members in lexicographic order."""
        if self._mask is not None:
            return tuple(as_code(row) for row in self.code_array())
        return tuple(sorted(self._members))

    def code_array(self):
        """Members as a (|F|, n) array of 1-based symbols."""
        if self._mask is not None:
            return code_array(self._box)[self._mask]
        if not self._members:
            return np.zeros((0, self._box.n), dtype=np.int64)
        return np.array(sorted(self._members), dtype=np.int64)

    def __len__(self):
        if self._mask is not None:
            return int(np.count_nonzero(self._mask))
        return len(self._members)

    def __bool__(self):
        return len(self) > 0

    def __iter__(self):
        return iter(self.codes())

    def __contains__(self, x):
        try:
            code = self._box.check_code(x)
        except (DimensionError, DomainError):
            return False
        if self._mask is not None:
            return bool(self._mask[self._box.index(code)])
        return code in self._members

    def _same_box(self, other):
        if not isinstance(other, Family) or other.box != self._box:
            raise DimensionError(f"families live in different boxes: {self._box} vs {getattr(other, 'box', None)}")

    def __eq__(self, other):
        if not isinstance(other, Family):
            return NotImplemented
        if other.box != self._box:
            return False
        if self._mask is not None and other._mask is not None:
            return bool(np.array_equal(self._mask, other._mask))
        return set(self.codes()) == set(other.codes())

    def __hash__(self):
        return hash((self._box, self.indices().tobytes()))

    def _combine(self, other, op, set_op):
        self._same_box(other)
        if self._mask is not None:
            return Family.from_mask(self._box, op(self._mask, other.mask()))
        return Family(self._box, set_op(set(self._members), set(other.codes())))

    def __or__(self, other):
        return self._combine(other, np.logical_or, set.union)

    def __and__(self, other):
        return self._combine(other, np.logical_and, set.intersection)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a & ~b, set.difference)

    def complement(self):
        return Family.from_mask(self._box, ~self.mask())

    def issubset(self, other):
        return len(self - other) == 0

    def __repr__(self):
        preview = list(self.codes()[:4])
        more = ", ..." if len(self) > 4 else ""
        return f"Family({self._box}, {len(self)} codes: {preview}{more})"


def agr(x, y, box=None):
    """Number of coordinates where two codes carry the same symbol.

    Raises:
        DimensionError: the codes have different lengths, a symbol is below 1, or (with `box`)
            either code is not a member of the box.
    """
    if len(x) != len(y):
        raise DimensionError(f"codes {tuple(x)} and {tuple(y)} have different lengths")
    if box is not None:
        for code in (x, y):
            try:
                box.check_code(code)
            except DomainError as exc:
                raise DimensionError(f"code {tuple(code)} is not in {box}") from exc
    elif min(x, default=1) < 1 or min(y, default=1) < 1:
        raise DimensionError(f"codes {tuple(x)} and {tuple(y)} lie in no box [m]^n")
    return sum(1 for a, b in zip(x, y) if a == b)


def _assignment(v):
    if isinstance(v, Restriction):
        return v.as_dict()
    return {i + 1: s for i, s in enumerate(v)}


def agr_on(coords, x, y):
    """Agreement of two codes or restrictions counted on the coordinate set Z only.

    Raises:
        DomainError: Z is not inside both domains.
    """
    left, right = _assignment(x), _assignment(y)
    count = 0
    for c in coords:
        if c not in left or c not in right:
            raise DomainError(f"coordinate {c} outside the domain of one operand")
        count += left[c] == right[c]
    return count


def restrict_family(F, r, mode="keep"):
    """F[Z->x] (keep) or F(Z->x) (quotient) for the restriction r = (Z, x).

    Args:
        F: Family to restrict.
        r: Restriction inside F's box.
        mode: "keep" keeps matching members in the same box; "quotient" also deletes the
            coordinates of Z and returns a family over [m]^{n-|Z|}.

    Returns:
        Family
    """
    box = F.box
    r.check_in(box)
    if mode not in ("keep", "quotient"):
        raise DomainError(f"unknown restriction mode {mode!r}")
    if F.is_dense:
        tensor = F.tensor()
        index = _slice_for(box, r)
        sub = np.asarray(tensor[index])
        if mode == "quotient":
            return Family.from_mask(Box(box.m, box.n - len(r)), sub.reshape(-1))
        kept = np.zeros(box.shape, dtype=bool)
        kept[index] = sub
        return Family.from_mask(box, kept.reshape(-1))
    matching = [x for x in F.codes() if r.matches(x)]
    if mode == "keep":
        return Family(box, matching)
    fixed = set(r.coords)
    return Family(Box(box.m, box.n - len(r)),
                  [tuple(s for i, s in enumerate(x, 1) if i not in fixed) for x in matching])


def is_avoiding(F, t):
    """Whether no two distinct members agree on exactly t-1 coordinates.

    Returns:
        (True, None) or (False, (x, y)) with the lexicographically first offending pair.
    """
    n = F.box.n
    if not 1 <= t <= n + 1:
        raise DomainError(f"t={t} outside [1, {n + 1}]")
    arr = F.code_array()
    for i in range(len(arr) - 1):
        agreements = (arr[i + 1:] == arr[i]).sum(axis=1)
        hits = np.flatnonzero(agreements == t - 1)
        if hits.size:
            return False, (as_code(arr[i]), as_code(arr[i + 1 + hits[0]]))
    return True, None


def is_t_intersecting(F, t):
    """Whether every pair of members (a member with itself included) agrees on >= t coordinates."""
    arr = F.code_array()
    if len(arr) and F.box.n < t:
        return False
    for i in range(len(arr) - 1):
        if ((arr[i + 1:] == arr[i]).sum(axis=1) < t).any():
            return False
    return True


def make_star(box, coords, values):
    """The star {x : x_Z = values}.

    Raises:
        DomainError: |Z| != |values| or the restriction does not fit the box.
    """
    r = Restriction(tuple(coords), tuple(values)).check_in(box)
    if box.dense:
        return Family.from_mask(box, match_mask(box, r))
    free = [i for i in range(1, box.n + 1) if i not in set(r.coords)]
    fixed = r.as_dict()
    codes = []
    for tail in itertools.product(range(1, box.m + 1), repeat=len(free)):
        x = dict(fixed)
        x.update(zip(free, tail))
        codes.append(tuple(x[i] for i in range(1, box.n + 1)))
    return Family(box, codes)


@dataclass(frozen=True)
class StarMatch:
    restriction: Restriction
    exact: bool


def detect_star(F):
    """The maximal restriction shared by every member, or None for the empty family."""
    if not F:
        return None
    arr = F.code_array()
    fixed = [i for i in range(F.box.n) if bool((arr[:, i] == arr[0, i]).all())]
    r = Restriction(tuple(i + 1 for i in fixed), tuple(int(arr[0, i]) for i in fixed))
    exact = len(F) == F.box.m ** (F.box.n - len(fixed))
    return StarMatch(r, exact)


@dataclass(frozen=True)
class StarSpec:
    """Parameters of the family S_{t,r}: at least t+r ones among the first t+2r coordinates."""

    box: Box
    t: int
    r: int = 0

    def __post_init__(self):
        if self.t < 1 or self.r < 0:
            raise DomainError(f"need t >= 1 and r >= 0, got t={self.t}, r={self.r}")
        if self.t + 2 * self.r > self.box.n:
            raise DomainError(f"t + 2r = {self.t + 2 * self.r} exceeds n = {self.box.n}")

    @property
    def width(self):
        return self.t + 2 * self.r


def srt_family(spec):
    box, width = spec.box, spec.width
    ones = (code_array(box)[:, :width] == 1).sum(axis=1)
    return Family.from_mask(box, ones >= spec.t + spec.r)


def srt_size(spec):
    m, width = spec.box.m, spec.width
    head = sum(math.comb(width, j) * (m - 1) ** (width - j) for j in range(spec.t + spec.r, width + 1))
    return head * m ** (spec.box.n - width)


def embed_code(x, m):
    """The set {(i-1)m + x_i} of a code; agreement becomes intersection size."""
    return frozenset((i - 1) * m + s for i, s in enumerate(x, 1))


def embed_restriction(r, m):
    return frozenset((c - 1) * m + v for c, v in zip(r.coords, r.values))


def embed_to_sets(F):
    """Embedded images of all members, in lexicographic member order."""
    return tuple(embed_code(x, F.box.m) for x in F.codes())
