"""
Noise operators, stability, norms, globalness and homogeneity, hypercontractivity
checks, the boosting constants and the measure-boosting experiments.

Function tables are numpy arrays of shape (m,)*n. Exact tables use object dtype holding
Fractions; a float rho (or a float table) switches the computation to binary64.
"""

import contextlib
import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Optional

import mpmath
import numpy as np

from .core import Box, Family, Restriction, restrict_family
from .errors import BudgetError, DimensionError, DomainError, PreconditionError, UndefinedError
from .measure import (
    Gluing,
    ProductMeasure,
    apply_gluing,
    as_fraction,
    balancedness,
    compose,
    count_gluings,
    enumerate_gluings,
    first_gluing,
    integrate_axes,
    measure_of,
    push_measure,
    restrict_measure,
    sample_gluing,
)
from .report import Report

logger = logging.getLogger(__name__)

TABLE_LIMIT = 2 ** 16
TOLERANCE = 1e-9
PRECISION = 50


@contextlib.contextmanager
def iv_workdps(dps):
    """Temporarily set the precision of mpmath's interval context."""
    saved = mpmath.iv.dps
    mpmath.iv.dps = dps
    try:
        yield mpmath.iv
    finally:
        mpmath.iv.dps = saved


def _mpf(value):
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    if isinstance(value, RootValue):
        return mpmath.root(_mpf(value.base), value.root)
    return mpmath.mpf(value)


def _scalar(value):
    if isinstance(value, float):
        return value
    return as_fraction(value)


@total_ordering
class RootValue:
    """The nonnegative real base^(1/root), compared exactly by cross powers.

    Homogeneity and globalness are roots of rationals; keeping them in this form makes
    globalness(1_F)**2 == homogeneity(F) an exact identity.
    """

    __slots__ = ("base", "root")

    def __init__(self, base, root=1):
        if root < 1:
            raise DomainError(f"root must be >= 1, got {root}")
        base = base if isinstance(base, float) else Fraction(base)
        if base < 0:
            raise DomainError(f"negative base {base}")
        self.base = base
        self.root = int(root)

    @staticmethod
    def _coerce(other):
        if isinstance(other, RootValue):
            return other
        if isinstance(other, (int, float, Fraction)):
            return RootValue(other, 1)
        return None

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.base ** other.root == other.base ** self.root

    def __lt__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.base ** other.root < other.base ** self.root

    __hash__ = None

    def __float__(self):
        return float(self.base) ** (1.0 / self.root)

    @property
    def is_exact(self):
        return not isinstance(self.base, float)

    def squared(self):
        if self.root % 2 == 0:
            return RootValue(self.base, self.root // 2)
        return RootValue(self.base ** 2, self.root)

    def power_compare(self, exponent, value):
        """Sign of self**exponent - value, exactly, for an integer exponent >= 0."""
        left = self.base ** exponent
        right = _scalar(value) ** self.root
        return (left > right) - (left < right)

    def rational_upper(self, denominator=10 ** 12):
        """A rational upper bound, tight to 1/denominator."""
        if self.root == 1 and self.is_exact:
            return self.base
        guess = Fraction(math.ceil(float(self) * denominator), denominator)
        while guess ** self.root < self.base:
            guess += Fraction(1, denominator)
        return guess

    def __str__(self):
        if self.root == 1:
            return str(self.base)
        return f"({self.base})^(1/{self.root})"

    __repr__ = __str__

    def to_json(self):
        return {"base": str(self.base), "root": self.root, "value": float(self)}


class RealFunctionOnBox:
    """A real function on [m]^n together with the product measure it is integrated against."""

    __slots__ = ("measure", "values")

    def __init__(self, measure, values):
        box = measure.box
        if box.size > TABLE_LIMIT:
            raise BudgetError(f"function tables are capped at {TABLE_LIMIT} cells, box {box} has {box.size}")
        table = np.asarray(values)
        if table.dtype.kind != "f":
            table = table.astype(object)
        if table.size != box.size:
            raise DimensionError(f"table with {table.size} cells for box {box}")
        self.measure = measure
        self.values = table.reshape(box.shape)

    @classmethod
    def indicator(cls, F, nu):
        if F.box != nu.box:
            raise DimensionError(f"family on {F.box}, measure on {nu.box}")
        return cls(nu, F.tensor().astype(np.int64).astype(object))

    @classmethod
    def constant(cls, nu, c):
        return cls(nu, np.full(nu.box.shape, _scalar(c), dtype=object))

    @property
    def box(self):
        return self.measure.box

    @property
    def exact(self):
        return self.values.dtype == object

    def scaled(self, c):
        return RealFunctionOnBox(self.measure, self.values * _scalar(c))


def indicator(F, nu=None):
    return RealFunctionOnBox.indicator(F, nu or ProductMeasure.uniform(F.box))


def _weights(nu, dtype):
    if dtype == object:
        return [np.array(f, dtype=object) for f in nu.factors]
    return [np.array([float(w) for w in f]) for f in nu.factors]


def noise_apply(f, rho):
    """T_rho f, one coordinate at a time: rho·Id + (1 - rho)·E_{ν_i}.

    Raises:
        DomainError: rho outside [0, 1].
    """
    rho = _scalar(rho)
    if not 0 <= rho <= 1:
        raise DomainError(f"rho={rho} outside [0, 1]")
    values = f.values
    if isinstance(rho, float) or not f.exact:
        values = values.astype(float)
        rho = float(rho)
    weights = _weights(f.measure, values.dtype)
    for axis in range(values.ndim):
        shape = [1] * values.ndim
        shape[axis] = len(weights[axis])
        mean = (values * weights[axis].reshape(shape)).sum(axis=axis, keepdims=True)
        values = rho * values + (1 - rho) * mean
    return RealFunctionOnBox(f.measure, values)


def expectation(f):
    if not f.exact:
        weights = _weights(f.measure, float)
        values = f.values
        for axis in reversed(range(values.ndim)):
            shape = [1] * values.ndim
            shape[axis] = len(weights[axis])
            values = (values * weights[axis].reshape(shape)).sum(axis=axis)
        return float(values)
    return Fraction(integrate_axes(f.values, f.measure.factors))


def inner(f, g):
    if f.measure != g.measure:
        raise DimensionError("functions are integrated against different measures")
    return expectation(RealFunctionOnBox(f.measure, f.values * g.values))


def stability(F, nu, rho):
    """Stab_rho(F) = <1_F, T_rho 1_F>_ν."""
    f = RealFunctionOnBox.indicator(F, nu)
    return inner(f, noise_apply(f, rho))


def q_norm(f, q):
    """(E_ν |f|^q)^(1/q) as a float; exact moment first when q is an integer."""
    q = _scalar(q)
    if q < 1:
        raise DomainError(f"q={q} must be >= 1")
    absolute = np.abs(f.values)
    if f.exact and isinstance(q, Fraction) and q.denominator == 1:
        moment = expectation(RealFunctionOnBox(f.measure, absolute ** int(q)))
        with mpmath.workdps(30):
            return float(mpmath.root(_mpf(moment), int(q)))
    moment = expectation(RealFunctionOnBox(f.measure, absolute.astype(float) ** float(q)))
    return moment ** (1.0 / float(q))


def _nonempty_subsets(n):
    for size in range(1, n + 1):
        yield from itertools.combinations(range(n), size)


def _peak(table):
    return max(np.asarray(table, dtype=object).reshape(-1))


def globalness(f):
    """Least r >= 1 with ||f_{S->x}||_2 <= r^|S| ||f||_2 for every S != ∅ and x.

    Raises:
        UndefinedError: f is identically zero.
    """
    squares = f.values * f.values
    norm_sq = expectation(RealFunctionOnBox(f.measure, squares))
    if norm_sq == 0:
        raise UndefinedError("globalness of the zero function")
    best = RootValue(1)
    for axes in _nonempty_subsets(f.box.n):
        peak = _peak(integrate_axes(squares, f.measure.factors, keep=axes))
        ratio = peak / norm_sq if not f.exact else Fraction(peak) / norm_sq
        candidate = RootValue(ratio, 2 * len(axes))
        if candidate > best:
            best = candidate
    return best


def restricted_measure_table(F, nu, coords):
    """ν_{[n]\\S}(F(S->x)) for every x in [m]^S, as an object table over [m]^S."""
    if F.box != nu.box:
        raise DimensionError(f"family on {F.box}, measure on {nu.box}")
    if F.box.size > TABLE_LIMIT:
        raise BudgetError(f"box {F.box} exceeds the {TABLE_LIMIT}-cell table cap")
    axes = tuple(c - 1 for c in sorted(coords))
    table = integrate_axes(F.tensor(), nu.factors, keep=axes)
    return np.asarray(table, dtype=object)


def homogeneity(F, nu=None):
    """Least τ with ν_{S->x}(F(S->x)) <= τ^|S| ν(F) for all S != ∅ and x, as a RootValue.

    Raises:
        UndefinedError: F is empty or has measure zero.
    """
    nu = nu or ProductMeasure.uniform(F.box)
    alpha = measure_of(nu, F)
    if not F or alpha == 0:
        raise UndefinedError("homogeneity of an empty (or null) family")
    best = RootValue(1)
    for axes in _nonempty_subsets(F.box.n):
        peak = _peak(restricted_measure_table(F, nu, [a + 1 for a in axes]))
        candidate = RootValue(Fraction(peak) / alpha, len(axes))
        if candidate > best:
            best = candidate
    return best


def homogeneous_restriction(F, nu, tau):
    """A maximal (Z, x) with ν_{Z->x}(F(Z->x)) >= τ^|Z| ν(F).

    Maximal means no strict superset of Z qualifies with any assignment, so F(Z->x) is
    τ-homogeneous. Among maximal sets the lexicographically least Z is taken, then the
    least qualifying x. Z = [n] is allowed (the restricted measure is then 1{x in F}).
    """
    tau = _scalar(tau)
    alpha = measure_of(nu, F)
    n = F.box.n
    qualifying = {(): ()}
    for size in range(1, n + 1):
        threshold = tau ** size * alpha
        for coords in itertools.combinations(range(1, n + 1), size):
            table = restricted_measure_table(F, nu, coords)
            hits = np.argwhere(np.asarray(table >= threshold, dtype=bool).reshape(table.shape))
            if len(hits):
                qualifying[coords] = tuple(int(v) + 1 for v in hits[0])
    maximal = [z for z in qualifying if not any(set(z) < set(w) for w in qualifying)]
    best = min(maximal)
    return Restriction(best, qualifying[best])


def restricted_measure(F, nu, r):
    """ν_{Z->x}(F(Z->x)) for one restriction."""
    return measure_of(restrict_measure(nu, r.coords), restrict_family(F, r, "quotient"))


def _params(**kwargs):
    return {k: v for k, v in kwargs.items() if v is not None}


def check_hypercontractivity(F, nu=None, q=4):
    """‖T_{ρ*} 1_F‖_q <= ‖1_F‖_2 with ρ* = ln q / (32 r q) and r = globalness(1_F)."""
    nu = nu or ProductMeasure.uniform(F.box)
    params = _params(m=F.box.m, n=F.box.n, q=q, size=len(F))
    if not F:
        return Report.unmet("hyper", params, "globalness undefined for the empty family")
    f = RealFunctionOnBox.indicator(F, nu)
    r = globalness(f)
    rho = math.log(float(q)) / (32.0 * float(r) * float(q))
    lhs = q_norm(noise_apply(f, rho), q)
    rhs = q_norm(f, 2)
    passed = lhs <= rhs + TOLERANCE
    return Report.verdict("hyper", params, passed, margin=rhs - lhs,
                          witness=None if passed else {"codes": F},
                          details={"r": r, "rho": rho, "lhs": lhs, "rhs": rhs})


def check_stab_interpolation(f, rho, t):
    """Stab_ρ(f) <= ‖f‖_2^{2(1-1/t)} · Stab_{ρ^t}(f)^{1/t} for t a power of two."""
    if t < 2 or t & (t - 1):
        raise DomainError(f"t={t} must be a power of two >= 2")
    rho = _scalar(rho)
    lhs = inner(f, noise_apply(f, rho))
    norm_sq = inner(f, f)
    stab_t = inner(f, noise_apply(f, rho ** t))
    params = _params(m=f.box.m, n=f.box.n, rho=rho, t=t)
    rhs_float = float(norm_sq) ** (1 - 1 / t) * max(float(stab_t), 0.0) ** (1 / t)
    margin = rhs_float - float(lhs)
    if isinstance(lhs, Fraction) and isinstance(stab_t, Fraction):
        passed = lhs < 0 or lhs ** t <= norm_sq ** (t - 1) * stab_t
        details = {"exact": True, "lhs": lhs, "norm_sq": norm_sq, "stab_rho_t": stab_t}
    else:
        passed = float(lhs) <= rhs_float + TOLERANCE
        details = {"exact": False, "lhs": float(lhs), "rhs": rhs_float}
    return Report.verdict("stab-interp", params, passed, margin=margin, details=details)


def stability_profile(F, nu, grid):
    return [stability(F, nu, rho) for rho in grid]


def check_stability_monotone(F, nu, grid):
    """Stab_ρ(F) is nondecreasing along an increasing grid of ρ values."""
    grid = sorted(_scalar(r) for r in grid)
    values = stability_profile(F, nu, grid)
    drops = [(grid[i], grid[i + 1]) for i in range(len(values) - 1) if values[i + 1] < values[i]]
    params = _params(m=F.box.m, n=F.box.n, points=len(grid))
    return Report.verdict("stab-monotone", params, not drops,
                          witness={"rho_pairs": drops} if drops else None,
                          details={"profile": values})


@dataclass(frozen=True)
class BoostConstants:
    tau: object
    b: int
    c: object
    c1: object
    c2: object
    C1: object
    C2: object

    def as_dict(self):
        return {k: mpmath.nstr(getattr(self, k), 17) for k in ("tau", "c", "c1", "c2", "C1", "C2")} | {"b": self.b}


def boost_exponent(tau):
    """c(τ) = ln(6/5) / (8 ln(2^7 / ln 4) + 4 ln τ), for τ >= 1."""
    with mpmath.workdps(PRECISION):
        tau = _mpf(tau)
        if tau < 1:
            raise DomainError(f"tau={tau} must be >= 1")
        return mpmath.log(mpmath.mpf(6) / 5) / (8 * mpmath.log(mpmath.mpf(2) ** 7 / mpmath.log(4)) + 4 * mpmath.log(tau))


def _c1(c):
    return 4 + 2 * mpmath.log(mpmath.log(2)) / mpmath.log(1 - c)


def _c2(c):
    return -2 / mpmath.log(1 - c)


def boost_constants(tau, b):
    """Every constant of the boosting lemmas at (τ, b), in extended precision.

    Raises:
        DomainError: τ <= 1 or b < 2.
    """
    if _mpf(tau) <= 1:
        raise DomainError(f"tau={tau} must exceed 1")
    if int(b) != b or b < 2:
        raise DomainError(f"b={b} must be an integer >= 2")
    with mpmath.workdps(PRECISION):
        c = boost_exponent(tau)
        c_two = boost_exponent(2)
        C1 = 4 / mpmath.log(2) * mpmath.mpf(b) ** (3 * _c1(c_two) + 4)
        C2 = 2 * _c2(c_two) * mpmath.log(b) + 1
        return BoostConstants(_mpf(tau), int(b), c, _c1(c), _c2(c), C1, C2)


@dataclass(frozen=True)
class RegimeThresholds:
    """Explicit hypotheses of the two theorems that settle the problem at large scale."""

    t: int
    m: Optional[int]
    n: Optional[int]
    n_bound: object
    m_bounds: tuple
    mnt_n_min: int
    mnt_m_min: object
    n_hat0: object
    n_tilde0: object
    n0: object
    spread_tau: object
    spread_q: Optional[int]

    def poly_log_applies(self):
        if self.t < 2 or self.m is None or self.n is None:
            return False
        return self.n >= self.n_bound and all(self.m >= bound for bound in self.m_bounds)

    def m_geq_nt_applies(self):
        if self.m is None or self.n is None:
            return False
        return self.t <= self.n + 1 and self.n >= self.mnt_n_min and self.m >= self.mnt_m_min

    def inside(self):
        return self.poly_log_applies() or self.m_geq_nt_applies()

    def as_dict(self):
        def fmt(v):
            return None if v is None else mpmath.nstr(v, 12) if isinstance(v, mpmath.mpf) else v
        return {
            "t": self.t, "m": self.m, "n": self.n,
            "n_bound": fmt(self.n_bound), "m_bounds": [fmt(v) for v in self.m_bounds],
            "mnt_n_min": self.mnt_n_min, "mnt_m_min": fmt(self.mnt_m_min),
            "n_hat0": fmt(self.n_hat0), "n_tilde0": fmt(self.n_tilde0), "n0": fmt(self.n0),
            "spread_tau": fmt(self.spread_tau), "spread_q": self.spread_q,
            "inside": self.inside(),
        }


def regime_thresholds(t, m=None, n=None):
    """Closed-form thresholds for agreement parameter t, coupled to m and/or n when given."""
    if int(t) != t or t < 1:
        raise DomainError(f"t={t} must be a positive integer")
    t = int(t)
    with mpmath.workdps(PRECISION):
        ln = mpmath.log
        k98 = ln(mpmath.mpf(9) / 8)
        k323 = ln(mpmath.mpf(32) / 3)
        c_two = boost_exponent(2)
        C1 = 4 / ln(2) * mpmath.mpf(2) ** (3 * _c1(c_two) + 4)
        C2 = 2 * _c2(c_two) * ln(2) + 1
        n_bound, m_bounds, spread_q = None, (), None
        if m is not None:
            lm = ln(m)
            n_bound = t + 6 * t ** 2 * lm / k98 + 2 + (6 * t * lm + 2 * k323) / ln(2)
            m_bounds = (
                48 / k98 * t ** 3 * lm + 16 * t,
                2 * mpmath.mpf(3) ** 2 / 4 * C1 * ln(mpmath.mpf(32) / 3 * mpmath.mpf(m) ** (3 * t)) ** (2 * C2),
                48 * (3 / k98 * t ** 2 * lm + 1),
            )
            spread_q = int(mpmath.floor(3 / k98 * t ** 2 * lm)) + 1
        mnt_m_min = None if n is None else (mpmath.mpf(2) ** 22 * n) ** (4 * t)
        return RegimeThresholds(
            t=t, m=m, n=n, n_bound=n_bound, m_bounds=m_bounds,
            mnt_n_min=50 * t * t, mnt_m_min=mnt_m_min,
            n_hat0=t + 6 * t ** 2 / k98 + 2 + (4 * t + 2 * k323) / ln(2),
            n_tilde0=mpmath.mpf(2) ** 32 * t ** 3 * ln(t),
            n0=mpmath.mpf(2) ** 32 * t ** 4,
            spread_tau=mpmath.root(mpmath.mpf(9) / 8, t),
            spread_q=spread_q,
        )


@dataclass(frozen=True)
class BoostStepResult:
    gluing: Gluing
    achieved: Fraction
    alpha: Fraction
    corollary_bound: Fraction
    corollary_ok: bool
    lemma_applicable: bool
    lemma_bound: Optional[float]
    lemma_ok: bool
    gluings_checked: int

    def to_report(self, params):
        passed = self.corollary_ok and self.lemma_ok
        return Report.verdict(
            "gluing-boost", params, passed,
            margin=self.achieved - self.corollary_bound,
            witness=None if passed else {"gluing": [list(mp) for mp in self.gluing.maps]},
            details={
                "achieved": self.achieved, "alpha": self.alpha,
                "corollary_bound": self.corollary_bound, "lemma_applicable": self.lemma_applicable,
                "lemma_bound": self.lemma_bound, "gluings_checked": self.gluings_checked,
                "best_gluing": [list(mp) for mp in self.gluing.maps],
            },
        )


def boost_step_search(F, nu, s, tau=None, budget=10 ** 6):
    """Maximize ν^π(F^π) over all balanced gluings [m] -> [m/s] and check both boosting bounds.

    The stability bound ν(F)^2 / Stab_{5/6}(F) is asserted always; ν(F)^{1-c(τ)} only when
    s >= 4, ν is s-balanced and F is τ-homogeneous.

    Raises:
        DomainError: s does not divide m.
        BudgetError: more than `budget` gluings.
    """
    box = F.box
    if s < 2 or box.m % s:
        raise DomainError(f"s={s} must be >= 2 and divide m={box.m}")
    m2 = box.m // s
    total = count_gluings(box.m, m2, 1, box.n)
    if total > budget:
        raise BudgetError(f"{total} gluings exceed the budget of {budget}")
    alpha = measure_of(nu, F)
    best, best_value = None, None
    for pi in enumerate_gluings(box.m, m2, 1, box.n):
        value = measure_of(push_measure(pi, nu), apply_gluing(pi, F))
        if best_value is None or value > best_value:
            best, best_value = pi, value
    stab = stability(F, nu, Fraction(5, 6))
    corollary_bound = alpha ** 2 / stab if stab > 0 else Fraction(0)
    lemma_applicable, lemma_bound, lemma_ok = False, None, True
    if F and alpha > 0 and s >= 4 and balancedness(nu) <= s:
        tau_F = homogeneity(F, nu)
        tau_value = _scalar(tau) if tau is not None else None
        if tau_value is None or tau_F <= tau_value:
            effective = tau_value if tau_value is not None else float(tau_F)
            lemma_applicable = True
            with mpmath.workdps(PRECISION):
                lemma_bound = float(_mpf(alpha) ** (1 - boost_exponent(effective)))
            lemma_ok = float(best_value) >= lemma_bound - TOLERANCE
    logger.debug("boost step over %s: best %s of %d gluings", box, best_value, total)
    return BoostStepResult(best, best_value, alpha, corollary_bound, best_value >= corollary_bound,
                           lemma_applicable, lemma_bound, lemma_ok, total)


@dataclass(frozen=True)
class TraceStep:
    index: int
    m: int
    restriction: Restriction
    measure: Fraction
    gluing_mode: str
    gluings_checked: int

    def to_json(self):
        return {"i": self.index, "m": self.m, "Z": list(self.restriction.coords),
                "r": list(self.restriction.values), "measure": str(self.measure),
                "gluing_mode": self.gluing_mode, "gluings_checked": self.gluings_checked}


@dataclass(frozen=True)
class BoostTrace:
    steps: tuple
    gluing: Gluing
    alpha: Fraction
    tau: Fraction
    b: int
    hypotheses: dict

    @property
    def hypotheses_met(self):
        return all(self.hypotheses.values())

    @property
    def final(self):
        return self.steps[-1]


def _best_step_gluing(F, nu, s, rng, samples, budget):
    m1 = F.box.m
    m2 = m1 // s
    total = count_gluings(m1, m2, 1, F.box.n)
    if total <= budget:
        candidates, mode = enumerate_gluings(m1, m2, 1, F.box.n), "exhaustive"
    else:
        candidates = (sample_gluing(m1, m2, 1, F.box.n, rng) for _ in range(samples))
        mode = "sampled"
    best, best_value, checked = None, None, 0
    for pi in candidates:
        checked += 1
        value = measure_of(push_measure(pi, nu), apply_gluing(pi, F))
        if best_value is None or value > best_value:
            best, best_value = pi, value
    return best, mode, checked


def boost_pipeline_trace(F, nu, b, tau, seed=0, samples=64, budget=10 ** 4):
    """Run the iterative boosting procedure and record its trajectory.

    Start by gluing [m] onto the power m0 of b with m/b < m0 <= m and restricting maximally.
    Each later step divides the alphabet by b^2 with the best step gluing on the free
    coordinates (exhaustive when at most `budget` gluings exist, otherwise the best of
    `samples` seeded draws), glues the restricted coordinates arbitrarily, and extends the
    restriction maximally. Stops once the restricted measure reaches 1/2 or the alphabet is
    at most b.
    """
    tau = _scalar(tau)
    if tau <= 1:
        raise DomainError(f"tau={tau} must exceed 1")
    if int(b) != b or b < 2:
        raise DomainError(f"b={b} must be an integer >= 2")
    b = int(b)
    rng = np.random.default_rng(seed)
    box = F.box
    alpha = measure_of(nu, F)

    m0 = 1
    while m0 * b <= box.m:
        m0 *= b
    pi = first_gluing(box.m, m0, b, box.n)
    glued_nu, glued = push_measure(pi, nu), apply_gluing(pi, F)
    r = homogeneous_restriction(glued, glued_nu, tau)
    value = restricted_measure(glued, glued_nu, r)
    steps = [TraceStep(0, m0, r, value, "initial", 1)]
    current = m0
    while value < Fraction(1, 2) and current > b:
        target = current // (b * b)
        free = [c for c in range(1, box.n + 1) if c not in r.coords]
        quotient = restrict_family(glued, r, "quotient")
        step, mode, checked = _best_step_gluing(quotient, restrict_measure(glued_nu, r.coords),
                                                b * b, rng, samples, budget)
        fixed_map = first_gluing(current, target, 1, 1).maps[0]
        maps = tuple(step.maps[free.index(c)] if c in free else fixed_map for c in range(1, box.n + 1))
        stage = Gluing(current, target, maps)
        pi = compose(stage, pi)
        glued_nu, glued = push_measure(pi, nu), apply_gluing(pi, F)
        r_glued = Restriction(r.coords, tuple(fixed_map[v - 1] for v in r.values))
        inner_family = restrict_family(glued, r_glued, "quotient")
        extra = homogeneous_restriction(inner_family, restrict_measure(glued_nu, r.coords), tau)
        r = r_glued.merge(Restriction(tuple(free[c - 1] for c in extra.coords), extra.values))
        value = restricted_measure(glued, glued_nu, r)
        current = target
        steps.append(TraceStep(len(steps), current, r, value, mode, checked))
        logger.debug("boost step %d: alphabet %d, |Z|=%d, measure %s", len(steps) - 1, current, len(r), value)

    hypotheses = {"alpha_positive": alpha > 0, "balanced": balancedness(nu) <= b}
    if alpha > 0:
        hypotheses["homogeneous"] = homogeneity(F, nu) <= tau
        with mpmath.workdps(PRECISION):
            log_inv = mpmath.log(1 / _mpf(alpha))
            bc = boost_constants(tau, b)
            hypotheses["m_large"] = box.m > mpmath.mpf(b) ** bc.c1 * log_inv ** (bc.c2 * mpmath.log(b))
            hypotheses["n_large"] = box.n > log_inv / mpmath.log(_mpf(tau))
    return BoostTrace(tuple(steps), pi, alpha, tau, b, hypotheses)


def check_boost_trace(trace, params):
    """Unconditional trace invariants, plus the lemma's conclusions when its hypotheses hold."""
    problems = []
    for prev, step in zip(trace.steps, trace.steps[1:]):
        if step.measure < prev.measure:
            problems.append({"kind": "measure decreased", "at": step.index})
    for step in trace.steps:
        if trace.tau ** len(step.restriction) * trace.alpha > step.measure or step.measure > 1:
            problems.append({"kind": "tau^|Z| alpha > measure", "at": step.index})
    details = {"trace": [s.to_json() for s in trace.steps], "hypotheses": trace.hypotheses,
               "alpha": trace.alpha, "final_gluing": [list(mp) for mp in trace.gluing.maps]}
    if trace.alpha > 0:
        details["restriction_bound"] = float(mpmath.log(1 / _mpf(trace.alpha)) / mpmath.log(_mpf(trace.tau)))
    status = None
    if trace.hypotheses_met:
        if trace.final.measure < Fraction(1, 2):
            problems.append({"kind": "final measure below 1/2"})
        if len(trace.final.restriction) > details["restriction_bound"] + TOLERANCE:
            problems.append({"kind": "restriction too large"})
    elif not problems:
        status = "hypotheses-unmet"
    return Report.verdict("boost-trace", params, not problems, margin=trace.final.measure,
                          witness={"problems": problems} if problems else None,
                          details=details, status=status)


def check_hoffman(G1, G2, nu=None):
    """α1·α2 <= (λ/(1-λ))^2 (1-α1)(1-α2) for cross-intersecting G1, G2.

    Raises:
        PreconditionError: λ > 1/2 or the families are not cross-intersecting.
    """
    nu = nu or ProductMeasure.uniform(G1.box)
    if G1.box != G2.box or G1.box != nu.box:
        raise DimensionError("families and measure must share one box")
    lam = max(w for factor in nu.factors for w in factor)
    if lam > Fraction(1, 2):
        raise PreconditionError(f"largest atom {lam} exceeds 1/2")
    A, B = G1.code_array(), G2.code_array()
    for row in A:
        misses = np.flatnonzero((B == row).sum(axis=1) == 0)
        if misses.size:
            raise PreconditionError("families are not cross-intersecting",
                                    witness={"x": [int(v) for v in row], "y": [int(v) for v in B[misses[0]]]})
    a1, a2 = measure_of(nu, G1), measure_of(nu, G2)
    lhs = a1 * a2
    rhs = (lam / (1 - lam)) ** 2 * (1 - a1) * (1 - a2)
    params = _params(m=G1.box.m, n=G1.box.n, size1=len(G1), size2=len(G2))
    return Report.verdict("hoffman", params, lhs <= rhs, margin=rhs - lhs,
                          witness=None if lhs <= rhs else {"G1": G1, "G2": G2},
                          details={"alpha1": a1, "alpha2": a2, "lambda": lam, "equality": lhs == rhs})
