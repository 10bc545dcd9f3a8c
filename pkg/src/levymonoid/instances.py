"""The three shipped monoid instances and their analytic integral registry.

* AdditiveReals: nonnegative reals under +, characters x -> exp(-lambda x)
  indexed by an enumeration of the positive rationals.
* MaxReals: nonnegative reals under max, characters the indicators of
  [0, lambda] (idempotent).
* LatticeUnion: proper subsets of a finite box in Z^d under union, with
  avoidance characters chi_K(J) = 1 iff J and K are disjoint (idempotent;
  the full box is the absorbing point at infinity).

A note on LatticeUnion characters: the hitting functional 1_{J cap K != 0}
is NOT a character (it gives 0 at the empty set and its family is not closed
under products); the avoidance functional is, and it is what ships here.
Under it, P(J_t cap K = empty) = exp(-t * mass_K) reads exactly like the
classical capacity formula for union-type processes.

Rational character indices are stored as exact numerator/denominator pairs;
only evaluation converts to double.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .core import INFINITY, CharacterId, ExtendedElement, MonoidInstance


class InvalidSpecError(ValueError):
    """Unknown instance name or invalid instance parameters."""


class NoClosedFormError(LookupError):
    """No analytic integral registered for this (instance, distribution) pair."""


# ----------------------------------------------------------------------
# Diagonal enumeration of the positive rationals, duplicates removed.
# Shared by the additive and max instances.  lambda_n <= n for every n,
# which keeps sum_n lambda_n / 2^n summable.
# ----------------------------------------------------------------------

_RATIONALS: list[tuple[int, int]] = []


def rational_index(n: int) -> tuple[int, int]:
    """The n-th positive rational (1-based) as (numerator, denominator)."""
    if n < 1:
        raise ValueError("rational indices are 1-based")
    while len(_RATIONALS) < n:
        _extend_rationals()
    return _RATIONALS[n - 1]


def _extend_rationals() -> None:
    s = _RATIONALS[-1][0] + _RATIONALS[-1][1] + 1 if _RATIONALS else 2
    for p in range(1, s):
        q = s - p
        if math.gcd(p, q) == 1:
            _RATIONALS.append((p, q))


def rational_weight_sum(n_terms: int = 120) -> float:
    """sum_n lambda_n / 2^n over the enumeration, to double precision.

    The tail past N is at most (N + 2) * 2^-N because lambda_n <= n, which is
    below 1e-34 at the default N.
    """
    total = Fraction(0)
    for n in range(1, n_terms + 1):
        p, q = rational_index(n)
        total += Fraction(p, q) / 2 ** n
    return float(total)


@dataclass(frozen=True)
class MarkDistribution:
    """A named mark distribution with scalar parameters.

    Registered names: exponential(rate), pareto(alpha, x_min),
    constant(value), uniform-singleton(), uniform-subset(size),
    stable-shell(alpha, scale, shell).
    """

    name: str
    params: tuple[tuple[str, float], ...] = ()

    def param(self, key: str) -> float:
        for k, v in self.params:
            if k == key:
                return v
        raise KeyError(f"distribution {self.name!r} has no parameter {key!r}")


def mark_distribution(name: str, **params: float) -> MarkDistribution:
    return MarkDistribution(name, tuple(sorted(params.items())))


# ----------------------------------------------------------------------
# Instances
# ----------------------------------------------------------------------

class AdditiveReals(MonoidInstance):
    """Nonnegative reals under addition with exponential characters."""

    name = "additive"
    idempotent = False
    drift_supported = True
    separation_prefix = 1  # x -> exp(-x) is injective

    @property
    def neutral(self) -> float:
        return 0.0

    def combine_finite(self, x: float, y: float) -> ExtendedElement:
        s = x + y
        return INFINITY if math.isinf(s) else s

    def has_action(self) -> bool:
        return True

    def action(self, r: float, x: float) -> float:
        return r * x

    def rate_of(self, c: CharacterId) -> float:
        """Summed rational index of a (product) character."""
        cache = self.__dict__.setdefault("_rates", {})
        if c not in cache:
            total = Fraction(0)
            for n in c.indices:
                p, q = rational_index(n)
                total += Fraction(p, q)
            cache[c] = float(total)
        return cache[c]

    def base_char_eval(self, n: int, x: float) -> float:
        p, q = rational_index(n)
        return math.exp(-(p / q) * x)

    def _eval_indices(self, indices, x: float) -> float:
        return math.exp(-self.rate_of(CharacterId(indices)) * x)

    def log_char_eval(self, c: CharacterId, x: ExtendedElement) -> float:
        if c.is_trivial:
            return 0.0
        if x is INFINITY:
            return -math.inf
        return -self.rate_of(c) * x

    def base_char_label(self, n: int) -> str:
        p, q = rational_index(n)
        return f"exp(-{p}/{q} x)"

    def sample_element(self, rng) -> float:
        return float(rng.uniform(0.0, 10.0))

    def fold_array(self, values) -> float:
        return float(values.sum()) if len(values) else 0.0


class MaxReals(MonoidInstance):
    """Nonnegative reals under max with interval-indicator characters.

    Idempotent, so every character is {0,1}-valued.  The documented
    separation guarantee: elements on the half-integer grid {0, .5, ..., 5}
    (the test sampling distribution) are separated by the first 64
    enumerated rational thresholds.
    """

    name = "max"
    idempotent = True
    drift_supported = False
    separation_prefix = 64

    @property
    def neutral(self) -> float:
        return 0.0

    def combine_finite(self, x: float, y: float) -> float:
        return x if x >= y else y

    def has_action(self) -> bool:
        return True

    def action(self, r: float, x: float) -> float:
        return r * x

    def threshold_of(self, c: CharacterId) -> float:
        """min of the rational thresholds in a product character."""
        cache = self.__dict__.setdefault("_thresholds", {})
        if c not in cache:
            cache[c] = float(min(Fraction(*rational_index(n)) for n in c.indices))
        return cache[c]

    def base_char_eval(self, n: int, x: float) -> float:
        p, q = rational_index(n)
        return 1.0 if x <= p / q else 0.0

    def _eval_indices(self, indices, x: float) -> float:
        return 1.0 if x <= self.threshold_of(CharacterId(indices)) else 0.0

    def base_char_label(self, n: int) -> str:
        p, q = rational_index(n)
        return f"ind[0,{p}/{q}]"

    def sample_element(self, rng) -> float:
        return float(rng.integers(0, 11)) * 0.5

    def fold_array(self, values) -> float:
        return float(values.max()) if len(values) else 0.0


class LatticeUnion(MonoidInstance):
    """Proper subsets of a finite box in Z^d under union, avoidance characters.

    Elements are frozensets of site indices (row-major over the box); a union
    that exhausts the box absorbs to the point at infinity.  Base character n
    avoids the n-th nonempty subset of the box, enumerated by size then
    lexicographic order; products of avoidance characters are the avoidance
    character of the union, so closure is exact.  Any two distinct subsets
    are separated by a singleton, hence by the first side^dim characters.
    """

    name = "lattice-union"
    idempotent = True
    drift_supported = False

    def __init__(self, dim: int = 2, side: int = 10):
        if dim < 1 or side < 1:
            raise InvalidSpecError(f"lattice box must be nonempty, got dim={dim} side={side}")
        self.dim = dim
        self.side = side
        self.n_sites = side ** dim
        self.separation_prefix = self.n_sites
        self.enumeration_size = 2 ** self.n_sites - 1
        self._avoid_cache: dict[CharacterId, frozenset[int]] = {}

    @property
    def neutral(self) -> frozenset[int]:
        return frozenset()

    def combine_finite(self, x: frozenset, y: frozenset) -> ExtendedElement:
        u = x | y
        return INFINITY if len(u) == self.n_sites else u

    def site_coords(self, site: int) -> tuple[int, ...]:
        coords = []
        for _ in range(self.dim):
            site, r = divmod(site, self.side)
            coords.append(r)
        return tuple(reversed(coords))

    def base_subset(self, n: int) -> frozenset[int]:
        """The n-th nonempty subset of the box, by size then lex order."""
        if n < 1 or n > self.enumeration_size:
            raise ValueError(f"character index {n} out of range")
        rank = n - 1
        size = 1
        while rank >= math.comb(self.n_sites, size):
            rank -= math.comb(self.n_sites, size)
            size += 1
        return frozenset(_unrank_combination(self.n_sites, size, rank))

    def avoid_set_of(self, c: CharacterId) -> frozenset[int]:
        if c not in self._avoid_cache:
            out: frozenset[int] = frozenset()
            for n in c.indices:
                out |= self.base_subset(n)
            self._avoid_cache[c] = out
        return self._avoid_cache[c]

    def base_char_eval(self, n: int, x: frozenset) -> float:
        return 1.0 if x.isdisjoint(self.base_subset(n)) else 0.0

    def _eval_indices(self, indices, x: frozenset) -> float:
        return 1.0 if x.isdisjoint(self.avoid_set_of(CharacterId(indices))) else 0.0

    def base_char_label(self, n: int) -> str:
        return "avoid{" + ";".join(map(str, sorted(self.base_subset(n)))) + "}"

    def sample_element(self, rng) -> frozenset[int]:
        mask = rng.random(self.n_sites) < 0.3
        sites = frozenset(int(i) for i in mask.nonzero()[0])
        if len(sites) == self.n_sites:
            sites = sites - {0}
        return sites

    def mark_repr(self, x: ExtendedElement) -> str:
        if x is INFINITY:
            return "INFINITY"
        return ";".join(map(str, sorted(x)))


def _unrank_combination(n: int, size: int, rank: int) -> list[int]:
    """rank-th (0-based) size-subset of range(n) in lexicographic order."""
    combo = []
    x = 0
    k = size
    while k > 0:
        c = math.comb(n - 1 - x, k - 1)
        if rank < c:
            combo.append(x)
            k -= 1
        else:
            rank -= c
        x += 1
    return combo


def make_instance(kind: str, **params) -> MonoidInstance:
    """Build one of the shipped instances by name."""
    if kind == "additive":
        if params:
            raise InvalidSpecError(f"additive instance takes no parameters, got {params}")
        return AdditiveReals()
    if kind == "max":
        if params:
            raise InvalidSpecError(f"max instance takes no parameters, got {params}")
        return MaxReals()
    if kind == "lattice-union":
        known = {"dim", "side"}
        if set(params) - known:
            raise InvalidSpecError(f"unknown lattice parameters {set(params) - known}")
        return LatticeUnion(dim=int(params.get("dim", 2)), side=int(params.get("side", 10)))
    raise InvalidSpecError(f"unknown instance kind {kind!r}")


# ----------------------------------------------------------------------
# Analytic integrals E[1 - chi_c(xi)] for registered (instance, dist) pairs
# ----------------------------------------------------------------------

def one_minus_exp_integral(dist: MarkDistribution, u: float) -> float:
    """E[1 - exp(-u * xi)] for real u >= 0 under a registered distribution.

    Shared by the additive character integrals and real-argument Laplace
    exponent evaluation (Bochner composition).
    """
    if u < 0:
        raise ValueError("rate must be nonnegative")
    if dist.name == "exponential":
        beta = dist.param("rate")
        return u / (u + beta)
    if dist.name == "constant":
        return 1.0 - math.exp(-u * dist.param("value"))
    raise NoClosedFormError(f"no analytic exp-integral for {dist.name!r}")


def char_closed_form_integral(instance: MonoidInstance, c: CharacterId,
                              dist: MarkDistribution) -> float:
    """Exact E[1 - chi_c(xi)] for registered (instance, distribution) pairs."""
    if c.is_trivial:
        return 0.0
    if isinstance(instance, AdditiveReals):
        return one_minus_exp_integral(dist, instance.rate_of(c))
    if isinstance(instance, MaxReals):
        thr = instance.threshold_of(c)
        if dist.name == "exponential":
            return math.exp(-dist.param("rate") * thr)
        if dist.name == "constant":
            return 1.0 if dist.param("value") > thr else 0.0
        if dist.name == "pareto":
            x_min = dist.param("x_min")
            if thr < x_min:
                return 1.0
            return (x_min / thr) ** dist.param("alpha")
        raise NoClosedFormError(f"no analytic max-integral for {dist.name!r}")
    if isinstance(instance, LatticeUnion):
        k = len(instance.avoid_set_of(c))
        n = instance.n_sites
        if dist.name == "uniform-singleton":
            return k / n
        if dist.name == "uniform-subset":
            m = int(dist.param("size"))
            return 1.0 - math.comb(n - k, m) / math.comb(n, m)
        raise NoClosedFormError(f"no analytic lattice-integral for {dist.name!r}")
    raise NoClosedFormError(f"no analytic integrals for instance {instance.name!r}")
