"""Abelian monoids with a countable multiplicative character family.

The library works with commutative monoids (M, combine, neutral) carrying an
enumerated family of characters chi_n: M -> [0, 1] satisfying chi(neutral) = 1
and chi(x + y) = chi(x) * chi(y), closed under pointwise products.  Joint
character convergence detects both convergence inside M and escape to the
absorbing point at infinity, where every character vanishes.  This module
defines the abstraction plus the structural operations built on it: the
character metric, the deficiency function phi, the small-element ratio
coefficients, folds of finite and infinite combine-sums, and the numerical
convergence/divergence diagnostic for infinite sums.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Iterable, NamedTuple, Sequence


class NoActionError(RuntimeError):
    """The instance carries no scaling action."""


class DegenerateRatioError(ValueError):
    """phi vanished at a point of the shrinking sequence."""


class NonConvergentError(RuntimeError):
    """Extrapolated estimates did not stabilize within tolerance."""


class PointAtInfinity:
    """Absorbing point at infinity; every character evaluates to 0 here.

    A tagged singleton, deliberately not any in-band value such as float inf:
    absorption laws stay checkable uniformly across instances.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"

    def __reduce__(self):
        return (PointAtInfinity, ())


INFINITY = PointAtInfinity()

# An extended element is either a finite monoid element or INFINITY.
ExtendedElement = Any


def is_infinite(x: ExtendedElement) -> bool:
    return x is INFINITY


@dataclass(frozen=True)
class CharacterId:
    """A character in the multiplicative closure of the enumerated family.

    `indices` is a sorted multiset of 1-based enumeration indices; the
    character denoted is the pointwise product of the base characters, with
    multiplicity giving powers.  The empty multiset is the constant character
    1, used only as an internal identity for products.
    """

    indices: tuple[int, ...]

    def __post_init__(self):
        if any(i < 1 for i in self.indices):
            raise ValueError("character indices are 1-based")
        object.__setattr__(self, "indices", tuple(sorted(self.indices)))

    @classmethod
    def base(cls, n: int) -> "CharacterId":
        return cls((n,))

    @property
    def is_trivial(self) -> bool:
        return not self.indices

    def product(self, other: "CharacterId") -> "CharacterId":
        return CharacterId(self.indices + other.indices)

    def power(self, k: int) -> "CharacterId":
        if k < 0:
            raise ValueError("character powers are nonnegative")
        return CharacterId(self.indices * k)

    def __repr__(self) -> str:
        return f"chi{list(self.indices)}"


class MonoidInstance(ABC):
    """Contract every concrete monoid fulfils.

    Subclasses provide the algebra (combine, neutral), the enumerated base
    characters, optional scaling action, and a sampler used by property
    tests.  All instances are immutable after construction and safe for
    concurrent use.
    """

    name: str = "abstract"
    idempotent: bool = False
    drift_supported: bool = False
    #: number of leading enumerated characters guaranteed to separate the
    #: elements produced by sample_element (documented per instance)
    separation_prefix: int = 64
    #: total number of base characters, or None when countably infinite
    enumeration_size: int | None = None

    # -- algebra ---------------------------------------------------------

    @property
    @abstractmethod
    def neutral(self):
        ...

    @abstractmethod
    def combine_finite(self, x, y) -> ExtendedElement:
        """Combine two finite elements; may return INFINITY on absorption."""

    def combine(self, x: ExtendedElement, y: ExtendedElement) -> ExtendedElement:
        if x is INFINITY or y is INFINITY:
            return INFINITY
        return self.combine_finite(x, y)

    def fold(self, xs: Iterable) -> ExtendedElement:
        """Left fold of combine over xs; neutral on the empty sequence."""
        acc: ExtendedElement = self.neutral
        for x in xs:
            acc = self.combine(acc, x)
            if acc is INFINITY:
                return INFINITY
        return acc

    def fold_array(self, values) -> ExtendedElement:
        """Fold a homogeneous batch of elements (instances may vectorize)."""
        return self.fold(values)

    def has_action(self) -> bool:
        return False

    def action(self, r: float, x):
        raise NoActionError(f"instance {self.name!r} has no scaling action")

    # -- characters ------------------------------------------------------

    @abstractmethod
    def base_char_eval(self, n: int, x) -> float:
        """Evaluate base character n (1-based) at a finite element."""

    def char_eval(self, c: CharacterId, x: ExtendedElement) -> float:
        if c.is_trivial:
            return 1.0
        if x is INFINITY:
            return 0.0
        return self._eval_indices(c.indices, x)

    def _eval_indices(self, indices: tuple[int, ...], x) -> float:
        out = 1.0
        for n in indices:
            out *= self.base_char_eval(n, x)
            if out == 0.0:
                return 0.0
        return out

    def log_char_eval(self, c: CharacterId, x: ExtendedElement) -> float:
        """log chi_c(x), -inf where the character vanishes."""
        v = self.char_eval(c, x)
        return math.log(v) if v > 0.0 else -math.inf

    def base_char_label(self, n: int) -> str:
        return f"chi_{n}"

    # -- support ----------------------------------------------------------

    @abstractmethod
    def sample_element(self, rng):
        """Draw an element from the instance's documented test distribution."""

    def mark_repr(self, x: ExtendedElement) -> str:
        if x is INFINITY:
            return "INFINITY"
        return repr(x)


class BoundedValue(NamedTuple):
    """A partial sum with a guaranteed nonnegative tail bound.

    The true value lies in [value, value + tail].
    """

    value: float
    tail: float


def _series_terms(instance: MonoidInstance, n_terms: int) -> tuple[int, float]:
    """Effective term count and tail bound for a 2^-n weighted series."""
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    size = instance.enumeration_size
    if size is not None and n_terms >= size:
        return size, 0.0
    return n_terms, 2.0 ** (-n_terms)


def rho_distance(instance: MonoidInstance, x: ExtendedElement, y: ExtendedElement,
                 n_terms: int) -> BoundedValue:
    """Partial sum of the character metric sum_n |chi_n(x)-chi_n(y)| / 2^n."""
    m, tail = _series_terms(instance, n_terms)
    total = 0.0
    for n in range(1, m + 1):
        c = CharacterId.base(n)
        total += abs(instance.char_eval(c, x) - instance.char_eval(c, y)) / 2.0 ** n
    return BoundedValue(total, tail)


def phi(instance: MonoidInstance, x: ExtendedElement, n_terms: int) -> BoundedValue:
    """Partial sum of the deficiency function sum_n (1 - chi_n(x)) / 2^n."""
    m, tail = _series_terms(instance, n_terms)
    total = 0.0
    for n in range(1, m + 1):
        total += (1.0 - instance.char_eval(CharacterId.base(n), x)) / 2.0 ** n
    return BoundedValue(total, tail)


@dataclass(frozen=True)
class ExtrapolationConfig:
    """Controls the sequence acceleration in alpha_coefficient."""

    tolerance: float = 1e-6
    max_rounds: int = 4


class AlphaEstimate(NamedTuple):
    value: float
    residual: float


def _aitken(seq: Sequence[float]) -> list[float]:
    out = []
    for i in range(len(seq) - 2):
        d1 = seq[i + 1] - seq[i]
        d2 = seq[i + 2] - 2.0 * seq[i + 1] + seq[i]
        if d2 == 0.0:
            out.append(seq[i + 2])
        else:
            out.append(seq[i] - d1 * d1 / d2)
    return out


def alpha_coefficient(instance: MonoidInstance, c: CharacterId,
                      shrinking_sequence: Sequence, n_terms: int = 60,
                      cfg: ExtrapolationConfig | None = None) -> AlphaEstimate:
    """Small-element limit of (1 - chi_c(x)) / phi(x) along a sequence -> neutral.

    Idempotent instances return 0 exactly: characters equal 1 on a
    neighbourhood of the neutral element, so the ratio vanishes along any
    admissible sequence regardless of the enumeration ordering.  Other
    instances are handled numerically by Aitken acceleration over the
    supplied sequence, which should shrink geometrically.
    """
    if instance.idempotent:
        return AlphaEstimate(0.0, 0.0)
    cfg = cfg or ExtrapolationConfig()
    ratios = []
    for x in shrinking_sequence:
        denom = phi(instance, x, n_terms).value
        if denom == 0.0:
            raise DegenerateRatioError(f"phi vanished at {x!r}")
        ratios.append((1.0 - instance.char_eval(c, x)) / denom)
    if len(ratios) < 3:
        raise NonConvergentError("need at least 3 sequence points to extrapolate")
    table = ratios
    for _ in range(cfg.max_rounds):
        nxt = _aitken(table)
        if len(nxt) < 3:
            table = nxt or table
            break
        table = nxt
    if len(table) >= 2:
        residual = abs(table[-1] - table[-2])
    else:
        residual = abs(ratios[-1] - ratios[-2])
    estimate = table[-1]
    if residual > cfg.tolerance * max(1.0, abs(estimate)):
        raise NonConvergentError(
            f"extrapolation residual {residual:.3e} above tolerance {cfg.tolerance:.1e}")
    return AlphaEstimate(estimate, residual)


def oplus_fold(instance: MonoidInstance, xs: Iterable) -> ExtendedElement:
    """Fold combine over a finite sequence (order-independent by commutativity)."""
    return instance.fold(xs)


@dataclass(frozen=True)
class SumDiagnosisConfig:
    """Numerical thresholds for the infinite-sum diagnostic.

    tau is a large-negative log-product floor standing in for "product equals
    zero" (default sits near the double-precision underflow of exp); tail_eps
    and stable_window decide when a log-product has stabilized.  These are
    heuristics: the diagnostic reports numerical evidence, not a proof.
    """

    max_terms: int = 10 ** 6
    tau: float = -700.0
    tail_eps: float = 1e-12
    stable_window: int = 8
    product_tol: float = 1e-9


@dataclass(frozen=True)
class ProbeProduct:
    char: CharacterId
    log_product: float
    product: float
    chi_at_limit: float | None
    residual: float | None
    stable: bool
    below_floor: bool


@dataclass(frozen=True)
class SumDiagnosis:
    """Outcome of the convergence/divergence diagnostic."""

    verdict: str  # "converges" | "diverges" | "undecided"
    limit: ExtendedElement | None
    terms_used: int
    table: tuple[ProbeProduct, ...]
    product_tol: float = 1e-9

    @property
    def max_residual(self) -> float:
        vals = [row.residual for row in self.table if row.residual is not None]
        return max(vals) if vals else math.nan

    @property
    def identity_ok(self) -> bool:
        """Does chi(limit) match the accumulated product on every probe?"""
        vals = [row.residual for row in self.table if row.residual is not None]
        return all(v <= self.product_tol for v in vals)


def sum_diagnosis(instance: MonoidInstance, xs: Iterable,
                  probe_chars: Sequence[CharacterId],
                  cfg: SumDiagnosisConfig | None = None) -> SumDiagnosis:
    """Numerically diagnose the combine-sum of a stream of elements.

    Accumulates log chi(x_n) per probe character over a prefix of the stream.
    If every probe's log-product falls below cfg.tau the partial sums are
    escaping to infinity (diverges); if some probe's log-product stabilizes
    above the floor, the prefix fold estimates the limit (converges) and the
    product identity chi(fold) = prod chi(x_i) is checked as a residual.
    Anything else is undecided.  Evidence, not proof.
    """
    if not probe_chars:
        raise ValueError("probe_chars must be nonempty")
    cfg = cfg or SumDiagnosisConfig()
    logp = {c: 0.0 for c in probe_chars}
    calm = {c: 0 for c in probe_chars}  # consecutive increments below tail_eps
    acc: ExtendedElement = instance.neutral
    used = 0
    for x in xs:
        if used >= cfg.max_terms:
            break
        used += 1
        acc = instance.combine(acc, x)
        all_dead = True
        for c in probe_chars:
            if logp[c] <= cfg.tau:
                continue
            inc = instance.log_char_eval(c, x)
            logp[c] += inc
            calm[c] = calm[c] + 1 if abs(inc) < cfg.tail_eps else 0
            if logp[c] > cfg.tau:
                all_dead = False
        if all_dead:
            break

    below = {c: logp[c] <= cfg.tau for c in probe_chars}
    stable = {c: (not below[c]) and calm[c] >= cfg.stable_window for c in probe_chars}
    if all(below.values()):
        verdict, limit = "diverges", None
    elif any(stable.values()):
        verdict, limit = "converges", acc
    else:
        verdict, limit = "undecided", None

    rows = []
    for c in probe_chars:
        product = math.exp(logp[c]) if logp[c] > -math.inf else 0.0
        chi_lim = residual = None
        if verdict == "converges":
            chi_lim = instance.char_eval(c, limit)
            residual = abs(chi_lim - product)
        rows.append(ProbeProduct(c, logp[c], product, chi_lim, residual,
                                 stable[c], below[c]))
    return SumDiagnosis(verdict, limit, used, tuple(rows), cfg.product_tol)


def partition_additivity_check(instance: MonoidInstance, xs: Sequence,
                               partition: Iterable[int],
                               n_chars: int | None = None,
                               tol: float = 1e-9) -> bool:
    """Check fold(xs|P) + fold(xs|Q) = fold(xs) under character separation.

    partition gives the indices of one block P; Q is the complement. Equality
    is tested through the leading enumerated characters (defaults to the
    instance's separation prefix).
    """
    in_p = set(partition)
    lhs = instance.combine(
        instance.fold(x for i, x in enumerate(xs) if i in in_p),
        instance.fold(x for i, x in enumerate(xs) if i not in in_p))
    rhs = instance.fold(xs)
    if (lhs is INFINITY) != (rhs is INFINITY):
        return False
    m = n_chars if n_chars is not None else instance.separation_prefix
    if instance.enumeration_size is not None:
        m = min(m, instance.enumeration_size)
    for n in range(1, m + 1):
        c = CharacterId.base(n)
        if abs(instance.char_eval(c, lhs) - instance.char_eval(c, rhs)) > tol:
            return False
    return True
