"""Subordinator paths built from marked Poisson realizations.

A path is the running combine-fold of the marks with jump time <= t, plus an
optional linear drift on the additive instance.  Marginals of such a path
satisfy E[chi(X_t)] = exp(-t Psi(chi)) with Psi(chi) = drift-pairing(chi) +
sum_layers mass * E[1 - chi(mark)]; the closed-form finite-dimensional
distributions, moment formulas for character functionals, and composition
under an independent additive time change all follow from that identity and
are implemented here.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import CharacterId, ExtendedElement, MonoidInstance, is_infinite
from .instances import AdditiveReals, NoClosedFormError, one_minus_exp_integral
from .ppp import LevyMeasure, PointRealization, sample_marks, sample_ppp
from .rng import STREAM_INTEGRAL, substream


class DriftUnsupportedError(ValueError):
    """Drift requested on an instance without a classical drift term."""


class OutOfHorizonError(ValueError):
    """Query time outside [0, horizon]."""


class HorizonExceededError(ValueError):
    """Inner clock exceeds the outer path's horizon."""


class DegenerateRateError(ValueError):
    """A moment formula factor q + Psi(chi^k) vanished."""


@dataclass(frozen=True, eq=False)
class PathRealization:
    """Piecewise-constant path: sorted jump times with prefix-fold states.

    value_at(t) is drift*t combined with the fold of all marks up to t; the
    prefix folds are stored so queries cost O(log N).  states[k] may be
    INFINITY once the fold has absorbed (lattice instance exhausting its
    box); drift is only ever nonzero on the additive instance.
    """

    instance: MonoidInstance
    times: tuple[float, ...]
    marks: tuple | None
    states: tuple
    horizon: float
    drift: float = 0.0

    def __len__(self) -> int:
        return len(self.times)

    def value_at(self, t: float) -> ExtendedElement:
        if t < 0.0 or t > self.horizon:
            raise OutOfHorizonError(f"t={t} outside [0, {self.horizon}]")
        k = bisect_right(self.times, t)
        state = self.states[k - 1] if k else self.instance.neutral
        if self.drift:
            state = self.instance.combine(self.drift * t, state)
        return state


def levy_ito_path(instance: MonoidInstance, measure: LevyMeasure, drift: float,
                  horizon: float, seed: int, replicate: int = 0,
                  branch: int = 0) -> PathRealization:
    """Sample a marked PPP realization and fold it into a path."""
    if drift and not instance.drift_supported:
        raise DriftUnsupportedError(f"instance {instance.name!r} has no drift term")
    if drift < 0:
        raise DriftUnsupportedError("drift must be nonnegative")
    points = sample_ppp(instance, measure, horizon, seed, replicate, branch)
    return path_from_points(instance, points, drift)


def path_from_points(instance: MonoidInstance, points: PointRealization,
                     drift: float = 0.0) -> PathRealization:
    states = []
    acc: ExtendedElement = instance.neutral
    for mark in points.marks:
        acc = instance.combine(acc, mark)
        states.append(acc)
    return PathRealization(instance, points.times, points.marks, tuple(states),
                           points.horizon, drift)


def path_at(path: PathRealization, t: float) -> ExtendedElement:
    """Free-function alias for PathRealization.value_at."""
    return path.value_at(t)


@dataclass(frozen=True)
class LaplaceExponent:
    """Psi(chi) = drift-pairing(chi) + sum_layers mass * E[1 - chi(mark)].

    The drift pairing is drift * (summed rational rate of chi) on the
    additive instance and 0 on idempotent instances.  Evaluation is analytic
    (halfwidth 0) when every layer has a registered closed form, or Monte
    Carlo with a summed Hoeffding halfwidth otherwise.
    """

    instance: MonoidInstance
    measure: LevyMeasure
    drift: float = 0.0
    mode: str = "analytic"
    mc_samples: int = 10_000
    mc_seed: int = 0
    delta: float = 0.01

    def __post_init__(self):
        if self.drift and not self.instance.drift_supported:
            raise DriftUnsupportedError(f"instance {self.instance.name!r} has no drift term")

    def drift_pairing(self, c: CharacterId) -> float:
        if not self.drift:
            return 0.0
        return self.drift * self.instance.rate_of(c)  # additive only

    def evaluate(self, c: CharacterId) -> tuple[float, float]:
        from .ppp import integral_one_minus_chi
        integral, halfwidth = integral_one_minus_chi(
            self.instance, self.measure, c, mode=self.mode, n=self.mc_samples,
            seed=self.mc_seed, delta=self.delta)
        return self.drift_pairing(c) + integral, halfwidth

    def value(self, c: CharacterId) -> float:
        return self.evaluate(c)[0]

    def value_at_rate(self, u: float) -> float:
        """Classical exponent at a real argument (additive instance only).

        Needed to compose exponents under time change, where the outer
        exponent's value is a real number rather than a character.
        """
        if not isinstance(self.instance, AdditiveReals):
            raise NoClosedFormError("real-argument evaluation needs the additive instance")
        total = self.drift * u
        if self.mode == "analytic":
            for layer in self.measure.layers:
                total += layer.mass * one_minus_exp_integral(layer.dist, u)
            return total
        for j, layer in enumerate(self.measure.layers):
            # replicate slot 1: slot 0 belongs to character-level integration
            rng = substream(self.mc_seed, STREAM_INTEGRAL, 1, j)
            marks = np.asarray(sample_marks(self.instance, layer.dist, rng,
                                            self.mc_samples), dtype=float)
            total += layer.mass * float(np.mean(1.0 - np.exp(-u * marks)))
        return total


def laplace_exponent_eval(exponent: LaplaceExponent, c: CharacterId) -> tuple[float, float]:
    """(Psi(c), halfwidth); halfwidth is 0 in analytic mode."""
    return exponent.evaluate(c)


def fdd_closed_form(exponent: LaplaceExponent, c: CharacterId,
                    times: Sequence[float]) -> float:
    """E[chi(X_t1) ... chi(X_tn)] for strictly increasing times.

    Telescopes to exp(-t1 Psi(c^n)) * exp(-(t2-t1) Psi(c^(n-1))) * ... *
    exp(-(tn - t(n-1)) Psi(c)); on idempotent instances every power of c is
    c, so the product collapses to exp(-tn Psi(c)).
    """
    if not times:
        raise ValueError("need at least one time")
    if any(t2 <= t1 for t1, t2 in zip(times, times[1:])) or times[0] < 0:
        raise ValueError("times must be nonnegative and strictly increasing")
    n = len(times)
    total = 0.0
    prev = 0.0
    for k, t in enumerate(times):
        total += (t - prev) * exponent.value(c.power(n - k))
        prev = t
    return math.exp(-total)


def moments_closed_form(exponent: LaplaceExponent, c: CharacterId, q: float,
                        n: int) -> float:
    """n-th moment of the character functional run to an exponential(q) time.

    Equals n! / prod_{k=1..n} (q + Psi(c^k)).
    """
    if n < 1:
        raise ValueError("moment order must be >= 1")
    if q < 0:
        raise ValueError("killing rate must be nonnegative")
    denom = 1.0
    for k in range(1, n + 1):
        factor = q + exponent.value(c.power(k))
        if factor == 0.0:
            raise DegenerateRateError(f"q + Psi(c^{k}) vanished")
        denom *= factor
    return math.factorial(n) / denom


def character_functional(path: PathRealization, c: CharacterId, t: float) -> float:
    """Exact integral of s -> chi_c(path(s)) over [0, t].

    Piecewise constant between jumps; on the additive instance with drift the
    integrand is exp(-rate * (drift*s + state)) and each piece integrates in
    closed form.
    """
    if t < 0.0 or t > path.horizon:
        raise OutOfHorizonError(f"t={t} outside [0, {path.horizon}]")
    instance = path.instance
    rate = instance.rate_of(c) if (path.drift and isinstance(instance, AdditiveReals)) else None
    total = 0.0
    seg_start = 0.0
    k = 0
    n_jumps = len(path.times)
    while seg_start < t:
        seg_end = path.times[k] if k < n_jumps and path.times[k] < t else t
        state = path.states[k - 1] if k else instance.neutral
        if seg_end > seg_start:
            if rate:
                if not is_infinite(state):
                    lam_d = rate * path.drift
                    total += math.exp(-rate * state) * (
                        math.exp(-lam_d * seg_start) - math.exp(-lam_d * seg_end)) / lam_d
            else:
                total += instance.char_eval(c, state) * (seg_end - seg_start)
        seg_start = seg_end
        k += 1
    return total


def bochner_subordinate(outer: PathRealization, inner: PathRealization) -> PathRealization:
    """Time-change the outer path by an additive inner clock: Y(t) = outer(inner(t)).

    Jump candidates are the inner clock's jump times, plus the times where an
    inner drift segment sweeps the clock value across an outer jump time.
    The result is a path on the outer instance with drift equal to the
    product of the two drifts (nonzero only when both paths are additive
    with drift).
    """
    if not isinstance(inner.instance, AdditiveReals):
        raise ValueError("inner clock must live on the additive instance")
    end_value = inner.value_at(inner.horizon)
    if is_infinite(end_value) or end_value > outer.horizon:
        raise HorizonExceededError(
            f"inner clock reaches {end_value} beyond outer horizon {outer.horizon}")

    instance = outer.instance
    drift_y = outer.drift * inner.drift
    # candidate jump times of Y, mapped to the inner clock value there when
    # it is known exactly (drift crossings of outer jump times round-trip
    # through division, so the crossed value is carried rather than recomputed)
    candidates: dict[float, float | None] = {t: None for t in inner.times}
    if inner.drift > 0 and outer.times:
        seg_bounds = [0.0, *inner.times, inner.horizon]
        for k in range(len(seg_bounds) - 1):
            a, b = seg_bounds[k], seg_bounds[k + 1]
            if b <= a:
                continue
            state = inner.states[k - 1] if k else 0.0
            lo = inner.drift * a + state
            hi = inner.drift * b + state
            i = bisect_right(outer.times, lo)
            while i < len(outer.times) and outer.times[i] < hi:
                s = (outer.times[i] - state) / inner.drift
                if a < s <= inner.horizon:
                    candidates.setdefault(s, outer.times[i])
                i += 1

    times: list[float] = []
    states: list = []
    prev_state: ExtendedElement = instance.neutral
    for t in sorted(candidates):
        w = candidates[t]
        if w is None:
            w = inner.value_at(t)
        y = outer.value_at(w)
        state = y
        if drift_y and not is_infinite(y):
            state = y - drift_y * t
        if state != prev_state:
            times.append(t)
            states.append(state)
            prev_state = state
    return PathRealization(instance, tuple(times), None, tuple(states),
                           inner.horizon, drift_y)


def sample_ensemble(instance: MonoidInstance, measure: LevyMeasure, drift: float,
                    horizon: float, seed: int, n: int) -> list[PathRealization]:
    """n independent paths; replicate r uses the (seed, r, layer) sub-streams."""
    return [levy_ito_path(instance, measure, drift, horizon, seed, r) for r in range(n)]


def dump_paths_csv(paths: Iterable[PathRealization], fileobj) -> None:
    """Write jump records as CSV: replicate, jump_time, mark_repr.

    Subordinated paths carry no marks; their post-jump states are dumped
    instead.
    """
    writer = csv.writer(fileobj)
    writer.writerow(["replicate", "jump_time", "mark_repr"])
    for r, path in enumerate(paths):
        items = path.marks if path.marks is not None else path.states
        for t, m in zip(path.times, items):
            writer.writerow([r, repr(t), path.instance.mark_repr(m)])
