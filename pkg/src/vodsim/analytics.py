"""Closed-form hit-ratio model for the four baseline strategies.

All formulas are evaluated as exact rationals and only rendered as decimals
at the edges, so unit tests can assert exact equality. Results outside [0, 1]
are clamped and flagged.

Symbols used by the model, with the names they carry here:
  cache_slots        per-peer prefetch capacity (segments a peer can hold),
  session_slots      distinct segments the whole session can hold prefetched,
  reachable          size of the seek-reachable segment set,
  mined_set_size     size of the segment set a mining peer has prefetched,
  hit_probability    probability the sought segment lies in the mined set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational


def _frac(x) -> Fraction:
    if isinstance(x, (Rational, int)):
        return Fraction(x)
    return Fraction(x).limit_denominator(10**12)


@dataclass(frozen=True)
class AnalyticParams:
    """Parameter set for the closed-form hit-ratio formulas."""

    cache_slots: int
    session_slots: int
    reachable: int = 0
    mined_set_size: int = 0
    hit_probability: Fraction = Fraction(1)

    def __post_init__(self):
        if self.cache_slots <= 0 or self.session_slots <= 0:
            raise ValueError("cache_slots and session_slots must be positive")
        if self.cache_slots > self.session_slots:
            raise ValueError("cache_slots must not exceed session_slots")
        p = _frac(self.hit_probability)
        if not 0 <= p <= 1:
            raise ValueError("hit_probability must lie in [0, 1]")
        object.__setattr__(self, "hit_probability", p)
        if self.reachable < 0 or self.mined_set_size < 0:
            raise ValueError("set sizes must be non-negative")
        if self.mined_set_size and self.reachable and self.mined_set_size > self.reachable:
            raise ValueError("mined_set_size must not exceed reachable")


@dataclass(frozen=True)
class HitRatioPair:
    """(local hit ratio, local+neighbour hit ratio) for one strategy."""

    hr_r: Fraction
    hr_r_plus_g: Fraction
    clamped: bool = False
    note: str = ""


def _clamp(value: Fraction) -> tuple[Fraction, bool]:
    if value < 0:
        return Fraction(0), True
    if value > 1:
        return Fraction(1), True
    return value, False


def _pair(hr_r: Fraction, combined: Fraction, note: str = "") -> HitRatioPair:
    r, c1 = _clamp(hr_r)
    g, c2 = _clamp(combined)
    return HitRatioPair(r, g, clamped=c1 or c2, note=note)


def hr_mining(hit_probability, cache_slots: int, session_slots: int, mined_set_size: int) -> HitRatioPair:
    """Hit ratios under history-mining prefetching: p*s/Vi and p*S/Vi."""
    if mined_set_size <= 0:
        raise ValueError("mined_set_size must be positive")
    p = _frac(hit_probability)
    return _pair(
        p * Fraction(cache_slots, mined_set_size),
        p * Fraction(session_slots, mined_set_size),
    )


def hr_none() -> HitRatioPair:
    """No prefetching: the local ratio is exactly zero.

    The combined ratio is only ever described as "minimum"; it is reported
    as zero here, with a note saying so.
    """
    return HitRatioPair(
        Fraction(0), Fraction(0), clamped=False,
        note="combined ratio mapped to 0 (its floor)",
    )


def hr_random(cache_slots: int, session_slots: int, reachable: int) -> HitRatioPair:
    """Hit ratios under uniform random prefetching: s/V and S/V."""
    if reachable <= 0:
        raise ValueError("reachable must be positive")
    return _pair(
        Fraction(cache_slots, reachable),
        Fraction(session_slots, reachable),
    )


def hr_popularity(hit_probability, cache_slots: int, session_slots: int, reachable: int) -> HitRatioPair:
    """Hit ratios under popularity-aware prefetching: p*s/V and p*S/V."""
    if reachable <= 0:
        raise ValueError("reachable must be positive")
    p = _frac(hit_probability)
    return _pair(
        p * Fraction(cache_slots, reachable),
        p * Fraction(session_slots, reachable),
    )


def evaluate(params: AnalyticParams) -> dict[str, HitRatioPair]:
    """All four formulas for one parameter set, keyed by strategy name."""
    out = {"none": hr_none()}
    if params.reachable > 0:
        out["random"] = hr_random(params.cache_slots, params.session_slots, params.reachable)
        out["popularity"] = hr_popularity(
            params.hit_probability, params.cache_slots, params.session_slots, params.reachable
        )
    if params.mined_set_size > 0:
        out["mining"] = hr_mining(
            params.hit_probability, params.cache_slots, params.session_slots, params.mined_set_size
        )
    return out


@dataclass
class ValidationVerdict:
    strategy: str
    analytic_hr_r: float
    simulated_hr_r: float
    tolerance: float
    rows: list[str] = field(default_factory=list)

    @property
    def delta(self) -> float:
        return abs(self.analytic_hr_r - self.simulated_hr_r)

    @property
    def passed(self) -> bool:
        return self.delta <= self.tolerance


def validate_against_sim(params: AnalyticParams, report, tolerance: float) -> ValidationVerdict:
    """Compare a simulated report's local hit ratio to the matching formula.

    Refuses reports that cannot be checked: unknown strategy, or a run that
    produced no seeks at all.
    """
    formulas = evaluate(params)
    strategy = getattr(report, "strategy", None)
    if strategy not in formulas:
        raise ValueError(
            "report strategy %r has no closed form for these parameters" % (strategy,)
        )
    if strategy != "none" and not getattr(report, "seeks", 0):
        raise ValueError("report contains no seeks; nothing to validate")
    simulated = report.hr_r if report.hr_r is not None else 0.0
    analytic = float(formulas[strategy].hr_r)
    verdict = ValidationVerdict(strategy, analytic, simulated, tolerance)
    verdict.rows.append(
        "%s: analytic=%.6f simulated=%.6f delta=%.6f tol=%.6f -> %s"
        % (strategy, analytic, simulated, verdict.delta, tolerance,
           "pass" if verdict.passed else "FAIL")
    )
    return verdict
