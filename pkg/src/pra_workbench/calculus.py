"""Semi-quantitative risk calculus: severity levels, likelihood bands, risk levels.

Likelihood is expressed on a nine-step odds scale (LL-0 through LL-8) where
each band spans one decade of probability, severity on a six-step scale
(HSL-1 through HSL-6), and the two combine through a fixed lookup matrix
into a risk level from 0 to 9.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional


class HarmSeverityLevel(enum.IntEnum):
    """Severity of a harm outcome, HSL-1 (marginal) to HSL-6 (globally catastrophic)."""

    HSL1 = 1
    HSL2 = 2
    HSL3 = 3
    HSL4 = 4
    HSL5 = 5
    HSL6 = 6

    @property
    def label(self) -> str:
        return HSL_LABELS[int(self)]


class LikelihoodLevel(enum.IntEnum):
    """Order-of-magnitude likelihood band, LL-0 (negligible) to LL-8 (near certain)."""

    LL0 = 0
    LL1 = 1
    LL2 = 2
    LL3 = 3
    LL4 = 4
    LL5 = 5
    LL6 = 6
    LL7 = 7
    LL8 = 8


class RiskLevel(enum.IntEnum):
    """Combined risk level 0 to 9. Produced only by the risk matrix lookup."""

    RL0 = 0
    RL1 = 1
    RL2 = 2
    RL3 = 3
    RL4 = 4
    RL5 = 5
    RL6 = 6
    RL7 = 7
    RL8 = 8
    RL9 = 9


class BandAnnotation(enum.Enum):
    """Qualifier attached when a probability falls outside the tiled bands."""

    BELOW_BAND = "below_band"


HSL_LABELS = {
    1: "Marginal but non-trivial",
    2: "Tragic",
    3: "Severe",
    4: "Devastating",
    5: "Extreme",
    6: "Globally catastrophic",
}

# Rows indexed by likelihood level 0..8, columns by severity 1..6.
RISK_MATRIX = (
    (0, 0, 0, 0, 0, 0),  # LL-0
    (0, 0, 1, 3, 4, 6),  # LL-1
    (0, 0, 1, 3, 5, 6),  # LL-2
    (0, 1, 2, 4, 5, 7),  # LL-3
    (1, 2, 3, 4, 6, 7),  # LL-4
    (2, 3, 4, 5, 6, 8),  # LL-5
    (3, 4, 5, 6, 7, 8),  # LL-6
    (4, 5, 6, 7, 8, 9),  # LL-7
    (4, 5, 7, 8, 9, 9),  # LL-8
)

# Band boundaries as exact float literals so membership checks are reproducible.
# LL-k for k >= 1 covers [10^(k-9), 10^(k-8)); LL-8 is closed at 1.
_BAND_LOWER = (0.0, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1)
_BAND_UPPER = (1e-12, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0)

# Probabilities in (1e-12, 1e-8) sit between LL-0 and LL-1 and carry an
# annotation instead of a band of their own.
BELOW_BAND_GAP = (1e-12, 1e-8)


@dataclass(frozen=True)
class OddsBand:
    """Probability decade [lower, upper) covered by a likelihood level."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.lower < self.upper <= 1.0):
            raise ValueError(f"invalid odds band ({self.lower}, {self.upper})")


@dataclass(frozen=True)
class ProbabilityInterval:
    """Closed probability interval with lo <= hi, both in [0, 1]."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("probability bounds must not be NaN")
        if not (0.0 <= self.lo <= self.hi <= 1.0):
            raise ValueError(f"invalid probability interval ({self.lo}, {self.hi})")


@dataclass(frozen=True)
class BandedLikelihood:
    """Likelihood level assigned to a probability, plus any gap annotation."""

    level: LikelihoodLevel
    annotation: Optional[BandAnnotation] = None


def risk_level(hsl: HarmSeverityLevel, ll: LikelihoodLevel) -> RiskLevel:
    """Look up the combined risk level for a severity and likelihood pair."""
    hsl = HarmSeverityLevel(hsl)
    ll = LikelihoodLevel(ll)
    return RiskLevel(RISK_MATRIX[ll][hsl - 1])


def ll_band(ll: LikelihoodLevel) -> OddsBand:
    """Return the probability decade covered by a likelihood level."""
    ll = LikelihoodLevel(ll)
    return OddsBand(_BAND_LOWER[ll], _BAND_UPPER[ll])


def ll_from_probability(p: float) -> BandedLikelihood:
    """Band a point probability.

    Bands are lower-inclusive and upper-exclusive, with LL-8 closed at 1.
    Probabilities at or below 1e-12 are negligible (LL-0); those in the gap
    between 1e-12 and 1e-8 conservatively take LL-1 with a below-band note.
    """
    if math.isnan(p) or p <= 0.0 or p > 1.0:
        raise ValueError(f"probability must be in (0, 1], got {p}")
    if p <= _BAND_UPPER[0]:
        return BandedLikelihood(LikelihoodLevel.LL0)
    if p < _BAND_LOWER[1]:
        return BandedLikelihood(LikelihoodLevel.LL1, BandAnnotation.BELOW_BAND)
    if p == 1.0:
        return BandedLikelihood(LikelihoodLevel.LL8)
    for level in range(8, 0, -1):
        if p >= _BAND_LOWER[level]:
            return BandedLikelihood(LikelihoodLevel(level))
    raise AssertionError("unreachable: bands tile (1e-8, 1]")


def compose_sequential(intervals: Iterable[ProbabilityInterval]) -> ProbabilityInterval:
    """Combine independent sequential step intervals by interval product.

    An empty sequence composes to the multiplicative identity (1, 1).
    """
    lo = 1.0
    hi = 1.0
    for interval in intervals:
        lo *= interval.lo
        hi *= interval.hi
    return ProbabilityInterval(lo, hi)


def ll_conservative(interval: ProbabilityInterval) -> BandedLikelihood:
    """Band an interval by its upper bound, never understating likelihood."""
    if interval.hi == 0.0:
        raise ValueError("interval upper bound is zero; no likelihood band applies")
    return ll_from_probability(interval.hi)


def _fibonacci(n: int) -> int:
    if n < 1:
        raise ValueError(f"Fibonacci index must be >= 1, got {n}")
    a, b = 1, 1
    for _ in range(n - 2):
        a, b = b, a + b
    return b if n > 1 else a


def hsl_threshold_raw_product(n: int) -> int:
    """Exact product of Fibonacci numbers 8 through n+7, for n in [1, 5]."""
    if not 1 <= n <= 5:
        raise ValueError(f"threshold index must be in [1, 5], got {n}")
    product = 1
    for k in range(8, n + 8):
        product *= _fibonacci(k)
    return product


def _round_mantissa_to_half(value: int) -> int:
    """Round a positive integer's leading mantissa to the nearest 0.5.

    Uses exact rational arithmetic; halves round up.
    """
    if value < 1:
        raise ValueError(f"value must be positive, got {value}")
    exponent = len(str(value)) - 1
    scale = 10**exponent
    doubled = Fraction(2 * value, scale)
    nearest = math.floor(doubled + Fraction(1, 2))
    return nearest * scale // 2


def hsl_upper_threshold(n: int) -> int:
    """Death-count threshold separating HSL-n from HSL-(n+1), n in [1, 5]."""
    return _round_mantissa_to_half(hsl_threshold_raw_product(n))


class HarmDimension(enum.Enum):
    """Harm magnitude dimensions with numeric anchor scales."""

    DEATHS = "deaths"
    DOLLAR_DAMAGE = "dollar_damage"


@dataclass(frozen=True)
class HslThresholdTable:
    """Ascending lower thresholds mapping a harm magnitude onto HSL-1..HSL-6."""

    dimension: HarmDimension
    unit: str
    thresholds: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.thresholds) != 6:
            raise ValueError("threshold table needs one entry per severity level")
        if any(b <= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ValueError("thresholds must be strictly ascending")


DEATHS_TABLE = HslThresholdTable(
    dimension=HarmDimension.DEATHS,
    unit="human deaths",
    thresholds=(1, 20, 700, 40_000, 3_500_000, 500_000_000),
)

DOLLAR_DAMAGE_TABLE = HslThresholdTable(
    dimension=HarmDimension.DOLLAR_DAMAGE,
    unit="US dollars",
    thresholds=(
        10_000_000,
        200_000_000,
        7_000_000_000,
        40_000_000_000,
        35_000_000_000_000,
        400_000_000_000_000,
    ),
)

_THRESHOLD_TABLES = {
    HarmDimension.DEATHS: DEATHS_TABLE,
    HarmDimension.DOLLAR_DAMAGE: DOLLAR_DAMAGE_TABLE,
}


@dataclass(frozen=True)
class ReferenceRow:
    """Display-only severity anchors for dimensions without a clean numeric scale."""

    dimension: str
    values: tuple[str, ...]
    note: Optional[str] = None


# Anchor text shown alongside the numeric tables. The job displacement row is
# kept out of the numeric lookup because its published anchors do not ascend.
HSL_REFERENCE_ROWS = (
    ReferenceRow(
        dimension="Job displacement",
        values=(
            "300+ unemployed for a year or more",
            "6k+ unemployed for a year or more",
            "200k+ unemployed for a year or more",
            "12M+ unemployed for a year or more",
            "15k+ unemployed for a year or more",
            "Most humans cannot make enough to live",
        ),
        note="non-monotone anchors; excluded from numeric lookup",
    ),
    ReferenceRow(
        dimension="Geopolitical effects",
        values=(
            "Diplomatic disagreement leading to small trade sanctions",
            "Increased tensions between neighboring countries | Border skirmishes",
            "Regional conflict escalating to limited warfare",
            "Major power conflict in strategic region",
            "Large-scale invasion or conventional war; Loss of war in a major power",
            "Nuclear war between major nuclear powers",
        ),
    ),
    ReferenceRow(
        dimension="Economic damage",
        values=(
            "Temporary industry disruption",
            "Major product recall with a major company crisis",
            "Significant global market correction",
            "Vast reduction in global trade and cooperation",
            "Bankrupting several sizable countries | Collapse of global financial system and trade networks",
            "Collapse of the global economy or near-total value capture by AI",
        ),
    ),
    ReferenceRow(
        dimension="Environmental damage",
        values=(
            "Localized chemical spill affecting a water supply | Destruction of 1000 acres of old-growth forest",
            "Major oil spill in sensitive marine environment",
            "Major industrial accident with widespread environmental impact",
            "Rapid ice sheet collapse accelerating sea level rise",
            "Runaway climate change tipping point reached",
            "Global ecosystem collapse",
        ),
    ),
    ReferenceRow(
        dimension="Social disruption",
        values=(
            "Large-scale protests with significant economic disruption",
            "Significant riots and violence in several cities",
            "Widespread rioting and violence | Martial law",
            "Single large state or severe destabilization of several",
            "Severe global breakdown of social order and governance structures in dozens of countries",
            "Widespread civilizational collapse",
        ),
    ),
    ReferenceRow(
        dimension="Other examples",
        values=(
            "A bad multi-car crash | A $20MM theft",
            "A plane crash | A $500MM scam",
            "The 9/11 Terrorist Attack | Hurricane Katrina",
            "The Iraq War | Brexit | A Smoot-Hawley Tariff Act equivalent",
            "Pandemic on a scale worse than Covid-19 | WW2",
            "A long-incubation Ebola Pandemic | WW3",
        ),
    ),
)


def hsl_for_metric(
    table: HslThresholdTable | HarmDimension,
    magnitude: float,
) -> Optional[HarmSeverityLevel]:
    """Map a harm magnitude onto the highest severity level it reaches.

    Returns None when the magnitude falls below the HSL-1 threshold.
    """
    if isinstance(table, HarmDimension):
        table = _THRESHOLD_TABLES[table]
    if not isinstance(table, HslThresholdTable):
        raise ValueError(f"unknown harm dimension: {table!r}")
    if math.isnan(magnitude) or magnitude < 0:
        raise ValueError(f"magnitude must be non-negative, got {magnitude}")
    level: Optional[HarmSeverityLevel] = None
    for i, threshold in enumerate(table.thresholds):
        if magnitude >= threshold:
            level = HarmSeverityLevel(i + 1)
    return level
