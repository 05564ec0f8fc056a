"""Risk pathways from source hazards to terminal harms.

A pathway chains probabilistic steps from a capability, knowledge, or
affordance hazard to a terminal impact. Propagation operators describe how
harms spread or amplify between steps, and interaction cells pair aspects
whose combination deserves second-order attention.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .calculus import (
    BandedLikelihood,
    LikelihoodLevel,
    ProbabilityInterval,
    compose_sequential,
    ll_band,
    ll_conservative,
)
from .taxonomy import Taxonomy, TaxonomyLevel


class PathwayError(ValueError):
    """Raised for pathway evaluation failures (not validation findings)."""


class MissingStepProbability(PathwayError):
    """A step lacks the probability needed to evaluate the pathway."""

    def __init__(self, step_index: int):
        self.step_index = step_index
        super().__init__(f"step {step_index} has no probability estimate")


class StepKind(enum.Enum):
    SOURCE_HAZARD = "source_hazard"
    INTERMEDIATE = "intermediate"
    TERMINAL_HAZARD = "terminal_hazard"


class PathwayDirection(enum.Enum):
    """Whether the chain was built source-first or backwards from the harm."""

    FORWARD = "forward"
    BACKWARD = "backward"


class PropagationCategory(enum.Enum):
    AGGREGATES = "Aggregates"
    PERIODIC = "Periodic"
    DEVIATED_OUTPUTS = "Deviated Outputs"
    ALIGNMENT_MODIFICATION = "Alignment Modification"
    DISTRIBUTIVE = "Distributive"
    INFORMATION_ASYMMETRY = "Information Asymmetry"
    SOCIOTECHNICAL_DIFFUSION = "Sociotechnical Diffusion"


@dataclass(frozen=True)
class PropagationOperator:
    name: str
    category: PropagationCategory
    description: str


_C = PropagationCategory

OPERATOR_CATALOG: tuple[PropagationOperator, ...] = (
    PropagationOperator(
        "Accumulation", _C.AGGREGATES,
        "Small harms accumulating over time to form a major harm."),
    PropagationOperator(
        "Correlation", _C.AGGREGATES,
        "Where there are adverse events that are not evident in unit tests or accuracy "
        "tests, but can be expected to emerge from correlated decisions or correlated "
        "actions with a large number of users, instances, or executions of a system."),
    PropagationOperator(
        "Accrual", _C.PERIODIC,
        "Where events that are low-probability in the short-term, but high-impact, can "
        "accrue and build to significant probability in the medium term."),
    PropagationOperator(
        "Compounding", _C.PERIODIC,
        "Where harms would be expected to manifest only when either other problems occur "
        "or unexpected but conceivable edge case interactions manifest."),
    PropagationOperator(
        "Latent Gain of Function", _C.PERIODIC,
        "Where harms that will not manifest significantly or at all in system training or "
        "release may still be expected to appear with distribution in very few cases, or "
        "qualitative shifts in capabilities arising from quantitative scaling."),
    PropagationOperator(
        "Adversarial Exploitation", _C.DEVIATED_OUTPUTS,
        "Where harms manifest due to the absence of robustness in the system when in the "
        "presence of optimization pressures for inputs to induce those harms."),
    PropagationOperator(
        "Targeted Misuse", _C.DEVIATED_OUTPUTS,
        "Where harms occur due to intentional misuse of the system for specific malicious "
        "purposes, exploiting known functionalities or vulnerabilities."),
    PropagationOperator(
        "Untargeted Misuse", _C.DEVIATED_OUTPUTS,
        "Where harms result from careless use or exploration of the system's abilities in "
        "ways not prescribed by its developers."),
    PropagationOperator(
        "Malfunction", _C.DEVIATED_OUTPUTS,
        "Where harms arise from system failures or errors in normal operation, causing "
        "unexpected and potentially harmful outputs or behaviors."),
    PropagationOperator(
        "Enables Unplanned Automation", _C.DEVIATED_OUTPUTS,
        "Where the system facilitates or accelerates automation in areas not initially "
        "intended, potentially leading to unforeseen societal or economic disruptions."),
    PropagationOperator(
        "Misalignment", _C.ALIGNMENT_MODIFICATION,
        "Where harms occur due to a gap or mismatch between the system's goals or values "
        "and those of its users or society at large."),
    PropagationOperator(
        "Malignment", _C.ALIGNMENT_MODIFICATION,
        "Where harms occur from a system being intentionally aligned with goals that are "
        "harmful or contrary to societal values."),
    PropagationOperator(
        "Disalignment", _C.ALIGNMENT_MODIFICATION,
        "Where harms result from the previously-aligned system having had its guardrails "
        "purposefully removed by some third-party."),
    PropagationOperator(
        "Realignment", _C.ALIGNMENT_MODIFICATION,
        "Where attempts to correct what is perceived as misalignment inadvertently create "
        "new forms of misalignment."),
    PropagationOperator(
        "Skew", _C.DISTRIBUTIVE,
        "Where harms arise from the system disproportionately outputting or deciding with "
        "pronounced biases."),
    PropagationOperator(
        "Allocation", _C.DISTRIBUTIVE,
        "Where harms occur due to the system's role in resource allocation, contributing "
        "to disproportionate scarcity or inequality."),
    PropagationOperator(
        "Automation of Which", _C.DISTRIBUTIVE,
        "Where use of the system, and use of its outputs or actions, is automated by other "
        "systems whose creators don't have good intentions."),
    PropagationOperator(
        "Entrainment", _C.DISTRIBUTIVE,
        "Where usage of the system causes persistent attention capture, behavioral "
        "addictions, social or economic roles, or other viral pressures on others to "
        "persistently use it as well."),
    PropagationOperator(
        "External Opacity of Use", _C.INFORMATION_ASYMMETRY,
        "Where harms occur due to lack of transparency in how the system is being used, "
        "preventing proper oversight, accountability, or safety controls."),
    PropagationOperator(
        "Internal Opacity of Function", _C.INFORMATION_ASYMMETRY,
        "Where the system's decision-making process is not transparent or interpretable, "
        "leading to eroded standards of evidence and acceptance of unjustifiable outcomes."),
    PropagationOperator(
        "Psychological Effect", _C.SOCIOTECHNICAL_DIFFUSION,
        "Where harms manifest through the system's impact on human psychology, potentially "
        "altering cognitive patterns or emotional well-being."),
    PropagationOperator(
        "Physiological Effect", _C.SOCIOTECHNICAL_DIFFUSION,
        "Where harms occur due to the system's direct or indirect effects on human "
        "physical health or bodily functions."),
    PropagationOperator(
        "Social Effect", _C.SOCIOTECHNICAL_DIFFUSION,
        "Where harms arise from the system's influence on social dynamics, potentially "
        "disrupting relationships or community structures."),
    PropagationOperator(
        "Political Effect", _C.SOCIOTECHNICAL_DIFFUSION,
        "Where harms result from the system's impact on political processes or power "
        "structures, potentially undermining democratic institutions."),
    PropagationOperator(
        "Environmental Effect", _C.SOCIOTECHNICAL_DIFFUSION,
        "Where harms occur due to the system's direct or indirect impact on the natural "
        "environment, potentially contributing to ecological degradation."),
    PropagationOperator(
        "Economic Effect", _C.SOCIOTECHNICAL_DIFFUSION,
        "Where harms manifest through the system's influence on economic systems, "
        "potentially leading to financial instabilities or foundational paradigm shifts."),
)

_OPERATORS_BY_NAME = {op.name.lower(): op for op in OPERATOR_CATALOG}


def operator_catalog() -> tuple[PropagationOperator, ...]:
    """The closed catalog of propagation operators, in category order."""
    return OPERATOR_CATALOG


def operator_by_name(name: str) -> PropagationOperator:
    op = _OPERATORS_BY_NAME.get(name.strip().lower())
    if op is None:
        raise PathwayError(f"unknown propagation operator: {name!r}")
    return op


StepProbability = Union[ProbabilityInterval, LikelihoodLevel, None]


@dataclass(frozen=True)
class PathwayStep:
    description: str
    step_kind: StepKind
    probability: StepProbability = None
    operator_in: Optional[str] = None

    def __post_init__(self) -> None:
        if self.operator_in is not None:
            operator_by_name(self.operator_in)


@dataclass(frozen=True)
class RiskPathway:
    source_aspect: str
    steps: tuple[PathwayStep, ...]
    terminal_aspect: str
    direction_built: PathwayDirection = PathwayDirection.FORWARD


def chain(
    source_aspect: str,
    terminal_aspect: str,
    steps: Sequence[tuple],
    direction: PathwayDirection = PathwayDirection.FORWARD,
) -> RiskPathway:
    """Build a pathway from (description, probability[, operator]) tuples.

    The first step becomes the source hazard and the last the terminal
    hazard, so at least two steps are required.
    """
    if len(steps) < 2:
        raise PathwayError("a pathway needs at least a source and a terminal step")
    built = []
    last = len(steps) - 1
    for i, spec_tuple in enumerate(steps):
        description, probability = spec_tuple[0], spec_tuple[1]
        operator_in = spec_tuple[2] if len(spec_tuple) > 2 else None
        if i == 0:
            kind = StepKind.SOURCE_HAZARD
        elif i == last:
            kind = StepKind.TERMINAL_HAZARD
        else:
            kind = StepKind.INTERMEDIATE
        built.append(PathwayStep(description, kind, probability, operator_in))
    return RiskPathway(source_aspect, tuple(built), terminal_aspect, direction)


_SOURCE_ROOTS = ("capability", "domain knowledge", "affordance")
_TERMINAL_ROOT = "impact domain"


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    message: str


def validate_pathway(taxonomy: Taxonomy, pathway: RiskPathway) -> list[ValidationIssue]:
    """Structural and taxonomy checks; returns findings instead of raising."""
    issues: list[ValidationIssue] = []
    steps = pathway.steps
    if not steps:
        issues.append(ValidationIssue("empty", "pathway has no steps"))
    else:
        if steps[0].step_kind != StepKind.SOURCE_HAZARD:
            issues.append(ValidationIssue(
                "source_position", "first step must be the source hazard"))
        if steps[-1].step_kind != StepKind.TERMINAL_HAZARD:
            issues.append(ValidationIssue(
                "terminal_position", "last step must be the terminal hazard"))
        for i, step in enumerate(steps[1:-1], start=2):
            if step.step_kind != StepKind.INTERMEDIATE:
                issues.append(ValidationIssue(
                    "interior_kind",
                    f"step {i} must be an intermediate step, not {step.step_kind.value}"))
        if len(steps) == 1:
            issues.append(ValidationIssue(
                "too_short", "pathway needs distinct source and terminal steps"))

    issues.extend(_aspect_root_issues(
        taxonomy, pathway.source_aspect, "source_aspect", _SOURCE_ROOTS))
    issues.extend(_aspect_root_issues(
        taxonomy, pathway.terminal_aspect, "terminal_aspect", (_TERMINAL_ROOT,)))
    return issues


def _aspect_root_issues(
    taxonomy: Taxonomy,
    aspect: str,
    which: str,
    allowed_roots: tuple[str, ...],
) -> list[ValidationIssue]:
    if aspect not in taxonomy:
        return [ValidationIssue(
            f"{which}_unknown", f"{which} {aspect!r} is not in the taxonomy")]
    root = taxonomy.ancestor_at(aspect, TaxonomyLevel.TL0)
    if root.label.lower() not in allowed_roots:
        allowed = " or ".join(allowed_roots)
        return [ValidationIssue(
            f"{which}_root",
            f"{which} {aspect!r} sits under {root.label}, expected {allowed}")]
    return []


def step_interval(step: PathwayStep) -> ProbabilityInterval:
    if isinstance(step.probability, ProbabilityInterval):
        return step.probability
    if isinstance(step.probability, LikelihoodLevel):
        band = ll_band(step.probability)
        return ProbabilityInterval(band.lower, band.upper)
    raise PathwayError("step has no probability estimate")


def pathway_likelihood(pathway: RiskPathway) -> tuple[ProbabilityInterval, BandedLikelihood]:
    """Compose step probabilities and band the result conservatively."""
    intervals = []
    for i, step in enumerate(pathway.steps, start=1):
        if step.probability is None:
            raise MissingStepProbability(i)
        intervals.append(step_interval(step))
    combined = compose_sequential(intervals)
    return combined, ll_conservative(combined)


@dataclass(frozen=True)
class InteractionCell:
    """Unordered pair of distinct aspects flagged for combined assessment."""

    aspect_a: str
    aspect_b: str
    rationale: str = ""

    def __post_init__(self) -> None:
        if self.aspect_a == self.aspect_b:
            raise PathwayError("an interaction needs two distinct aspects")
        if self.aspect_b < self.aspect_a:
            a, b = self.aspect_b, self.aspect_a
            object.__setattr__(self, "aspect_a", a)
            object.__setattr__(self, "aspect_b", b)

    def pair(self) -> tuple[str, str]:
        return (self.aspect_a, self.aspect_b)


def interaction_pairs(aspects: Iterable[str]) -> list[tuple[str, str]]:
    """All unordered pairs of the distinct aspects given, in stable order."""
    distinct = list(dict.fromkeys(aspects))
    if len(distinct) < 2:
        raise PathwayError("interaction pairs need at least two distinct aspects")
    return list(itertools.combinations(distinct, 2))
