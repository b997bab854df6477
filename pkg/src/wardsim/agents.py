"""Ward agents, their statecharts and the effects of treatments and visits."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Iterable

from .fuzzy import FuzzySystem, infer

logger = logging.getLogger(__name__)

VISIT_WINDOW_MINUTES = 60
NO_VISIT_DAYS = 14


def clamp(x: float, lo: float, hi: float) -> float:
    return min(max(x, lo), hi)


class PatientState(str, enum.Enum):
    AT_HOME = "AtHome"
    WAITING_FOR_BED = "WaitingForBed"
    IN_BED_IDLE = "InBedIdle"
    IN_QUEUE = "InQueue"
    BEING_TREATED = "BeingTreated"
    BEING_VISITED = "BeingVisited"


IN_BED_STATES = frozenset(
    {PatientState.IN_BED_IDLE, PatientState.IN_QUEUE, PatientState.BEING_TREATED, PatientState.BEING_VISITED}
)


class ProviderState(str, enum.Enum):
    IDLE = "Idle"
    TREATING = "Treating"


class VisitorState(str, enum.Enum):
    AT_HOME = "AtHome"
    VISITING = "Visiting"


class BedState(str, enum.Enum):
    FREE = "Free"
    OCCUPIED = "Occupied"


class DoctorLevel(str, enum.Enum):
    SENIOR = "Senior"
    JUNIOR = "Junior"


class RobotKind(str, enum.Enum):
    HUMANLIKE = "Humanlike"
    ROBOTLIKE = "Robotlike"


# extra minutes a doctor spends on every treatment, by seniority
EXTRA_TREAT_MINUTES = {DoctorLevel.SENIOR: 0, DoctorLevel.JUNIOR: 10}


@dataclass(frozen=True)
class DoctorStereotype:
    level: DoctorLevel

    @property
    def extra_treat_minutes(self) -> int:
        return EXTRA_TREAT_MINUTES[self.level]


@dataclass(frozen=True)
class RobotStereotype:
    kind: RobotKind
    humanlike: float

    def __post_init__(self):
        h = self.humanlike
        if self.kind is RobotKind.HUMANLIKE and not 0.5 <= h <= 1.0:
            raise ValueError(f"a humanlike robot needs h in [0.5, 1], got {h}")
        if self.kind is RobotKind.ROBOTLIKE and not 0.0 <= h < 0.5:
            raise ValueError(f"a robotlike robot needs h in [0, 0.5), got {h}")

    @classmethod
    def from_h(cls, h: float) -> "RobotStereotype":
        return cls(RobotKind.HUMANLIKE if h >= 0.5 else RobotKind.ROBOTLIKE, h)

    @property
    def appearance(self) -> float:
        """Signed appearance effect in [-1, 1]; zero at h = 0.5."""
        return 2.0 * self.humanlike - 1.0


@dataclass
class Patient:
    id: int
    mental_state: float = 0.6
    trust_robots: float = 0.5
    opinion_doctors: float = 0.0
    opinion_robots: float = 0.0
    severity: float = 5.0
    bed: int | None = None
    last_visit_day: int | None = None
    state: PatientState = PatientState.AT_HOME
    treatments_by_doctor: int = 0
    treatments_by_robot: int = 0
    visits: int = 0

    @property
    def in_bed(self) -> bool:
        return self.state in IN_BED_STATES


@dataclass
class Provider:
    id: int
    state: ProviderState = ProviderState.IDLE
    patient_id: int | None = None
    remaining: int = 0
    treated: int = 0

    @property
    def is_idle(self) -> bool:
        return self.state is ProviderState.IDLE


@dataclass
class Doctor(Provider):
    stereotype: DoctorStereotype = DoctorStereotype(DoctorLevel.SENIOR)

    kind = "doctor"

    @property
    def extra_treat_minutes(self) -> int:
        return self.stereotype.extra_treat_minutes


@dataclass
class Robot(Provider):
    stereotype: RobotStereotype = RobotStereotype(RobotKind.HUMANLIKE, 0.75)

    kind = "robot"

    @property
    def extra_treat_minutes(self) -> int:
        return 0


@dataclass
class Visitor:
    id: int
    patient_id: int
    state: VisitorState = VisitorState.AT_HOME
    remaining: int = 0
    duration: int = 0


@dataclass
class Bed:
    index: int
    occupant: int | None = None
    state: BedState = BedState.FREE


@dataclass(frozen=True)
class EffectParams:
    doctor_sat_gain: float = 0.10
    robot_sat_base: float = 0.05
    look_gain: float = 0.05
    trust_gain: float = 0.05
    opinion_gain: float = 0.05
    visit_gain_per_hour: float = 0.08
    daily_decay: float = 0.02
    severity_relief: float = 1.0

    def __post_init__(self):
        for name, value in vars(self).items():
            if value < 0:
                raise ValueError(f"effect parameter {name} must be non-negative, got {value}")
        if not self.doctor_sat_gain > self.robot_sat_base:
            raise ValueError("doctor_sat_gain must exceed robot_sat_base")


def round_minutes(x: float) -> int:
    """Nearest whole minute, halves rounded up."""
    return int(math.floor(x + 0.5))


def fls_inputs(fls: FuzzySystem, values: dict[str, float]) -> dict[str, float]:
    """Bind values to the system's inputs by name, falling back to position."""
    names = fls.input_names
    if set(names) <= set(values):
        return {n: values[n] for n in names}
    return dict(zip(names, values.values()))


def treatment_duration(provider: Provider, patient: Patient, fls: FuzzySystem) -> int:
    """Minutes a provider spends on a patient: rounded FLS output plus stereotype time."""
    crisp = infer(fls, fls_inputs(fls, {"severity": patient.severity, "mentalState": patient.mental_state}))
    return max(1, round_minutes(crisp) + provider.extra_treat_minutes)


def apply_treatment(patient: Patient, provider: Provider, params: EffectParams) -> Patient:
    if isinstance(provider, Doctor):
        patient.mental_state = clamp(patient.mental_state + params.doctor_sat_gain, 0.0, 1.0)
        patient.opinion_doctors = clamp(patient.opinion_doctors + params.opinion_gain, -1.0, 1.0)
        patient.treatments_by_doctor += 1
    elif isinstance(provider, Robot):
        look = provider.stereotype.appearance
        patient.mental_state = clamp(
            patient.mental_state + params.robot_sat_base + params.look_gain * look, 0.0, 1.0
        )
        patient.trust_robots = clamp(patient.trust_robots + params.trust_gain * look, 0.0, 1.0)
        patient.opinion_robots = clamp(patient.opinion_robots + params.opinion_gain * look, -1.0, 1.0)
        patient.treatments_by_robot += 1
    else:
        raise TypeError(f"not a provider: {provider!r}")
    patient.severity = clamp(patient.severity - params.severity_relief, 0.0, 10.0)
    return patient


def visitor_decision(
    visitor: Visitor,
    patient: Patient,
    visitor_fls: tuple[FuzzySystem, FuzzySystem],
    day: int,
    window: int = VISIT_WINDOW_MINUTES,
) -> tuple[bool, int]:
    """Whether the visitor comes today and, if so, for how many minutes."""
    propensity_fls, duration_fls = visitor_fls
    if patient.last_visit_day is None:
        days = NO_VISIT_DAYS
    else:
        days = day - patient.last_visit_day
    values = {"daysSinceLastVisit": days, "patientMentalState": patient.mental_state}
    if infer(propensity_fls, fls_inputs(propensity_fls, values)) < 0.5:
        return False, 0
    minutes = round_minutes(infer(duration_fls, fls_inputs(duration_fls, values)))
    return True, min(max(minutes, 1), window)


def apply_visit(patient: Patient, duration_minutes: int, params: EffectParams, day: int) -> Patient:
    if duration_minutes < 1:
        raise ValueError("a visit lasts at least one minute")
    gain = params.visit_gain_per_hour * (duration_minutes / 60.0)
    patient.mental_state = clamp(patient.mental_state + gain, 0.0, 1.0)
    patient.last_visit_day = day
    patient.visits += 1
    return patient


def apply_daily_decay(patient: Patient, params: EffectParams) -> Patient:
    patient.mental_state = clamp(patient.mental_state - params.daily_decay, 0.0, 1.0)
    return patient


# -- statecharts -----------------------------------------------------------


class TriggerKind(enum.IntEnum):
    # value is the priority: higher wins when several fire in the same tick
    TIMEOUT = 1
    CONDITION = 2
    MESSAGE = 3


@dataclass(frozen=True)
class Trigger:
    kind: TriggerKind
    name: str
    payload: object = None

    @classmethod
    def timeout(cls, name: str, payload=None):
        return cls(TriggerKind.TIMEOUT, name, payload)

    @classmethod
    def condition(cls, name: str, payload=None):
        return cls(TriggerKind.CONDITION, name, payload)

    @classmethod
    def message(cls, name: str, payload=None):
        return cls(TriggerKind.MESSAGE, name, payload)


P = PatientState
T = TriggerKind

PATIENT_TRANSITIONS = {
    (P.AT_HOME, T.CONDITION, "AdmissionRequested"): P.WAITING_FOR_BED,
    (P.WAITING_FOR_BED, T.CONDITION, "BedFree"): P.IN_BED_IDLE,
    (P.IN_BED_IDLE, T.MESSAGE, "CheckUpDue"): P.IN_QUEUE,
    (P.IN_BED_IDLE, T.MESSAGE, "SelfRequest"): P.IN_QUEUE,
    (P.IN_QUEUE, T.MESSAGE, "StartTreatment"): P.BEING_TREATED,
    (P.BEING_TREATED, T.TIMEOUT, "TreatmentOver"): P.IN_BED_IDLE,
    (P.IN_BED_IDLE, T.MESSAGE, "VisitorArrives"): P.BEING_VISITED,
    # a queued patient gives up the queue slot to see the visitor
    (P.IN_QUEUE, T.MESSAGE, "VisitorArrives"): P.BEING_VISITED,
    (P.BEING_VISITED, T.MESSAGE, "VisitorArrives"): P.BEING_VISITED,
    (P.BEING_VISITED, T.TIMEOUT, "VisitOver"): P.IN_BED_IDLE,
    (P.IN_BED_IDLE, T.CONDITION, "Recovered"): P.AT_HOME,
}

PROVIDER_TRANSITIONS = {
    (ProviderState.IDLE, T.MESSAGE, "StartTreatment"): ProviderState.TREATING,
    (ProviderState.TREATING, T.TIMEOUT, "TreatmentOver"): ProviderState.IDLE,
}

VISITOR_TRANSITIONS = {
    (VisitorState.AT_HOME, T.TIMEOUT, "WindowOpens"): VisitorState.VISITING,
    (VisitorState.VISITING, T.TIMEOUT, "VisitOver"): VisitorState.AT_HOME,
}

BED_TRANSITIONS = {
    (BedState.FREE, T.MESSAGE, "Admit"): BedState.OCCUPIED,
    (BedState.OCCUPIED, T.MESSAGE, "Release"): BedState.FREE,
}

del P, T


def transitions_for(agent) -> dict:
    if isinstance(agent, Patient):
        return PATIENT_TRANSITIONS
    if isinstance(agent, Provider):
        return PROVIDER_TRANSITIONS
    if isinstance(agent, Visitor):
        return VISITOR_TRANSITIONS
    if isinstance(agent, Bed):
        return BED_TRANSITIONS
    raise TypeError(f"no statechart for {type(agent).__name__}")


def enabled(agent, trigger: Trigger) -> bool:
    return (agent.state, trigger.kind, trigger.name) in transitions_for(agent)


def fire_transition(agent, trigger: Trigger):
    """Move ``agent`` along its statechart; a trigger that is not enabled is ignored."""
    target = transitions_for(agent).get((agent.state, trigger.kind, trigger.name))
    if target is None:
        logger.debug(
            "%s %s ignores %s(%s) in state %s",
            type(agent).__name__, agent_id(agent), trigger.kind.name, trigger.name, agent.state.value,
        )
        return agent.state
    agent.state = target
    return target


def select_trigger(agent, triggers: Iterable[Trigger]) -> Trigger | None:
    """Highest-priority enabled trigger (Message > Condition > Timeout); first wins ties."""
    best = None
    for trig in triggers:
        if enabled(agent, trig) and (best is None or trig.kind > best.kind):
            best = trig
    return best


def step_statechart(agent, triggers: Iterable[Trigger]):
    """Fire at most one transition for this tick."""
    trig = select_trigger(agent, triggers)
    if trig is None:
        return agent.state
    return fire_transition(agent, trig)


def agent_id(agent) -> int:
    return agent.index if isinstance(agent, Bed) else agent.id

