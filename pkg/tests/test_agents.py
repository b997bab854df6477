import pytest
from hypothesis import given
from hypothesis import strategies as st

from wardsim.agents import (
    BedState,
    Bed,
    Doctor,
    DoctorLevel,
    DoctorStereotype,
    EffectParams,
    Patient,
    PatientState,
    ProviderState,
    Robot,
    RobotKind,
    RobotStereotype,
    Trigger,
    Visitor,
    VisitorState,
    apply_daily_decay,
    apply_treatment,
    apply_visit,
    fire_transition,
    round_minutes,
    select_trigger,
    step_statechart,
    treatment_duration,
    visitor_decision,
)
from wardsim.fuzzy import load_fls_definition, load_shipped


def constant_fls(value: float, inputs=("severity", "mentalState"), output="out", lo=0.0, hi=100.0):
    """A system whose crisp output is ``value`` wherever it is evaluated."""
    lines = []
    for name in inputs:
        lines += [f"var input {name} 0 10", f"term {name} Any trap 0 0 10 10"]
    half = min(value - lo, hi - value, 5.0)
    lines += [f"var output {output} {lo} {hi}", f"term {output} C tri {value - half} {value} {value + half}"]
    ante = " AND ".join(f"{name} IS Any" for name in inputs)
    lines.append(f"rule IF {ante} THEN {output} IS C")
    return load_fls_definition("\n".join(lines))


def senior(pid=0):
    return Doctor(pid, stereotype=DoctorStereotype(DoctorLevel.SENIOR))


def junior(pid=0):
    return Doctor(pid, stereotype=DoctorStereotype(DoctorLevel.JUNIOR))


def robot(h, pid=0):
    return Robot(pid, stereotype=RobotStereotype.from_h(h))


# -- treatment durations ---------------------------------------------------------

def test_senior_adds_nothing_junior_adds_ten():
    fls = constant_fls(35.0)
    patient = Patient(0, severity=5.0, mental_state=0.5)
    assert treatment_duration(senior(), patient, fls) == 35
    assert treatment_duration(junior(), patient, fls) == 45


@pytest.mark.parametrize("h", [0.0, 0.25, 0.75, 1.0])
def test_robot_rounds_without_extra_time(h):
    assert treatment_duration(robot(h), Patient(0), constant_fls(22.4)) == 22


@given(st.floats(0, 10), st.floats(0, 1))
def test_junior_minus_senior_is_ten_with_shipped_fls(severity, mental):
    fls = load_shipped("doctor")
    patient = Patient(0, severity=severity, mental_state=mental)
    assert treatment_duration(junior(), patient, fls) - treatment_duration(senior(), patient, fls) == 10


def test_round_minutes_half_up():
    assert [round_minutes(x) for x in (22.4, 22.5, 23.5, 0.49)] == [22, 23, 24, 0]


# -- stereotypes --------------------------------------------------------------------

def test_robot_stereotype_ranges():
    assert RobotStereotype.from_h(0.5).kind is RobotKind.HUMANLIKE
    assert RobotStereotype.from_h(0.49).kind is RobotKind.ROBOTLIKE
    with pytest.raises(ValueError):
        RobotStereotype(RobotKind.HUMANLIKE, 0.2)
    with pytest.raises(ValueError):
        RobotStereotype(RobotKind.ROBOTLIKE, 0.5)


def test_effect_params_validated():
    with pytest.raises(ValueError):
        EffectParams(trust_gain=-0.1)
    with pytest.raises(ValueError):
        EffectParams(doctor_sat_gain=0.05, robot_sat_base=0.05)


# -- treatment effects ---------------------------------------------------------------

@pytest.mark.parametrize("h, expected", [(1.0, 0.55), (0.0, 0.45), (0.5, 0.50)])
def test_robot_trust_effect(h, expected):
    patient = Patient(0, trust_robots=0.5)
    apply_treatment(patient, robot(h), EffectParams(trust_gain=0.05))
    assert patient.trust_robots == pytest.approx(expected, abs=1e-12)


def test_doctor_treatment_effect():
    patient = Patient(0, mental_state=0.5, opinion_doctors=0.0, severity=4.0)
    apply_treatment(patient, senior(), EffectParams())
    assert patient.mental_state == pytest.approx(0.6)
    assert patient.opinion_doctors == pytest.approx(0.05)
    assert patient.severity == pytest.approx(3.0)
    assert patient.trust_robots == 0.5
    assert patient.treatments_by_doctor == 1


def test_robot_treatment_effect():
    patient = Patient(0, mental_state=0.5, severity=0.5)
    apply_treatment(patient, robot(0.0), EffectParams())
    assert patient.mental_state == pytest.approx(0.5 + 0.05 - 0.05)
    assert patient.opinion_robots == pytest.approx(-0.05)
    assert patient.severity == 0.0
    assert patient.treatments_by_robot == 1


@given(
    st.floats(0, 1), st.floats(0, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(0, 10),
    st.floats(0, 1), st.booleans(),
)
def test_treatment_keeps_fields_in_range(mental, trust, op_d, op_r, severity, h, by_doctor):
    patient = Patient(0, mental, trust, op_d, op_r, severity)
    apply_treatment(patient, senior() if by_doctor else robot(h), EffectParams(0.5, 0.3, 0.5, 0.5, 0.5))
    assert 0 <= patient.mental_state <= 1 and 0 <= patient.trust_robots <= 1
    assert -1 <= patient.opinion_doctors <= 1 and -1 <= patient.opinion_robots <= 1
    assert 0 <= patient.severity <= 10


@pytest.mark.parametrize("h", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_trust_change_sign_follows_appearance(h):
    patient = Patient(0, trust_robots=0.5)
    apply_treatment(patient, robot(h), EffectParams())
    delta = patient.trust_robots - 0.5
    assert (delta > 0) - (delta < 0) == (h > 0.5) - (h < 0.5)


# -- visits ---------------------------------------------------------------------------

def visitor_systems():
    return load_shipped("visitor_propensity"), load_shipped("visitor_duration")


def test_long_absence_and_low_mood_means_a_visit():
    patient = Patient(0, mental_state=0.1, last_visit_day=0)
    visit, minutes = visitor_decision(Visitor(0, 0), patient, visitor_systems(), day=14)
    assert visit
    assert 1 <= minutes <= 60


def test_never_visited_counts_as_long_absence():
    patient = Patient(0, mental_state=0.1)
    assert visitor_decision(Visitor(0, 0), patient, visitor_systems(), day=0)[0]


def test_propensity_tie_means_visit():
    names = ("daysSinceLastVisit", "patientMentalState")
    systems = (constant_fls(0.5, names, lo=0.0, hi=1.0), constant_fls(30.0, names))
    assert visitor_decision(Visitor(0, 0), Patient(0), systems, day=3) == (True, 30)


def test_no_visit_skips_duration():
    names = ("daysSinceLastVisit", "patientMentalState")
    systems = (constant_fls(0.2, names, lo=0.0, hi=1.0), None)
    visitor = Visitor(0, 0)
    assert visitor_decision(visitor, Patient(0), systems, day=3) == (False, 0)
    assert visitor.state is VisitorState.AT_HOME


def test_visit_duration_capped_by_window():
    names = ("daysSinceLastVisit", "patientMentalState")
    systems = (constant_fls(0.9, names, lo=0.0, hi=1.0), constant_fls(80.0, names))
    assert visitor_decision(Visitor(0, 0), Patient(0), systems, day=3, window=45) == (True, 45)


def test_visit_effect():
    patient = Patient(0, mental_state=0.5)
    apply_visit(patient, 60, EffectParams(visit_gain_per_hour=0.08), day=4)
    assert patient.mental_state == pytest.approx(0.58)
    assert patient.last_visit_day == 4
    patient = Patient(0, mental_state=0.97)
    apply_visit(patient, 30, EffectParams(), day=0)
    assert patient.mental_state == 1.0


def test_zero_minute_visit_disallowed():
    with pytest.raises(ValueError):
        apply_visit(Patient(0), 0, EffectParams(), day=0)


def test_daily_decay_clamps():
    patient = Patient(0, mental_state=0.01)
    apply_daily_decay(patient, EffectParams())
    assert patient.mental_state == 0.0


# -- statecharts -----------------------------------------------------------------------

def test_provider_statechart():
    doc = senior()
    fire_transition(doc, Trigger.message("StartTreatment"))
    assert doc.state is ProviderState.TREATING
    fire_transition(doc, Trigger.timeout("TreatmentOver"))
    assert doc.state is ProviderState.IDLE


def test_patient_visit_interrupts_idle():
    patient = Patient(0, state=PatientState.IN_BED_IDLE)
    fire_transition(patient, Trigger.message("VisitorArrives"))
    assert patient.state is PatientState.BEING_VISITED
    fire_transition(patient, Trigger.timeout("VisitOver"))
    assert patient.state is PatientState.IN_BED_IDLE


def test_patient_lifecycle():
    patient = Patient(0)
    for trig, state in [
        (Trigger.condition("AdmissionRequested"), PatientState.WAITING_FOR_BED),
        (Trigger.condition("BedFree"), PatientState.IN_BED_IDLE),
        (Trigger.message("CheckUpDue"), PatientState.IN_QUEUE),
        (Trigger.message("StartTreatment"), PatientState.BEING_TREATED),
        (Trigger.timeout("TreatmentOver"), PatientState.IN_BED_IDLE),
        (Trigger.condition("Recovered"), PatientState.AT_HOME),
    ]:
        fire_transition(patient, trig)
        assert patient.state is state


def test_disabled_trigger_is_ignored():
    patient = Patient(0, state=PatientState.BEING_TREATED)
    fire_transition(patient, Trigger.message("VisitorArrives"))
    assert patient.state is PatientState.BEING_TREATED


def test_bed_and_visitor_statecharts():
    bed = Bed(0)
    fire_transition(bed, Trigger.message("Admit"))
    assert bed.state is BedState.OCCUPIED
    fire_transition(bed, Trigger.message("Release"))
    assert bed.state is BedState.FREE
    vis = Visitor(0, 0)
    fire_transition(vis, Trigger.timeout("WindowOpens"))
    assert vis.state is VisitorState.VISITING


def test_message_outranks_timeout():
    patient = Patient(0, state=PatientState.IN_BED_IDLE)
    triggers = [Trigger.condition("Recovered"), Trigger.message("SelfRequest")]
    assert select_trigger(patient, triggers).name == "SelfRequest"
    step_statechart(patient, triggers)
    assert patient.state is PatientState.IN_QUEUE
    assert select_trigger(patient, [Trigger.timeout("VisitOver")]) is None
