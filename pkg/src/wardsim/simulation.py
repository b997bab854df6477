"""Discrete-time ward simulation.

One tick is one simulated minute.  Each tick runs these phases in order:

1. timeouts     treatments and visits whose time is up end
2. conditions   recovered patients go home, waiting patients get free beds
3. arrivals     admission requests (at midnight), check-ups and self requests
4. visitors     at the window opening each visitor decides whether to come
5. dispatch     idle providers take patients from the head of the queue
6. effects      finished treatments and visits update the patients
7. hourly       trust diffusion over the bed network
8. midnight     daily mental-state decay
9. sampling     a trace row every ``traceInterval`` minutes

Within a phase every agent reads the same state and writes are applied in
id order, so the result never depends on the order agents are visited in.
"""

from __future__ import annotations

import copy
import enum
import logging
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import fuzzy
from .agents import (
    Bed,
    Doctor,
    DoctorLevel,
    DoctorStereotype,
    Patient,
    PatientState,
    Provider,
    ProviderState,
    Robot,
    RobotStereotype,
    Trigger,
    Visitor,
    VisitorState,
    apply_daily_decay,
    apply_treatment,
    apply_visit,
    fire_transition,
    treatment_duration,
    visitor_decision,
)
from .config import ExperimentConfig
from .network import build_network, diffuse_trust, network_summary, occupied_edges, Thresholds

logger = logging.getLogger(__name__)

MINUTES_PER_DAY = 1440
MINUTES_PER_HOUR = 60

STREAMS = {"initial": 1, "arrivals": 2, "admissions": 3}


class RequestKind(str, enum.Enum):
    CHECK_UP = "CheckUp"
    SELF_REQUEST = "SelfRequest"

    @property
    def message(self) -> str:
        return "CheckUpDue" if self is RequestKind.CHECK_UP else "SelfRequest"


@dataclass(frozen=True)
class SimClock:
    tick: int = 0

    @property
    def day(self) -> int:
        return self.tick // MINUTES_PER_DAY

    @property
    def minute_of_day(self) -> int:
        return self.tick % MINUTES_PER_DAY

    def advance(self) -> "SimClock":
        return SimClock(self.tick + 1)

    def __str__(self):
        m = self.minute_of_day
        return f"day {self.day} {m // 60:02d}:{m % 60:02d}"


@dataclass(frozen=True)
class QueueEntry:
    patient_id: int
    kind: RequestKind
    tick: int


class TreatmentQueue:
    """FIFO of treatment requests; a patient appears at most once."""

    def __init__(self):
        self._entries: deque[QueueEntry] = deque()
        self._ids: set[int] = set()

    def __len__(self):
        return len(self._entries)

    def __contains__(self, patient_id):
        return patient_id in self._ids

    def __iter__(self):
        return iter(self._entries)

    def ids(self) -> list[int]:
        return [e.patient_id for e in self._entries]

    def push(self, entry: QueueEntry) -> bool:
        if entry.patient_id in self._ids:
            return False
        self._entries.append(entry)
        self._ids.add(entry.patient_id)
        return True

    def pop(self) -> QueueEntry:
        entry = self._entries.popleft()
        self._ids.discard(entry.patient_id)
        return entry

    def remove(self, patient_id: int) -> QueueEntry | None:
        for entry in self._entries:
            if entry.patient_id == patient_id:
                self._entries.remove(entry)
                self._ids.discard(patient_id)
                return entry
        return None


class RandomStreams:
    """Independent generators per (concern, agent), all derived from one seed."""

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.seed = seed

    def get(self, stream: str, agent_id: int = 0) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed, STREAMS[stream], agent_id]))


@dataclass(frozen=True)
class Systems:
    doctor: fuzzy.FuzzySystem
    robot: fuzzy.FuzzySystem
    visitor_propensity: fuzzy.FuzzySystem
    visitor_duration: fuzzy.FuzzySystem

    @classmethod
    def load(cls, paths) -> "Systems":
        loaded = {}
        for name in fuzzy.SHIPPED_FLS:
            path = getattr(paths, name)
            loaded[name] = fuzzy.load_shipped(name) if path is None else fuzzy.load_fls_file(path)
        return cls(**loaded)


TRACE_COLUMNS = (
    "tick", "day", "meanMentalState", "meanTrustRobots", "meanOpinionDoctors",
    "meanOpinionRobots", "queueLength", "edgesGreen", "edgesYellow", "edgesRed",
)


@dataclass(frozen=True)
class TraceRow:
    tick: int
    day: int
    mean_mental_state: float
    mean_trust_robots: float
    mean_opinion_doctors: float
    mean_opinion_robots: float
    queue_length: int
    edges_green: int
    edges_yellow: int
    edges_red: int

    @property
    def edges(self) -> int:
        return self.edges_green + self.edges_yellow + self.edges_red


@dataclass
class Counters:
    enqueued: int = 0
    dispatched: int = 0
    withdrawn: int = 0
    duplicates: int = 0
    admissions: int = 0
    discharges: int = 0
    visits: int = 0
    visits_skipped: int = 0


@dataclass
class RunResult:
    seed: int
    config: ExperimentConfig
    trace: list[TraceRow]
    patients: list[Patient]
    counters: Counters
    pending_requests: int
    network_dump: list[tuple] = field(default_factory=list)

    def _final_mean(self, attr: str) -> float:
        if not self.patients:
            return math.nan
        return float(np.mean([getattr(p, attr) for p in self.patients]))

    @property
    def final_mean_mental_state(self) -> float:
        return self._final_mean("mental_state")

    @property
    def final_mean_trust_robots(self) -> float:
        return self._final_mean("trust_robots")

    @property
    def final_mean_opinion_doctors(self) -> float:
        return self._final_mean("opinion_doctors")

    @property
    def final_mean_opinion_robots(self) -> float:
        return self._final_mean("opinion_robots")

    @property
    def final_edges(self) -> dict[str, int]:
        last = self.trace[-1]
        return {"green": last.edges_green, "yellow": last.edges_yellow, "red": last.edges_red}

    @property
    def red_edge_fraction(self) -> float:
        """Share of red edges among all classified edges, pooled over every trace sample."""
        total = sum(row.edges for row in self.trace)
        if total == 0:
            return 0.0
        return sum(row.edges_red for row in self.trace) / total

    def responses(self) -> dict[str, float]:
        return {
            "finalMeanMentalState": self.final_mean_mental_state,
            "finalMeanTrustRobots": self.final_mean_trust_robots,
            "finalMeanOpinionDoctors": self.final_mean_opinion_doctors,
            "finalMeanOpinionRobots": self.final_mean_opinion_robots,
            "redEdgeFraction": self.red_edge_fraction,
        }


class Simulation:
    """Mutable state of one run; ``step`` advances it by one minute.

    ``shuffle`` reorders agent iteration inside each phase with the given
    seed.  It exists to demonstrate that results do not depend on that order.
    """

    def __init__(
        self,
        cfg: ExperimentConfig,
        seed: int,
        systems: Systems | None = None,
        shuffle: int | None = None,
        dump_network: bool = False,
    ):
        self.cfg = cfg
        self.seed = seed
        self.systems = systems or Systems.load(cfg.fls)
        self.streams = RandomStreams(seed)
        self.params = cfg.effects
        self.schedule = cfg.schedule
        self.clock = SimClock()
        self.queue = TreatmentQueue()
        self.counters = Counters()
        self.network = build_network(
            cfg.beds,
            Thresholds(cfg.network.green_max, cfg.network.yellow_max),
            cfg.network.alpha_per_hour,
        )
        self._shuffler = None if shuffle is None else np.random.default_rng(shuffle)
        self._dump_network = dump_network
        self.network_dump: list[tuple] = []
        self.trace: list[TraceRow] = []

        self.beds = [Bed(i) for i in range(cfg.beds)]
        self.providers = self._make_providers()
        self.patients: list[Patient] = []
        self._arrival_rng: dict[int, np.random.Generator] = {}
        self._admission_rng: dict[int, np.random.Generator] = {}
        self._checkup_minute: dict[int, int] = {}
        self._next_self_request: dict[int, int | None] = {}
        self._waiting_since: dict[int, int] = {}
        self._withdrawn: dict[int, RequestKind] = {}
        self._visitors_with: dict[int, set[int]] = {}
        self._completed_treatments: list[tuple[int, int]] = []
        self._completed_visits: list[tuple[int, int, int]] = []
        self._rr_next = 0
        self._make_patients()
        self.visitors = [
            Visitor(i, i % cfg.patients) for i in range(cfg.visitors)
        ] if cfg.patients else []
        self._sample()
        self._dump_edges()

    # -- setup -------------------------------------------------------------

    def _make_providers(self) -> list[Provider]:
        cfg = self.cfg
        out: list[Provider] = []
        for level, count in [(DoctorLevel.SENIOR, cfg.doctors.senior), (DoctorLevel.JUNIOR, cfg.doctors.junior)]:
            for _ in range(count):
                out.append(Doctor(len(out), stereotype=DoctorStereotype(level)))
        for h, count in [(cfg.robots.h_humanlike, cfg.robots.humanlike), (cfg.robots.h_robotlike, cfg.robots.robotlike)]:
            for _ in range(count):
                out.append(Robot(len(out), stereotype=RobotStereotype.from_h(h)))
        return out

    def _make_patients(self):
        init = self.cfg.initial
        for pid in range(self.cfg.patients):
            rng = self.streams.get("initial", pid)
            patient = Patient(
                pid,
                mental_state=float(rng.uniform(init.mental_low, init.mental_high)),
                trust_robots=init.trust_robots,
                severity=float(rng.uniform(init.severity_low, init.severity_high)),
            )
            self._checkup_minute[pid] = int(rng.integers(0, MINUTES_PER_DAY))
            self._arrival_rng[pid] = self.streams.get("arrivals", pid)
            self._admission_rng[pid] = self.streams.get("admissions", pid)
            self._next_self_request[pid] = None
            if pid < len(self.beds):
                self._seat(patient, self.beds[pid])
            self.patients.append(patient)

    def _seat(self, patient: Patient, bed: Bed):
        fire_transition(bed, Trigger.message("Admit"))
        bed.occupant = patient.id
        patient.bed = bed.index
        patient.state = PatientState.IN_BED_IDLE

    # -- helpers -------------------------------------------------------------

    def _order(self, agents):
        agents = list(agents)
        if self._shuffler is not None:
            self._shuffler.shuffle(agents)
        return agents

    @property
    def tick(self) -> int:
        return self.clock.tick

    def provider(self, pid: int) -> Provider:
        return self.providers[pid]

    def patient(self, pid: int) -> Patient:
        return self.patients[pid]

    def enqueue_request(self, patient_id: int, kind: RequestKind) -> bool:
        patient = self.patients[patient_id]
        if patient_id in self.queue:
            self.counters.duplicates += 1
            logger.warning("patient %d already queued; %s ignored", patient_id, kind.value)
            return False
        if patient.state is not PatientState.IN_BED_IDLE:
            logger.debug("patient %d is %s; %s ignored", patient_id, patient.state.value, kind.value)
            return False
        self.queue.push(QueueEntry(patient_id, kind, self.tick))
        fire_transition(patient, Trigger.message(kind.message))
        self.counters.enqueued += 1
        return True

    # -- phases ------------------------------------------------------------

    def _timeouts(self):
        for prov in self._order(self.providers):
            if prov.state is not ProviderState.TREATING:
                continue
            prov.remaining -= 1
            if prov.remaining == 0:
                patient = self.patients[prov.patient_id]
                fire_transition(prov, Trigger.timeout("TreatmentOver"))
                fire_transition(patient, Trigger.timeout("TreatmentOver"))
                self._completed_treatments.append((patient.id, prov.id))
                prov.patient_id = None
        ended = set()
        for vis in self._order(self.visitors):
            if vis.state is not VisitorState.VISITING:
                continue
            vis.remaining -= 1
            if vis.remaining == 0:
                fire_transition(vis, Trigger.timeout("VisitOver"))
                self._completed_visits.append((vis.patient_id, vis.id, vis.duration))
                self._visitors_with[vis.patient_id].discard(vis.id)
                ended.add(vis.patient_id)
        for pid in ended:
            if not self._visitors_with[pid]:
                fire_transition(self.patients[pid], Trigger.timeout("VisitOver"))

    def _conditions(self):
        for patient in self._order(self.patients):
            if patient.state is PatientState.IN_BED_IDLE and patient.severity <= 0.0:
                bed = self.beds[patient.bed]
                fire_transition(patient, Trigger.condition("Recovered"))
                fire_transition(bed, Trigger.message("Release"))
                bed.occupant = None
                patient.bed = None
                self._next_self_request[patient.id] = None
                self._withdrawn.pop(patient.id, None)
                self.counters.discharges += 1
        waiting = sorted(
            (p for p in self.patients if p.state is PatientState.WAITING_FOR_BED),
            key=lambda p: (self._waiting_since[p.id], p.id),
        )
        free = [b for b in self.beds if b.occupant is None]
        for patient, bed in zip(waiting, free):
            fire_transition(patient, Trigger.condition("BedFree"))
            self._seat(patient, bed)
            self.counters.admissions += 1

    def _arrivals(self):
        t = self.tick
        minute = self.clock.minute_of_day
        init = self.cfg.initial
        mean_minutes = self.schedule.self_request_mean_hours * MINUTES_PER_HOUR
        requests = []
        for patient in self._order(self.patients):
            pid = patient.id
            if patient.state is PatientState.AT_HOME:
                if minute == 0 and self._admission_rng[pid].random() < self.schedule.p_admit:
                    if patient.severity <= 0.0:
                        patient.severity = float(
                            self._admission_rng[pid].uniform(init.severity_low, init.severity_high)
                        )
                    fire_transition(patient, Trigger.condition("AdmissionRequested"))
                    self._waiting_since[pid] = t
                continue
            if not patient.in_bed:
                continue
            idle = patient.state is PatientState.IN_BED_IDLE
            if idle and pid in self._withdrawn:
                requests.append((pid, self._withdrawn.pop(pid)))
            due = self._next_self_request[pid]
            if due is None and idle:
                gap = max(1, int(round(self._arrival_rng[pid].exponential(mean_minutes))))
                self._next_self_request[pid] = t + gap
            elif due is not None and due <= t:
                if idle:
                    requests.append((pid, RequestKind.SELF_REQUEST))
                self._next_self_request[pid] = None
            if minute == self._checkup_minute[pid]:
                requests.append((pid, RequestKind.CHECK_UP))
        for pid, kind in sorted(requests, key=lambda r: (r[0], r[1] is RequestKind.SELF_REQUEST)):
            self.enqueue_request(pid, kind)

    def _visitor_window(self):
        if self.clock.minute_of_day != self.schedule.window_start:
            return
        day = self.clock.day
        systems = (self.systems.visitor_propensity, self.systems.visitor_duration)
        decisions = {}
        for vis in self._order(self.visitors):
            patient = self.patients[vis.patient_id]
            if not patient.in_bed:
                continue
            if patient.state is PatientState.BEING_TREATED:
                self.counters.visits_skipped += 1
                logger.info("%s: visitor %d skips patient %d (in treatment)", self.clock, vis.id, patient.id)
                continue
            decisions[vis.id] = visitor_decision(
                vis, patient, systems, day, window=self.schedule.window_length
            )
        for vid in sorted(decisions):
            visit, minutes = decisions[vid]
            if not visit:
                continue
            vis = self.visitors[vid]
            patient = self.patients[vis.patient_id]
            if patient.state is PatientState.IN_QUEUE:
                entry = self.queue.remove(patient.id)
                self._withdrawn[patient.id] = entry.kind
                self.counters.withdrawn += 1
            fire_transition(vis, Trigger.timeout("WindowOpens"))
            vis.remaining = vis.duration = minutes
            fire_transition(patient, Trigger.message("VisitorArrives"))
            self._visitors_with.setdefault(patient.id, set()).add(vid)
            self.counters.visits += 1

    def _choose_provider(self) -> Provider | None:
        idle = [p for p in self.providers if p.is_idle]
        if self.schedule.prefer_doctors and any(isinstance(p, Doctor) for p in idle):
            idle = [p for p in idle if isinstance(p, Doctor)]
        if not idle:
            return None
        after = [p for p in idle if p.id >= self._rr_next]
        chosen = after[0] if after else idle[0]
        self._rr_next = chosen.id + 1
        return chosen

    def _dispatch(self):
        while len(self.queue):
            prov = self._choose_provider()
            if prov is None:
                return
            entry = self.queue.pop()
            patient = self.patients[entry.patient_id]
            fls = self.systems.doctor if isinstance(prov, Doctor) else self.systems.robot
            minutes = treatment_duration(prov, patient, fls)
            fire_transition(prov, Trigger.message("StartTreatment"))
            fire_transition(patient, Trigger.message("StartTreatment"))
            prov.patient_id = patient.id
            prov.remaining = minutes
            prov.treated += 1
            self.counters.dispatched += 1

    def _effects(self):
        day = self.clock.day
        for pid, prov_id in sorted(self._completed_treatments):
            apply_treatment(self.patients[pid], self.providers[prov_id], self.params)
        for pid, _, minutes in sorted(self._completed_visits):
            apply_visit(self.patients[pid], minutes, self.params, day)
        self._completed_treatments.clear()
        self._completed_visits.clear()

    def bed_trust(self) -> list[float | None]:
        return [
            None if bed.occupant is None else self.patients[bed.occupant].trust_robots
            for bed in self.beds
        ]

    def _diffuse(self):
        updated = diffuse_trust(self.bed_trust(), self.network)
        for bed, value in zip(self.beds, updated):
            if bed.occupant is not None:
                self.patients[bed.occupant].trust_robots = value

    def _sample(self):
        counts = network_summary(self.bed_trust(), self.network)
        n = len(self.patients)

        def mean(attr):
            return float(sum(getattr(p, attr) for p in self.patients) / n) if n else math.nan

        self.trace.append(TraceRow(
            self.tick, self.clock.day,
            mean("mental_state"), mean("trust_robots"),
            mean("opinion_doctors"), mean("opinion_robots"),
            len(self.queue), counts["green"], counts["yellow"], counts["red"],
        ))

    def _dump_edges(self):
        if not self._dump_network:
            return
        for i, j, gap, color in occupied_edges(self.bed_trust(), self.network):
            self.network_dump.append((self.clock.day, i, j, gap, color.value))

    def step(self):
        self._timeouts()
        self._conditions()
        self._arrivals()
        self._visitor_window()
        self._dispatch()
        self._effects()
        self.clock = self.clock.advance()
        t = self.tick
        if t % MINUTES_PER_HOUR == 0:
            self._diffuse()
        if t % MINUTES_PER_DAY == 0:
            for patient in self.patients:
                apply_daily_decay(patient, self.params)
            self._dump_edges()
        if t % self.schedule.trace_interval == 0:
            self._sample()

    def run(self, days: int | None = None) -> RunResult:
        days = self.cfg.duration_days if days is None else days
        for _ in range(days * MINUTES_PER_DAY):
            self.step()
        return self.result()

    def result(self) -> RunResult:
        return RunResult(
            seed=self.seed,
            config=self.cfg,
            trace=list(self.trace),
            patients=copy.deepcopy(self.patients),
            counters=copy.copy(self.counters),
            pending_requests=len(self.queue) + len(self._withdrawn),
            network_dump=list(self.network_dump),
        )

    # -- checks --------------------------------------------------------------

    def violations(self) -> list[str]:
        """Broken invariants of the current state (empty when all is well)."""
        out = []
        occupants = [b.occupant for b in self.beds if b.occupant is not None]
        if len(occupants) != len(set(occupants)):
            out.append("a patient occupies two beds")
        for bed in self.beds:
            if (bed.occupant is None) != (bed.state.value == "Free"):
                out.append(f"bed {bed.index} state {bed.state.value} disagrees with occupant")
            if bed.occupant is not None and self.patients[bed.occupant].bed != bed.index:
                out.append(f"bed {bed.index} and patient {bed.occupant} disagree")
        treating = {}
        for prov in self.providers:
            if prov.state is ProviderState.TREATING:
                if prov.remaining <= 0 or prov.patient_id is None:
                    out.append(f"provider {prov.id} treating without time or patient")
                    continue
                if prov.patient_id in treating:
                    out.append(f"patient {prov.patient_id} treated by two providers")
                treating[prov.patient_id] = prov.id
            elif prov.patient_id is not None:
                out.append(f"idle provider {prov.id} holds patient {prov.patient_id}")
        visited = {v.patient_id for v in self.visitors if v.state is VisitorState.VISITING}
        queued = set(self.queue.ids())
        if len(queued) != len(self.queue):
            out.append("queue holds a patient twice")
        for p in self.patients:
            if (p.bed is None) != (p.state in (PatientState.AT_HOME, PatientState.WAITING_FOR_BED)):
                out.append(f"patient {p.id} bed {p.bed} inconsistent with {p.state.value}")
            if (p.state is PatientState.BEING_TREATED) != (p.id in treating):
                out.append(f"patient {p.id} is {p.state.value} but treating={p.id in treating}")
            if (p.state is PatientState.BEING_VISITED) != (p.id in visited):
                out.append(f"patient {p.id} is {p.state.value} but visited={p.id in visited}")
            if (p.state is PatientState.IN_QUEUE) != (p.id in queued):
                out.append(f"patient {p.id} is {p.state.value} but queued={p.id in queued}")
            if p.id in treating and p.id in visited:
                out.append(f"patient {p.id} treated and visited at once")
            if not (0 <= p.mental_state <= 1 and 0 <= p.trust_robots <= 1
                    and -1 <= p.opinion_doctors <= 1 and -1 <= p.opinion_robots <= 1
                    and 0 <= p.severity <= 10):
                out.append(f"patient {p.id} has an out-of-range field")
        start = self.schedule.window_start
        end = start + self.schedule.window_length
        now = self.clock.minute_of_day
        for v in self.visitors:
            if v.state is VisitorState.VISITING and not (start < now and now - 1 + v.remaining <= end):
                out.append(f"visitor {v.id} present at minute {now} outside [{start}, {end}]")
        return out


def run_simulation(cfg: ExperimentConfig, seed: int | None = None, systems: Systems | None = None,
                   dump_network: bool = False) -> RunResult:
    seed = cfg.seed_base if seed is None else seed
    return Simulation(cfg, seed, systems=systems, dump_network=dump_network).run()
