"""Swarm coordination: efficacy ledger for concept/ANN/machine mappings,
best-implementation selection, task dispatch with per-machine outboxes, and
great-circle goal planning.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .concepts import ConceptGraph
from .errors import InvalidTransition, InvariantViolation, NoImplementation, UnknownEntity
from .machines import GeoPoint
from .store import Store

EARTH_RADIUS_M = 6371008.8
ASSIGNMENT_STATUSES = ("queued", "delivered", "running", "done", "failed")
STEP_OPS = ("goto", "detect", "exec", "suggest_and_detect")


def efficacy_score(attempts: int, successes: int) -> float:
    """Laplace-smoothed success rate; unrecorded pairs score 0.5."""
    return (successes + 1) / (attempts + 2)


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    la1, lo1, la2, lo2 = map(math.radians, (a.lat, a.lon, b.lat, b.lon))
    s = math.sin((la2 - la1) / 2) ** 2 + math.cos(la1) * math.cos(la2) * math.sin((lo2 - lo1) / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(s)))


def plan_goto(current: GeoPoint, goal: GeoPoint, step_m: float) -> list[GeoPoint]:
    """Great-circle interpolation into ceil(d/step_m) segments; the final
    waypoint is the goal exactly, altitude interpolates linearly."""
    if step_m <= 0:
        raise InvariantViolation("step_m must be positive")
    d = haversine_m(current, goal)
    if d == 0.0:
        return [goal]
    n = math.ceil(d / step_m)
    la1, lo1, la2, lo2 = map(math.radians, (current.lat, current.lon, goal.lat, goal.lon))
    # spherical linear interpolation along the great circle
    ang = d / EARTH_RADIUS_M
    sin_ang = math.sin(ang)
    waypoints = []
    for i in range(1, n + 1):
        f = i / n
        if i == n:
            waypoints.append(goal)
            break
        a = math.sin((1 - f) * ang) / sin_ang
        b = math.sin(f * ang) / sin_ang
        x = a * math.cos(la1) * math.cos(lo1) + b * math.cos(la2) * math.cos(lo2)
        y = a * math.cos(la1) * math.sin(lo1) + b * math.cos(la2) * math.sin(lo2)
        z = a * math.sin(la1) + b * math.sin(la2)
        lat = math.degrees(math.atan2(z, math.sqrt(x * x + y * y)))
        lon = math.degrees(math.atan2(y, x))
        alt = current.alt + f * (goal.alt - current.alt)
        waypoints.append(GeoPoint(lat=lat, lon=lon, alt=alt))
    return waypoints


def validate_script(steps: list[dict]):
    if not steps:
        raise InvariantViolation("task script must have at least one step")
    for step in steps:
        if step.get("op") not in STEP_OPS:
            raise InvariantViolation(f"unknown script op {step.get('op')!r}")


class SwarmController:
    def __init__(self, store: Store):
        self.store = store
        self.graph = ConceptGraph(store)

    # ---- efficacy ledger -----------------------------------------------

    def _find_record(self, concept_id: int, ann_id: int, machine_id: int) -> dict | None:
        rows = self.store.load_bulk("efficacy", {
            "concept_id": concept_id, "ann_id": ann_id, "machine_id": machine_id}).rows
        return rows[0] if rows else None

    def record_outcome(self, concept_id: int, ann_id: int, machine_id: int,
                       success: bool) -> dict:
        if self.store.get("concept", concept_id) is None:
            raise UnknownEntity(f"no concept with id {concept_id}")
        if self.store.get("ann", ann_id) is None:
            raise UnknownEntity(f"no ann package with id {ann_id}")
        if self.store.get("machine", machine_id) is None:
            raise UnknownEntity(f"no machine with id {machine_id}")
        rec = self._find_record(concept_id, ann_id, machine_id) or {
            "id": None, "concept_id": concept_id, "ann_id": ann_id,
            "machine_id": machine_id, "attempts": 0, "successes": 0,
            "last_outcome_at": 0,
        }
        rec["attempts"] += 1
        if success:
            rec["successes"] += 1
        rec["last_outcome_at"] = self.store.allocate_id()  # monotonic logical clock
        rid = self.store.save("efficacy", rec)
        return self.store.get("efficacy", rid)

    # ---- selection ------------------------------------------------------

    def select_implementation(self, concept_name: str, machine_filter=None) -> tuple[int, int]:
        concept = self.graph.find_by_name(concept_name)
        if concept is None:
            raise UnknownEntity(f"no concept named {concept_name!r}")
        ann_ids = []
        for m in self.graph.mappings_of(concept["id"], kinds=("ann",)):
            package = self.store.get("ann", m["target_id"])
            if package is not None and not package.get("retired"):
                ann_ids.append(m["target_id"])
        if not ann_ids:
            raise NoImplementation(f"concept {concept_name!r} has no usable ann mapping")
        machines = self.store.load_bulk("machine", machine_filter).rows
        machine_ids = [m["id"] for m in machines]
        if not machine_ids:
            raise NoImplementation("no machine matches the filter")
        best = None
        best_score = -1.0
        for ann_id, machine_id in itertools.product(sorted(ann_ids), sorted(machine_ids)):
            rec = self._find_record(concept["id"], ann_id, machine_id)
            score = efficacy_score(rec["attempts"], rec["successes"]) if rec else 0.5
            if score > best_score:
                best, best_score = (ann_id, machine_id), score
        return best

    # ---- tasks & outboxes ----------------------------------------------

    def submit_task(self, script: list[dict], concepts: list[str]) -> list[dict]:
        validate_script(script)
        task_id = self.store.save("task", {"id": None, "steps": script, "concepts": concepts})
        per_machine: dict[int, list[int]] = {}
        for name in concepts:
            ann_id, machine_id = self.select_implementation(name)
            per_machine.setdefault(machine_id, [])
            if ann_id not in per_machine[machine_id]:
                per_machine[machine_id].append(ann_id)
        assignments = []
        for machine_id in sorted(per_machine):
            aid = self.store.save("assignment", {
                "id": None, "task_id": task_id, "machine_id": machine_id,
                "ann_ids": per_machine[machine_id], "status": "queued",
            })
            assignments.append(self.store.get("assignment", aid))
        return assignments

    def get_task(self, task_id: int) -> dict:
        task = self.store.get("task", task_id)
        if task is None:
            raise UnknownEntity(f"no task with id {task_id}")
        task["assignments"] = self.store.load_bulk("assignment", {"task_id": task_id}).rows
        return task

    def advance_assignment(self, assignment_id: int, status: str) -> dict:
        if status not in ASSIGNMENT_STATUSES:
            raise InvalidTransition(f"unknown status {status!r}")
        doc = self.store.get("assignment", assignment_id)
        if doc is None:
            raise UnknownEntity(f"no assignment with id {assignment_id}")
        order = ASSIGNMENT_STATUSES.index
        current = doc["status"]
        if status == "failed":
            if current in ("done", "failed"):
                raise InvalidTransition(f"cannot fail a {current} assignment")
        elif order(status) <= order(current):
            raise InvalidTransition(f"cannot move {current} -> {status}")
        doc["status"] = status
        self.store.save("assignment", doc)
        return doc

    def drain_outbox(self, machine_id: int) -> list[dict]:
        """Returns queued assignments for the machine, marking them delivered."""
        if self.store.get("machine", machine_id) is None:
            raise UnknownEntity(f"no machine with id {machine_id}")
        queued = self.store.load_bulk(
            "assignment", {"machine_id": machine_id, "status": "queued"}).rows
        out = []
        for a in queued:
            out.append(self.advance_assignment(a["id"], "delivered"))
        return out

    def set_goal(self, machine_id: int, goal: GeoPoint) -> list[dict]:
        """A bare geo-goal dispatches the default action set: [goto(goal)]."""
        if self.store.get("machine", machine_id) is None:
            raise UnknownEntity(f"no machine with id {machine_id}")
        task_id = self.store.save("task", {
            "id": None,
            "steps": [{"op": "goto", "lat": goal.lat, "lon": goal.lon, "alt": goal.alt}],
            "concepts": [],
        })
        aid = self.store.save("assignment", {
            "id": None, "task_id": task_id, "machine_id": machine_id,
            "ann_ids": [], "status": "queued",
        })
        return [self.store.get("assignment", aid)]
