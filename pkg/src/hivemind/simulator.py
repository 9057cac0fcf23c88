"""Deterministic tick-based world that exercises the full detection-response
cycle: simulated sensors feed adapter-bound detection nets, response-net
outputs move simulated motors, and every detection is reported back so the
efficacy ledger accumulates.

The simulator is a reference client: all reads and writes go through the
HTTP API (any httpx-compatible client object works, including the in-process
test client).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from . import ann
from .errors import InvalidSpec, ScenarioError, UnknownUnit
from .machines import GeoPoint, decode_argument

DEFAULT_GOTO_SPEED = 0.3  # meters per tick while executing a goto step


def local_to_geo(origin: GeoPoint, x: float, y: float, alt: float = 0.0) -> GeoPoint:
    """Local tangent-plane approximation anchored at the origin."""
    from .swarm import EARTH_RADIUS_M
    lat = origin.lat + math.degrees(y / EARTH_RADIUS_M)
    lon = origin.lon + math.degrees(x / (EARTH_RADIUS_M * math.cos(math.radians(origin.lat))))
    return GeoPoint(lat=lat, lon=lon, alt=origin.alt + alt)


def geo_to_local(origin: GeoPoint, point: GeoPoint) -> tuple[float, float]:
    from .swarm import EARTH_RADIUS_M
    y = math.radians(point.lat - origin.lat) * EARTH_RADIUS_M
    x = math.radians(point.lon - origin.lon) * EARTH_RADIUS_M * math.cos(math.radians(origin.lat))
    return x, y


@dataclass
class WorldEntity:
    id: int
    concept: str
    pos: tuple[float, float]
    features: tuple[float, ...]


@dataclass
class SimUnit:
    machine_id: int
    pos: tuple[float, float]
    heading: float
    sensor_range: float
    binding: dict
    detection_net: ann.NetworkSpec
    response_net: ann.NetworkSpec
    detection_ann_id: int
    output_labels: tuple[str, ...]
    motor_semantics: dict  # motor_id -> "drive" | "turn"
    arg_types: dict        # (motor_id, command, argument) -> type


@dataclass
class World:
    seed: int
    bounds: tuple[float, float, float, float]
    feature_dim: int
    entities: list[WorldEntity] = field(default_factory=list)
    units: list[SimUnit] = field(default_factory=list)
    tick: int = 0


def create_world(spec: dict, seed: int) -> World:
    bounds = tuple(spec.get("bounds", (0.0, 0.0, 100.0, 100.0)))
    if len(bounds) != 4 or bounds[0] >= bounds[2] or bounds[1] >= bounds[3]:
        raise InvalidSpec("bounds must be (x0, y0, x1, y1) with positive extent")
    dim = spec.get("feature_dim", 0)
    world = World(seed=seed, bounds=bounds, feature_dim=dim)
    for i, ent in enumerate(spec.get("entities", []), start=1):
        pos = tuple(ent["pos"])
        if not (bounds[0] <= pos[0] <= bounds[2] and bounds[1] <= pos[1] <= bounds[3]):
            raise InvalidSpec(f"entity {i} outside world bounds")
        features = tuple(float(v) for v in ent["features"])
        if len(features) != dim:
            raise InvalidSpec(f"entity {i} feature vector must have {dim} values")
        if any(not (0.0 <= v <= 1.0) for v in features):
            raise InvalidSpec(f"entity {i} features must lie in [0,1]")
        world.entities.append(WorldEntity(id=i, concept=ent["concept"], pos=pos, features=features))
    return world


def serialize_world(world: World) -> str:
    return json.dumps({
        "seed": world.seed, "tick": world.tick, "bounds": list(world.bounds),
        "entities": [{"id": e.id, "concept": e.concept, "pos": list(e.pos),
                      "features": list(e.features)} for e in world.entities],
        "units": [{"machine_id": u.machine_id, "pos": list(u.pos), "heading": u.heading}
                  for u in world.units],
    }, separators=(",", ":"))


def nearest_entity(world: World, unit: SimUnit) -> WorldEntity | None:
    best = None
    best_key = None
    for ent in world.entities:
        d = math.dist(ent.pos, unit.pos)
        if d > unit.sensor_range:
            continue
        key = (d, ent.id)
        if best_key is None or key < best_key:
            best, best_key = ent, key
    return best


def sense(world: World, unit: SimUnit) -> list[float]:
    """Feature vector of the nearest in-range entity routed through the
    binding's sensor map; zero vector when nothing is in range."""
    if unit not in world.units:
        raise UnknownUnit("unit does not belong to this world")
    ent = nearest_entity(world, unit)
    inputs = []
    for entry in unit.binding["sensor_map"]:
        channel = entry["channel"] + entry.get("channel_base", 0)
        if ent is None or channel >= len(ent.features):
            inputs.append(0.0)
        else:
            inputs.append(ent.features[channel])
    return inputs


def _clamp_pos(world: World, x: float, y: float) -> tuple[tuple[float, float], bool]:
    x0, y0, x1, y1 = world.bounds
    cx = min(x1, max(x0, x))
    cy = min(y1, max(y0, y))
    return (cx, cy), (cx != x or cy != y)


def step(world: World) -> list[dict]:
    """Advance one tick: sense -> detect -> respond -> move, per unit."""
    events = []
    world.tick += 1
    for idx, unit in enumerate(world.units):
        inputs = sense(world, unit)
        outputs = ann.evaluate(unit.detection_net, inputs)
        if not outputs or max(outputs) < 0.5:
            continue
        top = max(range(len(outputs)), key=lambda i: (outputs[i], -i))
        concept = unit.output_labels[top] if top < len(unit.output_labels) else str(top)
        ent = nearest_entity(world, unit)
        events.append({
            "tick": world.tick, "type": "detection", "unit": idx,
            "concept": concept, "confidence": outputs[top],
            "truth": ent.concept if ent else None,
            "ann_id": unit.detection_ann_id, "machine_id": unit.machine_id,
        })
        response = ann.evaluate(unit.response_net, outputs)
        for k, entry in enumerate(unit.binding["motor_map"]):
            if k >= len(response):
                break
            raw = response[k] * entry.get("scale", 1.0) + entry.get("offset", 0.0)
            key = (entry["motor_id"], entry["command"], entry["argument"])
            arg_type = unit.arg_types[key]
            from .machines import _encode_argument
            value = decode_argument(_encode_argument(raw, arg_type), arg_type)
            kind = unit.motor_semantics.get(entry["motor_id"], "other")
            if kind == "drive":
                dx = math.cos(unit.heading) * value / 1000.0
                dy = math.sin(unit.heading) * value / 1000.0
                pos, clamped = _clamp_pos(world, unit.pos[0] + dx, unit.pos[1] + dy)
                unit.pos = pos
                if clamped:
                    events.append({"tick": world.tick, "type": "clamped", "unit": idx,
                                   "pos": list(unit.pos)})
            elif kind == "turn":
                unit.heading = math.remainder(unit.heading + value, 2 * math.pi)
    return events


class ScenarioRunner:
    """Loads a scenario file, bootstraps the server over the API, and drives
    the script to completion, emitting a structured run log."""

    def __init__(self, client, scenario: dict, base_dir=".", seed: int = 0):
        self.client = client
        self.scenario = scenario
        self.base_dir = base_dir
        self.seed = seed
        self.log: list[dict] = []
        self.concept_ids: dict[str, int] = {}
        self.evidence: dict[str, float] = {}
        self.world: World | None = None
        self.budget = scenario.get("tick_budget", 500)
        self.origin = GeoPoint(**scenario.get("origin", {"lat": 0.0, "lon": 0.0, "alt": 0.0}))

    def _post(self, path: str, body: dict):
        resp = self.client.post(path, json=body)
        if resp.status_code >= 400:
            raise ScenarioError(f"POST {path} failed: {resp.status_code} {resp.text}")
        return resp.json()

    def _get(self, path: str):
        resp = self.client.get(path)
        if resp.status_code >= 400:
            raise ScenarioError(f"GET {path} failed: {resp.status_code} {resp.text}")
        return resp.json()

    def emit(self, **event):
        self.log.append(event)

    # ---- bootstrap ------------------------------------------------------

    def bootstrap(self):
        from .seedio import import_via_client, parse_seed_text
        from pathlib import Path

        seed_file = self.scenario.get("seed_file")
        if seed_file:
            text = (Path(self.base_dir) / seed_file).read_text()
            import_via_client(self.client, parse_seed_text(text))
        for row in self._get("/concepts"):
            self.concept_ids[row["name"]] = row["id"]

        self.ann_ids: dict[str, int] = {}
        for pkg in self.scenario.get("anns", []):
            doc = self._post("/interop/anns", {
                "name": pkg["name"], "payload": pkg["payload"],
                "metadata": {"output_labels": pkg.get("output_labels", [])}})
            self.ann_ids[pkg["name"]] = doc["id"]

        self.machine_ids: dict[str, int] = {}
        for machine in self.scenario.get("machines", []):
            doc = self._post("/machines", machine)
            self.machine_ids[machine["name"]] = doc["id"]

        for name, ann_name in self.scenario.get("concept_anns", {}).items():
            cid = self.concept_ids.get(name)
            if cid is None:
                raise ScenarioError(f"concept {name!r} not seeded")
            self._post(f"/concepts/{cid}/mappings", {
                "kind": "ann", "target_id": self.ann_ids[ann_name], "mean": 0.8, "std": 0.0})

        self.binding_ids = []
        self.bindings = []
        for b in self.scenario.get("bindings", []):
            machine_id = self.machine_ids[b["machine"]]
            machine = self._get(f"/machines/{machine_id}?expand=motors,motors.commands,"
                                "motors.commands.arguments,sensors")
            sensor_by_name = {s["name"]: s for s in machine["sensors"]}
            motor_by_name = {m["name"]: m for m in machine["motors"]}
            sensor_map = [{"sensor_id": sensor_by_name[e["sensor"]]["id"],
                           "channel": e["channel"],
                           "channel_base": e.get("channel_base", 0)}
                          for e in b["sensor_map"]]
            motor_map = [{"motor_id": motor_by_name[e["motor"]]["id"],
                          "command": e["command"], "argument": e["argument"],
                          "scale": e.get("scale", 1.0), "offset": e.get("offset", 0.0)}
                         for e in b["motor_map"]]
            body = {"detection_ann": self.ann_ids[b["detection_ann"]],
                    "response_ann": self.ann_ids[b["response_ann"]],
                    "sensor_map": sensor_map, "motor_map": motor_map}
            bid = self._post(f"/machines/{machine_id}/adapters", body)["id"]
            self.binding_ids.append(bid)
            body["machine_id"] = machine_id
            self.bindings.append((b, body, machine))

        world = create_world(self.scenario.get("world", {}), self.seed)
        for u in self.scenario.get("units", []):
            b_spec, binding, machine = self.bindings[u.get("binding", 0)]
            det_pkg = self.scenario["anns"][self._ann_index(b_spec["detection_ann"])]
            det_payload = self.client.get(
                f"/interop/anns/{self.ann_ids[b_spec['detection_ann']]}?format=packed").text
            resp_payload = self.client.get(
                f"/interop/anns/{self.ann_ids[b_spec['response_ann']]}?format=packed").text
            motor_semantics = {}
            arg_types = {}
            for motor in machine["motors"]:
                if "drive" in motor["name"]:
                    motor_semantics[motor["id"]] = "drive"
                elif "turn" in motor["name"]:
                    motor_semantics[motor["id"]] = "turn"
                for cmd in motor["commands"]:
                    for arg in cmd["arguments"]:
                        arg_types[(motor["id"], cmd["name"], arg["name"])] = arg["type"]
            unit = SimUnit(
                machine_id=self.machine_ids[u["machine"]],
                pos=tuple(u["pos"]), heading=u.get("heading", 0.0),
                sensor_range=u.get("sensor_range", 10.0),
                binding=binding,
                detection_net=ann.decode_network(det_payload.encode()),
                response_net=ann.decode_network(resp_payload.encode()),
                detection_ann_id=self.ann_ids[b_spec["detection_ann"]],
                output_labels=tuple(det_pkg.get("output_labels", [])),
                motor_semantics=motor_semantics, arg_types=arg_types)
            world.units.append(unit)
            geo = local_to_geo(self.origin, unit.pos[0], unit.pos[1])
            self._post(f"/machines/{unit.machine_id}/position",
                       {"lat": geo.lat, "lon": geo.lon, "alt": geo.alt})
        self.world = world
        self.emit(type="bootstrap", tick=0, seed=self.seed,
                  concepts=len(self.concept_ids), entities=len(world.entities),
                  units=len(world.units))

    def _ann_index(self, name: str) -> int:
        for i, pkg in enumerate(self.scenario.get("anns", [])):
            if pkg["name"] == name:
                return i
        raise ScenarioError(f"scenario references unknown ann {name!r}")

    # ---- execution ------------------------------------------------------

    def _tick_once(self) -> list[dict]:
        events = step(self.world)
        for event in events:
            if event["type"] != "detection":
                self.log.append(event)
                continue
            cid = self.concept_ids.get(event["concept"])
            if cid is not None:
                self._post("/detections", {
                    "concept_id": cid, "ann_id": event["ann_id"],
                    "machine_id": event["machine_id"],
                    "success": event["concept"] == event["truth"]})
            self.log.append({k: v for k, v in event.items()
                             if k not in ("ann_id", "machine_id")})
        unit = self.world.units[0]
        geo = local_to_geo(self.origin, unit.pos[0], unit.pos[1])
        self._post(f"/machines/{unit.machine_id}/position",
                   {"lat": geo.lat, "lon": geo.lon, "alt": geo.alt})
        return events

    def _wait_for_detection(self, concept: str, max_ticks: int) -> bool:
        waited = 0
        while waited < max_ticks and self.world.tick < self.budget:
            events = self._tick_once()
            waited += 1
            for event in events:
                if event["type"] == "detection" and event["concept"] == concept \
                        and event["truth"] == concept:
                    self.evidence[concept] = event["confidence"]
                    return True
        return False

    def _run_step(self, step_spec: dict) -> bool:
        op = step_spec["op"]
        self.emit(type="step", tick=self.world.tick, op=op,
                  concept=step_spec.get("concept"))
        if op == "detect":
            ok = self._wait_for_detection(step_spec["concept"],
                                          step_spec.get("max_ticks", self.budget))
            self.emit(type="detect_result", tick=self.world.tick,
                      concept=step_spec["concept"], found=ok)
            return ok
        if op == "suggest_and_detect":
            evidence = [{"concept_id": self.concept_ids[n], "confidence": c}
                        for n, c in sorted(self.evidence.items())]
            ranked = self._post("/infer", {"evidence": evidence})
            names = {v: k for k, v in self.concept_ids.items()}
            self.emit(type="inference", tick=self.world.tick,
                      ranking=[[names.get(r["concept_id"]), r["score"]] for r in ranked])
            target_id = self.concept_ids.get(step_spec["concept"])
            if target_id is None:
                raise ScenarioError(f"unknown concept {step_spec['concept']!r}")
            ev_param = ",".join(f"{self.concept_ids[n]}:{c}"
                                for n, c in sorted(self.evidence.items()))
            suggestions = self._get(f"/concepts/{target_id}/suggest?evidence={ev_param}")
            suggested = [names.get(s) for s in suggestions]
            self.emit(type="suggestions", tick=self.world.tick,
                      concept=step_spec["concept"], next=suggested)
            if not suggested:
                return False
            goal = suggested[0]
            ok = self._wait_for_detection(goal, step_spec.get("max_ticks", self.budget))
            self.emit(type="detect_result", tick=self.world.tick, concept=goal, found=ok)
            return ok
        if op == "goto":
            goal = GeoPoint(lat=step_spec["lat"], lon=step_spec["lon"],
                            alt=step_spec.get("alt", 0.0))
            tx, ty = geo_to_local(self.origin, goal)
            unit = self.world.units[0]
            speed = step_spec.get("speed", DEFAULT_GOTO_SPEED)
            while self.world.tick < self.budget:
                dx, dy = tx - unit.pos[0], ty - unit.pos[1]
                dist = math.hypot(dx, dy)
                if dist <= 0.05:
                    self.emit(type="goto_done", tick=self.world.tick, pos=list(unit.pos))
                    return True
                unit.heading = math.atan2(dy, dx)
                move = min(speed, dist)
                pos, _ = _clamp_pos(self.world,
                                    unit.pos[0] + math.cos(unit.heading) * move,
                                    unit.pos[1] + math.sin(unit.heading) * move)
                unit.pos = pos
                self._tick_once()
            return False
        if op == "exec":
            unit = self.world.units[0]
            value = step_spec.get("value", 0.0)
            if step_spec.get("motor") == "turn":
                unit.heading = math.remainder(unit.heading + value, 2 * math.pi)
            else:
                pos, _ = _clamp_pos(self.world,
                                    unit.pos[0] + math.cos(unit.heading) * value,
                                    unit.pos[1] + math.sin(unit.heading) * value)
                unit.pos = pos
            self._tick_once()
            self.emit(type="exec", tick=self.world.tick, motor=step_spec.get("motor"),
                      value=value)
            return True
        raise ScenarioError(f"unknown script op {op!r}")

    def run(self) -> dict:
        self.bootstrap()
        script = self.scenario.get("script", [])
        status = "done"
        if self.budget <= 0 and script:
            status = "failed(budget)"
        else:
            for step_spec in script:
                if self.world.tick >= self.budget and script:
                    status = "failed(budget)"
                    break
                if not self._run_step(step_spec):
                    status = "failed(budget)" if self.world.tick >= self.budget else "failed(step)"
                    break
        unit_pos = list(self.world.units[0].pos) if self.world.units else None
        distances = {e.concept: round(math.dist(e.pos, self.world.units[0].pos), 9)
                     for e in self.world.entities} if self.world.units else {}
        self.emit(type="end", tick=self.world.tick, status=status,
                  unit_pos=unit_pos, distances=distances,
                  evidence={k: self.evidence[k] for k in sorted(self.evidence)})
        return {"status": status, "ticks": self.world.tick, "log": self.log}


def run_scenario(client, scenario: dict, base_dir=".", seed: int = 0) -> dict:
    return ScenarioRunner(client, scenario, base_dir, seed).run()


def render_log(log: list[dict]) -> str:
    """Newline-delimited JSON, stable key order, for byte-identical replays."""
    return "".join(json.dumps(e, sort_keys=True, separators=(",", ":")) + "\n" for e in log)
