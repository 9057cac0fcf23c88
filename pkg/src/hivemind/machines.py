"""Machine registry: machines with motors/sensors/commands, plus adapter
bindings that wire sensor channels into a detection net and response-net
outputs into motor command arguments.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

from . import ann
from .errors import DuplicateName, InvariantViolation, ShapeMismatch, UnknownEntity
from .store import Store

ARG_TYPES = ("int8", "int16", "float32")
ARG_SIZES = {"int8": 1, "int16": 2, "float32": 4}
ARG_RANGES = {"int8": (-128, 127), "int16": (-32768, 32767)}
MODALITIES = ("visual", "audio", "pressure", "other")
FLT32_MAX = 3.4028234663852886e38


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float
    alt: float = 0.0

    def __post_init__(self):
        if not (-90.0 <= self.lat <= 90.0) or not (-180.0 <= self.lon <= 180.0):
            raise InvariantViolation("latitude/longitude out of range")


@dataclass(frozen=True)
class MotorCommand:
    motor_id: int
    command: str
    argument: str
    data: bytes


def _check_machine_def(doc: dict):
    if not doc.get("name"):
        raise InvariantViolation("machine name must be non-empty")
    motor_names = [m["name"] for m in doc.get("motors", [])]
    if len(set(motor_names)) != len(motor_names):
        raise InvariantViolation("motor names must be unique within a machine")
    sensor_names = [s["name"] for s in doc.get("sensors", [])]
    if len(set(sensor_names)) != len(sensor_names):
        raise InvariantViolation("sensor names must be unique within a machine")
    for motor in doc.get("motors", []):
        cmd_names = [c["name"] for c in motor.get("commands", [])]
        if len(set(cmd_names)) != len(cmd_names):
            raise InvariantViolation(f"command names must be unique on motor {motor['name']!r}")
        for cmd in motor.get("commands", []):
            for arg in cmd.get("arguments", []):
                if arg["type"] not in ARG_TYPES:
                    raise InvariantViolation(f"unknown argument type {arg['type']!r}")
    for sensor in doc.get("sensors", []):
        if sensor.get("modality", "other") not in MODALITIES:
            raise InvariantViolation(f"unknown sensor modality {sensor.get('modality')!r}")
        if sensor.get("channel_count", 1) < 1:
            raise InvariantViolation("sensor channel_count must be >= 1")
    GeoPoint(**doc.get("location", {"lat": 0.0, "lon": 0.0, "alt": 0.0}))


class MachineRegistry:
    def __init__(self, store: Store):
        self.store = store

    # ---- machines -------------------------------------------------------

    def register_machine(self, definition: dict) -> dict:
        _check_machine_def(definition)
        existing = self.store.load_bulk(
            "machine", lambda d: d["name"].lower() == definition["name"].lower()).rows
        if existing:
            raise DuplicateName(f"machine named {definition['name']!r} already exists")
        doc = {
            "id": None,
            "name": definition["name"],
            "platform": definition.get("platform", ""),
            "location": dict(definition.get("location", {"lat": 0.0, "lon": 0.0, "alt": 0.0})),
            "motors": [],
            "sensors": [],
        }
        for motor in definition.get("motors", []):
            doc["motors"].append({
                "id": self.store.allocate_id(),
                "name": motor["name"],
                "commands": [{
                    "name": cmd["name"],
                    "arguments": [{"name": a["name"], "type": a["type"]}
                                  for a in cmd.get("arguments", [])],
                } for cmd in motor.get("commands", [])],
            })
        for sensor in definition.get("sensors", []):
            doc["sensors"].append({
                "id": self.store.allocate_id(),
                "name": sensor["name"],
                "modality": sensor.get("modality", "other"),
                "channel_count": sensor.get("channel_count", 1),
            })
        mid = self.store.save("machine", doc)
        return self.get_machine(mid, expand=("motors", "motors.commands",
                                             "motors.commands.arguments", "sensors"))

    def get_machine(self, machine_id: int, expand=()) -> dict:
        doc = self.store.get("machine", machine_id, expand)
        if doc is None:
            raise UnknownEntity(f"no machine with id {machine_id}")
        return doc

    def _full(self, machine_id: int) -> dict:
        return self.get_machine(machine_id, expand=(
            "motors", "motors.commands", "motors.commands.arguments", "sensors"))

    # ---- adapter bindings ----------------------------------------------

    def bind_adapter(self, binding: dict) -> int:
        machine = self._full(binding["machine_id"])
        det = self.store.get("ann", binding["detection_ann"])
        resp = self.store.get("ann", binding["response_ann"])
        if det is None or resp is None:
            raise UnknownEntity("detection or response ann package not found")
        det_net = ann.decode_network(det["payload"].encode())
        resp_net = ann.decode_network(resp["payload"].encode())
        sensor_map = binding["sensor_map"]
        if len(sensor_map) != det_net.input_count:
            raise ShapeMismatch(
                f"sensor_map has {len(sensor_map)} entries, detection net wants "
                f"{det_net.input_count} inputs", {"which": "sensor_map"})
        if det_net.output_count != resp_net.input_count:
            raise ShapeMismatch(
                f"detection net emits {det_net.output_count} outputs, response net wants "
                f"{resp_net.input_count} inputs", {"which": "detection_to_response"})
        sensors = {s["id"]: s for s in machine["sensors"]}
        for entry in sensor_map:
            sensor = sensors.get(entry["sensor_id"])
            if sensor is None:
                raise UnknownEntity(f"machine has no sensor {entry['sensor_id']}")
            if not (0 <= entry["channel"] < sensor["channel_count"]):
                raise ShapeMismatch("sensor channel index out of range", {"which": "sensor_map"})
        motor_map = binding["motor_map"]
        if len(motor_map) > resp_net.output_count:
            raise ShapeMismatch("motor_map longer than response net output", {"which": "motor_map"})
        motors = {m["id"]: m for m in machine["motors"]}
        for entry in motor_map:
            motor = motors.get(entry["motor_id"])
            if motor is None:
                raise UnknownEntity(f"machine has no motor {entry['motor_id']}")
            cmd = next((c for c in motor["commands"] if c["name"] == entry["command"]), None)
            if cmd is None:
                raise UnknownEntity(f"motor has no command {entry['command']!r}")
            arg = next((a for a in cmd["arguments"] if a["name"] == entry["argument"]), None)
            if arg is None:
                raise UnknownEntity(f"command has no argument {entry['argument']!r}")
        doc = {
            "id": None,
            "machine_id": binding["machine_id"],
            "detection_ann": binding["detection_ann"],
            "response_ann": binding["response_ann"],
            "sensor_map": [dict(e) for e in sensor_map],
            "motor_map": [dict(e) for e in motor_map],
        }
        return self.store.save("binding", doc)

    def get_binding(self, binding_id: int) -> dict:
        doc = self.store.get("binding", binding_id)
        if doc is None:
            raise UnknownEntity(f"no adapter binding with id {binding_id}")
        return doc

    # ---- motor byte-code ------------------------------------------------

    def encode_motor_command(self, binding: dict, response_output: list[float]) -> list[MotorCommand]:
        machine = self._full(binding["machine_id"])
        motors = {m["id"]: m for m in machine["motors"]}
        commands = []
        for k, entry in enumerate(binding["motor_map"]):
            if k >= len(response_output):
                raise ShapeMismatch(
                    f"response output has {len(response_output)} values, motor_map needs "
                    f"{len(binding['motor_map'])}")
            motor = motors[entry["motor_id"]]
            cmd = next(c for c in motor["commands"] if c["name"] == entry["command"])
            arg = next(a for a in cmd["arguments"] if a["name"] == entry["argument"])
            raw = response_output[k] * entry.get("scale", 1.0) + entry.get("offset", 0.0)
            commands.append(MotorCommand(
                motor_id=entry["motor_id"], command=entry["command"],
                argument=entry["argument"], data=_encode_argument(raw, arg["type"])))
        return commands


def _encode_argument(raw: float, arg_type: str) -> bytes:
    if arg_type == "float32":
        clamped = min(FLT32_MAX, max(-FLT32_MAX, raw))
        return struct.pack("<f", clamped)
    lo, hi = ARG_RANGES[arg_type]
    value = int(round(raw))  # round() is half-to-even
    if math.isnan(raw):
        value = 0
    value = min(hi, max(lo, value))
    fmt = "<b" if arg_type == "int8" else "<h"
    return struct.pack(fmt, value)


def decode_argument(data: bytes, arg_type: str) -> float:
    """Inverse of the byte-code encoding; the simulator's motor semantics."""
    if arg_type == "float32":
        return struct.unpack("<f", data)[0]
    fmt = "<b" if arg_type == "int8" else "<h"
    return float(struct.unpack(fmt, data)[0])
