"""Line-oriented seed files: the console loader's input format.

    C|name|description
    M|source|kind|target|mean|std
    MA|name|platform|lat|lon|alt
    MO|motor|command|arg:type,arg:type
    SE|name|modality|channel_count

MO and SE lines attach to the most recent MA line. Blank lines and lines
starting with '#' are ignored. Imports are idempotent: existing entities are
counted as skipped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseError


@dataclass
class SeedOps:
    concepts: list[tuple[str, str]] = field(default_factory=list)
    mappings: list[tuple[str, str, str, float, float]] = field(default_factory=list)
    machines: list[dict] = field(default_factory=list)


@dataclass
class ImportReport:
    created: dict = field(default_factory=lambda: {"concepts": 0, "mappings": 0, "machines": 0})
    skipped: dict = field(default_factory=lambda: {"concepts": 0, "mappings": 0, "machines": 0})
    errors: list = field(default_factory=list)


def parse_seed_text(text: str) -> SeedOps:
    ops = SeedOps()
    current_machine = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("|")
        tag = parts[0]
        try:
            if tag == "C":
                name, description = parts[1], parts[2] if len(parts) > 2 else ""
                if not name:
                    raise ValueError("empty concept name")
                ops.concepts.append((name, description))
            elif tag == "M":
                source, kind, target = parts[1], parts[2], parts[3]
                mean, std = float(parts[4]), float(parts[5])
                if kind not in ("attribute", "action", "ann"):
                    raise ValueError(f"bad mapping kind {kind!r}")
                ops.mappings.append((source, kind, target, mean, std))
            elif tag == "MA":
                current_machine = {
                    "name": parts[1], "platform": parts[2] if len(parts) > 2 else "",
                    "location": {"lat": float(parts[3]) if len(parts) > 3 else 0.0,
                                 "lon": float(parts[4]) if len(parts) > 4 else 0.0,
                                 "alt": float(parts[5]) if len(parts) > 5 else 0.0},
                    "motors": [], "sensors": []}
                ops.machines.append(current_machine)
            elif tag == "MO":
                if current_machine is None:
                    raise ValueError("MO line before any MA line")
                motor_name, command = parts[1], parts[2]
                args = []
                if len(parts) > 3 and parts[3]:
                    for spec in parts[3].split(","):
                        arg_name, arg_type = spec.split(":")
                        args.append({"name": arg_name, "type": arg_type})
                motor = next((m for m in current_machine["motors"] if m["name"] == motor_name), None)
                if motor is None:
                    motor = {"name": motor_name, "commands": []}
                    current_machine["motors"].append(motor)
                motor["commands"].append({"name": command, "arguments": args})
            elif tag == "SE":
                if current_machine is None:
                    raise ValueError("SE line before any MA line")
                current_machine["sensors"].append({
                    "name": parts[1],
                    "modality": parts[2] if len(parts) > 2 else "other",
                    "channel_count": int(parts[3]) if len(parts) > 3 else 1})
            else:
                raise ValueError(f"unknown record tag {tag!r}")
        except (IndexError, ValueError) as exc:
            raise ParseError(f"line {lineno}: {exc}", lineno) from None
    return ops


def import_via_client(client, ops: SeedOps) -> ImportReport:
    """Replays the parsed operations through the HTTP service methods."""
    report = ImportReport()
    ids: dict[str, int] = {}

    def concept_id(name: str) -> int | None:
        if name in ids:
            return ids[name]
        rows = client.get("/concepts", params={"name": name}).json()
        if rows:
            ids[name] = rows[0]["id"]
            return ids[name]
        return None

    for name, description in ops.concepts:
        resp = client.post("/concepts", json={"name": name, "description": description})
        if resp.status_code == 201:
            ids[name] = resp.json()["id"]
            report.created["concepts"] += 1
        elif resp.status_code == 409:
            report.skipped["concepts"] += 1
        else:
            report.errors.append(f"concept {name!r}: {resp.text}")

    for source, kind, target, mean, std in ops.mappings:
        sid, tid = concept_id(source), concept_id(target)
        if sid is None or tid is None:
            report.errors.append(f"mapping {source}->{target}: unknown concept")
            continue
        resp = client.post(f"/concepts/{sid}/mappings",
                           json={"kind": kind, "target_id": tid, "mean": mean, "std": std})
        if resp.status_code == 201:
            report.created["mappings"] += 1
        elif resp.status_code == 409:
            report.skipped["mappings"] += 1
        else:
            report.errors.append(f"mapping {source}->{target}: {resp.text}")

    for machine in ops.machines:
        resp = client.post("/machines", json=machine)
        if resp.status_code == 201:
            report.created["machines"] += 1
        elif resp.status_code == 409:
            report.skipped["machines"] += 1
        else:
            report.errors.append(f"machine {machine['name']!r}: {resp.text}")

    return report


def import_direct(store, ops: SeedOps) -> ImportReport:
    """Offline importer writing straight to the store (the --direct flag)."""
    from .concepts import ConceptGraph, StrengthGrade
    from .machines import MachineRegistry
    from . import errors as err

    graph = ConceptGraph(store)
    registry = MachineRegistry(store)
    report = ImportReport()
    for name, description in ops.concepts:
        try:
            graph.create_concept(name, description)
            report.created["concepts"] += 1
        except err.DuplicateName:
            report.skipped["concepts"] += 1
    for source, kind, target, mean, std in ops.mappings:
        src = graph.find_by_name(source)
        tgt = graph.find_by_name(target)
        if src is None or tgt is None:
            report.errors.append(f"mapping {source}->{target}: unknown concept")
            continue
        try:
            graph.map_relation(src["id"], kind, tgt["id"], StrengthGrade(mean, std))
            report.created["mappings"] += 1
        except err.DuplicateMapping:
            report.skipped["mappings"] += 1
    for machine in ops.machines:
        try:
            registry.register_machine(machine)
            report.created["machines"] += 1
        except err.DuplicateName:
            report.skipped["machines"] += 1
    return report
