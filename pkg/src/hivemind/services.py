"""HTTP+JSON wire surface: Concept Service, Machine Service, Interop Service.

Handlers are thin delegates into the domain modules; they parse, dispatch,
and serialize, nothing else. Errors carry stable string codes shared with
the CLI and the UI.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import errors
from .concepts import ConceptGraph, StrengthGrade
from .machines import GeoPoint, MachineRegistry
from .packages import AnnPackages
from .store import Store
from .swarm import SwarmController
from .training import TrainConfig, train
from . import ann as ann_codec

STATUS_BY_CODE = {
    "malformed_notation": 400,
    "shape_mismatch": 400,
    "non_finite_value": 400,
    "invalid_network": 400,
    "bad_expand": 400,
    "invariant_violation": 400,
    "empty_evidence": 400,
    "self_mapping": 400,
    "kind_target_mismatch": 400,
    "parse_error": 400,
    "invalid_spec": 400,
    "no_implementation": 404,
    "unknown_entity": 404,
    "unknown_entity_type": 404,
    "unknown_unit": 404,
    "duplicate_name": 409,
    "duplicate_mapping": 409,
    "invalid_transition": 409,
    "cursor_exhausted": 409,
    "storage_failure": 500,
    "scenario_error": 400,
    "internal_error": 500,
}


def parse_expand(raw: str | None) -> list[str]:
    if not raw:
        return []
    return [p.strip() for p in raw.split(",")]


def parse_evidence_param(raw: str | None) -> list[tuple[int, float]]:
    """Query form: comma-separated `id` or `id:confidence` pairs."""
    if not raw:
        return []
    out = []
    for item in raw.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" in item:
            cid, conf = item.split(":", 1)
            out.append((int(cid), float(conf)))
        else:
            out.append((int(item), 1.0))
    return out


def _evidence_from_body(body: dict) -> list[tuple[int, float]]:
    return [(e["concept_id"], e.get("confidence", 1.0)) for e in body.get("evidence", [])]


def create_app(store: Store, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="hivemind", docs_url=None, redoc_url=None)
    app.state.store = store
    graph = ConceptGraph(store)
    registry = MachineRegistry(store)
    packages = AnnPackages(store)
    swarm = SwarmController(store)

    @app.exception_handler(errors.HivemindError)
    async def _domain_error(request: Request, exc: errors.HivemindError):
        return JSONResponse(
            status_code=STATUS_BY_CODE.get(exc.code, 500),
            content={"code": exc.code, "message": exc.message, "detail": exc.detail})

    # ---- Concept Service --------------------------------------------------

    @app.post("/concepts", status_code=201)
    async def create_concept(body: dict):
        return graph.create_concept(body.get("name", ""), body.get("description", ""))

    @app.get("/concepts")
    async def list_concepts(name: str | None = None, expand: str | None = None):
        paths = parse_expand(expand)
        if name is not None:
            lowered = name.lower()
            flt = lambda d: d["name"].lower() == lowered
        else:
            flt = None
        return store.load_bulk("concept", flt, paths).rows

    @app.get("/concepts/{concept_id}")
    async def get_concept(concept_id: int, expand: str | None = None):
        return graph.get_concept(concept_id, parse_expand(expand))

    @app.delete("/concepts/{concept_id}")
    async def delete_concept(concept_id: int):
        return {"deleted": graph.delete_concept(concept_id)}

    @app.post("/concepts/{concept_id}/mappings", status_code=201)
    async def create_mapping(concept_id: int, body: dict):
        strength = StrengthGrade(mean=body.get("mean", 0.5), std=body.get("std", 0.0))
        return graph.map_relation(concept_id, body.get("kind", ""), body.get("target_id"), strength)

    @app.delete("/concepts/{concept_id}/mappings/{kind}/{target_id}")
    async def delete_mapping(concept_id: int, kind: str, target_id: int):
        return {"removed": graph.unmap_relation(concept_id, kind, target_id)}

    @app.post("/infer")
    async def infer(body: dict):
        ranked = graph.infer_context(_evidence_from_body(body))
        return [{"concept_id": cid, "score": score} for cid, score in ranked]

    @app.get("/concepts/{concept_id}/suggest")
    async def suggest(concept_id: int, evidence: str | None = None):
        return graph.suggest_next(concept_id, parse_evidence_param(evidence))

    @app.post("/concepts/{concept_id}/relevance")
    async def relevance(concept_id: int, body: dict):
        return {"score": graph.score_text_relevance(concept_id, body.get("tokens", []))}

    # ---- Machine Service --------------------------------------------------

    @app.post("/machines", status_code=201)
    async def register_machine(body: dict):
        return registry.register_machine(body)

    @app.get("/machines")
    async def list_machines(expand: str | None = None):
        return store.load_bulk("machine", None, parse_expand(expand)).rows

    @app.get("/machines/{machine_id}")
    async def get_machine(machine_id: int, expand: str | None = None):
        return registry.get_machine(machine_id, parse_expand(expand))

    @app.post("/machines/{machine_id}/adapters", status_code=201)
    async def bind_adapter(machine_id: int, body: dict):
        binding = dict(body)
        binding["machine_id"] = machine_id
        return {"id": registry.bind_adapter(binding)}

    @app.post("/machines/{machine_id}/goal", status_code=201)
    async def set_goal(machine_id: int, body: dict):
        goal = GeoPoint(lat=body["lat"], lon=body["lon"], alt=body.get("alt", 0.0))
        return swarm.set_goal(machine_id, goal)

    @app.post("/machines/{machine_id}/position")
    async def report_position(machine_id: int, body: dict):
        machine = registry.get_machine(machine_id)
        machine["location"] = {"lat": body["lat"], "lon": body["lon"],
                               "alt": body.get("alt", 0.0)}
        GeoPoint(**machine["location"])
        store.save("machine", machine)
        return {"ok": True}

    @app.get("/swarm/positions")
    async def swarm_positions():
        return [{"machine_id": m["id"], "name": m["name"], **m["location"]}
                for m in store.load_bulk("machine").rows]

    # ---- Interop Service ---------------------------------------------------

    @app.post("/interop/anns", status_code=201)
    async def upload_ann(body: dict):
        doc = packages.upload(body.get("name", ""), body.get("payload", ""),
                              body.get("metadata"))
        return {"id": doc["id"], "name": doc["name"],
                "in": doc["input_count"], "out": doc["output_count"]}

    @app.get("/interop/anns/{package_id}")
    async def get_ann(package_id: int, format: str = "packed"):
        doc = packages.get(package_id)
        if format == "packed":
            return Response(content=doc["payload"].encode("ascii"), media_type="text/plain")
        if format == "decoded":
            net = ann_codec.decode_network(doc["payload"].encode("ascii"))
            return {
                "id": doc["id"], "name": doc["name"], "version": net.version,
                "activation": net.activation, "input_count": net.input_count,
                "metadata": doc["metadata"], "retired": doc["retired"],
                "layers": [[{"t": n.threshold, "w": list(n.weights)} for n in layer]
                           for layer in net.layers],
            }
        raise errors.InvariantViolation(f"unknown format {format!r}")

    @app.post("/interop/anns/{package_id}/retire")
    async def retire_ann(package_id: int):
        doc = packages.retire(package_id)
        return {"id": doc["id"], "retired": doc["retired"]}

    @app.post("/interop/train", status_code=201)
    async def interop_train(body: dict):
        config = TrainConfig(
            topology=tuple(body["topology"]),
            learning_rate=body.get("learning_rate", 0.5),
            max_epochs=body.get("max_epochs", 20000),
            target_error=body.get("target_error", 0.01),
            seed=body.get("seed", 1))
        dataset = [(pair[0], pair[1]) for pair in body["dataset"]]
        if body.get("name"):
            doc = packages.train_and_package(body["name"], config, dataset)
            return {"id": doc["id"], "name": doc["name"], "metadata": doc["metadata"]}
        result = train(config, dataset)
        return {"payload": ann_codec.encode_network(result.network).decode("ascii"),
                "epochs": result.epochs, "final_error": result.final_error,
                "converged": result.converged}

    @app.post("/detections", status_code=201)
    async def report_detection(body: dict):
        rec = swarm.record_outcome(
            body["concept_id"], body["ann_id"], body["machine_id"], bool(body["success"]))
        return rec

    @app.post("/swarm/tasks", status_code=201)
    async def submit_task(body: dict):
        return swarm.submit_task(body.get("script", []), body.get("concepts", []))

    @app.get("/swarm/tasks/{task_id}")
    async def get_task(task_id: int):
        return swarm.get_task(task_id)

    @app.get("/swarm/outbox/{machine_id}")
    async def drain_outbox(machine_id: int):
        return swarm.drain_outbox(machine_id)

    @app.post("/swarm/assignments/{assignment_id}/status")
    async def advance_assignment(assignment_id: int, body: dict):
        return swarm.advance_assignment(assignment_id, body.get("status", ""))

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
