"""ANN package management: packed networks stored in canonical notation with
metadata (computed input/output sizes, optional output labels, retired flag).
"""

from __future__ import annotations

from . import ann
from .errors import DuplicateName, UnknownEntity
from .store import Store
from .training import TrainConfig, train


class AnnPackages:
    def __init__(self, store: Store):
        self.store = store

    def upload(self, name: str, payload: bytes | str, metadata: dict | None = None) -> dict:
        if isinstance(payload, str):
            payload = payload.encode("ascii")
        net = ann.decode_network(payload)
        canonical = ann.encode_network(net).decode("ascii")
        existing = self.store.load_bulk("ann", {"name": name}).rows
        if existing:
            if existing[0]["payload"] == canonical:
                return existing[0]
            raise DuplicateName(f"ann package named {name!r} exists with different contents")
        pid = self.store.save("ann", {
            "id": None,
            "name": name,
            "payload": canonical,
            "input_count": net.input_count,
            "output_count": net.output_count,
            "metadata": metadata or {},
            "retired": False,
        })
        return self.store.get("ann", pid)

    def get(self, package_id: int) -> dict:
        doc = self.store.get("ann", package_id)
        if doc is None:
            raise UnknownEntity(f"no ann package with id {package_id}")
        return doc

    def network(self, package_id: int) -> ann.NetworkSpec:
        return ann.decode_network(self.get(package_id)["payload"].encode("ascii"))

    def retire(self, package_id: int) -> dict:
        doc = self.get(package_id)
        doc["retired"] = True
        self.store.save("ann", doc)
        return doc

    def train_and_package(self, name: str, config: TrainConfig, dataset) -> dict:
        result = train(config, dataset)
        payload = ann.encode_network(result.network)
        return self.upload(name, payload, metadata={
            "trained": True,
            "epochs": result.epochs,
            "final_error": result.final_error,
            "converged": result.converged,
            "seed": config.seed,
        })
