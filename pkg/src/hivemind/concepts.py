"""Concept graph: ideas linked to attribute/action concepts and packed
networks through strength-graded mappings, plus context inference,
suggestion, and text-relevance scoring.

Mappings are create/delete only; changing a strength is unmap + map.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    DuplicateMapping,
    DuplicateName,
    EmptyEvidence,
    InvariantViolation,
    KindTargetMismatch,
    SelfMapping,
    UnknownEntity,
)
from .rng import Rng
from .store import Store

MAPPING_KINDS = ("attribute", "action", "ann")


@dataclass(frozen=True)
class StrengthGrade:
    mean: float
    std: float

    def __post_init__(self):
        if not (0.0 <= self.mean <= 1.0) or self.std < 0.0:
            raise InvariantViolation("strength mean must be in [0,1], std >= 0")


class ConceptGraph:
    def __init__(self, store: Store):
        self.store = store

    # ---- concepts -------------------------------------------------------

    def create_concept(self, name: str, description: str = "") -> dict:
        if not name:
            raise InvariantViolation("concept name must be non-empty")
        if self.find_by_name(name) is not None:
            raise DuplicateName(f"concept named {name!r} already exists")
        cid = self.store.save("concept", {"id": None, "name": name, "description": description})
        return self.store.get("concept", cid)

    def find_by_name(self, name: str) -> dict | None:
        lowered = name.lower()
        rows = self.store.load_bulk("concept", lambda d: d["name"].lower() == lowered).rows
        return rows[0] if rows else None

    def get_concept(self, concept_id: int, expand=()) -> dict:
        doc = self.store.get("concept", concept_id, expand)
        if doc is None:
            raise UnknownEntity(f"no concept with id {concept_id}")
        return doc

    def delete_concept(self, concept_id: int) -> bool:
        self.get_concept(concept_id)
        # bridge rows referencing the concept go with it; targets are untouched
        for m in self.store.load_bulk("mapping").rows:
            if m["source_id"] == concept_id or (m["kind"] != "ann" and m["target_id"] == concept_id):
                self.store.delete("mapping", m["id"])
        return self.store.delete("concept", concept_id)

    # ---- mappings -------------------------------------------------------

    def _find_mapping(self, source_id: int, kind: str, target_id: int) -> dict | None:
        rows = self.store.load_bulk(
            "mapping", {"source_id": source_id, "kind": kind, "target_id": target_id}).rows
        return rows[0] if rows else None

    def map_relation(self, source_id: int, kind: str, target_id: int,
                     strength: StrengthGrade) -> dict:
        if kind not in MAPPING_KINDS:
            raise KindTargetMismatch(f"unknown mapping kind {kind!r}")
        self.get_concept(source_id)
        if kind == "ann":
            if self.store.get("ann", target_id) is None:
                raise UnknownEntity(f"no ann package with id {target_id}")
        else:
            if source_id == target_id:
                raise SelfMapping("a concept cannot map to itself")
            if self.store.get("concept", target_id) is None:
                raise UnknownEntity(f"no concept with id {target_id}")
        if self._find_mapping(source_id, kind, target_id) is not None:
            raise DuplicateMapping(f"mapping ({source_id},{kind},{target_id}) already exists")
        mid = self.store.save("mapping", {
            "id": None, "source_id": source_id, "kind": kind,
            "target_id": target_id, "mean": strength.mean, "std": strength.std,
        })
        return self.store.get("mapping", mid)

    def unmap_relation(self, source_id: int, kind: str, target_id: int) -> bool:
        self.get_concept(source_id)
        m = self._find_mapping(source_id, kind, target_id)
        if m is None:
            return False
        return self.store.delete("mapping", m["id"])

    def mappings_of(self, source_id: int, kinds=("attribute", "action")) -> list[dict]:
        rows = [m for m in self.store.load_bulk("mapping").rows
                if m["source_id"] == source_id and m["kind"] in kinds]
        rows.sort(key=lambda m: m["id"])
        return rows

    # ---- strength & inference -------------------------------------------

    def sample_strength(self, mapping: dict, seed: int) -> float:
        if mapping["std"] == 0.0:
            return mapping["mean"]
        value = mapping["mean"] + mapping["std"] * Rng(seed).gauss()
        return min(1.0, max(0.0, value))

    def infer_context(self, evidence: list[tuple[int, float]]) -> list[tuple[int, float]]:
        """Ranks concepts by how much of their mapped strength mass the
        evidence covers: sum of mean*confidence over matched targets,
        normalized by the concept's total mapped mean."""
        if not evidence:
            raise EmptyEvidence("evidence must be non-empty")
        conf = {}
        for cid, c in evidence:
            if cid in conf:
                raise InvariantViolation("evidence concept ids must be distinct")
            if not (0.0 <= c <= 1.0):
                raise InvariantViolation("confidence must be in [0,1]")
            conf[cid] = c
        scores = []
        for concept in self.store.load_bulk("concept").rows:
            mappings = self.mappings_of(concept["id"])
            matched = [m for m in mappings if m["target_id"] in conf]
            if not matched:
                continue
            total = sum(m["mean"] for m in mappings)
            if total <= 0.0:
                continue
            score = sum(m["mean"] * conf[m["target_id"]] for m in matched) / total
            scores.append((concept["id"], score))
        scores.sort(key=lambda t: (-t[1], t[0]))
        return scores

    def suggest_next(self, concept_id: int, evidence: list[tuple[int, float]]) -> list[int]:
        self.get_concept(concept_id)
        present = {cid for cid, _ in evidence}
        candidates = [m for m in self.mappings_of(concept_id) if m["target_id"] not in present]
        candidates.sort(key=lambda m: (-m["mean"], m["target_id"]))
        return [m["target_id"] for m in candidates]

    # ---- text relevance -------------------------------------------------

    @staticmethod
    def _hits(name: str, tokens: list[str]) -> int:
        words = name.lower().split()
        n = len(words)
        if n == 0 or n > len(tokens):
            return 0
        return sum(1 for i in range(len(tokens) - n + 1) if tokens[i:i + n] == words)

    def score_text_relevance(self, concept_id: int, tokens: list[str]) -> float:
        concept = self.get_concept(concept_id)
        if not tokens:
            return 0.0
        score = float(self._hits(concept["name"], tokens))
        for m in self.mappings_of(concept_id):
            target = self.store.get("concept", m["target_id"])
            if target is not None:
                score += m["mean"] * self._hits(target["name"], tokens)
        return score / max(1, len(tokens))
