import type { MappingKind } from "./types.js";

/** Client-side mirrors of the server's invariants. The server remains the
 * authority; these only catch bad input before a round trip. */

export interface FieldError {
  field: string;
  message: string;
}

export function validateConceptName(name: string): FieldError[] {
  const errors: FieldError[] = [];
  if (name.trim().length === 0) {
    errors.push({ field: "name", message: "name must not be empty" });
  }
  return errors;
}

export const MAPPING_KINDS: MappingKind[] = ["attribute", "action", "ann"];

export interface MappingDraft {
  kind: string;
  sourceId: number;
  targetId: number;
  mean: number;
  std: number;
}

export function validateMapping(draft: MappingDraft): FieldError[] {
  const errors: FieldError[] = [];
  if (!MAPPING_KINDS.includes(draft.kind as MappingKind)) {
    errors.push({ field: "kind", message: `kind must be one of ${MAPPING_KINDS.join(", ")}` });
  }
  if (!Number.isFinite(draft.mean) || draft.mean < 0 || draft.mean > 1) {
    errors.push({ field: "mean", message: "mean must lie in [0, 1]" });
  }
  if (!Number.isFinite(draft.std) || draft.std < 0) {
    errors.push({ field: "std", message: "std must be >= 0" });
  }
  if (!Number.isInteger(draft.targetId) || draft.targetId <= 0) {
    errors.push({ field: "target", message: "pick a target" });
  } else if (draft.kind !== "ann" && draft.targetId === draft.sourceId) {
    errors.push({ field: "target", message: "a concept cannot map to itself" });
  }
  return errors;
}
