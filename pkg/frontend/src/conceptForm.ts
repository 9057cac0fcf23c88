import type { ApiClient } from "./api.js";
import type { Concept, MappingKind } from "./types.js";
import { FieldError, validateConceptName, validateMapping } from "./validation.js";

export interface PendingMapping {
  kind: MappingKind;
  targetId: number;
  mean: number;
  std: number;
}

/** Form model for the curation screen: a concept plus mappings staged before
 * submission. Validation runs client-side first; submission replays the exact
 * API sequence a direct caller would issue. */
export class ConceptForm {
  name = "";
  description = "";
  pending: PendingMapping[] = [];
  errors: FieldError[] = [];

  constructor(private readonly api: ApiClient) {}

  stageMapping(kind: string, targetId: number, mean: number, std: number): boolean {
    const errors = validateMapping({ kind, sourceId: -1, targetId, mean, std });
    if (errors.length > 0) {
      this.errors = errors;
      return false;
    }
    this.pending.push({ kind: kind as MappingKind, targetId, mean, std });
    this.errors = [];
    return true;
  }

  validate(): FieldError[] {
    this.errors = validateConceptName(this.name);
    return this.errors;
  }

  /** Create the concept, then its staged mappings, in order. Returns the
   * created concept id. Server errors propagate untouched. */
  async submit(): Promise<number> {
    if (this.validate().length > 0) {
      throw new Error(this.errors.map((e) => `${e.field}: ${e.message}`).join("; "));
    }
    const concept = await this.api.createConcept(this.name.trim(), this.description);
    for (const m of this.pending) {
      await this.api.createMapping(concept.id, m.kind, m.targetId, m.mean, m.std);
    }
    return concept.id;
  }
}

/** The full sequence a curation submit issues, for parity checks against
 * hand-written API calls. */
export async function readBack(api: ApiClient, conceptId: number): Promise<Concept> {
  return api.getConcept(conceptId, ["attributes", "actions", "anns"]);
}
