import type {
  ApiError,
  Assignment,
  Concept,
  MachinePosition,
  MappingKind,
  Task,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Thrown for any non-2xx response; carries the server's error code verbatim. */
export class ServerError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiError,
  ) {
    super(`${body.code}: ${body.message}`);
  }
}

/** Thin typed wrapper over the documented JSON endpoints. No business logic:
 * every method is one request to one endpoint. */
export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "content-type": "application/json" } };
    if (body !== undefined) init.body = JSON.stringify(body);
    const resp = await this.fetchFn(this.base + path, init);
    const text = await resp.text();
    const parsed = text ? JSON.parse(text) : null;
    if (!resp.ok) {
      throw new ServerError(resp.status, parsed as ApiError);
    }
    return parsed as T;
  }

  listConcepts(expand: string[] = []): Promise<Concept[]> {
    const query = expand.length ? `?expand=${expand.join(",")}` : "";
    return this.request("GET", `/concepts${query}`);
  }

  getConcept(id: number, expand: string[] = []): Promise<Concept> {
    const query = expand.length ? `?expand=${expand.join(",")}` : "";
    return this.request("GET", `/concepts/${id}${query}`);
  }

  createConcept(name: string, description: string): Promise<Concept> {
    return this.request("POST", "/concepts", { name, description });
  }

  deleteConcept(id: number): Promise<{ removed: boolean }> {
    return this.request("DELETE", `/concepts/${id}`);
  }

  createMapping(
    sourceId: number,
    kind: MappingKind,
    targetId: number,
    mean: number,
    std: number,
  ): Promise<unknown> {
    return this.request("POST", `/concepts/${sourceId}/mappings`, {
      kind,
      target_id: targetId,
      mean,
      std,
    });
  }

  removeMapping(sourceId: number, kind: MappingKind, targetId: number): Promise<{ removed: boolean }> {
    return this.request("DELETE", `/concepts/${sourceId}/mappings/${kind}/${targetId}`);
  }

  positions(): Promise<MachinePosition[]> {
    return this.request("GET", "/swarm/positions");
  }

  issueGoal(machineId: number, lat: number, lon: number, alt = 0): Promise<Assignment[]> {
    return this.request("POST", `/machines/${machineId}/goal`, { lat, lon, alt });
  }

  submitTask(script: { op: string; [k: string]: unknown }[], concepts: string[]): Promise<Assignment[]> {
    return this.request("POST", "/swarm/tasks", { script, concepts });
  }

  getTask(taskId: number): Promise<Task> {
    return this.request("GET", `/swarm/tasks/${taskId}`);
  }
}
