import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ConceptForm } from "../src/conceptForm.js";

interface Call {
  method: string;
  url: string;
  body?: unknown;
}

function recordingClient(calls: Call[]): ApiClient {
  return new ApiClient("", async (url, init) => {
    calls.push({
      method: init?.method ?? "GET",
      url,
      body: init?.body ? JSON.parse(init.body as string) : undefined,
    });
    return new Response(JSON.stringify({ id: 42 }), { status: 201 });
  });
}

describe("ConceptForm", () => {
  it("refuses to submit an invalid name without any request", async () => {
    const calls: Call[] = [];
    const form = new ConceptForm(recordingClient(calls));
    form.name = "  ";
    await expect(form.submit()).rejects.toThrow("name");
    expect(calls).toHaveLength(0);
  });

  it("stages only valid mappings", () => {
    const form = new ConceptForm(recordingClient([]));
    expect(form.stageMapping("attribute", 3, 0.7, 0.1)).toBe(true);
    expect(form.stageMapping("attribute", 3, 1.7, 0.1)).toBe(false);
    expect(form.pending).toHaveLength(1);
    expect(form.errors.map((e) => e.field)).toContain("mean");
  });

  it("submits the concept then each staged mapping, in order", async () => {
    const calls: Call[] = [];
    const form = new ConceptForm(recordingClient(calls));
    form.name = "building";
    form.description = "enclosed structure";
    form.stageMapping("attribute", 3, 0.9, 0.05);
    form.stageMapping("action", 5, 0.6, 0.1);
    const id = await form.submit();
    expect(id).toBe(42);
    expect(calls.map((c) => `${c.method} ${c.url}`)).toEqual([
      "POST /concepts",
      "POST /concepts/42/mappings",
      "POST /concepts/42/mappings",
    ]);
    expect(calls[1]!.body).toEqual({ kind: "attribute", target_id: 3, mean: 0.9, std: 0.05 });
    expect(calls[2]!.body).toEqual({ kind: "action", target_id: 5, mean: 0.6, std: 0.1 });
  });
});
