import { ApiClient, ServerError } from "./api.js";
import { ConceptForm } from "./conceptForm.js";
import { SwarmMapState, fitViewport, project, unproject } from "./mapState.js";
import type { Concept, MappingKind } from "./types.js";

const MAP_W = 640;
const MAP_H = 480;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  node.append(...children);
  return node;
}

function errorText(err: unknown): string {
  if (err instanceof ServerError) return `${err.body.code}: ${err.body.message}`;
  return err instanceof Error ? err.message : String(err);
}

// ---- concept browser -------------------------------------------------------

export class ConceptBrowser {
  readonly root = el("section", { class: "browser" });
  private banner = el("div", { class: "banner hidden" });
  private list = el("div", { class: "concept-list" });
  private concepts: Concept[] = [];

  constructor(private readonly api: ApiClient) {
    this.root.append(this.banner, this.buildCreateForm(), this.list);
  }

  async refresh(): Promise<void> {
    try {
      this.concepts = await this.api.listConcepts();
      this.banner.classList.add("hidden");
    } catch (err) {
      if (err instanceof ServerError) throw err;
      // transport failure: offline banner, never cache writes
      this.banner.textContent = "offline: API unreachable";
      this.banner.classList.remove("hidden");
      return;
    }
    this.renderList();
  }

  private renderList(): void {
    this.list.replaceChildren();
    if (this.concepts.length === 0) {
      this.list.append(el("p", { class: "empty" }, "No concepts yet. Create one above."));
      return;
    }
    for (const concept of this.concepts) {
      this.list.append(this.renderRow(concept));
    }
  }

  private renderRow(concept: Concept): HTMLElement {
    const details = el("div", { class: "mappings hidden" });
    const toggle = el("button", { class: "expand" }, "+");
    toggle.addEventListener("click", async () => {
      if (!details.classList.contains("hidden")) {
        details.classList.add("hidden");
        toggle.textContent = "+";
        return;
      }
      const full = await this.api.getConcept(concept.id, ["attributes", "actions", "anns"]);
      details.replaceChildren(
        this.renderMappingGroup(full, "attribute", full.attributes ?? []),
        this.renderMappingGroup(full, "action", full.actions ?? []),
        this.renderMappingGroup(full, "ann", full.anns ?? []),
        this.buildMappingForm(full),
      );
      details.classList.remove("hidden");
      toggle.textContent = "-";
    });
    return el(
      "div",
      { class: "concept-row", "data-id": String(concept.id) },
      el("div", {}, toggle, el("strong", {}, concept.name), ` ${concept.description}`),
      details,
    );
  }

  private renderMappingGroup(
    source: Concept,
    kind: MappingKind,
    rows: { target_id: number; target_name?: string; mean: number; std: number }[],
  ): HTMLElement {
    const group = el("div", { class: "group" }, el("h4", {}, `${kind}s`));
    if (rows.length === 0) {
      group.append(el("span", { class: "empty" }, "none"));
      return group;
    }
    for (const row of rows) {
      const remove = el("button", {}, "unmap");
      remove.addEventListener("click", async () => {
        await this.api.removeMapping(source.id, kind, row.target_id);
        await this.refresh();
      });
      group.append(
        el(
          "div",
          { class: "mapping" },
          `${row.target_name ?? row.target_id} (mean ${row.mean}, std ${row.std}) `,
          remove,
        ),
      );
    }
    return group;
  }

  private buildCreateForm(): HTMLElement {
    const name = el("input", { placeholder: "name" });
    const description = el("input", { placeholder: "description" });
    const error = el("span", { class: "error" });
    const submit = el("button", {}, "create concept");
    submit.addEventListener("click", async () => {
      const form = new ConceptForm(this.api);
      form.name = name.value;
      form.description = description.value;
      if (form.validate().length > 0) {
        error.textContent = form.errors.map((e) => e.message).join("; ");
        return;
      }
      try {
        await form.submit();
        error.textContent = "";
        name.value = "";
        description.value = "";
        await this.refresh();
      } catch (err) {
        error.textContent = errorText(err);
      }
    });
    return el("div", { class: "create-form" }, name, description, submit, error);
  }

  private buildMappingForm(source: Concept): HTMLElement {
    const kind = el("select", {});
    for (const k of ["attribute", "action", "ann"]) kind.append(el("option", { value: k }, k));
    const target = el("select", {});
    for (const c of this.concepts) {
      if (c.id !== source.id) target.append(el("option", { value: String(c.id) }, c.name));
    }
    const mean = el("input", { type: "number", step: "0.05", value: "0.5", title: "mean" });
    const std = el("input", { type: "number", step: "0.05", value: "0.0", title: "std" });
    const error = el("span", { class: "error" });
    const submit = el("button", {}, "map");
    submit.addEventListener("click", async () => {
      const form = new ConceptForm(this.api);
      if (!form.stageMapping(kind.value, Number(target.value), Number(mean.value), Number(std.value))) {
        error.textContent = form.errors.map((e) => e.message).join("; ");
        return;
      }
      try {
        await this.api.createMapping(
          source.id,
          kind.value as MappingKind,
          Number(target.value),
          Number(mean.value),
          Number(std.value),
        );
        error.textContent = "";
        await this.refresh();
      } catch (err) {
        error.textContent = errorText(err);
      }
    });
    return el("div", { class: "mapping-form" }, kind, target, mean, std, submit, error);
  }
}

// ---- swarm map --------------------------------------------------------------

export class SwarmMapScreen {
  readonly root = el("section", { class: "map-screen" });
  private svg: SVGSVGElement;
  private status = el("div", { class: "status" });
  private toast = el("div", { class: "toast" });
  private assignmentsBox = el("div", { class: "assignments" });
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(readonly state: SwarmMapState) {
    this.svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    this.svg.setAttribute("viewBox", `0 0 ${MAP_W} ${MAP_H}`);
    this.svg.setAttribute("class", "map");
    this.svg.addEventListener("click", (event) => void this.onMapClick(event));
    this.root.append(this.status, this.svg, this.assignmentsBox, this.toast);
  }

  start(): void {
    this.timer = setInterval(() => void this.tick(), this.state.pollIntervalMs);
    void this.tick();
  }

  stop(): void {
    if (this.timer !== null) clearInterval(this.timer);
  }

  private async tick(): Promise<void> {
    await this.state.poll();
    this.render();
  }

  private async onMapClick(event: MouseEvent): Promise<void> {
    const rect = this.svg.getBoundingClientRect();
    const x = ((event.clientX - rect.left) / rect.width) * MAP_W;
    const y = ((event.clientY - rect.top) / rect.height) * MAP_H;
    const view = fitViewport(this.state.positions);
    const { lat, lon } = unproject(view, x, y, MAP_W, MAP_H);
    try {
      await this.state.issueGoalAt(lat, lon);
      this.toast.textContent = "goal queued";
    } catch (err) {
      this.toast.textContent = errorText(err);
    }
    this.render();
  }

  render(): void {
    const age = this.state.staleness();
    const staleBadge = this.state.isStale() ? " [stale]" : "";
    this.status.textContent =
      this.state.lastError !== null
        ? `poll error: ${this.state.lastError}`
        : age === null
          ? "waiting for first poll"
          : `last poll ${age} ms ago${staleBadge}`;

    this.svg.replaceChildren();
    if (this.state.positions.length === 0) {
      const hint = document.createElementNS("http://www.w3.org/2000/svg", "text");
      hint.setAttribute("x", "20");
      hint.setAttribute("y", "40");
      hint.textContent = "no machines registered";
      this.svg.append(hint);
    }
    const view = fitViewport(this.state.positions);
    for (const pos of this.state.positions) {
      const { x, y } = project(view, pos.lat, pos.lon, MAP_W, MAP_H);
      const dot = document.createElementNS("http://www.w3.org/2000/svg", "circle");
      dot.setAttribute("cx", String(x));
      dot.setAttribute("cy", String(y));
      dot.setAttribute("r", "6");
      dot.setAttribute(
        "class",
        pos.machine_id === this.state.selectedMachineId ? "unit selected" : "unit",
      );
      dot.addEventListener("click", (event) => {
        event.stopPropagation();
        this.state.select(pos.machine_id);
        this.render();
      });
      const label = document.createElementNS("http://www.w3.org/2000/svg", "text");
      label.setAttribute("x", String(x + 8));
      label.setAttribute("y", String(y + 4));
      label.textContent = pos.name;
      this.svg.append(dot, label);
    }

    this.assignmentsBox.replaceChildren(
      el("h4", {}, "assignments"),
      ...this.state.watchedAssignments.map((a) =>
        el("div", { class: `assignment ${a.status}` }, `#${a.id} machine ${a.machine_id}: ${a.status}`),
      ),
    );
  }
}
