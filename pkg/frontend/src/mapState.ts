import type { ApiClient } from "./api.js";
import type { Assignment, MachinePosition } from "./types.js";

export const DEFAULT_POLL_MS = 1000;

export interface Viewport {
  latMin: number;
  latMax: number;
  lonMin: number;
  lonMax: number;
}

/** Fit all positions with a margin; falls back to a unit box around (0,0). */
export function fitViewport(positions: MachinePosition[], margin = 0.0005): Viewport {
  if (positions.length === 0) {
    return { latMin: -1, latMax: 1, lonMin: -1, lonMax: 1 };
  }
  const lats = positions.map((p) => p.lat);
  const lons = positions.map((p) => p.lon);
  return {
    latMin: Math.min(...lats) - margin,
    latMax: Math.max(...lats) + margin,
    lonMin: Math.min(...lons) - margin,
    lonMax: Math.max(...lons) + margin,
  };
}

/** Lat/lon to pixel coordinates, y flipped so north is up. */
export function project(
  view: Viewport,
  lat: number,
  lon: number,
  width: number,
  height: number,
): { x: number; y: number } {
  const x = ((lon - view.lonMin) / (view.lonMax - view.lonMin)) * width;
  const y = (1 - (lat - view.latMin) / (view.latMax - view.latMin)) * height;
  return { x, y };
}

export function unproject(
  view: Viewport,
  x: number,
  y: number,
  width: number,
  height: number,
): { lat: number; lon: number } {
  const lon = view.lonMin + (x / width) * (view.lonMax - view.lonMin);
  const lat = view.latMin + (1 - y / height) * (view.latMax - view.latMin);
  return { lat, lon };
}

/** Poll-driven map state. Pure transitions so the screen can render from a
 * snapshot; staleness is measured against the last successful poll. */
export class SwarmMapState {
  positions: MachinePosition[] = [];
  selectedMachineId: number | null = null;
  lastPollAt: number | null = null;
  lastError: string | null = null;
  watchedAssignments: Assignment[] = [];

  constructor(
    private readonly api: ApiClient,
    public readonly pollIntervalMs: number = DEFAULT_POLL_MS,
    private readonly now: () => number = () => Date.now(),
  ) {}

  async poll(): Promise<void> {
    try {
      this.positions = await this.api.positions();
      this.lastPollAt = this.now();
      this.lastError = null;
    } catch (err) {
      this.lastError = err instanceof Error ? err.message : String(err);
    }
    await this.refreshAssignments();
  }

  /** Milliseconds since the last successful poll, or null before the first. */
  staleness(): number | null {
    return this.lastPollAt === null ? null : this.now() - this.lastPollAt;
  }

  isStale(): boolean {
    const age = this.staleness();
    return age === null || age > this.pollIntervalMs;
  }

  select(machineId: number | null): void {
    this.selectedMachineId = machineId;
  }

  /** Issue a goal at a map point; requires a selected unit. Returns the new
   * assignments, which are then watched for status changes. */
  async issueGoalAt(lat: number, lon: number): Promise<Assignment[]> {
    if (this.selectedMachineId === null) {
      throw new Error("select a unit first");
    }
    const assignments = await this.api.issueGoal(this.selectedMachineId, lat, lon);
    this.watchedAssignments.push(...assignments);
    return assignments;
  }

  async submitTask(script: { op: string; [k: string]: unknown }[], concepts: string[]): Promise<Assignment[]> {
    const assignments = await this.api.submitTask(script, concepts);
    this.watchedAssignments.push(...assignments);
    return assignments;
  }

  private async refreshAssignments(): Promise<void> {
    const taskIds = [...new Set(this.watchedAssignments.map((a) => a.task_id))];
    for (const taskId of taskIds) {
      try {
        const task = await this.api.getTask(taskId);
        for (const fresh of task.assignments) {
          const idx = this.watchedAssignments.findIndex((a) => a.id === fresh.id);
          if (idx >= 0) this.watchedAssignments[idx] = fresh;
        }
      } catch {
        // a vanished task stops updating; keep the last known status visible
      }
    }
  }
}
