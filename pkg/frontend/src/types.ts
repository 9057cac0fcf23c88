export type MappingKind = "attribute" | "action" | "ann";

export interface Concept {
  id: number;
  name: string;
  description: string;
  attributes?: MappingRow[];
  actions?: MappingRow[];
  anns?: MappingRow[];
}

export interface MappingRow {
  target_id: number;
  target_name?: string;
  mean: number;
  std: number;
}

export interface MachinePosition {
  machine_id: number;
  name: string;
  lat: number;
  lon: number;
  alt: number;
}

export type AssignmentStatus = "queued" | "delivered" | "running" | "done" | "failed";

export interface Assignment {
  id: number;
  task_id: number;
  machine_id: number;
  ann_ids: number[];
  status: AssignmentStatus;
}

export interface Task {
  id: number;
  steps: { op: string; [key: string]: unknown }[];
  concepts: string[];
  assignments: Assignment[];
}

export interface ApiError {
  code: string;
  message: string;
  detail?: Record<string, unknown>;
}
